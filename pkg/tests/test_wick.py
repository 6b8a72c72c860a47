import numpy as np
import pytest
from hypothesis import given, strategies as st

from cavitydet.errors import CoincidenceLimit, MalformedWord, ModeOutsideSpace, OpenSpinorIndex
from cavitydet.fock import word_vev
from cavitydet.lattice import CavityField, FieldKind, momentum_of, scalar_mode_full
from cavitydet.profiles import detector_propagator
from cavitydet.suite import ALGEBRAS, compare_case, random_case
from cavitydet.wick import (
    Group,
    Ladder,
    ScalarField,
    WickConfig,
    Word,
    contraction_value,
    enumerate_full_contractions,
    evaluate_vev,
    format_word,
    parse_word,
    scalar_propagator_timedomain,
    spinor_propagator_timedomain,
)

MODES = [(1,), (-1,), (2,), (-2,)]
PTS = {"y1": (0.4, [0.3]), "y2": (-0.2, [-0.5])}
K, P = (1,), (-2,)


def _phi(field, l, y):
    t, x = PTS[y]
    return scalar_mode_full(t, np.array(x), momentum_of(l, field.L), field)


def _bracket(field):
    return (np.conj(_phi(field, K, "y2") * _phi(field, P, "y1"))
            + np.conj(_phi(field, K, "y1") * _phi(field, P, "y2")))


def _terms(word, cfg):
    """Nonzero per-pairing values, sign included."""
    out = []
    for pr in enumerate_full_contractions(word, cfg):
        v = pr.sign * np.prod([complex(contraction_value(word, p, cfg).value) for p in pr.pairs])
        if v != 0:
            out.append(v)
    return out


# ---------------------------------------------------------------- worked examples


def test_detector_example():
    Om, t1, t2 = 2.0, 1.0, 0.3
    cfg = WickConfig.single(Omega=Om, points={"t1": (t1, [0.0]), "t2": (t2, [0.0])})
    w = parse_word("sm | T[ mu(t1) mu(t2) ] | sp")
    terms = _terms(w, cfg)
    expect = [np.exp(1j * Om * (t1 - t2)), -np.exp(-1j * Om * (t1 - t2)), complex(detector_propagator(t1 - t2, Om))]
    assert np.allclose(terms, expect, atol=1e-15)
    assert np.isclose(evaluate_vev(w, cfg), sum(expect))
    assert np.isclose(word_vev(None, w, cfg), sum(expect), atol=1e-14)


def test_real_linear_example():
    f = CavityField(1, 2.0, 0.5)
    cfg = WickConfig.single(f, MODES, points=PTS)
    w = parse_word("a[1] a[-2] | T[ phi(y1) phi(y2) ] |")
    terms = _terms(w, cfg)
    assert len(terms) == 2
    assert np.isclose(sum(terms), _bracket(f), atol=1e-16)
    assert np.isclose(evaluate_vev(w, cfg), word_vev(None, w, cfg), atol=1e-16)


def test_real_quadratic_example():
    f = CavityField(1, 2.0, 0.5)
    cfg = WickConfig.single(f, MODES, points=PTS)
    w = parse_word("a[1] a[-2] | T[ : phi(y1) phi(y1) : : phi(y2) phi(y2) : ] |")
    G = scalar_propagator_timedomain(PTS["y1"], PTS["y2"], f, modes=MODES).value
    assert len(enumerate_full_contractions(w, cfg)) == 8
    assert np.isclose(evaluate_vev(w, cfg), 4 * G * _bracket(f), rtol=1e-12)
    assert np.isclose(evaluate_vev(w, cfg), word_vev(None, w, cfg), rtol=1e-10)


def test_complex_quadratic_examples():
    f = CavityField(1, 2.0, 0.5, FieldKind.COMPLEX)
    cfg = WickConfig.single(f, MODES, points=PTS)
    G = scalar_propagator_timedomain(PTS["y1"], PTS["y2"], f, modes=MODES).value
    w = parse_word("| T[ : phid(y1) phi(y1) : : phid(y2) phi(y2) : ] |")
    assert len(enumerate_full_contractions(w, cfg)) == 1
    assert np.isclose(evaluate_vev(w, cfg), G * G, rtol=1e-12)
    # two particles of the same species cannot come out of phid phi vertices
    w = parse_word("a[1] a[-2] | T[ : phid(y1) phi(y1) : : phid(y2) phi(y2) : ] |")
    assert evaluate_vev(w, cfg) == 0
    # one particle and one antiparticle
    w = parse_word("a[1] b[-2] | T[ : phid(y1) phi(y1) : : phid(y2) phi(y2) : ] |")
    assert len(_terms(w, cfg)) == 2
    assert np.isclose(evaluate_vev(w, cfg), word_vev(None, w, cfg), rtol=1e-10)


def test_spinor_quadratic_example():
    f = CavityField(1, 2.0, 0.7, FieldKind.SPINOR)
    cfg = WickConfig.single(f, MODES, points=PTS)
    w = parse_word("| T[ : psibar(y1;A) psi(y1;A) : : psibar(y2;B) psi(y2;B) : ] |")
    S12 = spinor_propagator_timedomain(PTS["y1"], PTS["y2"], f, modes=MODES).value
    S21 = spinor_propagator_timedomain(PTS["y2"], PTS["y1"], f, modes=MODES).value
    assert len(enumerate_full_contractions(w, cfg)) == 1
    assert np.isclose(evaluate_vev(w, cfg), -np.trace(S12 @ S21), rtol=1e-12)
    assert np.isclose(evaluate_vev(w, cfg), word_vev(None, w, cfg), rtol=1e-10)


# ---------------------------------------------------------------- propagators


def test_scalar_propagator_against_oracle():
    f = CavityField(1, 2.0, 0.5, FieldKind.COMPLEX)
    cfg = WickConfig.single(f, MODES, points=PTS)
    G = scalar_propagator_timedomain(PTS["y1"], PTS["y2"], f, modes=MODES).value
    assert np.isclose(G, word_vev(None, parse_word("| T[ phi(y1) phid(y2) ] |"), cfg), rtol=1e-12)
    G21 = scalar_propagator_timedomain(PTS["y2"], PTS["y1"], f, modes=MODES).value
    assert np.isclose(G21, word_vev(None, parse_word("| T[ phi(y2) phid(y1) ] |"), cfg), rtol=1e-12)


def test_spinor_propagator_against_oracle():
    f = CavityField(1, 2.0, 0.7, FieldKind.SPINOR)
    cfg = WickConfig.single(f, MODES, points=PTS)
    S = spinor_propagator_timedomain(PTS["y2"], PTS["y1"], f, modes=MODES).value
    for a in range(4):
        for b in range(4):
            w = parse_word(f"| T[ psi(y2;{a}) psibar(y1;{b}) ] |")
            assert np.isclose(S[a, b], word_vev(None, w, cfg), atol=1e-13)
    with pytest.raises(CoincidenceLimit):
        spinor_propagator_timedomain((0.0, [0.0]), (0.0, [0.1]), f, modes=MODES)


def test_propagator_cutoff_tail_and_coincidence():
    f = CavityField(1, 2.0, 0.5)
    p = scalar_propagator_timedomain((1.0, [0.0]), (0.0, [0.3]), f, cutoff=64)
    assert p.tail is not None and p.tail < 1e-2 and not p.divergent
    assert scalar_propagator_timedomain((1.0, [0.0]), (1.0, [0.0]), f, cutoff=8).divergent


# ---------------------------------------------------------------- grammar


@pytest.mark.parametrize("text", [
    "sm | T[ mu(t1) mu(t2) ] | sp",
    "a[1,0] b[-1,2;+] | T[ : phid(x) phi(x) : psi(y;A) psibar(z;A) ] | ad[3]@g",
    "| T[ mu(a)@d2 ] | sp@d2",
])
def test_roundtrip_examples(text):
    w = parse_word(text)
    assert parse_word(format_word(w)) == w


@given(st.integers(0, 10_000), st.sampled_from(ALGEBRAS))
def test_roundtrip_random(seed, algebra):
    w = random_case(np.random.default_rng(seed), algebra).word
    assert parse_word(format_word(w)) == w


@pytest.mark.parametrize("text", [
    "T[ phi(x) ]",
    "ad[1] | T[ phi(x) ] |",
    "| T[ : phi(x) ] |",
    "| T[ psi(x) ] |",
    "| phi(x) |",
    "| T[ a[1] ] |",
    "| T[ phi(x;0) ] |",
    "| T[ qq(x) ] |",
])
def test_malformed_words(text):
    with pytest.raises(MalformedWord):
        parse_word(text)


def test_open_spinor_index_and_unknown_mode():
    f = CavityField(1, 2.0, 0.7, FieldKind.SPINOR)
    cfg = WickConfig.single(f, MODES, points=PTS)
    with pytest.raises(OpenSpinorIndex):
        evaluate_vev(parse_word("| T[ psi(y1;A) psibar(y2;B) ] |"), cfg)
    fr = CavityField(1, 2.0, 0.5)
    cfg = WickConfig.single(fr, MODES, points=PTS)
    with pytest.raises(ModeOutsideSpace):
        evaluate_vev(parse_word("a[5] | T[ phi(y1) ] |"), cfg)


def test_odd_word_and_ladder_only_words():
    f = CavityField(1, 2.0, 0.5)
    cfg = WickConfig.single(f, MODES, points=PTS)
    assert evaluate_vev(parse_word("| T[ phi(y1) ] |"), cfg) == 0
    w = Word((Ladder("a", (1,), False),), (), (Ladder("a", (1,), True),))
    assert np.isclose(evaluate_vev(w, cfg), 1.0)
    w = Word((), (Group((ScalarField("y1"), ScalarField("y1")), True),), ())
    assert evaluate_vev(w, cfg) == 0


# ---------------------------------------------------------------- randomized agreement


@pytest.mark.parametrize("algebra", ALGEBRAS)
def test_random_words_agree_with_oracle(algebra):
    rng = np.random.default_rng(hash(algebra) % 2 ** 32)
    for _ in range(30):
        row = compare_case(random_case(rng, algebra))
        assert row.passed, row
