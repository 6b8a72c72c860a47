import math

import numpy as np
import pytest
from scipy.integrate import dblquad
from scipy.special import dawsn

from cavitydet.errors import ConfigError, ModelMismatch
from cavitydet.feynman import (
    Diagram,
    ExternalState,
    Leg,
    Quantum,
    amplitude,
    amplitude_series,
    contraction_count,
    describe,
    enumerate_diagrams,
    export_diagrams,
    first_order_probability,
    leg_factor,
    total_amplitude,
    two_detector_swap,
    unitarity_check,
    vacuum_loop,
    vnrp_second_order,
)
from cavitydet.fock import space_for_word, word_vev
from cavitydet.lattice import CavityField, FieldKind, dirac_bar, spinor, spinor_norm_factor
from cavitydet.profiles import DetectorSpec, GaussianProfile, GaussianSwitching, PointLike, SuddenSwitching
from cavitydet.response import vep_model1_gaussian_switch
from cavitydet.wick import FieldSetup, WickConfig, enumerate_full_contractions, parse_word

KIND = {1: FieldKind.REAL, 2: FieldKind.REAL, 3: FieldKind.COMPLEX, 4: FieldKind.SPINOR}


def _out(model, quanta):
    return ExternalState((("d", "e"),), quanta)


# ---------------------------------------------------------------- combinatorics

COUNT_CASES = [
    (1, ExternalState.vacuum(), 1, 1),
    (2, ExternalState(quanta=[Quantum((l,)) for l in (1, 2, 3, 4)]), 6, 24),
    (3, ExternalState(quanta=[Quantum((1,)), Quantum((2,)), Quantum((-1,), True), Quantum((-2,), True)]), 4, 4),
    (4, ExternalState(quanta=[Quantum((1,), False, 0.5), Quantum((-1,), True, 0.5)]), 2, 2),
]


@pytest.mark.parametrize("model,out,ndiag,ncontr", COUNT_CASES)
def test_diagram_counts(model, out, ndiag, ncontr):
    vac = ExternalState.vacuum()
    ds = enumerate_diagrams(model, 2, vac, out)
    assert len(ds) == ndiag
    assert contraction_count(model, 2, vac, out) == ncontr
    if model == 2:
        assert {d.symmetry_factor for d in ds} == {4}


@pytest.mark.parametrize("model,out,ndiag,ncontr", COUNT_CASES)
def test_diagrams_partition_the_contractions(model, out, ndiag, ncontr):
    # every Wick contraction of the vertex word lands in exactly one diagram
    ds = enumerate_diagrams(model, 2, ExternalState.vacuum(), out)
    word = ds[0].word
    allp = enumerate_full_contractions(word, kinds={"f": KIND[model]})
    seen = [p for d in ds for p in d.pairings]
    assert sorted(p.pairs for p in seen) == sorted(p.pairs for p in allp)
    assert len({d.key for d in ds}) == len(ds)


def test_odd_orders_vanish_for_diagonal_detector_transitions():
    vac = ExternalState.vacuum()
    assert enumerate_diagrams(1, 1, vac, ExternalState(quanta=[Quantum((1,))])) == []
    assert enumerate_diagrams(1, 1, vac, vac) == []
    assert len(enumerate_diagrams(1, 1, vac, _out(1, [Quantum((1,))]))) == 1


def test_state_validation():
    with pytest.raises(ConfigError):
        ExternalState(quanta=[Quantum((1,), False, 0.5), Quantum((1,), False, 0.5)])
    with pytest.raises(ModelMismatch):
        enumerate_diagrams(2, 2, ExternalState.vacuum(), ExternalState(quanta=[Quantum((1,), True)]))
    with pytest.raises(ModelMismatch):
        enumerate_diagrams(4, 2, ExternalState.vacuum(), ExternalState(quanta=[Quantum((1,))]))
    with pytest.raises(ConfigError):
        ExternalState((("d", "x"),))
    assert ExternalState(quanta=[Quantum((1,))] * 3).norm() == pytest.approx(math.sqrt(6))


def test_text_export():
    ds = enumerate_diagrams(4, 2, ExternalState.vacuum(), COUNT_CASES[3][1])
    text = describe(ds)
    assert text.startswith("# word: ")
    assert text.count("\nend\n") + text.endswith("end\n") >= 2
    assert "symmetry_factor 1" in text and {"sign -1", "sign +1"} <= {l for l in text.splitlines()}
    assert export_diagrams(ds) in text


# ---------------------------------------------------------------- values


def _model1_oracle(field, det, ks):
    """Direct ordered double integral for |0,g> -> |1_k 1_p, g> at second order (Gaussian profile at 0)."""
    sigma, T = det.profile.sigma, det.switching.T

    def c(l, t):
        k = 2 * np.pi * l[0] / field.L
        w = math.hypot(k, field.m)
        return np.exp(1j * w * t) * np.exp(-sigma ** 2 * k ** 2 / 2) / np.sqrt(2 * w * field.L)

    chi = lambda t: np.exp(-t * t / (2 * T * T))

    def g(t2, t1):
        return (-det.lam ** 2 * chi(t1) * chi(t2) * np.exp(-1j * det.Omega * (t1 - t2))
                * (c(ks[0], t1) * c(ks[1], t2) + c(ks[1], t1) * c(ks[0], t2)))

    W = 12 * T
    kw = dict(epsabs=1e-14, epsrel=1e-11)
    re = dblquad(lambda t2, t1: g(t2, t1).real, -W, W, lambda t1: -W, lambda t1: t1, **kw)[0]
    im = dblquad(lambda t2, t1: g(t2, t1).imag, -W, W, lambda t1: -W, lambda t1: t1, **kw)[0]
    return re + 1j * im


@pytest.mark.parametrize("m", [0.0, 0.4])
def test_model1_two_quanta_against_direct_quadrature(m):
    f = CavityField(1, 10.0, m)
    det = DetectorSpec(1.0, 0.1, 1, GaussianSwitching(1.0), GaussianProfile(0.3))
    ks = [(1,), (-2,)]
    A = total_amplitude(1, 2, f, {"d": det}, None, ExternalState(quanta=[Quantum(k) for k in ks]))
    ref = _model1_oracle(f, det, ks)
    assert abs(A - ref) <= 1e-8 * abs(ref)
    # quadrature path agrees with the closed form
    A_gl = total_amplitude(1, 2, f, {"d": det}, None, ExternalState(quanta=[Quantum(k) for k in ks]),
                           method="gl", nodes=96)
    assert abs(A - A_gl) <= 1e-10 * abs(A)


def test_vacuum_loop_gaussian_closed_form_pin():
    # one mode pair, pointlike: A2 = -lam^2 sum_k (1/2 w L) sqrt(pi) T [sqrt(pi) T e^{-E^2T^2} - 2 i T dawsn(E T)]
    f = CavityField(1, 10.0, 0.0)
    T, lam, Om = 1.0, 0.1, 1.0
    det = DetectorSpec(Om, lam, 1, GaussianSwitching(T))
    w = 2 * np.pi / 10.0
    E = Om + w
    J = math.sqrt(math.pi) * T * (math.sqrt(math.pi) * T * math.exp(-E * E * T * T) - 2j * T * dawsn(E * T))
    expect = -lam ** 2 * 2 * J / (2 * w * 10.0)
    got = vacuum_loop(1, f, det, setup=FieldSetup(f, ((1,), (-1,))))
    assert abs(got - expect) < 1e-15
    # frozen from the closed form above
    assert abs(got - (-3.5275436114710716e-04 + 2.2119472487033406e-03j)) < 1e-15


@pytest.mark.parametrize("model", [1, 2, 3, 4])
def test_unitarity_matched_cutoffs(model):
    f = CavityField(1, 10.0, 0.3 if model != 1 else 0.0, KIND[model])
    det = DetectorSpec(1.0, 0.1, model, GaussianSwitching(1.0))
    assert unitarity_check(model, f, det, cutoff=6) < 1e-8 * det.lam ** 2
    # the negative control: mismatched cutoffs break the identity visibly
    assert unitarity_check(model, f, det, cutoff=6, loop_cutoff=2) > 1e-8 * det.lam ** 2


def test_vnrp_equals_one_minus_vep_model1():
    f = CavityField(1, 10.0, 0.0)
    det = DetectorSpec(1.0, 0.1, 1, GaussianSwitching(1.0))
    p = vep_model1_gaussian_switch(f, det, [8]).value
    assert abs(vnrp_second_order(1, f, det, cutoff=8) - (1 - p)) < 1e-15


def test_model4_loop_sign():
    # the closed fermion loop makes Re A2 negative, matching the positive excitation probability
    f = CavityField(1, 10.0, 0.0, FieldKind.SPINOR)
    det = DetectorSpec(1.0, 0.1, 4, GaussianSwitching(1.0))
    a2 = vacuum_loop(4, f, det, cutoff=4)
    p1 = first_order_probability(4, f, det, cutoff=4)
    assert a2.real < 0 and abs(2 * a2.real + p1) < 1e-12 * p1


def test_lambda_zero():
    f = CavityField(1, 10.0, 0.0)
    det = DetectorSpec(1.0, 0.0, 1, GaussianSwitching(1.0))
    assert vnrp_second_order(1, f, det, cutoff=4) == 1.0
    assert vacuum_loop(1, f, det, cutoff=4) == 0
    assert first_order_probability(1, f, det, cutoff=4) == 0


def test_model_mismatch_and_order_limit():
    f = CavityField(1, 10.0, 0.0)
    det = DetectorSpec(1.0, 0.1, 1, GaussianSwitching(1.0))
    d2 = enumerate_diagrams(2, 2)[0]
    with pytest.raises(ModelMismatch):
        amplitude(d2, f, det, cutoff=2)
    d3 = enumerate_diagrams(1, 3, ExternalState.vacuum(), _out(1, [Quantum((1,))]))[0]
    with pytest.raises(NotImplementedError):
        amplitude(d3, f, det, cutoff=2)


def test_amplitude_series_converges_with_gaussian_switching():
    f = CavityField(1, 10.0, 0.0)
    det = DetectorSpec(1.0, 0.1, 1, GaussianSwitching(1.0))
    d = enumerate_diagrams(1, 2)[0]
    s = amplitude_series(d, f, det, [4, 8, 16, 32])
    assert s.verdict.name == "Converged"


# ---------------------------------------------------------------- leg factors


def test_leg_factors():
    f = CavityField(1, 2.0, 0.5)
    w = math.hypot(np.pi, 0.5)
    assert np.isclose(leg_factor(Leg("scalar", "out", (1,)), 0.7, f), np.exp(-1j * w * 0.7) / math.sqrt(2 * w * 2.0))
    assert np.isclose(leg_factor(Leg("scalar", "in", (1,)), 0.7, f), np.exp(1j * w * 0.7) / math.sqrt(2 * w * 2.0))
    assert np.isclose(leg_factor(Leg("scalar", "through", (1,)), (1.0, -1.0), f), np.exp(-2j * w))
    assert leg_factor(Leg("detector", "out", excited=False), 1.0) == 1
    assert np.isclose(leg_factor(Leg("detector", "out"), 1.0, Omega=2.0), np.exp(-2j))
    fs = CavityField(1, 2.0, 0.5, FieldKind.SPINOR)
    k = np.array([np.pi])
    n = spinor_norm_factor(k, fs)
    out_p = leg_factor(Leg("spinor", "out", (1,), 0.5), 0.0, fs)
    out_a = leg_factor(Leg("spinor", "out", (1,), 0.5, True), 0.0, fs)
    in_p = leg_factor(Leg("spinor", "in", (1,), 0.5), 0.0, fs)
    assert np.allclose(out_p, n * dirac_bar(spinor(k, 0.5, 1, fs)))
    assert np.allclose(out_a, n * spinor(k, 0.5, -1, fs))
    assert np.allclose(in_p, n * spinor(k, 0.5, 1, fs))
    with pytest.raises(ConfigError):
        leg_factor(Leg("scalar", "sideways", (1,)), 0.0, f)


# ---------------------------------------------------------------- two detectors


def _swap_oracle(f, st, dA, dB, n=40, W=6.0):
    """Ordered time integral of the Fock-space vacuum expectation of the swap word."""
    xA, xB = dA.profile.x0[0], dB.profile.x0[0]
    w = parse_word("sm@B b[-1] a[1] | T[ mu(t1)@A : phid(t1) phi(t1) : mu(t2)@B : phid(t2) phi(t2) : ] | sp@A")
    cfg = WickConfig({"f": st}, {"A": dA.Omega, "B": dB.Omega}, {"t1": (0.0, [xA]), "t2": (0.0, [xB])})
    space = space_for_word(w, cfg)
    x, wt = np.polynomial.legendre.leggauss(n)
    x, wt = (x + 1) / 2, wt / 2
    tot = 0j
    for first_A in (True, False):
        for i in range(n):
            tb = -W + 2 * W * x[i]
            for j in range(n):
                ta = tb + (W - tb) * x[j]
                t1, t2 = (ta, tb) if first_A else (tb, ta)
                cfg.points = {"t1": (t1, [xA]), "t2": (t2, [xB])}
                weight = wt[i] * 2 * W * wt[j] * (W - tb)
                tot += weight * dA.switching.chi(t1) * dB.switching.chi(t2) * word_vev(space, w, cfg)
    return -dA.lam * dB.lam * tot


def _swap_setup(xB=1.3, lamB=0.3):
    f = CavityField(1, 8.0, 0.5, FieldKind.COMPLEX)
    st = FieldSetup(f, ((1,), (-1,)))
    dA = DetectorSpec(0.8, 0.2, 3, GaussianSwitching(1.0), PointLike((0.0,)))
    dB = DetectorSpec(1.1, lamB, 3, GaussianSwitching(1.0), PointLike((xB,)))
    return f, st, dA, dB


def test_two_detector_swap_against_oracle():
    f, st, dA, dB = _swap_setup()
    A = two_detector_swap(f, dA, dB, setup=st)
    ref = _swap_oracle(f, st, dA, dB)
    assert abs(A - ref) < 1e-6 * abs(ref)


def test_two_detector_swap_properties():
    f, st, dA, dB = _swap_setup(lamB=0.0)
    assert two_detector_swap(f, dA, dB, setup=st) == 0
    amps = [two_detector_swap(f, *_swap_setup(xB=x)[2:], setup=st) for x in (0.5, 1.0, 1.5, 0.5 + 8.0)]
    # the cavity is periodic, so shifting by L changes nothing; other separations differ
    assert abs(amps[3] - amps[0]) < 1e-15
    assert len({round(abs(a), 14) for a in amps[:3]}) == 3
    with pytest.raises(ModelMismatch):
        two_detector_swap(CavityField(1, 8.0), DetectorSpec(1.0, 0.1, 1, GaussianSwitching(1.0)),
                          DetectorSpec(1.0, 0.1, 1, GaussianSwitching(1.0)))


def test_spin_basis_phase_does_not_change_probabilities(monkeypatch):
    import cavitydet.lattice as lat

    f = CavityField(3, 3.0, 0.5, FieldKind.SPINOR)
    det = DetectorSpec(1.0, 0.1, 4, GaussianSwitching(0.8), GaussianProfile(0.2, (0.1, 0.0, 0.0)))
    p0 = first_order_probability(4, f, det, cutoff=1)
    a0 = vacuum_loop(4, f, det, cutoff=1)
    base = lat.xi
    phases = {0.5: np.exp(0.7j), -0.5: np.exp(-2.1j)}
    monkeypatch.setattr(lat, "xi", lambda s: phases[s] * base(s))
    assert np.isclose(first_order_probability(4, f, det, cutoff=1), p0, rtol=1e-13)
    assert np.isclose(vacuum_loop(4, f, det, cutoff=1), a0, rtol=1e-13)


def test_pair_amplitudes_model2_versus_model3():
    # distinct modes: the model-3 pair amplitude is half the model-2 one
    f2, f3 = CavityField(1, 4.0, 0.6), CavityField(1, 4.0, 0.6, FieldKind.COMPLEX)
    vac = ExternalState.vacuum()
    a2 = total_amplitude(2, 1, f2, DetectorSpec(1.0, 0.3, 2, GaussianSwitching(1.0)), vac,
                         _out(2, [Quantum((1,)), Quantum((-2,))]))
    a3 = total_amplitude(3, 1, f3, DetectorSpec(1.0, 0.3, 3, GaussianSwitching(1.0)), vac,
                         _out(3, [Quantum((1,)), Quantum((-2,), True)]))
    assert a3 == pytest.approx(a2 / 2, rel=1e-13)
