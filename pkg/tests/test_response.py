import math

import mpmath as mp
import numpy as np
import pytest

from cavitydet.errors import ConfigError, NotApplicable
from cavitydet.feynman import first_order_probability
from cavitydet.lattice import CavityField, FieldKind
from cavitydet.profiles import DetectorSpec, GaussianProfile, GaussianSwitching, PointLike, SuddenSwitching
from cavitydet.response import (
    VepBreakdown,
    cutoff_schedule,
    inverse_omega_sums,
    model4_weight,
    vep,
    vep_model1,
    vep_model1_gaussian_switch,
    vep_model4_renorm,
    vep_unrenormalized_tadpole,
)
from cavitydet.wick import FieldSetup

# model 1, n = 1, sudden pointlike, lam = 0.1, Omega = 1, L = 1, T = 1; the full
# lattice sum evaluated with mpmath (30 digits) as an independent oracle
MODEL1_N1_INFINITE = 3.41979383391075863e-05
MODEL1_N1_AT_4000 = 3.41979371811807290e-05


def _model1_mpmath(cutoff):
    mp.mp.dps = 30
    g = lambda l: mp.mpf("0.01") * 4 * mp.sin((1 + 2 * mp.pi * l) / 2) ** 2 / (1 + 2 * mp.pi * l) ** 2 / (2 * mp.pi * l)
    return float(mp.nsum(g, [1, cutoff]))


def test_cutoff_schedule():
    assert cutoff_schedule(1000) == [125, 250, 500, 1000]
    assert cutoff_schedule([1, 5, 9]) == [1, 5, 9]
    with pytest.raises(ConfigError):
        cutoff_schedule([3, 2])
    with pytest.raises(ConfigError):
        cutoff_schedule(0)


def test_model1_n1_against_mpmath():
    det = DetectorSpec(1.0, 0.1, 1, SuddenSwitching(1.0))
    s = vep_model1(CavityField(1, 1.0), det, [500, 1000, 2000, 4000])
    assert math.isclose(s.values[-1], MODEL1_N1_AT_4000, rel_tol=1e-12)
    assert math.isclose(_model1_mpmath(100), s_small(det), rel_tol=1e-12)
    assert s.verdict.name == "Converged"
    # the rigorous tail bound covers the true remainder
    assert abs(MODEL1_N1_INFINITE - s.value) <= s.tail_bounds[-1]


def s_small(det):
    return vep_model1(CavityField(1, 1.0), det, [100]).value


@pytest.mark.parametrize("model,kind,ns", [(1, "real", (1, 2)), (2, "real", (1, 2)), (3, "complex", (1, 2)),
                                           (4, "spinor", (1, 3))])
@pytest.mark.parametrize("m", [0.0, 0.5])
def test_closed_forms_match_amplitude_sums(model, kind, ns, m):
    # the weight-based sums against explicit first-order amplitudes (explicit spinors for model 4)
    for n in ns:
        f = CavityField(n, 3.0, m, kind)
        det = DetectorSpec(1.0, 0.1, model, GaussianSwitching(0.8), GaussianProfile(0.2, (0.1,) * n))
        _, s = vep(f, det, [3])
        p = first_order_probability(model, f, det, setup=FieldSetup.from_cutoff(f, 3))
        assert math.isclose(s.value, p, rel_tol=1e-12)


def test_model2_is_twice_model3():
    f2, f3 = CavityField(1, 2.0, 0.3), CavityField(1, 2.0, 0.3, FieldKind.COMPLEX)
    sw = GaussianSwitching(1.0)
    b2, _ = vep(f2, DetectorSpec(1.0, 0.1, 2, sw), [4])
    b3, _ = vep(f3, DetectorSpec(1.0, 0.1, 3, sw), [4])
    assert b2.total == 2 * b3.total


def test_gaussian_switch_closed_form_equals_generic():
    f = CavityField(2, 1.5, 0.2)
    det = DetectorSpec(1.3, 0.2, 1, GaussianSwitching(0.6), PointLike((0.0, 0.0)))
    a = vep_model1(f, det, [2, 4, 6, 8]).values
    b = vep_model1_gaussian_switch(f, det, [2, 4, 6, 8]).values
    assert np.allclose(a, b, rtol=1e-13, atol=0)


def test_model4_weight_massless_limit():
    k, p = np.array([[1.0, 0.0, 0.0]]), np.array([[0.0, 2.0, 0.0]])
    assert np.isclose(model4_weight(k, p, 0.0)[0], 2.0)
    assert np.isclose(model4_weight(np.array([[1.0]]), np.array([[-3.0]]), 0.0)[0], 4.0)
    assert np.isclose(model4_weight(np.array([[1.0]]), np.array([[3.0]]), 0.0)[0], 0.0)


def test_model4_fast_path_equals_generic_sum():
    f = CavityField(1, 1.0, 0.0, FieldKind.SPINOR)
    det = DetectorSpec(1.0, 0.1, 4, SuddenSwitching(0.5))
    _, fast = vep_model4_renorm(f, det, [5, 10, 20, 40])
    _, slow = vep_model4_renorm(f, det, [5, 10, 20, 40], fast=False)
    assert np.allclose(fast.values, slow.values, rtol=1e-12, atol=0)


def test_tadpole_closed_form():
    f = CavityField(1, 2.0, 0.7)
    det = DetectorSpec(1.0, 0.1, 2, GaussianSwitching(1.0))
    s = vep_unrenormalized_tadpole(f, det, [10])
    inv = sum(1 / math.sqrt((2 * math.pi * l / 2.0) ** 2 + 0.49) for l in range(-10, 11) if l)
    assert inv_close(inverse_omega_sums(f, [10])[0], inv)
    expect = 0.01 / (4 * 4.0) * inv ** 2 * 2 * math.pi * math.exp(-1.0)
    assert math.isclose(s.value, expect, rel_tol=1e-12)
    fs = CavityField(1, 2.0, 0.0, FieldKind.SPINOR)
    assert vep_unrenormalized_tadpole(fs, DetectorSpec(1.0, 0.1, 4, GaussianSwitching(1.0)), [10]).value == 0.0
    with pytest.raises(NotApplicable):
        vep_unrenormalized_tadpole(f, DetectorSpec(1.0, 0.1, 1, GaussianSwitching(1.0)), [10])


def inv_close(a, b):
    return math.isclose(a, b, rel_tol=1e-13)


def test_breakdown_and_dispatch():
    f = CavityField(1, 2.0, 0.7)
    det = DetectorSpec(1.0, 0.1, 2, GaussianSwitching(1.0))
    b, _ = vep(f, det, [2, 4, 6, 8], renormalized=False)
    assert not b.renormalized and b.tadpole_term > 0
    assert b.total == b.pair_creation_term + b.tadpole_term
    with pytest.raises(ValueError):
        VepBreakdown(1.0, 2.0, True)


def test_lambda_zero_gives_zero():
    det = DetectorSpec(1.0, 0.0, 1, SuddenSwitching(1.0))
    assert vep_model1(CavityField(1, 1.0), det, [10]).value == 0.0


def test_model_mismatch():
    with pytest.raises(ConfigError):
        vep_model1(CavityField(1, 1.0), DetectorSpec(1.0, 0.1, 2, SuddenSwitching(1.0)), [10])


@pytest.mark.parametrize("T", [0.5, 0.3])
def test_model4_remainder_is_consistent(T):
    # T = 0.5 makes the cosine tail exact; T = 0.3 uses the summation-by-parts bound
    f = CavityField(1, 1.0, 0.0, FieldKind.SPINOR)
    det = DetectorSpec(1.0, 0.1, 4, SuddenSwitching(T), GaussianProfile(0.05))
    _, s = vep_model4_renorm(f, det, [50, 100, 200, 20000])
    assert s.verdict.name == "Converged"
    est, b = s.estimates, s.tail_bounds
    for i in range(3):
        assert abs(est[i] - est[-1]) <= b[i] + b[-1]
        # explicit summation between two cutoffs reproduces the drop in the remainder
        drop = s.remainders[i] - s.remainders[-1]
        assert abs((s.values[-1] - s.values[i]) - drop) <= b[i] + b[-1] + 1e-16
        assert drop > 1e-5
    assert s.value == est[-1]


def test_models23_pointlike_shell_envelope_dominates_increments():
    f = CavityField(1, 1.0, 0.0, FieldKind.COMPLEX)
    det = DetectorSpec(1.0, 0.1, 3, SuddenSwitching(0.5))
    _, s = vep(f, det, [100, 200, 400, 800])
    for i in range(3):
        assert s.values[i + 1] - s.values[i] <= s.tail_bounds[i]
    # the partner-frequency bound beats plain lattice counting by orders of magnitude
    assert s.tail_bounds[-1] < 1e-9
