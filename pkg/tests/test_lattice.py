import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cavitydet.errors import ConfigError
from cavitydet.lattice import (
    SPINS,
    CavityField,
    CoarseGridWarning,
    FieldKind,
    GammaSet,
    ScalarMode,
    bar_product,
    completeness_closed_form,
    completeness_sum,
    dirac_residual,
    dispersion,
    kg_inner,
    lattice,
    mode_index,
    momentum_of,
    shell,
    shell_size,
    spinor,
    spinor_inner,
)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("r", [1, 2, 3])
def test_shell_sizes_and_norms(n, r):
    pts = shell(n, r)
    assert len(pts) == shell_size(n, r) == (2 * r + 1) ** n - (2 * r - 1) ** n
    assert np.all(np.max(np.abs(pts), axis=1) == r)
    assert len({tuple(p) for p in pts}) == len(pts)


def test_lattice_excludes_zero_mode():
    pts = lattice(2, 3)
    assert not np.any(np.all(pts == 0, axis=1))
    assert len(pts) == 7 ** 2 - 1
    with pytest.raises(ConfigError):
        mode_index((0, 0))
    with pytest.raises(ConfigError):
        momentum_of((0,), 1.0)


def test_field_validation():
    with pytest.raises(ConfigError):
        CavityField(4, 1.0)
    with pytest.raises(ConfigError):
        CavityField(2, 1.0, 0.0, FieldKind.SPINOR)
    with pytest.raises(ConfigError):
        CavityField(1, -1.0)
    with pytest.raises(ConfigError):
        CavityField(1, 1.0, -0.1)


@given(st.integers(-6, 6).filter(bool), st.floats(0.5, 5.0), st.floats(0.0, 3.0))
def test_dispersion_on_shell(l, L, m):
    k = momentum_of((l,), L)
    assert np.isclose(float(dispersion(k, m)), math.sqrt((2 * math.pi * l / L) ** 2 + m * m))


@pytest.mark.parametrize("m", [0.0, 0.8])
def test_kg_orthonormality(m):
    f = CavityField(2, 1.7, m)
    a, b = (1, 0), (1, -2)
    assert np.isclose(kg_inner(ScalarMode(a, f), ScalarMode(a, f)), 1.0, atol=1e-12)
    assert abs(kg_inner(ScalarMode(a, f), ScalarMode(b, f))) < 1e-12
    with pytest.warns(CoarseGridWarning):
        kg_inner(ScalarMode(a, f), ScalarMode(b, f), N=4)


@pytest.mark.parametrize("n", [1, 3])
def test_clifford(n):
    assert GammaSet(n).clifford_defect() < 1e-15


@pytest.mark.parametrize("n", [1, 3])
@pytest.mark.parametrize("m", [0.0, 1.3])
def test_spinors_solve_dirac_and_are_orthonormal(n, m):
    f = CavityField(n, 2.0, m, FieldKind.SPINOR)
    for l in lattice(n, 2)[:20]:
        k = momentum_of(l, f.L)
        for s in SPINS:
            for eps in (1, -1):
                assert dirac_residual(k, s, eps, f) < 1e-12
    la = tuple(lattice(n, 1)[0])
    assert np.isclose(spinor_inner((la, 0.5, 1), (la, 0.5, 1), f), 1.0, atol=1e-12)
    assert abs(spinor_inner((la, 0.5, 1), (la, -0.5, 1), f)) < 1e-12


def test_spinor_rejects_bad_labels():
    f = CavityField(1, 1.0, 1.0, FieldKind.SPINOR)
    with pytest.raises(ConfigError):
        spinor([1.0], 0.3, 1, f)
    with pytest.raises(ConfigError):
        spinor([1.0], 0.5, 0, f)
    with pytest.raises(ConfigError):
        spinor([1.0], 0.5, 1, CavityField(1, 1.0))


def test_spinor_pins_example():
    # massive bar products at equal momentum are eps * delta; massless ones vanish
    f = CavityField(3, 1.0, 2.0, FieldKind.SPINOR)
    k = momentum_of((1, -1, 2), 1.0)
    assert np.isclose(bar_product(k, 0.5, 1, k, 0.5, 1, f), 1.0)
    assert np.isclose(bar_product(k, 0.5, -1, k, 0.5, -1, f), -1.0)
    assert abs(bar_product(k, 0.5, 1, k, -0.5, 1, f)) < 1e-14
    f0 = CavityField(3, 1.0, 0.0, FieldKind.SPINOR)
    assert abs(bar_product(k, 0.5, 1, k, 0.5, 1, f0)) < 1e-14
    assert np.allclose(completeness_sum(k, 1, f), completeness_closed_form(k, 1, f), atol=1e-12)
