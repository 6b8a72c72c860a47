"""Momentum lattice, mode functions and Dirac spinors for a periodic cavity.

The cavity is [-L/2, L/2]^n with periodic boundary conditions.  Allowed
momenta are k = 2*pi*l/L with l a nonzero integer vector; the zero mode is
excluded everywhere.  Spinors live in C^4 with the Dirac representation; in
one spatial dimension the momentum is carried by component 3, so that
k.gamma = omega*gamma^0 - k*gamma^3.
"""
from __future__ import annotations

import enum
import itertools
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError


class FieldKind(str, enum.Enum):
    REAL = "real"
    COMPLEX = "complex"
    SPINOR = "spinor"


@dataclass(frozen=True)
class CavityField:
    """Field content of the cavity: dimension n, side length L, mass m."""

    n: int
    L: float
    m: float = 0.0
    kind: FieldKind = FieldKind.REAL

    def __post_init__(self):
        object.__setattr__(self, "kind", FieldKind(self.kind))
        if self.n not in (1, 2, 3):
            raise ConfigError(f"n must be 1, 2 or 3, got {self.n}")
        if self.kind is FieldKind.SPINOR and self.n not in (1, 3):
            raise ConfigError("spinor fields are defined for n = 1 or n = 3 only")
        if not self.L > 0:
            raise ConfigError(f"L must be positive, got {self.L}")
        if not self.m >= 0:
            raise ConfigError(f"m must be non-negative, got {self.m}")

    @property
    def massless(self) -> bool:
        return self.m == 0

    @property
    def volume(self) -> float:
        return self.L ** self.n

    def momentum(self, l) -> np.ndarray:
        return momentum_of(l, self.L)

    def omega(self, l) -> np.ndarray:
        return dispersion(momentum_of(l, self.L), self.m)


# ---------------------------------------------------------------- lattice


def mode_index(l, n: int | None = None) -> tuple[int, ...]:
    """Validate an integer mode label; the zero vector is rejected."""
    if np.isscalar(l):
        l = (l,)
    t = tuple(int(v) for v in l)
    if n is not None and len(t) != n:
        raise ConfigError(f"mode {t} has length {len(t)}, expected {n}")
    if not any(t):
        raise ConfigError("the zero mode is excluded from the lattice")
    return t


def momentum_of(l, L: float) -> np.ndarray:
    """k = 2*pi*l/L; works on a single label or an array of shape (..., n)."""
    arr = np.asarray(l, dtype=float)
    if arr.ndim == 0:
        arr = arr[None]
    if arr.ndim == 1 and not np.any(arr):
        raise ConfigError("the zero mode is excluded from the lattice")
    return 2.0 * np.pi * arr / L


def dispersion(k, m: float) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if k.ndim == 0:
        k = k[None]
    return np.sqrt(np.sum(k * k, axis=-1) + m * m)


def shell(n: int, r: int) -> np.ndarray:
    """Integer points with sup-norm exactly r, shape (N, n), lexicographic order."""
    if r < 0:
        raise ValueError("negative radius")
    if r == 0:
        return np.zeros((0, n), dtype=np.int64)
    full = np.arange(-r, r + 1)
    inner = np.arange(-r + 1, r)
    blocks = []
    # axis i is the first coordinate at |l_i| = r; earlier axes stay inside.
    for i in range(n):
        for sgn in (-r, r):
            axes = [inner] * i + [np.array([sgn])] + [full] * (n - i - 1)
            grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
            blocks.append(grid)
    pts = np.concatenate(blocks, axis=0)
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def shell_size(n: int, r: int) -> int:
    return 0 if r == 0 else (2 * r + 1) ** n - (2 * r - 1) ** n


def lattice(n: int, cutoff: int) -> np.ndarray:
    """All nonzero labels with sup-norm <= cutoff, grouped by shell."""
    if cutoff < 1:
        return np.zeros((0, n), dtype=np.int64)
    return np.concatenate([shell(n, r) for r in range(1, cutoff + 1)], axis=0)


# ---------------------------------------------------------------- scalar modes


def scalar_mode_spatial(x, k, L: float, n: int) -> np.ndarray:
    """phi_k(x) = L^{-n/2} exp(i k.x)."""
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float).reshape(n)
    if n == 1 and x.ndim == 0:
        x = x[None]
    return L ** (-n / 2) * np.exp(1j * (x.reshape(*x.shape[:-1], n) @ k))


def scalar_mode_full(t, x, k, field: CavityField) -> np.ndarray:
    """Full time-dependent mode exp(-i(omega t - k.x)) / sqrt(2 omega L^n)."""
    k = np.asarray(k, dtype=float).reshape(field.n)
    w = float(dispersion(k, field.m))
    return np.exp(-1j * w * np.asarray(t)) * scalar_mode_spatial(x, k, field.L, field.n) / np.sqrt(2 * w)


@dataclass(frozen=True)
class ScalarMode:
    """c * phi~_k as a Klein-Gordon solution, with its analytic time derivative."""

    l: tuple
    field: CavityField
    coeff: complex = 1.0

    @property
    def k(self):
        return momentum_of(self.l, self.field.L)

    @property
    def omega(self):
        return float(dispersion(self.k, self.field.m))

    def value(self, t, x):
        return self.coeff * scalar_mode_full(t, x, self.k, self.field)

    def dt(self, t, x):
        return -1j * self.omega * self.value(t, x)


class CoarseGridWarning(UserWarning):
    """Quadrature grid too coarse to resolve the requested modes exactly."""


def periodic_grid(n: int, L: float, N: int) -> tuple[np.ndarray, float]:
    """Uniform periodic N^n grid on the cavity and the cell volume."""
    ax = -L / 2 + L * np.arange(N) / N
    pts = np.stack(np.meshgrid(*([ax] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return pts, (L / N) ** n


def _grid_points(lmax: int, N: int | None) -> int:
    need = 4 * lmax + 4
    if N is None:
        return need
    if N < need:
        warnings.warn(f"grid N={N} below 4*l_max+4={need}", CoarseGridWarning, stacklevel=3)
    return N


def kg_inner(a: ScalarMode, b: ScalarMode, t: float = 0.0, N: int | None = None) -> complex:
    """Klein-Gordon product -i int (a d0 b* - (d0 a) b*) over the cavity."""
    field = a.field
    lmax = max(max(abs(v) for v in a.l), max(abs(v) for v in b.l))
    N = _grid_points(lmax, N)
    X, dv = periodic_grid(field.n, field.L, N)
    f, df = a.value(t, X), a.dt(t, X)
    g, dg = b.value(t, X), b.dt(t, X)
    return complex(-1j * dv * np.sum(f * np.conj(dg) - df * np.conj(g)))


# ---------------------------------------------------------------- gamma matrices

SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)

GAMMA = (
    np.block([[_I2, _Z2], [_Z2, -_I2]]),
    *(np.block([[_Z2, s], [-s, _Z2]]) for s in SIGMA),
)
METRIC = np.diag([1.0, -1.0, -1.0, -1.0])


@dataclass(frozen=True)
class GammaSet:
    """Dirac representation; for n=1 only gamma^0 and gamma^3 are used."""

    n: int = 3

    @property
    def indices(self) -> tuple[int, ...]:
        return (0, 3) if self.n == 1 else (0, 1, 2, 3)

    def __getitem__(self, mu: int) -> np.ndarray:
        return GAMMA[mu]

    def clifford_defect(self) -> float:
        """max |{g^mu, g^nu} - 2 eta^{mu nu}| over the used indices."""
        worst = 0.0
        for mu, nu in itertools.product(self.indices, repeat=2):
            anti = GAMMA[mu] @ GAMMA[nu] + GAMMA[nu] @ GAMMA[mu]
            worst = max(worst, float(np.max(np.abs(anti - 2 * METRIC[mu, nu] * np.eye(4)))))
        return worst


def _kvec(k, n: int) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if k.ndim == 0:
        k = k[None]
    if k.shape[-1] != n:
        raise ConfigError(f"momentum of length {k.shape[-1]} for n={n}")
    return k


def _spatial_components(k: np.ndarray) -> np.ndarray:
    """Map an n-vector to its (k1, k2, k3) components; n=1 sits on axis 3."""
    if k.shape[-1] == 1:
        return np.array([0.0, 0.0, k[0]])
    return k


def sigma_dot(k) -> np.ndarray:
    k3 = _spatial_components(np.asarray(k, dtype=float))
    return sum(c * s for c, s in zip(k3, SIGMA))


def slash(k, field: CavityField) -> np.ndarray:
    """k.gamma = omega gamma^0 - sum_i k^i gamma^i with on-shell omega."""
    k = _kvec(k, field.n)
    w = float(dispersion(k, field.m))
    k3 = _spatial_components(k)
    return w * GAMMA[0] - sum(c * GAMMA[i + 1] for i, c in enumerate(k3))


# ---------------------------------------------------------------- spinors

SPINS = (0.5, -0.5)


def xi(s: float) -> np.ndarray:
    if s == 0.5:
        return np.array([1.0, 0.0], dtype=complex)
    if s == -0.5:
        return np.array([0.0, 1.0], dtype=complex)
    raise ConfigError(f"spin label must be +1/2 or -1/2, got {s}")


def _spinor(k, s, field: CavityField, particle: bool) -> np.ndarray:
    if field.kind is not FieldKind.SPINOR:
        raise ConfigError("spinors require a spinor field")
    k = _kvec(k, field.n)
    if not np.any(k):
        raise ConfigError("the zero mode is excluded from the lattice")
    x = xi(s)
    sk = sigma_dot(k) @ x
    if field.massless:
        norm, lower = 1 / np.sqrt(2), sk / np.linalg.norm(k)
    else:
        w = float(dispersion(k, field.m))
        norm, lower = np.sqrt((w + field.m) / (2 * field.m)), sk / (w + field.m)
    top, bottom = (x, lower) if particle else (lower, x)
    return norm * np.concatenate([top, bottom])


def spinor_u(k, s, field: CavityField) -> np.ndarray:
    return _spinor(k, s, field, True)


def spinor_v(k, s, field: CavityField) -> np.ndarray:
    return _spinor(k, s, field, False)


def spinor(k, s, eps: int, field: CavityField) -> np.ndarray:
    """u_{k,s,eps}: u for eps=+1, v for eps=-1."""
    if eps not in (1, -1):
        raise ConfigError(f"epsilon must be +1 or -1, got {eps}")
    return _spinor(k, s, field, eps == 1)


def dirac_bar(u: np.ndarray) -> np.ndarray:
    return np.conj(u) @ GAMMA[0]


def spinor_norm_factor(k, field: CavityField) -> float:
    """sqrt(m/(omega L^n)) for massive fields, L^{-n/2} for massless ones."""
    if field.massless:
        return field.L ** (-field.n / 2)
    w = float(dispersion(_kvec(k, field.n), field.m))
    return float(np.sqrt(field.m / (w * field.volume)))


def spinor_mode(t, x, k, s, eps: int, field: CavityField) -> np.ndarray:
    """psi~_{k,s,eps}(t,x), shape (..., 4)."""
    k = _kvec(k, field.n)
    w = float(dispersion(k, field.m))
    x = np.asarray(x, dtype=float)
    if field.n == 1 and x.ndim == 0:
        x = x[None]
    phase = np.exp(1j * eps * (x.reshape(*x.shape[:-1], field.n) @ k)) * np.exp(-1j * eps * w * np.asarray(t))
    return spinor_norm_factor(k, field) * phase[..., None] * spinor(k, s, eps, field)


def spinor_inner(a, b, field: CavityField, t: float = 0.0, N: int | None = None) -> complex:
    """L2 product of two spinor modes given as (l, s, eps) labels."""
    (la, sa, ea), (lb, sb, eb) = a, b
    lmax = max(abs(v) for v in (*la, *lb))
    N = _grid_points(lmax, N)
    X, dv = periodic_grid(field.n, field.L, N)
    fa = spinor_mode(t, X, momentum_of(la, field.L), sa, ea, field)
    fb = spinor_mode(t, X, momentum_of(lb, field.L), sb, eb, field)
    return complex(dv * np.sum(np.conj(fa) * fb))


def completeness_sum(k, eps: int, field: CavityField) -> np.ndarray:
    """sum_s u_{k,s,eps} ubar_{k,s,eps} from explicit outer products."""
    return sum(np.outer(spinor(k, s, eps, field), dirac_bar(spinor(k, s, eps, field))) for s in SPINS)


def completeness_closed_form(k, eps: int, field: CavityField) -> np.ndarray:
    ks = slash(k, field)
    if field.massless:
        return ks / (2 * np.linalg.norm(_kvec(k, field.n)))
    return (ks + eps * field.m * np.eye(4)) / (2 * field.m)


def dirac_residual(k, s, eps: int, field: CavityField) -> float:
    """max-norm of (k.gamma - eps m) u_{k,s,eps}; zero for exact solutions."""
    op = slash(k, field) - eps * field.m * np.eye(4)
    return float(np.max(np.abs(op @ spinor(k, s, eps, field))))


def bar_product(k, s, eps, p, r, delta, field: CavityField) -> complex:
    """ubar_{k,s,eps} u_{p,r,delta}."""
    return complex(dirac_bar(spinor(k, s, eps, field)) @ spinor(p, r, delta, field))


def labels(modes: Sequence) -> list[tuple[int, ...]]:
    return [mode_index(l) for l in modes]
