"""Switching functions, spatial profiles, and the detector propagator.

Fourier conventions used throughout:

    time_fourier(w)     = int chi(t) exp(+i w t) dt
    profile_fourier(k)  = int p(y) exp(-i k.y) d^n y
    spacetime_fourier(w, k) = time_fourier(w) * profile_fourier(k)

With these, the leading-order VEP of model 1 reads
P = lam^2/(2 L^n) sum_k |spacetime_fourier(Omega + omega_k, k)|^2 / omega_k.
The two-sided transform int f exp(-i w t) exp(+i xi.y) equals
spacetime_fourier(-w, -xi).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field
from typing import Union

import numpy as np

from .errors import CoincidenceLimit, ConfigError, ModelMismatch
from .lattice import CavityField, FieldKind

# ---------------------------------------------------------------- switching


@dataclass(frozen=True)
class SuddenSwitching:
    """Indicator of [t0, t0 + T]; t0 defaults to -T/2."""

    T: float
    t0: float | None = None

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigError(f"switching duration T must be positive, got {self.T}")
        if self.t0 is None:
            object.__setattr__(self, "t0", -self.T / 2)

    @property
    def support(self) -> tuple[float, float]:
        return (self.t0, self.t0 + self.T)

    def chi(self, t):
        t = np.asarray(t, dtype=float)
        return ((t >= self.t0) & (t <= self.t0 + self.T)).astype(float)

    def time_fourier(self, w):
        w = np.asarray(w, dtype=float)
        half = w * self.T / 2
        # 2 sin(wT/2)/w = T sinc(wT/2 pi) with numpy's normalized sinc
        mag = self.T * np.sinc(half / np.pi)
        return np.exp(1j * w * (self.t0 + self.T / 2)) * mag

    def abs2_fourier(self, w):
        w = np.asarray(w, dtype=float)
        return (self.T * np.sinc(w * self.T / (2 * np.pi))) ** 2


@dataclass(frozen=True)
class GaussianSwitching:
    """chi(t) = exp(-t^2 / 2T^2), centred at t = 0."""

    T: float
    window: float = 8.0

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigError(f"switching width T must be positive, got {self.T}")

    @property
    def support(self) -> tuple[float, float]:
        return (-self.window * self.T, self.window * self.T)

    def chi(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-t * t / (2 * self.T ** 2))

    def time_fourier(self, w):
        w = np.asarray(w, dtype=float)
        return np.sqrt(2 * np.pi) * self.T * np.exp(-w * w * self.T ** 2 / 2) + 0j

    def abs2_fourier(self, w):
        w = np.asarray(w, dtype=float)
        return 2 * np.pi * self.T ** 2 * np.exp(-w * w * self.T ** 2)


Switching = Union[SuddenSwitching, GaussianSwitching]


def chi(switching: Switching, t):
    return switching.chi(t)


def time_fourier(switching: Switching, w):
    return switching.time_fourier(w)


# ---------------------------------------------------------------- spatial profiles


def _as_k(k, n: int) -> np.ndarray:
    """Momenta with trailing axis n; a bare scalar is allowed when n = 1."""
    k = np.asarray(k, dtype=float)
    if k.ndim == 0:
        k = k.reshape(1)
    if k.shape[-1] != n:
        raise ConfigError(f"momentum trailing axis {k.shape[-1]} does not match n={n}")
    return k


@dataclass(frozen=True)
class PointLike:
    x0: tuple = (0.0,)

    def profile_fourier(self, k):
        x0 = np.asarray(self.x0, dtype=float)
        return np.exp(-1j * (_as_k(k, x0.size) @ x0))

    def abs2_fourier(self, k):
        return np.ones(_as_k(k, np.asarray(self.x0).size).shape[:-1])


@dataclass(frozen=True)
class GaussianProfile:
    """Normalized Gaussian smearing of width sigma around x0."""

    sigma: float
    x0: tuple = (0.0,)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigError(f"profile width sigma must be positive, got {self.sigma}")

    def density(self, y):
        y = np.asarray(y, dtype=float)
        x0 = np.asarray(self.x0, dtype=float)
        n = x0.size
        d2 = np.sum((y.reshape(*y.shape[:-1], n) - x0) ** 2, axis=-1)
        return np.exp(-d2 / (2 * self.sigma ** 2)) / (2 * np.pi * self.sigma ** 2) ** (n / 2)

    def profile_fourier(self, k):
        x0 = np.asarray(self.x0, dtype=float)
        k = _as_k(k, x0.size)
        return np.exp(-np.sum(k * k, axis=-1) * self.sigma ** 2 / 2) * np.exp(-1j * (k @ x0))

    def abs2_fourier(self, k):
        k = _as_k(k, np.asarray(self.x0).size)
        return np.exp(-np.sum(k * k, axis=-1) * self.sigma ** 2)


SpatialProfile = Union[PointLike, GaussianProfile]


def profile_fourier(profile: SpatialProfile, k):
    return profile.profile_fourier(k)


# ---------------------------------------------------------------- detector spec

MODEL_FIELD = {1: FieldKind.REAL, 2: FieldKind.REAL, 3: FieldKind.COMPLEX, 4: FieldKind.SPINOR}


@dataclass(frozen=True)
class DetectorSpec:
    """Two-level detector: gap Omega, coupling lam, model id 1-4."""

    Omega: float
    lam: float
    model: int
    switching: Switching
    profile: SpatialProfile = dc_field(default_factory=PointLike)

    def __post_init__(self):
        if self.model not in MODEL_FIELD:
            raise ConfigError(f"model must be 1..4, got {self.model}")
        if not self.Omega > 0:
            raise ConfigError(f"gap Omega must be positive, got {self.Omega}")

    def check(self, field: CavityField) -> None:
        want = MODEL_FIELD[self.model]
        if field.kind is not want:
            raise ModelMismatch(f"model {self.model} couples to a {want.value} field, not {field.kind.value}")
        if np.asarray(self.profile.x0).size != field.n:
            raise ConfigError(f"profile position has length {np.asarray(self.profile.x0).size}, expected {field.n}")
        if isinstance(self.profile, GaussianProfile) and self.profile.sigma > field.L / 10:
            warnings.warn("sigma > L/10: the whole-space Gaussian transform is no longer accurate", stacklevel=2)

    def with_(self, **kw) -> "DetectorSpec":
        from dataclasses import replace

        return replace(self, **kw)


def spacetime_fourier(det: DetectorSpec, w, k):
    w = np.asarray(w, dtype=float)
    return det.switching.time_fourier(w) * det.profile.profile_fourier(k)


# ---------------------------------------------------------------- detector operators


def detector_propagator(t, Omega: float):
    """D_F(t) = exp(-i Omega t) for t > 0, -exp(+i Omega t) for t < 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t == 0):
        raise CoincidenceLimit("D_F is ill defined at coincident times")
    return np.where(t > 0, np.exp(-1j * Omega * t), -np.exp(1j * Omega * t))


def bosonic_detector_propagator(t, Omega: float):
    """<g|T mu(t) mu(0)|g> with ordinary (bosonic) time ordering."""
    return np.exp(-1j * Omega * np.abs(np.asarray(t, dtype=float)))


def monopole_phase(t, Omega: float, raising: bool):
    """Coefficient of sigma^+ (raising) or sigma^- in mu(t)."""
    return np.exp((1j if raising else -1j) * Omega * np.asarray(t, dtype=float))
