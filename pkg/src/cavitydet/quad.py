"""Time integrals of switching functions against exponentials.

``single(chi_a, nu)`` is int chi(t) exp(i nu t) dt.  ``ordered(sw_a, sw_b, nu_a, nu_b)``
is the integral over the simplex t_a > t_b of
chi_a(t_a) chi_b(t_b) exp(i nu_a t_a + i nu_b t_b).

Quadrature maps the simplex to the unit square with
t_b = lo + (hi - lo) x, t_a = t_b + (hi - t_b) y, Jacobian (hi - lo)(hi - t_b),
and applies tensorized Gauss-Legendre rules.  Interior nodes never coincide, so
t_a > t_b strictly at every node.  Equal-width centred Gaussian switchings also
have a closed form (rotation to t_a -/+ t_b separates the integral).
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import dawsn

from .errors import ConfigError
from .profiles import GaussianSwitching, SuddenSwitching

DEFAULT_NODES = 64


@lru_cache(maxsize=64)
def _gl(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


def auto_nodes(nu_max: float, width: float, nodes: int = DEFAULT_NODES) -> int:
    """Node count large enough to resolve exp(i nu t) over the window."""
    return max(int(nodes), int(math.ceil(abs(nu_max) * width / 2)) + 40)


def _window(sw_a, sw_b) -> tuple[float, float]:
    (a0, a1), (b0, b1) = sw_a.support, sw_b.support
    return min(a0, b0), max(a1, b1)


def single(sw, nu, method: str = "exact", nodes: int = DEFAULT_NODES) -> np.ndarray:
    nu = np.asarray(nu, dtype=float)
    if method == "exact":
        return np.asarray(sw.time_fourier(nu), dtype=complex)
    lo, hi = sw.support
    n = auto_nodes(float(np.max(np.abs(nu), initial=0.0)), hi - lo, nodes)
    x, w = _gl(n)
    t = lo + (hi - lo) * x
    ph = np.exp(1j * np.multiply.outer(nu, t))
    return ph @ (w * (hi - lo) * sw.chi(t))


def _gauss_half(d, T):
    """int_0^inf exp(-u^2/2T^2) exp(i d u) du."""
    return T * math.sqrt(math.pi / 2) * np.exp(-d * d * T * T / 2) + 1j * T * math.sqrt(2) * dawsn(d * T / math.sqrt(2))


def ordered_gaussian(T: float, nu_a, nu_b) -> np.ndarray:
    """Closed form of the ordered integral for two centred Gaussians of width T."""
    nu_a = np.asarray(nu_a, dtype=float)
    nu_b = np.asarray(nu_b, dtype=float)
    s = (nu_a + nu_b) / math.sqrt(2)
    d = (nu_a - nu_b) / math.sqrt(2)
    return math.sqrt(2 * math.pi) * T * np.exp(-s * s * T * T / 2) * _gauss_half(d, T)


def has_closed_form(sw_a, sw_b) -> bool:
    return isinstance(sw_a, GaussianSwitching) and sw_a == sw_b


def ordered(sw_a, sw_b, nu_a, nu_b, method: str = "auto", nodes: int = DEFAULT_NODES) -> np.ndarray:
    """Ordered double integral over t_a > t_b; ``method`` is auto, exact or gl."""
    if method not in ("auto", "exact", "gl"):
        raise ConfigError(f"unknown quadrature method {method!r}")
    nu_a, nu_b = np.broadcast_arrays(np.asarray(nu_a, dtype=float), np.asarray(nu_b, dtype=float))
    if method in ("auto", "exact") and has_closed_form(sw_a, sw_b):
        return ordered_gaussian(sw_a.T, nu_a, nu_b)
    if method == "exact":
        raise ConfigError("no closed form for this pair of switching functions")
    for sw in (sw_a, sw_b):
        if not isinstance(sw, (SuddenSwitching, GaussianSwitching)):
            raise ConfigError(f"unsupported switching {sw!r}")
    lo, hi = _window(sw_a, sw_b)
    numax = float(np.max(np.abs(nu_a), initial=0.0) + np.max(np.abs(nu_b), initial=0.0))
    n = auto_nodes(numax, hi - lo, nodes)
    x, w = _gl(n)
    tb = lo + (hi - lo) * x                                # (n,)
    ta = tb[:, None] + (hi - tb)[:, None] * x[None, :]     # (n, n)
    wab = (w * (hi - lo))[:, None] * (w[None, :] * (hi - tb)[:, None])
    weight = wab * sw_a.chi(ta) * sw_b.chi(tb)[:, None]
    flat_a, flat_b = nu_a.ravel(), nu_b.ravel()
    out = np.empty(flat_a.shape, dtype=complex)
    # chunk over frequencies to bound memory
    step = max(1, 2_000_000 // (n * n))
    for s in range(0, flat_a.size, step):
        ea = np.exp(1j * flat_a[s:s + step, None, None] * ta[None])
        eb = np.exp(1j * flat_b[s:s + step, None] * tb[None])
        out[s:s + step] = np.einsum("fij,fi,ij->f", ea, eb, weight)
    return out.reshape(nu_a.shape)
