"""Leading-order vacuum excitation probabilities (VEPs) for models 1-4.

All sums run over sup-norm cutoffs |l_i| <= cutoff.  Double sums over
(k, p) use the sup-norm of the concatenated label (l_k, l_p), so that shell r
contains every pair with max(|l_k|, |l_p|) = r.

Conventions (|ft|^2 = |chi~(w)|^2 |p~(q)|^2, see ``profiles``):

    model 1   lam^2/(2 L^n)      sum_k   |ft(Omega + w_k, k)|^2 / w_k
    model 3   lam^2/(4 L^2n)     sum_kp  |ft(Omega + w_k + w_p, k + p)|^2 / (w_k w_p)
    model 2   twice model 3 (real field, unordered identical pairs)
    model 4   lam^2/(2 L^2n)     sum_kp  W(k, p) |ft(Omega + w_k + w_p, k + p)|^2

with W = ((w_k+m)(w_p+m)/(w_k w_p)) |k/(w_k+m) - p/(w_p+m)|^2, which at m = 0
is |k^ - p^|^2.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import zeta

from .errors import ConfigError, NotApplicable
from .lattice import CavityField, FieldKind, dispersion, shell
from .profiles import DetectorSpec, GaussianProfile, GaussianSwitching, PointLike, SuddenSwitching
from .series import (
    DEFAULT_TOL,
    Envelope,
    PartialSumSeries,
    build_series,
    exact_sum,
    neumaier_cumsum,
    shell_totals,
)

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class VepBreakdown:
    pair_creation_term: float
    tadpole_term: float | None = None
    renormalized: bool = True

    def __post_init__(self):
        if self.renormalized and self.tadpole_term is not None:
            raise ValueError("a renormalized breakdown carries no tadpole term")

    @property
    def total(self) -> float:
        return self.pair_creation_term + (self.tadpole_term or 0.0)


def cutoff_schedule(cutoff) -> list[int]:
    """An int Lambda expands to the geometric schedule Lambda/8 .. Lambda."""
    if isinstance(cutoff, (int, np.integer)):
        c = int(cutoff)
        if c < 1:
            raise ConfigError("cutoff must be >= 1")
        sched = sorted({max(1, c // 8), max(1, c // 4), max(1, c // 2), c})
        return sched
    sched = [int(c) for c in cutoff]
    if not sched or sched[0] < 1 or any(b <= a for a, b in zip(sched, sched[1:])):
        raise ConfigError("cutoffs must be positive and strictly increasing")
    return sched


# ---------------------------------------------------------------- envelopes


def _time_bound(det: DetectorSpec, L: float) -> tuple[float, float, float]:
    """(C, p, beta) with |chi~(Omega + E)|^2 <= C r^-p exp(-beta r^2) whenever E >= 2 pi r/L."""
    sw = det.switching
    if isinstance(sw, SuddenSwitching):
        return 4 * (L / TWO_PI) ** 2, 2.0, 0.0
    if isinstance(sw, GaussianSwitching):
        return TWO_PI * sw.T ** 2, 0.0, (TWO_PI * sw.T / L) ** 2
    raise ConfigError(f"unsupported switching {sw!r}")


def _theta(beta: float) -> float:
    """sum_{j in Z} exp(-beta j^2)."""
    J = int(math.ceil(math.sqrt(800.0 / beta))) + 2
    j = np.arange(-J, J + 1, dtype=float)
    return exact_sum(np.exp(-beta * j * j))


def _count_bound(n: int) -> float:
    """shell_size(n, r) <= (3^n - 1) r^(n-1); the ratio is largest at r = 1."""
    return 3 ** n - 1


def _single_envelope(field: CavityField, det: DetectorSpec, pref: float) -> Envelope:
    """Model-1 style summand pref * |ft|^2 / w_k over shell r."""
    n, L = field.n, field.L
    Ct, pt, bt = _time_bound(det, L)
    beta = bt
    if isinstance(det.profile, GaussianProfile):
        beta += (TWO_PI * det.profile.sigma / L) ** 2
    C = pref * _count_bound(n) * Ct * (L / TWO_PI)
    return Envelope(C, pt + 1 - (n - 1), 0, beta)


def _double_envelope(field: CavityField, det: DetectorSpec, pref: float, weight_max: float,
                     inv_omega: bool) -> "Envelope | MinEnvelope":
    """Pair summand pref * weight * |ft|^2 over the 2n-dimensional shell r.

    weight <= weight_max, times (L/2pi)^2 / r when the weight carries 1/(w_k w_p).
    With 1/(w_k w_p) a second shell bound keeps the partner frequency; the
    smaller tail wins.
    For a Gaussian profile the sum of |p~(k+p)|^2 over the partner momentum is
    bounded by a theta sum G^n instead of counting lattice points.
    """
    n, L = field.n, field.L
    Ct, pt, bt = _time_bound(det, L)
    C = pref * weight_max * Ct
    p = pt
    if inv_omega:
        C *= (L / TWO_PI) ** 2
        p += 1
    if isinstance(det.profile, GaussianProfile):
        G = _theta((TWO_PI * det.profile.sigma / L) ** 2)
        theta_env = Envelope(C * 2 * _count_bound(n) * G ** n, p - (n - 1), 0, bt)
    else:
        theta_env = Envelope(C * _count_bound(2 * n), p - (2 * n - 1), 0, bt)
    if not inv_omega:
        return theta_env
    # keep 1/w_p for the partner: sum_{0 < |l|_inf <= r} 1/|l|_inf is at most
    # (3^n - 1)(1 + ln r) for n = 1 and (3^n - 1) r^(n-1) otherwise
    Cs = pref * weight_max * Ct * (L / TWO_PI) ** 2 * 2 * _count_bound(n) ** 2
    if n == 1:
        shell_env = Envelope(Cs, pt + 1, 1, bt)
    else:
        shell_env = Envelope(Cs, pt + 3 - 2 * n, 0, bt)
    return MinEnvelope((theta_env, shell_env))


@dataclass(frozen=True)
class MinEnvelope:
    """Several valid majorants; the tail is the smallest of their tails."""

    parts: tuple

    def tail(self, R: int) -> float:
        return min(e.tail(R) for e in self.parts)


# ---------------------------------------------------------------- generic engines


def _ball(n: int, R: int) -> np.ndarray:
    """Nonzero labels with sup-norm <= R (any order; sums are exactly rounded)."""
    if R < 1:
        return np.zeros((0, n), dtype=np.int64)
    ax = np.arange(-R, R + 1)
    pts = np.stack(np.meshgrid(*([ax] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return pts[np.any(pts != 0, axis=1)]


def _pair_shell(n: int, r: int) -> tuple[np.ndarray, np.ndarray]:
    """All (l_k, l_p), both nonzero, with max(|l_k|, |l_p|) = r."""
    outer = shell(n, r)
    inner = _ball(n, r - 1)
    lk = [np.repeat(outer, len(inner), axis=0), np.tile(inner, (len(outer), 1)),
          np.repeat(outer, len(outer), axis=0)]
    lp = [np.tile(inner, (len(outer), 1)), np.repeat(outer, len(inner), axis=0),
          np.tile(outer, (len(outer), 1))]
    return np.concatenate(lk), np.concatenate(lp)


def _run(shell_fn: Callable[[int], np.ndarray], cutoffs: Sequence[int], env: Envelope,
         tol: float, threads: int) -> PartialSumSeries:
    totals: list[float] = []
    values, tails, times = [], [], []
    t0 = time.perf_counter()
    done = 0
    for c in cutoffs:
        totals += shell_totals(shell_fn, range(done + 1, c + 1), threads)
        done = c
        values.append(math.fsum(totals))
        tails.append(env.tail(c))
        times.append(time.perf_counter() - t0)
    return build_series(cutoffs, values, tails, tol, times)


def _single_sum(field, summand, cutoffs, env, tol, threads) -> PartialSumSeries:
    def fn(r):
        return summand(shell(field.n, r))

    return _run(fn, cutoffs, env, tol, threads)


def _double_sum(field, summand, cutoffs, env, tol, threads) -> PartialSumSeries:
    def fn(r):
        lk, lp = _pair_shell(field.n, r)
        return summand(lk, lp)

    return _run(fn, cutoffs, env, tol, threads)


def _kw(field: CavityField, l: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = TWO_PI * l / field.L
    return k, dispersion(k, field.m)


# ---------------------------------------------------------------- model 1


def vep_model1(field: CavityField, det: DetectorSpec, cutoff, tol: float = DEFAULT_TOL,
               threads: int = 1) -> PartialSumSeries:
    """lam^2/(2 L^n) sum_k |ft(Omega + w_k, k)|^2 / w_k."""
    if det.model != 1:
        raise ConfigError(f"vep_model1 needs model 1, got {det.model}")
    det.check(field)
    pref = det.lam ** 2 / (2 * field.volume)

    def summand(l):
        k, w = _kw(field, l)
        return pref * det.switching.abs2_fourier(det.Omega + w) * det.profile.abs2_fourier(k) / w

    env = _single_envelope(field, det, pref)
    return _single_sum(field, summand, cutoff_schedule(cutoff), env, tol, threads)


def vep_model1_gaussian_switch(field: CavityField, det: DetectorSpec, cutoff, tol: float = DEFAULT_TOL,
                               threads: int = 1) -> PartialSumSeries:
    """(pi lam^2 T^2 / L^n) sum_k exp(-(Omega + w_k)^2 T^2) / w_k."""
    if det.model != 1:
        raise ConfigError(f"model 1 required, got {det.model}")
    if not isinstance(det.switching, GaussianSwitching) or not isinstance(det.profile, PointLike):
        raise ConfigError("Gaussian switching with a pointlike profile required")
    det.check(field)
    T = det.switching.T
    pref = np.pi * det.lam ** 2 * T ** 2 / field.volume

    def summand(l):
        _, w = _kw(field, l)
        return pref * np.exp(-((det.Omega + w) * T) ** 2) / w

    env = _single_envelope(field, det, det.lam ** 2 / (2 * field.volume))
    return _single_sum(field, summand, cutoff_schedule(cutoff), env, tol, threads)


# ---------------------------------------------------------------- models 2 and 3


def vep_model23_renorm(field: CavityField, det: DetectorSpec, cutoff, tol: float = DEFAULT_TOL,
                       threads: int = 1) -> tuple[VepBreakdown, PartialSumSeries]:
    """Pair-creation VEP of the normal-ordered quadratic scalar couplings.

    Model 3 sums ordered (particle k, antiparticle p).  Model 2 creates two
    identical quanta; summing unordered final states gives exactly twice the
    model-3 value.
    """
    if det.model not in (2, 3):
        raise ConfigError(f"model 2 or 3 required, got {det.model}")
    det.check(field)
    mult = 2.0 if det.model == 2 else 1.0
    pref = mult * det.lam ** 2 / (4 * field.volume ** 2)

    def summand(lk, lp):
        k, wk = _kw(field, lk)
        p, wp = _kw(field, lp)
        return (pref * det.switching.abs2_fourier(det.Omega + wk + wp)
                * det.profile.abs2_fourier(k + p) / (wk * wp))

    env = _double_envelope(field, det, pref, 1.0, True)
    s = _double_sum(field, summand, cutoff_schedule(cutoff), env, tol, threads)
    return VepBreakdown(s.value), s


# ---------------------------------------------------------------- model 4


def model4_weight(k, p, m: float) -> np.ndarray:
    """((w_k+m)(w_p+m)/(w_k w_p)) |k/(w_k+m) - p/(w_p+m)|^2; equals |k^ - p^|^2 at m = 0."""
    k = np.asarray(k, dtype=float)
    p = np.asarray(p, dtype=float)
    wk, wp = dispersion(k, m), dispersion(p, m)
    d = k / (wk + m)[..., None] - p / (wp + m)[..., None]
    return (wk + m) * (wp + m) / (wk * wp) * np.sum(d * d, axis=-1)


def _model4_fast_1d(field: CavityField, det: DetectorSpec, cutoffs, env, tol) -> PartialSumSeries:
    """Massless n = 1: W = 4 iff sgn k != sgn p, so with a = |l_k|, b = |l_p|

        P(Lambda) = (4 lam^2 / L^2) sum_{a,b=1}^{Lambda} g(a - b) h(a + b),

    g(d) = |p~(2 pi d/L)|^2, h(s) = |chi~(Omega + 2 pi s/L)|^2.  For fixed d the
    inner sum runs over s = d+2, d+4, .., 2 Lambda - d, read off parity prefix sums.
    Sudden switching with a Gaussian profile gets a computed remainder, see
    ``_model4_remainder``.
    """
    L = field.L
    pref = 4 * det.lam ** 2 / L ** 2
    top = max(cutoffs)
    s = np.arange(0, 2 * top + 1, dtype=float)
    h = det.switching.abs2_fourier(det.Omega + TWO_PI * s / L)
    h[:2] = 0.0
    # prefix sums per parity class: P[j] = sum of h over s <= j with s = j (mod 2)
    P = np.zeros_like(h)
    P[0::2] = neumaier_cumsum(h[0::2])
    P[1::2] = neumaier_cumsum(h[1::2])
    d_all = np.arange(0, top, dtype=float)
    g_all = det.profile.abs2_fourier((TWO_PI * d_all / L)[:, None])
    accelerate = isinstance(det.switching, SuddenSwitching) and isinstance(det.profile, GaussianProfile)
    values, tails, rems, times = [], [], [], []
    t0 = time.perf_counter()
    for c in cutoffs:
        d = np.arange(0, c)
        hi = 2 * c - d
        lo = d  # exclusive lower end: s >= d + 2
        inner = P[hi] - P[lo]
        terms = g_all[:c] * inner
        terms[1:] *= 2
        values.append(pref * exact_sum(terms))
        if accelerate:
            r, b = _model4_remainder(field, det, c, pref, tol)
            rems.append(r)
            tails.append(b + 64 * np.finfo(float).eps * (values[-1] + r))
        else:
            tails.append(env.tail(c))
        times.append(time.perf_counter() - t0)
    return build_series(cutoffs, values, tails, tol, times, rems or None)


def _model4_remainder(field: CavityField, det: DetectorSpec, c: int, pref: float, tol: float) -> tuple[float, float]:
    """Sum beyond cutoff c of the massless (1,1) model-4 VEP, sudden switching, Gaussian profile.

    With R(j) = sum_{s > j, s = j mod 2} h(s), the remainder is
    pref * sum_d c_d g(d) R(j_d), j_d = 2c - d for d < c and d otherwise.
    R is an exact sum up to an outer index J plus the analytic tail of
    h(s) = 2 (1 - cos(x_s T)) / x_s^2, x_s = Omega + 2 pi s / L: the 2/x^2 part
    is a Hurwitz zeta value, the cosine part is exact when 2T/L is an integer
    and otherwise bounded by Abel summation.  Returns (estimate, error bound).
    """
    L, Om, T = field.L, det.Omega, det.switching.T
    sigma = det.profile.sigma
    gbeta = (TWO_PI * sigma / L) ** 2
    D = int(math.ceil(math.sqrt(800.0 / gbeta))) + 2
    d = np.arange(D)
    g = np.exp(-gbeta * d * d)
    cd = np.where(d == 0, 1.0, 2.0)
    gsum = float(np.sum(cd * g))
    x = lambda j: Om + TWO_PI * j / L
    step = 4 * np.pi * T / L  # phase advance of cos(x_s T) per step s -> s + 2
    commensurate = float(2 * T / L).is_integer()
    sin_half = abs(math.sin(step / 2))
    base = 2 * c
    if commensurate:
        J = base + 2
    else:
        # push J out until the Abel bound on the cosine tail is below tol / 100
        x_need = math.sqrt(2 * pref * gsum * 2 / (sin_half * tol * 1e-2))
        J = min(base + 2 * 10 ** 7, max(base + 2, int(math.ceil((x_need - Om) * L / TWO_PI)) + 2))
    s = np.arange(0, J + 3, dtype=float)
    h = det.switching.abs2_fourier(x(s))
    h[:2] = 0.0
    q_scale = (L / (4 * np.pi)) ** 2

    def outer(par: int) -> tuple[float, float]:
        """(sum of h over s > J_par with parity par, error bound)."""
        Jp = J if J % 2 == par else J - 1
        q = x(Jp + 2) * L / (4 * np.pi)
        flat = 2 * q_scale * float(zeta(2, q))
        if commensurate:
            osc = 2 * math.cos(x(Jp + 2) * T) * q_scale * float(zeta(2, q))
            return flat - osc, 0.0
        return flat, 2 / (x(Jp + 2) ** 2 * sin_half)

    far = {}
    for par in (0, 1):
        Jp = J if J % 2 == par else J - 1
        start = base + 1 if (base + 1) % 2 == par else base + 2
        est, err = outer(par)
        far[par] = (exact_sum(h[start:Jp + 1:2]) + est, err)

    total, bound = [], 0.0
    for dd in range(D):
        j = base - dd if dd < c else dd
        near = exact_sum(h[j + 2:base + 1:2]) if j + 2 <= base else 0.0
        est, err = far[j % 2]
        total.append(cd[dd] * g[dd] * (near + est))
        bound += cd[dd] * g[dd] * err
    # d >= D: R(j) <= sum_s 4/x_s^2 <= 4 (L/2pi)^2 zeta(2, Omega L/2pi + 1)
    r_max = 4 * (L / TWO_PI) ** 2 * float(zeta(2, Om * L / TWO_PI + 1))
    g_far = 2 * math.exp(-gbeta * D * D) / (1 - math.exp(-gbeta * (2 * D + 1)))
    bound += r_max * g_far
    return pref * exact_sum(total), pref * bound


def vep_model4_renorm(field: CavityField, det: DetectorSpec, cutoff, tol: float = DEFAULT_TOL,
                      threads: int = 1, fast: bool = True) -> tuple[VepBreakdown, PartialSumSeries]:
    """lam^2/(2 L^2n) sum_{k,p} W(k,p) |ft(Omega + w_k + w_p, k + p)|^2."""
    if det.model != 4:
        raise ConfigError(f"model 4 required, got {det.model}")
    det.check(field)
    pref = det.lam ** 2 / (2 * field.volume ** 2)
    cutoffs = cutoff_schedule(cutoff)
    env = _double_envelope(field, det, pref, 4.0 if field.massless else 16.0, False)
    if fast and field.n == 1 and field.massless:
        s = _model4_fast_1d(field, det, cutoffs, env, tol)
        return VepBreakdown(s.value), s

    def summand(lk, lp):
        k, wk = _kw(field, lk)
        p, wp = _kw(field, lp)
        return (pref * model4_weight(k, p, field.m) * det.switching.abs2_fourier(det.Omega + wk + wp)
                * det.profile.abs2_fourier(k + p))

    s = _double_sum(field, summand, cutoffs, env, tol, threads)
    return VepBreakdown(s.value), s


# ---------------------------------------------------------------- tadpole


def inverse_omega_sums(field: CavityField, cutoffs: Sequence[int]) -> list[float]:
    """sum_{|l| <= cutoff} 1/w_k at each cutoff."""
    totals = shell_totals(lambda r: 1.0 / _kw(field, shell(field.n, r))[1], range(1, max(cutoffs) + 1))
    return [math.fsum(totals[:c]) for c in cutoffs]


def vep_unrenormalized_tadpole(field: CavityField, det: DetectorSpec, cutoff,
                               tol: float = DEFAULT_TOL) -> PartialSumSeries:
    """Vacuum-loop term removed by normal ordering.

    scalar (2, 3): lam^2/(4 L^2n) (sum 1/w)^2 |chi~(Omega)|^2
    spinor (4):    lam^2/(2 L^2n) 8 m^2 (sum 1/w)^2 |chi~(Omega)|^2, zero when m = 0
    """
    if det.model == 1:
        raise NotApplicable("model 1 has no tadpole")
    det.check(field)
    cutoffs = cutoff_schedule(cutoff)
    t0 = time.perf_counter()
    sums = inverse_omega_sums(field, cutoffs)
    chi0 = float(det.switching.abs2_fourier(det.Omega))
    if field.kind is FieldKind.SPINOR:
        pref = det.lam ** 2 * 8 * field.m ** 2 / (2 * field.volume ** 2)
    else:
        pref = det.lam ** 2 / (4 * field.volume ** 2)
    values = [pref * s * s * chi0 for s in sums]
    tails = [0.0 if pref == 0 else math.inf] * len(cutoffs)
    wall = [time.perf_counter() - t0] * len(cutoffs)
    return build_series(cutoffs, values, tails, tol, wall)


def vep(field: CavityField, det: DetectorSpec, cutoff, tol: float = DEFAULT_TOL, threads: int = 1,
        renormalized: bool = True) -> tuple[VepBreakdown, PartialSumSeries]:
    """Dispatch on the model id; returns the breakdown and the pair-term series."""
    if det.model == 1:
        s = vep_model1(field, det, cutoff, tol, threads)
        return VepBreakdown(s.value), s
    if det.model in (2, 3):
        b, s = vep_model23_renorm(field, det, cutoff, tol, threads)
    else:
        b, s = vep_model4_renorm(field, det, cutoff, tol, threads)
    if renormalized:
        return b, s
    tad = vep_unrenormalized_tadpole(field, det, cutoff, tol)
    return VepBreakdown(b.pair_creation_term, tad.value, False), s
