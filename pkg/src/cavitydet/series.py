"""Deterministic lattice summation, tail envelopes and convergence verdicts.

Sums are accumulated one sup-norm shell at a time.  Each shell is reduced
with ``math.fsum`` (exactly rounded), and partial sums are ``fsum`` over the
shell totals.  The result therefore does not depend on how shells are
distributed over worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import TooFewCutoffs

DEFAULT_TOL = 1e-10


def exact_sum(values) -> float:
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


def neumaier_cumsum(values) -> np.ndarray:
    """Compensated running sum; out[i] = sum(values[:i+1])."""
    v = np.asarray(values, dtype=float).ravel()
    out = np.empty_like(v)
    s = c = 0.0
    for i, x in enumerate(v.tolist()):
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
        out[i] = s + c
    return out


def shell_totals(fn: Callable[[int], np.ndarray], radii: Sequence[int], threads: int = 1) -> list[float]:
    """Exact per-shell reductions of ``fn(r)``; order of the result follows ``radii``."""
    radii = list(radii)

    def one(r: int) -> float:
        return exact_sum(fn(r))

    if threads <= 1 or len(radii) < 2:
        return [one(r) for r in radii]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, radii))


def partial_sums(totals: Sequence[float], cutoffs: Sequence[int]) -> list[float]:
    """Partial sums over shells 1..cutoff given totals for shells 1..max(cutoffs)."""
    return [math.fsum(totals[:c]) for c in cutoffs]


# ---------------------------------------------------------------- tail envelopes


@dataclass(frozen=True)
class Envelope:
    """Majorant for the shell contribution: M(r) = C r^-p (1 + ln r)^j exp(-beta r^2).

    ``tail(R)`` bounds sum_{r > R} M(r).  Without Gaussian decay this is the
    integral comparison, valid for p > 1 and p >= j (M decreasing on r >= 1).
    """

    C: float
    p: float
    j: int = 0
    beta: float = 0.0

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return self.C * r ** (-self.p) * (1 + np.log(r)) ** self.j * np.exp(-self.beta * r * r)

    def tail(self, R: int) -> float:
        if self.C == 0:
            return 0.0
        if self.beta > 0:
            # explicit sum until exp(-beta r^2) underflows far below any tolerance
            span = int(math.ceil(math.sqrt(800.0 / self.beta))) + 16
            r = np.arange(R + 1, R + 1 + span, dtype=float)
            last = float(self(r[-1:])[0])
            return exact_sum(self(r)) + last * (r[-1] + 1.0)
        if self.p <= 1:
            return math.inf
        q = self.p - 1
        base = self.C * R ** (-q)
        if self.j == 0:
            return base / q
        if self.j == 1:
            return base * ((1 + math.log(R)) / q + 1 / q ** 2)
        raise ValueError("log power > 1 not supported")


# ---------------------------------------------------------------- verdicts


@dataclass(frozen=True)
class Converged:
    value: float
    abs_err: float
    name: str = "Converged"


@dataclass(frozen=True)
class LogDivergent:
    slope: float
    name: str = "LogDivergent"


@dataclass(frozen=True)
class Divergent:
    name: str = "Divergent"


@dataclass(frozen=True)
class Inconclusive:
    """Increments are shrinking but the tail bound is still above tolerance."""

    value: float
    tail_bound: float
    name: str = "Inconclusive"


Verdict = Converged | LogDivergent | Divergent | Inconclusive


@dataclass
class PartialSumSeries:
    """Partial sums per cutoff.

    ``remainders``, when present, holds a computed estimate of the sum beyond
    each cutoff; ``tail_bounds`` then bounds the error of partial sum plus
    remainder instead of the bare remainder.
    """

    cutoffs: list[int]
    values: list[float]
    tail_bounds: list[float]
    verdict: Verdict | None = None
    wall_times: list[float] = field(default_factory=list)
    tol: float = DEFAULT_TOL
    remainders: list[float] = field(default_factory=list)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.cutoffs, self.cutoffs[1:])):
            raise ValueError("cutoffs must be strictly increasing")
        if len(self.values) != len(self.cutoffs) or len(self.tail_bounds) != len(self.cutoffs):
            raise ValueError("cutoffs, values and tail_bounds must have equal length")
        if self.remainders and len(self.remainders) != len(self.cutoffs):
            raise ValueError("remainders must match the cutoffs")

    @property
    def estimates(self) -> list[float]:
        """Partial sums plus computed remainders (the partial sums when there are none)."""
        if not self.remainders:
            return list(self.values)
        return [v + r for v, r in zip(self.values, self.remainders)]

    @property
    def value(self) -> float:
        return self.estimates[-1]

    def rows(self) -> list[dict]:
        name = self.verdict.name if self.verdict is not None else ""
        wt = self.wall_times or [float("nan")] * len(self.cutoffs)
        rem = self.remainders or [None] * len(self.cutoffs)
        return [
            {"cutoff": c, "partial_sum": v, "remainder": r, "tail_bound": t, "verdict": name, "wall_time_s": w}
            for c, v, r, t, w in zip(self.cutoffs, self.values, rem, self.tail_bounds, wt)
        ]


def log_slopes(cutoffs: Sequence[int], values: Sequence[float]) -> np.ndarray:
    """Increment per unit of ln(cutoff) between consecutive cutoffs."""
    c = np.log(np.asarray(cutoffs, dtype=float))
    v = np.asarray(values, dtype=float)
    return np.diff(v) / np.diff(c)


def convergence_diagnose(
    cutoffs: Sequence[int],
    values: Sequence[float],
    tail_bounds: Sequence[float] | None = None,
    tol: float = DEFAULT_TOL,
    stable: float = 0.15,
) -> Verdict:
    """Classify a sequence of partial sums.

    Converged: the rigorous tail bound (or, lacking one, a geometric
    extrapolation of the increments) at the last cutoff is below ``tol``.
    LogDivergent: the last slopes per unit ln(cutoff) are positive and agree
    within ``stable`` relative spread.  Divergent: slopes grow.  Anything
    else with shrinking increments is Inconclusive.
    """
    if len(cutoffs) < 4:
        raise TooFewCutoffs(f"need at least 4 cutoffs, got {len(cutoffs)}")
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError("cutoffs must be strictly increasing")
    values = [float(v) for v in values]
    last = values[-1]
    inc = np.diff(values)

    if tail_bounds is not None:
        tb = float(tail_bounds[-1])
        if tb < tol:
            return Converged(last, tb)
    elif np.all(inc == 0):
        return Converged(last, 0.0)

    slopes = log_slopes(cutoffs, values)
    s2, s1 = slopes[-2], slopes[-1]
    if s1 > 0 and s2 > 0:
        spread = abs(s1 - s2) / max(s1, s2)
        if spread <= stable and (len(slopes) < 3 or abs(slopes[-3] - s2) / max(slopes[-3], s2) <= 2 * stable):
            return LogDivergent(float(s1))
        if s1 > s2:
            return Divergent()

    if tail_bounds is not None:
        tb = float(tail_bounds[-1])
        if math.isinf(tb) and s1 > 0 and s1 >= s2:
            return Divergent()
        return Inconclusive(last, tb)

    # no rigorous bound: geometric extrapolation of the last increments
    d1, d2 = abs(inc[-1]), abs(inc[-2])
    if d2 > 0 and d1 < d2:
        rho = d1 / d2
        est = d1 * rho / (1 - rho)
        if est < tol:
            return Converged(last, est)
        return Inconclusive(last, est)
    if d1 == 0:
        return Converged(last, 0.0)
    return Divergent()


def build_series(
    cutoffs: Sequence[int],
    values: Sequence[float],
    tail_bounds: Sequence[float],
    tol: float = DEFAULT_TOL,
    wall_times: Sequence[float] | None = None,
    remainders: Sequence[float] | None = None,
) -> PartialSumSeries:
    cutoffs = [int(c) for c in cutoffs]
    s = PartialSumSeries(cutoffs, [float(v) for v in values], [float(t) for t in tail_bounds],
                         wall_times=list(wall_times or []), tol=tol,
                         remainders=[float(r) for r in remainders or []])
    if len(cutoffs) >= 4:
        s.verdict = convergence_diagnose(cutoffs, s.estimates, s.tail_bounds, tol)
    return s
