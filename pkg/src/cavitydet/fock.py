"""Brute-force truncated Fock space: explicit operator matrices, exact word
VEVs and direct time evolution.

The space is a tensor product of independent algebras (one per field id, then
one per detector).  Inside an algebra, fermionic modes carry Jordan-Wigner
strings in the listed mode order; different algebras commute.  Bosonic modes
have a per-mode occupation cap and an optional cap on the total number of
quanta in the algebra.  Matrices are scipy CSR.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import CoincidenceLimit, ConfigError, MalformedWord, ModeOutsideSpace
from .lattice import SPINS, FieldKind, dirac_bar, spinor, spinor_norm_factor
from .profiles import DetectorSpec
from .wick import (
    FieldSetup,
    Ladder,
    Monopole,
    ScalarField,
    Sigma,
    SpinorField,
    WickConfig,
    Word,
    _spinor_labels,
    infer_kinds,
)

# ---------------------------------------------------------------- spaces


@dataclass(frozen=True)
class AlgebraSpec:
    """Modes of one algebra: keys are (species, label, spin)."""

    key: tuple
    modes: tuple
    fermionic: bool
    cap: int = 2
    total_cap: int | None = None


class _Algebra:
    def __init__(self, spec: AlgebraSpec):
        self.spec = spec
        cap = 1 if spec.fermionic else spec.cap
        tot = spec.total_cap
        states = []

        def rec(i, acc, used):
            if i == len(spec.modes):
                states.append(tuple(acc))
                return
            for n in range(cap + 1):
                if tot is not None and used + n > tot:
                    break
                rec(i + 1, acc + [n], used + n)

        rec(0, [], 0)
        self.states = states
        self.index = {s: i for i, s in enumerate(states)}
        self.dim = len(states)
        self._lower: dict = {}

    def lower(self, m: int) -> sp.csr_matrix:
        """Annihilator of mode m (with Jordan-Wigner string for fermions)."""
        if m not in self._lower:
            rows, cols, vals = [], [], []
            for j, s in enumerate(self.states):
                n = s[m]
                if n == 0:
                    continue
                t = list(s)
                t[m] -= 1
                i = self.index[tuple(t)]
                if self.spec.fermionic:
                    v = -1.0 if sum(s[:m]) % 2 else 1.0
                else:
                    v = math.sqrt(n)
                rows.append(i)
                cols.append(j)
                vals.append(v)
            self._lower[m] = sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim), dtype=complex)
        return self._lower[m]


class TruncatedSpace:
    """Tensor product of algebras; detectors are listed last by construction."""

    def __init__(self, algebras: list[AlgebraSpec]):
        self.specs = list(algebras)
        self.algebras = [_Algebra(a) for a in self.specs]
        self.dims = [a.dim for a in self.algebras]
        self.dim = int(np.prod(self.dims))
        self._pos = {a.key: i for i, a in enumerate(self.specs)}
        self._cache: dict = {}

    @classmethod
    def for_config(cls, config: WickConfig, cap: int = 2, total_cap: int | None = None,
                   fermion_total_cap: int | None = None) -> "TruncatedSpace":
        algs = []
        for fid, st in config.fields.items():
            kind = st.field.kind
            if kind is FieldKind.REAL:
                modes = tuple(("a", l, None) for l in st.modes)
            elif kind is FieldKind.COMPLEX:
                modes = tuple((sp_, l, None) for sp_ in "ab" for l in st.modes)
            else:
                modes = tuple((sp_, l, s) for sp_ in "ab" for l in st.modes for s in SPINS)
            ferm = kind is FieldKind.SPINOR
            algs.append(AlgebraSpec(("field", fid), modes, ferm, cap,
                                    fermion_total_cap if ferm else total_cap))
        for did in config.detectors:
            algs.append(AlgebraSpec(("det", did), (("c", (), None),), True))
        return cls(algs)

    def _embed(self, a: int, op: sp.spmatrix) -> sp.csr_matrix:
        out = None
        for i, d in enumerate(self.dims):
            f = op if i == a else sp.identity(d, dtype=complex, format="csr")
            out = f if out is None else sp.kron(out, f, format="csr")
        return out.tocsr()

    def ladder_matrix(self, algebra: tuple, mode: tuple, dagger: bool) -> sp.csr_matrix:
        key = (algebra, mode, dagger)
        if key not in self._cache:
            if algebra not in self._pos:
                raise ModeOutsideSpace(f"algebra {algebra} is not in the space")
            a = self._pos[algebra]
            try:
                m = self.specs[a].modes.index(mode)
            except ValueError:
                raise ModeOutsideSpace(f"mode {mode} is not in algebra {algebra}") from None
            low = self.algebras[a].lower(m)
            self._cache[key] = self._embed(a, low.conj().T.tocsr() if dagger else low)
        return self._cache[key]

    def identity(self) -> sp.csr_matrix:
        return sp.identity(self.dim, dtype=complex, format="csr")

    @cached_property
    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0  # all-zero occupation is the first state of every algebra
        return v

    def basis_state(self, occupations: dict) -> np.ndarray:
        """Product state from {algebra key: occupation tuple}; unspecified algebras empty."""
        idx = 0
        for a, alg in enumerate(self.algebras):
            occ = occupations.get(self.specs[a].key, (0,) * len(self.specs[a].modes))
            idx = idx * alg.dim + alg.index[tuple(occ)]
        v = np.zeros(self.dim, dtype=complex)
        v[idx] = 1.0
        return v

    def number_operator(self, algebra: tuple) -> sp.csr_matrix:
        a = self._pos[algebra]
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for mode in self.specs[a].modes:
            out = out + self.ladder_matrix(algebra, mode, True) @ self.ladder_matrix(algebra, mode, False)
        return out


def ladder_matrix(space: TruncatedSpace, mode, dagger: bool) -> sp.csr_matrix:
    """``mode`` is (algebra key, (species, label, spin))."""
    algebra, m = mode
    return space.ladder_matrix(algebra, m, dagger)


# ---------------------------------------------------------------- field operators


@dataclass
class _Part:
    """A field operator split into creation and annihilation parts."""

    create: sp.csr_matrix
    annihilate: sp.csr_matrix
    algebra: tuple
    fermionic: bool


def _scalar_parts(space, st: FieldSetup, fid, t, x, dagger: bool) -> _Part:
    alg = ("field", fid)
    k, w = st.k, st.omega
    phi = np.exp(-1j * w * t + 1j * (k @ x)) / np.sqrt(2 * w * st.field.volume)
    z = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    cre, ann = z, z
    complex_field = st.field.kind is FieldKind.COMPLEX
    for a, l in enumerate(st.modes):
        if not dagger:
            ann = ann + phi[a] * space.ladder_matrix(alg, ("a", l, None), False)
            sp_ = "b" if complex_field else "a"
            cre = cre + np.conj(phi[a]) * space.ladder_matrix(alg, (sp_, l, None), True)
        else:
            cre = cre + np.conj(phi[a]) * space.ladder_matrix(alg, ("a", l, None), True)
            ann = ann + phi[a] * space.ladder_matrix(alg, ("b", l, None), False)
    return _Part(cre, ann, alg, False)


def _spinor_parts(space, st: FieldSetup, fid, t, x, conj: bool, A: int) -> _Part:
    alg = ("field", fid)
    f = st.field
    z = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    cre, ann = z, z
    for kv, w, l in zip(st.k, st.omega, st.modes):
        norm = spinor_norm_factor(kv, f)
        ph = np.exp(1j * (kv @ x - w * t))
        for s in SPINS:
            u, v = spinor(kv, s, 1, f), spinor(kv, s, -1, f)
            if not conj:
                # Psi = a psi_+ + b^dagger psi_-
                ann = ann + norm * ph * u[A] * space.ladder_matrix(alg, ("a", l, s), False)
                cre = cre + norm * np.conj(ph) * v[A] * space.ladder_matrix(alg, ("b", l, s), True)
            else:
                # Psibar = a^dagger psibar_+ + b psibar_-
                cre = cre + norm * np.conj(ph) * dirac_bar(u)[A] * space.ladder_matrix(alg, ("a", l, s), True)
                ann = ann + norm * ph * dirac_bar(v)[A] * space.ladder_matrix(alg, ("b", l, s), False)
    return _Part(cre, ann, alg, True)


def _monopole_parts(space, did, t, Omega) -> _Part:
    alg = ("det", did)
    c = space.ladder_matrix(alg, ("c", (), None), False)
    cd = space.ladder_matrix(alg, ("c", (), None), True)
    return _Part(np.exp(1j * Omega * t) * cd, np.exp(-1j * Omega * t) * c, alg, True)


def _symbol_matrix(space, sym, cfg: WickConfig, labels: dict) -> _Part:
    z = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    if isinstance(sym, Ladder):
        m = space.ladder_matrix(sym.algebra, (sym.species, sym.mode, sym.spin), sym.dagger)
        return _Part(m, z, sym.algebra, sym.fermionic) if sym.dagger else _Part(z, m, sym.algebra, sym.fermionic)
    if isinstance(sym, Sigma):
        m = space.ladder_matrix(sym.algebra, ("c", (), None), sym.plus)
        return _Part(m, z, sym.algebra, True) if sym.plus else _Part(z, m, sym.algebra, True)
    if isinstance(sym, Monopole):
        return _monopole_parts(space, sym.detector, cfg.time(sym.point), cfg.gap(sym.detector))
    t, x = cfg.point(sym.point)
    st = cfg.setup(sym.field_id)
    if isinstance(sym, ScalarField):
        return _scalar_parts(space, st, sym.field_id, t, x, sym.dagger)
    A = labels[sym.index] if isinstance(sym.index, str) else int(sym.index)
    return _spinor_parts(space, st, sym.field_id, t, x, sym.conj, A)


def _normal_terms(parts: list[_Part]) -> list[tuple[float, list[sp.csr_matrix]]]:
    """Expand :P1 ... Pm: into (sign, ordered matrices) with creators left."""
    out = []
    for choice in itertools.product((0, 1), repeat=len(parts)):  # 0 create, 1 annihilate
        cre = [i for i, c in enumerate(choice) if c == 0]
        ann = [i for i, c in enumerate(choice) if c == 1]
        order = cre + ann
        sign = _perm_sign(order, parts)
        mats = [parts[i].create if choice[i] == 0 else parts[i].annihilate for i in order]
        out.append((sign, mats))
    return out


def _perm_sign(order: list[int], parts: list[_Part]) -> int:
    """Sign of reordering fermionic parts, counted per algebra."""
    sgn = 1
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            i, j = order[a], order[b]
            if i > j and parts[i].fermionic and parts[j].fermionic and parts[i].algebra == parts[j].algebra:
                sgn = -sgn
    return sgn


def _apply(mats: list, vec: np.ndarray) -> np.ndarray:
    for m in reversed(mats):
        vec = m @ vec
    return vec


def _apply_unit(unit, vec):
    """unit: list of (sign, [matrices]) terms."""
    out = np.zeros_like(vec)
    for sign, mats in unit:
        out += sign * _apply(mats, vec)
    return out


def _check_times(word: Word, cfg: WickConfig) -> list[float]:
    times = []
    for g in word.groups:
        ts = [cfg.time(s.point) for s in g.symbols]
        if g.normal:
            if len(set(ts)) != 1:
                raise MalformedWord("a normal-ordered group must sit at one time")
            times.append(ts[0])
        else:
            times.extend(ts)
    return times


def word_vev(space: TruncatedSpace | None, word: Word, config: WickConfig) -> complex:
    """Exact <0| word |0> by explicit reordering and matrix products."""
    labels = _spinor_labels(word)
    if space is None:
        space = space_for_word(word, config)
    times = _check_times(word, config)
    names = sorted(labels)
    total = 0j
    for assign in itertools.product(range(4), repeat=len(names)):
        lab = dict(zip(names, assign))
        total += _word_vev_fixed(space, word, config, lab, times)
    return complex(total)


def _word_vev_fixed(space, word: Word, cfg: WickConfig, labels: dict, times: list[float]) -> complex:
    # units of the time-ordered core
    units = []  # (time, parts, normal)
    ti = iter(times)
    for g in word.groups:
        parts = [_symbol_matrix(space, s, cfg, labels) for s in g.symbols]
        if g.normal:
            units.append((next(ti), parts, True))
        else:
            for p in parts:
                units.append((next(ti), [p], False))
    order = sorted(range(len(units)), key=lambda u: -units[u][0])  # stable: ties keep word order
    sign = 1
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            i, j = order[a], order[b]
            if i > j:
                for pi in units[i][1]:
                    for pj in units[j][1]:
                        if pi.fermionic and pj.fermionic and pi.algebra == pj.algebra:
                            sign = -sign
    # equal-time fermions of one algebra in different units: T is undefined
    for a in range(len(units)):
        for b in range(a + 1, len(units)):
            if units[a][0] == units[b][0]:
                if any(p.fermionic and q.fermionic and p.algebra == q.algebra
                       for p in units[a][1] for q in units[b][1]):
                    raise CoincidenceLimit("fermionic operators of one algebra at equal times")
    vec = space.vacuum.copy()
    for s in reversed(word.suffix):
        vec = _symbol_matrix(space, s, cfg, labels).create @ vec
    for u in reversed(order):
        _, parts, normal = units[u]
        if normal:
            vec = _apply_unit(_normal_terms(parts), vec)
        else:
            vec = (parts[0].create + parts[0].annihilate) @ vec
    for s in reversed(word.prefix):
        vec = _symbol_matrix(space, s, cfg, labels).annihilate @ vec
    return sign * complex(np.vdot(space.vacuum, vec))


def space_for_word(word: Word, config: WickConfig) -> TruncatedSpace:
    """Smallest exact truncation: at most len(word)/2 quanta can ever be present."""
    q = max(1, (len(word) + 1) // 2)
    used_fields = {s.algebra[1] for s in word.symbols if s.algebra[0] == "field"}
    used_dets = {s.algebra[1] for s in word.symbols if s.algebra[0] == "det"}
    sub = WickConfig({f: config.fields[f] for f in config.fields if f in used_fields},
                     {d: config.detectors[d] for d in config.detectors if d in used_dets}, config.points)
    kinds = infer_kinds(word)
    for fid, st in sub.fields.items():
        if fid in kinds and kinds[fid] is not st.field.kind and not (
            kinds[fid] is FieldKind.REAL and st.field.kind is FieldKind.COMPLEX
        ):
            raise ConfigError(f"word uses field {fid!r} as {kinds[fid].value}, configured {st.field.kind.value}")
    return TruncatedSpace.for_config(sub, cap=q, total_cap=q, fermion_total_cap=q)


# ---------------------------------------------------------------- interaction Hamiltonian


def _field_terms(space, st: FieldSetup, fid, profile_k_sign=1):
    """Schroedinger-picture field at t = 0 as (matrix, coeff, momentum, creation) terms.

    Scalar: coeff is complex; spinor: coeff is a 4-vector (Psi^A or Psibar_A).
    Position dependence of each term is exp(i q.y).
    """
    alg = ("field", fid)
    f = st.field
    out = {"phi": [], "phid": [], "psi": [], "psibar": []}
    for kv, w, l in zip(st.k, st.omega, st.modes):
        if f.kind is not FieldKind.SPINOR:
            c = 1 / np.sqrt(2 * w * f.volume)
            a = space.ladder_matrix(alg, ("a", l, None), False)
            ad = space.ladder_matrix(alg, ("a", l, None), True)
            if f.kind is FieldKind.REAL:
                out["phi"] += [(a, c, kv, False), (ad, c, -kv, True)]
            else:
                b = space.ladder_matrix(alg, ("b", l, None), False)
                bd = space.ladder_matrix(alg, ("b", l, None), True)
                out["phi"] += [(a, c, kv, False), (bd, c, -kv, True)]
                out["phid"] += [(ad, c, -kv, True), (b, c, kv, False)]
            continue
        norm = spinor_norm_factor(kv, f)
        for s in SPINS:
            u, v = spinor(kv, s, 1, f), spinor(kv, s, -1, f)
            a = space.ladder_matrix(alg, ("a", l, s), False)
            ad = space.ladder_matrix(alg, ("a", l, s), True)
            b = space.ladder_matrix(alg, ("b", l, s), False)
            bd = space.ladder_matrix(alg, ("b", l, s), True)
            out["psi"] += [(a, norm * u, kv, False), (bd, norm * v, -kv, True)]
            out["psibar"] += [(ad, norm * dirac_bar(u), -kv, True), (b, norm * dirac_bar(v), kv, False)]
    return out


def interaction_operator(space: TruncatedSpace, det: DetectorSpec, setup: FieldSetup, fid: str = "f",
                         normal: bool = True) -> sp.csr_matrix:
    """Smeared field operator O = int p(y) O(y) dy at t = 0 (without mu and lam)."""
    terms = _field_terms(space, setup, fid)
    prof = det.profile

    def smear(q):
        # int p(y) exp(i q.y) dy = profile_fourier(-q)
        return complex(prof.profile_fourier(-np.asarray(q, dtype=float)).ravel()[0])

    if det.model == 1:
        return sum(m * c * smear(q) for m, c, q, _ in terms["phi"])
    if det.model == 2:
        left, right, ferm = terms["phi"], terms["phi"], False
    elif det.model == 3:
        left, right, ferm = terms["phid"], terms["phi"], False
    else:
        left, right, ferm = terms["psibar"], terms["psi"], True
    out = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for m1, c1, q1, cr1 in left:
        for m2, c2, q2, cr2 in right:
            c = np.dot(c1, c2) if ferm else c1 * c2
            if c == 0:
                continue
            c *= smear(q1 + q2)
            if normal and (not cr1) and cr2:
                # move the creator left; fermions pick up a sign
                out = out + (-c if ferm else c) * (m2 @ m1)
            else:
                out = out + c * (m1 @ m2)
    return out.tocsr()


def hamiltonian_parts(space: TruncatedSpace, det: DetectorSpec, setup: FieldSetup, fid: str = "f",
                      did: str = "d", normal: bool = True):
    """(H0, V) with H(t) = H0 + lam chi(t) V in the Schroedinger picture."""
    alg = ("field", fid)
    H0 = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    a_idx = space._pos[alg]
    for mode in space.specs[a_idx].modes:
        sp_, l, s = mode
        w = float(setup.omega[setup.modes.index(l)])
        H0 = H0 + w * space.ladder_matrix(alg, mode, True) @ space.ladder_matrix(alg, mode, False)
    c = space.ladder_matrix(("det", did), ("c", (), None), False)
    cd = space.ladder_matrix(("det", did), ("c", (), None), True)
    H0 = H0 + det.Omega * (cd @ c)
    O = interaction_operator(space, det, setup, fid, normal)
    V = (c + cd) @ O
    return H0.tocsr(), V.tocsr()


# ---------------------------------------------------------------- evolution


@dataclass
class EvolutionResult:
    p_excite: float
    p_ground: float
    populations: np.ndarray
    state: np.ndarray
    unitarity_defect: float
    steps: int
    halving_change: float
    converged: bool
    cap_change: float | None = None
    amplitudes: dict = dc_field(default_factory=dict)


def _propagate(H0, V, lam, chi, t0, t1, steps, psi0, method):
    H0d = H0.toarray()
    Vd = V.toarray()
    dt = (t1 - t0) / steps
    U = np.eye(H0d.shape[0], dtype=complex)
    if method == "midpoint":
        for j in range(steps):
            tm = t0 + (j + 0.5) * dt
            U = scipy.linalg.expm(-1j * dt * (H0d + lam * float(chi(tm)) * Vd)) @ U
    elif method == "cfm4":
        a1, a2 = (3 - 2 * np.sqrt(3)) / 12, (3 + 2 * np.sqrt(3)) / 12
        c1, c2 = 0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6
        for j in range(steps):
            ta = t0 + (j + c1) * dt
            tb = t0 + (j + c2) * dt
            Ha = H0d + lam * float(chi(ta)) * Vd
            Hb = H0d + lam * float(chi(tb)) * Vd
            U = scipy.linalg.expm(-1j * dt * (a1 * Ha + a2 * Hb)) @ scipy.linalg.expm(-1j * dt * (a2 * Ha + a1 * Hb)) @ U
    else:
        raise ConfigError(f"unknown stepping method {method!r}")
    return U, U @ psi0


def evolve(space: TruncatedSpace, det: DetectorSpec, setup: FieldSetup, t0: float | None = None,
           t1: float | None = None, steps: int | None = None, method: str = "midpoint",
           normal: bool = True, check_halving: bool = True, rtol: float = 1e-3) -> EvolutionResult:
    """Nonperturbative evolution from |0, g> at t0 to t1 under H0 + lam chi(t) V.

    Interaction-picture amplitudes are <f| exp(i H0 t1) psi(t1)>; transition
    probabilities are phase independent.  ``converged`` reports the step-halving
    check on P(g -> e).
    """
    det.check(setup.field)
    lo, hi = det.switching.support
    t0 = lo if t0 is None else t0
    t1 = hi if t1 is None else t1
    H0, V = hamiltonian_parts(space, det, setup, normal=normal)
    if steps is None:
        wmax = float(np.max(setup.omega)) * 2 + det.Omega
        steps = max(64, int(math.ceil((t1 - t0) * wmax / 0.1)))
    psi0 = space.vacuum.copy()
    chi = det.switching.chi

    def run(n):
        U, psi = _propagate(H0, V, det.lam, chi, t0, t1, n, psi0, method)
        return U, psi, _excited_prob(space, psi)

    U, psi, pe = run(steps)
    change, ok = 0.0, True
    if check_halving:
        coarse = pe
        steps *= 2
        U, psi, pe = run(steps)
        change = abs(pe - coarse) / max(abs(pe), 1e-300)
        ok = change < rtol or abs(pe - coarse) < 1e-15
    # back to the interaction picture
    phase = np.exp(1j * H0.diagonal() * t1) if _is_diagonal(H0) else None
    psi_i = phase * psi if phase is not None else scipy.linalg.expm(1j * H0.toarray() * t1) @ psi
    defect = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    pops = np.abs(psi) ** 2
    return EvolutionResult(pe, _ground_prob(space, psi), pops, psi_i, defect, steps, change, ok)


def _is_diagonal(M) -> bool:
    M = M.tocoo()
    return bool(np.all(M.row == M.col))


def _det_projector_weights(space: TruncatedSpace, psi: np.ndarray, excited: bool) -> float:
    """Probability of the last detector algebra being in e (or g), fields summed."""
    d = space.dims[-1]
    amp = psi.reshape(-1, d)
    return float(np.sum(np.abs(amp[:, 1 if excited else 0]) ** 2))


def _excited_prob(space, psi):
    return _det_projector_weights(space, psi, True)


def _ground_prob(space, psi):
    return _det_projector_weights(space, psi, False)


def vacuum_expectation(space: TruncatedSpace, op: sp.spmatrix) -> complex:
    return complex(np.vdot(space.vacuum, op @ space.vacuum))


def oracle_space(setup: FieldSetup, fid: str = "f", did: str = "d", cap: int = 2,
                 total_cap: int | None = None, fermion_total_cap: int | None = None) -> TruncatedSpace:
    cfg = WickConfig({fid: setup}, {did: 1.0}, {})
    return TruncatedSpace.for_config(cfg, cap, total_cap, fermion_total_cap)



def dyson_second_order(space: TruncatedSpace, det: DetectorSpec, setup: FieldSetup, normal: bool = True,
                       method: str = "auto") -> tuple[float, complex]:
    """(sum_a |A1_{a,e}|^2, A2_{0,g}) from the truncated matrices.

    With H0 diagonal, <i|V_I(t)|j> = V_ij exp(i (E_i - E_j) t), so both orders
    reduce to time integrals of exponentials.
    """
    from . import quad

    H0, V = hamiltonian_parts(space, det, setup, normal=normal)
    E = H0.diagonal().real
    col = np.asarray(V[:, 0].toarray()).ravel()
    row = np.asarray(V[0, :].toarray()).ravel()
    nz = np.nonzero(np.abs(col) > 0)[0]
    nu = E[nz] - E[0]
    sw = det.switching
    p1 = float(det.lam ** 2 * np.sum(np.abs(col[nz]) ** 2 * sw.abs2_fourier(nu)))
    J = quad.ordered(sw, sw, -nu, nu, method)
    a2 = complex(-(det.lam ** 2) * np.sum(row[nz] * col[nz] * J))
    return p1, a2
