"""Diagram enumeration and time-domain amplitudes through second order.

An amplitude of order k is built from the operator word

    <out| T[ :mu(t_1) O(t_1): ... :mu(t_k) O(t_k): ] |in>

whose Wick full contractions are grouped into diagrams.  Vertices are labelled;
two contractions belong to the same diagram when they differ only by swapping
identical field slots at a vertex (two phi's in model 2), which gives the
symmetry factor.

Evaluation expands every field line in cavity modes.  On each time-ordered
simplex, a line between vertices is a quantum emitted at the earlier vertex and
absorbed at the later one; external legs are absorbed or emitted at their
vertex.  Every vertex then carries a frequency nu and a momentum P, giving a
profile factor profile_fourier(P) and the time integral of
prod chi(t_v) exp(i nu_v t_v) over the simplex.

The Wick engine orders the monopoles as fermions.  The interaction
Hamiltonian is bosonic, so each simplex is multiplied by the parity of the
vertex permutation restricted to each detector.  The order-k prefactor is
prod_d (-i lam_d)^{k_d} / k_d!, so P(g -> g) = 1 + 2 Re A2 at second order.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field as dc_field
from typing import Mapping, Sequence

import numpy as np

from . import quad
from .errors import ConfigError, ModelMismatch
from .lattice import SPINS, CavityField, FieldKind, dirac_bar, dispersion, momentum_of, spinor, spinor_norm_factor
from .profiles import MODEL_FIELD, DetectorSpec
from .series import convergence_diagnose
from .wick import (
    ContractionPairing,
    FieldSetup,
    Group,
    Ladder,
    Monopole,
    ScalarField,
    Sigma,
    SpinorField,
    Word,
    enumerate_full_contractions,
    format_word,
)

# ---------------------------------------------------------------- external states


@dataclass(frozen=True)
class Quantum:
    """One field quantum: mode label, antiparticle flag, spin (spinor fields only)."""

    mode: tuple
    antiparticle: bool = False
    spin: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", tuple(int(v) for v in np.atleast_1d(self.mode)))


@dataclass(frozen=True)
class ExternalState:
    """Detector levels (id -> 'g' or 'e') and a multiset of field quanta."""

    detectors: tuple = (("d", "g"),)
    quanta: tuple = ()

    def __post_init__(self):
        dets = self.detectors
        if isinstance(dets, Mapping):
            dets = tuple(dets.items())
        object.__setattr__(self, "detectors", tuple(dets))
        object.__setattr__(self, "quanta", tuple(q if isinstance(q, Quantum) else Quantum(*q) for q in self.quanta))
        for _, lev in self.detectors:
            if lev not in ("g", "e"):
                raise ConfigError(f"detector level must be 'g' or 'e', got {lev!r}")
        ferm = [q for q in self.quanta if q.spin is not None]
        if len(set(ferm)) != len(ferm):
            raise ConfigError("fermionic quanta may not repeat (Pauli)")

    @classmethod
    def vacuum(cls, level: str = "g", detector: str = "d") -> "ExternalState":
        return cls(((detector, level),), ())

    @property
    def levels(self) -> dict:
        return dict(self.detectors)

    def norm(self) -> float:
        """sqrt(prod n!) over repeated bosonic quanta."""
        return math.sqrt(math.prod(math.factorial(c) for c in Counter(self.quanta).values()))

    def check(self, model: int) -> None:
        kind = MODEL_FIELD[model]
        for q in self.quanta:
            if kind is FieldKind.SPINOR and q.spin not in SPINS:
                raise ModelMismatch(f"spinor quanta need spin +-1/2, got {q}")
            if kind is not FieldKind.SPINOR and q.spin is not None:
                raise ModelMismatch(f"model {model} has no spin, got {q}")
            if kind is FieldKind.REAL and q.antiparticle:
                raise ModelMismatch(f"model {model} couples to a real field without antiparticles")


# ---------------------------------------------------------------- diagrams


@dataclass(frozen=True)
class Edge:
    """Typed line between two endpoints.

    Endpoints are ('v', vertex, slot), ('out', i) or ('in', i) for field quanta
    and ('out', det) / ('in', det) for detector excitations.  Directed lines
    point from the psibar (phi-dagger) end to the psi (phi) end.
    """

    kind: str
    ends: tuple
    directed: bool = False


@dataclass
class Diagram:
    model: int
    order: int
    vertices: tuple          # detector id per vertex
    slots: tuple             # per vertex, the slot names
    edges: tuple
    symmetry_factor: int
    sign: int
    pairings: tuple
    word: Word
    in_state: ExternalState
    out_state: ExternalState
    key: tuple = ()

    def to_text(self, index: int = 0) -> str:
        lines = [f"diagram {index}", f"model {self.model}", f"order {self.order}"]
        for v, (d, sl) in enumerate(zip(self.vertices, self.slots)):
            lines.append(f"vertex v{v + 1} detector {d} slots {' '.join(sl)}")
        for e in self.edges:
            a, b = (_end_text(x, self) for x in e.ends)
            lines.append(f"edge {e.kind} {a} {'->' if e.directed else '--'} {b}")
        lines += [f"symmetry_factor {self.symmetry_factor}", f"sign {self.sign:+d}", "end"]
        return "\n".join(lines)


def _end_text(end, d: Diagram) -> str:
    if end[0] == "v":
        return f"v{end[1] + 1}.{end[2]}"
    side, i = end
    if isinstance(i, str):
        return f"{side}:det[{i}]"
    q = (d.out_state if side == "out" else d.in_state).quanta[i]
    spin = "" if q.spin is None else (";+" if q.spin > 0 else ";-")
    tag = "anti" if q.antiparticle else "part"
    return f"{side}:{tag}[{','.join(map(str, q.mode))}{spin}]"


def export_diagrams(diagrams: Sequence[Diagram]) -> str:
    return "\n".join(d.to_text(i + 1) for i, d in enumerate(diagrams)) + "\n"


_SLOTS = {1: ("phi",), 2: ("phi", "phi"), 3: ("phid", "phi"), 4: ("psibar", "psi")}


def _vertex_symbols(model: int, v: int, did: str, fid: str) -> tuple:
    p = f"t{v + 1}"
    mu = Monopole(p, did)
    if model == 1:
        return (mu, ScalarField(p, False, fid))
    if model == 2:
        return (mu, ScalarField(p, False, fid), ScalarField(p, False, fid))
    if model == 3:
        return (mu, ScalarField(p, True, fid), ScalarField(p, False, fid))
    lab = f"A{v + 1}"
    return (mu, SpinorField(p, True, lab, fid), SpinorField(p, False, lab, fid))


def _ladder(q: Quantum, dagger: bool, fid: str) -> Ladder:
    return Ladder("b" if q.antiparticle else "a", q.mode, dagger, q.spin, fid)


def build_word(model: int, vertices: Sequence[str], in_state: ExternalState, out_state: ExternalState,
               fid: str = "f") -> tuple[Word, list]:
    """Word for <out| T[ vertices ] |in> and the endpoint label of every position."""
    prefix, ends = [], []
    for did, lev in out_state.detectors:
        if lev == "e":
            prefix.append(Sigma(False, did))
            ends.append(("out", did))
    for i in reversed(range(len(out_state.quanta))):
        prefix.append(_ladder(out_state.quanta[i], False, fid))
        ends.append(("out", i))
    groups = []
    for v, did in enumerate(vertices):
        syms = _vertex_symbols(model, v, did, fid)
        groups.append(Group(syms, True))
        ends.append(("v", v, "mu"))
        ends += [("v", v, s) for s in _SLOTS[model]]
    suffix = []
    for i, q in enumerate(in_state.quanta):
        suffix.append(_ladder(q, True, fid))
        ends.append(("in", i))
    for did, lev in in_state.detectors:
        if lev == "e":
            suffix.append(Sigma(True, did))
            ends.append(("in", did))
    return Word(tuple(prefix), tuple(groups), tuple(suffix)), ends


def _canon(end):
    # identical slots at one vertex are interchangeable
    return ("v", end[1], end[2]) if end[0] == "v" else end


def _edge(word: Word, ends: list, i: int, j: int) -> Edge:
    syms = word.symbols
    x, y = syms[i], syms[j]
    if x.algebra[0] == "det":
        return Edge("detector", (ends[i], ends[j]))
    if isinstance(x, (SpinorField,)) or isinstance(y, SpinorField) or getattr(x, "spin", None) is not None:
        kind = "spinor"
    else:
        kind = "scalar"

    def source(s) -> bool:
        # the end a particle line leaves from
        if isinstance(s, SpinorField):
            return s.conj
        if isinstance(s, ScalarField):
            return s.dagger
        return (s.species == "a") == s.dagger

    directed = kind == "spinor" or any(
        (isinstance(s, ScalarField) and s.dagger) or (isinstance(s, Ladder) and s.species == "b") for s in (x, y)
    )
    if directed and not source(x):
        return Edge(kind, (ends[j], ends[i]), True)
    return Edge(kind, (ends[i], ends[j]), directed)


def _vertex_assignments(order: int, dets: Sequence[str]) -> list[tuple]:
    return list(itertools.combinations_with_replacement(dets, order))


def enumerate_diagrams(model: int, order: int, in_state: ExternalState | None = None,
                       out_state: ExternalState | None = None, n_detectors: int | None = None,
                       vertices: Sequence[str] | None = None, fid: str = "f") -> list[Diagram]:
    """Distinct diagrams of the given order; vertices are labelled and sorted by detector."""
    if model not in _SLOTS:
        raise ConfigError(f"model must be 1..4, got {model}")
    in_state = in_state or ExternalState.vacuum()
    out_state = out_state or ExternalState.vacuum()
    in_state.check(model)
    out_state.check(model)
    dets = [d for d, _ in in_state.detectors]
    if [d for d, _ in out_state.detectors] != dets:
        raise ConfigError("in and out states must list the same detectors")
    if n_detectors is not None and n_detectors != len(dets):
        raise ConfigError(f"n_detectors={n_detectors} but the states list {len(dets)} detectors")
    assignments = [tuple(vertices)] if vertices is not None else _vertex_assignments(order, dets)
    kinds = {fid: MODEL_FIELD[model]}
    out: list[Diagram] = []
    for verts in assignments:
        if len(verts) != order or any(d not in dets for d in verts):
            raise ConfigError(f"vertex assignment {verts} does not match order {order} and detectors {dets}")
        word, ends = build_word(model, verts, in_state, out_state, fid)
        groups: dict = {}
        for pairing in enumerate_full_contractions(word, kinds=kinds):
            key = tuple(sorted((tuple(sorted((_canon(ends[i]), _canon(ends[j])), key=repr)) for i, j in pairing.pairs),
                             key=repr))
            groups.setdefault(key, []).append(pairing)
        for key, pairings in groups.items():
            rep = pairings[0]
            edges = tuple(_edge(word, ends, i, j) for i, j in rep.pairs)
            out.append(Diagram(model, order, tuple(verts), tuple(("mu",) + _SLOTS[model] for _ in verts), edges,
                               len(pairings), rep.sign, tuple(pairings), word, in_state, out_state, key))
    return out


def contraction_count(model: int, order: int, in_state=None, out_state=None, **kw) -> int:
    return sum(d.symmetry_factor for d in enumerate_diagrams(model, order, in_state, out_state, **kw))


# ---------------------------------------------------------------- leg factors


@dataclass(frozen=True)
class Leg:
    """External line: kind detector|scalar|spinor, direction in|out|through."""

    kind: str
    direction: str
    mode: tuple = ()
    spin: float | None = None
    antiparticle: bool = False
    excited: bool = True


def leg_factor(leg: Leg, t_boundary, field: CavityField | None = None, Omega: float | None = None):
    """Factor of an external leg including interaction-picture boundary phases.

    ``t_boundary`` is the final time for outgoing legs, the initial time for
    incoming ones and the pair (t, t0) for lines running through the diagram.
    """
    if leg.direction not in ("in", "out", "through"):
        raise ConfigError(f"leg direction must be in, out or through, got {leg.direction!r}")
    if leg.direction == "through":
        t, t0 = t_boundary
        span = t - t0
    else:
        t = float(t_boundary)
    if leg.kind == "detector":
        if not leg.excited:
            return 1.0 + 0j
        if Omega is None:
            raise ConfigError("detector legs need Omega")
        if leg.direction == "through":
            return np.exp(-1j * Omega * span)
        return np.exp((-1j if leg.direction == "out" else 1j) * Omega * t)
    if field is None:
        raise ConfigError("field legs need a field")
    kv = momentum_of(np.array(leg.mode, dtype=float), field.L)
    w = float(dispersion(kv, field.m))
    if leg.direction == "through":
        return np.exp(-1j * w * span)
    ph = np.exp((-1j if leg.direction == "out" else 1j) * w * t)
    if leg.kind == "scalar":
        return ph / math.sqrt(2 * w * field.volume)
    if leg.kind != "spinor":
        raise ConfigError(f"unknown leg kind {leg.kind!r}")
    norm = spinor_norm_factor(kv, field)
    sp = spinor(kv, leg.spin, -1 if leg.antiparticle else 1, field)
    # outgoing particle: ubar, outgoing antiparticle: v, incoming: u, vbar
    bar = (leg.direction == "out") != leg.antiparticle
    return ph * norm * (dirac_bar(sp) if bar else sp)


# ---------------------------------------------------------------- evaluation


def _as_dets(dets) -> dict:
    if isinstance(dets, DetectorSpec):
        return {"d": dets}
    return dict(dets)


def _setup(field: CavityField, cutoff=None, setup: FieldSetup | None = None) -> FieldSetup:
    if setup is not None:
        if setup.field != field:
            raise ConfigError("setup belongs to a different field")
        return setup
    if cutoff is None:
        raise ConfigError("give a cutoff or an explicit mode setup")
    return FieldSetup.from_cutoff(field, int(cutoff))


def _coef(field: CavityField, kv: np.ndarray, spin, sym, emit: bool):
    """Mode coefficient of field symbol ``sym`` emitting or absorbing one quantum.

    Scalars: 1/sqrt(2 w L^n).  Psi absorbs particles (u) and emits antiparticles
    (v); Psibar emits particles (ubar) and absorbs antiparticles (vbar).
    """
    if isinstance(sym, ScalarField):
        w = float(dispersion(kv, field.m))
        return 1 / math.sqrt(2 * w * field.volume)
    norm = spinor_norm_factor(kv, field)
    if not sym.conj:
        return norm * spinor(kv, spin, -1 if emit else 1, field)
    return norm * dirac_bar(spinor(kv, spin, 1 if emit else -1, field))


@dataclass
class _Line:
    """Internal line summed over modes: arrays along one axis."""

    k: np.ndarray
    w: np.ndarray
    coef_emit: np.ndarray
    coef_absorb: np.ndarray


def _line_arrays(setup: FieldSetup, absorber, emitter) -> _Line:
    f = setup.field
    ks, ws = setup.k, setup.omega
    spins = SPINS if isinstance(absorber, SpinorField) else (None,)
    K, W, CE, CA = [], [], [], []
    for kv, w in zip(ks, ws):
        for s in spins:
            K.append(kv)
            W.append(w)
            CE.append(_coef(f, kv, s, emitter, True))
            CA.append(_coef(f, kv, s, absorber, False))
    return _Line(np.array(K), np.array(W), np.array(CE), np.array(CA))


def _simplex_value(diag_word: Word, pairing: ContractionPairing, order_desc: tuple, verts: tuple,
                   field: CavityField, dets: dict, setup: FieldSetup, model: int, method: str,
                   nodes: int, line_cache: dict) -> complex:
    """One contraction on one time-ordered simplex (order_desc lists vertices latest first)."""
    syms = diag_word.symbols
    lay = diag_word.layout()
    rank = {v: r for r, v in enumerate(order_desc)}
    k = len(verts)
    n = field.n
    freq = [0.0] * k
    mom = [np.zeros(n) for _ in range(k)]
    sign = pairing.sign
    slot_coef: dict = {}          # position -> constant coefficient or (line index, role)
    lines: list[tuple[_Line, int, int]] = []   # (arrays, absorbing vertex, emitting vertex)

    def vertex_of(pos):
        return lay[pos][1]

    for i, j in pairing.pairs:
        x, y = syms[i], syms[j]
        ri, rj = lay[i][0], lay[j][0]
        if ri != "core" and rj != "core":
            continue
        if x.algebra[0] == "det":
            Om = dets[x.algebra[1]].Omega
            if ri == "prefix":
                freq[vertex_of(j)] += Om
            elif rj == "suffix":
                freq[vertex_of(i)] -= Om
            else:
                vi, vj = vertex_of(i), vertex_of(j)
                late, early = (vi, vj) if rank[vi] < rank[vj] else (vj, vi)
                freq[late] -= Om
                freq[early] += Om
                if late == vj:
                    sign = -sign
            continue
        if ri == "prefix" or rj == "suffix":
            lad, pos = (x, j) if ri == "prefix" else (y, i)
            kv = momentum_of(np.array(lad.mode, dtype=float), field.L)
            w = float(dispersion(kv, field.m))
            emit = ri == "prefix"
            v = vertex_of(pos)
            freq[v] += w if emit else -w
            mom[v] = mom[v] + (kv if emit else -kv)
            slot_coef[pos] = _coef(field, kv, lad.spin, syms[pos], emit)
            continue
        vi, vj = vertex_of(i), vertex_of(j)
        (late, lp), (early, ep) = ((vi, i), (vj, j)) if rank[vi] < rank[vj] else ((vj, j), (vi, i))
        if x.fermionic and late == vj:
            sign = -sign
        ck = (syms[lp], syms[ep])
        if ck not in line_cache:
            line_cache[ck] = _line_arrays(setup, syms[lp], syms[ep])
        idx = len(lines)
        lines.append((line_cache[ck], late, early))
        slot_coef[lp] = (idx, "absorb")
        slot_coef[ep] = (idx, "emit")

    nax = len(lines)

    def along(arr, axis):
        shape = [1] * nax + list(arr.shape[1:])
        shape[axis] = arr.shape[0]
        return arr.reshape(shape)

    nu = [np.asarray(f_, dtype=float) for f_ in freq]
    P = [m_.astype(float) for m_ in mom]
    for a, (ln, late, early) in enumerate(lines):
        w = along(ln.w, a)
        kk = along(ln.k, a)
        nu[late] = nu[late] - w
        nu[early] = nu[early] + w
        P[late] = P[late] - kk
        P[early] = P[early] + kk

    total = np.asarray(1.0 + 0j)
    for v in range(k):
        start = next(p for p, (r, u) in enumerate(lay) if r == "core" and u == v)
        fpos = list(range(start + 1, start + 1 + len(_SLOTS[model])))

        def coef_at(p):
            c = slot_coef[p]
            if isinstance(c, tuple):
                ln = lines[c[0]][0]
                return along(ln.coef_absorb if c[1] == "absorb" else ln.coef_emit, c[0])
            return np.asarray(c)

        cs = [coef_at(p) for p in fpos]
        if model == 4:
            cv = np.sum(cs[0] * cs[1], axis=-1)
        else:
            cv = cs[0] if len(cs) == 1 else cs[0] * cs[1]
        prof = dets[verts[v]].profile.profile_fourier(np.broadcast_to(P[v], np.broadcast_shapes(P[v].shape, (1,) * nax + (n,))))
        total = total * cv * prof
    if k == 1:
        J = quad.single(dets[verts[0]].switching, nu[0], "exact" if method in ("auto", "exact") else "gl", nodes)
    else:
        a, b = order_desc
        J = quad.ordered(dets[verts[a]].switching, dets[verts[b]].switching, nu[a], nu[b], method, nodes)
    return sign * complex(np.sum(total * J))


def _perm_parity(order_desc: tuple, verts: tuple) -> int:
    sgn = 1
    for d in set(verts):
        seq = [v for v in order_desc if verts[v] == d]
        inv = sum(1 for a, b in itertools.combinations(seq, 2) if a > b)
        sgn *= -1 if inv % 2 else 1
    return sgn


def _prefactor(verts: tuple, dets: dict) -> complex:
    out = 1.0 + 0j
    for d, c in Counter(verts).items():
        out *= (-1j * dets[d].lam) ** c / math.factorial(c)
    return out


def _energy(state: ExternalState, field: CavityField, dets: dict) -> float:
    e = sum(dets[d].Omega for d, lev in state.detectors if lev == "e")
    for q in state.quanta:
        e += float(dispersion(momentum_of(np.array(q.mode, dtype=float), field.L), field.m))
    return e


def amplitude(diagram: Diagram, field: CavityField, dets, cutoff: int | None = None,
              setup: FieldSetup | None = None, method: str = "auto", nodes: int = quad.DEFAULT_NODES,
              boundary: tuple | None = None) -> complex:
    """Time-domain value of one diagram.

    ``method`` selects the ordered time integral (auto, exact, gl).  With
    ``boundary=(t0, t)`` the interaction-picture phases of the external states
    are included; without it the states carry no phase.
    """
    if diagram.order > 2:
        raise NotImplementedError("amplitudes are evaluated through second order only")
    dets = _as_dets(dets)
    for d in set(diagram.vertices):
        if dets[d].model != diagram.model:
            raise ModelMismatch(f"detector {d} has model {dets[d].model}, diagram has model {diagram.model}")
        dets[d].check(field)
    if diagram.order == 0:
        val = 1.0 + 0j
    else:
        st = _setup(field, cutoff, setup) if _has_internal(diagram) else (setup or FieldSetup(field, ()))
        cache: dict = {}
        val = 0j
        for order_desc in itertools.permutations(range(diagram.order)):
            par = _perm_parity(order_desc, diagram.vertices)
            for pairing in diagram.pairings:
                val += par * _simplex_value(diagram.word, pairing, order_desc, diagram.vertices, field, dets, st,
                                            diagram.model, method, nodes, cache)
        val *= _prefactor(diagram.vertices, dets)
    val /= diagram.in_state.norm() * diagram.out_state.norm()
    if boundary is not None:
        t0, t = boundary
        val *= np.exp(-1j * _energy(diagram.out_state, field, dets) * t + 1j * _energy(diagram.in_state, field, dets) * t0)
    return complex(val)


def _has_internal(diagram: Diagram) -> bool:
    return any(e.kind != "detector" and all(x[0] == "v" for x in e.ends) for e in diagram.edges)


def total_amplitude(model: int, order: int, field: CavityField, dets, in_state=None, out_state=None,
                    cutoff: int | None = None, setup: FieldSetup | None = None, **kw) -> complex:
    """Sum of all diagrams of the given order."""
    dets = _as_dets(dets)
    in_state = in_state or ExternalState(tuple((d, "g") for d in dets))
    out_state = out_state or ExternalState(tuple((d, "g") for d in dets))
    if order == 0:
        return complex(in_state == out_state)
    diags = enumerate_diagrams(model, order, in_state, out_state)
    return complex(sum(amplitude(d, field, dets, cutoff, setup, **kw) for d in diags))


@dataclass
class AmplitudeSeries:
    cutoffs: list
    values: list
    verdict: object = None

    @property
    def value(self) -> complex:
        return self.values[-1]


def amplitude_series(diagram: Diagram, field: CavityField, dets, cutoffs: Sequence[int], tol: float = 1e-10,
                     **kw) -> AmplitudeSeries:
    """Amplitude at increasing loop cutoffs with a convergence verdict on |A|."""
    vals = [amplitude(diagram, field, dets, cutoff=c, **kw) for c in cutoffs]
    verdict = None
    if len(cutoffs) >= 4:
        verdict = convergence_diagnose(list(cutoffs), [v.real for v in vals], None, tol)
    return AmplitudeSeries(list(cutoffs), vals, verdict)


# ---------------------------------------------------------------- first order, summed over final states


def first_order_probability(model: int, field: CavityField, det: DetectorSpec, cutoff: int | None = None,
                            setup: FieldSetup | None = None) -> float:
    """sum_a |A1_{a,e}|^2 from |0,g> over every final field state in the mode set."""
    det.check(field)
    st = _setup(field, cutoff, setup)
    f = field
    k, w = st.k, st.omega
    Om, lam = det.Omega, det.lam
    sw, pr = det.switching, det.profile
    if model == 1:
        amp = 1 / np.sqrt(2 * w * f.volume) * pr.profile_fourier(k) * sw.time_fourier(Om + w)
        return float(lam ** 2 * np.sum(np.abs(amp) ** 2))
    K = k[:, None, :] + k[None, :, :]
    Wsum = w[:, None] + w[None, :]
    base = pr.profile_fourier(K) * sw.time_fourier(Om + Wsum)
    if model in (2, 3):
        N = 1 / np.sqrt(2 * w * f.volume)
        amp = N[:, None] * N[None, :] * base
        # ordered pairs; model 2 gets 2 from the two slots and 1/2! from identical quanta
        mult = 2.0 if model == 2 else 1.0
        return float(lam ** 2 * mult * np.sum(np.abs(amp) ** 2))
    # model 4: particle (k, s) from psibar, antiparticle (p, r) from psi
    ub = np.array([[spinor_norm_factor(kv, f) * dirac_bar(spinor(kv, s, 1, f)) for s in SPINS] for kv in k])
    vv = np.array([[spinor_norm_factor(kv, f) * spinor(kv, s, -1, f) for s in SPINS] for kv in k])
    c = np.einsum("ksA,prA->kspr", ub, vv)
    amp = c * base[:, None, :, None]
    return float(lam ** 2 * np.sum(np.abs(amp) ** 2))


# ---------------------------------------------------------------- VNRP and unitarity


def vacuum_loop(model: int, field: CavityField, det: DetectorSpec, cutoff: int | None = None,
                setup: FieldSetup | None = None, **kw) -> complex:
    """A2 for |0,g> -> |0,g>."""
    det.check(field)
    vac = ExternalState.vacuum("g")
    return total_amplitude(model, 2, field, {"d": det}, vac, vac, cutoff, setup, **kw)


def vnrp_second_order(model: int, field: CavityField, det: DetectorSpec, cutoff: int | None = None,
                      setup: FieldSetup | None = None, **kw) -> float:
    """P(0,g -> 0,g) = 1 + 2 Re A2 through second order."""
    if det.model != model:
        raise ModelMismatch(f"detector model {det.model} differs from requested model {model}")
    if det.lam == 0:
        return 1.0
    return 1.0 + 2 * vacuum_loop(model, field, det, cutoff, setup, **kw).real


def unitarity_check(model: int, field: CavityField, det: DetectorSpec, cutoff: int | None = None,
                    setup: FieldSetup | None = None, loop_cutoff: int | None = None, **kw) -> float:
    """|sum_a |A1_{a,e}|^2 + 2 Re A2_{0,g}|; ``loop_cutoff`` mismatches the two sides on purpose."""
    p1 = first_order_probability(model, field, det, cutoff, setup)
    lc = cutoff if loop_cutoff is None else loop_cutoff
    a2 = vacuum_loop(model, field, det, lc, setup if loop_cutoff is None else None, **kw)
    return abs(p1 + 2 * a2.real)


def two_detector_swap(field: CavityField, detA: DetectorSpec, detB: DetectorSpec, cutoff: int | None = None,
                      particle: Quantum | None = None, antiparticle: Quantum | None = None,
                      setup: FieldSetup | None = None, **kw) -> complex:
    """Amplitude for |e_A, g_B, 0> -> |g_A, e_B, particle + antiparticle> at order lam_A lam_B."""
    model = detA.model
    if model not in (3, 4) or detB.model != model:
        raise ModelMismatch("the swap process needs two detectors of the same quadratic model (3 or 4)")
    spin = 0.5 if model == 4 else None
    one = (1,) * field.n
    particle = particle or Quantum(one, False, spin)
    antiparticle = antiparticle or Quantum(tuple(-v for v in one), True, spin)
    ins = ExternalState((("A", "e"), ("B", "g")))
    outs = ExternalState((("A", "g"), ("B", "e")), (particle, antiparticle))
    diags = enumerate_diagrams(model, 2, ins, outs, vertices=("A", "B"))
    dets = {"A": detA, "B": detB}
    # the two labellings (A, B) and (B, A) of the vertices are equal and cancel the 1/2!
    return complex(sum(amplitude(d, field, dets, cutoff, setup, **kw) for d in diags))


def describe(diagrams: Sequence[Diagram]) -> str:
    if not diagrams:
        return "no diagrams\n"
    return f"# word: {format_word(diagrams[0].word)}\n" + export_diagrams(diagrams)
