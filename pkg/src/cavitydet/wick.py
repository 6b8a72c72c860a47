"""Symbolic Wick engine for vacuum expectation values of operator words.

A word is ``prefix | T[ groups ] | suffix``: annihilators on the left, a
time-ordered core of field and monopole operators, creators on the right.
Core groups are either normal-ordered (one T-unit at a common time) or bare
(every symbol its own unit).

Algebras are keyed by field id or detector id.  Different algebras commute;
within an algebra, spinor fields, spinor ladders and the detector (sigma,
monopole) are fermionic.  The detector is one fermionic mode with
sigma^- = c, sigma^+ = c^dagger and mu(t) = exp(-i Omega t) c + exp(i Omega t) c^dagger.
"""
from __future__ import annotations

import itertools
import re
import string
from dataclasses import dataclass, field as dc_field
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import CoincidenceLimit, ConfigError, MalformedWord, ModeOutsideSpace, OpenSpinorIndex
from .lattice import (
    SPINS,
    CavityField,
    FieldKind,
    dirac_bar,
    dispersion,
    lattice,
    momentum_of,
    spinor,
    spinor_norm_factor,
)

# ---------------------------------------------------------------- symbols


@dataclass(frozen=True)
class Ladder:
    """a (species 'a') or b (species 'b') ladder operator of field ``field_id``."""

    species: str
    mode: tuple
    dagger: bool
    spin: float | None = None
    field_id: str = "f"

    @property
    def algebra(self):
        return ("field", self.field_id)

    @property
    def fermionic(self) -> bool:
        return self.spin is not None


@dataclass(frozen=True)
class Sigma:
    plus: bool
    detector: str = "d"

    @property
    def algebra(self):
        return ("det", self.detector)

    fermionic = True


@dataclass(frozen=True)
class ScalarField:
    point: str
    dagger: bool = False
    field_id: str = "f"

    @property
    def algebra(self):
        return ("field", self.field_id)

    fermionic = False


@dataclass(frozen=True)
class SpinorField:
    """Psi^index (conj=False) or Psibar_index (conj=True); index is 0..3 or a label."""

    point: str
    conj: bool
    index: Union[int, str]
    field_id: str = "f"

    @property
    def algebra(self):
        return ("field", self.field_id)

    fermionic = True


@dataclass(frozen=True)
class Monopole:
    point: str
    detector: str = "d"

    @property
    def algebra(self):
        return ("det", self.detector)

    fermionic = True


Symbol = Union[Ladder, Sigma, ScalarField, SpinorField, Monopole]
_CORE = (ScalarField, SpinorField, Monopole)


@dataclass(frozen=True)
class Group:
    symbols: tuple
    normal: bool = False


@dataclass(frozen=True)
class Word:
    prefix: tuple = ()
    groups: tuple = ()
    suffix: tuple = ()

    def __post_init__(self):
        for s in self.prefix:
            if not _is_annihilator(s):
                raise MalformedWord(f"prefix must hold annihilators, got {s}")
        for s in self.suffix:
            if _is_annihilator(s) or isinstance(s, _CORE):
                raise MalformedWord(f"suffix must hold creators, got {s}")
        for g in self.groups:
            if not g.symbols:
                raise MalformedWord("empty group")
            for s in g.symbols:
                if not isinstance(s, _CORE):
                    raise MalformedWord(f"time-ordered core holds fields and monopoles only, got {s}")

    @property
    def symbols(self) -> list:
        return list(self.prefix) + [s for g in self.groups for s in g.symbols] + list(self.suffix)

    def layout(self) -> list[tuple[str, int]]:
        """(region, unit) per flattened position; units number the core T-units."""
        out = [("prefix", -1)] * len(self.prefix)
        unit = 0
        for g in self.groups:
            if g.normal:
                out += [("core", unit)] * len(g.symbols)
                unit += 1
            else:
                for _ in g.symbols:
                    out.append(("core", unit))
                    unit += 1
        out += [("suffix", -1)] * len(self.suffix)
        return out

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        return format_word(self)


def _is_annihilator(s) -> bool:
    return (isinstance(s, Ladder) and not s.dagger) or (isinstance(s, Sigma) and not s.plus)


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class FieldSetup:
    field: CavityField
    modes: tuple

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(tuple(int(v) for v in np.atleast_1d(l)) for l in self.modes))
        for l in self.modes:
            if len(l) != self.field.n or not any(l):
                raise ConfigError(f"bad mode {l} for n={self.field.n}")

    @classmethod
    def from_cutoff(cls, field: CavityField, cutoff: int) -> "FieldSetup":
        return cls(field, tuple(map(tuple, lattice(field.n, cutoff))))

    def index(self, l) -> int:
        try:
            return self.modes.index(tuple(l))
        except ValueError:
            raise ModeOutsideSpace(f"mode {tuple(l)} is not in the mode list") from None

    @property
    def k(self) -> np.ndarray:
        return momentum_of(np.array(self.modes, dtype=float).reshape(-1, self.field.n), self.field.L)

    @property
    def omega(self) -> np.ndarray:
        return dispersion(self.k, self.field.m)


@dataclass
class WickConfig:
    """Fields (id -> setup), detector gaps (id -> Omega), points (name -> (t, x))."""

    fields: dict = dc_field(default_factory=dict)
    detectors: dict = dc_field(default_factory=dict)
    points: dict = dc_field(default_factory=dict)

    @classmethod
    def single(cls, field: CavityField | None = None, modes=(), Omega: float | None = None,
               points: dict | None = None) -> "WickConfig":
        fields = {"f": FieldSetup(field, tuple(modes))} if field is not None else {}
        dets = {"d": Omega} if Omega is not None else {}
        return cls(fields, dets, dict(points or {}))

    def setup(self, fid: str) -> FieldSetup:
        if fid not in self.fields:
            raise ConfigError(f"unknown field id {fid!r}")
        return self.fields[fid]

    def gap(self, did: str) -> float:
        if did not in self.detectors:
            raise ConfigError(f"unknown detector id {did!r}")
        return float(self.detectors[did])

    def point(self, name: str) -> tuple[float, np.ndarray]:
        if name not in self.points:
            raise ConfigError(f"unknown point {name!r}")
        t, x = self.points[name]
        return float(t), np.atleast_1d(np.asarray(x, dtype=float))

    def time(self, name: str) -> float:
        return self.point(name)[0]


def infer_kinds(word: Word) -> dict:
    """Field kind per field id from the symbols alone (spinor > complex > real)."""
    kinds: dict = {}
    for s in word.symbols:
        if isinstance(s, (Ladder, ScalarField, SpinorField)):
            fid = s.field_id
            if isinstance(s, SpinorField) or (isinstance(s, Ladder) and s.spin is not None):
                k = FieldKind.SPINOR
            elif (isinstance(s, ScalarField) and s.dagger) or (isinstance(s, Ladder) and s.species == "b"):
                k = FieldKind.COMPLEX
            else:
                k = FieldKind.REAL
            order = [FieldKind.REAL, FieldKind.COMPLEX, FieldKind.SPINOR]
            if fid not in kinds or order.index(k) > order.index(kinds[fid]):
                kinds[fid] = k
    return kinds


def _kinds(word: Word, config: WickConfig | None, kinds: dict | None) -> dict:
    out = infer_kinds(word)
    if config is not None:
        out.update({fid: st.field.kind for fid, st in config.fields.items()})
    if kinds:
        out.update(kinds)
    return out


# ---------------------------------------------------------------- structure


def _wightman_allowed(x, y, kind) -> bool:
    """Whether <0| x y |0> can be nonzero, by operator type."""
    if x.algebra != y.algebra:
        return False
    if isinstance(x, Sigma):
        return (not x.plus) and (isinstance(y, Monopole) or (isinstance(y, Sigma) and y.plus))
    if isinstance(x, Monopole):
        return isinstance(y, Monopole) or (isinstance(y, Sigma) and y.plus)
    if isinstance(x, Ladder):
        if x.dagger:
            return False
        if isinstance(y, Ladder):
            return y.dagger and y.species == x.species and y.mode == x.mode and y.spin == x.spin
        if kind is FieldKind.REAL:
            return isinstance(y, ScalarField)
        if kind is FieldKind.COMPLEX:
            return isinstance(y, ScalarField) and y.dagger == (x.species == "a")
        return isinstance(y, SpinorField) and y.conj == (x.species == "a")
    if isinstance(x, ScalarField):
        if isinstance(y, Ladder):
            if not y.dagger:
                return False
            if kind is FieldKind.REAL:
                return True
            return (x.dagger and y.species == "b") or (not x.dagger and y.species == "a")
        if isinstance(y, ScalarField):
            return kind is FieldKind.REAL or x.dagger != y.dagger
        return False
    if isinstance(x, SpinorField):
        if isinstance(y, Ladder):
            return y.dagger and ((x.conj and y.species == "b") or (not x.conj and y.species == "a"))
        if isinstance(y, SpinorField):
            return x.conj != y.conj
    return False


def _pair_allowed(word: Word, lay, i: int, j: int, kinds: dict) -> bool:
    syms = word.symbols
    x, y = syms[i], syms[j]
    (ri, ui), (rj, uj) = lay[i], lay[j]
    if x.algebra != y.algebra:
        return False
    kind = kinds.get(x.algebra[1]) if x.algebra[0] == "field" else None
    if ri == "core" and rj == "core":
        if ui == uj:
            return False
        # either time order may occur, so both Wightman orders are candidates
        return _wightman_allowed(x, y, kind) or _wightman_allowed(y, x, kind)
    return _wightman_allowed(x, y, kind)


@dataclass(frozen=True)
class ContractionPairing:
    pairs: tuple
    sign: int


def fermion_sign(word: Word, pairs: Sequence[tuple[int, int]]) -> int:
    """(-1)^(crossings among fermionic pairs of the same algebra)."""
    syms = word.symbols
    ferm = [(i, j) for i, j in pairs if syms[i].fermionic]
    crossings = 0
    for (a, b), (c, d) in itertools.combinations(ferm, 2):
        if syms[a].algebra != syms[c].algebra:
            continue
        if a < c < b < d or c < a < d < b:
            crossings += 1
    return -1 if crossings % 2 else 1


def enumerate_full_contractions(word: Word, config: WickConfig | None = None,
                                kinds: dict | None = None) -> list[ContractionPairing]:
    """All nonvanishing full pairings of ``word``; each pair is (i, j) with i < j."""
    syms = word.symbols
    n = len(syms)
    if n % 2:
        return []
    lay = word.layout()
    kd = _kinds(word, config, kinds)
    allowed = [[j > i and _pair_allowed(word, lay, i, j, kd) for j in range(n)] for i in range(n)]
    out: list[ContractionPairing] = []

    def rec(free: list[int], acc: list):
        if not free:
            out.append(ContractionPairing(tuple(acc), fermion_sign(word, acc)))
            return
        i, rest = free[0], free[1:]
        for idx, j in enumerate(rest):
            if allowed[i][j]:
                rec(rest[:idx] + rest[idx + 1:], acc + [(i, j)])

    rec(list(range(n)), [])
    return out


# ---------------------------------------------------------------- contraction values


@dataclass(frozen=True)
class Factor:
    """A contraction value; ``axes`` lists the word positions of spinor symbols
    whose Dirac index runs along the corresponding array axis."""

    value: np.ndarray
    axes: tuple = ()


def _scalar_modes(st: FieldSetup, t: float, x: np.ndarray) -> np.ndarray:
    """phi~_k(t, x) = exp(-i w t + i k.x)/sqrt(2 w L^n) over the mode list."""
    k, w = st.k, st.omega
    return np.exp(-1j * w * t + 1j * (k @ x)) / np.sqrt(2 * w * st.field.volume)


def _spinor_modes(st: FieldSetup, t: float, x: np.ndarray, eps: int) -> np.ndarray:
    """psi~_{k,s,eps}(t,x), shape (modes, 2 spins, 4)."""
    f = st.field
    out = np.empty((len(st.modes), 2, 4), dtype=complex)
    for a, (kv, w) in enumerate(zip(st.k, st.omega)):
        ph = np.exp(1j * eps * (kv @ x - w * t)) * spinor_norm_factor(kv, f)
        for b, s in enumerate(SPINS):
            out[a, b] = ph * spinor(kv, s, eps, f)
    return out


def _spin_index(s) -> int:
    return SPINS.index(s)


def _ladder_field(lad: Ladder, fld, st: FieldSetup, cfg: WickConfig, ladder_left: bool) -> np.ndarray:
    """<lad fld> (ladder_left) or <fld lad>."""
    a = st.index(lad.mode)
    t, x = cfg.point(fld.point)
    if isinstance(fld, ScalarField):
        phi = _scalar_modes(st, t, x)[a]
        return np.asarray(np.conj(phi) if ladder_left else phi)
    b = _spin_index(lad.spin)
    if ladder_left:
        # a . Psibar -> psibar~_+ ; b . Psi -> psi~_-
        if lad.species == "a":
            return dirac_bar(_spinor_modes(st, t, x, 1)[a, b])
        return _spinor_modes(st, t, x, -1)[a, b]
    # Psi . a^dagger -> psi~_+ ; Psibar . b^dagger -> psibar~_-
    if lad.species == "a":
        return _spinor_modes(st, t, x, 1)[a, b]
    return dirac_bar(_spinor_modes(st, t, x, -1)[a, b])


def _field_field(x, y, st: FieldSetup, cfg: WickConfig) -> np.ndarray:
    """Wightman <x y> for two fields of the same algebra."""
    tx, px = cfg.point(x.point)
    ty, py = cfg.point(y.point)
    if isinstance(x, ScalarField):
        return np.asarray(np.sum(_scalar_modes(st, tx, px) * np.conj(_scalar_modes(st, ty, py))))
    if not x.conj:
        # <Psi^A(x) Psibar_B(y)> = sum psi+_A(x) psibar+_B(y)
        u = _spinor_modes(st, tx, px, 1)
        ub = np.conj(_spinor_modes(st, ty, py, 1)) @ _G0
        return np.einsum("ksa,ksb->ab", u, ub)
    # <Psibar_A(x) Psi^B(y)> = sum psibar-_A(x) psi-_B(y)
    vb = np.conj(_spinor_modes(st, tx, px, -1)) @ _G0
    v = _spinor_modes(st, ty, py, -1)
    return np.einsum("ksa,ksb->ab", vb, v)


from .lattice import GAMMA as _GAMMA  # noqa: E402

_G0 = _GAMMA[0]


def wightman(word: Word, i: int, j: int, cfg: WickConfig) -> Factor:
    """<0| X_i X_j |0> in that operator order."""
    syms = word.symbols
    x, y = syms[i], syms[j]
    if isinstance(x, (Sigma, Monopole)):
        Om = cfg.gap(x.detector)
        if isinstance(x, Sigma):
            val = np.exp(1j * Om * cfg.time(y.point)) if isinstance(y, Monopole) else 1.0
        else:
            ty = cfg.time(y.point) if isinstance(y, Monopole) else 0.0
            val = np.exp(-1j * Om * (cfg.time(x.point) - ty))
        return Factor(np.asarray(val, dtype=complex))
    st = cfg.setup(x.algebra[1])
    if isinstance(x, Ladder) and isinstance(y, Ladder):
        st.index(x.mode)
        return Factor(np.asarray(1.0 + 0j))
    if isinstance(x, Ladder):
        v = _ladder_field(x, y, st, cfg, True)
        return Factor(v, (j,) if v.ndim else ())
    if isinstance(y, Ladder):
        v = _ladder_field(y, x, st, cfg, False)
        return Factor(v, (i,) if v.ndim else ())
    v = _field_field(x, y, st, cfg)
    return Factor(v, (i, j) if v.ndim else ())


def contraction_value(word: Word, pair: tuple[int, int], config: WickConfig, kinds: dict | None = None) -> Factor:
    """Value of one contraction (i < j), including time ordering in the core.

    Inadmissible pairs return an exact zero.
    """
    i, j = pair
    lay = word.layout()
    kd = _kinds(word, config, kinds)
    if not _pair_allowed(word, lay, i, j, kd):
        return Factor(np.asarray(0j))
    syms = word.symbols
    x, y = syms[i], syms[j]
    kind = kd.get(x.algebra[1]) if x.algebra[0] == "field" else None
    if lay[i][0] == "core" and lay[j][0] == "core":
        ti, tj = config.time(x.point), config.time(y.point)
        if ti == tj and x.fermionic:
            raise CoincidenceLimit(f"time ordering of {x} and {y} at equal times is undefined")
        if ti >= tj:
            if not _wightman_allowed(x, y, kind):
                return Factor(np.asarray(0j))
            return wightman(word, i, j, config)
        if not _wightman_allowed(y, x, kind):
            return Factor(np.asarray(0j))
        f = wightman(word, j, i, config)
        sgn = -1 if x.fermionic else 1
        return Factor(sgn * np.swapaxes(f.value, 0, 1) if f.value.ndim == 2 else sgn * f.value,
                      (i, j) if f.value.ndim == 2 else f.axes)
    return wightman(word, i, j, config)


# ---------------------------------------------------------------- evaluation


def _spinor_labels(word: Word) -> dict:
    """Map each string spinor label to the positions that carry it."""
    labels: dict = {}
    for pos, s in enumerate(word.symbols):
        if isinstance(s, SpinorField):
            if isinstance(s.index, str):
                labels.setdefault(s.index, []).append(pos)
            elif not (isinstance(s.index, (int, np.integer)) and 0 <= s.index < 4):
                raise MalformedWord(f"spinor index {s.index!r} must be 0..3 or a label")
    for lab, pos in labels.items():
        if len(pos) != 2:
            raise OpenSpinorIndex(f"spinor label {lab!r} appears {len(pos)} times; it must appear exactly twice")
    return labels


def _contract(word: Word, factors: list[Factor]) -> complex:
    syms = word.symbols
    letters = iter(string.ascii_letters)
    lab_letter: dict = {}
    operands, subs = [], []
    for f in factors:
        arr = f.value
        sub = ""
        index = []
        for ax, pos in enumerate(f.axes):
            idx = syms[pos].index
            if isinstance(idx, str):
                if idx not in lab_letter:
                    lab_letter[idx] = next(letters)
                sub += lab_letter[idx]
                index.append(slice(None))
            else:
                index.append(int(idx))
        arr = arr[tuple(index)] if index else arr
        operands.append(arr)
        subs.append(sub)
    if not operands:
        return 1.0 + 0j
    return complex(np.einsum(",".join(subs) + "->", *operands))


def evaluate_vev(word: Word, config: WickConfig, kinds: dict | None = None) -> complex:
    """Sum over full contractions of sign times the product of contraction values."""
    _spinor_labels(word)
    total = 0j
    cache: dict = {}
    for pairing in enumerate_full_contractions(word, config, kinds):
        facs = []
        for p in pairing.pairs:
            if p not in cache:
                cache[p] = contraction_value(word, p, config, kinds)
            facs.append(cache[p])
        total += pairing.sign * _contract(word, facs)
    return total


# ---------------------------------------------------------------- propagators


@dataclass(frozen=True)
class Propagator:
    value: complex | np.ndarray
    divergent: bool = False
    tail: float | None = None


def _setup(field: CavityField, cutoff=None, modes=None) -> FieldSetup:
    if modes is not None:
        return FieldSetup(field, tuple(modes))
    if cutoff is None:
        raise ConfigError("give a cutoff or an explicit mode list")
    return FieldSetup.from_cutoff(field, int(cutoff))


def _cauchy(fn, field, cutoff, modes):
    if modes is not None or cutoff is None or cutoff < 2:
        return None
    return float(np.max(np.abs(fn(_setup(field, cutoff)) - fn(_setup(field, cutoff // 2)))))


def scalar_propagator_timedomain(x, y, field: CavityField, cutoff: int | None = None, modes=None) -> Propagator:
    """G_F(x, y) = <T Phi(x) Phi^dagger(y)> as a truncated mode sum; x, y are (t, xvec)."""
    (tx, px), (ty, py) = x, y
    px, py = np.atleast_1d(np.asarray(px, float)), np.atleast_1d(np.asarray(py, float))

    def gf(st):
        a, b = ((tx, px), (ty, py)) if tx >= ty else ((ty, py), (tx, px))
        return np.sum(_scalar_modes(st, *a) * np.conj(_scalar_modes(st, *b)))

    st = _setup(field, cutoff, modes)
    coincident = tx == ty and np.array_equal(px, py)
    return Propagator(complex(gf(st)), coincident, None if coincident else _cauchy(gf, field, cutoff, modes))


def spinor_propagator_timedomain(x, y, field: CavityField, cutoff: int | None = None, modes=None) -> Propagator:
    """S_F(x, y) = <T Psi(x) Psibar(y)> as a 4x4 truncated mode sum."""
    (tx, px), (ty, py) = x, y
    px, py = np.atleast_1d(np.asarray(px, float)), np.atleast_1d(np.asarray(py, float))
    if tx == ty:
        raise CoincidenceLimit("S_F at equal times is undefined")

    def sf(st):
        cfg = WickConfig({"f": st}, {}, {"x": (tx, px), "y": (ty, py)})
        if tx > ty:
            return _field_field(SpinorField("x", False, 0), SpinorField("y", True, 0), st, cfg)
        return -_field_field(SpinorField("y", True, 0), SpinorField("x", False, 0), st, cfg).T

    st = _setup(field, cutoff, modes)
    return Propagator(sf(st), False, _cauchy(sf, field, cutoff, modes))


# ---------------------------------------------------------------- text grammar

_TOKEN = re.compile(
    r"""\s*(?:
      (?P<ladder>(?P<lname>ad|bd|a|b)\[(?P<lmode>[^\];]*)(?:;(?P<lspin>[+-]))?\])
    | (?P<sigma>(?P<sname>sm|sp))
    | (?P<fname>phid|phi|psibar|psi|mu)\((?P<fpt>[A-Za-z_]\w*)(?:;(?P<fidx>\w+))?\)
    | (?P<colon>:)
    )(?:@(?P<id>[A-Za-z_]\w*))?""",
    re.VERBOSE,
)


def _tokens(text: str) -> Iterator[object]:
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise MalformedWord(f"cannot parse near {text[pos:pos + 20]!r}")
        pos = m.end()
        d, id_ = m.groupdict(), m.group("id")
        if d["colon"]:
            if id_:
                raise MalformedWord("':' takes no id")
            yield ":"
        elif d["ladder"]:
            name = d["lname"]
            try:
                mode = tuple(int(v) for v in d["lmode"].split(","))
            except ValueError:
                raise MalformedWord(f"bad mode label {d['lmode']!r}") from None
            spin = None if d["lspin"] is None else (0.5 if d["lspin"] == "+" else -0.5)
            yield Ladder(name[0], mode, name.endswith("d"), spin, id_ or "f")
        elif d["sigma"]:
            yield Sigma(d["sname"] == "sp", id_ or "d")
        else:
            name, pt, idx = d["fname"], d["fpt"], d["fidx"]
            if name == "mu":
                if idx is not None:
                    raise MalformedWord("mu takes no spinor index")
                yield Monopole(pt, id_ or "d")
            elif name.startswith("phi"):
                if idx is not None:
                    raise MalformedWord("scalar fields take no spinor index")
                yield ScalarField(pt, name == "phid", id_ or "f")
            else:
                if idx is None:
                    raise MalformedWord(f"{name} needs a spinor index")
                index = int(idx) if idx.isdigit() else idx
                yield SpinorField(pt, name == "psibar", index, id_ or "f")


def parse_word(text: str) -> Word:
    """Parse ``prefix | T[ groups ] | suffix``; see docs/word_grammar.md."""
    parts = text.split("|")
    if len(parts) != 3:
        raise MalformedWord("a word has exactly three '|'-separated parts")
    pre, core, suf = (p.strip() for p in parts)
    if ":" in pre or ":" in suf:
        raise MalformedWord("normal-ordering colons belong in the core")
    m = re.fullmatch(r"T\[(.*)\]", core, re.S)
    if not m:
        raise MalformedWord("the middle part must read T[ ... ]")
    groups: list[Group] = []
    cur: list | None = None
    for tok in _tokens(m.group(1)):
        if tok == ":":
            if cur is None:
                cur = []
            else:
                if not cur:
                    raise MalformedWord("empty normal-ordered group")
                groups.append(Group(tuple(cur), True))
                cur = None
        elif cur is not None:
            cur.append(tok)
        else:
            groups.append(Group((tok,), False))
    if cur is not None:
        raise MalformedWord("unterminated normal-ordered group")
    return Word(tuple(_tokens(pre)), tuple(groups), tuple(_tokens(suf)))


def format_symbol(s) -> str:
    if isinstance(s, Ladder):
        name = s.species + ("d" if s.dagger else "")
        spin = "" if s.spin is None else (";+" if s.spin > 0 else ";-")
        out = f"{name}[{','.join(map(str, s.mode))}{spin}]"
        return out + ("" if s.field_id == "f" else f"@{s.field_id}")
    if isinstance(s, Sigma):
        return ("sp" if s.plus else "sm") + ("" if s.detector == "d" else f"@{s.detector}")
    if isinstance(s, Monopole):
        return f"mu({s.point})" + ("" if s.detector == "d" else f"@{s.detector}")
    if isinstance(s, ScalarField):
        return f"{'phid' if s.dagger else 'phi'}({s.point})" + ("" if s.field_id == "f" else f"@{s.field_id}")
    return f"{'psibar' if s.conj else 'psi'}({s.point};{s.index})" + ("" if s.field_id == "f" else f"@{s.field_id}")


def format_word(w: Word) -> str:
    core = []
    for g in w.groups:
        body = " ".join(format_symbol(s) for s in g.symbols)
        core.append(f": {body} :" if g.normal else body)
    return " ".join(
        [" ".join(format_symbol(s) for s in w.prefix), "|", f"T[ {' '.join(core)} ]" if core else "T[ ]", "|",
         " ".join(format_symbol(s) for s in w.suffix)]
    ).strip()
