"""Randomized operator words for the Wick-versus-oracle comparison."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import word_vev
from .lattice import SPINS, CavityField, FieldKind
from .wick import (
    FieldSetup,
    Group,
    Ladder,
    Monopole,
    ScalarField,
    Sigma,
    SpinorField,
    WickConfig,
    Word,
    enumerate_full_contractions,
    evaluate_vev,
    format_word,
)

ALGEBRAS = ("real", "complex", "spinor", "detector", "mixed")

_MODES = {
    1: [(1,), (-1,), (2,), (-2,)],
    2: [(1, 0), (0, -1), (1, 1), (-2, 1)],
    3: [(1, 0, 0), (0, -1, 0), (0, 0, 1), (1, 1, 0)],
}


@dataclass
class SuiteCase:
    word: Word
    config: WickConfig
    algebra: str


def _field_for(rng: np.random.Generator, algebra: str) -> CavityField:
    if algebra == "spinor":
        n = int(rng.choice([1, 3]))
        m = float(rng.choice([0.0, 0.7]))
        return CavityField(n, float(rng.uniform(1.0, 3.0)), m, FieldKind.SPINOR)
    n = int(rng.choice([1, 2]))
    kind = FieldKind.COMPLEX if algebra == "complex" else FieldKind.REAL
    return CavityField(n, float(rng.uniform(1.0, 3.0)), float(rng.choice([0.0, 0.5])), kind)


def random_case(rng: np.random.Generator, algebra: str | None = None, max_symbols: int = 8) -> SuiteCase:
    """One random word of at most ``max_symbols`` symbols over at most four modes."""
    algebra = algebra or str(rng.choice(ALGEBRAS))
    field = None if algebra == "detector" else _field_for(rng, algebra)
    n = field.n if field is not None else 1
    nmodes = int(rng.integers(1, 5))
    pool = _MODES[n]
    modes = [pool[i] for i in sorted(rng.choice(len(pool), size=nmodes, replace=False))]
    total = int(rng.choice([2, 4, 6, 8, 3, 5], p=[0.25, 0.3, 0.25, 0.12, 0.04, 0.04]))
    total = min(total, max_symbols)
    n_pre = int(rng.integers(0, min(2, total) + 1))
    n_suf = int(rng.integers(0, min(2, total - n_pre) + 1))
    n_core = total - n_pre - n_suf

    def kind_of() -> str:
        if algebra == "mixed":
            return str(rng.choice(["real", "detector"]))
        return algebra

    def ladder(dagger: bool):
        k = kind_of()
        if k == "detector":
            return Sigma(dagger)
        mode = modes[int(rng.integers(len(modes)))]
        if k == "real":
            return Ladder("a", mode, dagger)
        species = str(rng.choice(["a", "b"]))
        spin = float(rng.choice(SPINS)) if k == "spinor" else None
        return Ladder(species, mode, dagger, spin)

    prefix = tuple(ladder(False) for _ in range(n_pre))
    suffix = tuple(ladder(True) for _ in range(n_suf))

    core_syms: list = []
    for _ in range(n_core):
        k = kind_of()
        if k == "detector":
            core_syms.append(("mu", None))
        elif k == "real":
            core_syms.append(("phi", False))
        elif k == "complex":
            core_syms.append(("phi", bool(rng.integers(2))))
        else:
            core_syms.append(("psi", bool(rng.integers(2))))

    # spinor indices: fixed components, plus at most one shared label
    spinor_pos = [i for i, (t, _) in enumerate(core_syms) if t == "psi"]
    index = {i: int(rng.integers(4)) for i in spinor_pos}
    if len(spinor_pos) >= 2 and rng.random() < 0.5:
        a, b = rng.choice(spinor_pos, size=2, replace=False)
        index[int(a)] = index[int(b)] = "A"

    groups: list[Group] = []
    points: dict = {}
    times = rng.permutation(np.linspace(-2.0, 2.0, 9))[: max(1, n_core)] + rng.uniform(-0.05, 0.05)
    i = u = 0
    while i < n_core:
        size = 2 if (i + 1 < n_core and rng.random() < 0.35) else 1
        name = f"x{u}"
        points[name] = (float(times[u]), rng.uniform(-1, 1, size=n))
        syms = []
        for j in range(i, i + size):
            t, flag = core_syms[j]
            if t == "mu":
                syms.append(Monopole(name))
            elif t == "phi":
                syms.append(ScalarField(name, flag))
            else:
                syms.append(SpinorField(name, flag, index[j]))
        groups.append(Group(tuple(syms), size == 2))
        i += size
        u += 1

    fields = {"f": FieldSetup(field, tuple(modes))} if field is not None else {}
    cfg = WickConfig(fields, {"d": float(rng.uniform(0.5, 2.0))}, points)
    return SuiteCase(Word(prefix, tuple(groups), suffix), cfg, algebra)


@dataclass
class SuiteRow:
    word: str
    algebra: str
    contractions: int
    wick: complex
    oracle: complex
    abs_diff: float
    passed: bool


def compare_case(case: SuiteCase, rtol: float = 1e-10, atol: float = 1e-13) -> SuiteRow:
    kinds = {fid: st.field.kind for fid, st in case.config.fields.items()}
    w = evaluate_vev(case.word, case.config, kinds)
    o = word_vev(None, case.word, case.config)
    diff = abs(w - o)
    ok = diff <= rtol * max(abs(w), abs(o)) + atol
    n = len(enumerate_full_contractions(case.word, case.config, kinds))
    return SuiteRow(format_word(case.word), case.algebra, n, w, o, diff, bool(ok))


def run_suite(count: int = 500, seed: int = 20240611, max_symbols: int = 8,
              rtol: float = 1e-10, atol: float = 1e-13) -> list[SuiteRow]:
    """Deterministic randomized suite; every algebra appears in turn."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(count):
        case = random_case(rng, ALGEBRAS[i % len(ALGEBRAS)], max_symbols)
        rows.append(compare_case(case, rtol, atol))
    return rows
