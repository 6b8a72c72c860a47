"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 required convergence not met
(or an oracle comparison above tolerance).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Sequence

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .errors import CavityDetError, ConfigError, MalformedWord, ModelMismatch, OpenSpinorIndex
from .feynman import ExternalState, Quantum, describe, enumerate_diagrams, first_order_probability, vacuum_loop
from .fock import evolve, oracle_space, word_vev
from .lattice import FieldKind
from .profiles import GaussianProfile
from .response import cutoff_schedule, vep, vep_unrenormalized_tadpole
from .series import Converged, build_series, convergence_diagnose
from .suite import run_suite
from .wick import FieldSetup, WickConfig, enumerate_full_contractions, evaluate_vev, format_word, parse_word

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class NotConverged(Exception):
    pass


# ---------------------------------------------------------------- output


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.floating,)):
        v = float(v)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def render(rows: list[dict], fmt: str, meta: dict | None = None) -> str:
    if fmt == "json":
        return json.dumps(_jsonable({"meta": meta or {}, "rows": rows}), indent=2, sort_keys=False) + "\n"
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(rows[0].keys()))
    for r in rows:
        w.writerow([_fmt(v) for v in r.values()])
    return buf.getvalue()


def emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def _series_rows(series, timing: bool) -> list[dict]:
    rows = series.rows()
    if not timing:
        for r in rows:
            r["wall_time_s"] = None
    return rows


def _verdict_meta(v) -> dict:
    if v is None:
        return {}
    out = {"verdict": v.name}
    for k in ("value", "abs_err", "slope", "tail_bound"):
        if hasattr(v, k):
            out[k] = getattr(v, k)
    return out


def cmd_vep(cfg: RunConfig, args) -> tuple[list[dict], dict]:
    field, det = cfg.require_field(), cfg.detector
    vc = cfg.vep
    tol = args.tol if args.tol is not None else vc.tol
    cut = vc.cutoffs if isinstance(vc.cutoffs, int) else list(vc.cutoffs)
    breakdown, series = vep(field, det, cut, tol, args.threads, vc.renormalized)
    if not vc.renormalized and det.model != 1:
        tad = vep_unrenormalized_tadpole(field, det, cut, tol)
        vals = [a + b for a, b in zip(series.values, tad.values)]
        tails = [a + b for a, b in zip(series.tail_bounds, tad.tail_bounds)]
        series = build_series(series.cutoffs, vals, tails, tol, series.wall_times, series.remainders or None)
    meta = {"command": "vep", "model": det.model, "renormalized": vc.renormalized,
            "pair_creation_term": breakdown.pair_creation_term, "tadpole_term": breakdown.tadpole_term,
            **_verdict_meta(series.verdict)}
    if vc.require_convergence and not isinstance(series.verdict, Converged):
        raise NotConverged(_emit_then(cfg, args, _series_rows(series, cfg.output.timing), meta))
    return _series_rows(series, cfg.output.timing), meta


def _emit_then(cfg, args, rows, meta):
    fmt = args.format or cfg.output.format or "csv"
    emit(render(rows, "csv" if fmt == "text" else fmt, meta), args.out or cfg.output.path)
    return f"verdict {meta.get('verdict')} where convergence was required"


def cmd_vnrp(cfg: RunConfig, args) -> tuple[list[dict], dict]:
    field, det = cfg.require_field(), cfg.detector
    vc = cfg.vnrp
    cuts = cutoff_schedule(vc.cutoffs)
    rows = []
    for c in cuts:
        t0 = time.perf_counter()
        a2 = vacuum_loop(det.model, field, det, cutoff=c, method=vc.method, nodes=vc.nodes)
        p1 = first_order_probability(det.model, field, det, cutoff=c)
        rows.append({"cutoff": c, "vnrp": 1 + 2 * a2.real, "vep_first_order": p1,
                     "a2_real": a2.real, "a2_imag": a2.imag, "unitarity_residual": abs(p1 + 2 * a2.real),
                     "wall_time_s": time.perf_counter() - t0 if cfg.output.timing else None})
    meta = {"command": "vnrp", "model": det.model}
    if len(cuts) >= 4:
        v = convergence_diagnose(cuts, [1 - r["vnrp"] for r in rows], None, args.tol or 1e-10)
        meta.update(_verdict_meta(v))
    return rows, meta


def _wick_config(cfg: RunConfig) -> WickConfig:
    wc = cfg.wick
    fields = {}
    if cfg.field is not None:
        modes = [tuple(m) if isinstance(m, list) else (m,) for m in wc.modes]
        fields["f"] = FieldSetup(cfg.field, tuple(modes))
    points = {}
    for name, val in wc.points.items():
        if not (isinstance(val, list) and len(val) == 2):
            raise ConfigError(f"wick.points.{name}: expected [t, [x...]]")
        points[name] = (float(val[0]), np.atleast_1d(np.asarray(val[1], dtype=float)))
    dets = {did: d.Omega for did, d in cfg.detectors.items()} or {"d": wc.Omega}
    return WickConfig(fields, dets, points)


def cmd_wick(cfg: RunConfig, args) -> tuple[list[dict], dict]:
    wcfg = _wick_config(cfg)
    if not cfg.wick.words:
        raise ConfigError("wick.words: give at least one word")
    kinds = {fid: st.field.kind for fid, st in wcfg.fields.items()}
    rows = []
    for i, text in enumerate(cfg.wick.words):
        try:
            word = parse_word(text)
        except MalformedWord as e:
            raise ConfigError(f"wick.words[{i}]: {e}") from None
        val = evaluate_vev(word, wcfg, kinds)
        row = {"word": format_word(word), "contractions": len(enumerate_full_contractions(word, wcfg, kinds)),
               "value_real": val.real, "value_imag": val.imag}
        if cfg.wick.oracle:
            o = word_vev(None, word, wcfg)
            row.update({"oracle_real": o.real, "oracle_imag": o.imag, "abs_diff": abs(val - o)})
        rows.append(row)
    return rows, {"command": "wick"}


def _state(d: dict, path: str, model: int) -> ExternalState:
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: expected a mapping")
    for k in d:
        if k not in ("detectors", "quanta"):
            raise ConfigError(f"{path}.{k}: unknown key (allowed: detectors, quanta)")
    dets = d.get("detectors", {"d": "g"})
    quanta = []
    for j, q in enumerate(d.get("quanta", [])):
        if not isinstance(q, dict) or "mode" not in q:
            raise ConfigError(f"{path}.quanta[{j}]: expected a mapping with a mode")
        for k in q:
            if k not in ("mode", "antiparticle", "spin"):
                raise ConfigError(f"{path}.quanta[{j}].{k}: unknown key (allowed: antiparticle, mode, spin)")
        mode = q["mode"] if isinstance(q["mode"], list) else [q["mode"]]
        quanta.append(Quantum(tuple(mode), bool(q.get("antiparticle", False)), q.get("spin")))
    return ExternalState(dets, tuple(quanta))


def cmd_diagrams(cfg: RunConfig, args):
    dc = cfg.diagrams
    model = dc.model or (cfg.detector.model if cfg.detectors else None)
    if model is None:
        raise ConfigError("diagrams.model: required")
    ins = _state(dc.in_state or {}, "diagrams.in", model)
    outs = _state(dc.out_state or {}, "diagrams.out", model)
    diags = enumerate_diagrams(model, dc.order, ins, outs)
    rows = [{"diagram": i + 1, "vertices": " ".join(d.vertices), "edges": len(d.edges),
             "symmetry_factor": d.symmetry_factor, "sign": d.sign} for i, d in enumerate(diags)]
    meta = {"command": "diagrams", "model": model, "order": dc.order, "count": len(diags),
            "contractions": sum(d.symmetry_factor for d in diags), "text": describe(diags)}
    return rows, meta


def cmd_oracle(cfg: RunConfig, args):
    oc = cfg.oracle
    mode = args.mode or oc.mode
    if mode == "compare":
        tol = args.tol if args.tol is not None else 1e-10
        rows = []
        for r in run_suite(oc.count, oc.seed, oc.max_symbols, rtol=tol):
            rows.append({"word": r.word, "algebra": r.algebra, "contractions": r.contractions,
                         "wick_real": r.wick.real, "wick_imag": r.wick.imag, "oracle_real": r.oracle.real,
                         "oracle_imag": r.oracle.imag, "abs_diff": r.abs_diff, "pass": r.passed})
        failed = sum(not r["pass"] for r in rows)
        meta = {"command": "oracle compare", "words": len(rows), "failed": failed,
                "max_abs_diff": max((r["abs_diff"] for r in rows), default=0.0)}
        sys.stderr.write(f"oracle compare: {len(rows)} words, {failed} failed, "
                         f"max |diff| {meta['max_abs_diff']:.3e}\n")
        if failed:
            raise NotConverged(_emit_then(cfg, args, rows, meta))
        return rows, meta
    field, det = cfg.require_field(), cfg.detector
    if det.model != 1 and field.kind is not FieldKind.REAL and not oc.modes:
        raise ConfigError("oracle.modes: required for this field")
    modes = [tuple(m) if isinstance(m, list) else (m,) for m in (oc.modes or [[1], [-1], [2], [-2]])]
    st = FieldSetup(field, tuple(modes))
    space = oracle_space(st, cap=oc.cap)
    rows = []
    for lam in oc.lams:
        d = replace(det, lam=float(lam))
        res = evolve(space, d, st, steps=oc.steps, method=oc.method)
        pert = first_order_probability(d.model, field, d, setup=st)
        rows.append({"lam": float(lam), "p_excite": res.p_excite, "p_perturbative": pert,
                     "ratio": res.p_excite / pert if pert else float("nan"), "unitarity_defect": res.unitarity_defect,
                     "steps": res.steps, "halving_change": res.halving_change, "converged": res.converged})
    return rows, {"command": "oracle evolve", "dim": space.dim}


def _apply_axis(cfg: RunConfig, axis: str, value: float):
    field, det = cfg.require_field(), cfg.detector
    if axis == "T":
        det = replace(det, switching=replace(det.switching, T=value))
    elif axis == "sigma":
        if not isinstance(det.profile, GaussianProfile):
            raise ConfigError("sweep.axis: sigma needs a gaussian profile")
        det = replace(det, profile=replace(det.profile, sigma=value))
    elif axis == "Omega":
        det = replace(det, Omega=value)
    elif axis == "lam":
        det = replace(det, lam=value)
    elif axis == "L":
        field = replace(field, L=value)
    elif axis == "m":
        field = replace(field, m=value)
    det.check(field)
    return field, det


def _monotone(vals: Sequence[float]) -> str:
    d = np.diff(vals)
    if np.all(d < 0):
        return "decreasing"
    if np.all(d > 0):
        return "increasing"
    return "non-monotone"


def cmd_sweep(cfg: RunConfig, args):
    sc = cfg.sweep
    if not sc.grid:
        raise ConfigError("sweep.grid: give at least one value")
    tol = args.tol if args.tol is not None else sc.tol
    cut = sc.cutoffs if isinstance(sc.cutoffs, int) else list(sc.cutoffs)
    points = [_apply_axis(cfg, sc.axis, float(v)) for v in sc.grid]

    def one(fd):
        _, s = vep(fd[0], fd[1], cut, tol, 1)
        return s

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(one, points))
    else:
        results = [one(p) for p in points]
    rows = []
    for v, s in zip(sc.grid, results):
        rows.append({sc.axis: float(v), "value": s.value, "tail_bound": s.tail_bounds[-1],
                     "verdict": s.verdict.name if s.verdict else ""})
    vals = [r["value"] for r in rows]
    meta = {"command": "sweep", "axis": sc.axis, "monotonicity": _monotone(vals) if len(vals) > 1 else "n/a"}
    if sc.axis == "lam" and len(vals) > 1 and all(x > 0 for x in vals):
        slope = np.polyfit(np.log([float(v) for v in sc.grid]), np.log(vals), 1)[0]
        meta["lam_exponent"] = float(slope)
    return rows, meta


COMMANDS = {"vep": cmd_vep, "vnrp": cmd_vnrp, "wick": cmd_wick, "diagrams": cmd_diagrams,
            "oracle": cmd_oracle, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cavitydet", description="Detector responses in a periodic cavity.")
    p.add_argument("--version", action="version", version=f"cavitydet {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        if name == "oracle":
            sp.add_argument("mode", nargs="?", choices=("compare", "evolve"))
        sp.add_argument("--config", required=name not in ("oracle",), help="YAML run configuration")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json", "text"))
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--tol", type=float)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads: must be >= 1")
        cfg = load_config(args.config) if args.config else RunConfig(None, {})
        rows, meta = COMMANDS[args.command](cfg, args)
        fmt = args.format or cfg.output.format or ("text" if args.command == "diagrams" else "csv")
        if args.command == "diagrams" and fmt == "text":
            text = meta["text"]
        else:
            if fmt == "text":
                fmt = "csv"
            if args.command == "diagrams" and fmt == "csv":
                meta.pop("text")
            text = render(rows, fmt, meta)
        emit(text, args.out or cfg.output.path)
        if "verdict" in meta and args.command == "vep":
            sys.stderr.write(f"verdict: {meta['verdict']}\n")
        return EXIT_OK
    except NotConverged as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_NUMERIC
    except (ConfigError, ModelMismatch, MalformedWord, OpenSpinorIndex) as e:
        sys.stderr.write(f"config error: {e}\n")
        return EXIT_CONFIG
    except CavityDetError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_CONFIG


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
