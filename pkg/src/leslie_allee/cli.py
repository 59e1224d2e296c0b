"""Command-line entry point.

Each mode writes its artifacts into one output directory: JSON (shortest
round-trip floats, sorted keys), CSV (17 significant digits, LF line
endings), aligned text and SVG figures.  The output directory is taken
from ``--out``, else ``$LESLIE_ALLEE_OUT``, else the configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bifurcation import diagram
from .config import FORMATS, MODES, Numerics, Output, RunConfig, parse_range, preset, presets
from .crosscheck import theorem_crosscheck
from .dynamics import (
    BracketError,
    NoReturn,
    SectionMiss,
    basin_grid,
    center_manifold_probe,
    cycle_anchor,
    find_cycle,
    heteroclinic_event,
    integrate,
    manifold,
    verify_bounds,
)
from .equilibria import center_manifold_coeffs, equilibria_all
from .model import OriginalParams, PhaseState, ScaledParams, theta_bound

ENV_OUT = "LESLIE_ALLEE_OUT"
EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_COMPUTE = 0, 1, 2, 3


class ComputeError(RuntimeError):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


# ---------------------------------------------------------------------------
# serialization


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [_clean(float(x.real)), _clean(float(x.imag))]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _e(x: float) -> str:
    return f"{x:.16e}"


def record_dict(e) -> dict:
    return {
        "name": e.name,
        "kind": e.kind,
        "u": e.location.u,
        "v": e.location.v,
        "label": e.label,
        "eigenvalues": list(e.eigenvalues),
        "det": e.det,
        "trace": e.trace,
        "multiplicity": e.multiplicity,
        "theorem": e.theorem_tag,
    }


def equilibria_table(recs) -> str:
    head = f"{'name':<6} {'u':>22} {'v':>22} {'label':<16} {'det':>24} {'trace':>24}"
    rows = [head]
    for e in recs:
        rows.append(
            f"{e.name:<6} {e.location.u:>22.15g} {e.location.v:>22.15g} {e.label:<16} "
            f"{e.det:>24.15e} {e.trace:>24.15e}"
        )
    return "\n".join(rows) + "\n"


def cycle_dict(c) -> dict:
    return {
        "anchor": c.anchor,
        "offset": c.offset,
        "period": c.period,
        "floquet": c.floquet,
        "floquet_divergence": c.floquet_div,
        "stability": c.stability,
        "encloses": list(c.enclosed),
        "points": c.points,
    }


def curves_csv(d) -> str:
    rows = ["kind,Q,S,u_star,v_star"]
    for c in d.curves:
        for (q, s), m in zip(c.points, c.meta):
            rows.append(f"{c.kind},{_e(q)},{_e(s)},{_e(m.u)},{_e(m.v)}")
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# modes


class _Run:
    def __init__(self, cfg: RunConfig, out: Path):
        self.cfg = cfg
        self.sp = cfg.scaled
        self.out = out
        self.stem = f"{cfg.name}-{cfg.mode}" if cfg.name else cfg.mode
        self.written: list[str] = []

    def want(self, fmt: str) -> bool:
        return fmt in self.cfg.output.formats

    def put(self, suffix: str, text: str):
        p = _write(self.out / f"{self.stem}{suffix}", text)
        self.written.append(p.name)

    def svg(self, fn, *args, **kw):
        if self.want("svg"):
            p = fn(*args, path=self.out / f"{self.stem}.svg", **kw)
            self.written.append(p.name)

    def eqs(self):
        return equilibria_all(self.sp, self.cfg.numerics.tol)


def _mode_equilibria(r: _Run) -> dict:
    recs = r.eqs()
    summary = {"params": r.sp.__dict__, "equilibria": [record_dict(e) for e in recs]}
    if r.want("json"):
        r.put(".json", dumps(summary))
    if r.want("txt"):
        r.put(".txt", equilibria_table(recs))
    return summary


_STARTS = ((0.05, 0.05), (0.3, 0.05), (0.6, 0.05), (0.95, 0.05), (0.95, 0.5), (0.95, 1.0),
           (0.6, 1.2), (0.3, 1.2), (0.05, 1.0), (0.2, 0.6), (0.8, 0.5), (0.5, 0.9))


def _try_cycle(sp):
    try:
        return find_cycle(sp)
    except (BracketError, NoReturn, ValueError):
        return None


def _saddle_branches(sp, recs):
    out = []
    for e in recs:
        if e.label != "saddle":
            continue
        if e.kind == "positive":
            whiches = ("stable-left", "stable-right", "unstable-left", "unstable-right")
        elif e.kind == "prey-only-K":
            whiches = ("unstable-left",)
        else:
            continue
        for w in whiches:
            try:
                out.append(manifold(sp, e, w, arc_max=3.0))
            except ValueError:
                pass
    return out


def _mode_portrait(r: _Run) -> dict:
    from .plotting import phase_portrait

    sp = r.sp
    recs = r.eqs()
    t_max = min(r.cfg.numerics.t_max, 3e3)
    trs = [integrate(sp, PhaseState(*s), t_max=t_max, eqs=recs) for s in _STARTS]
    branches = _saddle_branches(sp, recs)
    cyc = _try_cycle(sp)
    summary = {
        "params": sp.__dict__,
        "equilibria": [record_dict(e) for e in recs],
        "trajectories": [{"start": list(s), "terminal": t.terminal} for s, t in zip(_STARTS, trs)],
        "manifolds": [{"saddle": b.saddle.name, "which": b.which, "terminal": b.terminal} for b in branches],
        "cycle": cycle_dict(c) if (c := cyc) else None,
    }
    if summary["cycle"]:
        summary["cycle"].pop("points")
    if r.want("json"):
        r.put(".json", dumps(summary))
    r.svg(phase_portrait, sp, eqs=recs, trajectories=trs, manifolds=branches,
          cycles=[cyc] if cyc else [], title=r.cfg.name or "")
    return summary


def _mode_cycle(r: _Run) -> dict:
    try:
        cyc = find_cycle(r.sp)
    except (BracketError, NoReturn) as exc:
        raise ComputeError("bracket-failure", str(exc)) from exc
    summary = {"params": r.sp.__dict__, "cycle": cycle_dict(cyc)}
    if r.want("json"):
        r.put(".json", dumps(summary))
    if r.want("csv"):
        rows = ["u,v"] + [f"{_e(u)},{_e(v)}" for u, v in cyc.points]
        r.put(".csv", "\n".join(rows) + "\n")
    return summary


def _mode_manifolds(r: _Run) -> dict:
    from .plotting import phase_portrait

    sp = r.sp
    recs = r.eqs()
    branches = _saddle_branches(sp, recs)
    summary = {
        "params": sp.__dict__,
        "branches": [
            {"saddle": b.saddle.name, "which": b.which, "terminal": b.terminal,
             "arclength": b.arclength, "polyline": b.polyline}
            for b in branches
        ],
    }
    if sp.strong and any(e.name == "P1" for e in recs):
        try:
            summary["heteroclinic_gap"] = heteroclinic_event(sp)
        except (SectionMiss, ValueError) as exc:
            summary["heteroclinic_gap"] = None
            summary["heteroclinic_note"] = str(exc)
    if r.want("json"):
        r.put(".json", dumps(summary))
    r.svg(phase_portrait, sp, eqs=recs, manifolds=branches, title=r.cfg.name or "")
    return summary


def _mode_basin(r: _Run) -> dict:
    from .plotting import basin_figure

    n = min(r.cfg.numerics.resolution, 200)
    bm = basin_grid(r.sp, shape=(n, n), t_max=min(r.cfg.numerics.t_max, 1e4))
    labels, counts = np.unique(bm.labels.astype(str), return_counts=True)
    summary = {
        "params": r.sp.__dict__,
        "u_range": bm.u_range,
        "v_range": bm.v_range,
        "shape": bm.shape,
        "counts": dict(zip(labels.tolist(), counts.tolist())),
        "labels": bm.labels.astype(str),
    }
    if r.want("json"):
        r.put(".json", dumps(summary))
    r.svg(basin_figure, bm, title=r.cfg.name or "")
    return summary


def _mode_diagram(r: _Run) -> dict:
    from .plotting import diagram_figure

    sp, num = r.sp, r.cfg.numerics
    qr = num.q_range or (0.01, 0.4)
    sr = num.s_range or (0.005, 0.4)
    d = diagram(sp.M, sp.A, sp.C, qr, sr, max(num.resolution, 16))
    summary = {
        "M": d.M, "A": d.A, "C": d.C,
        "q_range": d.q_range, "s_range": d.s_range, "resolution": d.resolution,
        "bt_points": [
            {"Q": b.Q, "S": b.S, "u": b.equilibrium.u, "v": b.equilibrium.v,
             "nilpotency_residual": b.nilpotency_residual,
             "relation_residual": b.relation_residual,
             "printed_relation_residual": b.printed_relation_residual, "case": b.case}
            for b in d.bt
        ],
        "curves": [{"kind": c.kind, "points": len(c), "gaps": list(c.gaps)} for c in d.curves],
        "regions": sorted(d.regions),
        "metadata": d.metadata,
    }
    if r.want("csv"):
        r.put(".csv", curves_csv(d))
    if r.want("json"):
        r.put(".json", dumps(summary))
    r.svg(diagram_figure, d, title=r.cfg.name or "")
    return summary


def _verify_starts(sp):
    return ((0.2, 0.3), (0.5, 0.5), (0.8, 0.2), (0.9, 1.0), (0.3, 2 * (1 + sp.C)))


def _mode_verify(r: _Run) -> dict:
    sp, tol = r.sp, r.cfg.numerics.tol
    recs = r.eqs()
    cc = theorem_crosscheck(sp, tol)
    bounds = theta_bound(sp)
    checks = []
    for s in _verify_starts(sp):
        tr = integrate(sp, PhaseState(*s), t_max=min(r.cfg.numerics.t_max, 5e3), eqs=recs)
        rep = verify_bounds(tr, bounds)
        checks.append({"start": list(s), "terminal": tr.terminal, "passed": rep.passed,
                       "max_u": rep.max_u, "max_v": rep.max_v, "max_w": rep.max_w})
    report = {
        "params": sp.__dict__,
        "tol": tol,
        "equilibria": [record_dict(e) for e in recs],
        "crosscheck": {
            "entries": [{**e.__dict__, "known": e.known} for e in cc.entries],
            "flagged": sorted(cc.flagged),
            "unexplained": [e.__dict__ for e in cc.unexplained],
        },
        "bounds": {"theta": bounds.theta, "trajectories": checks},
    }
    zc = next(e for e in recs if e.kind == "predator-only")
    if zc.label == "saddle-node":
        cm = center_manifold_coeffs(sp, tol=max(tol, 1e-10))
        probe = center_manifold_probe(sp, cm.reduced_flow)
        report["center_manifold"] = {
            "verdict": cm.verdict,
            "reduced_flow": list(cm.reduced_flow),
            "probe_ratio": probe["ratio"],
            "probe_monotone": probe["monotone"],
            "agrees": cm.verdict == "saddle-node" and abs(probe["ratio"] - 1) < 1e-2 and probe["monotone"],
        }
    cyc = None
    try:
        cycle_anchor(sp, recs)
        cyc = _try_cycle(sp)
    except BracketError:
        pass
    if cyc is not None:
        d = cycle_dict(cyc)
        d.pop("points")
        report["cycle"] = d
    else:
        report["cycle"] = None
    ok = cc.ok and all(c["passed"] for c in checks)
    if "center_manifold" in report:
        ok = ok and report["center_manifold"]["agrees"]
    report["passed"] = ok
    if r.want("json"):
        r.put(".json", dumps(report))
    if r.want("txt"):
        lines = [f"{e.name:<6} {e.label}" for e in recs]
        lines.append(f"crosscheck: {'ok' if cc.ok else 'UNEXPLAINED DISAGREEMENT'}; flagged {sorted(cc.flagged)}")
        lines.append(f"bounds: {'ok' if all(c['passed'] for c in checks) else 'FAILED'}")
        if cyc is not None:
            lines.append(f"cycle around {cyc.anchor}: {cyc.stability}, floquet {cyc.floquet:.6g}, period {cyc.period:.6g}")
        if "center_manifold" in report:
            cmr = report["center_manifold"]
            lines.append(f"(0,C) center manifold: {cmr['verdict']}, probe ratio {cmr['probe_ratio']:.6g}")
        lines.append("PASS" if ok else "FAIL")
        r.put(".txt", "\n".join(lines) + "\n")
    return report


_DISPATCH = {
    "equilibria": _mode_equilibria,
    "portrait": _mode_portrait,
    "cycle": _mode_cycle,
    "manifolds": _mode_manifolds,
    "basin": _mode_basin,
    "diagram": _mode_diagram,
    "verify": _mode_verify,
}


def run(cfg: RunConfig, out: Optional[Path] = None) -> tuple[int, dict]:
    """Execute one configuration; returns the exit status and the summary."""
    out = Path(out) if out is not None else Path(cfg.output.path)
    r = _Run(cfg, out)
    summary = _DISPATCH[cfg.mode](r)
    status = EXIT_OK
    if cfg.mode == "verify" and not summary["passed"]:
        status = EXIT_FAILED
    summary = {"mode": cfg.mode, "name": cfg.name, "written": r.written, **summary}
    return status, summary


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="leslie-allee",
        description="Equilibria, cycles, manifolds and bifurcation diagrams of the "
        "Leslie-Gower model with Allee effect and a generalist predator.",
    )
    ap.add_argument("--mode", choices=MODES)
    ap.add_argument("--preset", help="named parameter set (see --list-presets)")
    ap.add_argument("--config", type=Path, help="JSON run configuration")
    ap.add_argument("--param", action="append", default=[], metavar="K=V",
                    help="override one parameter (A,C,M,Q,S or r,K,q,a,s,n,m,c)")
    ap.add_argument("--q-range", type=parse_range, metavar="LO:HI")
    ap.add_argument("--s-range", type=parse_range, metavar="LO:HI")
    ap.add_argument("--res", type=int, metavar="N")
    ap.add_argument("--tol", type=float)
    ap.add_argument("--t-max", type=float)
    ap.add_argument("--out", type=Path, help=f"output directory (else ${ENV_OUT}, else config)")
    ap.add_argument("--format", action="append", metavar="FMT",
                    help=f"artifact formats, repeatable or comma separated: {','.join(FORMATS)}")
    ap.add_argument("--list-presets", action="store_true")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


_SCALED = {"A", "C", "M", "Q", "S"}
_ORIGINAL = {"r", "K", "q", "a", "s", "n", "m", "c"}


def _parse_params(items: Sequence[str]) -> dict[str, float]:
    out = {}
    for it in items:
        k, sep, v = it.partition("=")
        if not sep:
            raise ValueError(f"--param expects K=V, got {it!r}")
        out[k.strip()] = float(v)
    return out


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params = _parse_params(ns.param)
    if ns.preset and ns.config:
        raise ValueError("give either --preset or --config, not both")
    if ns.preset:
        cfg = preset(ns.preset)
    elif ns.config:
        cfg = RunConfig.from_json(ns.config.read_text())
    else:
        keys = set(params)
        if keys == _SCALED:
            p = ScaledParams(**params)
        elif keys == _ORIGINAL:
            p = OriginalParams(**params)
        else:
            raise ValueError("without --preset or --config, --param must give all of A,C,M,Q,S "
                             "or all of r,K,q,a,s,n,m,c")
        params = {}
        cfg = RunConfig(ns.mode or "equilibria", p)
    if params:
        cfg = cfg.with_params(**params)
    if ns.mode:
        cfg = replace(cfg, mode=ns.mode)
    num = {}
    if ns.q_range:
        num["q_range"] = ns.q_range
    if ns.s_range:
        num["s_range"] = ns.s_range
    if ns.res is not None:
        num["resolution"] = ns.res
    if ns.tol is not None:
        num["tol"] = ns.tol
    if ns.t_max is not None:
        num["t_max"] = ns.t_max
    if num:
        cfg = replace(cfg, numerics=replace(cfg.numerics, **num))
        Numerics(**cfg.numerics.__dict__)  # re-validate
    path = str(ns.out) if ns.out else os.environ.get(ENV_OUT) or cfg.output.path
    formats = cfg.output.formats
    if ns.format:
        formats = tuple(f.strip() for chunk in ns.format for f in chunk.split(",") if f.strip())
    return replace(cfg, output=Output(path=path, formats=formats))


def _error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": {"kind": kind, "message": message}}, sort_keys=True) + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    if ns.list_presets:
        for name, cfg in presets().items():
            print(f"{name:<10} {cfg.mode:<10} {json.dumps(cfg.to_dict()['params'], sort_keys=True)}")
        return EXIT_OK
    try:
        cfg = config_from_args(ns)
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        _error("invalid-config", str(exc).strip("'\""))
        return EXIT_CONFIG
    try:
        status, summary = run(cfg)
    except ComputeError as exc:
        _error(exc.kind, str(exc))
        return EXIT_COMPUTE
    except ValueError as exc:
        _error("invalid-config", str(exc))
        return EXIT_CONFIG
    print(json.dumps({"status": status, "mode": summary["mode"], "written": summary["written"]}, sort_keys=True))
    return status


if __name__ == "__main__":
    sys.exit(main())
