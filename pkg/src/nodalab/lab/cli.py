"""Command-line interface: ``nodalab <verb> ...``.

Exit status 0 means every assertion passed, 1 that some check failed and 2
a usage or domain error.  ``--json`` prints a structured report to stdout.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..caloric import SpaceTimePolynomial
from ..errors import NodalabError
from ..frequency import frequency_profile, metric_at
from ..nodal import FieldSlice, box_dimension, dyadic_scales, extract_nodal, stratify
from ..solver import PolynomialField, load_snapshot
from .config import default_config, load_config
from .experiments import _plain, run_custom, run_experiment, run_jobs, write_rows_csv
from .lemmas import run_lemma_suite

log = logging.getLogger("nodalab")

REPRODUCE = {
    "example1": "example1",
    "example2": "example2",
    "angenent": "angenent1d",
    "dimension": "dimension",
    "audit": "monotonicity_audit",
    "stratification": "stratification",
}


def _floats(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",") if v.strip()])


def _radii(text: str) -> np.ndarray:
    """``lo:hi:count`` (geometric) or a comma list."""
    if ":" in text:
        lo, hi, cnt = text.split(":")
        return np.geomspace(float(lo), float(hi), int(cnt))
    return _floats(text)


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=1, default=_plain))
    else:
        for line in lines:
            print(line)


def _load_field(path: str):
    p = Path(path)
    if p.suffix == ".json" and not p.with_suffix(".bin").exists():
        return PolynomialField(SpaceTimePolynomial.from_json(json.loads(p.read_text())))
    return load_snapshot(p)


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    cfg = load_config(args.config) if args.config else default_config("custom")
    if args.seed is not None:
        cfg = cfg.with_updates(seed=args.seed)
    res = run_custom(cfg, snapshot=args.out)
    res.metadata.pop("field", None)
    _emit(args, res.to_dict(), [f"solve {cfg.name} [{cfg.config_hash}] -> {', '.join(map(str, res.files))}"]
          + [f"  {c.name}: {c.value} ({'pass' if c.passed else 'FAIL'})" for c in res.checks])
    return 0 if res.passed else 1


def cmd_frequency(args) -> int:
    field = _load_field(args.field)
    center = (_floats(args.center), args.t0)
    R0 = args.R0
    if R0 is None:
        R0 = float("inf")
        if field.bbox is not None:
            box = np.asarray(field.bbox, dtype=float)
            _, A = metric_at(field, center[0], args.t0)
            gap = min(np.min(center[0] - box[:, 0]), np.min(box[:, 1] - center[0]))
            R0 = 0.999 * float(gap) / float(np.linalg.norm(A, 2))
    prof = frequency_profile(field, center, _radii(args.radii), R0=R0)
    if args.out:
        prof.to_csv(args.out, extra={"config_hash": args.tag} if args.tag else None)
    rows = list(prof.rows())
    lines = [f"{'r':>10} {'N':>12} {'D':>12} {'resid':>10}"]
    lines += [f"{r['r']:10.4g} {r['N']:12.6f} {r['D']:12.6f} {r['global_doubling_residual']:10.2e}" for r in rows]
    _emit(args, {"center": list(center[0]), "t0": args.t0, "rows": rows}, lines)
    return 0


def cmd_nodal(args) -> int:
    field = load_snapshot(args.snapshot)
    vals = field.slice_values(args.t)
    sl = extract_nodal(vals, field.axes, t=args.t, mask=field.mask)
    dim = None
    if not sl.empty and field.n > 1:
        try:
            dim = box_dimension(sl, _floats(args.scales) if args.scales else None).dimension
        except NodalabError as exc:
            log.warning("dimension not estimated: %s", exc)
    elif sl.empty:
        dim = float("-inf")
    if args.out:
        sl.to_csv(args.out)
    if args.summary:
        sl.write_summary(args.summary, dim)
    summary = sl.summary(dim)
    _emit(args, summary, [f"{k}: {v}" for k, v in summary.items()])
    return 0


def cmd_stratify(args) -> int:
    field = load_snapshot(args.snapshot)
    vals = field.slice_values(args.t)
    u = FieldSlice.from_grid(vals, field.axes)
    if args.on == "nodal":
        pts = np.unique(extract_nodal(vals, field.axes, t=args.t, mask=field.mask).points(), axis=0)
    else:
        mesh = np.stack(np.meshgrid(*[a[:: args.stride] for a in field.axes], indexing="ij"), axis=-1)
        pts = mesh.reshape(-1, field.n)
    h = max(float(a[1] - a[0]) for a in field.axes)
    radius = args.max_scale or 0.25 * min(float(a[-1] - a[0]) for a in field.axes)
    scales = dyadic_scales(h, radius)
    st = stratify(u, args.k, args.eta, scales, pts)
    rows = [{"x": " ".join(f"{v:.6g}" for v in p), "in_stratum": bool(s),
             "best_deviation": float(np.min(np.where(st.skipped[i], np.inf, st.deviations[i])))}
            for i, (p, s) in enumerate(zip(st.points, st.in_stratum))]
    if args.out:
        write_rows_csv(args.out, rows, args.tag or "")
    payload = {"k": args.k, "eta": args.eta, "scales": scales.tolist(), "points": len(pts), "count": st.count}
    _emit(args, payload, [f"{k}: {v}" for k, v in payload.items()])
    return 0


def cmd_reproduce(args) -> int:
    targets = list(REPRODUCE) if args.target == "all" else [args.target]
    cfgs = []
    for tgt in targets:
        if args.config:
            cfg = load_config(args.config)
        else:
            cfg = default_config(REPRODUCE[tgt])
        upd = {}
        if args.seed is not None:
            upd["seed"] = args.seed
        if args.out:
            upd["output_dir"] = str(args.out)
        cfgs.append(cfg.with_updates(**upd) if upd else cfg)
    if len(cfgs) == 1:
        res = run_experiment(cfgs[0])
        res.metadata.pop("field", None)
        reports = [res.to_dict()]
    else:
        reports = run_jobs(cfgs, workers=args.workers)
    lines = []
    for rep in reports:
        lines.append(f"{rep['name']} [{rep['config_hash']}]: {'PASS' if rep['passed'] else 'FAIL'} "
                     f"({rep['runtime']:.1f} s)")
        for c in rep["checks"]:
            lines.append(f"  {'pass' if c['passed'] else 'FAIL'}  {c['name']} = {c['value']}"
                         + (f"  [{c['detail']}]" if c["detail"] else ""))
    _emit(args, {"reports": reports}, lines)
    return 0 if all(r["passed"] for r in reports) else 1


def cmd_lemmas(args) -> int:
    rows = run_lemma_suite(seed=args.seed or 0, only=args.only, budget=args.budget)
    lines = [f"{'id':42s} {'result':>11s} {'tol':>9s} {'time':>7s}  status"]
    for r in rows:
        lines.append(f"{r.id:42s} {r.result:11.4g} {r.tolerance:9.3g} {r.runtime:6.2f}s  "
                     f"{'pass' if r.passed else 'FAIL'}" + (f"  {r.detail}" if not r.passed else ""))
    _emit(args, {"rows": [r.to_dict() for r in rows]}, lines)
    return 0 if all(r.passed for r in rows) else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed override")
    common.add_argument("--json", action="store_true", help="print a JSON report to stdout")
    common.add_argument("-v", "--verbose", action="count", default=0)

    ap = argparse.ArgumentParser(prog="nodalab", description=__doc__.splitlines()[0], parents=[common])
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("solve", parents=[common], help="run a configured solve and save a snapshot")
    p.add_argument("--config", help="TOML or JSON experiment configuration")
    p.add_argument("--out", help="snapshot path (.bin with .json sidecar)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("frequency", parents=[common], help="frequency / doubling profile at a centre")
    p.add_argument("field", help="snapshot (.bin) or caloric polynomial (.json)")
    p.add_argument("--center", required=True, help="comma-separated spatial centre")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--radii", default="0.05:0.5:10", help="lo:hi:count (geometric) or a comma list")
    p.add_argument("--R0", type=float, default=None,
                   help="localization radius (default: largest ball inside a gridded domain)")
    p.add_argument("--out", help="CSV output")
    p.add_argument("--tag", help="provenance tag added to every CSV row")
    p.set_defaults(func=cmd_frequency)

    p = sub.add_parser("nodal", parents=[common], help="extract the nodal set of a snapshot slice")
    p.add_argument("snapshot")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--scales", help="comma-separated box-counting scales")
    p.add_argument("--out", help="CSV of element vertices")
    p.add_argument("--summary", help="summary JSON path")
    p.set_defaults(func=cmd_nodal)

    p = sub.add_parser("stratify", parents=[common], help="classify points into S^k_eta")
    p.add_argument("snapshot")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--on", choices=["nodal", "grid"], default="nodal")
    p.add_argument("--stride", type=int, default=8, help="grid subsampling for --on grid")
    p.add_argument("--max-scale", type=float, default=None)
    p.add_argument("--out", help="CSV output")
    p.add_argument("--tag", help="provenance tag added to every CSV row")
    p.set_defaults(func=cmd_stratify)

    p = sub.add_parser("reproduce", parents=[common], help="run a reproduction experiment")
    p.add_argument("target", choices=list(REPRODUCE) + ["all"])
    p.add_argument("--config", help="override the built-in configuration")
    p.add_argument("--out", help="output directory for CSV and JSON reports")
    p.add_argument("--workers", type=int, default=1, help="parallel jobs for 'all'")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("lemmas", parents=[common], help="run the statement check suite")
    p.add_argument("--only", nargs="*", help="statement id prefixes")
    p.add_argument("--budget", type=float, default=300.0, help="wall-clock budget in seconds")
    p.set_defaults(func=cmd_lemmas)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return int(args.func(args))
    except (NodalabError, ValueError, OSError) as exc:
        print(f"nodalab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
