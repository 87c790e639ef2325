"""Command line front end: ``curvimg run|sweep|check [--unsafe] [--seeds N] [--only SUITE] CONFIG``."""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .checks import SUITES, run_suites
from .config import ConfigError, ExperimentConfig, load_config
from .iteration import classify_limit, iterate
from .output import (
    SnapshotRecorder,
    plot_functionals,
    plot_outlines,
    write_snapshot,
    write_summary,
    write_trace,
)

logger = logging.getLogger("curvimg")

EXIT_OK, EXIT_ERROR, EXIT_INCOMPLETE = 0, 1, 2
SWEEP_COLUMNS = ["run", "p", "phi", "status", "iterations", "residual", "volume",
                 "limit_shape", "anisotropy", "out_dir"]


def execute(cfg: ExperimentConfig, out_dir: Path, unsafe: bool = False) -> dict:
    """Run one single-valued config and write its artifacts into ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    run = cfg.build(unsafe=unsafe)
    recorder = SnapshotRecorder(run.max_iter)
    K, trace = iterate(run, recorder)

    write_trace(trace, out_dir / "trace.csv")
    snapshots = recorder.items()
    for step, body in snapshots:
        write_snapshot(body, out_dir / "snapshots", step)
    summary = trace.summary()
    summary["limit"] = classify_limit(K) if trace.status == "converged" else None
    summary["monotonicity"] = trace.monotonicity_violations() if trace.rows else None
    summary["config"] = {
        "dim": cfg.dim, "p": cfg.p[0], "phi": cfg.phi[0], "init": cfg.init,
        "grid": run.init.grid.size, "max_iter": cfg.max_iter, "seed": cfg.seed,
        "minimal_position": run.minimal_position,
    }
    write_summary(summary, out_dir / "summary.json")
    if trace.rows:
        plot_functionals(trace, out_dir / "functionals.svg")
        if cfg.dim == 2:
            plot_outlines(snapshots, out_dir / "outlines.svg")
    return summary


def _status_code(status: str) -> int:
    return {"converged": EXIT_OK, "max_iter": EXIT_INCOMPLETE}.get(status, EXIT_ERROR)


def cmd_run(path, unsafe: bool = False) -> int:
    try:
        cfg = load_config(path)
        if cfg.is_sweep:
            raise ConfigError("run needs a single p and phi; use sweep for lists")
        summary = execute(cfg, cfg.out_dir, unsafe)
    except ConfigError as err:
        print(f"{path}: {err}", file=sys.stderr)
        return EXIT_ERROR
    final = summary.get("final") or {}
    print(f"{summary['status']} after {summary['iterations']} iterations; "
          f"residual {final.get('residual', float('nan')):.3e}")
    if summary["error"]:
        print(summary["error"], file=sys.stderr)
    limit = summary.get("limit")
    if limit:
        print(f"limit shape: {limit['shape']} (anisotropy {limit['anisotropy']:.2e})")
    print(f"results in {cfg.out_dir}")
    return _status_code(summary["status"])


def _sweep_worker(args):
    index, cfg, unsafe = args
    out = cfg.out_dir / f"run_{index:03d}_{cfg.label()}"
    try:
        summary = execute(cfg, out, unsafe)
    except Exception as err:  # noqa: BLE001 - reported per run
        summary = {"status": "error", "error": f"{type(err).__name__}: {err}",
                   "iterations": 0, "final": None, "limit": None}
    return index, cfg.p[0], cfg.phi[0], out, summary


def _max_workers() -> int:
    cap = os.environ.get("CURVIMG_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            logger.warning("ignoring non-integer CURVIMG_THREADS=%r", cap)
    return n


def cmd_sweep(path, unsafe: bool = False) -> int:
    try:
        cfg = load_config(path)
    except ConfigError as err:
        print(f"{path}: {err}", file=sys.stderr)
        return EXIT_ERROR
    jobs = [(i, c, unsafe) for i, c in enumerate(cfg.combinations())]
    if not jobs:
        print("empty sweep", file=sys.stderr)
        return EXIT_ERROR
    workers = min(_max_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(j) for j in jobs]

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    all_ok = True
    with open(cfg.out_dir / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for index, p, phi, out, s in sorted(results, key=lambda r: r[0]):
            final = s.get("final") or {}
            limit = s.get("limit") or {}
            writer.writerow([index, p, phi if isinstance(phi, str) else phi.get("file"),
                             s["status"], s["iterations"], final.get("residual", ""),
                             final.get("volume", ""), limit.get("shape", ""),
                             limit.get("anisotropy", ""), out])
            all_ok &= s["status"] == "converged"
            print(f"run {index:3d}  p={p:+g}  {s['status']:9s}  {s.get('error') or ''}")
    print(f"aggregate in {cfg.out_dir / 'sweep.csv'}")
    return EXIT_OK if all_ok else EXIT_INCOMPLETE


def cmd_check(seeds: int = 10, only: str | None = None) -> int:
    try:
        results = run_suites(seeds, only)
    except KeyError as err:
        print(err.args[0], file=sys.stderr)
        return EXIT_ERROR
    width = max(len(r.name) for r in results)
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {mark}  worst={r.worst:.3e}  "
              f"limit={r.threshold:.0e}  {r.seconds:6.2f}s  {r.detail}")
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} suites passed")
    return EXIT_OK if passed == len(results) else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvimg", description="Curvature image iterations.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "run one configuration"),
                            ("sweep", "run the p/phi cross product of a configuration")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", type=Path)
        p.add_argument("--unsafe", action="store_true",
                       help="iterate even when no admissible case applies")
    p = sub.add_parser("check", help="run the seeded property suites")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--only", choices=sorted(SUITES), default=None)
    p.add_argument("--unsafe", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("config", nargs="?", type=Path, help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        return cmd_run(args.config, args.unsafe)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.unsafe)
    if args.seeds < 1:
        print("--seeds must be positive", file=sys.stderr)
        return EXIT_ERROR
    return cmd_check(args.seeds, args.only)


if __name__ == "__main__":
    sys.exit(main())
