"""Command-line entry point: ``dissipative-lattice {run,sweep,steady,validate,recipe}``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .evolve import BACKENDS
from .runner.config import ConfigError, RunConfig, _anisotropy, parse_config
from .runner.emit import emit
from .runner.recipes import RECIPES, recipe_config
from .runner.sweep import RunPointError, SweepResult, run_point, run_sweep
from .runner.validate import ORACLES, validate

logger = logging.getLogger("dissipative_lattice")


def _load_config(args) -> RunConfig:
    cfg = parse_config(Path(args.config).read_text()) if args.config else RunConfig()
    changes = {}
    if getattr(args, "backend", None):
        changes["backend"] = args.backend
    if getattr(args, "out", None):
        changes["output_dir"] = args.out
    if getattr(args, "format", None):
        changes["output_format"] = args.format
    return replace(cfg, **changes)


def _progress(r):
    status = "ok" if r.ok else f"FAILED {r.error or 'CPTP check'}"
    logger.info("%s: %s (%.1fs)", r.point.label, status, r.elapsed)


def _finish(cfg: RunConfig, result: SweepResult) -> int:
    files = emit(result, cfg.output_dir, cfg.output_format)
    print(f"wrote {len(files)} files to {cfg.output_dir}")
    if result.failures:
        for r in result.failures:
            print(f"failed: {r.point.label}: {r.error or 'CPTP assertions violated'}",
                  file=sys.stderr)
        return 1
    return 0


def cmd_run(args) -> int:
    cfg = _load_config(args)
    point = cfg.sweep_points()[0]
    overrides = {k: getattr(args, k) for k in ("B1", "B2", "nbar", "initial_state")
                 if getattr(args, k) is not None}
    if args.anisotropy:
        label, g, d = _anisotropy(args.anisotropy)
        overrides.update(anisotropy=label, gamma=g, delta=d)
    point = replace(point, **overrides)
    cfg = replace(cfg, points=(point,))
    result = SweepResult(cfg, metadata={"config_hash": cfg.hash(), "version": __version__,
                                        "n_points": 1})
    try:
        r = run_point(cfg, point, keep_states=False)
    except RunPointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    result.points[point.key] = r
    result.metadata["failed"] = [x.point.label for x in result.failures]
    return _finish(cfg, result)


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    return _finish(cfg, run_sweep(cfg, threads=args.threads, progress=_progress))


def cmd_steady(args) -> int:
    cfg = replace(_load_config(args), backend="steady-only")
    return _finish(cfg, run_sweep(cfg, threads=args.threads, progress=_progress))


def cmd_validate(args) -> int:
    return validate(args.only or None)


def cmd_recipe(args) -> int:
    if args.list or not args.name:
        for name, r in RECIPES.items():
            print(f"{name:6s} {r.description}")
        return 0
    base = _load_config(args)
    cfg = recipe_config(args.name, base)
    if not args.out:
        cfg = replace(cfg, output_dir=str(Path(base.output_dir) / cfg.name))
    return _finish(cfg, run_sweep(cfg, threads=args.threads, progress=_progress))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dissipative-lattice",
                                description="Lindblad dynamics of a dissipative spin lattice.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress per point")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, threads=True):
        sp.add_argument("--config", help="YAML run configuration (defaults if omitted)")
        sp.add_argument("--out", help="output directory (overrides output.dir)")
        sp.add_argument("--backend", choices=BACKENDS)
        sp.add_argument("--format", choices=("csv", "json"))
        if threads:
            sp.add_argument("--threads", type=int, default=1,
                            help="worker processes for sweep points")

    run = sub.add_parser("run", help="single parameter point (first point of the config)")
    common(run, threads=False)
    run.add_argument("--anisotropy", choices=sorted(_presets()))
    run.add_argument("--B1", type=float)
    run.add_argument("--B2", type=float)
    run.add_argument("--nbar", type=float)
    run.add_argument("--initial-state", dest="initial_state",
                     choices=("separable", "w_state", "max_entangled"))
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="full Cartesian grid of the config")
    common(sweep)
    sweep.set_defaults(func=cmd_sweep)

    steady = sub.add_parser("steady", help="steady states only, no trajectories")
    common(steady)
    steady.set_defaults(func=cmd_steady)

    val = sub.add_parser("validate", help="run the oracle suite")
    val.add_argument("--only", action="append", choices=sorted(ORACLES),
                     help="run just this oracle (repeatable)")
    val.set_defaults(func=cmd_validate)

    rec = sub.add_parser("recipe", help="parameter grid of one figure recipe (fig2 to fig23)")
    rec.add_argument("name", nargs="?", choices=sorted(RECIPES, key=lambda s: int(s[3:])),
                     metavar="figN")
    rec.add_argument("--list", action="store_true", help="list the recipes")
    common(rec)
    rec.set_defaults(func=cmd_recipe)
    return p


def _presets():
    from .spin_ops import ANISOTROPY_PRESETS
    return ANISOTROPY_PRESETS


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
