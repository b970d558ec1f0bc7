"""Command line driver: ``gptshape run|list|export-curve``.

Outputs go to ``$GPTSHAPE_OUTPUT_ROOT/<output_dir>`` (root defaults to
``./runs``).  Exit codes: 0 all checks passed, 2 a check failed, 1 error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import EXPERIMENTS, ConfigError, ExperimentConfig, load_config
from .experiments import RUNNERS, Timer
from .geometry import CurveError, make_shape
from .potentials import ConditioningError, ContractError

OUTPUT_ROOT_ENV = "GPTSHAPE_OUTPUT_ROOT"

log = logging.getLogger("gptshape")


def build_id() -> str:
    """Package version plus a digest of the installed sources."""
    digest = hashlib.sha1()
    for path in sorted(Path(__file__).parent.glob("*.py")):
        digest.update(path.read_bytes())
    return f"{__version__}+{digest.hexdigest()[:12]}"


def output_dir(cfg: ExperimentConfig, override: str | None = None) -> Path:
    root = Path(override or os.environ.get(OUTPUT_ROOT_ENV, "runs"))
    out = root / cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def run(config_path, output_root: str | None = None) -> int:
    cfg = load_config(config_path)
    out = output_dir(cfg, output_root)
    timer = Timer()
    results, checks = RUNNERS[cfg.experiment](cfg, out, timer)
    passed = all(c["passed"] for c in checks.values())
    report = {
        "experiment": cfg.experiment,
        "config": cfg.echo(),
        "build": build_id(),
        "seed": cfg.seed,
        "timings_s": timer.stages,
        "results": results,
        "checks": checks,
        "passed": passed,
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, default=str), encoding="utf-8")
    for name, c in checks.items():
        print(f"{'PASS' if c['passed'] else 'FAIL'} {name}")
    print(f"report written to {out / 'report.json'}")
    return 0 if passed else 2


def list_experiments() -> str:
    width = max(map(len, EXPERIMENTS))
    return "\n".join(f"{k:<{width}}  {doc}" for k, doc in EXPERIMENTS.items())


def export_curve(config_path, dest: str | None = None) -> Path:
    cfg = load_config(config_path)
    curve = make_shape(cfg.shape, cfg.n)
    path = Path(dest) if dest else output_dir(cfg) / "curve.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    curve.to_csv(path)
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gptshape", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiment described by a TOML config")
    p_run.add_argument("config")
    p_run.add_argument("--output-root", help=f"overrides ${OUTPUT_ROOT_ENV}")
    sub.add_parser("list", help="list experiment kinds")
    p_exp = sub.add_parser("export-curve", help="write the configured curve as CSV")
    p_exp.add_argument("config")
    p_exp.add_argument("-o", "--out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "list":
            print(list_experiments())
            return 0
        if args.command == "export-curve":
            print(export_curve(args.config, args.out))
            return 0
        return run(args.config, args.output_root)
    except (ConfigError, ContractError, ConditioningError, CurveError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
