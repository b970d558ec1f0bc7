"""Run every shipped config and print a one-line status per experiment."""

import argparse
import sys
from pathlib import Path

from gptshape.cli import main

CONFIGS = Path(__file__).resolve().parent / "configs"


def run_all(output_root: str) -> int:
    worst = 0
    for cfg in sorted(CONFIGS.glob("*.toml")):
        code = main(["run", str(cfg), "--output-root", output_root])
        print(f"[{'ok' if code == 0 else 'check failed' if code == 2 else 'error'}] {cfg.stem}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output-root", default="runs")
    sys.exit(run_all(parser.parse_args().output_root))
