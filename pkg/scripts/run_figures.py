"""Regenerate every scenario (spectra, interferograms, profiles, metrics) into one output directory.

    python scripts/run_figures.py [--out figures] [--jobs N] [--config run.toml]
"""
import argparse
import sys

from spdcdesign.cli import main as cli_main
from spdcdesign.scenarios import SCENARIOS


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="figures")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--config")
    args = p.parse_args(argv)
    common = ["--output-dir", args.out] + (["--config", args.config] if args.config else [])
    status = cli_main(["run-scenario", "all", "--jobs", str(args.jobs)] + common)
    for name in SCENARIOS:
        sub = ["--output-dir", f"{args.out}/{name}"] + (["--config", args.config] if args.config else [])
        status = status or cli_main(["export-profile", "--profile", name] + sub)
    return status


if __name__ == "__main__":
    sys.exit(main())
