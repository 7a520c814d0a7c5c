"""Regenerate every CSV behind the figures into one output directory.

    python3 scripts/reproduce_figures.py --out results --workers 4
"""
import argparse
import sys
from pathlib import Path

from macrb.cli import main

HERE = Path(__file__).resolve().parent


def steps(out: Path, workers: int):
    common = ["--config", str(HERE / "default.ini"), "--workers", str(workers)]
    for name, region in (("p1", "0:20:10"), ("p2", "-10:30:10")):
        d = str(out / name)
        yield ["crb-map", *common, "--region", region, "--out", d]
        yield ["scc-profile", *common, "--region", region, "--out", d,
               "--apv", "maxvar", "--apv", "ufa", "--apv", "uhw", "--apv", "opt:0:20:10", "--apv", "opt:-10:30:10"]
        yield ["crb-profile", *common, "--region", region, "--out", d,
               "--apv", "maxvar", "--apv", "ufa", "--apv", "uhw", "--apv", "opt:0:20:10", "--apv", "opt:-10:30:10"]
    yield ["sweep", *common, "--out", str(out / "sweep")]
    yield ["simulate", *common, "--out", str(out / "simulate"), "--apv", "maxvar", "--apv", "ufa"]


def run():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    status = 0
    for argv in steps(Path(args.out), args.workers):
        print("macrb " + " ".join(argv), flush=True)
        status = max(status, main(argv))
    return status


if __name__ == "__main__":
    sys.exit(run())
