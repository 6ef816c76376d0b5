#!/usr/bin/env python3
"""Desk-scale benchmark sweep: every reorder variant on a chosen benchmark.

Boolean benchmarks run to solution (safety-capped); regression benchmarks
run against a reduced iteration budget so the sweep stays interactive.
Summary rows print per variant, and a combined analysis is written at the
end.

Usage: python scripts/desk_benchmark_suite.py [benchmark] [outdir] [seed_spec]
"""

import sys

from cgp_reorder.benchmarks import benchmark_kind
from cgp_reorder.cli import main

# desk-scale node counts per benchmark (kept small on purpose)
NODES = {
    "parity3": 200,
    "encode16_4": 200,
    "decode4_16": 300,
    "multiply3": 350,
    "nguyen7": 250,
    "koza3": 100,
    "pagie1": 350,
    "keijzer6": 50,
}

VARIANTS = ("none", "original", "equidistant", "uniform", "negbias", "leftskew")


def run(benchmark: str = "parity3", outdir: str | None = None, seeds: str = "0..24") -> int:
    outdir = outdir or f"runs/suite_{benchmark}"
    nodes = NODES.get(benchmark, 200)
    budget = ["--max-iterations", "20000"] if benchmark_kind(benchmark) == "regression" else []
    for variant in VARIANTS:
        gate = ["--p-reorder", "0.5"] if variant in ("negbias", "leftskew") else []
        code = main(
            [
                "run",
                "--bench", benchmark,
                "--variant", variant,
                "--nodes", str(nodes),
                "--seeds", seeds,
                "--out", f"{outdir}/{variant}",
                *budget,
                *gate,
            ]
        )
        if code != 0:
            return code
    return main(["analyze", outdir, "--out", f"{outdir}/analysis"])


if __name__ == "__main__":
    sys.exit(run(*sys.argv[1:4]))
