#!/usr/bin/env python3
"""Full-scale backflow histogram over random pure orthogonal pairs.

Draws a large sample (default 10^5) of pure orthogonal state pairs of the
three-level system, evolves each under the oscillating-rate decay model,
and histograms the total trace-distance increase. The headline result: the
excited-state / ground-mixture reference pair beats every sampled pure
pair by a finite gap, so the best initial pair is not a pure pair.

Equivalent to `backflow histogram --samples 100000`, packaged as a script
for convenience. Expect a few minutes of runtime at full scale; set
BACKFLOW_THREADS to parallelize sampling (results are unaffected).
"""

import argparse
import sys
import time

import numpy as np

from backflow.cli import render_csv
from backflow.dynamics import lambda_map_coefficients, make_grid, sinusoidal_rates
from backflow.measure import histogram_backflow


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=100_000)
    parser.add_argument("--bins", type=int, default=50)
    parser.add_argument("--seed", type=int, default=20260809)
    parser.add_argument("--grid-steps", type=int, default=2000)
    parser.add_argument("--output", default="pure_pair_histogram.csv")
    args = parser.parse_args()

    coeffs = lambda_map_coefficients(sinusoidal_rates(), make_grid(2 * np.pi, args.grid_steps))
    start = time.perf_counter()
    hist = histogram_backflow(coeffs, args.samples, args.bins, args.seed)
    elapsed = time.perf_counter() - start

    rows = zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts, hist.probabilities)
    footer = [
        f"# max_sampled,{hist.max_sampled!r}",
        f"# reference_value,{hist.reference_value!r}",
        f"# n_samples,{hist.n_samples}",
        f"# seed,{hist.seed}",
    ]
    with open(args.output, "w", encoding="utf-8", newline="") as handle:
        handle.write(render_csv(["bin_left", "bin_right", "count", "probability"], rows, footer))

    print(f"samples            : {hist.n_samples}")
    print(f"max sampled (pure) : {hist.max_sampled:.7f}")
    print(f"mixed reference    : {hist.reference_value:.7f}")
    print(f"gap                : {hist.reference_value - hist.max_sampled:.7f}")
    print(f"elapsed            : {elapsed:.1f} s")
    print(f"histogram written  : {args.output}")
    return 0 if hist.max_sampled < hist.reference_value else 1


if __name__ == "__main__":
    sys.exit(main())
