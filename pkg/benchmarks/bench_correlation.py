# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Benchmarks for the correlation step alone: GCC by factor, FCC by rank, and the dense product."""

import numpy as np
import timeit

setup = """
from fastcc import FccCorrelator, GccCorrelator, build_w, decompose, dense_correlate, make_grid
import numpy as np

rng = np.random.default_rng(0)
x = np.exp(1j * rng.uniform(-np.pi, np.pi, size=(T, N // 2 + 1)))
steering = build_w(make_grid(0.15, 16000), N)
gcc = {r: GccCorrelator(make_grid(0.15, 16000, delta=1.0 / r), N, r) for r in [1, 2, 4]}
fcc = {k: FccCorrelator(decompose(steering, k)) for k in range(1, 9)}
"""

benches = [(f"gcc:{r}", f"for row in x: gcc[{r}](row)") for r in [1, 2, 4]]
benches += [(f"fcc:{k}", f"for row in x: fcc[{k}](row)") for k in range(1, 9)]
benches += [("dense", "for row in x: dense_correlate(steering, row)")]

for n in [256, 512, 1024]:
    for (name, bench) in benches:
        res = timeit.repeat(bench, setup, repeat=5, number=1, globals={"N": n, "T": 1000})
        per_frame = np.array(res) / 1000 * 1e6
        print(f"{name:<6}, N={n:<4}: min={np.min(per_frame):<7.3} us, mean={np.mean(per_frame):<7.3} us")
