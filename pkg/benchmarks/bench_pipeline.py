# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Per-step pipeline timings for growing microphone counts.

The timings run with BLAS and the FFT backend held to one thread.
"""

from fastcc import bench_pipeline

for mics in [2, 4, 8]:
    report = bench_pipeline(mics, repetitions=1000)
    print(report.to_text())
