# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

"""Plot the first FCC bases over frequency, and the singular values of W.

Requires Matplotlib (not installed by 'pip install fastcc[dev]').
"""

import matplotlib.pyplot as plt
import numpy as np
from fastcc import build_w, decompose, make_grid, unfold_projection

steering = build_w(make_grid(0.15, 16000), 512)
bases = decompose(steering, 8)
p = unfold_projection(bases)
f = np.arange(p.shape[1])

fig, (ax1, ax2) = plt.subplots(ncols=2, figsize=(9,4), constrained_layout=True)

for k in range(4):
    # Even bases are real, odd bases are imaginary
    values = p[k].real if bases.parity[k] == 0 else p[k].imag
    kind = "even" if bases.parity[k] == 0 else "odd"
    ax1.plot(f, values, label=f"$k = {k}$ ({kind})")

ax1.axvline(128, color="gray", linestyle=":")
ax1.set_xlabel("Frequency bin $f$")
ax1.set_ylabel("Basis coefficient")
ax1.grid()
ax1.legend()

singulars = np.linalg.svd(steering.w, compute_uv=False)
ax2.semilogy(np.arange(1, singulars.size + 1), singulars / singulars[0], marker=".")
ax2.set_xlabel("Rank $K$")
ax2.set_ylabel("Relative singular value")
ax2.grid()

plt.savefig("fcc_bases.pdf", transparent=True)
