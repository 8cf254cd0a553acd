"""
Soft-thresholding and singular-value thresholding
=================================================

The two shrinkage operators the solvers are built from: elementwise
complex soft-thresholding (the l1 prox) and its matrix-spectrum analogue
(the nuclear-norm prox).
"""

import numpy as np

from lpsrecon import soft_threshold, soft_threshold_matrix, sv_threshold

# A complex scalar shrinks toward zero but keeps its phase.
x = 3 + 4j  # magnitude 5
for lam in (0.0, 2.5, 5.0, 7.0):
    print(f"soft_threshold({x}, {lam}) = {soft_threshold(x, lam)}")

# On a matrix the operator acts entry by entry.
m = np.array([[2.0, -3.0], [0.5, 1.0]], dtype=complex)
print("\nmatrix before:\n", m.real)
print("after threshold 1.0:\n", soft_threshold_matrix(m, 1.0).real)

# Singular-value thresholding shrinks the spectrum instead of the entries,
# which is what pushes an iterate toward low rank.
rng = np.random.default_rng(0)
low_rank = np.outer(rng.standard_normal(12), rng.standard_normal(4))
noisy = low_rank + 0.05 * rng.standard_normal((12, 4))

sigma_before = np.linalg.svd(noisy, compute_uv=False)
out = sv_threshold(noisy, lam=0.3)
sigma_after = np.linalg.svd(out, compute_uv=False)
print("\nsingular values before:", np.round(sigma_before, 3))
print("singular values after: ", np.round(sigma_after, 3))
print("rank drops from", (sigma_before > 1e-10).sum(), "to", (sigma_after > 1e-10).sum())
