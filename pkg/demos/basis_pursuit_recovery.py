"""
Sparse recovery by basis pursuit
================================

Recover a positive sparse vector from noisy Gaussian measurements by
minimizing its l1 norm inside the noise tube.
"""

import numpy as np

from boundlab import BasisPursuit, add_bounded_noise, gen_sparse_dataset
from boundlab.linalg import normalize_columns

A = normalize_columns(np.random.default_rng(0).standard_normal((40, 100)))

# five positive 4-sparse vectors with uniform (0, 1] magnitudes
data = gen_sparse_dataset(n=100, k=4, count=5, seed=3)

# noise is drawn uniformly from the eps-ball, so the true vector stays feasible
eps = 1e-5
bp = BasisPursuit(A)
for i, x in enumerate(data.vectors):
    y = add_bounded_noise(A @ x, eps, seed=7, stream=i)
    res = bp.solve(y, eps)
    print(f"vector {i}: support {data.supports[i]}  error {np.linalg.norm(res.xhat - x):.2e}  "
          f"iters {res.iterations}  certified {res.certified}")

# with eps = 0 the program is the equality-constrained one
x = data.vectors[0]
print("noiseless error:", np.linalg.norm(bp.solve(A @ x, 0.0).xhat - x))
