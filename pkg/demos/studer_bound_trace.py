"""
Where the coherence error bound loses tightness
===============================================

Trace the eleven inequalities behind the coherence-based error bound for
one recovered vector and see which steps open the gap.
"""

import numpy as np

from boundlab import BasisPursuit, add_bounded_noise, coherence, gen_sparse_dataset, studer_trace
from boundlab.bounds import STEP_NAMES, max_sparsity_for_coherence
from boundlab.linalg import normalize_columns

A = normalize_columns(np.random.default_rng(0).standard_normal((99, 100)))
mu = coherence(A)
n_x = max_sparsity_for_coherence(mu)
print(f"coherence {mu:.4f}, bound holds for supports up to n_x = {n_x}")

eps = eta = 1e-5
bp = BasisPursuit(A)
steps = []
for i, x in enumerate(gen_sparse_dataset(100, n_x, 50, seed=1).vectors):
    y = add_bounded_noise(A @ x, eps, seed=2, stream=i)
    t = studer_trace(A, x, bp.solve(y, eps).xhat, y, eps, eta, n_x, mu)
    if not t.degenerate:
        steps.append(t.steps)

# relative difference of each step, median over the vectors
for name, med in zip(STEP_NAMES, np.median(steps, axis=0)):
    print(f"{name:>7}: {med:10.3g}")
print(f"final: error {t.error:.2e} vs bound {t.bound:.2e}")
