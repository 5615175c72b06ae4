"""
Coherence, restricted isometry and the Tang measure
===================================================

Three ways to score a sensing matrix, from cheapest to most expensive.
"""

import numpy as np

from boundlab import average_coherence_sq, coherence, omega, ric
from boundlab.linalg import normalize_columns

A = normalize_columns(np.random.default_rng(0).standard_normal((30, 60)))

# worst pair of columns
print("coherence:", round(coherence(A), 4))
print("mean squared off-diagonal coherence:", round(average_coherence_sq(A), 4))

# restricted isometry constants by enumerating every support
for s in (2, 3):
    rep = ric(A, s)
    print(f"delta_{s} = {rep.delta:.4f} on support {rep.argmax_support} ({rep.supports_enumerated} supports)")

# for unit columns delta_2 is exactly the coherence
print("delta_2 - coherence:", ric(A, 2).delta - coherence(A))

# omega_2(A, s): smallest ||A z|| over z with ||z||_inf = 1 and ||z||_1 <= s
for s in (1, 2, 4):
    print(f"omega(A, {s}) = {omega(A, s):.4f}")
