"""
Designing for recovery error instead of coherence
=================================================

Random search over the mask values, scoring each candidate by the mean
squared basis-pursuit error on a training set drawn from a few fixed
supports.
"""

import numpy as np

from boundlab import dct2_basis, gen_sparse_dataset, gen_support_pool, random_code
from boundlab.design import CactiModel, SearchConfig, mean_squared_error, mmse_random_search, fixed_noise
from boundlab.solvers import SolverConfig

code = random_code(4, 4, shifts=[(0, 0), (1, 2)], seed=0)
model = CactiModel(code, dct2_basis(4, 4))

# all vectors share one of z = 3 supports
pool = gen_support_pool(n=32, k=9, z=3, seed=5)
train = gen_sparse_dataset(32, 9, 20, pool=pool, seed=6)
test = gen_sparse_dataset(32, 9, 50, pool=pool, seed=7)

eps = 1e-5
rep = mmse_random_search(model, train, eps, SearchConfig(iters=15, samples_per_iter=4, perturb_sigma0=0.2),
                         solver=SolverConfig(max_iters=1000))
print("training MSE by iteration:", np.round(rep.objective_history, 5))

noise = fixed_noise(16, len(test), eps, seed=9)
for name, c in (("random", code), ("searched", rep.best)):
    print(f"{name:>8} test MSE: {mean_squared_error(model.matrix(c.values), test.vectors, noise, eps):.5f}")
