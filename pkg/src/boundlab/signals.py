"""Sparsifying bases, synthetic sparse data, bounded noise and error metrics."""

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import DegenerateInputError, StructuralError


def stream_rng(seed, *stream):
    """Counter-based generator keyed by ``(seed, *stream)``.

    Each stream index gets an independent Philox key, so draws for item ``i``
    never depend on how many items were generated before it.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, stream)])))


def dct_matrix(n):
    """Orthonormal DCT-II analysis matrix; row ``k`` is the ``k``-th basis vector."""
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    C = np.cos(np.pi * (2 * i + 1) * k / (2 * n)) * np.sqrt(2.0 / n)
    C[0] /= np.sqrt(2.0)
    return C


def dct2_basis(n1, n2):
    """Orthonormal 2-D DCT-II synthesis basis for column-major vectorized frames.

    Column ``j`` is the vectorized basis image whose coefficient is entry
    ``j`` of the column-major vectorized coefficient array, so a frame is
    ``D @ alpha``.

    >>> dct2_basis(2, 2)[:, 0]
    array([0.5, 0.5, 0.5, 0.5])
    """
    if int(n1) < 1 or int(n2) < 1:
        raise StructuralError(f"frame dimensions must be >= 1, got ({n1}, {n2})")
    # vec(C1^T alpha C2) = (C2^T kron C1^T) vec(alpha) for column-major vec
    return np.kron(dct_matrix(int(n2)).T, dct_matrix(int(n1)).T)


@dataclass(frozen=True)
class SupportSetPool:
    """A fixed list of ``z`` support sets, each of size ``k`` over ``[0, n)``."""

    n: int
    k: int
    sets: tuple
    seed: int = 0

    @property
    def z(self):
        return len(self.sets)

    def __post_init__(self):
        for s in self.sets:
            if len(s) != self.k or len(set(s)) != self.k:
                raise StructuralError(f"support set {s} does not have {self.k} distinct members")
            if min(s, default=0) < 0 or max(s, default=-1) >= self.n:
                raise StructuralError(f"support set {s} has indices outside [0, {self.n})")


def gen_support_pool(n, k, z, seed):
    """Draw ``z`` distinct uniformly random ``k``-subsets of ``range(n)``."""
    if not 0 <= k <= n:
        raise StructuralError(f"need 0 <= k <= n, got k={k}, n={n}")
    if z < 1:
        raise StructuralError("z must be >= 1")
    if z > comb(n, k):
        raise StructuralError(f"only {comb(n, k)} distinct {k}-subsets of {n} exist, asked for {z}")
    rng = stream_rng(seed, 0)
    sets = []
    while len(sets) < z:
        s = tuple(sorted(int(i) for i in rng.choice(n, size=k, replace=False)))
        if s not in sets:
            sets.append(s)
    return SupportSetPool(n=n, k=k, sets=tuple(sets), seed=seed)


@dataclass
class SparseSignalDataset:
    """Exactly ``k``-sparse, strictly positive coefficient vectors.

    ``vectors`` is a ``(count, n)`` array; ``supports[i]`` holds the sorted
    nonzero positions of row ``i``.
    """

    n: int
    k: int
    vectors: np.ndarray
    supports: list
    seed: int
    pool: SupportSetPool = field(default=None, repr=False)

    def __len__(self):
        return self.vectors.shape[0]


def gen_sparse_dataset(n, k, count, pool=None, seed=0):
    """Seeded dataset of positive ``k``-sparse vectors.

    Magnitudes are i.i.d. uniform on ``(0, 1]``. Supports are uniform over the
    ``k``-subsets of ``range(n)``, or uniform over ``pool.sets`` when a pool is
    given. Vector ``i`` is drawn from its own stream, so the dataset is
    reproducible item by item.
    """
    if not 0 <= k <= n:
        raise StructuralError(f"need 0 <= k <= n, got k={k}, n={n}")
    if pool is not None and (pool.k != k or pool.n != n):
        raise StructuralError(f"pool is for (n={pool.n}, k={pool.k}), dataset asks (n={n}, k={k})")
    X = np.zeros((count, n))
    supports = []
    for i in range(count):
        rng = stream_rng(seed, i)
        if pool is not None:
            S = np.array(pool.sets[rng.integers(pool.z)], dtype=int)
        else:
            S = np.sort(rng.choice(n, size=k, replace=False))
        X[i, S] = 1.0 - rng.random(k)
        supports.append(tuple(int(j) for j in S))
    return SparseSignalDataset(n=n, k=k, vectors=X, supports=supports, seed=seed, pool=pool)


def add_bounded_noise(y, eps, seed, stream=0):
    """Add noise drawn uniformly from the Euclidean ball of radius ``eps``.

    The direction is an isotropic Gaussian draw and the radius is
    ``eps * u ** (1/m)`` with ``u ~ U[0, 1)``; the returned perturbation always
    satisfies ``||noise||_2 <= eps``.
    """
    y = np.asarray(y, dtype=float)
    if eps < 0:
        raise StructuralError("eps must be >= 0")
    if eps == 0 or y.size == 0:
        return y.copy()
    rng = stream_rng(seed, stream)
    m = y.shape[0]
    g = rng.standard_normal(m)
    noise = g * (eps * rng.random() ** (1.0 / m) / np.linalg.norm(g))
    while np.linalg.norm(noise) > eps:
        noise *= 1.0 - 2.0**-52
    return y + noise


def rrmse(xhat, x):
    """Relative l2 error ``||xhat - x|| / ||x||``."""
    x = np.asarray(x, dtype=float)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise DegenerateInputError("reference vector is zero")
    return float(np.linalg.norm(np.asarray(xhat, dtype=float) - x) / nx)


def sparsity_count(s, n):
    """Number of nonzeros for a sparsity fraction ``s`` of ``n`` entries (at least 1)."""
    return max(1, int(round(s * n)))
