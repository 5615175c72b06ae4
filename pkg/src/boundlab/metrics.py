"""Sensing-matrix quality measures.

Coherence and its average-squared variant, the normalized Gram of a CACTI
effective dictionary, brute-force restricted isometry constants, restricted
eigenvalues of single supports, and Tang's ``omega_2`` recovery measure.
"""

from dataclasses import dataclass
from itertools import combinations, islice
from math import comb

import numpy as np

from .errors import BudgetError, ConvergenceError, DegenerateInputError, StructuralError
from .linalg import as_matrix, batch_extreme_abs_eig, column_norms, sym_extreme_abs_eig
from .solvers import SolverConfig, _l1_ball_lsq

#: Default cap on the number of supports :func:`ric` may enumerate.
RIC_LIMIT = 2_000_000

_RIC_CHUNK = 20_000


def _unit_columns(A):
    A = as_matrix(A)
    norms = column_norms(A)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise DegenerateInputError(f"column {zero[0]} is zero")
    return A / norms


def _offdiag_abs(G):
    G = np.abs(G)
    np.fill_diagonal(G, 0.0)
    return G


def coherence(A):
    """Largest absolute normalized inner product between two distinct columns."""
    U = _unit_columns(A)
    if U.shape[1] < 2:
        return 0.0
    return float(np.max(_offdiag_abs(U.T @ U)))


def average_coherence_sq(A):
    """Mean over ordered pairs ``i != j`` of the squared normalized inner product."""
    U = _unit_columns(A)
    N = U.shape[1]
    if N < 2:
        return 0.0
    G = U.T @ U
    off = np.sum(G * G) - np.sum(np.diag(G) ** 2)
    return float(off / (N * (N - 1)))


@dataclass(frozen=True)
class NormalizedGram:
    """Normalized Gram matrix of a block-structured dictionary.

    ``matrix[i * n + a, j * n + b]`` is the cosine between column ``a`` of
    block ``i`` and column ``b`` of block ``j`` (``n = block_size``).
    """

    matrix: np.ndarray
    block_count: int
    block_size: int

    def entry(self, block_a, col_a, block_b, col_b):
        n = self.block_size
        return float(self.matrix[block_a * n + col_a, block_b * n + col_b])

    def max_offdiag(self):
        return float(np.max(_offdiag_abs(self.matrix)))

    def argmax_offdiag(self):
        """``(block_a, col_a, block_b, col_b)`` of the largest off-diagonal entry."""
        off = _offdiag_abs(self.matrix)
        p, q = np.unravel_index(np.argmax(off), off.shape)
        n = self.block_size
        return int(p // n), int(p % n), int(q // n), int(q % n)


def normalized_gram(ed):
    """Normalized Gram of an :class:`~boundlab.cacti.EffectiveDictionary`."""
    A = ed.matrix
    norms = column_norms(A)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        j = int(zero[0])
        n = ed.block_size
        raise DegenerateInputError(
            f"effective dictionary column {j} (block {j // n}, basis vector {j % n}) is zero"
        )
    U = A / norms
    G = U.T @ U
    np.fill_diagonal(G, 1.0)
    return NormalizedGram(matrix=G, block_count=ed.block_count, block_size=ed.block_size)


@dataclass(frozen=True)
class RicReport:
    s: int
    delta: float
    argmax_support: tuple
    supports_enumerated: int


def restricted_eigenvalue(A, support):
    """``|lambda_max|`` of ``A_S^T A_S - I`` for a single support ``S``."""
    A = as_matrix(A)
    S = np.asarray(list(support), dtype=int)
    if S.size == 0:
        raise StructuralError("support must be nonempty")
    if S.min() < 0 or S.max() >= A.shape[1] or np.unique(S).size != S.size:
        raise StructuralError(f"invalid support {tuple(S)} for {A.shape[1]} columns")
    AS = A[:, S]
    return sym_extreme_abs_eig(AS.T @ AS - np.eye(S.size))


def restricted_eigenvalues(A, supports):
    """:func:`restricted_eigenvalue` for many supports of a common size."""
    A = as_matrix(A)
    S = np.asarray([list(s) for s in supports], dtype=int)
    G = A.T @ A
    sub = G[S[:, :, None], S[:, None, :]] - np.eye(S.shape[1])
    return batch_extreme_abs_eig(sub)


def ric(A, s, limit=RIC_LIMIT):
    """Exact restricted isometry constant ``delta_s`` by exhaustive enumeration.

    Raises
    ------
    BudgetError
        If ``C(cols, s)`` exceeds ``limit``; no approximation is attempted.
    """
    A = as_matrix(A)
    n = A.shape[1]
    if not 1 <= s <= n:
        raise StructuralError(f"need 1 <= s <= {n}, got {s}")
    total = comb(n, s)
    if total > limit:
        raise BudgetError(f"C({n}, {s}) = {total} supports exceeds the enumeration limit {limit}")
    G = A.T @ A
    I = np.eye(s)
    best, best_support = -1.0, None
    it = combinations(range(n), s)
    while True:
        chunk = np.fromiter(
            (i for c in islice(it, _RIC_CHUNK) for i in c), dtype=np.intp
        ).reshape(-1, s)
        if chunk.shape[0] == 0:
            break
        vals = batch_extreme_abs_eig(G[chunk[:, :, None], chunk[:, None, :]] - I)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_support = float(vals[k]), tuple(int(i) for i in chunk[k])
    return RicReport(s=s, delta=best, argmax_support=best_support, supports_enumerated=total)


def omega(A, s, cfg=None, tol=1e-7):
    """Tang's ``omega_2(A, s)``.

    Computed as the minimum over columns ``i`` of the distance from ``a_i`` to
    ``{A_{~i} lam : ||lam||_1 <= s - 1}``. ``s`` may be fractional.

    Raises
    ------
    ConvergenceError
        If the subproblem for some column does not converge.
    """
    cfg = cfg or SolverConfig()
    A = as_matrix(A)
    if s < 1:
        raise StructuralError(f"s must be >= 1, got {s}")
    n = A.shape[1]
    vals, ok = _l1_ball_lsq(A, A, s - 1.0, exclude=np.arange(n), max_iters=cfg.max_iters, tol=tol)
    bad = np.flatnonzero(~ok)
    if bad.size:
        raise ConvergenceError(f"omega subproblem for column {bad[0]} did not converge")
    return float(np.min(vals))
