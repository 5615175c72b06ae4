"""Dense linear-algebra kernels.

Matrices and vectors are plain ``numpy.ndarray`` objects of dtype float64.
The kernels here validate their inputs and then delegate the heavy lifting
to LAPACK through numpy.
"""

import numpy as np

from .errors import DegenerateInputError, SingularityError, StructuralError

#: Largest condition number accepted by :func:`least_squares`.
CONDITION_CAP = 1e10

_SYMMETRY_TOL = 1e-10


def as_matrix(A, name="A"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise StructuralError(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise StructuralError(f"{name} has non-finite entries")
    return A


def as_vector(x, name="x"):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise StructuralError(f"{name} must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise StructuralError(f"{name} has non-finite entries")
    return x


def _check_symmetric(S):
    if S.shape[0] != S.shape[-1]:
        raise StructuralError(f"matrix must be square, got shape {S.shape}")
    scale = max(np.max(np.abs(S)), 1.0) if S.size else 1.0
    if np.max(np.abs(S - np.swapaxes(S, -1, -2)), initial=0.0) > _SYMMETRY_TOL * scale:
        raise StructuralError("matrix is not symmetric")


def sym_extreme_abs_eig(S, tol=1e-12):
    """Largest eigenvalue magnitude of a symmetric matrix.

    Parameters
    ----------
    S : (n, n) array_like
        Symmetric matrix (to 1e-10 relative).
    tol : float
        Requested relative accuracy. LAPACK's symmetric solver is accurate to
        machine precision, so this only guards against nonsensical input.

    Returns
    -------
    float
        ``max |lambda_i(S)|``.
    """
    if tol <= 0:
        raise StructuralError("tol must be positive")
    S = as_matrix(S, "S")
    _check_symmetric(S)
    if S.shape[0] == 0:
        return 0.0
    w = np.linalg.eigvalsh(S)
    return float(max(abs(w[0]), abs(w[-1])))


def batch_extreme_abs_eig(S):
    """:func:`sym_extreme_abs_eig` over a stack of shape ``(b, s, s)``."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 3 or S.shape[1] != S.shape[2]:
        raise StructuralError(f"expected a (b, s, s) stack, got {S.shape}")
    w = np.linalg.eigvalsh(S)
    return np.maximum(np.abs(w[:, 0]), np.abs(w[:, -1]))


def least_squares(A, y, cond_cap=CONDITION_CAP):
    """Solve ``min ||A x - y||_2`` for a full-column-rank ``A`` by Householder QR.

    Raises
    ------
    SingularityError
        If the estimated condition number of ``A`` exceeds ``cond_cap``. The
        estimate is attached as ``err.condition``.
    """
    A = as_matrix(A)
    y = as_vector(y, "y")
    m, n = A.shape
    if m != y.shape[0]:
        raise StructuralError(f"A has {m} rows but y has length {y.shape[0]}")
    if n == 0:
        return np.zeros(0)
    if n > m:
        raise SingularityError(f"A is {m}x{n}: more columns than rows", np.inf)
    Q, R = np.linalg.qr(A, mode="reduced")
    sv = np.linalg.svd(R, compute_uv=False)
    cond = np.inf if sv[-1] == 0 else sv[0] / sv[-1]
    if not cond <= cond_cap:
        raise SingularityError(
            f"A is rank deficient (condition number ~{cond:.3g} > {cond_cap:.0e})", cond
        )
    return np.linalg.solve(R, Q.T @ y)


def column_norms(A):
    return np.sqrt(np.einsum("ij,ij->j", A, A))


def normalize_columns(A):
    """Scale every column of ``A`` to unit Euclidean norm."""
    A = as_matrix(A)
    norms = column_norms(A)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise DegenerateInputError(f"column {zero[0]} is zero")
    return A / norms


def gram(A):
    """``A^T A``."""
    A = as_matrix(A)
    return A.T @ A


def normalized_gram_matrix(A):
    """Gram matrix of the column-normalized ``A`` (unit diagonal)."""
    U = normalize_columns(A)
    G = U.T @ U
    np.fill_diagonal(G, 1.0)
    return G
