"""Recovery-error bounds and the step-by-step looseness trace of the coherence bound.

The trace follows the chain of inequalities used to bound ``||h0||_2`` for
basis pursuit with coherence ``mu`` and an exactly ``n_x``-sparse signal
(``e0 = 0``). For each inequality ``a <= b`` it records the relative
difference ``|b - a| / |a|`` against a fixed baseline:

====  ==========================================================  ==============
step  right-hand side                                             baseline
====  ==========================================================  ==============
1     ``|h0' G h0| - |(h - h0)' G h0|``                           ``|h' G h0|``
2     ``(1 - mu (n_x - 1)) ||h0||^2 - |sum_{k in X, l not in X}|``  ``|h' G h0|``
3     ``... - mu ||h0||_1 ||h - h0||_1``                          ``|h' G h0|``
4     ``... - mu ||h0||_1 (||h0||_1 + e0)``                       ``|h' G h0|``
5     ``(1 - mu (2 n_x - 1)) ||h0||^2 - mu sqrt(n_x) ||h0|| e0``  ``|h' G h0|``
6     ``(|h' G h0| + mu sqrt(n_x) ||h0|| e0) / (c ||h0||)``       ``||h0||``
7     ``(||A h|| ||A h0|| + mu sqrt(n_x) ||h0|| e0) / (c ||h0||)``  ``|h' G h0|``
8     ``((eps + eta) sqrt(1 + mu (n_x - 1)) + mu sqrt(n_x) e0) / c``  ``|h' G h0|``
9     ``(1 - mu (n_x - 1)) ||h0||^2``                             ``||A h0||^2``
10    ``(1 + mu (n_x - 1)) ||h0||^2``                             ``||A h0||^2``
11    closed-form final bound on ``||h||``                        ``||h||``
====  ==========================================================  ==============

with ``G = A'A``, ``h = xhat - x``, ``h0`` the restriction of ``h`` to the
support ``X`` of the ``n_x`` largest entries of ``x`` and
``c = 1 - mu (2 n_x - 1)``. Steps 7 and 8 keep the baseline ``|h' G h0|``
used for steps 1-5.
"""

import csv
import io
from dataclasses import dataclass, field
from math import floor, sqrt

import numpy as np

from .errors import InapplicableError, StructuralError
from .linalg import as_matrix, as_vector, column_norms
from .metrics import coherence

#: Baselines smaller than this make a trace degenerate.
DEGENERATE_BASELINE = 1e-14

#: Cai's RIC threshold.
CAI_THRESHOLD = 0.307

STEP_NAMES = tuple(f"step{i}" for i in range(1, 12))


@dataclass(frozen=True)
class BoundValue:
    value: float
    applicable: bool
    condition: str = ""


def max_sparsity_for_coherence(mu):
    """Greatest integer strictly below ``(1 + 1/mu) / 2``."""
    if mu <= 0:
        return np.iinfo(np.int64).max
    cap = 0.5 * (1.0 + 1.0 / mu)
    k = floor(cap)
    return k - 1 if k == cap else k


def studer_final_bound(mu, n_x, eps, eta, e0):
    """Closed-form coherence bound on ``||xhat - x||_2``.

    ``e0 = 2 ||x - x_X||_1`` is twice the best-``n_x``-term approximation
    error. The bound is inapplicable when ``1 - mu (2 n_x - 1) <= 0``.
    """
    if not 0 <= mu <= 1:
        raise StructuralError(f"mu must lie in [0, 1], got {mu}")
    if n_x < 1:
        raise StructuralError("n_x must be >= 1")
    c = 1.0 - mu * (2 * n_x - 1)
    cond = "1 - mu (2 n_x - 1) > 0"
    if c <= 0:
        return BoundValue(value=float("nan"), applicable=False, condition=cond)
    c1 = (c + sqrt(mu * n_x) * sqrt(1 + mu * (n_x - 1))) / sqrt(1 + mu * (2 * n_x - 1))
    c2 = 2 * sqrt(mu + mu * mu) / c
    return BoundValue(value=c1 * (eps + eta) + c2 * (0.5 * e0), applicable=True, condition=cond)


def tang_bound(omega_val, k, eps):
    """l2 bound ``2 eps sqrt(2k) / omega_2(A, 2k)`` for ``k``-sparse signals."""
    if k < 1:
        raise StructuralError("k must be >= 1")
    if eps < 0:
        raise StructuralError("eps must be >= 0")
    cond = "omega_2(A, 2k) > 0"
    if omega_val <= 0:
        return BoundValue(value=float("nan"), applicable=False, condition=cond)
    return BoundValue(value=2 * eps * sqrt(2 * k) / omega_val, applicable=True, condition=cond)


def cai_bound(delta_k, eps):
    """RIC bound ``eps / (0.307 - delta_k)``, valid when ``delta_k < 0.307``."""
    if delta_k < 0 or eps < 0:
        raise StructuralError("delta_k and eps must be >= 0")
    cond = f"delta_k < {CAI_THRESHOLD}"
    if delta_k >= CAI_THRESHOLD:
        return BoundValue(value=float("nan"), applicable=False, condition=cond)
    return BoundValue(value=eps / (CAI_THRESHOLD - delta_k), applicable=True, condition=cond)


def relative_difference(a, b):
    return abs(b - a) / abs(a)


@dataclass
class BoundTrace:
    """Relative differences of the eleven traced inequalities for one vector.

    ``sides`` keeps the raw ``(baseline, bound)`` pair behind every step and
    step values are ``nan`` when ``degenerate`` is set. ``margins[i]`` is the
    signed, normalized slack of the inequality introduced at step ``i + 1``
    (for steps 7 and 8, relative to the previous bound in the chain); a
    valid chain has every margin >= 0 up to rounding.
    """

    steps: np.ndarray
    degenerate: bool
    mu: float
    n_x: int
    e0: float
    eps: float
    eta: float
    error: float = float("nan")
    bound: float = float("nan")
    sides: dict = field(default_factory=dict, repr=False)
    margins: np.ndarray = field(default=None, repr=False)

    def __getattr__(self, name):
        if name.startswith("step") and name[4:].isdigit():
            i = int(name[4:])
            if 1 <= i <= 11:
                return float(self.steps[i - 1])
        raise AttributeError(name)


def top_support(x, n_x):
    """Indices of the ``n_x`` largest ``|x|``, ties broken by lowest index."""
    order = np.lexsort((np.arange(x.shape[0]), -np.abs(x)))
    return np.sort(order[:n_x])


def studer_trace(A, x, xhat, y, eps, eta, n_x, mu=None):
    """Evaluate both sides of every traced inequality for one recovery.

    ``A`` must have unit-norm columns (the Gersgorin steps assume it) and
    ``x`` must be exactly ``n_x``-sparse.

    Raises
    ------
    InapplicableError
        If ``n_x`` violates the coherence condition of the bound.
    """
    A = as_matrix(A)
    x = as_vector(x, "x")
    xhat = as_vector(xhat, "xhat")
    y = as_vector(y, "y")
    m, n = A.shape
    if x.shape[0] != n or xhat.shape[0] != n or y.shape[0] != m:
        raise StructuralError("inconsistent dimensions between A, x, xhat and y")
    if np.max(np.abs(column_norms(A) - 1.0)) > 1e-8:
        raise StructuralError("studer_trace needs a matrix with unit-norm columns")
    if np.count_nonzero(x) > n_x:
        raise StructuralError(f"x has {np.count_nonzero(x)} nonzeros, more than n_x={n_x}")
    if mu is None:
        mu = coherence(A)
    if n_x < 1 or n_x > max_sparsity_for_coherence(mu):
        raise InapplicableError(
            f"n_x={n_x} violates n_x < (1 + 1/mu)/2 for mu={mu:.6g}"
        )

    X = top_support(x, n_x)
    e0 = 2.0 * float(np.abs(np.delete(x, X)).sum())
    h = xhat - x
    h0 = np.zeros(n)
    h0[X] = h[X]
    hc = h - h0
    Ah, Ah0 = A @ h, A @ h0
    nh0_2 = float(np.linalg.norm(h0))
    nh0_1 = float(np.abs(h0).sum())
    nhc_1 = float(np.abs(hc).sum())
    Ah0_sq = float(Ah0 @ Ah0)
    c = 1.0 - mu * (2 * n_x - 1)
    lower_g = (1.0 - mu * (n_x - 1)) * nh0_2**2
    upper_g = (1.0 + mu * (n_x - 1)) * nh0_2**2
    cs_term = mu * sqrt(n_x) * nh0_2 * e0

    lhs = abs(float(Ah @ Ah0))
    rhs = [
        abs(float(Ah0 @ Ah0)) - abs(float((A @ hc) @ Ah0)),
        lower_g - abs(float((A.T @ Ah0) @ hc)),
        lower_g - mu * nh0_1 * nhc_1,
        lower_g - mu * nh0_1 * (nh0_1 + e0),
        c * nh0_2**2 - cs_term,
    ]
    final = studer_final_bound(mu, n_x, eps, eta, e0)
    err = float(np.linalg.norm(h))
    baselines = [lhs] * 5 + [nh0_2, lhs, lhs, Ah0_sq, Ah0_sq, err]
    denom = c * nh0_2
    rhs += [
        (lhs + cs_term) / denom if denom > 0 else np.inf,
        (float(np.linalg.norm(Ah)) * sqrt(Ah0_sq) + cs_term) / denom if denom > 0 else np.inf,
        ((eps + eta) * sqrt(1 + mu * (n_x - 1)) + mu * sqrt(n_x) * e0) / c,
        lower_g,
        upper_g,
        final.value,
    ]
    sides = {name: (a, b) for name, a, b in zip(STEP_NAMES, baselines, rhs)}
    # signed slack of each inequality in the direction it must hold
    chain = [lhs, *rhs[:5]]
    margins = [(chain[i] - chain[i + 1]) / lhs if lhs else np.nan for i in range(5)]
    margins += [
        (rhs[5] - nh0_2) / nh0_2 if nh0_2 else np.nan,
        (rhs[6] - rhs[5]) / rhs[5] if rhs[5] else np.nan,
        (rhs[7] - rhs[6]) / rhs[6] if rhs[6] else np.nan,
        (Ah0_sq - lower_g) / Ah0_sq if Ah0_sq else np.nan,
        (upper_g - Ah0_sq) / Ah0_sq if Ah0_sq else np.nan,
        (final.value - err) / err if err else np.nan,
    ]
    degenerate = min(abs(a) for a in baselines) < DEGENERATE_BASELINE
    if degenerate:
        steps = np.full(11, np.nan)
    else:
        steps = np.array([relative_difference(a, b) for a, b in zip(baselines, rhs)])
    return BoundTrace(
        steps=steps,
        degenerate=degenerate,
        mu=float(mu),
        n_x=int(n_x),
        e0=e0,
        eps=float(eps),
        eta=float(eta),
        error=err,
        bound=final.value,
        sides=sides,
        margins=np.array(margins, dtype=float),
    )


TRACE_COLUMNS = ("vector_id", "degenerate", *STEP_NAMES, "mu", "n_x", "eps", "eta")


def _fmt(v):
    return format(float(v), ".17g")


def trace_rows(traces, ids=None):
    """Rows of :data:`TRACE_COLUMNS` for a sequence of traces."""
    ids = range(len(traces)) if ids is None else ids
    for i, t in zip(ids, traces):
        yield [str(i), str(int(t.degenerate)), *(_fmt(v) for v in t.steps), _fmt(t.mu), str(t.n_x), _fmt(t.eps), _fmt(t.eta)]


def traces_to_csv(traces, ids=None):
    """Serialize traces as CSV text (LF line endings, 17 significant digits)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    w.writerows(trace_rows(traces, ids))
    return buf.getvalue()


def traces_from_csv(text):
    """Inverse of :func:`traces_to_csv`; returns ``(ids, traces)``."""
    ids, out = [], []
    for row in csv.DictReader(io.StringIO(text)):
        ids.append(int(row["vector_id"]))
        out.append(
            BoundTrace(
                steps=np.array([float(row[s]) for s in STEP_NAMES]),
                degenerate=bool(int(row["degenerate"])),
                mu=float(row["mu"]),
                n_x=int(row["n_x"]),
                e0=0.0,
                eps=float(row["eps"]),
                eta=float(row["eta"]),
            )
        )
    return ids, out
