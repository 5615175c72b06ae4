"""Sensing code and matrix designers.

Coherence is minimized by projected subgradient descent on the currently
largest normalized Gram entry, average squared coherence by plain projected
gradient descent, and the mean squared recovery error by a seeded random
search. All designers keep the best iterate seen, so the returned objective
never exceeds the starting one.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .cacti import CactiCode, assemble
from .errors import BoundlabError, DegenerateInputError, StructuralError
from .linalg import as_matrix, column_norms, normalize_columns
from .metrics import average_coherence_sq, coherence
from .signals import add_bounded_noise, gen_support_pool, stream_rng
from .solvers import BasisPursuit, SolverConfig

#: Gram entries within this distance of the maximum share the subgradient.
TIE_TOL = 1e-12


@dataclass(frozen=True)
class DescentConfig:
    restarts: int = 10
    max_iters: int = 500
    step_init: float = 0.1
    step_shrink: float = 0.5
    step_grow: float = 1.2
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise StructuralError("restarts must be >= 1")
        if self.max_iters < 0:
            raise StructuralError("max_iters must be >= 0")
        if not 0 < self.step_shrink < 1 < self.step_grow:
            raise StructuralError("need 0 < step_shrink < 1 < step_grow")
        if self.step_init <= 0 or self.tol < 0:
            raise StructuralError("step_init must be > 0 and tol >= 0")


@dataclass(frozen=True)
class SearchConfig:
    iters: int = 100
    samples_per_iter: int = 10
    perturb_sigma0: float = 0.1
    sigma_decay: float = 0.995
    seed: int = 0

    def __post_init__(self):
        if self.iters < 0:
            raise StructuralError("iters must be >= 0")
        if self.samples_per_iter < 1:
            raise StructuralError("samples_per_iter must be >= 1")
        if not 0 < self.sigma_decay <= 1:
            raise StructuralError("sigma_decay must lie in (0, 1]")
        if self.perturb_sigma0 <= 0:
            raise StructuralError("perturb_sigma0 must be > 0")


@dataclass
class DesignReport:
    """Outcome of a designer run.

    ``best`` is a :class:`~boundlab.cacti.CactiCode` or a 2-D array.
    ``objective_history`` holds the best-so-far objective after every
    iteration, so it is non-increasing.
    """

    best: object
    objective_history: list
    initial_objective: float
    final_objective: float
    improved: bool = True

    def to_dict(self):
        if isinstance(self.best, CactiCode):
            best = {"kind": "cacti", "code": self.best.to_dict()}
        else:
            best = {"kind": "matrix", "matrix": np.asarray(self.best).tolist()}
        return {
            "best": best,
            "objective_history": [float(v) for v in self.objective_history],
            "initial_objective": float(self.initial_objective),
            "final_objective": float(self.final_objective),
            "improved": bool(self.improved),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        b = d["best"]
        best = CactiCode.from_dict(b["code"]) if b["kind"] == "cacti" else np.asarray(b["matrix"], dtype=float)
        return cls(
            best=best,
            objective_history=list(d["objective_history"]),
            initial_objective=d["initial_objective"],
            final_objective=d["final_objective"],
            improved=d.get("improved", True),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------- gradients


def _check_basis(code, D):
    D = np.asarray(D, dtype=float)
    if D.shape != (code.n, code.n):
        raise StructuralError(f"basis has shape {D.shape}, expected ({code.n}, {code.n})")
    return D


def _max_pairs(G):
    """Upper-triangle index pairs whose ``|G|`` is within TIE_TOL of the max."""
    off = np.abs(np.triu(G, 1))
    top = off.max()
    p, q = np.nonzero(off >= top - TIE_TOL)
    return p, q


def cacti_entry_gradient(code, D, a, b):
    """Gradient of ``|M|`` for the normalized Gram entry between columns ``a`` and ``b``.

    Columns are indexed block-major (``a = block * n + basis``). The result
    is the derivative with respect to the mask values, obtained from the
    per-frame derivatives of the numerator ``chi`` and the denominator
    ``xi`` and scattered back through the shift permutations.
    """
    D = _check_basis(code, D)
    n = code.n
    if a == b:
        raise StructuralError("the diagonal of the normalized Gram carries no coherence information")
    F = code.frame_codes()
    mu, beta = divmod(int(a), n)
    nu, gamma = divmod(int(b), n)
    dbeta, dgamma = D[:, beta], D[:, gamma]
    chi = float(np.sum(F[mu] * F[nu] * dbeta * dgamma))
    Pp = float(np.sum(F[mu] ** 2 * dbeta**2))
    Pq = float(np.sum(F[nu] ** 2 * dgamma**2))
    if Pp == 0 or Pq == 0:
        raise DegenerateInputError(f"effective dictionary column {a if Pp == 0 else b} is zero")
    xi = np.sqrt(Pp * Pq)
    dchi = np.zeros_like(F)
    dxi = np.zeros_like(F)
    dchi[mu] += dbeta * dgamma * F[nu]
    dchi[nu] += dbeta * dgamma * F[mu]
    dxi[mu] += F[mu] * dbeta**2 * Pq / xi
    dxi[nu] += F[nu] * dgamma**2 * Pp / xi
    dF = np.sign(chi) * (dchi * xi - chi * dxi) / xi**2
    return _scatter(code, dF)


def _scatter(code, dF):
    g = np.zeros(code.n)
    np.add.at(g, code.permutations(), dF)
    return g


def cacti_coherence_gradient(code, D):
    """Subgradient of the effective-dictionary coherence with respect to the mask values.

    Entries of the normalized Gram within ``TIE_TOL`` of the maximum
    contribute the average of their gradients.

    Raises
    ------
    DegenerateInputError
        If the effective dictionary has a zero column.
    """
    D = _check_basis(code, D)
    A = assemble(code, D).matrix
    G = normalize_columns(A)
    G = G.T @ G
    p, q = _max_pairs(G)
    return np.mean([cacti_entry_gradient(code, D, a, b) for a, b in zip(p, q)], axis=0)


def general_coherence_gradient(A):
    """Subgradient of ``coherence(A)`` with respect to the entries of ``A``."""
    A = as_matrix(A)
    norms = column_norms(A)
    if np.any(norms == 0):
        raise DegenerateInputError(f"column {int(np.flatnonzero(norms == 0)[0])} is zero")
    U = A / norms
    G = U.T @ U
    p, q = _max_pairs(G)
    grad = np.zeros_like(A)
    for a, b in zip(p, q):
        s = np.sign(G[a, b])
        grad[:, a] += s * (U[:, b] - G[a, b] * U[:, a]) / norms[a]
        grad[:, b] += s * (U[:, a] - G[a, b] * U[:, b]) / norms[b]
    return grad / p.size


def _avg_coherence_dA(A):
    norms = column_norms(A)
    if np.any(norms == 0):
        raise DegenerateInputError(f"column {int(np.flatnonzero(norms == 0)[0])} is zero")
    U = A / norms
    N = A.shape[1]
    G = U.T @ U
    dU = 4.0 * (U @ G) / (N * (N - 1))
    # project out the radial part: the objective only sees directions
    dU -= U * np.sum(U * dU, axis=0)
    return dU / norms


def cacti_avg_coherence_gradient(code, D):
    """Gradient of ``average_coherence_sq`` of the effective dictionary w.r.t. the mask values."""
    D = _check_basis(code, D)
    dA = _avg_coherence_dA(assemble(code, D).matrix)
    n = code.n
    dF = np.stack([np.sum(dA[:, i * n:(i + 1) * n] * D, axis=1) for i in range(code.T)])
    return _scatter(code, dF)


def general_avg_coherence_gradient(A):
    return _avg_coherence_dA(as_matrix(A))


# ---------------------------------------------------------------- descent


def _descend(x0, objective, gradient, project, cfg, fresh):
    """Multi-start projected descent with an adaptive step and best-so-far retention."""
    f0 = objective(x0)
    best_x, best_f = x0, f0
    history = []
    if cfg.max_iters == 0:
        return best_x, best_f, f0, history
    for r in range(cfg.restarts):
        x = x0 if r == 0 else fresh(r)
        f = objective(x)
        if f < best_f:
            best_x, best_f = x, f
        step = cfg.step_init
        for _ in range(cfg.max_iters):
            try:
                g = gradient(x)
            except DegenerateInputError:
                break
            gn = np.linalg.norm(g)
            if gn == 0 or step < cfg.tol:
                break
            cand = project(x - step * np.linalg.norm(x) * g / gn)
            try:
                fc = objective(cand)
            except DegenerateInputError:
                fc = np.inf
            if fc < f:
                x, f = cand, fc
                step *= cfg.step_grow
                if f < best_f:
                    best_x, best_f = x, f
            else:
                step *= cfg.step_shrink
            history.append(best_f)
    return best_x, best_f, f0, history


def _rescale_nonneg(v):
    v = np.maximum(v, 0.0)
    top = v.max()
    return v / top if top > 0 else v


def _report(best, best_f, f0, history, init):
    improved = best_f < f0
    return DesignReport(
        best=best if improved else init,
        objective_history=history,
        initial_objective=f0,
        final_objective=best_f if improved else f0,
        improved=improved,
    )


def _design_cacti(init, D, cfg, measure, grad):
    D = _check_basis(init, D)

    def objective(v):
        return measure(assemble(init.with_values(v), D).matrix)

    def fresh(r):
        return 1.0 - stream_rng(cfg.seed, r).random(init.n)

    best, best_f, f0, history = _descend(
        np.array(init.values),
        objective,
        lambda v: grad(init.with_values(v), D),
        _rescale_nonneg,
        cfg,
        fresh,
    )
    return _report(init.with_values(best), best_f, f0, history, init)


def design_cacti_coherence(init, D, cfg=None):
    """Minimize the effective-dictionary coherence over nonnegative mask values.

    Restart 0 starts from ``init``; the others start from fresh uniform
    ``(0, 1]`` masks drawn from ``cfg.seed``. Iterates are clamped to the
    nonnegative orthant and rescaled to unit maximum, which leaves the
    objective unchanged.
    """
    return _design_cacti(init, D, cfg or DescentConfig(), coherence, cacti_coherence_gradient)


def design_avg_coherence(init, D, cfg=None):
    """Minimize the average squared coherence of the effective dictionary."""
    return _design_cacti(init, D, cfg or DescentConfig(), average_coherence_sq, cacti_avg_coherence_gradient)


def design_general_coherence(init, cfg=None):
    """Minimize ``coherence`` over unconstrained matrix entries.

    Iterates are column-normalized, which leaves the objective unchanged.
    """
    cfg = cfg or DescentConfig()
    A0 = as_matrix(init)
    shape = A0.shape

    def fresh(r):
        return stream_rng(cfg.seed, r).standard_normal(shape)

    best, best_f, f0, history = _descend(
        A0.copy(), coherence, general_coherence_gradient, normalize_columns, cfg, fresh
    )
    return _report(best, best_f, f0, history, A0)


# ---------------------------------------------------------------- MSE search


@dataclass(frozen=True)
class CactiModel:
    """Search space of nonnegative CACTI masks under a fixed basis."""

    code: CactiCode
    D: np.ndarray = field(repr=False)

    @property
    def params(self):
        return np.array(self.code.values)

    def matrix(self, params):
        return assemble(self.code.with_values(params), self.D).matrix

    def project(self, params):
        return np.clip(params, 0.0, 1.0)

    def wrap(self, params):
        return self.code.with_values(params)


@dataclass(frozen=True)
class MatrixModel:
    """Search space of general matrices with unit-norm columns."""

    init: np.ndarray

    @property
    def params(self):
        return np.array(self.init, dtype=float)

    def matrix(self, params):
        return params

    def project(self, params):
        return normalize_columns(params)

    def wrap(self, params):
        return params


def mean_squared_error(A, X, noise, eps, solver=None):
    """Mean over rows of ``X`` of the squared basis-pursuit recovery error."""
    Y = A @ X.T + noise.T
    res = BasisPursuit(A, solver).solve_many(Y, eps)
    return float(np.mean([np.sum((r.xhat - x) ** 2) for r, x in zip(res, X)]))


def fixed_noise(m, count, eps, seed):
    """``(count, m)`` bounded noise draws, one stream per vector."""
    return np.stack([add_bounded_noise(np.zeros(m), eps, seed, i) for i in range(count)])


def mmse_random_search(model, train, eps, cfg=None, solver=None, map_fn=map):
    """Random search minimizing the mean squared basis-pursuit error on ``train``.

    Each iteration perturbs the current parameters with ``samples_per_iter``
    Gaussian draws of scale ``sigma0 * decay**it``, projects them onto the
    model's feasible set, and accepts the best candidate only when it is
    strictly better. Candidate ``j`` of iteration ``it`` uses its own random
    stream, so ``map_fn`` may evaluate candidates in any order or in
    parallel. A candidate whose evaluation fails scores ``inf``.
    """
    cfg = cfg or SearchConfig()
    if len(train) == 0:
        raise StructuralError("training set is empty")
    X = train.vectors
    params = model.project(model.params)
    A0 = model.matrix(params)
    if A0.shape[1] != X.shape[1]:
        raise StructuralError(f"model has {A0.shape[1]} columns, training vectors have {X.shape[1]}")
    noise = fixed_noise(A0.shape[0], X.shape[0], eps, cfg.seed)

    def evaluate(p):
        try:
            return mean_squared_error(model.matrix(p), X, noise, eps, solver)
        except (BoundlabError, ArithmeticError, ValueError, np.linalg.LinAlgError):
            return np.inf

    f0 = evaluate(params)
    best_p, best_f = params, f0
    history = []
    for it in range(cfg.iters):
        sigma = cfg.perturb_sigma0 * cfg.sigma_decay**it
        cands = [
            model.project(best_p + sigma * stream_rng(cfg.seed, 1, it, j).standard_normal(best_p.shape))
            for j in range(cfg.samples_per_iter)
        ]
        scores = list(map_fn(evaluate, cands))
        j = int(np.argmin(scores))
        if scores[j] < best_f:
            best_p, best_f = cands[j], scores[j]
        history.append(best_f)
    improved = best_f < f0
    return DesignReport(
        best=model.wrap(best_p if improved else params),
        objective_history=history,
        initial_objective=f0,
        final_objective=best_f,
        improved=improved,
    )


__all__ = [
    "DescentConfig",
    "SearchConfig",
    "DesignReport",
    "CactiModel",
    "MatrixModel",
    "cacti_entry_gradient",
    "cacti_coherence_gradient",
    "general_coherence_gradient",
    "cacti_avg_coherence_gradient",
    "general_avg_coherence_gradient",
    "design_cacti_coherence",
    "design_general_coherence",
    "design_avg_coherence",
    "mmse_random_search",
    "mean_squared_error",
    "fixed_noise",
    "gen_support_pool",
]
