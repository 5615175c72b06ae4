"""Constrained l1 solvers.

* :func:`basis_pursuit` solves ``min ||x||_1  s.t.  ||A x - y||_2 <= eps``
  with ADMM, followed by an exact polish on the detected support that also
  yields an optimality certificate.
* :func:`l1_ball_residual_min` solves ``min ||t - B lam||_2  s.t.
  ||lam||_1 <= r`` with accelerated projected gradient and a Frank-Wolfe
  duality gap as stopping rule.
* :func:`oracle_recover` is least squares on a known support.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ConvergenceError, StructuralError
from .linalg import as_matrix, as_vector, least_squares

#: Radius used for the equality-constrained program (``eps == 0``).
EQUALITY_EPS = 1e-12

_CHECK_EVERY = 10
_POLISH_EVERY = 50
_RELAX = 1.6


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 20000
    abs_tol: float = 1e-9
    rel_tol: float = 1e-7
    penalty: float = 1.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise StructuralError("max_iters must be >= 1")
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.penalty > 0):
            raise StructuralError("tolerances and penalty must be positive")


@dataclass
class RecoveryResult:
    xhat: np.ndarray
    residual_norm: float
    l1_value: float
    iterations: int
    converged: bool
    certified: bool = False


def soft_threshold(v, tau):
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def project_l2_ball(v, radius):
    """Project the columns of ``v`` onto the l2 ball of the given radius."""
    norms = np.linalg.norm(v, axis=0)
    scale = np.where(norms > radius, radius / np.maximum(norms, 1e-300), 1.0)
    return v * scale


def project_l1_ball(v, radius):
    """Euclidean projection onto ``{x : ||x||_1 <= radius}``.

    Works on a vector or column-wise on a 2-D array, using the sort-based
    threshold search of Duchi et al. (2008).
    """
    v = np.asarray(v, dtype=float)
    if radius < 0:
        raise StructuralError("radius must be >= 0")
    squeeze = v.ndim == 1
    V = v[:, None] if squeeze else v
    if radius == 0:
        out = np.zeros_like(V)
    else:
        a = np.abs(V)
        inside = a.sum(axis=0) <= radius
        u = -np.sort(-a, axis=0)
        css = np.cumsum(u, axis=0) - radius
        j = np.arange(1, V.shape[0] + 1)[:, None]
        cond = u - css / j > 0
        cond[0] = True  # holds exactly (it reads radius > 0) but can round away
        rho = V.shape[0] - 1 - np.argmax(cond[::-1], axis=0)
        theta = np.maximum(css[rho, np.arange(V.shape[1])] / (rho + 1), 0.0)
        theta = np.where(inside, 0.0, theta)
        out = np.sign(V) * np.maximum(a - theta, 0.0)
    return out[:, 0] if squeeze else out


class BasisPursuit:
    """Basis-pursuit solver bound to one matrix; reusable across right-hand sides.

    The ADMM splitting is ``z = x`` (l1 term) and ``w = A x - y`` (ball
    constraint). Both blocks share one penalty, so the x-update system
    ``(I + A^T A)`` never changes and is factored once; the penalty is tuned
    per column by residual balancing.
    """

    def __init__(self, A, cfg=None):
        self.A = as_matrix(A)
        if not np.any(self.A):
            raise StructuralError("A is identically zero")
        self.cfg = cfg or SolverConfig()
        m, n = self.A.shape
        if m < n:
            self._K = np.linalg.inv(np.eye(m) + self.A @ self.A.T)
            self._P = None
        else:
            self._K = None
            self._P = np.linalg.inv(np.eye(n) + self.A.T @ self.A)

    def _solve_normal(self, V):
        if self._P is not None:
            return self._P @ V
        A = self.A
        return V - A.T @ (self._K @ (A @ V))

    def solve(self, y, eps):
        """Solve for one measurement vector; returns a :class:`RecoveryResult`."""
        y = as_vector(y, "y")
        return self.solve_many(y[:, None], eps)[0]

    def solve_many(self, Y, eps):
        """Solve independently for every column of ``Y``.

        Columns are iterated together and dropped from the working set as
        soon as they meet the ADMM stopping rule or the support polish
        certifies them, so the result for a column only depends on the
        columns of ``Y`` passed in the same call.
        """
        A, cfg = self.A, self.cfg
        Y = np.asarray(Y, dtype=float)
        if Y.ndim != 2 or Y.shape[0] != A.shape[0]:
            raise StructuralError(f"Y must have shape ({A.shape[0]}, b), got {Y.shape}")
        if eps < 0:
            raise StructuralError("eps must be >= 0")
        radius = eps if eps > 0 else EQUALITY_EPS
        m, n = A.shape
        b = Y.shape[1]

        out_z = np.zeros((n, b))
        out_iters = np.full(b, cfg.max_iters)
        out_ok = np.zeros(b, dtype=bool)
        polished = {}

        cols = np.arange(b)
        Yw = Y.copy()
        z = np.zeros((n, b))
        w = project_l2_ball(-Yw, radius)
        u = np.zeros((n, b))
        v = np.zeros((m, b))
        rho = np.full(b, float(cfg.penalty))
        last_pattern = np.zeros((n, b))
        tried = np.full((n, b), 2.0)
        sq_pri = np.sqrt(n + m)
        sq_dual = np.sqrt(n)

        for it in range(1, cfg.max_iters + 1):
            x = self._solve_normal(z - u + A.T @ (Yw + w - v))
            Ax = A @ x
            z_old, w_old = z, w
            # over-relaxation
            xr = _RELAX * x + (1 - _RELAX) * z_old
            wr = _RELAX * (Ax - Yw) + (1 - _RELAX) * w_old
            z = soft_threshold(xr + u, 1.0 / rho)
            w = project_l2_ball(wr + v, radius)
            u = u + xr - z
            v = v + wr - w
            if it % _CHECK_EVERY and it != cfg.max_iters:
                continue
            rx = x - z
            rw = Ax - Yw - w
            r_pri = np.sqrt(np.sum(rx**2, axis=0) + np.sum(rw**2, axis=0))
            s_dual = rho * np.linalg.norm((z - z_old) + A.T @ (w - w_old), axis=0)
            e_pri = sq_pri * cfg.abs_tol + cfg.rel_tol * np.maximum(
                np.sqrt(np.sum(x**2, axis=0) + np.sum(Ax**2, axis=0)),
                np.sqrt(np.sum(z**2, axis=0) + np.sum((w + Yw) ** 2, axis=0)),
            )
            e_dual = sq_dual * cfg.abs_tol + cfg.rel_tol * rho * np.linalg.norm(u + A.T @ v, axis=0)
            finished = (r_pri <= e_pri) & (s_dual <= e_dual)
            out_ok[cols[finished]] = True
            if it % _POLISH_EVERY == 0:
                pattern = np.sign(z)
                stable = ~finished & np.all(pattern == last_pattern, axis=0)
                stable &= ~np.all(pattern == tried, axis=0)
                last_pattern = pattern
                for j in np.flatnonzero(stable):
                    tried[:, j] = pattern[:, j]
                    xp = _polish(A, Yw[:, j], z[:, j], radius, max_swaps=20)
                    if xp is not None:
                        polished[int(cols[j])] = xp
                        finished[j] = True
            if np.any(finished):
                out_z[:, cols[finished]] = z[:, finished]
                out_iters[cols[finished]] = it
                keep = ~finished
                if not keep.any():
                    cols = cols[keep]
                    break
                cols = cols[keep]
                Yw, z, w, u, v, rho = Yw[:, keep], z[:, keep], w[:, keep], u[:, keep], v[:, keep], rho[keep]
                last_pattern, tried = last_pattern[:, keep], tried[:, keep]
                finished = finished[keep]
                r_pri, s_dual = r_pri[keep], s_dual[keep]
            # residual balancing; scaled duals rescale inversely with rho
            factor = np.where(r_pri > 10 * s_dual, 2.0, np.where(s_dual > 10 * r_pri, 0.5, 1.0))
            rho = rho * factor
            u = u / factor
            v = v / factor
        if cols.size:
            out_z[:, cols] = z

        return [
            self._finish(out_z[:, j], Y[:, j], radius, bool(out_ok[j]), int(out_iters[j]), polished.get(j))
            for j in range(b)
        ]

    def _finish(self, z, y, radius, admm_ok, iters, polished=None):
        A, cfg = self.A, self.cfg
        if polished is None:
            polished = _polish(A, y, z, radius)
        certified = polished is not None
        xhat = polished if certified else z
        res = float(np.linalg.norm(A @ xhat - y))
        if not certified and res > radius:
            xhat = _pull_to_feasible(A, y, xhat, radius)
            res = float(np.linalg.norm(A @ xhat - y))
        feasible = res <= 1.01 * radius + cfg.abs_tol
        return RecoveryResult(
            xhat=xhat,
            residual_norm=res,
            l1_value=float(np.abs(xhat).sum()),
            iterations=iters,
            converged=bool((admm_ok or certified) and feasible),
            certified=certified,
        )


def _polish(A, y, z, radius, max_swaps=None):
    """Exact optimum reached by an active-set walk started from ``z``.

    With support ``S`` and signs ``sg`` fixed, the program is a linear
    objective over an ellipsoid with closed-form solution
    ``x_S = x_ls - t G^{-1} sg``. The walk drops indices whose sign flips and
    adds the worst off-support KKT violator until ``|a_j^T r| <= t`` holds
    everywhere, which certifies global optimality. Returns ``None`` if no
    certificate is found.
    """
    m = A.shape[0]
    if np.linalg.norm(y) <= radius:
        return np.zeros_like(z)
    S = list(np.flatnonzero(z))
    sg = {int(i): float(np.sign(z[i])) for i in S}
    if not S:
        corr = A.T @ y
        j = int(np.argmax(np.abs(corr)))
        S, sg = [j], {j: float(np.sign(corr[j]))}
    max_swaps = max_swaps or 2 * m
    for _ in range(max_swaps):
        if len(S) > m:
            return None
        idx = np.array(S)
        AS = A[:, idx]
        s = np.array([sg[i] for i in S])
        try:
            fac = cho_factor(AS.T @ AS)
        except np.linalg.LinAlgError:
            return None
        x_ls = cho_solve(fac, AS.T @ y)
        r_ls = y - AS @ x_ls
        slack = radius**2 - r_ls @ r_ls
        if slack < 0:
            # support too small to fit y within the tube: grow it
            corr = A.T @ r_ls
            corr[idx] = 0.0
            j = int(np.argmax(np.abs(corr)))
            S.append(j)
            sg[j] = float(np.sign(corr[j]))
            continue
        d = cho_solve(fac, s)
        q = s @ d
        if q <= 0:
            return None
        t = np.sqrt(slack / q)
        xS = x_ls - t * d
        flipped = np.sign(xS) != s
        if np.any(flipped):
            S = [i for i, f in zip(S, flipped) if not f]
            if not S:
                return None
            continue
        x = np.zeros_like(z)
        x[idx] = xS
        r = y - A @ x
        corr = A.T @ r
        viol = np.abs(corr)
        viol[idx] = 0.0
        j = int(np.argmax(viol))
        if viol[j] <= t * (1 + 1e-9) + 1e-15:
            return x
        S.append(j)
        sg[j] = float(np.sign(corr[j]))
    return None


def _pull_to_feasible(A, y, x, radius):
    """Move ``x`` toward a least-squares fit until it enters the tube.

    The fit uses the support of ``x``, grown greedily by residual
    correlation until the fit itself is feasible.
    """
    m = A.shape[0]
    S = list(np.flatnonzero(x))
    while True:
        if len(S) > m:
            return x
        if S:
            AS = A[:, S]
            try:
                x_ls = least_squares(AS, y)
            except Exception:
                return x
            r1 = AS @ x_ls - y
        else:
            x_ls = np.zeros(0)
            r1 = -y
        if r1 @ r1 <= radius**2:
            break
        corr = A.T @ r1
        corr[S] = 0.0
        S.append(int(np.argmax(np.abs(corr))))
    if not S:
        return np.zeros_like(x)
    r0 = A[:, S] @ x[S] - y
    d = r1 - r0
    a, bq, c = d @ d, 2 * (r0 @ d), r0 @ r0 - radius**2
    if a == 0:
        return x
    # smaller root of the convex quadratic = first point inside the ball
    t = min(1.0, max(0.0, (-bq - np.sqrt(max(bq * bq - 4 * a * c, 0.0))) / (2 * a)))
    out = x.copy()
    out[S] = (1 - t) * x[S] + t * x_ls
    return out


def basis_pursuit(A, y, eps, cfg=None):
    """``argmin ||x||_1`` subject to ``||y - A x||_2 <= eps``.

    ``eps == 0`` requests the equality-constrained program, solved as a ball
    of radius ``EQUALITY_EPS``. Non-convergence is reported through
    ``result.converged``, never raised.
    """
    return BasisPursuit(A, cfg).solve(y, eps)


def _l1_ball_lsq(B, T, radius, exclude=None, max_iters=20000, tol=1e-7):
    """Column-wise ``min_{||lam||_1 <= radius} ||T[:, j] - B lam||_2``.

    ``exclude[j]``, when given, is an index of ``lam`` pinned to zero for
    column ``j``. Accelerated projected gradient (FISTA with adaptive
    restart) runs until either a rescaled-residual dual bound brackets the
    value within ``tol`` or the support of the iterate, solved exactly,
    passes the KKT test. Returns ``(values, converged)``.
    """
    B = np.asarray(B, dtype=float)
    T = np.asarray(T, dtype=float)
    n = B.shape[1]
    b = T.shape[1]
    if radius == 0 or n == 0:
        return np.linalg.norm(T, axis=0), np.ones(b, dtype=bool)
    mask = np.ones((n, b))
    if exclude is not None:
        mask[np.asarray(exclude), np.arange(b)] = 0.0
    L = np.linalg.norm(B, 2) ** 2
    if L == 0:
        return np.linalg.norm(T, axis=0), np.ones(b, dtype=bool)
    step = 1.0 / L
    BtT = B.T @ T
    BtB = B.T @ B

    def fval(lam):
        R = T - B @ lam
        return 0.5 * np.sum(R * R, axis=0)

    lam = np.zeros((n, b))
    yk = lam.copy()
    tk = np.ones(b)
    f_prev = fval(lam)
    values = np.sqrt(2 * f_prev)
    converged = np.zeros(b, dtype=bool)
    exact = {}
    for it in range(1, max_iters + 1):
        lam_new = project_l1_ball(yk - step * ((BtB @ yk - BtT) * mask), radius) * mask
        f_new = fval(lam_new)
        t_new = 0.5 * (1 + np.sqrt(1 + 4 * tk * tk))
        yk = lam_new + ((tk - 1) / t_new) * (lam_new - lam)
        # adaptive restart keeps each column monotone
        restart = f_new > f_prev
        yk[:, restart] = lam_new[:, restart]
        t_new[restart] = 1.0
        lam, tk, f_prev = lam_new, t_new, f_new
        if it % _CHECK_EVERY and it != max_iters:
            continue
        R = T - B @ lam
        rt = np.sum(R * T, axis=0)
        rr = np.sum(R * R, axis=0)
        rinf = np.max(np.abs(B.T @ R) * mask, axis=0)
        c = np.maximum(rt - radius * rinf, 0.0) / np.maximum(rr, 1e-300)
        dual = c * (rt - radius * rinf) - 0.5 * c * c * rr
        upper = np.sqrt(2 * f_new)
        lower = np.sqrt(np.maximum(2 * dual, 0.0))
        values = np.where(converged, values, upper)
        converged |= upper - lower <= tol
        if it % _POLISH_EVERY == 0 or it == max_iters:
            for j in np.flatnonzero(~converged):
                skip = None if exclude is None else int(np.asarray(exclude)[j])
                v = _l1_ball_active_set(B, T[:, j], radius, lam[:, j], skip)
                if v is not None:
                    exact[int(j)] = v
                    converged[j] = True
        if converged.all():
            break
    for j, v in exact.items():
        values[j] = v
    return values, converged


def _l1_ball_active_set(B, t, radius, lam, skip=None):
    """Exact value on the support and signs of ``lam`` if KKT-certified."""
    S = np.flatnonzero(lam)
    if S.size == 0 or S.size > B.shape[0]:
        return None
    BS = B[:, S]
    s = np.sign(lam[S])
    try:
        fac = cho_factor(BS.T @ BS)
    except np.linalg.LinAlgError:
        return None
    a = cho_solve(fac, BS.T @ t)
    d = cho_solve(fac, s)
    if np.abs(a).sum() <= radius and np.all(np.sign(a) == s):
        # interior: unconstrained fit, needs a vanishing gradient off support
        lamS, nu = a, 0.0
    else:
        q = s @ d
        if q <= 0:
            return None
        nu = (s @ a - radius) / q
        if nu < 0:
            return None
        lamS = a - nu * d
    if np.any(np.sign(lamS) != s):
        return None
    r = t - BS @ lamS
    corr = np.abs(B.T @ r)
    corr[S] = 0.0
    if skip is not None:
        corr[skip] = 0.0
    if np.any(corr > nu * (1 + 1e-9) + 1e-12):
        return None
    return float(np.linalg.norm(r))


def l1_ball_residual_min(target, A_rest, radius, cfg=None, tol=1e-7):
    """``min ||target - A_rest lam||_2`` over ``||lam||_1 <= radius``.

    Raises
    ------
    ConvergenceError
        If the duality gap does not close within ``cfg.max_iters``.
    """
    cfg = cfg or SolverConfig()
    target = as_vector(target, "target")
    A_rest = np.asarray(A_rest, dtype=float).reshape(target.shape[0], -1)
    if radius < 0:
        raise StructuralError("radius must be >= 0")
    vals, ok = _l1_ball_lsq(A_rest, target[:, None], radius, max_iters=cfg.max_iters, tol=tol)
    if not ok[0]:
        raise ConvergenceError("l1-ball residual minimization did not converge")
    return float(vals[0])


def oracle_recover(A, y, support):
    """Least squares restricted to a known support, embedded in ``R^n``."""
    A = as_matrix(A)
    y = as_vector(y, "y")
    S = np.asarray(sorted(support), dtype=int)
    if S.size and (S.min() < 0 or S.max() >= A.shape[1]):
        raise StructuralError("support index out of range")
    if S.size > A.shape[0]:
        raise StructuralError(f"support of size {S.size} exceeds {A.shape[0]} rows")
    x = np.zeros(A.shape[1])
    if S.size:
        x[S] = least_squares(A[:, S], y)
    return x
