"""Experiment drivers.

Each driver turns an :class:`ExperimentConfig` into a :class:`ResultTable`
of per-vector rows. Every random quantity is drawn from a stream keyed by
the config seed and a fixed tag, and vectors are processed in fixed-size
chunks, so the rows do not depend on the worker count.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..bounds import (
    STEP_NAMES,
    cai_bound,
    max_sparsity_for_coherence,
    studer_trace,
    tang_bound,
)
from ..cacti import CactiCode, assemble
from ..design import (
    CactiModel,
    MatrixModel,
    design_avg_coherence,
    design_cacti_coherence,
    design_general_coherence,
    fixed_noise,
    mmse_random_search,
)
from ..errors import InapplicableError
from ..linalg import normalize_columns
from ..metrics import coherence, omega, restricted_eigenvalues, ric
from ..signals import (
    dct2_basis,
    gen_sparse_dataset,
    gen_support_pool,
    rrmse,
    sparsity_count,
    stream_rng,
)
from ..solvers import BasisPursuit

#: Vectors per solver batch; fixed so results never depend on the worker count.
CHUNK = 25

# stream tags
_MATRIX, _CODE, _DATA, _NOISE, _POOL, _TRAIN, _TEST = range(1, 8)


@dataclass
class ResultTable:
    schema: tuple
    rows: list
    metadata: dict = field(default_factory=dict)
    group_by: tuple = ()
    metrics: tuple = ()
    figures: list = field(default_factory=list)

    def column(self, name):
        i = self.schema.index(name)
        return [r[i] for r in self.rows]


@dataclass(frozen=True)
class Figure:
    """Boxplot of ``metric`` with one box per distinct value of ``by``."""

    name: str
    metric: str
    by: tuple
    title: str
    log: bool = True


def thread_count():
    raw = os.environ.get("BOUNDLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def subseed(seed, *tags):
    return int(np.random.SeedSequence([seed, *tags]).generate_state(1)[0])


def parallel_map(fn, items, threads=None):
    threads = threads or thread_count()
    items = list(items)
    if threads == 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def recover(A, X, noise, eps, solver, threads=None):
    """Basis-pursuit recoveries for the rows of ``X`` with measurements ``A x + noise``."""
    bp = BasisPursuit(A, solver)
    Y = A @ X.T + noise.T
    chunks = [slice(i, min(i + CHUNK, X.shape[0])) for i in range(0, X.shape[0], CHUNK)]
    parts = parallel_map(lambda sl: bp.solve_many(Y[:, sl], eps), chunks, threads)
    return [r for part in parts for r in part]


def noise_for(m, count, eps, seed, tag):
    return fixed_noise(m, count, eps, subseed(seed, _NOISE, *tag))


def gaussian(m, n, seed, normalize):
    A = stream_rng(seed, _MATRIX).standard_normal((m, n))
    return normalize_columns(A) if normalize else A


def _codes(cfg):
    """Mask for each CACTI arm, designed from a common random initial code."""
    n1, n2 = cfg.dims["n1"], cfg.dims["n2"]
    D = dct2_basis(n1, n2)
    rng = stream_rng(cfg.seed, _CODE)
    init = CactiCode(n1, n2, 1.0 - rng.random(n1 * n2), cfg.shifts)
    out = {}
    for arm in cfg.arms:
        if arm == "random":
            out[arm] = init
        elif arm == "coherence":
            out[arm] = design_cacti_coherence(init, D, cfg.descent).best
        elif arm == "avg-coherence":
            out[arm] = design_avg_coherence(init, D, cfg.descent).best
    return out, D


def _meta(cfg, **extra):
    meta = {"experiment": cfg.experiment, "seed": cfg.seed, "scaled": cfg.scaled}
    if cfg.label:
        meta["label"] = cfg.label
    meta.update(extra)
    return meta


# ---------------------------------------------------------------- CACTI


def run_cacti_rrmse(cfg, threads=None):
    codes, D = _codes(cfg)
    n, T = cfg.dims["n1"] * cfg.dims["n2"], cfg.T
    rows = []
    mus = {}
    for arm, code in codes.items():
        A = assemble(code, D).matrix
        mu = coherence(A)
        mus[arm] = mu
        for si, s in enumerate(cfg.sparsities):
            k = sparsity_count(s, n * T)
            ds = gen_sparse_dataset(n * T, k, cfg.num_vectors, seed=subseed(cfg.seed, _DATA, si))
            noise = noise_for(n, cfg.num_vectors, cfg.eps, cfg.seed, (si,))
            res = recover(A, ds.vectors, noise, cfg.eps, cfg.solver, threads)
            for i, (r, x) in enumerate(zip(res, ds.vectors)):
                rows.append((arm, T, s, k, i, rrmse(r.xhat, x), mu, int(r.converged)))
    return ResultTable(
        schema=("arm", "T", "sparsity", "k", "vector_id", "rrmse", "coherence", "converged"),
        rows=rows,
        metadata=_meta(cfg, coherence=mus),
        group_by=("arm", "sparsity"),
        metrics=("rrmse",),
        figures=[Figure("rrmse", "rrmse", ("sparsity", "arm"), f"RRMSE, T = {T}")],
    )


def run_cacti_eigen(cfg, threads=None):
    codes, D = _codes(cfg)
    n, T = cfg.dims["n1"] * cfg.dims["n2"], cfg.T
    rows = []
    for arm, code in codes.items():
        A = normalize_columns(assemble(code, D).matrix)
        mu = coherence(A)
        for si, s in enumerate(cfg.sparsities):
            k = sparsity_count(s, n * T)
            ds = gen_sparse_dataset(n * T, k, cfg.num_vectors, seed=subseed(cfg.seed, _DATA, si))
            lam = restricted_eigenvalues(A, ds.supports)
            for i, v in enumerate(lam):
                rows.append((arm, T, s, k, i, float(v), mu))
    return ResultTable(
        schema=("arm", "T", "sparsity", "k", "vector_id", "restricted_eig", "coherence"),
        rows=rows,
        metadata=_meta(cfg),
        group_by=("arm", "sparsity"),
        metrics=("restricted_eig",),
        figures=[Figure("eigen", "restricted_eig", ("sparsity", "arm"), f"|lambda_max|, T = {T}", log=False)],
    )


# ---------------------------------------------------------------- traces


def _min_margin(trace):
    m = trace.margins[np.isfinite(trace.margins)]
    return float(m.min()) if m.size and not trace.degenerate else float("nan")


def _trace_rows(arm, A, cfg, tag, threads):
    """Per-vector trace rows for unit-column ``A`` and ``n_x``-sparse data."""
    m, n = A.shape
    mu = coherence(A)
    n_x = max_sparsity_for_coherence(mu)
    if n_x < 1:
        raise InapplicableError(f"{arm}: coherence {mu:.6g} admits no sparsity level")
    ds = gen_sparse_dataset(n, n_x, cfg.num_vectors, seed=subseed(cfg.seed, _DATA, *tag))
    noise = noise_for(m, cfg.num_vectors, cfg.eta, cfg.seed, tag)
    res = recover(A, ds.vectors, noise, cfg.eps, cfg.solver, threads)
    rows = []
    for i, (r, x, e) in enumerate(zip(res, ds.vectors, noise)):
        t = studer_trace(A, x, r.xhat, A @ x + e, cfg.eps, cfg.eta, n_x, mu)
        rows.append(
            (arm, i, int(t.degenerate), *map(float, t.steps), t.error, t.bound,
             _min_margin(t), mu, n_x, cfg.eps, cfg.eta)
        )
    return rows


_TRACE_SCHEMA = ("arm", "vector_id", "degenerate", *STEP_NAMES, "error", "bound",
                 "min_margin", "mu", "n_x", "eps", "eta")


def _trace_table(cfg, rows, title):
    return ResultTable(
        schema=_TRACE_SCHEMA,
        rows=rows,
        metadata=_meta(cfg),
        group_by=("arm",),
        metrics=(*STEP_NAMES, "min_margin"),
        figures=[Figure("trace", "steps", ("arm",), title)],
    )


def run_trace_general(cfg, threads=None):
    m, n = cfg.dims["m"], cfg.dims["n"]
    A = gaussian(m, n, cfg.seed, normalize=True)
    return _trace_table(cfg, _trace_rows("random", A, cfg, (0,), threads), f"{m} x {n} Gaussian")


def run_trace_cacti(cfg, threads=None):
    codes, D = _codes(cfg)
    rows = []
    for j, (arm, code) in enumerate(codes.items()):
        A = normalize_columns(assemble(code, D).matrix)
        rows += _trace_rows(arm, A, cfg, (j,), threads)
    return _trace_table(cfg, rows, f"CACTI, T = {cfg.T}")


# ---------------------------------------------------------------- Tang / RIC


def _looseness_rows(A, k, tag, cfg, threads, bound):
    m, n = A.shape
    ds = gen_sparse_dataset(n, k, cfg.num_vectors, seed=subseed(cfg.seed, _DATA, *tag))
    noise = noise_for(m, cfg.num_vectors, cfg.eps, cfg.seed, tag)
    res = recover(A, ds.vectors, noise, cfg.eps, cfg.solver, threads)
    out = []
    for i, (r, x) in enumerate(zip(res, ds.vectors)):
        err = float(np.linalg.norm(r.xhat - x))
        out.append((i, err, (bound - err) / err if err > 0 else float("inf")))
    return out


def run_tang_looseness(cfg, threads=None):
    m, n = cfg.dims["m"], cfg.dims["n"]
    A = gaussian(m, n, cfg.seed, normalize=cfg.normalize)
    rows = []
    omegas = {}
    for si, s in enumerate(cfg.sparsities):
        k = sparsity_count(s, n)
        w = omegas.setdefault(k, omega(A, 2 * k, cfg.solver))
        b = tang_bound(w, k, cfg.eps)
        for i, err, rel in _looseness_rows(A, k, (si,), cfg, threads, b.value):
            rows.append((s, k, i, w, b.value, err, rel))
    return ResultTable(
        schema=("sparsity", "k", "vector_id", "omega", "bound", "error", "rel_diff"),
        rows=rows,
        metadata=_meta(cfg, omega={str(k): v for k, v in omegas.items()}),
        group_by=("sparsity",),
        metrics=("rel_diff",),
        figures=[Figure("tang", "rel_diff", ("sparsity",), f"Tang bound looseness, {m} x {n}")],
    )


def _ric_ks(cfg):
    n = cfg.dims["n"]
    ks = list(cfg.k) or [sparsity_count(s, n) for s in cfg.sparsities]
    return sorted(set(ks))


def run_ric_looseness(cfg, threads=None):
    m, n = cfg.dims["m"], cfg.dims["n"]
    A = gaussian(m, n, cfg.seed, normalize=cfg.normalize)
    rows = []
    deltas = {}
    for k in _ric_ks(cfg):
        rep = ric(A, k)
        deltas[str(k)] = rep.delta
        b = cai_bound(rep.delta, cfg.eps)
        if not b.applicable:
            raise InapplicableError(f"delta_{k} = {rep.delta:.6g} violates {b.condition}")
        for i, err, rel in _looseness_rows(A, k, (k,), cfg, threads, b.value):
            rows.append((k, i, rep.delta, b.value, err, rel))
    return ResultTable(
        schema=("k", "vector_id", "delta", "bound", "error", "rel_diff"),
        rows=rows,
        metadata=_meta(cfg, delta=deltas),
        group_by=("k",),
        metrics=("rel_diff",),
        figures=[Figure("ric", "rel_diff", ("k",), f"RIC bound looseness, {m} x {n}")],
    )


# ---------------------------------------------------------------- MSE design


def run_mmse_compare(cfg, threads=None):
    s = cfg.sparsities[0]
    if cfg.is_cacti:
        n1, n2 = cfg.dims["n1"], cfg.dims["n2"]
        D = dct2_basis(n1, n2)
        init = CactiCode(n1, n2, 1.0 - stream_rng(cfg.seed, _CODE).random(n1 * n2), cfg.shifts)
        model = CactiModel(init, D)
        coh = design_cacti_coherence(init, D, cfg.descent).best
        params = {"random": init.values, "coherence": coh.values}
    else:
        A0 = gaussian(cfg.dims["m"], cfg.dims["n"], cfg.seed, normalize=True)
        model = MatrixModel(A0)
        params = {"random": A0, "coherence": design_general_coherence(A0, cfg.descent).best}
    n = model.matrix(model.params).shape[1]
    k = sparsity_count(s, n)
    pool = gen_support_pool(n, k, cfg.z, subseed(cfg.seed, _POOL)) if cfg.z else None
    train = gen_sparse_dataset(n, k, cfg.train_vectors, pool=pool, seed=subseed(cfg.seed, _TRAIN))
    test = gen_sparse_dataset(n, k, cfg.num_vectors, pool=pool, seed=subseed(cfg.seed, _TEST))
    search = type(cfg.search)(**{**cfg.search.__dict__, "seed": subseed(cfg.seed, cfg.search.seed)})
    rep = mmse_random_search(
        model, train, cfg.eps, search, cfg.search_solver,
        map_fn=lambda f, xs: parallel_map(f, xs, threads),
    )
    params["mse"] = rep.best.values if cfg.is_cacti else rep.best
    rows = []
    mus = {}
    for arm in cfg.arms:
        A = model.matrix(params[arm])
        mus[arm] = coherence(A)
        noise = noise_for(A.shape[0], cfg.num_vectors, cfg.eps, cfg.seed, (0,))
        res = recover(A, test.vectors, noise, cfg.eps, cfg.solver, threads)
        for i, (r, x) in enumerate(zip(res, test.vectors)):
            rows.append((arm, s, k, i, float(np.sum((r.xhat - x) ** 2))))
    return ResultTable(
        schema=("arm", "sparsity", "k", "vector_id", "sse"),
        rows=rows,
        metadata=_meta(
            cfg,
            coherence=mus,
            search_history=[float(v) for v in rep.objective_history],
            search_initial=rep.initial_objective,
            pool=[list(p) for p in pool.sets] if pool else None,
        ),
        group_by=("arm",),
        metrics=("sse",),
        figures=[Figure("mmse", "sse", ("arm",), "Test-set squared error")],
    )


DRIVERS = {
    "cacti-rrmse": run_cacti_rrmse,
    "cacti-eigen": run_cacti_eigen,
    "trace-general": run_trace_general,
    "trace-cacti": run_trace_cacti,
    "tang-looseness": run_tang_looseness,
    "ric-looseness": run_ric_looseness,
    "mmse-compare": run_mmse_compare,
}


def expected_rows(cfg):
    """Row count implied by the config alone."""
    arms = len(cfg.arms)
    if cfg.experiment in ("cacti-rrmse", "cacti-eigen"):
        return arms * len(cfg.sparsities) * cfg.num_vectors
    if cfg.experiment in ("trace-general", "trace-cacti"):
        return arms * cfg.num_vectors
    if cfg.experiment == "tang-looseness":
        return len(cfg.sparsities) * cfg.num_vectors
    if cfg.experiment == "ric-looseness":
        return len(_ric_ks(cfg)) * cfg.num_vectors
    return arms * cfg.num_vectors


def run_experiment(cfg, threads=None):
    table = DRIVERS[cfg.experiment](cfg, threads)
    assert len(table.rows) == expected_rows(cfg)
    return table


__all__ = ["ResultTable", "Figure", "DRIVERS", "run_experiment", "expected_rows", "thread_count"]
