import numpy as np
import pytest

from boundlab.cacti import CactiCode, assemble, random_code
from boundlab.design import (
    CactiModel,
    DescentConfig,
    DesignReport,
    MatrixModel,
    SearchConfig,
    cacti_avg_coherence_gradient,
    cacti_coherence_gradient,
    cacti_entry_gradient,
    design_avg_coherence,
    design_cacti_coherence,
    design_general_coherence,
    general_avg_coherence_gradient,
    general_coherence_gradient,
    mmse_random_search,
)
from boundlab.errors import StructuralError
from boundlab.linalg import normalize_columns
from boundlab.metrics import average_coherence_sq, coherence
from boundlab.signals import dct2_basis, gen_sparse_dataset
from boundlab.solvers import SolverConfig
from oracles import central_difference, max_rel_dev

D8 = dct2_basis(8, 8)


def distinct_shifts(T, seed):
    rng = np.random.default_rng(seed)
    flat = rng.choice(64, size=T, replace=False)
    return [(int(f) // 8, int(f) % 8) for f in flat]


def instance(i):
    T = (2, 4, 6)[i % 3]
    return random_code(8, 8, distinct_shifts(T, 100 + i), seed=i)


def code_objective(code, measure):
    return lambda v: measure(assemble(code.with_values(v), D8).matrix)


class TestCactiGradients:
    @pytest.mark.parametrize("i", range(20))
    def test_coherence_fd(self, i):
        code = instance(i)
        g = cacti_coherence_gradient(code, D8)
        fd = central_difference(code_objective(code, coherence), code.values, h=1e-6)
        assert max_rel_dev(g, fd) <= 1e-5

    @pytest.mark.parametrize("i", range(0, 20, 4))
    def test_avg_coherence_fd(self, i):
        code = instance(i)
        g = cacti_avg_coherence_gradient(code, D8)
        fd = central_difference(code_objective(code, average_coherence_sq), code.values, h=1e-6)
        assert max_rel_dev(g, fd) <= 1e-5

    def test_scale_direction_flat(self):
        # the objective is scale invariant, so the gradient is orthogonal to the code
        code = instance(3)
        g = cacti_coherence_gradient(code, D8)
        assert abs(g @ code.values) <= 1e-10 * np.linalg.norm(g) * np.linalg.norm(code.values)

    def test_entry_gradient_diagonal(self):
        with pytest.raises(StructuralError):
            cacti_entry_gradient(instance(0), D8, 5, 5)

    def test_wrong_basis(self):
        with pytest.raises(StructuralError):
            cacti_coherence_gradient(instance(0), np.eye(10))


class TestGeneralGradients:
    @pytest.mark.parametrize("seed", range(5))
    def test_coherence_fd(self, seed):
        A = np.random.default_rng(seed).standard_normal((6, 10))
        fd = central_difference(coherence, A, h=1e-6)
        assert max_rel_dev(general_coherence_gradient(A), fd) <= 1e-5

    @pytest.mark.parametrize("seed", range(3))
    def test_avg_coherence_fd(self, seed):
        A = np.random.default_rng(seed).standard_normal((5, 8))
        fd = central_difference(average_coherence_sq, A, h=1e-6)
        assert max_rel_dev(general_avg_coherence_gradient(A), fd) <= 1e-5


class TestDescent:
    def test_zero_iters_returns_init(self):
        code = instance(0)
        rep = design_cacti_coherence(code, D8, DescentConfig(max_iters=0))
        assert rep.best.to_dict() == code.to_dict()
        assert rep.final_objective == rep.initial_objective

    def test_never_worse_and_nonnegative(self):
        code = instance(1)
        rep = design_cacti_coherence(code, D8, DescentConfig(restarts=2, max_iters=40))
        assert rep.final_objective <= rep.initial_objective
        assert np.all(rep.best.values >= 0)
        assert rep.best.shifts == code.shifts
        assert np.all(np.diff(rep.objective_history) <= 0)
        assert rep.final_objective == pytest.approx(coherence(assemble(rep.best, D8).matrix), abs=1e-15)

    def test_avg_coherence_decreases(self):
        code = instance(2)
        rep = design_avg_coherence(code, D8, DescentConfig(restarts=1, max_iters=30))
        assert rep.final_objective < rep.initial_objective

    def test_scale_invariance(self):
        code = instance(4)
        a = coherence(assemble(code, D8).matrix)
        b = coherence(assemble(code.with_values(7.5 * code.values), D8).matrix)
        assert abs(a - b) <= 1e-12

    def test_general(self):
        A = np.random.default_rng(0).standard_normal((8, 16))
        rep = design_general_coherence(A, DescentConfig(restarts=2, max_iters=50))
        assert rep.final_objective < rep.initial_objective
        assert np.allclose(np.linalg.norm(rep.best, axis=0), 1.0)

    def test_deterministic(self):
        code = instance(5)
        cfg = DescentConfig(restarts=3, max_iters=20, seed=4)
        a = design_cacti_coherence(code, D8, cfg)
        b = design_cacti_coherence(code, D8, cfg)
        assert a.to_json() == b.to_json()

    @pytest.mark.parametrize("kw", [{"restarts": 0}, {"max_iters": -1}, {"step_shrink": 1.0}, {"step_grow": 0.9}])
    def test_config_validation(self, kw):
        with pytest.raises(StructuralError):
            DescentConfig(**kw)


class TestReport:
    def test_json_roundtrip_code(self):
        rep = DesignReport(instance(0), [0.5, 0.4], 0.6, 0.4)
        back = DesignReport.from_json(rep.to_json())
        assert back.best.to_dict() == rep.best.to_dict() and back.objective_history == [0.5, 0.4]

    def test_json_roundtrip_matrix(self):
        A = np.random.default_rng(0).standard_normal((3, 4))
        back = DesignReport.from_json(DesignReport(A, [], 1.0, 1.0, improved=False).to_json())
        assert np.array_equal(back.best, A) and back.improved is False


@pytest.fixture(scope="module")
def setup():
    A = normalize_columns(np.random.default_rng(0).standard_normal((6, 12)))
    train = gen_sparse_dataset(12, 2, 8, seed=3)
    return A, train


class TestRandomSearch:
    def test_zero_iters(self, setup):
        A, train = setup
        rep = mmse_random_search(MatrixModel(A), train, 1e-5, SearchConfig(iters=0))
        assert np.allclose(rep.best, A, atol=1e-15) and rep.objective_history == []

    def test_history_monotone(self, setup):
        A, train = setup
        rep = mmse_random_search(MatrixModel(A), train, 1e-5, SearchConfig(iters=4, samples_per_iter=3),
                                 solver=SolverConfig(max_iters=500))
        h = rep.objective_history
        assert len(h) == 4 and all(b <= a for a, b in zip(h, h[1:]))
        assert rep.final_objective <= rep.initial_objective

    def test_map_fn_independent(self, setup):
        A, train = setup
        cfg = SearchConfig(iters=3, samples_per_iter=3, seed=2)
        sol = SolverConfig(max_iters=300)
        a = mmse_random_search(MatrixModel(A), train, 1e-5, cfg, sol)
        b = mmse_random_search(MatrixModel(A), train, 1e-5, cfg, sol,
                               map_fn=lambda f, xs: [f(x) for x in reversed(list(xs))][::-1])
        assert a.to_json() == b.to_json()

    def test_cacti_model_stays_in_box(self):
        code = random_code(4, 4, [(0, 0), (1, 2)], seed=0)
        model = CactiModel(code, dct2_basis(4, 4))
        train = gen_sparse_dataset(32, 2, 4, seed=1)
        rep = mmse_random_search(model, train, 1e-5, SearchConfig(iters=2, samples_per_iter=2, perturb_sigma0=1.0),
                                 solver=SolverConfig(max_iters=300))
        assert isinstance(rep.best, CactiCode)
        assert np.all((rep.best.values >= 0) & (rep.best.values <= 1))

    def test_column_mismatch(self, setup):
        A, _ = setup
        with pytest.raises(StructuralError):
            mmse_random_search(MatrixModel(A), gen_sparse_dataset(10, 2, 3, seed=0), 1e-5)
