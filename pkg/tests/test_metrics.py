import itertools

import numpy as np
import pytest

from boundlab.cacti import CactiCode, assemble, random_code
from boundlab.errors import BudgetError, DegenerateInputError
from boundlab.linalg import normalize_columns
from boundlab.metrics import (
    average_coherence_sq,
    coherence,
    normalized_gram,
    omega,
    restricted_eigenvalue,
    restricted_eigenvalues,
    ric,
)
from boundlab.signals import dct2_basis
from oracles import brute_force_ric, grid_l1_ball_min, pairwise_max_dot


class TestCoherence:
    def test_identity(self):
        assert coherence(np.eye(4)) == 0.0

    def test_duplicate_column(self):
        A = np.random.default_rng(0).standard_normal((5, 3))
        A[:, 2] = -2 * A[:, 0]
        assert coherence(A) == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(4))
    def test_pairwise_oracle(self, seed):
        A = np.random.default_rng(seed).standard_normal((6, 9))
        assert coherence(A) == pytest.approx(pairwise_max_dot(A), abs=1e-14)

    def test_zero_column(self):
        with pytest.raises(DegenerateInputError):
            coherence(np.zeros((3, 2)))

    def test_random_cacti_range(self):
        # uniform positive masks give coherence near 0.8-0.9
        vals = [coherence(assemble(random_code(8, 8, [(5, 3), (6, 0)], seed=s), dct2_basis(8, 8)).matrix)
                for s in range(10)]
        assert 0.7 <= np.median(vals) <= 0.95


class TestAverageCoherence:
    def test_orthogonal(self):
        assert average_coherence_sq(np.eye(3)) == 0.0

    def test_identical(self):
        assert average_coherence_sq(np.ones((3, 4))) == pytest.approx(1.0)

    def test_two_columns(self):
        A = np.random.default_rng(1).standard_normal((4, 2))
        assert average_coherence_sq(A) == pytest.approx(coherence(A) ** 2)

    def test_loop_oracle(self):
        A = np.random.default_rng(2).standard_normal((5, 6))
        U = A / np.linalg.norm(A, axis=0)
        pairs = [(i, j) for i in range(6) for j in range(6) if i != j]
        ref = np.mean([(U[:, i] @ U[:, j]) ** 2 for i, j in pairs])
        assert average_coherence_sq(A) == pytest.approx(ref, rel=1e-12)


class TestNormalizedGram:
    def test_identity_gram(self):
        c = CactiCode(3, 3, np.ones(9), [(0, 0)])
        g = normalized_gram(assemble(c, dct2_basis(3, 3)))
        assert g.max_offdiag() <= 1e-12

    def test_max_is_coherence(self):
        c = random_code(4, 4, [(1, 2), (3, 0)], seed=3)
        ed = assemble(c, dct2_basis(4, 4))
        assert normalized_gram(ed).max_offdiag() == pytest.approx(coherence(ed.matrix), abs=1e-14)

    def test_symmetry(self):
        c = random_code(3, 4, [(0, 1), (2, 2), (1, 3)], seed=4)
        g = normalized_gram(assemble(c, dct2_basis(3, 4)))
        for mu, nu, b, gm in [(0, 1, 2, 5), (2, 0, 11, 3), (1, 1, 4, 7)]:
            assert g.entry(mu, b, nu, gm) == pytest.approx(g.entry(nu, gm, mu, b), abs=1e-15)

    def test_argmax(self):
        c = random_code(3, 3, [(0, 1), (2, 2)], seed=0)
        g = normalized_gram(assemble(c, dct2_basis(3, 3)))
        assert abs(g.entry(*g.argmax_offdiag())) == pytest.approx(g.max_offdiag())

    def test_zero_column_named(self):
        c = CactiCode(2, 2, [0.0, 1.0, 1.0, 1.0], [(0, 0)])
        with pytest.raises(DegenerateInputError, match="block 0"):
            normalized_gram(assemble(c, np.eye(4)))


class TestRic:
    def test_orthonormal(self):
        Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((6, 4)))
        assert ric(Q, 3).delta <= 1e-12

    def test_s1(self):
        A = np.random.default_rng(1).standard_normal((5, 7))
        ref = np.max(np.abs(np.sum(A * A, axis=0) - 1))
        assert ric(A, 1).delta == pytest.approx(ref, rel=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_s2_is_coherence(self, seed):
        A = normalize_columns(np.random.default_rng(seed).standard_normal((8, 12)))
        assert abs(ric(A, 2).delta - pairwise_max_dot(A)) <= 1e-10

    def test_brute_force_oracle(self):
        A = np.random.default_rng(3).standard_normal((5, 7)) / np.sqrt(5)
        rep = ric(A, 3)
        assert rep.delta == pytest.approx(brute_force_ric(A, 3), abs=1e-10)
        assert rep.supports_enumerated == 35
        assert restricted_eigenvalue(A, rep.argmax_support) == pytest.approx(rep.delta)

    def test_budget(self):
        with pytest.raises(BudgetError):
            ric(np.eye(30), 10, limit=1000)


class TestRestrictedEigenvalue:
    def test_orthonormal(self):
        assert restricted_eigenvalue(np.eye(5), [0, 2, 3]) <= 1e-15

    def test_unit_column(self):
        assert restricted_eigenvalue(normalize_columns(np.ones((3, 1))), [0]) <= 1e-15

    def test_max_equals_ric(self):
        A = np.random.default_rng(4).standard_normal((4, 6)) / 2
        supports = list(itertools.combinations(range(6), 2))
        assert max(restricted_eigenvalues(A, supports)) == pytest.approx(ric(A, 2).delta, abs=1e-14)


class TestOmega:
    def test_unit_columns_s1(self):
        A = normalize_columns(np.random.default_rng(0).standard_normal((4, 6)))
        assert omega(A, 1) == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(3))
    def test_s1_min_norm(self, seed):
        A = np.random.default_rng(seed).standard_normal((5, 8))
        assert omega(A, 1) == pytest.approx(np.min(np.linalg.norm(A, axis=0)), abs=1e-8)

    @pytest.mark.parametrize("seed", range(2))
    def test_matches_grid(self, seed):
        A = np.random.default_rng(seed).standard_normal((3, 4))
        ref = min(grid_l1_ball_min(A[:, i], np.delete(A, i, axis=1), 1.0, 2e-3) for i in range(4))
        assert abs(omega(A, 2) - ref) <= 2e-3

    def test_nonincreasing_in_s(self):
        A = normalize_columns(np.random.default_rng(5).standard_normal((10, 30)))
        vals = [omega(A, s) for s in (1, 1.5, 2, 3)]
        assert all(a >= b - 1e-9 for a, b in zip(vals, vals[1:]))
