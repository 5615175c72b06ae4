import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from boundlab.errors import DegenerateInputError, SingularityError, StructuralError
from boundlab.linalg import (
    batch_extreme_abs_eig,
    least_squares,
    normalize_columns,
    sym_extreme_abs_eig,
)
from oracles import jacobi_eigenvalues, normal_equations


class TestExtremeEig:
    def test_identity(self):
        assert sym_extreme_abs_eig(np.eye(3)) == pytest.approx(1.0)

    def test_diagonal(self):
        assert sym_extreme_abs_eig(np.diag([2.0, -3.0])) == pytest.approx(3.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_jacobi(self, seed):
        B = np.random.default_rng(seed).standard_normal((6, 6))
        S = B + B.T
        ref = np.max(np.abs(jacobi_eigenvalues(S)))
        assert abs(sym_extreme_abs_eig(S) - ref) <= 1e-10

    def test_rejects_asymmetric(self):
        with pytest.raises(StructuralError):
            sym_extreme_abs_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(StructuralError):
            sym_extreme_abs_eig(np.ones((2, 3)))

    def test_batch_agrees(self):
        rng = np.random.default_rng(3)
        B = rng.standard_normal((7, 4, 4))
        S = B + B.transpose(0, 2, 1)
        np.testing.assert_allclose(batch_extreme_abs_eig(S), [sym_extreme_abs_eig(s) for s in S], rtol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(arrays(np.float64, (4, 4), elements=st.floats(-10, 10)))
    def test_bounded_by_frobenius(self, B):
        S = B + B.T
        v = sym_extreme_abs_eig(S)
        assert 0 <= v <= np.linalg.norm(S) * (1 + 1e-12) + 1e-12


class TestLeastSquares:
    def test_identity(self):
        y = np.array([1.0, -2.0, 3.0])
        np.testing.assert_allclose(least_squares(np.eye(3), y), y)

    def test_orthonormal_columns(self):
        Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((6, 3)))
        y = np.arange(6.0)
        np.testing.assert_allclose(least_squares(Q, y), Q.T @ y, atol=1e-12)

    def test_matches_normal_equations(self):
        rng = np.random.default_rng(1)
        A, y = rng.standard_normal((8, 3)), rng.standard_normal(8)
        np.testing.assert_allclose(least_squares(A, y), normal_equations(A, y), atol=1e-8)

    def test_singular(self):
        A = np.ones((4, 2))
        with pytest.raises(SingularityError) as exc:
            least_squares(A, np.ones(4))
        assert exc.value.condition > 1e10

    def test_shape_mismatch(self):
        with pytest.raises(StructuralError):
            least_squares(np.eye(3), np.ones(4))

    def test_nonfinite(self):
        with pytest.raises(StructuralError):
            least_squares(np.array([[np.nan, 0.0], [0.0, 1.0]]), np.ones(2))


class TestNormalize:
    def test_unit_columns(self):
        A = normalize_columns(np.random.default_rng(0).standard_normal((5, 7)))
        np.testing.assert_allclose(np.linalg.norm(A, axis=0), 1.0)

    def test_zero_column(self):
        with pytest.raises(DegenerateInputError):
            normalize_columns(np.zeros((3, 2)))
