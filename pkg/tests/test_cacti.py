import json

import numpy as np
import pytest

from boundlab.cacti import CactiCode, assemble, random_code, sense, shift_code
from boundlab.errors import StructuralError
from boundlab.signals import dct2_basis
from oracles import naive_effective_dictionary, naive_frame_masks


def code_2x2(shifts):
    # column-major vec of [[a, b], [c, d]] with a..d = 1..4
    return CactiCode(2, 2, [1.0, 3.0, 2.0, 4.0], shifts)


class TestShiftCode:
    def test_zero_shift(self):
        c = random_code(3, 4, [(0, 0)], seed=0)
        np.testing.assert_array_equal(shift_code(c, 0), c.values)

    def test_full_wrap(self):
        c = random_code(3, 4, [(3, 4)], seed=0)
        np.testing.assert_array_equal(shift_code(c, 0), c.values)

    def test_row_rotation(self):
        # [a b; c d] shifted down one row is [c d; a b]
        np.testing.assert_array_equal(shift_code(code_2x2([(1, 0)]), 0), [3.0, 1.0, 4.0, 2.0])

    def test_bad_index(self):
        with pytest.raises(StructuralError):
            shift_code(code_2x2([(0, 0)]), 1)

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_naive(self, seed):
        rng = np.random.default_rng(seed)
        shifts = [tuple(rng.integers(-9, 9, size=2)) for _ in range(3)]
        c = random_code(4, 5, shifts, seed=seed)
        for i, ref in enumerate(naive_frame_masks(c.values, 4, 5, shifts)):
            np.testing.assert_array_equal(shift_code(c, i), ref)
            np.testing.assert_array_equal(c.frame_codes()[i], ref)

    def test_permutations(self):
        c = random_code(3, 3, [(1, 2), (2, 0)], seed=1)
        p = c.permutations()
        assert all(sorted(row) == list(range(9)) for row in p)
        np.testing.assert_array_equal(c.values[p], c.frame_codes())


class TestAssemble:
    def test_identity_single_frame(self):
        c = random_code(3, 2, [(0, 0)], seed=0)
        ed = assemble(c, np.eye(6))
        np.testing.assert_array_equal(ed.matrix, np.diag(c.values))

    def test_shape(self):
        c = random_code(4, 3, [(0, 0), (1, 1), (2, 0)], seed=0)
        ed = assemble(c, dct2_basis(4, 3))
        assert ed.matrix.shape == (12, 36) and ed.raw.shape == (12, 36)
        assert ed.block_count == 3 and ed.block_size == 12

    def test_matches_naive(self):
        c = random_code(2, 2, [(1, 0), (1, 1)], seed=4)
        D = dct2_basis(2, 2)
        ref = naive_effective_dictionary(c.values, 2, 2, c.shifts, D)
        np.testing.assert_allclose(assemble(c, D).matrix, ref, atol=1e-15)

    def test_bad_basis(self):
        with pytest.raises(StructuralError):
            assemble(code_2x2([(0, 0)]), np.eye(3))


class TestSense:
    def test_all_ones(self):
        c = CactiCode(2, 3, np.ones(6), [(0, 0)])
        x = np.arange(6.0)
        np.testing.assert_array_equal(sense(c, [x]), x)

    def test_zero_frames(self):
        c = random_code(3, 3, [(0, 0), (1, 2)], seed=0)
        assert not sense(c, [np.zeros(9), np.zeros(9)]).any()

    def test_matches_raw_operator(self):
        c = random_code(3, 4, [(1, 0), (0, 3), (2, 2)], seed=5)
        frames = list(np.random.default_rng(0).standard_normal((3, 12)))
        ed = assemble(c, np.eye(12))
        np.testing.assert_allclose(sense(c, frames), ed.raw @ np.concatenate(frames), atol=1e-13)

    def test_frame_count(self):
        with pytest.raises(StructuralError):
            sense(code_2x2([(0, 0)]), [np.ones(4), np.ones(4)])


class TestCode:
    def test_negative_rejected(self):
        with pytest.raises(StructuralError):
            CactiCode(1, 2, [1.0, -0.5], [(0, 0)])

    def test_wrong_length(self):
        with pytest.raises(StructuralError):
            CactiCode(2, 2, [1.0, 2.0], [(0, 0)])

    def test_json_roundtrip(self):
        c = random_code(3, 2, [(1, 1), (2, 0)], seed=2)
        back = CactiCode.from_json(c.to_json())
        assert back.shifts == c.shifts
        assert back.values.tobytes() == c.values.tobytes()
        assert json.loads(c.to_json())["T"] == 2

    def test_inconsistent_T(self):
        d = random_code(2, 2, [(0, 0)], seed=0).to_dict()
        d["T"] = 3
        with pytest.raises(StructuralError):
            CactiCode.from_dict(d)
