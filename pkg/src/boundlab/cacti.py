"""Coded-aperture temporal imaging (CACTI) sensing model.

A single nonnegative ``n1 x n2`` mask is translated once per frame. Frame
``i`` sees the mask circularly shifted by ``shifts[i] = (dy, dx)``: the mask
entry at ``(r, c)`` lands on pixel ``((r + dy) % n1, (c + dx) % n2)``. Frames
are vectorized column-major, so the mask vector has length ``n1 * n2`` and
the snapshot is ``sum_i diag(phi_i) vec(X_i)``.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import StructuralError
from .signals import stream_rng


@dataclass(frozen=True)
class CactiCode:
    """Mask values plus the per-frame circular shifts."""

    n1: int
    n2: int
    values: np.ndarray
    shifts: tuple

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if values.shape[0] != self.n1 * self.n2:
            raise StructuralError(
                f"code has {values.shape[0]} values, expected {self.n1}*{self.n2}"
            )
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise StructuralError("code values must be finite and nonnegative")
        shifts = tuple((int(dy) % self.n1, int(dx) % self.n2) for dy, dx in self.shifts)
        if len(shifts) < 1:
            raise StructuralError("a code needs at least one frame shift")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "shifts", shifts)

    @property
    def T(self):
        return len(self.shifts)

    @property
    def n(self):
        return self.n1 * self.n2

    def with_values(self, values):
        return CactiCode(self.n1, self.n2, values, self.shifts)

    def permutations(self):
        """``(T, n)`` index array ``p`` with ``phi_i[j] == values[p[i, j]]``."""
        idx = np.arange(self.n).reshape((self.n1, self.n2), order="F")
        return np.stack(
            [np.roll(idx, s, axis=(0, 1)).ravel(order="F") for s in self.shifts]
        )

    def frame_codes(self):
        """``(T, n)`` array whose row ``i`` is the diagonal of ``Phi_i``."""
        return self.values[self.permutations()]

    def to_dict(self):
        return {
            "n1": self.n1,
            "n2": self.n2,
            "T": self.T,
            "shifts": [list(s) for s in self.shifts],
            "values": [float(v) for v in self.values],
        }

    @classmethod
    def from_dict(cls, d):
        if "T" in d and int(d["T"]) != len(d["shifts"]):
            raise StructuralError(f"T={d['T']} but {len(d['shifts'])} shifts given")
        return cls(int(d["n1"]), int(d["n2"]), np.asarray(d["values"], dtype=float), tuple(map(tuple, d["shifts"])))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def random_code(n1, n2, shifts, seed, stream=0):
    """Code with i.i.d. uniform ``(0, 1]`` mask values."""
    rng = stream_rng(seed, stream)
    return CactiCode(n1, n2, 1.0 - rng.random(n1 * n2), tuple(shifts))


def random_shifts(n1, n2, T, seed):
    rng = stream_rng(seed, 1)
    return tuple((int(rng.integers(n1)), int(rng.integers(n2))) for _ in range(T))


def shift_code(code, frame_index):
    """Vectorized mask as seen by frame ``frame_index``."""
    if not 0 <= frame_index < code.T:
        raise StructuralError(f"frame index {frame_index} out of range for T={code.T}")
    dy, dx = code.shifts[frame_index]
    mask = code.values.reshape((code.n1, code.n2), order="F")
    return np.roll(mask, (dy, dx), axis=(0, 1)).ravel(order="F")


@dataclass(frozen=True)
class EffectiveDictionary:
    """``[Phi_1 D | ... | Phi_T D]`` together with the raw ``[Phi_1 | ... | Phi_T]``.

    Columns are ordered block-major: column ``i * n + j`` is ``Phi_i d_j``.
    """

    matrix: np.ndarray
    raw: np.ndarray
    block_count: int

    @property
    def block_size(self):
        return self.matrix.shape[1] // self.block_count


def assemble(code, D):
    """Build the effective dictionary of ``code`` under sparsifying basis ``D``."""
    D = np.asarray(D, dtype=float)
    if D.shape != (code.n, code.n):
        raise StructuralError(f"basis has shape {D.shape}, expected ({code.n}, {code.n})")
    F = code.frame_codes()
    matrix = np.hstack([f[:, None] * D for f in F])
    raw = np.hstack([np.diag(f) for f in F])
    return EffectiveDictionary(matrix=matrix, raw=raw, block_count=code.T)


def sense(code, frames):
    """Coded snapshot ``sum_i Phi_i vec(X_i)`` of ``T`` vectorized frames."""
    frames = [np.asarray(f, dtype=float).ravel() for f in frames]
    if len(frames) != code.T:
        raise StructuralError(f"got {len(frames)} frames for a code with T={code.T}")
    for f in frames:
        if f.shape[0] != code.n:
            raise StructuralError(f"frame has length {f.shape[0]}, expected {code.n}")
    return np.sum(code.frame_codes() * np.stack(frames), axis=0)
