"""Uniform search grids and their quantized (base-P digit) layout."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DigitOutOfRange, IndexOutOfRange, NotQuantized

__all__ = ["GridSpec"]


def _per_dim(value, d, name):
    arr = np.broadcast_to(np.asarray(value, dtype=float), (d,))
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class GridSpec:
    """Box ``[lower, upper]`` discretized with ``mode_sizes[i]`` uniform points.

    When ``submode_base`` (P) and ``submodes`` (q) are set, each dimension
    has ``P**q`` points and the optimizer works on the reshaped tensor with
    ``d*q`` modes of size P. Digits are big-endian within a dimension and
    dimensions are laid out one after another.
    """

    lower: tuple
    upper: tuple
    mode_sizes: tuple
    submode_base: int | None = None
    submodes: int | None = None

    def __post_init__(self):
        d = len(self.mode_sizes)
        if d < 1:
            raise ValueError("at least one dimension is required")
        if len(self.lower) != d or len(self.upper) != d:
            raise ValueError("lower/upper must have one entry per dimension")
        for i, (a, b, n) in enumerate(zip(self.lower, self.upper, self.mode_sizes)):
            if not a < b:
                raise ValueError(f"dimension {i}: lower {a} must be < upper {b}")
            if n < 2:
                raise ValueError(f"dimension {i}: need at least 2 grid points, got {n}")
        if (self.submode_base is None) != (self.submodes is None):
            raise ValueError("submode_base and submodes must be given together")
        if self.quantized:
            p, q = self.submode_base, self.submodes
            if p < 2 or q < 1:
                raise ValueError(f"need P >= 2 and q >= 1, got P={p}, q={q}")
            if any(n != p**q for n in self.mode_sizes):
                raise ValueError(f"quantized grids need every mode size equal to P**q = {p**q}")

    @classmethod
    def uniform(cls, dims: int, lower, upper, n: int) -> "GridSpec":
        return cls(_per_dim(lower, dims, "lower"), _per_dim(upper, dims, "upper"),
                   (int(n),) * dims)

    @classmethod
    def quantized_grid(cls, dims: int, lower, upper, p: int, q: int) -> "GridSpec":
        return cls(_per_dim(lower, dims, "lower"), _per_dim(upper, dims, "upper"),
                   (int(p) ** int(q),) * dims, int(p), int(q))

    @property
    def dims(self) -> int:
        return len(self.mode_sizes)

    @property
    def quantized(self) -> bool:
        return self.submode_base is not None

    @property
    def tensor_shape(self) -> list[int]:
        """Mode sizes of the tensor the optimizer sweeps over."""
        return self.quantize_shape() if self.quantized else list(self.mode_sizes)

    def quantize_shape(self) -> list[int]:
        if not self.quantized:
            raise NotQuantized("grid has no (P, q) layout")
        return [self.submode_base] * (self.dims * self.submodes)

    def grid_point(self, dim: int, n: int) -> float:
        if not 0 <= dim < self.dims:
            raise IndexOutOfRange(f"dimension {dim} out of range [0, {self.dims})")
        size = self.mode_sizes[dim]
        if not 0 <= n < size:
            raise IndexOutOfRange(f"grid index {n} out of range [0, {size})")
        a, b = self.lower[dim], self.upper[dim]
        if n == size - 1:
            return b
        return a + (b - a) * n / (size - 1)

    def coords(self, indices, *, check: bool = True) -> np.ndarray:
        """Vectorized ``grid_point`` for an ``(m, d)`` array of grid indices."""
        idx = np.asarray(indices)
        a = np.asarray(self.lower)
        b = np.asarray(self.upper)
        n = np.asarray(self.mode_sizes)
        if check and (np.any(idx < 0) or np.any(idx >= n)):
            raise IndexOutOfRange("grid index out of range")
        # endpoints are returned exactly; a + (b - a) can round away from b
        return np.where(idx == n - 1, b, a + (b - a) * idx / (n - 1))

    def _weights(self):
        p, q = self.submode_base, self.submodes
        return p ** np.arange(q - 1, -1, -1, dtype=np.int64)

    def digits_to_indices(self, digits, *, check: bool = True) -> np.ndarray:
        """Collapse ``(m, d*q)`` digit rows to ``(m, d)`` grid indices."""
        if not self.quantized:
            raise NotQuantized("grid has no (P, q) layout")
        digits = np.asarray(digits, dtype=np.int64)
        if check and (np.any(digits < 0) or np.any(digits >= self.submode_base)):
            raise DigitOutOfRange(f"digits must lie in [0, {self.submode_base})")
        shaped = digits.reshape(digits.shape[:-1] + (self.dims, self.submodes))
        return shaped @ self._weights()

    def indices_to_digits(self, indices) -> np.ndarray:
        if not self.quantized:
            raise NotQuantized("grid has no (P, q) layout")
        idx = np.asarray(indices, dtype=np.int64)
        if np.any(idx < 0) or np.any(idx >= np.asarray(self.mode_sizes)):
            raise IndexOutOfRange("grid index out of range")
        digits = (idx[..., None] // self._weights()) % self.submode_base
        return digits.reshape(idx.shape[:-1] + (self.dims * self.submodes,))

    def decode_digits(self, digits):
        """Return ``(indices, coords)`` for one digit string of length ``d*q``."""
        if not self.quantized:
            raise NotQuantized("grid has no (P, q) layout")
        digits = np.asarray(digits, dtype=np.int64)
        if digits.shape != (self.dims * self.submodes,):
            raise ValueError(f"expected {self.dims * self.submodes} digits, got {digits.shape}")
        idx = self.digits_to_indices(digits)
        return idx, self.coords(idx)

    def tensor_to_grid(self, multi_index, *, check: bool = True) -> np.ndarray:
        """Map rows of tensor multi-indices to grid indices (identity if unquantized)."""
        if self.quantized:
            return self.digits_to_indices(multi_index, check=check)
        return np.asarray(multi_index)

    def partial_indices(self, multi_index, start: int) -> np.ndarray:
        """Grid-index contribution of tensor modes ``start..start+k-1``.

        ``multi_index`` is ``(m, k)``. Grid indices are sums of such
        contributions over disjoint mode ranges, so a block of points can be
        assembled from its left, middle and right parts.
        """
        multi = np.asarray(multi_index, dtype=np.int64)
        m, k = multi.shape
        n_modes = len(self.tensor_shape)
        if start < 0 or start + k > n_modes:
            raise IndexOutOfRange(f"modes {start}..{start + k - 1} out of range [0, {n_modes})")
        full = np.zeros((m, n_modes), dtype=np.int64)
        full[:, start:start + k] = multi
        return self.tensor_to_grid(full, check=False)

    def to_dict(self) -> dict:
        return {
            "lower": list(self.lower),
            "upper": list(self.upper),
            "mode_sizes": list(self.mode_sizes),
            "submode_base": self.submode_base,
            "submodes": self.submodes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridSpec":
        return cls(tuple(map(float, data["lower"])), tuple(map(float, data["upper"])),
                   tuple(map(int, data["mode_sizes"])), data.get("submode_base"),
                   data.get("submodes"))
