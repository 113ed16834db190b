"""Block-diagonal rotation between native knob space and differential/common-mode space.

Paired control knobs move the instrument output in nearly identical ways, so
the objective landscape forms diagonal canyons in native coordinates.  Rotating
each pair by 45 degrees yields one highly sensitive axis (the differential
mode) and one nearly flat axis (the common mode), aligning the canyon with the
coordinate axes that axis-aligned surrogates and trust regions assume.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, IndexOutOfRange, InvalidBounds, InvalidPairing

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class KnobPair:
    """Indices of two knobs whose effects are (anti-)correlated.

    ``delay_index`` is the knob on the adjustable branch, ``ref_index`` its
    counterpart on the reference branch.  The rotated coordinates are
    diff = (k_delay - k_ref)/sqrt(2) and common = (k_delay + k_ref)/sqrt(2).
    """

    delay_index: int
    ref_index: int

    def __post_init__(self):
        if self.delay_index == self.ref_index:
            raise InvalidPairing(
                f"pair maps index {self.delay_index} onto itself"
            )


@dataclass(frozen=True)
class PairedTransform:
    """Orthogonal map assembled from independent 2x2 pair rotations.

    The induced dim x dim matrix places the differential mode on the
    delay row and the common mode on the ref row of each pair; unpaired
    axes pass through unchanged.  Because the matrix is orthogonal the
    inverse is its transpose, so no numerical inversion is ever needed.
    """

    dim: int
    pairs: tuple[KnobPair, ...]
    unpaired: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)

    def forward(self, k: np.ndarray) -> np.ndarray:
        """Map native knob values to differential/common-mode coordinates."""
        k = np.asarray(k, dtype=float)
        if k.shape[-1] != self.dim:
            raise DimensionError(
                f"expected dimension {self.dim}, got {k.shape[-1]}"
            )
        return k @ self.matrix.T

    def inverse(self, v: np.ndarray) -> np.ndarray:
        """Map transformed coordinates back to native knob values."""
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.dim:
            raise DimensionError(
                f"expected dimension {self.dim}, got {v.shape[-1]}"
            )
        return v @ self.matrix

    def is_identity(self) -> bool:
        return not self.pairs


def build_paired_transform(dim: int, pairs) -> PairedTransform:
    """Construct the block-diagonal rotation for the given knob pairing.

    ``pairs`` may contain :class:`KnobPair` instances or (delay, ref)
    index tuples.  Every index must be unique and in [0, dim); indices
    not covered by any pair are passed through unchanged.
    """
    if dim < 1:
        raise InvalidBounds(f"dimension must be positive, got {dim}")
    norm_pairs = tuple(
        p if isinstance(p, KnobPair) else KnobPair(int(p[0]), int(p[1]))
        for p in pairs
    )
    seen: set[int] = set()
    for p in norm_pairs:
        for idx in (p.delay_index, p.ref_index):
            if not 0 <= idx < dim:
                raise IndexOutOfRange(f"knob index {idx} outside [0, {dim})")
            if idx in seen:
                raise InvalidPairing(f"knob index {idx} appears in two pairs")
            seen.add(idx)

    matrix = np.eye(dim)
    for p in norm_pairs:
        d, r = p.delay_index, p.ref_index
        matrix[d, d] = _INV_SQRT2
        matrix[d, r] = -_INV_SQRT2
        matrix[r, d] = _INV_SQRT2
        matrix[r, r] = _INV_SQRT2
    matrix.setflags(write=False)

    unpaired = tuple(i for i in range(dim) if i not in seen)
    return PairedTransform(dim=dim, pairs=norm_pairs, unpaired=unpaired, matrix=matrix)


def identity_transform(dim: int) -> PairedTransform:
    """Transform with no pairs: native and transformed space coincide."""
    return build_paired_transform(dim, [])


def transform_bounds(
    t: PairedTransform, lower: np.ndarray, upper: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Tightest axis-aligned box containing the image of a native box.

    The image of a box under a rotation is a rotated box, so the returned
    bounds are a superset of the reachable set: candidates drawn from it
    must be clipped back into the native box after inverse mapping.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != (t.dim,) or upper.shape != (t.dim,):
        raise DimensionError(
            f"bounds must have shape ({t.dim},), got {lower.shape} and {upper.shape}"
        )
    if not np.all(np.isfinite(lower)) or not np.all(np.isfinite(upper)):
        raise InvalidBounds("bounds must be finite")
    if np.any(lower >= upper):
        bad = int(np.argmax(lower >= upper))
        raise InvalidBounds(f"degenerate bounds on axis {bad}: {lower[bad]} >= {upper[bad]}")
    pos = np.maximum(t.matrix, 0.0)
    neg = np.minimum(t.matrix, 0.0)
    return pos @ lower + neg @ upper, pos @ upper + neg @ lower
