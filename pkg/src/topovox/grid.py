"""N-dimensional binary voxel grids and connectivity primitives.

A :class:`BinaryGrid` is a bit-valued image in 2, 3, or 4 dimensions.
Conventions used throughout the package:

* storage is row-major with the last axis fastest,
* any read outside the index range returns 0 ("out-of-bounds is background"),
* foreground connectivity defaults to ``full`` adjacency (all 3^n - 1
  neighbors), background to ``face`` adjacency (2n neighbors), matching the
  closed-cube model used by the homology engine.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Literal

import numpy as np

Coord = tuple[int, ...]
Adjacency = Literal["face", "full"]

SUPPORTED_NDIM = (2, 3, 4)


class UnsupportedDimensionError(ValueError):
    """Raised when a grid or query is not 2-, 3-, or 4-dimensional."""


class BinaryGrid:
    """A binary voxel image backed by a boolean array."""

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        arr = np.asarray(data, dtype=bool)
        if arr.ndim not in SUPPORTED_NDIM:
            raise UnsupportedDimensionError(
                f"grids must have 2 to 4 dimensions, got {arr.ndim}"
            )
        if any(s < 1 for s in arr.shape):
            raise ValueError(f"every axis must have length >= 1, got {arr.shape}")
        self.data = arr

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dims(self) -> Coord:
        return self.data.shape

    def in_range(self, coord: Coord) -> bool:
        return len(coord) == self.ndim and all(
            0 <= c < s for c, s in zip(coord, self.dims)
        )

    def get(self, coord: Coord) -> int:
        """Value at ``coord``; out-of-range coordinates read as 0."""
        if not self.in_range(coord):
            return 0
        return int(self.data[coord])

    def set(self, coord: Coord, value: int) -> None:
        self.data[coord] = bool(value)

    def copy(self) -> "BinaryGrid":
        return BinaryGrid(self.data.copy())

    def complement(self) -> "BinaryGrid":
        return BinaryGrid(~self.data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryGrid):
            return NotImplemented
        return self.dims == other.dims and bool(np.array_equal(self.data, other.data))

    def __repr__(self) -> str:
        return f"BinaryGrid(dims={self.dims}, ones={count_ones(self)})"


def new_grid(dims, fill: int = 0) -> BinaryGrid:
    """Create a grid of the given shape with every voxel set to ``fill``."""
    dims = tuple(int(d) for d in dims)
    if len(dims) not in SUPPORTED_NDIM:
        raise UnsupportedDimensionError(
            f"grids must have 2 to 4 dimensions, got {len(dims)}"
        )
    if any(d < 1 for d in dims):
        raise ValueError(f"every axis must have length >= 1, got {dims}")
    return BinaryGrid(np.full(dims, bool(fill), dtype=bool))


@lru_cache(maxsize=None)
def neighbor_offsets(ndim: int, adj: Adjacency) -> tuple[Coord, ...]:
    """Neighbor offsets for the adjacency kind: 2n for face, 3^n - 1 for full."""
    if adj == "face":
        offs = []
        for ax in range(ndim):
            for d in (-1, 1):
                off = [0] * ndim
                off[ax] = d
                offs.append(tuple(off))
        return tuple(offs)
    if adj == "full":
        return tuple(
            off
            for off in itertools.product((-1, 0, 1), repeat=ndim)
            if any(off)
        )
    raise ValueError(f"unknown adjacency kind {adj!r}")


def _shifted(a: np.ndarray, off: Coord) -> np.ndarray:
    """Translate ``a`` by ``off``, filling vacated cells with 0."""
    out = np.zeros_like(a)
    src = []
    dst = []
    for o, s in zip(off, a.shape):
        if abs(o) >= s:
            return out
        src.append(slice(max(0, -o), s - max(0, o)))
        dst.append(slice(max(0, o), s + min(0, o)))
    out[tuple(dst)] = a[tuple(src)]
    return out


def count_ones(g: BinaryGrid) -> int:
    """Number of 1-valued voxels (the sample's hypervolume)."""
    return int(np.count_nonzero(g.data))


def boundary_voxels(g: BinaryGrid, adj: Adjacency = "face") -> set[Coord]:
    """1-valued voxels with at least one 0-valued neighbor under ``adj``.

    Out-of-range neighbors count as background, so voxels on the grid border
    are boundary whenever the adjacency reaches past the edge.
    """
    a = g.data
    has_bg = np.zeros_like(a)
    for off in neighbor_offsets(g.ndim, adj):
        # neighbor value at x+off equals a translated by -off
        has_bg |= ~_shifted(a, tuple(-o for o in off))
    return {tuple(int(c) for c in idx) for idx in np.argwhere(a & has_bg)}


def extract_neighborhood(g: BinaryGrid, center: Coord, radius: int) -> BinaryGrid:
    """The (2*radius+1)^n block around ``center``, zero-padded at overhang."""
    if radius < 1:
        raise ValueError(f"radius must be positive, got {radius}")
    if not g.in_range(center):
        raise IndexError(f"center {center} out of range for dims {g.dims}")
    size = 2 * radius + 1
    block = np.zeros((size,) * g.ndim, dtype=bool)
    src = []
    dst = []
    for c, s in zip(center, g.dims):
        lo, hi = c - radius, c + radius + 1
        src.append(slice(max(lo, 0), min(hi, s)))
        dst.append(slice(max(lo, 0) - lo, size - (hi - min(hi, s))))
    block[tuple(dst)] = g.data[tuple(src)]
    return BinaryGrid(block)


def connected_components(
    g: BinaryGrid, adj: Adjacency = "full"
) -> tuple[int, np.ndarray]:
    """Label foreground components with union-find.

    Returns ``(count, labels)`` where ``labels`` maps each voxel to a
    component id in first-encounter (raster) order; background voxels get -1.
    """
    a = g.data
    flat_fg = np.flatnonzero(a.ravel())
    n_fg = flat_fg.size
    labels = np.full(a.size, -1, dtype=np.int64)
    if n_fg == 0:
        return 0, labels.reshape(a.shape)

    # union-find over compacted foreground indices
    comp_id = np.full(a.size, -1, dtype=np.int64)
    comp_id[flat_fg] = np.arange(n_fg)
    parent = np.arange(n_fg, dtype=np.int64)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    # forward half of the offsets is enough: each pair is seen once
    half = [off for off in neighbor_offsets(g.ndim, adj) if off > (0,) * g.ndim]
    strides = np.array(a.strides) // a.itemsize
    for off in half:
        src_sl = []
        for o, s in zip(off, a.shape):
            src_sl.append(slice(max(0, -o), s - max(0, o)))
        src_sl = tuple(src_sl)
        dst_off = int(np.dot(off, strides))
        pair_mask = a[src_sl] & _shifted(a, tuple(-o for o in off))[src_sl]
        base = np.flatnonzero(pair_mask.ravel())
        if base.size == 0:
            continue
        # recover flat indices of the source voxels inside the clipped view
        view_index = np.arange(a.size).reshape(a.shape)[src_sl].ravel()
        us = comp_id[view_index[base]]
        vs = comp_id[view_index[base] + dst_off]
        for u, v in zip(us, vs):
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)

    roots = np.array([find(i) for i in range(n_fg)])
    order: dict[int, int] = {}
    for r in roots:
        if r not in order:
            order[r] = len(order)
    labels[flat_fg] = np.array([order[r] for r in roots])
    return len(order), labels.reshape(a.shape)
