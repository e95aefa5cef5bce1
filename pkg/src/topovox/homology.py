"""Exact cubical homology over GF(2) for binary voxel grids.

Every 1-valued voxel contributes a closed unit n-cube; shared faces are
identified once.  Cells live on a doubled coordinate lattice: the cell with
anchor ``a`` spanning the axis subset ``S`` sits at lattice point
``2a + indicator(S)``, so a coordinate is odd exactly along the axes the cell
spans and the cell dimension is the number of odd coordinates.  Faces and
cofaces are unit steps on this lattice, which keeps construction, collapse,
and boundary extraction vectorizable.

Betti numbers come from boundary-matrix ranks over GF(2):
``beta_k = c_k - rank(d_k) - rank(d_k+1)``.  Large complexes are first
simplified by elementary free-pair collapses (each collapse pair adds exactly
one to the rank of the boundary matrix in its coface's dimension, so the
original ranks are recovered exactly); the remaining core is reduced by
sparse column elimination with clearing.  Small complexes are eliminated
directly with integer bitmask columns.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import BinaryGrid, Coord, extract_neighborhood

#: Cell-count switchover between direct elimination and collapse + sparse
#: reduction.  Neighborhood blocks (at most 3^4 voxels) stay far below it.
DENSE_CELL_THRESHOLD = 4096


@dataclass(frozen=True)
class BettiVector:
    """Betti numbers (beta_0..beta_3) and Euler characteristic of a grid.

    Entries above the grid dimension are 0.  With ``reduced`` set, beta_0 is
    the rank of reduced H0 (components minus one for a nonempty space); the
    Euler characteristic is always the plain alternating cell-count sum.
    """

    betti: tuple[int, int, int, int]
    euler: int
    reduced: bool = False

    def __getitem__(self, k: int) -> int:
        return self.betti[k]

    @classmethod
    def of(cls, values, euler: int, reduced: bool = False) -> "BettiVector":
        vals = tuple(int(v) for v in values)
        if len(vals) > 4 and any(vals[4:]):
            raise ValueError(f"at most four Betti numbers are supported, got {values}")
        vals = (vals + (0, 0, 0, 0))[:4]
        return cls(vals, int(euler), reduced)


# ---------------------------------------------------------------------------
# lattice construction

def _cell_lattice(data: np.ndarray) -> np.ndarray:
    """Boolean presence array over the doubled lattice of ``data``."""
    shape2 = tuple(2 * s + 1 for s in data.shape)
    present = np.zeros(shape2, dtype=bool)
    for delta in itertools.product((0, 1, 2), repeat=data.ndim):
        view = present[
            tuple(slice(d, d + 2 * s, 2) for d, s in zip(delta, data.shape))
        ]
        np.logical_or(view, data, out=view)
    return present


def _cell_dim_array(shape2: tuple[int, ...]) -> np.ndarray:
    """Per-lattice-point cell dimension (number of odd coordinates)."""
    par = np.zeros(shape2, dtype=np.int8)
    for ax, s in enumerate(shape2):
        vec = (np.arange(s, dtype=np.int8) % 2).reshape(
            tuple(s if i == ax else 1 for i in range(len(shape2)))
        )
        par += vec
    return par


def _axis_slices(ndim: int, ax: int, sl: slice) -> tuple[slice, ...]:
    full = [slice(None)] * ndim
    full[ax] = sl
    return tuple(full)


def _coface_counts(present: np.ndarray) -> np.ndarray:
    """Number of present cofaces of every lattice cell.

    A coface of a cell exists only along axes where its coordinate is even;
    the two candidates sit at +-1 on that axis.
    """
    cnt = np.zeros(present.shape, dtype=np.int8)
    nd = present.ndim
    for ax, s in enumerate(present.shape):
        odd = _axis_slices(nd, ax, slice(1, s, 2))
        cnt[_axis_slices(nd, ax, slice(0, s - 1, 2))] += present[odd]
        cnt[_axis_slices(nd, ax, slice(2, s, 2))] += present[odd]
    return cnt


def _collapse(present: np.ndarray, par: np.ndarray) -> np.ndarray:
    """Remove elementary free pairs in batches, mutating ``present``.

    Returns the number of removed pairs per coface dimension.  Pairs removed
    within one batch are disjoint, so the batch is a valid collapse sequence.
    """
    nd = present.ndim
    pairs = np.zeros(nd + 1, dtype=np.int64)
    while True:
        removed_any = False
        for ax in range(nd):
            s = present.shape[ax]
            for direction in (1, -1):
                free = present & (_coface_counts(present) == 1)
                if direction == 1:
                    sig_sl = _axis_slices(nd, ax, slice(0, s - 1, 2))
                    tau_sl = _axis_slices(nd, ax, slice(1, s, 2))
                else:
                    sig_sl = _axis_slices(nd, ax, slice(2, s, 2))
                    tau_sl = _axis_slices(nd, ax, slice(1, s - 1, 2))
                match = free[sig_sl] & present[tau_sl]
                if not match.any():
                    continue
                removed_any = True
                pairs += np.bincount(par[tau_sl][match], minlength=nd + 1)
                present[sig_sl] &= ~match
                present[tau_sl] &= ~match
        if not removed_any:
            return pairs


# ---------------------------------------------------------------------------
# GF(2) rank

def _rank_bitmask_columns(columns) -> tuple[int, set[int]]:
    """Rank of GF(2) columns given as integer bitmasks; also the pivot rows."""
    pivots: dict[int, int] = {}
    rank = 0
    for col in columns:
        while col:
            low = col.bit_length() - 1
            other = pivots.get(low)
            if other is None:
                pivots[low] = col
                rank += 1
                break
            col ^= other
    return rank, set(pivots)


def gf2_rank(matrix) -> int:
    """Rank of a dense 0/1 matrix over GF(2) via bitmask elimination."""
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if m.size == 0:
        return 0
    bits = np.asarray(m, dtype=np.uint8) & 1
    # pack each column into a python int, rows as bit positions
    cols = []
    for j in range(m.shape[1]):
        col = 0
        for i in np.flatnonzero(bits[:, j]):
            col |= 1 << int(i)
        cols.append(col)
    rank, _ = _rank_bitmask_columns(cols)
    return rank


def _core_ranks(present: np.ndarray, par: np.ndarray) -> np.ndarray:
    """Boundary ranks of the complex given by ``present``, one per dimension.

    Columns are processed in descending dimension so that pivot rows of
    d_(k+1) clear the corresponding columns of d_k.
    """
    nd = present.ndim
    ranks = np.zeros(nd + 2, dtype=np.int64)
    coords = np.argwhere(present)
    m = coords.shape[0]
    if m == 0:
        return ranks
    flat = np.ravel_multi_index(tuple(coords.T), present.shape)
    idx = np.full(int(np.prod(present.shape)), -1, dtype=np.int64)
    idx[flat] = np.arange(m)
    dims_of = par.ravel()[flat]
    strides = np.ones(nd, dtype=np.int64)
    for ax in range(nd - 2, -1, -1):
        strides[ax] = strides[ax + 1] * present.shape[ax + 1]

    masks = [0] * m
    for ax in range(nd):
        odd = np.flatnonzero(coords[:, ax] % 2 == 1)
        if odd.size == 0:
            continue
        lo = idx[flat[odd] - strides[ax]].tolist()
        hi = idx[flat[odd] + strides[ax]].tolist()
        for cell, a, b in zip(odd.tolist(), lo, hi):
            masks[cell] |= (1 << a) | (1 << b)

    cleared: set[int] = set()
    for k in range(nd, 0, -1):
        ids = np.flatnonzero(dims_of == k).tolist()
        cols = (masks[c] for c in ids if c not in cleared)
        ranks[k], cleared = _rank_bitmask_columns(cols)
    return ranks


# ---------------------------------------------------------------------------
# public complex type

class CubicalComplex:
    """The cubical complex induced by the 1-voxels of a grid.

    Cells are identified by doubled-lattice coordinates; per dimension they
    are listed in lexicographic coordinate order, and boundary incidence is
    reported against that order.
    """

    def __init__(self, grid: BinaryGrid):
        self.dims = grid.dims
        self.lattice = _cell_lattice(grid.data)
        self._par = _cell_dim_array(self.lattice.shape)
        counts = np.bincount(
            self._par[self.lattice], minlength=grid.ndim + 1
        )
        self.cell_counts: tuple[int, ...] = tuple(int(c) for c in counts)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    def cells(self, k: int) -> np.ndarray:
        """Doubled-lattice coordinates of the k-cells, lexicographically."""
        return np.argwhere(self.lattice & (self._par == k))

    def boundary_columns(self, k: int) -> list[list[int]]:
        """For each k-cell, the indices of its facets among the (k-1)-cells."""
        if k < 1 or k > self.ndim:
            return []
        faces = self.cells(k - 1)
        face_id = {tuple(c): i for i, c in enumerate(faces)}
        cols = []
        for cell in self.cells(k):
            col = []
            for ax in range(self.ndim):
                if cell[ax] % 2 == 1:
                    for d in (-1, 1):
                        f = list(cell)
                        f[ax] += d
                        col.append(face_id[tuple(f)])
            cols.append(sorted(col))
        return cols

    def boundary_matrix(self, k: int) -> np.ndarray:
        """Dense GF(2) boundary matrix d_k (rows: (k-1)-cells, cols: k-cells)."""
        rows = self.cell_counts[k - 1] if 1 <= k <= self.ndim else 0
        cols = self.boundary_columns(k)
        if rows * len(cols) > 64_000_000:
            raise ValueError("boundary matrix too large to materialize densely")
        mat = np.zeros((rows, len(cols)), dtype=np.uint8)
        for j, col in enumerate(cols):
            for i in col:
                mat[i, j] ^= 1
        return mat


def build_cubical_complex(g: BinaryGrid) -> CubicalComplex:
    """Union of closed unit cubes at the 1-voxels, shared faces identified."""
    return CubicalComplex(g)


def euler_from_cells(c: CubicalComplex) -> int:
    """Euler characteristic as the alternating sum of cell counts."""
    return int(sum((-1) ** k * n for k, n in enumerate(c.cell_counts)))


# ---------------------------------------------------------------------------
# Betti numbers

def _betti_core(data: np.ndarray, dense_threshold: int, use_collapse) -> tuple:
    n = data.ndim
    if not data.any():
        return (0,) * (n + 1), 0
    present = _cell_lattice(data)
    par = _cell_dim_array(present.shape)
    counts = np.bincount(par[present], minlength=n + 1).astype(np.int64)
    total = int(counts.sum())
    if use_collapse is None:
        use_collapse = total > dense_threshold
    pairs = np.zeros(n + 1, dtype=np.int64)
    if use_collapse:
        pairs = _collapse(present, par)
    ranks = _core_ranks(present, par)
    ranks[1 : n + 1] += pairs[1 : n + 1]
    beta = tuple(
        int(counts[k] - ranks[k] - ranks[k + 1]) for k in range(n + 1)
    )
    chi = int(sum((-1) ** k * counts[k] for k in range(n + 1)))
    return beta, chi


def betti_numbers(
    g: BinaryGrid,
    reduced: bool = False,
    *,
    dense_threshold: int = DENSE_CELL_THRESHOLD,
    use_collapse: bool | None = None,
) -> BettiVector:
    """Betti numbers and Euler characteristic of the grid's cubical complex.

    ``use_collapse`` overrides the automatic small/large strategy switch and
    exists mainly so tests can cross-check both paths.
    """
    beta, chi = _betti_core(g.data, dense_threshold, use_collapse)
    if reduced and beta and beta[0] > 0:
        beta = (beta[0] - 1,) + beta[1:]
    return BettiVector.of(beta, chi, reduced)


@lru_cache(maxsize=1 << 20)
def _block_betti_cached(shape: tuple[int, ...], packed: bytes) -> BettiVector:
    bits = np.unpackbits(
        np.frombuffer(packed, dtype=np.uint8), count=int(np.prod(shape))
    )
    data = bits.astype(bool).reshape(shape)
    beta, chi = _betti_core(data, DENSE_CELL_THRESHOLD, None)
    return BettiVector.of(beta, chi, False)


def _block_betti(data: np.ndarray) -> BettiVector:
    return _block_betti_cached(data.shape, np.packbits(data.ravel()).tobytes())


def is_local_flip_safe(
    g: BinaryGrid, c: Coord, new_value: int, radius: int = 1
) -> bool:
    """Whether flipping voxel ``c`` preserves local homology.

    True iff the Betti vectors of both the foreground and the background
    restricted to the (2*radius+1)^n block around ``c`` are unchanged by the
    flip.  The background check guards against silently creating or merging
    cavities.  Block results are memoized, so repeated queries over similar
    neighborhoods are cheap.
    """
    new_value = int(bool(new_value))
    if g.get(c) == new_value:
        raise ValueError(f"voxel {c} already has value {new_value}")
    before = extract_neighborhood(g, c, radius).data
    after = before.copy()
    after[(radius,) * g.ndim] = new_value
    if _block_betti(before) != _block_betti(after):
        return False
    return _block_betti(~before) == _block_betti(~after)
