"""Binary morphology in 2-4 dimensions.

Dilation follows the translate-and-union formulation; erosion is its dual.
Operations never wrap: anything outside the grid reads as background, so
erosion fails wherever the probe overhangs the border.

Thinning and thickening combine classical hit-or-miss candidate detection
with a per-flip local homology gate, which makes Betti-vector preservation a
guarantee of the implementation rather than a property of the element set.
The same gate drives the homology-checked dilation used to grow seed
skeletons in any supported dimension.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import BinaryGrid, UnsupportedDimensionError, _shifted
from .homology import is_local_flip_safe
from .noise import NoiseField


class InvalidElementError(ValueError):
    """Raised for malformed structuring elements (e.g. overlapping pairs)."""


@dataclass(frozen=True)
class StructuringElement:
    """A small binary mask probed around an origin voxel."""

    mask: np.ndarray
    origin: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "mask", np.asarray(self.mask, dtype=bool))
        if any(s > 9 for s in self.mask.shape):
            raise InvalidElementError(
                f"structuring elements are capped at 9 per axis, got {self.mask.shape}"
            )
        if len(self.origin) != self.mask.ndim or not all(
            0 <= o < s for o, s in zip(self.origin, self.mask.shape)
        ):
            raise InvalidElementError(
                f"origin {self.origin} outside mask of shape {self.mask.shape}"
            )

    @property
    def offsets(self) -> tuple[tuple[int, ...], ...]:
        """Voxel offsets of the mask relative to its origin."""
        return tuple(
            tuple(int(c) - o for c, o in zip(idx, self.origin))
            for idx in np.argwhere(self.mask)
        )

    def reflected(self) -> "StructuringElement":
        mask = self.mask[tuple(slice(None, None, -1) for _ in self.mask.shape)]
        origin = tuple(s - 1 - o for s, o in zip(self.mask.shape, self.origin))
        return StructuringElement(mask.copy(), origin)


def ball(radius: float, ndim: int) -> StructuringElement:
    """Euclidean ball element; radius 1 is the unit ball (a 2n+1 cross)."""
    if radius < 0:
        raise InvalidElementError(f"radius must be nonnegative, got {radius}")
    reach = int(radius)
    axes = np.arange(-reach, reach + 1)
    grids = np.meshgrid(*([axes] * ndim), indexing="ij")
    mask = sum(gx.astype(float) ** 2 for gx in grids) <= radius * radius + 1e-9
    return StructuringElement(mask, (reach,) * ndim)


def box(ndim: int, size: int = 3) -> StructuringElement:
    if size % 2 == 0:
        raise InvalidElementError(f"box size must be odd, got {size}")
    return StructuringElement(np.ones((size,) * ndim, bool), (size // 2,) * ndim)


def element_from_spec(spec: dict) -> StructuringElement:
    """Build an element from a config entry: a 0/1 nested list plus an origin."""
    try:
        mask = np.asarray(spec["mask"], dtype=bool)
        origin = tuple(int(c) for c in spec["origin"])
    except (KeyError, TypeError) as exc:
        raise InvalidElementError(f"element spec needs 'mask' and 'origin': {exc}")
    return StructuringElement(mask, origin)


def dilate(m: BinaryGrid, b: StructuringElement) -> BinaryGrid:
    """Minkowski sum of the foreground with the element, clipped to bounds."""
    out = np.zeros_like(m.data)
    for off in b.offsets:
        out |= _shifted(m.data, off)
    return BinaryGrid(out)


def erode(m: BinaryGrid, b: StructuringElement) -> BinaryGrid:
    """Voxels where the translated element fits entirely in the foreground."""
    out = np.ones_like(m.data)
    for off in b.offsets:
        out &= _shifted(m.data, tuple(-o for o in off))
    return BinaryGrid(out)


@dataclass(frozen=True)
class HitMissElement:
    """A disjoint (hit, miss) mask pair sharing one origin."""

    hit: np.ndarray
    miss: np.ndarray
    origin: tuple[int, ...]

    def __post_init__(self) -> None:
        hit = np.asarray(self.hit, dtype=bool)
        miss = np.asarray(self.miss, dtype=bool)
        if hit.shape != miss.shape:
            raise InvalidElementError("hit and miss masks must share a shape")
        if (hit & miss).any():
            raise InvalidElementError("hit and miss masks overlap")
        object.__setattr__(self, "hit", hit)
        object.__setattr__(self, "miss", miss)

    @classmethod
    def from_pattern(cls, rows: list[str]) -> "HitMissElement":
        """Build from rows of '1' (hit), '0' (miss), '.' (don't care)."""
        arr = np.array([list(r) for r in rows])
        return cls(arr == "1", arr == "0", tuple(s // 2 for s in arr.shape))

    def rotated90(self) -> "HitMissElement":
        return HitMissElement(
            np.rot90(self.hit).copy(), np.rot90(self.miss).copy(), self.origin
        )


def hit_or_miss(m: BinaryGrid, pair: HitMissElement) -> BinaryGrid:
    """Erode by the hit mask, erode the complement by the miss mask, intersect."""
    hit = StructuringElement(pair.hit, pair.origin)
    miss = StructuringElement(pair.miss, pair.origin)
    return BinaryGrid(erode(m, hit).data & erode(m.complement(), miss).data)


@lru_cache(maxsize=1)
def _thinning_elements_2d() -> tuple[HitMissElement, ...]:
    """The classical edge/corner pair in all four rotations (8 elements)."""
    edge = HitMissElement.from_pattern(
        [
            "000",
            ".1.",
            "111",
        ]
    )
    corner = HitMissElement.from_pattern(
        [
            ".00",
            "110",
            ".1.",
        ]
    )
    elems = []
    for base in (edge, corner):
        e = base
        for _ in range(4):
            elems.append(e)
            e = e.rotated90()
    return tuple(elems)


def _thin_gated(m: BinaryGrid, max_iter: int, on_background: bool) -> BinaryGrid:
    """Hit-or-miss thinning of the grid (or of its complement).

    Candidates come from the classical element set; each deletion is applied
    only if the local homology gate allows the flip on the original grid, so
    the output Betti vector always equals the input's.
    """
    cur = m.copy()
    flip_to = 1 if on_background else 0
    for _ in range(max_iter):
        changed = False
        for elem in _thinning_elements_2d():
            work = cur.complement() if on_background else cur
            for c in map(tuple, np.argwhere(hit_or_miss(work, elem).data)):
                if cur.get(c) == flip_to:
                    continue
                if is_local_flip_safe(cur, c, flip_to):
                    cur.set(c, flip_to)
                    changed = True
        if not changed:
            break
    return cur


def thin_homotopic_2d(m: BinaryGrid, max_iter: int) -> BinaryGrid:
    """Topology-preserving 2D thinning toward a unit-width skeleton."""
    if m.ndim != 2:
        raise UnsupportedDimensionError("thinning is 2D-only; see homology_safe_dilate")
    return _thin_gated(m, max_iter, on_background=False)


def thicken_background(m: BinaryGrid, iterations: int) -> BinaryGrid:
    """Thicken seed objects by thinning the background around them."""
    if m.ndim != 2:
        raise UnsupportedDimensionError("thickening is 2D-only; see homology_safe_dilate")
    return _thin_gated(m, iterations, on_background=True)


def homology_safe_dilate(
    m: BinaryGrid,
    b: StructuringElement | None = None,
    iterations: int = 1,
    bias: NoiseField | None = None,
    seed: int = 0,
) -> BinaryGrid:
    """Dilation in which every voxel flip must pass the local homology gate.

    Per iteration, the 0-voxels reachable by dilating with ``b`` (the unit
    ball by default) are visited one at a time and flipped when safe.  With a
    noise ``bias``, candidates are visited in descending noise order and kept
    with probability proportional to the normalized noise value, which grows
    lumpy, thick-and-thin shapes instead of uniform offsets.
    """
    if b is None:
        b = ball(1, m.ndim)
    if bias is not None and bias.dims != m.dims:
        raise ValueError(f"bias dims {bias.dims} do not match grid dims {m.dims}")
    cur = m.copy()
    for it in range(iterations):
        cand = np.argwhere(dilate(cur, b).data & ~cur.data)
        if cand.size == 0:
            break
        if bias is None:
            order = range(len(cand))
            accept = None
        else:
            vals = bias.values[tuple(cand.T)]
            order = np.lexsort(tuple(cand.T[::-1]) + (-vals,))
            accept = (vals + 1.0) / 2.0
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, it))))
            draws = rng.random(len(cand))
        for k in order:
            if accept is not None and draws[k] >= accept[k]:
                continue
            c = tuple(int(x) for x in cand[k])
            if cur.get(c) == 0 and is_local_flip_safe(cur, c, 1):
                cur.set(c, 1)
    return cur
