"""Hypervolume-preserving pixel-flip deformation.

Each iteration moves one boundary voxel: the lowest-noise 1-valued boundary
voxel is removed and re-placed at its highest-noise empty neighbor, with both
steps gated by the local homology check.  Volume is conserved exactly because
every move is a paired flip; topology is conserved because no gated step can
change the Betti vector, and a periodic full-sample re-verification guards
against the (4D) cases where local checks are known to be insufficient.
"""
from __future__ import annotations

import itertools
import time
import warnings
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .grid import BinaryGrid, Coord, count_ones, _shifted, neighbor_offsets
from .homology import BettiVector, betti_numbers, is_local_flip_safe
from .noise import NoiseField, noise_field


class TopologyDriftError(RuntimeError):
    """Raised when global re-verification detects a Betti-vector change.

    ``verified`` holds the last grid state that passed verification, so the
    caller can resume or discard it.
    """

    def __init__(self, message: str, verified: BinaryGrid | None = None):
        super().__init__(message)
        self.verified = verified


@dataclass(frozen=True)
class DeformConfig:
    """Settings for one deformation run."""

    iterations: int
    noise_scale: float = 8.0
    noise_octaves: int = 1
    safety_radius: int = 1
    max_move_distance: int = 1
    global_check_every: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        for name in ("safety_radius", "max_move_distance", "global_check_every"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass
class DeformReport:
    """Counters and invariants observed during a deformation run."""

    accepted_flips: int = 0
    rejected_removals: int = 0
    rejected_placements: int = 0
    volume_before: int = 0
    volume_after: int = 0
    betti_before: BettiVector | None = None
    betti_after: BettiVector | None = None
    stagnated: bool = False
    wall_time: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        """Manifest form; wall_time is excluded to keep outputs byte-stable."""
        out = {
            "accepted_flips": self.accepted_flips,
            "rejected_removals": self.rejected_removals,
            "rejected_placements": self.rejected_placements,
            "volume_before": self.volume_before,
            "volume_after": self.volume_after,
            "stagnated": self.stagnated,
        }
        for key, bv in (("betti_before", self.betti_before), ("betti_after", self.betti_after)):
            out[key] = None if bv is None else {
                "betti": list(bv.betti), "euler": bv.euler, "reduced": bv.reduced
            }
        return out


def _boundary_mask(a: np.ndarray) -> np.ndarray:
    """Face-adjacency boundary detection; border overhang counts as background."""
    has_bg = np.zeros_like(a)
    for off in neighbor_offsets(a.ndim, "face"):
        has_bg |= ~_shifted(a, tuple(-o for o in off))
    return a & has_bg


def _move_offsets(ndim: int, dist: int) -> tuple[Coord, ...]:
    return tuple(
        off
        for off in itertools.product(range(-dist, dist + 1), repeat=ndim)
        if any(off)
    )


#: Optional acceptance predicate: called with (grid, source, target) before a
#: move is committed; returning False vetoes it.  Lets callers monitor e.g.
#: thickness or convexity without this module claiming such monitors.
MoveFilter = Callable[[BinaryGrid, Coord, Coord], bool]


def select_move(
    g: BinaryGrid, noise: NoiseField, cfg: DeformConfig
) -> tuple[Coord, Coord] | None:
    """The (from, to) pair the next iteration would flip, or None."""
    pair, _, _ = _select_move(g, noise, cfg)
    return pair


def _select_move(
    g: BinaryGrid,
    noise: NoiseField,
    cfg: DeformConfig,
    move_filter: MoveFilter | None = None,
) -> tuple[tuple[Coord, Coord] | None, int, int]:
    """Selection rule shared with the deformation loop.

    Sources are the 1-valued boundary voxels in ascending noise order (ties
    broken lexicographically); for each source only its highest-noise empty
    candidate within the move distance is tried.  Returns the accepted pair
    plus the rejection counters accumulated while searching.
    """
    a = g.data
    rej_rm = rej_pl = 0
    bmask = _boundary_mask(a)
    srcs = np.argwhere(bmask)
    if srcs.size == 0:
        return None, rej_rm, rej_pl
    src_noise = noise.values[tuple(srcs.T)]
    order = np.lexsort(tuple(srcs.T[::-1]) + (src_noise,))
    offsets = _move_offsets(g.ndim, cfg.max_move_distance)
    for k in order:
        src = tuple(int(x) for x in srcs[k])
        best: Coord | None = None
        # moves are strictly uphill: the target must out-noise the source,
        # otherwise material oscillates between a minimum and its neighbors
        best_noise = float(src_noise[k])
        for off in offsets:
            tgt = tuple(s + o for s, o in zip(src, off))
            if not g.in_range(tgt) or a[tgt]:
                continue
            v = float(noise.values[tgt])
            if v > best_noise or (v == best_noise and best is not None and tgt < best):
                best, best_noise = tgt, v
        if best is None:
            continue
        if move_filter is not None and not move_filter(g, src, best):
            continue
        if not is_local_flip_safe(g, src, 0, cfg.safety_radius):
            rej_rm += 1
            continue
        g.data[src] = False
        placeable = is_local_flip_safe(g, best, 1, cfg.safety_radius)
        g.data[src] = True
        if not placeable:
            rej_pl += 1
            continue
        return (src, best), rej_rm, rej_pl
    return None, rej_rm, rej_pl


def deform_volume_preserving(
    g: BinaryGrid, cfg: DeformConfig, move_filter: MoveFilter | None = None
) -> tuple[BinaryGrid, DeformReport]:
    """Run the pixel-moving deformation; returns the new grid and a report.

    The input grid is not modified.  ``move_filter`` can veto otherwise
    acceptable moves (e.g. to enforce thickness or convexity policies).
    Raises :class:`TopologyDriftError` carrying the last verified state if a
    periodic global check ever sees the Betti vector change.
    """
    if not g.data.any() or g.data.all():
        raise ValueError("deformation needs a grid that is neither empty nor full")
    t0 = time.perf_counter()
    cur = g.copy()
    noise = noise_field(g.dims, cfg.noise_scale, cfg.seed, octaves=cfg.noise_octaves)
    report = DeformReport(
        volume_before=count_ones(g), betti_before=betti_numbers(g)
    )
    verified = cur.copy()
    since_check = 0
    for _ in range(cfg.iterations):
        pair, rej_rm, rej_pl = _select_move(cur, noise, cfg, move_filter)
        report.rejected_removals += rej_rm
        report.rejected_placements += rej_pl
        if pair is None:
            report.stagnated = True
            warnings.warn(
                "deformation stagnated: no movable boundary voxel", RuntimeWarning
            )
            break
        src, dst = pair
        cur.data[src] = False
        cur.data[dst] = True
        report.accepted_flips += 1
        since_check += 1
        if since_check >= cfg.global_check_every:
            if betti_numbers(cur) != report.betti_before:
                raise TopologyDriftError(
                    f"global re-verification found a Betti change; discarding "
                    f"the last {since_check} flips",
                    verified=verified,
                )
            verified = cur.copy()
            since_check = 0
    report.betti_after = betti_numbers(cur)
    if report.betti_after != report.betti_before:
        raise TopologyDriftError(
            "final verification found a Betti change", verified=verified
        )
    report.volume_after = count_ones(cur)
    report.wall_time = time.perf_counter() - t0
    return cur, report
