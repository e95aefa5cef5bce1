"""Closed-form Betti-number labels for the supported constructions.

Three label families cover single closed sums, boundary connected sums, and
boundary-sum cut-outs carved from a solid 4-cube; multi-component samples are
labeled by additivity over disjoint unions.  Labels are computed symbolically
from construction parameters, never measured from voxels; the homology engine
re-verifies them downstream.

The parameters (g, h, i, j) count glued copies: g of the S1 x S2 kind (or its
solid S1 x B3 counterpart), h of the S2 x S1 / S2 x B2 kind, i of the factor
built on a genus-j surface.  Validity requires g + h + i > 0 and j > 0
whenever i > 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .homology import BettiVector

FAMILIES = (
    "closed_sum",
    "boundary_sum",
    "cube_complement",
    "embedded_object",
    "disjoint_union",
)

#: Descriptor-level cap on each of g, h, i, j so recipes stay rasterizable
#: within desk-scale grids.  The pure label formulas are not capped.
MAX_GLUE_COUNT = 8


class InvalidDescriptorError(ValueError):
    """Raised when construction parameters violate the family constraints."""


def _validate_ghij(g: int, h: int, i: int, j: int, *, allow_trivial: bool = False) -> None:
    if min(g, h, i, j) < 0:
        raise InvalidDescriptorError(f"counts must be nonnegative, got {(g, h, i, j)}")
    if i > 0 and j == 0:
        raise InvalidDescriptorError("j must be positive when i > 0")
    if i == 0 and j != 0:
        raise InvalidDescriptorError("j is only meaningful when i > 0")
    if not allow_trivial and g + h + i == 0:
        raise InvalidDescriptorError("g + h + i must be positive")


def betti_closed_sum(g: int, h: int, i: int, j: int) -> BettiVector:
    """Label of the closed connected sum with parameters (g, h, i, j)."""
    _validate_ghij(g, h, i, j)
    mid = g + h + i * (2 * j + 1)
    return BettiVector.of((1, mid, mid, 1), 0)


def betti_boundary_sum(g: int, h: int, i: int, j: int) -> BettiVector:
    """Label of the boundary connected sum with parameters (g, h, i, j)."""
    _validate_ghij(g, h, i, j)
    b1 = g + i * (j + 1)
    b2 = h + i * j
    return BettiVector.of((1, b1, b2, 0), 1 - g + h - i)


def betti_cube_complement(g: int, h: int, i: int, j: int) -> BettiVector:
    """Label of a solid 4-cube minus one boundary-sum cut-out."""
    _validate_ghij(g, h, i, j)
    b1 = h + i * j
    b2 = g + i * (j + 1)
    return BettiVector.of((1, b1, b2, 1), g - h + i)


def betti_disjoint_union(children: list[BettiVector]) -> BettiVector:
    """Componentwise sum of labels; homology is additive over disjoint unions."""
    if not children:
        raise InvalidDescriptorError("disjoint union requires at least one child")
    if len({c.reduced for c in children}) > 1:
        raise InvalidDescriptorError("children mix reduced and unreduced labels")
    betti = tuple(sum(c.betti[k] for c in children) for k in range(4))
    euler = sum(c.euler for c in children)
    return BettiVector.of(betti, euler, children[0].reduced)


def betti_cube_multi_complement(cutouts: list[tuple[int, int, int, int]]) -> BettiVector:
    """Label of a solid 4-cube minus several pairwise disjoint cut-outs.

    Additive extension of the single-cut-out formula: each cut-out with
    parameters (g, h, i, j) contributes h + i*j tunnels, g + i*(j+1) voids,
    and one enclosed 3-cavity.  A (0, 0, 0, 0) entry is a plain 4-ball
    cavity.  This formula is validated against the homology engine before
    being trusted for labeling (see the acceptance suite).
    """
    for cut in cutouts:
        _validate_ghij(*cut, allow_trivial=True)
    b1 = sum(h + i * j for (_, h, i, j) in cutouts)
    b2 = sum(g + i * (j + 1) for (g, _, i, j) in cutouts)
    b3 = len(cutouts)
    betti = (1, b1, b2, b3)
    euler = betti[0] - betti[1] + betti[2] - betti[3]
    return BettiVector.of(betti, euler)


# ---------------------------------------------------------------------------
# embedded-object label catalog
#
# Homotopy-type labels of the rasterizable shape kinds, per grid dimension.
# A None entry means the kind cannot be labeled in that dimension.

_SHELL_LABELS = {2: (1, 1, 0, 0), 3: (1, 0, 1, 0), 4: (1, 0, 0, 1)}

_EMBEDDED_LABELS: dict[str, dict[int, tuple[int, int, int, int]]] = {
    "ball": {2: (1, 0, 0, 0), 3: (1, 0, 0, 0), 4: (1, 0, 0, 0)},
    "sphere_shell": _SHELL_LABELS,
    "solid_torus": {3: (1, 1, 0, 0), 4: (1, 1, 0, 0)},
    "torus_shell": {3: (1, 2, 1, 0), 4: (1, 2, 1, 0)},
    "S1xB3": {4: (1, 1, 0, 0)},
    "S2xB2": {4: (1, 0, 1, 0)},
    "T2xB2": {4: (1, 2, 1, 0)},
    "tube_IxS2": {3: (1, 0, 1, 0), 4: (1, 0, 1, 0)},
    "tube_I2xS1": {3: (1, 1, 0, 0), 4: (1, 1, 0, 0)},
    "tube_IxT2": {3: (1, 2, 1, 0), 4: (1, 2, 1, 0)},
    "open_tube": {2: (1, 0, 0, 0), 3: (1, 0, 0, 0), 4: (1, 0, 0, 0)},
    "trefoil_tube": {3: (1, 1, 0, 0), 4: (1, 1, 0, 0)},
    "hopf_link": {3: (2, 2, 0, 0), 4: (2, 2, 0, 0)},
    "circle_wedge": {},  # genus-parametrized, handled below
}


def embedded_label(kind: str, ndim: int, genus: int = 0) -> BettiVector:
    """Homotopy-type label of an embedded catalog shape.

    ``circle_wedge`` is a wedge of ``genus`` circles thickened into a tube,
    i.e. a genus-``genus`` handlebody.
    """
    if kind == "circle_wedge":
        if genus < 1:
            raise InvalidDescriptorError("circle_wedge requires genus >= 1")
        if ndim < 2:
            raise InvalidDescriptorError("circle_wedge needs a 2d+ grid")
        betti = (1, genus, 0, 0)
    else:
        table = _EMBEDDED_LABELS.get(kind)
        if table is None or ndim not in table:
            raise InvalidDescriptorError(
                f"no label for embedded kind {kind!r} in dimension {ndim}"
            )
        betti = table[ndim]
    euler = betti[0] - betti[1] + betti[2] - betti[3]
    return BettiVector.of(betti, euler)


def cavity_label(ndim: int, cutouts: list[tuple[int, int, int, int]]) -> BettiVector:
    """Label of a solid n-cube minus disjoint cut-outs, for n in {2, 3, 4}.

    In 4D each cut-out is a boundary-sum manifold with parameters
    (g, h, i, j).  The lower-dimensional analogs reuse g as the handlebody
    genus: a 3D cut-out of genus g contributes g tunnels and one cavity wall;
    a 2D cut-out is a disc hole (g must be 0).
    """
    if ndim == 4:
        return betti_cube_multi_complement(cutouts)
    if ndim == 3:
        for g, h, i, j in cutouts:
            if h or i or j:
                raise InvalidDescriptorError(
                    "3d cut-outs are genus-g handlebodies: h = i = j = 0"
                )
        b1 = sum(g for (g, _, _, _) in cutouts)
        betti = (1, b1, len(cutouts), 0)
    elif ndim == 2:
        for cut in cutouts:
            if any(cut):
                raise InvalidDescriptorError("2d cut-outs are disc holes only")
        betti = (1, len(cutouts), 0, 0)
    else:
        raise InvalidDescriptorError(f"unsupported dimension {ndim}")
    euler = betti[0] - betti[1] + betti[2] - betti[3]
    return BettiVector.of(betti, euler)


# ---------------------------------------------------------------------------
# construction descriptors

@dataclass
class ConstructionDescriptor:
    """Symbolic recipe a sample was built from; labels derive from it.

    ``cutouts`` lists the cut-out parameter tuples for ``cube_complement``
    samples (one entry per cavity).  ``kind``/``genus`` identify the shape of
    an ``embedded_object``.  ``placement`` and ``deformation_log`` are
    free-form provenance records carried through to the manifest.
    """

    family: str
    g: int = 0
    h: int = 0
    i: int = 0
    j: int = 0
    kind: str | None = None
    genus: int = 0
    ndim: int = 0
    cutouts: tuple[tuple[int, int, int, int], ...] = ()
    children: tuple["ConstructionDescriptor", ...] = ()
    placement: tuple[dict[str, Any], ...] = ()
    deformation_log: tuple[dict[str, Any], ...] = ()

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise InvalidDescriptorError(f"unknown family {self.family!r}")
        if self.family == "disjoint_union":
            if not self.children:
                raise InvalidDescriptorError("disjoint_union requires children")
        elif self.family in ("closed_sum", "boundary_sum"):
            if self.children:
                raise InvalidDescriptorError(f"{self.family} takes no children")
            _validate_ghij(self.g, self.h, self.i, self.j)
            self._check_cap((self.g, self.h, self.i, self.j))
        elif self.family == "cube_complement":
            if self.children:
                raise InvalidDescriptorError("cube_complement takes no children")
            if not self.cutouts:
                _validate_ghij(self.g, self.h, self.i, self.j)
                self._check_cap((self.g, self.h, self.i, self.j))
            for cut in self.cutouts:
                self._check_cap(cut)
        elif self.family == "embedded_object":
            if self.kind is None:
                raise InvalidDescriptorError("embedded_object requires a kind")

    @staticmethod
    def _check_cap(params) -> None:
        if max(params) > MAX_GLUE_COUNT:
            raise InvalidDescriptorError(
                f"glue counts above {MAX_GLUE_COUNT} are not rasterizable: {params}"
            )

    def label(self) -> BettiVector:
        if self.family == "closed_sum":
            return betti_closed_sum(self.g, self.h, self.i, self.j)
        if self.family == "boundary_sum":
            return betti_boundary_sum(self.g, self.h, self.i, self.j)
        if self.family == "cube_complement":
            cuts = list(self.cutouts) or [(self.g, self.h, self.i, self.j)]
            ndim = self.ndim or 4
            return cavity_label(ndim, cuts)
        if self.family == "embedded_object":
            return embedded_label(self.kind, self.ndim or 3, self.genus)
        return betti_disjoint_union([c.label() for c in self.children])

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"family": self.family}
        if self.family in ("closed_sum", "boundary_sum") or (
            self.family == "cube_complement" and not self.cutouts
        ):
            out.update(g=self.g, h=self.h, i=self.i, j=self.j)
        if self.cutouts:
            out["cutouts"] = [list(c) for c in self.cutouts]
        if self.kind is not None:
            out["kind"] = self.kind
        if self.genus:
            out["genus"] = self.genus
        if self.ndim:
            out["ndim"] = self.ndim
        if self.children:
            out["children"] = [c.to_dict() for c in self.children]
        if self.placement:
            out["placement"] = list(self.placement)
        if self.deformation_log:
            out["deformation_log"] = list(self.deformation_log)
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ConstructionDescriptor":
        return cls(
            family=d["family"],
            g=d.get("g", 0),
            h=d.get("h", 0),
            i=d.get("i", 0),
            j=d.get("j", 0),
            kind=d.get("kind"),
            genus=d.get("genus", 0),
            ndim=d.get("ndim", 0),
            cutouts=tuple(tuple(c) for c in d.get("cutouts", ())),
            children=tuple(cls.from_dict(c) for c in d.get("children", ())),
            placement=tuple(d.get("placement", ())),
            deformation_log=tuple(d.get("deformation_log", ())),
        )
