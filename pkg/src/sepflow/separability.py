"""Axis-aligned separability: 1-D gap counts, per-axis counts, and certified families.

The central quantity is the 1-D gap count of a merged, sorted two-color
sequence: the number of adjacent opposite-color pairs.  It equals the
minimal number of thresholds separating the colors on a line.  Per-axis
counts come from coordinate projections; their minimum over axes is the
best achievable with hyperplanes orthogonal to a single coordinate axis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import LabeledPair, project

__all__ = [
    "Hyperplane",
    "SeparatingFamily",
    "gaps_1d",
    "z_axis",
    "z_perp",
    "axis_family",
    "verify_family",
    "is_interspersed_collinear",
    "family_to_json",
    "family_from_json",
]

UNIT_TOL = 1e-12
ON_PLANE_TOL = 1e-12


@dataclass(frozen=True)
class Hyperplane:
    """Plane {x : normal . x + offset = 0} with a unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(normal) - 1.0) > UNIT_TOL:
            raise ValueError("normal must be a unit vector")
        normal.setflags(write=False)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))

    def side(self, points: np.ndarray) -> np.ndarray:
        return points @ self.normal + self.offset


@dataclass(frozen=True)
class SeparatingFamily:
    """A finite plane collection; `certified` means verify_family has passed."""

    planes: tuple[Hyperplane, ...]
    kind: str = "oblique"  # "axis" or "oblique"
    axis: Optional[int] = None  # 1-based, for kind == "axis"
    certified: bool = False

    def __post_init__(self):
        object.__setattr__(self, "planes", tuple(self.planes))
        if self.kind not in ("axis", "oblique"):
            raise ValueError("kind must be 'axis' or 'oblique'")
        if self.kind == "axis" and self.axis is None:
            raise ValueError("axis-aligned family needs its axis")


def gaps_1d(red_scalars: Sequence[float], blue_scalars: Sequence[float]) -> int:
    """Number of adjacent opposite-color pairs in the merged sorted sequence.

    Equals the minimal number of separating thresholds on the line.  Raises
    if any scalar appears in both lists or twice overall.
    """
    reds = np.asarray(red_scalars, dtype=float)
    blues = np.asarray(blue_scalars, dtype=float)
    if reds.size == 0 or blues.size == 0:
        raise ValueError("both colors must be nonempty")
    merged = np.concatenate([reds, blues])
    if len(np.unique(merged)) != len(merged):
        raise ValueError("duplicate scalar across the sequences")
    labels = np.zeros(len(merged), dtype=np.int8)
    labels[len(reds) :] = 1
    lab = labels[np.argsort(merged)]
    return int(np.sum(lab[1:] != lab[:-1]))


def z_axis(pair: LabeledPair, axis: int) -> int:
    """Gap count of the dataset projected on `axis` (1-based)."""
    reds, blues = project(pair, axis)
    return gaps_1d(reds, blues)


def z_perp(pair: LabeledPair) -> tuple[int, int]:
    """(minimal per-axis gap count, smallest 1-based axis attaining it)."""
    best_val, best_axis = None, None
    for axis in range(1, pair.dim + 1):
        v = z_axis(pair, axis)
        if best_val is None or v < best_val:
            best_val, best_axis = v, axis
    return best_val, best_axis


def _gap_midpoints(pair: LabeledPair, axis: int) -> list[float]:
    reds, blues = project(pair, axis)
    merged = np.concatenate([reds, blues])
    labels = np.zeros(len(merged), dtype=np.int8)
    labels[len(reds) :] = 1
    order = np.argsort(merged)
    vals, lab = merged[order], labels[order]
    return [
        float((vals[i] + vals[i + 1]) / 2.0)
        for i in range(len(vals) - 1)
        if lab[i] != lab[i + 1]
    ]


def axis_family(pair: LabeledPair, axis: int) -> SeparatingFamily:
    """Axis-aligned separating family with planes at opposite-color gap midpoints.

    Midpoint placement maximizes the margin to the data.  The family always
    verifies by construction and is returned certified.
    """
    mids = _gap_midpoints(pair, axis)
    normal = np.zeros(pair.dim)
    normal[axis - 1] = 1.0
    planes = tuple(Hyperplane(normal=normal, offset=-m) for m in mids)
    fam = SeparatingFamily(planes=planes, kind="axis", axis=axis, certified=False)
    if not verify_family(pair, fam):
        raise AssertionError("midpoint family failed verification")
    return SeparatingFamily(planes=planes, kind="axis", axis=axis, certified=True)


def verify_family(pair: LabeledPair, family: SeparatingFamily) -> bool:
    """True iff no arrangement cell (restricted to the data) holds both colors.

    Each point gets the strict sign vector of its plane evaluations; a point
    on a plane (within tolerance) makes the separation non-strict and is an
    error.
    """
    points = pair.points()
    if not family.planes:
        return False  # single cell containing both (nonempty) colors
    vals = np.stack([pl.side(points) for pl in family.planes], axis=1)
    if np.any(np.abs(vals) <= ON_PLANE_TOL):
        raise ValueError("non-strict separation: data point on a plane")
    signs = vals > 0
    red_cells = {s.tobytes() for s in signs[: pair.n_red]}
    blue_cells = {s.tobytes() for s in signs[pair.n_red :]}
    return red_cells.isdisjoint(blue_cells)


def is_interspersed_collinear(pair: LabeledPair, tol: float = 1e-9) -> bool:
    """True iff all points lie on one line (within tol) with strictly alternating colors.

    Requires a balanced pair; this is the unique configuration forcing the
    maximal count 2N-1.
    """
    if pair.n_red != pair.n_blue:
        raise ValueError("balanced pair required")
    points = pair.points()
    center = points.mean(axis=0)
    centered = points - center
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    direction = vt[0]
    proj = centered @ direction
    residual = centered - np.outer(proj, direction)
    if np.abs(residual).max() > tol:
        return False
    lab = pair.labels()[np.argsort(proj)]
    return bool(np.all(lab[1:] != lab[:-1]))


def family_to_json(family: SeparatingFamily) -> str:
    return json.dumps(
        {
            "schema": 1,
            "kind": family.kind,
            "axis": family.axis,
            "certified": family.certified,
            "planes": [
                {"normal": [float(v) for v in pl.normal], "offset": float(pl.offset)}
                for pl in family.planes
            ],
        }
    )


def family_from_json(text: str) -> SeparatingFamily:
    payload = json.loads(text)
    planes = tuple(
        Hyperplane(normal=np.array(p["normal"], dtype=float), offset=p["offset"])
        for p in payload["planes"]
    )
    return SeparatingFamily(
        planes=planes,
        kind=payload["kind"],
        axis=payload.get("axis"),
        certified=bool(payload.get("certified", False)),
    )
