"""Labeled point-cloud data model, random generation, and genericity predicates.

A dataset is a pair of nonempty point sets ("reds" and "blues") inside the
unit cube with all points pairwise distinct.  Two genericity notions matter
downstream: per-axis distinct coordinates (needed by axis-aligned
separators) and general position (no hyperplane through more than d
points, needed by the cluster construction).

Axes are 1-based in every public signature, matching the usual coordinate
notation x^(1), ..., x^(d).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

__all__ = [
    "LabeledPair",
    "GenericityReport",
    "sample_pair",
    "check_genericity",
    "project",
    "pair_to_json",
    "pair_from_json",
]

MAX_REJECTIONS = 10**6
# Above this many (d+1)-subsets the general-position test switches from
# exhaustive to a seeded random spot-check.
EXHAUSTIVE_SUBSET_CAP = 200_000
SPOT_CHECK_SUBSETS = 100_000


@dataclass(frozen=True)
class LabeledPair:
    """Immutable labeled dataset: reds (n_red, d) and blues (n_blue, d) in [0,1]^d."""

    reds: np.ndarray
    blues: np.ndarray

    def __post_init__(self):
        reds = np.asarray(self.reds, dtype=float)
        blues = np.asarray(self.blues, dtype=float)
        if reds.ndim != 2 or blues.ndim != 2:
            raise ValueError("point sets must be 2-D arrays")
        if reds.shape[0] == 0 or blues.shape[0] == 0:
            raise ValueError("both colors must be nonempty")
        if reds.shape[1] != blues.shape[1]:
            raise ValueError("dimension mismatch between colors")
        allpts = np.vstack([reds, blues])
        if allpts.min() < 0.0 or allpts.max() > 1.0:
            raise ValueError("input coordinates must lie in [0, 1]")
        if len(np.unique(allpts, axis=0)) != len(allpts):
            raise ValueError("points must be pairwise distinct")
        reds.setflags(write=False)
        blues.setflags(write=False)
        object.__setattr__(self, "reds", reds)
        object.__setattr__(self, "blues", blues)

    @property
    def dim(self) -> int:
        return self.reds.shape[1]

    @property
    def n_red(self) -> int:
        return self.reds.shape[0]

    @property
    def n_blue(self) -> int:
        return self.blues.shape[0]

    def points(self) -> np.ndarray:
        """All points stacked, reds first."""
        return np.vstack([self.reds, self.blues])

    def labels(self) -> np.ndarray:
        """0 for red, 1 for blue, aligned with points()."""
        lab = np.zeros(self.n_red + self.n_blue, dtype=np.int8)
        lab[self.n_red :] = 1
        return lab


@dataclass(frozen=True)
class GenericityReport:
    distinct_coords: bool
    general_position: bool
    # Indices into points() of a concrete violating subset, present whenever
    # the corresponding flag is false.
    witness: Optional[list[int]] = None
    reason: Optional[str] = None


def sample_pair(
    d: int,
    n_red: int,
    n_blue: int,
    seed: int,
    law: str = "uniform_cube",
    gaussian_std: float = 0.25,
) -> LabeledPair:
    """Draw a random labeled pair, deterministically for a fixed seed.

    `uniform_cube` draws i.i.d. uniform coordinates.  `isotropic_gaussian`
    draws from N((1/2, ..., 1/2), std^2 I) and rejects any point outside the
    cube, so the returned coordinates still lie in [0,1]^d.  Exact duplicate
    points (probability zero, but possible in floats) are redrawn.
    """
    if d < 1 or n_red < 1 or n_blue < 1:
        raise ValueError("d, n_red, n_blue must be positive")
    if law not in ("uniform_cube", "isotropic_gaussian"):
        raise ValueError(f"unknown law {law!r}")
    rng = np.random.default_rng(seed)
    total = n_red + n_blue
    pts = np.empty((0, d))
    rejected = 0
    while len(pts) < total:
        want = total - len(pts)
        if law == "uniform_cube":
            batch = rng.random((want, d))
        else:
            batch = rng.normal(0.5, gaussian_std, size=(want, d))
            inside = np.all((batch >= 0.0) & (batch <= 1.0), axis=1)
            rejected += int(want - inside.sum())
            if rejected > MAX_REJECTIONS:
                raise RuntimeError("degenerate law: rejection cap exceeded")
            batch = batch[inside]
        pts = np.vstack([pts, batch])
        # drop exact duplicates and redraw
        _, keep = np.unique(pts, axis=0, return_index=True)
        pts = pts[np.sort(keep)]
    return LabeledPair(reds=pts[:n_red], blues=pts[n_red:total])


def _distinct_coords_check(points: np.ndarray, tol: float):
    n, d = points.shape
    for axis in range(d):
        order = np.argsort(points[:, axis])
        vals = points[order, axis]
        gaps = np.diff(vals)
        bad = np.nonzero(gaps <= tol)[0]
        if len(bad):
            i = bad[0]
            return False, [int(order[i]), int(order[i + 1])], axis + 1
    return True, None, None


def _subset_dets(points: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    """Batched homogeneous determinants for (d+1)-subsets of rows."""
    gathered = points[subsets]  # (m, d+1, d)
    ones = np.ones(gathered.shape[:2] + (1,))
    return np.linalg.det(np.concatenate([gathered, ones], axis=2))


def check_genericity(pair: LabeledPair, tol: float = 1e-9) -> GenericityReport:
    """Test distinct per-axis coordinates and general position.

    General position: every (d+1)-subset of the points has affine rank d,
    decided by the homogeneous determinant with the scale-invariant
    threshold |det| > tol * (max row norm)^d.  When the number of subsets
    exceeds a tractable cap, a seeded random spot-check is used instead;
    downstream constructions re-certify the specific hyperplanes they build,
    so the spot-check only guards against gross degeneracy.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    points = pair.points()
    n, d = points.shape
    ok_coords, coord_witness, axis = _distinct_coords_check(points, tol)

    gp_witness = None
    ok_gp = True
    if n >= d + 1:
        from math import comb

        n_subsets = comb(n, d + 1)
        if n_subsets <= EXHAUSTIVE_SUBSET_CAP:
            subsets = np.array(list(combinations(range(n), d + 1)))
        else:
            rng = np.random.default_rng(0)
            subsets = np.array(
                [rng.choice(n, size=d + 1, replace=False) for _ in range(SPOT_CHECK_SUBSETS)]
            )
        # chunk to bound memory
        for start in range(0, len(subsets), 50_000):
            chunk = subsets[start : start + 50_000]
            dets = _subset_dets(points, chunk)
            scale = np.maximum(
                1.0, np.abs(points[chunk]).max(axis=(1, 2))
            ) ** d
            bad = np.nonzero(np.abs(dets) <= tol * scale)[0]
            if len(bad):
                ok_gp = False
                gp_witness = [int(i) for i in chunk[bad[0]]]
                break

    if not ok_coords:
        return GenericityReport(
            distinct_coords=False,
            general_position=ok_gp,
            witness=coord_witness if not ok_coords else gp_witness,
            reason=f"shared coordinate on axis {axis}",
        )
    if not ok_gp:
        return GenericityReport(
            distinct_coords=True,
            general_position=False,
            witness=gp_witness,
            reason="affinely degenerate subset",
        )
    return GenericityReport(distinct_coords=True, general_position=True)


def project(pair: LabeledPair, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates of reds and blues along `axis` (1-based), labels preserved."""
    if not 1 <= axis <= pair.dim:
        raise ValueError(f"axis must be in 1..{pair.dim}")
    reds = pair.reds[:, axis - 1]
    blues = pair.blues[:, axis - 1]
    merged = np.concatenate([reds, blues])
    if len(np.unique(merged)) != len(merged):
        raise ValueError(f"coordinate collision on axis {axis}")
    return reds.copy(), blues.copy()


def pair_to_json(pair: LabeledPair) -> str:
    # json emits floats with repr(), i.e. shortest round-trip form, so the
    # serialized coordinates reconstruct bit-exactly.
    return json.dumps(
        {
            "schema": 1,
            "dim": pair.dim,
            "reds": [[float(v) for v in row] for row in pair.reds],
            "blues": [[float(v) for v in row] for row in pair.blues],
        }
    )


def pair_from_json(text: str) -> LabeledPair:
    payload = json.loads(text)
    dim = payload["dim"]
    reds = np.array(payload["reds"], dtype=float)
    blues = np.array(payload["blues"], dtype=float)
    if reds.shape[1] != dim or blues.shape[1] != dim:
        raise ValueError("dim field inconsistent with coordinates")
    return LabeledPair(reds=reds, blues=blues)
