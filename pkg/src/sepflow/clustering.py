"""Linear-components decomposition of one color class.

Groups of at most d same-color points are placed on their common
hyperplane and isolated between two parallel margin planes placed at half
the minimal distance from the base plane to any other data point.  The
union of all margin planes separates the two colors, using 2*ceil(Nc/d)
planes where Nc is the size of the clustered color class.

When d does not divide Nc the final group is completed with points reused
from the preceding group so that it still spans a unique hyperplane; the
reused points lie on that base, hence inside the final strip, which is
harmless (a strip may contain extra clustered-color points).

A base plane orthogonal to the chosen target axis would leave no in-plane
direction with positive target component; such planes are repaired by
exchanging one representative point between clusters, which generically
tilts both bases.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .geometry import LabeledPair
from .separability import Hyperplane, SeparatingFamily, verify_family

__all__ = [
    "Cluster",
    "ClusterFamily",
    "hyperplane_through",
    "linear_components",
    "repair_axis_orthogonality",
    "cluster_direction",
    "cluster_family_to_json",
]

ON_BASE_TOL = 1e-9
ORTHO_TOL = 1e-9
_REPAIR_MAX_ROUNDS = 32


@dataclass(frozen=True)
class Cluster:
    """One isolated group: base plane, margin offsets, in-plane direction.

    members/padding index into the clustered color's point list; padding
    points are reused from other clusters to complete a short final group.
    The strip is {x : margin_lo < normal.x + base_offset + ... } written via
    offsets: margin_hi > margin_lo and the base offset lies between them.
    """

    members: tuple[int, ...]
    padding: tuple[int, ...]
    base: Hyperplane
    margin_hi: float  # offset of the upper margin plane (normal.x + margin_hi = 0)
    margin_lo: float
    direction: np.ndarray  # unit vector in the base plane with positive target component

    def __post_init__(self):
        direction = np.asarray(self.direction, dtype=float)
        direction.setflags(write=False)
        object.__setattr__(self, "direction", direction)
        if not self.margin_hi > self.base.offset > self.margin_lo:
            raise ValueError("base offset must lie strictly between the margins")

    @property
    def half_width(self) -> float:
        return (self.margin_hi - self.margin_lo) / 2.0

    def margin_planes(self) -> tuple[Hyperplane, Hyperplane]:
        return (
            Hyperplane(normal=self.base.normal, offset=self.margin_hi),
            Hyperplane(normal=self.base.normal, offset=self.margin_lo),
        )


@dataclass(frozen=True)
class ClusterFamily:
    clusters: tuple[Cluster, ...]
    target_axis: int  # 1-based
    color_clustered: str  # "red" or "blue"

    def separating_family(self) -> SeparatingFamily:
        planes = []
        for c in self.clusters:
            planes.extend(c.margin_planes())
        return SeparatingFamily(planes=tuple(planes), kind="oblique")


def hyperplane_through(points: np.ndarray, target_axis: Optional[int] = None) -> Hyperplane:
    """The hyperplane through d affinely independent points in R^d.

    Sign convention: first component of the normal exceeding 1e-12 in
    magnitude is positive.  With fewer than d points the affine span is not
    a full hyperplane; among the containing hyperplanes the one whose
    normal is most orthogonal to `target_axis` (1-based) is returned, which
    keeps the downstream axis-avoidance constraint satisfiable.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("expected a 2-D array of points")
    k, d = pts.shape
    if k > d:
        raise ValueError("at most d points span a hyperplane in R^d")
    diffs = pts[1:] - pts[0]
    # Null space of the difference rows = normal candidates.
    _, svals, vt = np.linalg.svd(diffs, full_matrices=True) if k > 1 else (
        None,
        np.zeros(0),
        np.eye(d),
    )
    rank = int(np.sum(svals > 1e-12 * max(1.0, svals[0] if len(svals) else 1.0)))
    if rank < k - 1:
        raise ValueError("degenerate cluster: points are affinely dependent")
    null_basis = vt[rank:]  # (d - rank, d), orthonormal
    if len(null_basis) == 1 or target_axis is None:
        normal = null_basis[0]
    else:
        # pick the null-space direction minimizing |normal . e_target|
        e = np.zeros(d)
        e[target_axis - 1] = 1.0
        coeffs = null_basis @ e
        if np.linalg.norm(coeffs) < 1e-12:
            normal = null_basis[0]
        else:
            # any unit vector in the null space orthogonal to the projection
            # of e_target; build one by Gram-Schmidt within coefficients
            c = coeffs / np.linalg.norm(coeffs)
            basis = np.eye(len(null_basis))
            cand = basis - np.outer(basis @ c, c)
            norms = np.linalg.norm(cand, axis=1)
            j = int(np.argmax(norms))
            if norms[j] < 1e-12:
                normal = null_basis[0]
            else:
                normal = (cand[j] / norms[j]) @ null_basis
    normal = normal / np.linalg.norm(normal)
    lead = np.nonzero(np.abs(normal) > 1e-12)[0]
    if len(lead) and normal[lead[0]] < 0:
        normal = -normal
    offset = -float(np.mean(pts @ normal))
    return Hyperplane(normal=normal, offset=offset)


def cluster_direction(cluster: Cluster, target_axis: int) -> np.ndarray:
    """Unit in-plane direction maximizing the target-axis component.

    The projection of the target axis onto the base plane, normalized;
    degenerate exactly when the base is orthogonal to the axis.
    """
    u = cluster.base.normal
    d = len(u)
    e = np.zeros(d)
    e[target_axis - 1] = 1.0
    v = e - (u @ e) * u
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        raise ValueError("base plane orthogonal to the target axis")
    return v / norm


def _build_cluster(
    all_points: np.ndarray,
    clustered_points: np.ndarray,
    members: tuple[int, ...],
    padding: tuple[int, ...],
    target_axis: int,
) -> Cluster:
    own = clustered_points[list(members) + list(padding)]
    base = hyperplane_through(own, target_axis=target_axis)
    dists = np.abs(all_points @ base.normal + base.offset)
    on_base = dists <= ON_BASE_TOL
    expected_on = len(members) + len(padding)
    if int(on_base.sum()) > expected_on:
        raise ValueError("not in general position: extra point on a base plane")
    if dists[on_base].size != expected_on or np.any(
        np.abs(own @ base.normal + base.offset) > ON_BASE_TOL
    ):
        raise ValueError("cluster points failed to land on their base plane")
    off_base = dists[~on_base]
    if off_base.size == 0:
        raise ValueError("no off-base points to set a margin from")
    half = float(off_base.min()) / 2.0
    cluster = Cluster(
        members=members,
        padding=padding,
        base=base,
        margin_hi=base.offset + half,
        margin_lo=base.offset - half,
        direction=np.zeros(all_points.shape[1]),
    )
    if abs(base.normal[target_axis - 1]) >= 1.0 - ORTHO_TOL:
        return cluster  # direction deferred; repair will fix the base first
    return replace(cluster, direction=cluster_direction(cluster, target_axis))


def _partition(n: int, d: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Consecutive chunks of d sorted indices; short final chunk padded from the previous."""
    groups: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    count = -(-n // d)
    for j in range(count):
        members = tuple(range(j * d, min((j + 1) * d, n)))
        padding: tuple[int, ...] = ()
        if len(members) < d:
            need = d - len(members)
            if j == 0:
                padding = ()  # fewer points than d in total: a smaller affine span
            else:
                prev = tuple(range((j - 1) * d, j * d))
                padding = prev[-need:]
        groups.append((members, padding))
    return groups


def linear_components(
    pair: LabeledPair, target_axis: int, color: str = "auto"
) -> ClusterFamily:
    """Decompose one color class into isolated clusters of at most d points.

    The clustered class is sorted along `target_axis` and chunked into
    ceil(Nc/d) consecutive groups; each group's base plane and half-minimal-
    distance margins are built and certified, and bases orthogonal to the
    target axis are repaired by representative exchange.  The margin planes
    of the result form a verified separating family.
    """
    d = pair.dim
    if d < 2:
        raise ValueError("linear components require d >= 2")
    if not 1 <= target_axis <= d:
        raise ValueError("target_axis out of range")
    if color == "auto":
        color = "red" if pair.n_red <= pair.n_blue else "blue"
    if color not in ("red", "blue"):
        raise ValueError("color must be 'auto', 'red' or 'blue'")
    clustered = pair.reds if color == "red" else pair.blues
    order = np.argsort(clustered[:, target_axis - 1])
    sorted_pts = clustered[order]
    all_points = pair.points()

    groups = _partition(len(sorted_pts), d)
    clusters = []
    for members, padding in groups:
        # map sorted positions back to original indices in the color class
        m = tuple(int(order[i]) for i in members)
        p = tuple(int(order[i]) for i in padding)
        clusters.append(
            _build_cluster(all_points, clustered, m, p, target_axis)
        )
    family = ClusterFamily(
        clusters=tuple(clusters), target_axis=target_axis, color_clustered=color
    )
    family = repair_axis_orthogonality(family, pair)
    _certify(family, pair)
    return family


def _offenders(family: ClusterFamily) -> list[int]:
    axis = family.target_axis
    return [
        j
        for j, c in enumerate(family.clusters)
        if abs(c.base.normal[axis - 1]) >= 1.0 - ORTHO_TOL
    ]


def repair_axis_orthogonality(
    family: ClusterFamily, pair: LabeledPair
) -> ClusterFamily:
    """Exchange representatives until no base plane is orthogonal to the target axis.

    Offending clusters swap one member cyclically (a fixed-point-free
    permutation when there are at least two); a lone offender borrows a
    representative from a non-offending partner.  Generic data never needs
    this; adversarial axis-aligned configurations converge in one round.
    """
    clustered = pair.reds if family.color_clustered == "red" else pair.blues
    all_points = pair.points()
    clusters = list(family.clusters)
    for _ in range(_REPAIR_MAX_ROUNDS):
        bad = _offenders(ClusterFamily(tuple(clusters), family.target_axis, family.color_clustered))
        if not bad:
            break
        if len(clusters) == 1:
            raise RuntimeError(
                "re-partition required: single cluster orthogonal to the target axis"
            )
        if len(bad) >= 2:
            ring = bad
        else:
            partner = next(j for j in range(len(clusters)) if j not in bad)
            ring = [bad[0], partner]
        # cyclic exchange of the first member among the ring
        reps = [clusters[j].members[0] for j in ring]
        shifted = reps[1:] + reps[:1]
        for j, new_rep in zip(ring, shifted):
            members = (new_rep,) + clusters[j].members[1:]
            clusters[j] = _build_cluster(
                all_points, clustered, members, clusters[j].padding, family.target_axis
            )
    else:
        raise RuntimeError("re-partition required: orthogonality repair did not converge")
    # directions may have been deferred for offending bases
    fixed = []
    for c in clusters:
        if np.linalg.norm(c.direction) == 0.0:
            c = replace(c, direction=cluster_direction(c, family.target_axis))
        fixed.append(c)
    return ClusterFamily(tuple(fixed), family.target_axis, family.color_clustered)


def _certify(family: ClusterFamily, pair: LabeledPair) -> None:
    """Check every structural invariant; raises on any violation."""
    d = pair.dim
    clustered = pair.reds if family.color_clustered == "red" else pair.blues
    other = pair.blues if family.color_clustered == "red" else pair.reds
    n_c = len(clustered)
    expect = -(-n_c // d)
    if len(family.clusters) != expect:
        raise AssertionError("cluster count must be ceil(Nc/d)")
    covered = set()
    for c in family.clusters:
        covered.update(c.members)
        u, h = c.base.normal, c.base.offset
        if abs(u[family.target_axis - 1]) >= 1.0 - ORTHO_TOL:
            raise AssertionError("base orthogonal to target axis")
        v = c.direction
        if abs(v @ u) > 1e-12 or v[family.target_axis - 1] <= 0:
            raise AssertionError("direction must be in-plane with positive target component")
        # strip content: clustered color only
        inside = np.abs(other @ u + h) < c.half_width
        if np.any(inside):
            raise AssertionError("opposite-color point inside a strip")
    if covered != set(range(n_c)):
        raise AssertionError("clusters must cover the clustered color class")
    if not verify_family(pair, family.separating_family()):
        raise AssertionError("margin planes failed separation verification")


def cluster_family_to_json(family: ClusterFamily) -> str:
    return json.dumps(
        {
            "schema": 1,
            "target_axis": family.target_axis,
            "color_clustered": family.color_clustered,
            "clusters": [
                {
                    "members": list(c.members),
                    "padding": list(c.padding),
                    "normal": [float(v) for v in c.base.normal],
                    "base_offset": float(c.base.offset),
                    "margin_hi": float(c.margin_hi),
                    "margin_lo": float(c.margin_lo),
                    "direction": [float(v) for v in c.direction],
                }
                for c in family.clusters
            ],
        }
    )
