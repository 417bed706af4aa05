"""Tests for cluster decomposition of one color class."""

import json
import math

import numpy as np
import pytest

from sepflow.clustering import (
    ClusterFamily,
    cluster_direction,
    cluster_family_to_json,
    hyperplane_through,
    linear_components,
)
from sepflow.geometry import LabeledPair, sample_pair
from sepflow.separability import verify_family


def test_hyperplane_through_full_subset():
    pts = np.array([[0.2, 0.1], [0.6, 0.9]])
    pl = hyperplane_through(pts)
    assert abs(np.linalg.norm(pl.normal) - 1.0) < 1e-12
    assert np.all(np.abs(pl.side(pts)) < 1e-12)


def test_hyperplane_through_underfull_avoids_target_axis():
    # one point in R^2: pick the containing line least aligned with axis 1
    pl = hyperplane_through(np.array([[0.3, 0.4]]), target_axis=1)
    assert abs(pl.normal[0]) < 1e-9
    assert abs(pl.side(np.array([[0.3, 0.4]]))[0]) < 1e-12


def test_hyperplane_through_degenerate_raises():
    pts = np.array([[0.1, 0.1, 0.1], [0.2, 0.2, 0.2], [0.3, 0.3, 0.3]])
    with pytest.raises(ValueError):
        hyperplane_through(pts)
    with pytest.raises(ValueError):
        hyperplane_through(np.zeros((4, 3)))


@pytest.mark.parametrize("d,n_red,n_blue", [(2, 6, 7), (3, 7, 9), (4, 10, 10)])
def test_linear_components_structure(d, n_red, n_blue):
    pair = sample_pair(d, n_red, n_blue, seed=d)
    fam = linear_components(pair, target_axis=1)
    n_c = min(n_red, n_blue)
    assert fam.color_clustered == ("red" if n_red <= n_blue else "blue")
    assert len(fam.clusters) == math.ceil(n_c / d)
    covered = sorted(i for c in fam.clusters for i in c.members)
    assert covered == list(range(n_c))
    for c in fam.clusters:
        assert len(c.members) + len(c.padding) <= d
        assert c.half_width > 0
        assert c.direction[0] > 0
        assert abs(c.direction @ c.base.normal) < 1e-9
    assert verify_family(pair, fam.separating_family())


def test_short_final_cluster_is_padded():
    pair = sample_pair(3, 7, 8, seed=1)
    fam = linear_components(pair, target_axis=2)
    last = fam.clusters[-1]
    assert len(last.members) == 1 and len(last.padding) == 2
    assert all(len(c.padding) == 0 for c in fam.clusters[:-1])


def test_color_selection():
    pair = sample_pair(2, 4, 6, seed=5)
    assert linear_components(pair, 1).color_clustered == "red"
    assert linear_components(pair, 1, color="blue").color_clustered == "blue"
    tie = sample_pair(2, 4, 4, seed=5)
    assert linear_components(tie, 1).color_clustered == "red"
    with pytest.raises(ValueError):
        linear_components(pair, 1, color="green")
    with pytest.raises(ValueError):
        linear_components(pair, 0)


def test_orthogonal_bases_get_repaired():
    # both natural clusters would have bases orthogonal to axis 1
    reds = [[0.3, 0.2], [0.3, 0.8], [0.5, 0.3], [0.5, 0.7]]
    blues = [[0.91, 0.15], [0.93, 0.55], [0.97, 0.95], [0.89, 0.35]]
    pair = LabeledPair(reds=reds, blues=blues)
    fam = linear_components(pair, target_axis=1, color="red")
    for c in fam.clusters:
        assert abs(c.base.normal[0]) < 1.0 - 1e-9
        assert c.direction[0] > 0
    assert verify_family(pair, fam.separating_family())


def test_strips_exclude_other_color():
    pair = sample_pair(3, 9, 9, seed=11)
    fam = linear_components(pair, target_axis=3, color="blue")
    for c in fam.clusters:
        vals = np.abs(pair.reds @ c.base.normal + c.base.offset)
        assert vals.min() >= c.half_width


def test_cluster_direction_positive_component():
    pair = sample_pair(2, 4, 4, seed=3)
    fam = linear_components(pair, target_axis=2)
    for c in fam.clusters:
        v = cluster_direction(c, 2)
        assert v[1] > 0
        assert abs(np.linalg.norm(v) - 1.0) < 1e-12


def test_cluster_family_json():
    pair = sample_pair(2, 5, 5, seed=8)
    fam = linear_components(pair, target_axis=1)
    payload = json.loads(cluster_family_to_json(fam))
    assert payload["target_axis"] == 1
    assert payload["color_clustered"] == "red"
    assert len(payload["clusters"]) == len(fam.clusters)
    first = payload["clusters"][0]
    assert set(first) >= {"members", "normal", "base_offset", "margin_hi", "margin_lo"}
