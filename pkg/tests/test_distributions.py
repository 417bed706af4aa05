"""Tests for the exact separability-count distributions."""

import math

import pytest
from gmpy2 import mpq

import numpy as np

from sepflow.distributions import (
    ORACLE_MAX_N,
    Pmf1D,
    asymptotic_p_max,
    binomial,
    ccdf_zperp,
    fig4_lower_bound_table,
    montecarlo_ccdf,
    montecarlo_report,
    p_not_linearly_separable,
    pmf_z1,
    pmf_z1_hypergeometric,
    pmf_z1_oracle,
    rational_str,
    write_fig4_csv,
)


def test_binomial_matches_math_comb():
    for n in range(0, 12):
        for k in range(-1, n + 2):
            assert binomial(n, k) == (math.comb(n, k) if 0 <= k <= n else 0)


def test_pmf_n1_is_point_mass():
    pmf = pmf_z1(1)
    assert pmf.mass[1] == 1
    assert pmf.total() == 1


def test_pmf_n2_is_uniform_on_three_values():
    pmf = pmf_z1(2)
    assert [pmf.mass[k] for k in (1, 2, 3)] == [mpq(1, 3)] * 3


def test_pmf_matches_exhaustive_oracle():
    for n in range(1, 8):
        oracle = pmf_z1_oracle(n)
        law = pmf_z1(n)
        for k in range(1, 2 * n):
            assert law.mass[k] == oracle.mass[k]


def test_oracle_refuses_large_n():
    with pytest.raises(ValueError):
        pmf_z1_oracle(ORACLE_MAX_N + 1)


def test_total_is_exactly_one():
    for n in (1, 2, 3, 5, 17, 60):
        assert pmf_z1(n).total() == 1


def test_endpoint_masses_closed_form():
    # both extremes carry mass 2 (N!)^2 / (2N)!
    for n in (1, 2, 5, 20):
        expected = mpq(2 * math.factorial(n) ** 2, math.factorial(2 * n))
        pmf = pmf_z1(n)
        assert pmf.mass[1] == expected
        assert pmf.mass[2 * n - 1] == expected


def test_hypergeometric_form_agrees_exactly():
    for n in (1, 2, 3, 7, 15):
        pmf = pmf_z1(n)
        for k in range(1, 2 * n):
            assert pmf_z1_hypergeometric(n, k) == pmf.mass[k]


def test_pmf_support_validation():
    pmf = pmf_z1(3)
    assert set(pmf.mass) == {1, 2, 3, 4, 5}
    with pytest.raises(ValueError):
        Pmf1D(n=2, mass={0: mpq(1)})


def test_ccdf_is_power_of_axis_ccdf():
    for n in (2, 4, 9):
        for k in range(1, 2 * n):
            base = ccdf_zperp(1, n, k)
            for d in (2, 3, 8):
                assert ccdf_zperp(d, n, k) == base**d


def test_ccdf_edge_values():
    # k = 1 is certain; k = 2N-1 needs every axis interspersed
    for n in (2, 5):
        for d in (1, 4):
            assert ccdf_zperp(d, n, 1) == 1
            assert ccdf_zperp(d, n, 2 * n - 1) == mpq(2, math.comb(2 * n, n)) ** d


def test_ccdf_rejects_bad_k():
    with pytest.raises(ValueError):
        ccdf_zperp(2, 3, 0)
    with pytest.raises(ValueError):
        ccdf_zperp(2, 3, 6)


def test_p_not_linearly_separable():
    # no axis achieves a single gap <=> the min count is at least 2
    for n in (2, 4):
        for d in (1, 3):
            assert p_not_linearly_separable(d, n) == ccdf_zperp(d, n, 2)


def test_stirling_estimate_close_for_moderate_n():
    n = 40
    exact = float(mpq(2 * math.factorial(n) ** 2, math.factorial(2 * n)))
    approx = asymptotic_p_max(1, n)
    assert abs(approx / exact - 1) < 0.02


def test_fig4_table_shape_and_certain_row():
    n = 6
    d_list = [1, 2, 4]
    rows = fig4_lower_bound_table(n, d_list)
    assert len(rows) == len(d_list) * (2 * n - 1)
    for k, d, bound in rows:
        assert d in d_list
        if k == 2 * n - 1:
            assert bound == 1.0


def test_write_fig4_csv(tmp_path):
    path = tmp_path / "fig4.csv"
    write_fig4_csv(path, 4, [1, 2])
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "N,d,k,lower_bound"
    assert len(lines) == 1 + 2 * 7


def test_montecarlo_seed_determinism():
    a, _ = montecarlo_ccdf(2, 4, samples=2000, seed=11)
    b, _ = montecarlo_ccdf(2, 4, samples=2000, seed=11)
    c, _ = montecarlo_ccdf(2, 4, samples=2000, seed=12)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_montecarlo_worker_invariance():
    a, _ = montecarlo_ccdf(2, 4, samples=50000, seed=5, workers=1, block_size=9000)
    b, _ = montecarlo_ccdf(2, 4, samples=50000, seed=5, workers=3, block_size=9000)
    assert np.array_equal(a, b)


def test_montecarlo_report_fields_and_agreement():
    rep = montecarlo_report(1, 4, samples=20000, seed=0)
    assert rep["samples"] == 20000
    assert len(rep["k"]) == 7
    assert rep["chi2_pvalue"] > 1e-3
    assert max(abs(z) for z in rep["zscores"]) < 5
    assert 0 <= rep["tv_distance"] < 0.05


def test_rational_str():
    assert rational_str(mpq(1, 3)) == "1/3"
    assert rational_str(mpq(4, 2)) == "2/1"
