"""Exact probability laws for the canonical separability of random labeled pairs.

Everything here is carried in exact rational arithmetic (gmpy2.mpq): the
closed forms involve central binomial coefficients that overflow any fixed
width well before N = 30, and several downstream checks require exact
equality, not float agreement.  Floats appear only in the asymptotic
evaluators and at the serialization boundary.

Conventions
-----------
A "pair" is a set of N red and N blue points; in one dimension its gap
count is the number of adjacent opposite-color neighbours in the sorted
merge, which equals the minimal number of separating thresholds.  The
support of that count is {1, ..., 2N-1}.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from gmpy2 import mpq

__all__ = [
    "Pmf1D",
    "binomial",
    "pmf_z1",
    "pmf_z1_oracle",
    "pmf_z1_hypergeometric",
    "ccdf_zperp",
    "p_not_linearly_separable",
    "asymptotic_p_not_linsep",
    "asymptotic_p_max",
    "fig4_lower_bound_table",
    "montecarlo_ccdf",
    "rational_str",
]

ORACLE_MAX_N = 12


def binomial(n: int, k: int) -> int:
    """C(n, k) as an exact integer; zero outside 0 <= k <= n."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def rational_str(q) -> str:
    """Serialize a rational as 'num/den' (always with an explicit denominator)."""
    q = mpq(q)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Pmf1D:
    """Exact law of the 1-D gap count for N red / N blue points.

    mass maps k in {1, ..., 2N-1} to an exact rational probability.
    """

    n: int
    mass: dict[int, mpq]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("N must be positive")
        if set(self.mass) != set(range(1, 2 * self.n)):
            raise ValueError("support must be exactly {1, ..., 2N-1}")
        if any(v < 0 for v in self.mass.values()):
            raise ValueError("negative mass")

    def total(self) -> mpq:
        return sum(self.mass.values(), mpq(0))

    def ccdf(self, k: int) -> mpq:
        """P(gap count >= k)."""
        return sum((v for j, v in self.mass.items() if j >= k), mpq(0))


def pmf_z1(n: int) -> Pmf1D:
    """Exact PMF of the 1-D gap count for a uniform random balanced pair.

    Odd k = 2p-1 has mass 2*C(N-1,p-1)^2 / C(2N,N); even k = 2p has mass
    2*C(N-1,p)*C(N-1,p-1) / C(2N,N).
    """
    if n < 1:
        raise ValueError("N must be positive")
    denom = binomial(2 * n, n)
    mass: dict[int, mpq] = {}
    for k in range(1, 2 * n):
        if k % 2 == 1:
            p = (k + 1) // 2
            num = 2 * binomial(n - 1, p - 1) ** 2
        else:
            p = k // 2
            num = 2 * binomial(n - 1, p) * binomial(n - 1, p - 1)
        mass[k] = mpq(num, denom)
    return Pmf1D(n=n, mass=mass)


def pmf_z1_oracle(n: int) -> Pmf1D:
    """Brute-force law of the gap count by enumerating all C(2N,N) colorings.

    Independent of the closed form: every balanced color sequence of length
    2N is generated and its adjacent color changes are counted directly.
    Intractable beyond N = 12.
    """
    if n < 1:
        raise ValueError("N must be positive")
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle enumeration limited to N <= {ORACLE_MAX_N}")
    length = 2 * n
    edge_mask = (1 << (length - 1)) - 1
    counts = [0] * (2 * n)
    for reds in combinations(range(length), n):
        m = 0
        for i in reds:
            m |= 1 << i
        k = ((m ^ (m >> 1)) & edge_mask).bit_count()
        counts[k] += 1
    denom = binomial(2 * n, n)
    mass = {k: mpq(counts[k], denom) for k in range(1, 2 * n)}
    return Pmf1D(n=n, mass=mass)


def _hypergeom(k: int, m: int, big_k: int, draws: int) -> mpq:
    """Hypergeometric mass C(K,k) C(M-K, n-k) / C(M,n)."""
    return mpq(binomial(big_k, k) * binomial(m - big_k, draws - k), binomial(m, draws))


def pmf_z1_hypergeometric(n: int, k: int) -> mpq:
    """The 1-D gap-count mass written through the hypergeometric distribution.

    Odd k = 2p-1:  N/(2N-1) * H(p-1; 2N-2, N-1, N-1).
    Even k = 2p:  (N-1)/(2N-1) * H(p-1; 2N-2, N-1, N-2).

    The even-branch prefactor differs from the one printed in the source
    derivation, which does not reproduce the PMF; this coefficient does,
    exactly, for every (N, k).
    """
    if not 1 <= k <= 2 * n - 1:
        raise ValueError("k out of range")
    if k % 2 == 1:
        p = (k + 1) // 2
        return mpq(n, 2 * n - 1) * _hypergeom(p - 1, 2 * n - 2, n - 1, n - 1)
    p = k // 2
    return mpq(n - 1, 2 * n - 1) * _hypergeom(p - 1, 2 * n - 2, n - 1, n - 2)


def _ccdf_z1(n: int, k: int) -> mpq:
    """P(1-D gap count >= k) as an exact rational."""
    s = sum(binomial(n - 1, p - 1) ** 2 for p in range((k + 1 + 1) // 2, n + 1))
    s += sum(
        binomial(n - 1, p) * binomial(n - 1, p - 1) for p in range((k + 1) // 2, n)
    )
    return mpq(2 * s, binomial(2 * n, n))


def ccdf_zperp(d: int, n: int, k: int) -> mpq:
    """P(best-axis gap count >= k) for d i.i.d. axes: the 1-D tail to the d-th power."""
    if d < 1 or n < 1:
        raise ValueError("d and N must be positive")
    if not 1 <= k <= 2 * n - 1:
        raise ValueError("k out of range")
    return _ccdf_z1(n, k) ** d


def p_not_linearly_separable(d: int, n: int) -> mpq:
    """P(no single axis-aligned threshold separates) = (1 - 2/C(2N,N))^d."""
    if d < 1 or n < 1:
        raise ValueError("d and N must be positive")
    return (1 - mpq(2, binomial(2 * n, n))) ** d


def asymptotic_p_not_linsep(d: int, n: int) -> float:
    """Stirling approximation exp(-sqrt(pi N) d / 2^(2N-1))."""
    return math.exp(-math.sqrt(math.pi * n) * d * 2.0 ** (1 - 2 * n))


def asymptotic_p_max(d: int, n: int) -> float:
    """Stirling approximation (sqrt(pi N) / 2^(2N-1))^d of the maximal-count probability."""
    return (math.sqrt(math.pi * n) * 2.0 ** (1 - 2 * n)) ** d


def fig4_lower_bound_table(
    n: int, d_list: Sequence[int]
) -> list[tuple[int, int, float]]:
    """Rows (k, d, lower bound on P(count <= k)) with bound 1 - ccdf(d, N, k+1).

    The row at k = 2N-1 is exactly 1 (the count never exceeds 2N-1).
    """
    rows = []
    for d in d_list:
        for k in range(1, 2 * n):
            if k == 2 * n - 1:
                bound = mpq(1)
            else:
                bound = 1 - ccdf_zperp(d, n, k + 1)
            rows.append((k, d, float(bound)))
    return rows


def write_fig4_csv(path, n: int, d_list: Sequence[int]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "d", "k", "lower_bound"])
        for k, d, v in fig4_lower_bound_table(n, d_list):
            writer.writerow([n, d, k, repr(v)])


def _zperp_block(d: int, n: int, size: int, seed_key: tuple[int, int]) -> np.ndarray:
    """Best-axis gap counts for `size` uniform pairs, vectorized.

    Per axis, the gap count is the number of adjacent label changes after
    sorting that coordinate; the block minimum over axes is returned.
    """
    rng = np.random.default_rng(seed_key)
    coords = rng.random((size, 2 * n, d))
    labels = np.zeros(2 * n, dtype=np.int8)
    labels[n:] = 1
    best = np.full(size, 2 * n - 1, dtype=np.int64)
    for axis in range(d):
        order = np.argsort(coords[:, :, axis], axis=1)
        lab = labels[order]
        z = np.sum(lab[:, 1:] != lab[:, :-1], axis=1)
        np.minimum(best, z, out=best)
    return best


def montecarlo_ccdf(
    d: int,
    n: int,
    samples: int,
    seed: int,
    block_size: int = 20_000,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Empirical CCDF of the best-axis gap count over uniform random pairs.

    Returns (ccdf, stderr), indexed by k-1 for k in {1, ..., 2N-1}.  The
    sample stream is split into fixed blocks seeded by (seed, block index),
    so the result is reproducible for a given seed regardless of how many
    workers consume the blocks.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    sizes = [block_size] * (samples // block_size)
    if samples % block_size:
        sizes.append(samples % block_size)
    tasks = [(d, n, size, (seed, b)) for b, size in enumerate(sizes)]
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda t: _zperp_block(*t), tasks))
    else:
        blocks = [_zperp_block(*t) for t in tasks]
    values = np.concatenate(blocks)
    ks = np.arange(1, 2 * n)
    ccdf = np.array([(values >= k).mean() for k in ks])
    stderr = np.sqrt(ccdf * (1.0 - ccdf) / samples)
    return ccdf, stderr


def montecarlo_report(
    d: int, n: int, samples: int, seed: int, workers: int = 1
) -> dict:
    """Empirical-vs-exact comparison: per-k z-scores, chi-square p-value, TV distance.

    The chi-square statistic is computed on the PMF after merging bins whose
    expected count falls below 5 (standard validity rule).
    """
    from scipy.stats import chi2

    ccdf_emp, stderr = montecarlo_ccdf(d, n, samples, seed, workers=workers)
    ks = list(range(1, 2 * n))
    exact = [float(ccdf_zperp(d, n, k)) for k in ks]
    zscores = []
    for k, emp, ex in zip(ks, ccdf_emp, exact):
        sigma = math.sqrt(ex * (1.0 - ex) / samples)
        zscores.append((emp - ex) / sigma if sigma > 0 else 0.0)

    # PMF counts: P(=k) = ccdf(k) - ccdf(k+1)
    emp_pmf = ccdf_emp - np.append(ccdf_emp[1:], 0.0)
    exact_pmf = [
        float(ccdf_zperp(d, n, k) - (ccdf_zperp(d, n, k + 1) if k < 2 * n - 1 else 0))
        for k in ks
    ]
    observed = emp_pmf * samples
    expected = np.array(exact_pmf) * samples
    obs_bins, exp_bins = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5.0:
            obs_bins.append(acc_o)
            exp_bins.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and exp_bins:
        obs_bins[-1] += acc_o
        exp_bins[-1] += acc_e
    stat = sum((o - e) ** 2 / e for o, e in zip(obs_bins, exp_bins))
    dof = max(len(exp_bins) - 1, 1)
    pvalue = float(chi2.sf(stat, dof))
    tv = 0.5 * float(np.abs(emp_pmf - np.array(exact_pmf)).sum())
    return {
        "d": d,
        "N": n,
        "samples": samples,
        "seed": seed,
        "k": ks,
        "empirical_ccdf": [float(v) for v in ccdf_emp],
        "exact_ccdf": exact,
        "zscores": zscores,
        "chi2_stat": float(stat),
        "chi2_dof": dof,
        "chi2_pvalue": pvalue,
        "tv_distance": tv,
    }
