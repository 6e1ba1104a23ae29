"""Medians, rank-sum significance tests and pairwise win matrices."""

import math

import numpy as np
from scipy.stats import rankdata


def median(values):
    """Middle order statistic; mean of the two middle values for even counts."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("median of an empty sample")
    if not np.isfinite(values).all():
        raise ValueError("median requires finite values")
    return float(np.median(values))


# pooled sizes up to this use the exact permutation distribution; larger
# samples (e.g. the 30-run benchmark comparisons) use the normal
# approximation, where it is accurate
_EXACT_LIMIT = 24


def _exact_two_sided_p(ranks, n1):
    """Exact symmetric-tail p of the rank-sum statistic under permutation.

    Counts size-n1 subsets of the (doubled, integer) midranks by rank sum
    with a subset-sum dynamic programme, then accumulates the tail
    |sum - mean| >= |observed - mean|.
    """
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    n = doubled.shape[0]
    observed = int(doubled[:n1].sum())
    mean2 = n1 * (n + 1)  # doubled expectation of the rank sum
    dev = abs(observed - mean2)
    total = doubled.sum()
    # dp[k, s] = number of k-subsets of the processed ranks with sum s
    dp = np.zeros((n1 + 1, int(total) + 1))
    dp[0, 0] = 1.0
    for r in doubled:
        dp[1:, r:] += dp[:-1, : dp.shape[1] - r]
    sums = np.arange(dp.shape[1])
    tail = dp[n1, np.abs(sums - mean2) >= dev].sum()
    return float(tail / dp[n1].sum())


def ranksum_test(a, b, alpha=0.05):
    """Two-sided Mann-Whitney U / Wilcoxon rank-sum test.

    Midranks handle ties.  Small pooled samples (up to 24 values) are
    tested against the exact permutation distribution; larger ones use the
    normal approximation with tie-corrected variance and a 0.5 continuity
    correction.  Returns (p_value, significant) with significant iff
    p < alpha.  When every pooled value is identical the test is
    degenerate: p = 1, not significant.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("rank-sum test needs two nonempty samples")
    n1, n2 = a.size, b.size
    n = n1 + n2
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    if n <= _EXACT_LIMIT:
        p = _exact_two_sided_p(ranks, n1)
        return p, p < alpha
    u1 = n1 * n2 + n1 * (n1 + 1) / 2.0 - ranks[:n1].sum()
    _, counts = np.unique(pooled, return_counts=True)
    tie = 1.0 - (counts.astype(float) ** 3 - counts).sum() / (n ** 3 - n)
    var = tie * n1 * n2 * (n + 1) / 12.0
    if var <= 0.0:
        return 1.0, False
    z = (abs(u1 - n1 * n2 / 2.0) - 0.5) / math.sqrt(var)
    z = max(z, 0.0)
    p = min(1.0, math.erfc(z / math.sqrt(2.0)))
    return p, p < alpha


class WinMatrix:
    """Pairwise counts of significant wins; the diagonal is undefined."""

    def __init__(self, algorithms, counts):
        self.algorithms = list(algorithms)
        self.counts = np.asarray(counts, dtype=int)

    def row_sums(self):
        return self.counts.sum(axis=1)

    def __getitem__(self, pair):
        i = self.algorithms.index(pair[0])
        j = self.algorithms.index(pair[1])
        return int(self.counts[i, j])


def win_matrix(samples, alpha=0.05, algorithms=None, problems=None):
    """Count, per algorithm pair, the problems won at significance alpha.

    samples maps algorithm -> problem -> sequence of metric values (lower
    is better).  Algorithm i beats j on a problem when the rank-sum test
    is significant and median(i) < median(j).  Ordering follows the
    `algorithms` / `problems` arguments or insertion order.
    """
    algorithms = list(samples) if algorithms is None else list(algorithms)
    if not algorithms:
        raise ValueError("no algorithms given")
    if problems is None:
        problems = list(samples[algorithms[0]])
    for alg in algorithms:
        missing = [p for p in problems if p not in samples.get(alg, {})]
        if missing:
            raise ValueError("algorithm %r has no sample for %r"
                             % (alg, missing[0]))
    k = len(algorithms)
    counts = np.zeros((k, k), dtype=int)
    for prob in problems:
        meds = {alg: median(samples[alg][prob]) for alg in algorithms}
        for i, ai in enumerate(algorithms):
            for j in range(i + 1, k):
                aj = algorithms[j]
                _, significant = ranksum_test(samples[ai][prob],
                                              samples[aj][prob], alpha)
                if not significant:
                    continue
                if meds[ai] < meds[aj]:
                    counts[i, j] += 1
                elif meds[aj] < meds[ai]:
                    counts[j, i] += 1
    return WinMatrix(algorithms, counts)
