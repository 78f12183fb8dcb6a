"""Rank statistics and pseudo-observations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from ..errors import DegenerateSeries, LengthMismatch


@dataclass(frozen=True)
class RankCorrelation:
    tau: float
    rho_s: float
    p_tau: float
    p_rho: float
    n: int


def _pair(x, y):
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size != y.size:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    if x.size < 2:
        raise ValueError("need at least two observations")
    return x, y


def _tie_pairs(a: np.ndarray) -> int:
    _, counts = np.unique(a, return_counts=True)
    return int(np.sum(counts * (counts - 1) // 2))


def _count_inversions(seq: np.ndarray) -> int:
    """Number of pairs i < j with seq[i] > seq[j] (seq holds integer ranks).

    Bottom-up merge sort; each level counts, for every element of a right
    block, the elements of its left sibling that exceed it.
    """
    n = seq.size
    a = seq.astype(np.int64)
    total = 0
    width = 1
    idx = np.arange(n)
    while width < n:
        pair = idx // (2 * width)
        right = (idx // width) % 2 == 1
        key = pair * (n + 1) + a
        left_keys = key[~right]  # sorted: pairs ascending, values sorted inside blocks
        pos = np.searchsorted(left_keys, key[right], side="right")
        # end of each right element's sibling block inside left_keys
        pr = pair[right]
        block_end = np.searchsorted(left_keys, (pr + 1) * (n + 1), side="left")
        total += int(np.sum(block_end - pos))
        a = np.sort(key) - pair * (n + 1)
        width *= 2
    return total


def _kendall_counts(x: np.ndarray, y: np.ndarray) -> tuple[int, int, int, int, int]:
    """(n0, ties_x, ties_y, ties_xy, discordant) pair counts."""
    n = x.size
    order = np.lexsort((y, x))
    ry = stats.rankdata(y, method="dense").astype(np.int64)[order]
    disc = _count_inversions(ry)
    xy = np.column_stack([x, y])
    _, joint = np.unique(xy, axis=0, return_counts=True)
    n3 = int(np.sum(joint * (joint - 1) // 2))
    return n * (n - 1) // 2, _tie_pairs(x), _tie_pairs(y), n3, disc


def kendall_tau(x, y) -> tuple[float, float]:
    """Kendall's tau and its two-sided normal-approximation p-value.

    Without ties this is tau-a, ``(concordant - discordant) / C(n, 2)``; with
    ties the tau-b denominator is used. The null variance is
    ``2(2n + 5) / (9n(n - 1))``.
    """
    x, y = _pair(x, y)
    n = x.size
    n0, n1, n2, n3, disc = _kendall_counts(x, y)
    s = n0 - n1 - n2 + n3 - 2 * disc
    if n1 == 0 and n2 == 0:
        tau = s / n0
    else:
        denom = np.sqrt(float(n0 - n1) * float(n0 - n2))
        if denom == 0:
            raise DegenerateSeries("a variable is constant")
        tau = s / denom
    tau = float(min(1.0, max(-1.0, tau)))
    var = 2.0 * (2 * n + 5) / (9.0 * n * (n - 1))
    p = float(2.0 * special.ndtr(-abs(tau) / np.sqrt(var)))
    return tau, min(p, 1.0)


def spearman_rho(x, y) -> tuple[float, float]:
    """Spearman's rho (Pearson correlation of midranks) and its t-test p-value."""
    x, y = _pair(x, y)
    n = x.size
    rx, ry = stats.rankdata(x), stats.rankdata(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt(np.dot(rx, rx) * np.dot(ry, ry))
    if denom == 0:
        raise DegenerateSeries("zero rank variance")
    rho = float(min(1.0, max(-1.0, np.dot(rx, ry) / denom)))
    if n <= 2 or abs(rho) == 1.0:
        return rho, 0.0 if abs(rho) == 1.0 and n > 2 else 1.0
    t = rho * np.sqrt((n - 2) / (1.0 - rho * rho))
    return rho, float(2.0 * stats.t.sf(abs(t), n - 2))


def rank_correlation(x, y) -> RankCorrelation:
    tau, p_tau = kendall_tau(x, y)
    rho, p_rho = spearman_rho(x, y)
    return RankCorrelation(tau, rho, p_tau, p_rho, int(np.size(x)))


def pseudo_observations(data) -> np.ndarray:
    """Column-wise midranks divided by ``n + 1``; returns an ``(n, k)`` array."""
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    n = data.shape[0]
    if n < 2:
        raise ValueError("need at least two observations")
    return stats.rankdata(data, axis=0) / (n + 1.0)
