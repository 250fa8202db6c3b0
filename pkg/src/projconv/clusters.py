"""Two-cluster oscillation analysis in the compactified ratio space.

Ratios ``t`` in ``[0, inf]`` are compared through ``m(t) = t / (1 + t)``.
A tail oscillates when its extremes are at least ``delta`` apart, each
extreme band (width ``band`` times the separation) is visited at least
``min_visits`` times, and both bands are visited in each half of the tail.
The last requirement keeps a slow monotone drift or a decaying wobble from
looking like two clusters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

BAND = 0.1
MIN_VISITS = 10


@dataclass(frozen=True)
class ClusterStats:
    lo_index: int
    hi_index: int
    lo: float
    hi: float
    separation: float
    visits_lo: int
    visits_hi: int
    persistent: bool

    def oscillates(self, delta: float, min_visits: int = MIN_VISITS) -> bool:
        return (
            self.separation >= delta
            and self.visits_lo >= min_visits
            and self.visits_hi >= min_visits
            and self.persistent
        )


def two_clusters(ms: Sequence[float], band: float = BAND) -> ClusterStats:
    if not ms:
        raise ValueError("empty sample")
    lo_i = min(range(len(ms)), key=ms.__getitem__)
    hi_i = max(range(len(ms)), key=ms.__getitem__)
    lo, hi = ms[lo_i], ms[hi_i]
    sep = hi - lo
    cut_lo = lo + band * sep
    cut_hi = hi - band * sep
    half = len(ms) // 2
    counts = [[0, 0], [0, 0]]  # [half][lo/hi]
    for i, x in enumerate(ms):
        h = 0 if i < half else 1
        if x <= cut_lo:
            counts[h][0] += 1
        if x >= cut_hi:
            counts[h][1] += 1
    persistent = sep > 0 and all(c[0] > 0 and c[1] > 0 for c in counts)
    return ClusterStats(
        lo_i, hi_i, lo, hi, sep,
        counts[0][0] + counts[1][0],
        counts[0][1] + counts[1][1],
        persistent,
    )
