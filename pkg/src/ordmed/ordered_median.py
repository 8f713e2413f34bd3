"""The ordered median operator: sort costs non-increasingly, dot with weights.

Three equivalent evaluations are provided (direct sort, telescoped partial
sums, and a factorial brute force used as a cross-check), plus the closest
allocation that turns a center set into a solution and the two-vector
construction witnessing that the operator stops being subadditive as soon
as the weights stop being non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import ParameterError, SizeGuardError
from .instance import CenterSolution, DistanceMatrix, WeightVector


@dataclass(frozen=True)
class SortPermutation:
    """Descending order of a cost vector, stored position -> index.

    Ties are broken by ascending index, so the permutation is canonical.
    """

    order: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.order)

    def rank_of(self) -> np.ndarray:
        """Inverse map: rank_of()[i] is the sorted position of index i."""
        inv = np.empty(self.m, dtype=int)
        inv[np.array(self.order)] = np.arange(self.m)
        return inv


def sorting_permutation(d) -> SortPermutation:
    """Canonical descending sort order of d (stable, ties by ascending index)."""
    d = np.asarray(d, dtype=float)
    if not np.all(np.isfinite(d)):
        raise ParameterError("cost vector must be finite")
    order = np.argsort(-d, kind="stable")
    return SortPermutation(tuple(int(i) for i in order))


def _check_lengths(d: np.ndarray, weights: WeightVector) -> None:
    if d.size != weights.m:
        raise ParameterError(f"cost length {d.size} != weight length {weights.m}")


def om_evaluate(d, weights: WeightVector) -> float:
    """Sum of lam_r * (r-th largest cost)."""
    d = np.asarray(d, dtype=float)
    _check_lengths(d, weights)
    order = np.argsort(-d, kind="stable")
    return float(np.dot(weights.lam, d[order]))


def om_telescoped(d, weights: WeightVector) -> float:
    """Same value through partial sums: sum_r delta_r * (sum of r largest).

    One shared sort yields every partial sum via a cumulative sum.
    """
    d = np.asarray(d, dtype=float)
    _check_lengths(d, weights)
    sorted_desc = np.sort(d)[::-1]
    theta = np.cumsum(sorted_desc)
    return float(np.dot(weights.deltas(), theta))


def om_max_perm_bruteforce(d, weights: WeightVector) -> float:
    """Max over all permutations of the weighted pairing; m <= 8 only.

    For non-increasing weights this equals om_evaluate (rearrangement
    inequality); the equality is asserted in tests, not assumed here.
    """
    d = np.asarray(d, dtype=float)
    _check_lengths(d, weights)
    if d.size > 8:
        raise SizeGuardError(f"brute force limited to m <= 8, got {d.size}")
    lam = weights.lam
    return max(
        float(sum(lam[r] * d[i] for r, i in enumerate(perm)))
        for perm in permutations(range(d.size))
    )


def closest_allocation(dist: DistanceMatrix, centers, weights: WeightVector) -> CenterSolution:
    """Assign every point to its nearest center (ties to the lowest index).

    Centers are kept in ascending order; the objective value is the ordered
    median of the resulting cost vector under the given weights.
    """
    q = sorted(int(j) for j in centers)
    if not q:
        raise ParameterError("center set must be nonempty")
    if q[0] < 0 or q[-1] >= dist.m:
        raise ParameterError(f"center indices must lie in [0, {dist.m - 1}]")
    cols = dist.d[:, q]
    pick = np.argmin(cols, axis=1)  # first minimum = lowest center index
    assignment = tuple(q[k] for k in pick)
    distances = cols[np.arange(dist.m), pick]
    value = om_evaluate(distances, weights)
    return CenterSolution(tuple(q), assignment, distances, value)


def subadditivity_gap(lam, s: int) -> float:
    """OM(c+d) - OM(c) - OM(d) for the canonical two-vector construction.

    c has ones in the first s positions; d has ones in the first s-1
    positions and in position s+1 (1-based s). The gap always equals
    lam_{s+1} - lam_s, so it is nonpositive exactly when the weights are
    non-increasing across positions s, s+1. Accepts any finite weight
    vector, including increasing ones.
    """
    lam = np.asarray(lam, dtype=float)
    m = lam.size
    if not (1 <= s < m):
        raise ParameterError(f"s must satisfy 1 <= s < {m}, got {s}")
    c = np.zeros(m)
    c[:s] = 1.0
    d = np.zeros(m)
    d[: s - 1] = 1.0
    d[s] = 1.0

    def om_any(v):
        # direct sorted dot; lam here need not be a valid WeightVector
        return float(np.dot(lam, np.sort(v)[::-1]))

    return om_any(c + d) - om_any(c) - om_any(d)
