"""Dual certificates of relaxation exactness and structural non-recovery predicates."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ParameterError
from .instance import (CenterSolution, Instance, WeightVector, _frozen_array,
                       classify_weights, is_free_of_equidistance)
from .lp_core import INFEASIBLE, LinearProgram, solve_lp
from .ordered_median import SortPermutation, sorting_permutation

NEVER_RECOVERS = "NeverRecovers"
MEDIAN_SINGLE_RECOVERS = "MedianSingleRecovers"
UNKNOWN = "Unknown"

EQUALITY_TOL = 1e-9


def strictness_margin(dist) -> float:
    """Default margin for strict certificate inequalities: 1e-6 * (1 + max d)."""
    d = dist.d if hasattr(dist, "d") else np.asarray(dist, dtype=float)
    return 1e-6 * (1.0 + float(d.max()))


@dataclass(frozen=True)
class DualCertificate:
    """A contribution certificate: point budgets alpha, center level omega.

    sigma is the sorting permutation of the certified solution's allocation
    distances, and beta is derived entrywise as the positive part of
    alpha_i - lam_{rank(i)} * d_ij, never stored independently.
    """

    alpha: np.ndarray
    omega: float
    sigma: SortPermutation
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", _frozen_array(self.alpha))
        object.__setattr__(self, "beta", _frozen_array(self.beta))


@dataclass(frozen=True)
class CertificateVerdict:
    """Worst slack of each certificate condition at a candidate solution.

    holds: centers share one contribution level, no point out-contributes
    them, and every alpha clears (resp. stays under) the weighted distance
    to its own (resp. any other) center. strict additionally requires the
    three inequality blocks to clear a positive margin, which pins the
    relaxation optimum to this solution uniquely; strict implies holds.
    """

    holds: bool
    strict: bool
    center_equality_deviation: float
    noncenter_slack: float
    member_slack: float
    nonmember_slack: float


@dataclass(frozen=True)
class Prediction:
    """Structural verdict on relaxation exactness, decided before any solve."""

    kind: str
    item: int | None
    reason: str
    checks: dict


def _point_weights(weights: WeightVector, sigma: SortPermutation) -> np.ndarray:
    # weight seen by point i once sigma places it at its sort position
    return weights.lam[sigma.rank_of()]


def make_certificate(inst: Instance, sigma: SortPermutation, alpha,
                     omega: float) -> DualCertificate:
    """Assemble a certificate, deriving beta from alpha and sigma."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (inst.m,):
        raise ParameterError(f"alpha must have length {inst.m}")
    w = _point_weights(inst.weights, sigma)
    beta = np.maximum(alpha[:, None] - w[:, None] * inst.dist.d, 0.0)
    return DualCertificate(alpha=alpha, omega=float(omega), sigma=sigma, beta=beta)


def ordered_contribution(alpha, sigma: SortPermutation, dist, lam, j: int) -> float:
    """Total positive surplus alpha_i - lam_{rank(i)} * d_ij received by point j."""
    d = dist.d if hasattr(dist, "d") else np.asarray(dist, dtype=float)
    w = np.asarray(lam.lam if isinstance(lam, WeightVector) else lam, dtype=float)
    w = w[sigma.rank_of()]
    alpha = np.asarray(alpha, dtype=float)
    return float(np.maximum(alpha - w * d[:, j], 0.0).sum())


def verify_certificate(inst: Instance, sol: CenterSolution,
                       cert: DualCertificate,
                       eps: float | None = None) -> CertificateVerdict:
    """Check the four certificate conditions at sol and report worst slacks."""
    if eps is None:
        eps = strictness_margin(inst.dist)
    m = inst.m
    d = inst.dist.d
    w = _point_weights(inst.weights, cert.sigma)
    surplus = cert.alpha[:, None] - w[:, None] * d
    contributions = np.maximum(surplus, 0.0).sum(axis=0)
    centers = np.array(sol.centers, dtype=int)
    c_centers = contributions[centers]
    center_dev = float(c_centers.max() - c_centers.min())
    non_centers = np.setdiff1d(np.arange(m), centers)
    if non_centers.size:
        noncenter_slack = float(c_centers.min() - contributions[non_centers].max())
    else:
        noncenter_slack = np.inf
    member_slack = float(surplus[np.arange(m), sol.assignment].min())
    others = np.ones((m, len(centers)), dtype=bool)
    others[np.arange(m), np.searchsorted(centers, sol.assignment)] = False
    if others.any():
        nonmember_slack = float((-surplus[:, centers])[others].min())
    else:
        nonmember_slack = np.inf
    holds = bool(center_dev <= EQUALITY_TOL
                 and min(noncenter_slack, member_slack, nonmember_slack)
                 >= -EQUALITY_TOL)
    strict = bool(holds and min(noncenter_slack, member_slack,
                                nonmember_slack) >= eps - EQUALITY_TOL)
    return CertificateVerdict(holds=holds, strict=strict,
                              center_equality_deviation=center_dev,
                              noncenter_slack=noncenter_slack,
                              member_slack=member_slack,
                              nonmember_slack=nonmember_slack)


def search_certificate(inst: Instance, sol: CenterSolution, *,
                       strict: bool = False, eps: float | None = None,
                       ) -> tuple[DualCertificate | None, CertificateVerdict | None]:
    """Search a certificate for sol by LP feasibility; None when none exists.

    Center levels are tied to a single variable omega, member/other sign
    constraints linearize each center's contribution, and per-non-center
    surplus variables cap outside contributions at omega. Minimizing omega
    makes the returned certificate deterministic. With strict=True the
    inequality blocks must clear the margin eps.
    """
    margin = (eps if eps is not None else strictness_margin(inst.dist)) if strict else 0.0
    m = inst.m
    d = inst.dist.d
    sigma = sorting_permutation(sol.distances)
    w = _point_weights(inst.weights, sigma)
    centers = list(sol.centers)
    lp = LinearProgram("certificate")
    a_cols = [lp.add_free_variable(f"alpha_{i + 1}") for i in range(m)]
    omega = lp.add_free_variable("omega", obj=1.0)
    for j in centers:
        members = [i for i in range(m) if sol.assignment[i] == j]
        coeffs = {a_cols[i]: 1.0 for i in members}
        coeffs[omega] = -1.0
        rhs = float(sum(w[i] * d[i, j] for i in members))
        lp.add_row(coeffs, "=", rhs, f"level_{j + 1}")
    for i in range(m):
        j = sol.assignment[i]
        lp.add_row({a_cols[i]: 1.0}, ">=", float(w[i] * d[i, j]) + margin,
                   f"member_{i + 1}")
        for jp in centers:
            if jp != j:
                lp.add_row({a_cols[i]: 1.0}, "<=", float(w[i] * d[i, jp]) - margin,
                           f"other_{i + 1}_{jp + 1}")
    for i in range(m):
        if i in sol.centers:
            continue
        s_cols = [lp.add_variable(f"s_{t + 1}_{i + 1}") for t in range(m)]
        for t in range(m):
            lp.add_row({s_cols[t]: 1.0, a_cols[t]: -1.0}, ">=",
                       -float(w[t] * d[t, i]), f"surplus_{t + 1}_{i + 1}")
        coeffs = {c: 1.0 for c in s_cols}
        coeffs[omega] = -1.0
        lp.add_row(coeffs, "<=", -margin, f"cap_{i + 1}")
    lp_sol = solve_lp(lp)
    if lp_sol.status == INFEASIBLE:
        return None, None
    if not lp_sol.is_optimal():
        raise ParameterError(f"certificate search ended {lp_sol.status}")
    alpha = lp_sol.x[a_cols]
    cert = make_certificate(inst, sigma, alpha, float(lp_sol.x[omega]))
    verdict = verify_certificate(inst, sol, cert, eps)
    return cert, verdict


def check_single_center(inst: Instance, j: int) -> bool:
    """True when point j's weighted distance sum is minimal over all points.

    The weights are applied in the order that sorts the distances to j
    non-increasingly. On inputs with pairwise-distinct distances this is
    equivalent to single-center exactness of the relaxation; with ties it
    remains sufficient, and a warning flags the weaker reading.
    """
    if not (0 <= j < inst.m):
        raise ParameterError(f"center index {j} out of range")
    if not is_free_of_equidistance(inst.dist):
        warnings.warn("tied distances: the single-center test keeps its "
                      "sufficient direction only", stacklevel=2)
    d = inst.dist.d
    sigma = sorting_permutation(d[:, j])
    w = _point_weights(inst.weights, sigma)
    totals = w @ d
    return bool(totals[j] <= totals.min() + 1e-12)


def has_collinear_triple(coords) -> bool:
    """Exact collinearity scan: some triple's edge vectors have rank <= 1."""
    c = np.asarray(coords, dtype=float)
    for a, b, t in combinations(range(len(c)), 3):
        g = np.outer(c[b] - c[a], c[t] - c[a])
        if np.array_equal(g, g.T):
            return True
    return False


def predict_non_recovery(inst: Instance) -> Prediction:
    """Structural exactness verdict from weights and point geometry alone.

    Items are tried in fixed numeric order, except that a weight family
    named by its own item is routed there (a centdian below the threshold
    reports the centdian item, not the generic strict-inequality one). Geometric
    hypotheses are audited in checks: pairwise-distinct distances, and
    collinearity, which is decided only when coordinates are available.
    """
    m, p = inst.m, inst.p
    lam = inst.weights.lam
    wc = classify_weights(inst.weights)
    foe = is_free_of_equidistance(inst.dist)
    if inst.points is None:
        collinearity = "unavailable"
    else:
        collinearity = ("present" if has_collinear_triple(inst.points.coords)
                        else "none")
    checks = {
        "family": wc.family,
        "param": wc.param,
        "free_of_equidistance": foe,
        "collinearity": collinearity,
    }
    if p >= m:
        return Prediction(UNKNOWN, None,
                          "every point is a center, so the relaxation is exact "
                          "for trivial reasons", checks)
    if wc.scale == 0.0:
        return Prediction(UNKNOWN, None, "all-zero weights rank nothing", checks)
    if wc.family == "median" and p == 1:
        return Prediction(MEDIAN_SINGLE_RECOVERS, 3,
                          "a single median center is always recovered, ties "
                          "or not", checks)
    if wc.family == "centdian":
        gamma = wc.param
        threshold = gamma * (m - 1)
        if threshold < 1.0:
            if foe:
                return Prediction(
                    NEVER_RECOVERS, 6,
                    f"centdian tail {gamma:g}*({m}-1) = {threshold:g} < 1",
                    checks)
            return Prediction(UNKNOWN, None,
                              "centdian threshold met but distances carry "
                              "ties", checks)
        return Prediction(UNKNOWN, None,
                          f"centdian tail {threshold:g} >= 1 is outside the "
                          "non-recovery regime", checks)
    if wc.family == "ksum" and wc.param == 2:
        if not foe:
            return Prediction(UNKNOWN, None,
                              "2-sum item needs pairwise-distinct distances",
                              checks)
        if collinearity == "unavailable":
            return Prediction(UNKNOWN, None,
                              "2-sum item needs coordinates to rule out "
                              "collinear triples", checks)
        if collinearity == "present":
            return Prediction(UNKNOWN, None,
                              "a collinear triple blocks the 2-sum item",
                              checks)
        return Prediction(NEVER_RECOVERS, 4,
                          "2-sum weights with points in general position "
                          "never recover", checks)
    head = float(lam[0])
    tail = float(lam[1:].sum())
    if tail < head:
        if foe:
            return Prediction(NEVER_RECOVERS, 1,
                              f"trailing weight mass {tail:g} < leading "
                              f"weight {head:g}", checks)
        return Prediction(UNKNOWN, None,
                          "strict head-heavy weights but distances carry "
                          "ties", checks)
    if tail == head:
        if foe and collinearity == "none":
            return Prediction(NEVER_RECOVERS, 2,
                              f"trailing weight mass equals the leading "
                              f"weight {head:g} with no collinear triple",
                              checks)
        return Prediction(UNKNOWN, None,
                          "balanced head weight needs distinct distances and "
                          "a collinearity-free point set", checks)
    return Prediction(UNKNOWN, None, "no structural item applies", checks)


def conic_combine(w1: WeightVector, w2: WeightVector) -> WeightVector:
    """Componentwise sum of two weight vectors (a conic combination ray)."""
    if len(w1.lam) != len(w2.lam):
        raise ParameterError("weight vectors must have equal length")
    return WeightVector(w1.lam + w2.lam)
