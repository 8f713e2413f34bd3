"""Builders mapping instances to LP models over the center/assignment polytope."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .instance import CenterSolution, Instance
from .lp_core import INTEGRALITY_TOL, LinearProgram, LpSolution
from .ordered_median import sorting_permutation

BEP = "BEP"
OT = "OT"


@dataclass(frozen=True)
class DompModel:
    """A built model plus maps from named variables to LP column indices.

    Exactly one of the (u, v) and (t, q) pairs is populated, matching the
    formulation tag. All maps together cover every LP column once.
    """

    lp: LinearProgram
    tag: str
    relaxed: bool
    m: int
    p: int
    y: tuple[int, ...]
    z: tuple[tuple[int, ...], ...]
    u: tuple[int, ...] | None = None
    v: tuple[int, ...] | None = None
    t: tuple[int, ...] | None = None
    q: tuple[tuple[int, ...], ...] | None = None


@dataclass(frozen=True)
class ClosestAssignmentRow:
    """One valid inequality forcing point i toward its nearest open centers.

    Encodes y_coeffs . y + z_coeffs . z_i* <= rhs where z_coeffs applies to
    point i's own assignment row only.
    """

    i: int
    j: int
    y_coeffs: dict[int, float]
    z_coeffs: dict[int, float]
    rhs: float


@dataclass(frozen=True)
class FractionalityReport:
    """How far the location/allocation block of an LP vector is from binary."""

    max_y_fractionality: float
    max_z_fractionality: float
    fractional_y: tuple[int, ...]
    integral: bool


def _add_location_allocation(lp: LinearProgram, inst: Instance,
                             y: tuple[int, ...],
                             z: tuple[tuple[int, ...], ...]) -> None:
    m = inst.m
    for i in range(m):
        lp.add_row({z[i][j]: 1.0 for j in range(m)}, "=", 1.0, f"assign_{i + 1}")
    for i in range(m):
        for j in range(m):
            lp.add_row({z[i][j]: 1.0, y[j]: -1.0}, "<=", 0.0, f"zy_{i + 1}_{j + 1}")
    lp.add_row({y[j]: 1.0 for j in range(m)}, "=", float(inst.p), "card")


def _attach_closest_assignment(lp: LinearProgram, rows: list[ClosestAssignmentRow],
                               y: tuple[int, ...],
                               z: tuple[tuple[int, ...], ...]) -> None:
    for row in rows:
        coeffs: dict[int, float] = {}
        for jp, c in row.y_coeffs.items():
            coeffs[y[jp]] = coeffs.get(y[jp], 0.0) + c
        for jp, c in row.z_coeffs.items():
            coeffs[z[row.i][jp]] = coeffs.get(z[row.i][jp], 0.0) + c
        lp.add_row(coeffs, "<=", row.rhs, f"near_{row.i + 1}_{row.j + 1}")


def build_bep(inst: Instance, relaxed: bool = True, *,
              closest_assignment: bool = False,
              drop_zero_rows: bool = False) -> DompModel:
    """Build the sorting-by-duals model: min sum(u) + sum(v) over the polytope.

    Rows, in order: one assignment row per point, the z <= y linking rows,
    the cardinality row, then for every point i and sort position r the row
    u_i + v_r - lam_r * sum_j d_ij z_ij >= 0. With drop_zero_rows, positions
    whose weight is zero lose their rows; value is preserved by pinning those
    v to 0 and u to >= 0 (any optimum of the full model satisfies both).
    """
    m = inst.m
    lam = inst.weights.lam
    d = inst.dist.d
    lp = LinearProgram("bep")
    y = tuple(lp.add_variable(f"y_{j + 1}", 0.0, upper=1.0) for j in range(m))
    z = tuple(
        tuple(lp.add_variable(f"z_{i + 1}_{j + 1}", 0.0, upper=1.0) for j in range(m))
        for i in range(m)
    )
    trim = drop_zero_rows and bool((lam == 0.0).any())
    if trim:
        u = tuple(lp.add_variable(f"u_{i + 1}", 1.0) for i in range(m))
        v = tuple(
            lp.add_variable(f"v_{r + 1}", 1.0, upper=0.0) if lam[r] == 0.0
            else lp.add_free_variable(f"v_{r + 1}", 1.0)
            for r in range(m)
        )
    else:
        u = tuple(lp.add_free_variable(f"u_{i + 1}", 1.0) for i in range(m))
        v = tuple(lp.add_free_variable(f"v_{r + 1}", 1.0) for r in range(m))
    _add_location_allocation(lp, inst, y, z)
    for i in range(m):
        row_d = d[i]
        for r in range(m):
            if trim and lam[r] == 0.0:
                continue
            coeffs = {z[i][j]: -lam[r] * row_d[j] for j in range(m)}
            coeffs[u[i]] = 1.0
            coeffs[v[r]] = 1.0
            lp.add_row(coeffs, ">=", 0.0, f"sort_{i + 1}_{r + 1}")
    if closest_assignment:
        _attach_closest_assignment(lp, closest_assignment_rows(inst), y, z)
    return DompModel(lp=lp, tag=BEP, relaxed=relaxed, m=m, p=inst.p,
                     y=y, z=z, u=u, v=v)


def build_ot(inst: Instance, *, closest_assignment: bool = False) -> DompModel:
    """Build the telescoped-threshold model over largest-sum linearizations.

    With deltas = adjacent weight differences, minimizes
    sum_s deltas_s * (s * t_s + sum_i q_is) subject to the shared
    location/allocation rows and q_is + t_s - sum_j d_ij z_ij >= 0.
    """
    m = inst.m
    deltas = inst.weights.deltas()
    d = inst.dist.d
    lp = LinearProgram("ot")
    y = tuple(lp.add_variable(f"y_{j + 1}", 0.0, upper=1.0) for j in range(m))
    z = tuple(
        tuple(lp.add_variable(f"z_{i + 1}_{j + 1}", 0.0, upper=1.0) for j in range(m))
        for i in range(m)
    )
    t = tuple(
        lp.add_free_variable(f"t_{s + 1}", float(deltas[s] * (s + 1)))
        for s in range(m)
    )
    q = tuple(
        tuple(lp.add_variable(f"q_{i + 1}_{s + 1}", float(deltas[s])) for s in range(m))
        for i in range(m)
    )
    _add_location_allocation(lp, inst, y, z)
    for i in range(m):
        row_d = d[i]
        for s in range(m):
            coeffs = {z[i][j]: -row_d[j] for j in range(m)}
            coeffs[q[i][s]] = 1.0
            coeffs[t[s]] = 1.0
            lp.add_row(coeffs, ">=", 0.0, f"tail_{i + 1}_{s + 1}")
    if closest_assignment:
        _attach_closest_assignment(lp, closest_assignment_rows(inst), y, z)
    return DompModel(lp=lp, tag=OT, relaxed=True, m=m, p=inst.p,
                     y=y, z=z, t=t, q=q)


def closest_assignment_rows(inst: Instance) -> list[ClosestAssignmentRow]:
    """Valid inequalities pinning each point to its nearest open centers.

    For each pair (i, j), with nearer = {l : d_il < d_ij} and
    cap = min(p, |nearer|), the row reads

        sum_{j' nearer, |nearer| - |nearer_j'| <= p} Q_ijj' z_ij'
        + cap * sum_{j' : d_ij' >= d_ij} z_ij'
        + sum_{j' nearer} y_j'  <=  cap,

    where Q_ijj' = |nearer_j'| + min(0, p - |nearer|). These hold for every
    feasible location/allocation pair and cut off allocations that skip an
    open nearer center; they are redundant at optimality when all weights
    are nonnegative, so builders leave them detached by default.
    """
    m = inst.m
    p = inst.p
    d = inst.dist.d
    counts = np.array([[int((d[i] < d[i, j]).sum()) for j in range(m)]
                       for i in range(m)])
    rows: list[ClosestAssignmentRow] = []
    for i in range(m):
        for j in range(m):
            cap = float(min(p, counts[i, j]))
            y_coeffs: dict[int, float] = {}
            z_coeffs: dict[int, float] = {}
            for jp in range(m):
                if d[i, jp] < d[i, j]:
                    y_coeffs[jp] = 1.0
                    if counts[i, j] - counts[i, jp] <= p:
                        qc = float(counts[i, jp] + min(0, p - counts[i, j]))
                        if qc != 0.0:
                            z_coeffs[jp] = qc
                else:
                    if cap != 0.0:
                        z_coeffs[jp] = cap
            rows.append(ClosestAssignmentRow(i=i, j=j, y_coeffs=y_coeffs,
                                             z_coeffs=z_coeffs, rhs=cap))
    return rows


def embed_integral(inst: Instance, sol: CenterSolution,
                   model: DompModel) -> np.ndarray:
    """Lift a center solution to a feasible LP vector of equal objective.

    y and z are the indicators of sol. With allocation distances sorted
    canonically as a_1 >= ... >= a_m and weights b, the sorting duals are
    v_m = 0, v_r = v_{r+1} + a_{r+1} * (b_r - b_{r+1}), and u at the point
    sorted r-th is a_r * b_r - v_r. Every row u_i + v_r >= b_r * d_i then
    holds (with equality at r = sort position of i, by a telescoping
    comparison against the monotone a), and the objective collapses to
    sum_r a_r * b_r, the ordered median value.
    """
    if model.tag != BEP:
        raise ParameterError("integral embeddings are defined for the BEP model")
    if model.m != inst.m or model.p != inst.p:
        raise ParameterError("model was built from a different instance")
    m = inst.m
    lam = inst.weights.lam
    x = np.zeros(model.lp.n_vars)
    for j in sol.centers:
        x[model.y[j]] = 1.0
    for i in range(m):
        x[model.z[i][sol.assignment[i]]] = 1.0
    order = sorting_permutation(sol.distances).order
    a = sol.distances[list(order)]
    v_sorted = np.zeros(m)
    for r in range(m - 2, -1, -1):
        v_sorted[r] = v_sorted[r + 1] + a[r + 1] * (lam[r] - lam[r + 1])
    u_sorted = a * lam - v_sorted
    for k, i in enumerate(order):
        x[model.u[i]] = u_sorted[k]
    for r in range(m):
        x[model.v[r]] = v_sorted[r]
    scale = 1e-9 * (1.0 + float(a[0]) * (1.0 + float(lam[0])))
    worst = 0.0
    for i in range(m):
        slack = x[model.u[i]] + v_sorted - lam * sol.distances[i]
        worst = min(worst, float(slack.min()))
    if worst < -scale:
        raise AssertionError(f"embedding violates a sorting row by {-worst:.3e}")
    value = float(u_sorted.sum() + v_sorted.sum())
    if abs(value - sol.value) > 1e-9 * (1.0 + abs(sol.value)):
        raise AssertionError("embedding objective drifted from the solution value")
    return x


def fractionality_report(model: DompModel, sol) -> FractionalityReport:
    """Distance of the (y, z) block from binary, with fractional y indices."""
    x = sol.x if isinstance(sol, LpSolution) else np.asarray(sol, dtype=float)
    y_vals = x[list(model.y)]
    z_vals = np.array([[x[model.z[i][j]] for j in range(model.m)]
                       for i in range(model.m)])
    y_frac = np.abs(y_vals - np.round(y_vals))
    z_frac = np.abs(z_vals - np.round(z_vals))
    fractional = tuple(int(j) for j in np.nonzero(y_frac > INTEGRALITY_TOL)[0])
    integral = bool(y_frac.max(initial=0.0) <= INTEGRALITY_TOL
                    and z_frac.max(initial=0.0) <= INTEGRALITY_TOL)
    return FractionalityReport(
        max_y_fractionality=float(y_frac.max(initial=0.0)),
        max_z_fractionality=float(z_frac.max(initial=0.0)),
        fractional_y=fractional,
        integral=integral,
    )
