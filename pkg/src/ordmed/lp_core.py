"""Self-contained dense two-phase simplex over a bounded-variable LP.

The model is minimization with rows of relation <=, =, or >= and simple
variable bounds (default lower 0; declared-free variables are split into
two nonnegative parts internally and recombined on output; finite upper
bounds become internal rows). The solver keeps a dense tableau, pivots on
the most negative reduced cost, switches to Bland's rule after a budget of
degenerate pivots to guarantee termination, and refactorizes the tableau
from the original data every 50 pivots for numerical hygiene.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, ParameterError

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"

PIVOT_TOL = 1e-9
PIVOT_SAFETY = 1e-7
RATIO_TIE_TOL = 1e-9
ITERATION_CAP = 10**6
REFACTOR_EVERY = 50
INTEGRALITY_TOL = 1e-6


class LinearProgram:
    """Builder for a minimization LP with named variables and rows."""

    def __init__(self, name: str = "lp"):
        self.name = name
        self.obj: list[float] = []
        self.lower: list[float] = []
        self.upper: list[float] = []
        self.var_names: list[str] = []
        self.rows: list[tuple[dict[int, float], str, float]] = []
        self.row_names: list[str] = []

    @property
    def n_vars(self) -> int:
        return len(self.obj)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def add_variable(self, name: str | None = None, obj: float = 0.0,
                     lower: float = 0.0, upper: float = math.inf) -> int:
        if not (lower <= upper):
            raise ParameterError(f"variable bounds [{lower}, {upper}] are empty")
        if math.isinf(lower) and lower < 0 and math.isfinite(upper):
            raise ParameterError("free variables may not carry a finite upper bound")
        j = len(self.obj)
        self.obj.append(float(obj))
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        self.var_names.append(name if name is not None else f"x{j}")
        return j

    def add_free_variable(self, name: str | None = None, obj: float = 0.0) -> int:
        return self.add_variable(name, obj, lower=-math.inf)

    def add_row(self, coeffs, rel: str, rhs: float, name: str | None = None) -> int:
        """Add a row; coeffs is a {var index: coefficient} map or pair iterable."""
        if rel not in ("<=", "=", ">="):
            raise ParameterError(f"relation must be <=, =, or >=, got {rel!r}")
        if not math.isfinite(rhs):
            raise ParameterError("row rhs must be finite")
        cmap = dict(coeffs.items()) if isinstance(coeffs, dict) else dict(coeffs)
        for j, a in cmap.items():
            if not (0 <= j < self.n_vars):
                raise ParameterError(f"row references unknown variable {j}")
            if not math.isfinite(a):
                raise ParameterError("row coefficients must be finite")
        i = len(self.rows)
        self.rows.append((cmap, rel, float(rhs)))
        self.row_names.append(name if name is not None else f"r{i}")
        return i

    def dense(self) -> tuple[np.ndarray, list[str], np.ndarray]:
        """Rows as (A, relations, b) with A dense of shape (n_rows, n_vars)."""
        a = np.zeros((self.n_rows, self.n_vars))
        rels = []
        b = np.zeros(self.n_rows)
        for i, (cmap, rel, rhs) in enumerate(self.rows):
            for j, coef in cmap.items():
                a[i, j] += coef
            rels.append(rel)
            b[i] = rhs
        return a, rels, b

    def dump(self) -> str:
        """Plain-text rendering of the model (debugging aid, not interchange)."""
        out = [f"name {self.name}", "min"]
        obj_terms = " ".join(
            f"{c:+.12g} {n}" for c, n in zip(self.obj, self.var_names) if c != 0.0
        )
        out.append(f"obj {obj_terms if obj_terms else '0'}")
        for (cmap, rel, rhs), rname in zip(self.rows, self.row_names):
            terms = " ".join(
                f"{cmap[j]:+.12g} {self.var_names[j]}" for j in sorted(cmap)
            )
            out.append(f"row {rname}: {terms if terms else '0'} {rel} {rhs:.12g}")
        for j, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if lo == 0.0 and math.isinf(hi):
                continue
            lo_s = "-inf" if math.isinf(lo) else f"{lo:.12g}"
            hi_s = "inf" if math.isinf(hi) else f"{hi:.12g}"
            out.append(f"bound {self.var_names[j]}: {lo_s} <= . <= {hi_s}")
        return "\n".join(out) + "\n"


@dataclass(frozen=True)
class LpSolution:
    """Primal/dual basic solution of a LinearProgram.

    Dual sign convention under minimization: <= rows yield duals <= 0,
    >= rows yield duals >= 0, equality rows are unrestricted. upper_duals
    holds one multiplier per variable (0 unless its finite upper binds).
    """

    status: str
    x: np.ndarray | None = None
    value: float | None = None
    y: np.ndarray | None = None
    upper_duals: np.ndarray | None = None
    basis: frozenset[int] = frozenset()
    integral_mask: np.ndarray | None = None
    max_fractionality: float | None = None
    iterations: int = 0

    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass(frozen=True)
class ResidualReport:
    """Worst violation of each optimality block for a proposed solution."""

    primal_infeasibility: float
    dual_infeasibility: float
    complementary_slackness: float
    duality_gap: float

    def max_residual(self) -> float:
        return max(self.primal_infeasibility, self.dual_infeasibility,
                   self.complementary_slackness, self.duality_gap)


class _Standardized:
    """Equality form min c.x, Ax=b, x>=0 derived from a LinearProgram."""

    def __init__(self, lp: LinearProgram):
        a_user, rels, b_user = lp.dense()
        n = lp.n_vars
        lower = np.array(lp.lower)
        upper = np.array(lp.upper)
        self.free = ~np.isfinite(lower)
        self.shift = np.where(self.free, 0.0, lower)

        # structural columns: one per bounded var, two (+/-) per free var
        self.col_of = np.zeros(n, dtype=int)
        self.neg_col_of = np.full(n, -1, dtype=int)
        cols = []
        c_struct = []
        for j in range(n):
            self.col_of[j] = len(cols)
            cols.append((j, +1.0))
            c_struct.append(lp.obj[j])
            if self.free[j]:
                self.neg_col_of[j] = len(cols)
                cols.append((j, -1.0))
                c_struct.append(-lp.obj[j])
        n_struct = len(cols)

        a_std = np.zeros((n, n_struct))
        for k, (j, sgn) in enumerate(cols):
            a_std[j, k] = sgn
        # row coefficients over structural columns
        a_rows = a_user @ a_std
        b_rows = b_user - a_user @ self.shift

        # finite upper bounds become internal rows x'_j <= u_j - l_j
        self.bounded_vars = [j for j in range(n) if math.isfinite(upper[j])]
        bound_a = np.zeros((len(self.bounded_vars), n_struct))
        bound_b = np.zeros(len(self.bounded_vars))
        for t, j in enumerate(self.bounded_vars):
            bound_a[t, self.col_of[j]] = 1.0
            bound_b[t] = upper[j] - self.shift[j]

        all_a = np.vstack([a_rows, bound_a]) if len(self.bounded_vars) else a_rows
        all_b = np.concatenate([b_rows, bound_b])
        all_rels = rels + ["<="] * len(self.bounded_vars)
        k_rows = all_a.shape[0]

        # flip rows to make b >= 0, remembering signs for dual recovery
        self.row_sign = np.ones(k_rows)
        for i in range(k_rows):
            if all_b[i] < 0:
                all_a[i] *= -1.0
                all_b[i] *= -1.0
                self.row_sign[i] = -1.0
                all_rels[i] = {"<=": ">=", ">=": "<=", "=": "="}[all_rels[i]]

        # slack/surplus columns, then artificials where a slack cannot start
        slack_cols = []
        art_rows = []
        for i, rel in enumerate(all_rels):
            if rel == "<=":
                slack_cols.append((i, +1.0))
            elif rel == ">=":
                slack_cols.append((i, -1.0))
                if all_b[i] > 0.0:
                    art_rows.append(i)
            else:
                art_rows.append(i)

        n_slack = len(slack_cols)
        n_art = len(art_rows)
        total = n_struct + n_slack + n_art
        big_a = np.zeros((k_rows, total))
        big_a[:, :n_struct] = all_a
        self.slack_col_of_row = np.full(k_rows, -1, dtype=int)
        for t, (i, sgn) in enumerate(slack_cols):
            big_a[i, n_struct + t] = sgn
            self.slack_col_of_row[i] = n_struct + t
        self.art_start = n_struct + n_slack
        basis = np.full(k_rows, -1, dtype=int)
        for t, i in enumerate(art_rows):
            big_a[i, self.art_start + t] = 1.0
            basis[i] = self.art_start + t
        for i in range(k_rows):
            if basis[i] < 0:
                basis[i] = self.slack_col_of_row[i]

        self.A = big_a
        self.b = all_b
        self.c2 = np.concatenate([np.array(c_struct), np.zeros(n_slack + n_art)])
        self.c1 = np.concatenate([np.zeros(n_struct + n_slack), np.ones(n_art)])
        self.initial_basis = basis
        self.n_struct = n_struct
        self.n_user_rows = lp.n_rows
        self.lp = lp


class _Simplex:
    """Dense tableau engine over a _Standardized model."""

    def __init__(self, std: _Standardized):
        self.std = std
        self.k, self.n = std.A.shape
        self.basis = std.initial_basis.copy()
        self.row_ids = np.arange(self.k)  # surviving original row indexes
        self.T = np.hstack([std.A, std.b[:, None]])
        self.eligible = np.ones(self.n, dtype=bool)
        self.iterations = 0
        self.pivots_since_refactor = 0
        self.degenerate_pivots = 0
        self.bland = False
        self.bland_budget = 5 * (self.k + self.n)
        self.b_scale = 1.0 + float(np.max(std.b)) if self.k else 1.0
        self.rc = np.zeros(self.n)
        self.costs = std.c1

    def refactor(self) -> None:
        """Rebuild the tableau and reduced costs from original data."""
        if self.k == 0:
            self.rc = self.costs.copy()
            return
        alive = self.row_ids
        bmat = self.std.A[np.ix_(alive, self.basis)]
        rhs = np.hstack([self.std.A[alive], self.std.b[alive, None]])
        try:
            self.T = np.linalg.solve(bmat, rhs)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(
                f"basis matrix became singular: {exc}", self.iterations
            )
        cb = self.costs[self.basis]
        self.rc = self.costs - cb @ self.T[:, :-1]
        self.pivots_since_refactor = 0

    def set_phase(self, costs: np.ndarray) -> None:
        self.costs = costs
        self.refactor()

    def objective(self) -> float:
        if self.k == 0:
            return 0.0
        return float(self.costs[self.basis] @ self.T[:, -1])

    def _entering(self) -> int | None:
        rc = np.where(self.eligible, self.rc, np.inf)
        if self.bland:
            below = np.nonzero(rc < -PIVOT_TOL)[0]
            return int(below[0]) if below.size else None
        j = int(np.argmin(rc))
        return j if rc[j] < -PIVOT_TOL else None

    def _leaving(self, j: int) -> int | None:
        col = self.T[:, j]
        pos = col > PIVOT_TOL
        if not np.any(pos):
            return None
        ratios = np.where(pos, self.T[:, -1] / np.where(pos, col, 1.0), np.inf)
        theta = float(np.min(ratios))
        if self.bland:
            # exact argmin set + smallest basic-variable id keeps Bland valid
            ties = np.nonzero(ratios <= theta + 1e-12 * (1.0 + abs(theta)))[0]
            r = int(ties[np.argmin(self.basis[ties])])
        else:
            # among near-tied ratios take the largest pivot entry; a pivot
            # barely above PIVOT_TOL amplifies round-off by its reciprocal
            ties = np.nonzero(ratios <= theta + RATIO_TIE_TOL * (1.0 + abs(theta)))[0]
            r = int(ties[np.argmax(col[ties])])
        if theta <= PIVOT_TOL * self.b_scale:
            self.degenerate_pivots += 1
            if self.degenerate_pivots > self.bland_budget:
                self.bland = True
        return r

    def _pivot(self, r: int, j: int) -> None:
        leaving = self.basis[r]
        if leaving >= self.std.art_start:
            self.eligible[leaving] = False
        piv = self.T[r, j]
        self.T[r] /= piv
        col = self.T[:, j].copy()
        col[r] = 0.0
        self.T -= np.outer(col, self.T[r])
        self.rc -= self.rc[j] * self.T[r, :-1]
        self.basis[r] = j
        self.iterations += 1
        self.pivots_since_refactor += 1
        if self.pivots_since_refactor >= REFACTOR_EVERY:
            self.refactor()

    def run(self) -> str:
        """Iterate the current phase to optimality; report Unbounded if met."""
        while True:
            if self.iterations >= ITERATION_CAP:
                raise ConvergenceError("simplex hit the iteration cap", self.iterations)
            j = self._entering()
            if j is None:
                return OPTIMAL
            r = self._leaving(j)
            if r is None:
                return UNBOUNDED
            # A near-zero pivot on a stale tableau is usually accumulated
            # round-off; rebuild from original data and re-select.
            if abs(self.T[r, j]) < PIVOT_SAFETY and self.pivots_since_refactor > 0:
                self.refactor()
                continue
            self._pivot(r, j)

    def drop_artificials(self) -> None:
        """Pivot basic artificials out; drop rows that prove redundant."""
        keep = np.ones(self.k, dtype=bool)
        for r in range(self.k):
            if self.basis[r] < self.std.art_start:
                continue
            row = self.T[r, : self.std.art_start]
            candidates = np.nonzero(np.abs(row) > PIVOT_TOL)[0]
            candidates = candidates[self.eligible[candidates]]
            if candidates.size:
                self._pivot(r, int(candidates[0]))
            else:
                keep[r] = False
        if not np.all(keep):
            self.T = self.T[keep]
            self.basis = self.basis[keep]
            self.row_ids = self.row_ids[keep]
            self.k = self.T.shape[0]
        self.eligible[self.std.art_start:] = False


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Two-phase dense simplex; statuses are values, never exceptions."""
    std = _Standardized(lp)
    sim = _Simplex(std)

    sim.set_phase(std.c1)
    status = sim.run()
    if status == UNBOUNDED:
        # the phase-1 objective is bounded below by zero; this is numerical
        raise ConvergenceError("phase 1 reported unbounded", sim.iterations)
    if sim.objective() > 1e-7 * sim.b_scale:
        return LpSolution(status=INFEASIBLE, iterations=sim.iterations)
    sim.drop_artificials()

    sim.set_phase(std.c2)
    status = sim.run()
    if status == UNBOUNDED:
        return LpSolution(status=UNBOUNDED, iterations=sim.iterations)
    sim.refactor()

    # primal values over structural columns
    x_std = np.zeros(sim.n)
    if sim.k:
        x_std[sim.basis] = sim.T[:, -1]
    n = lp.n_vars
    x = np.empty(n)
    for j in range(n):
        if std.free[j]:
            x[j] = x_std[std.col_of[j]] - x_std[std.neg_col_of[j]]
        else:
            x[j] = x_std[std.col_of[j]] + std.shift[j]

    # duals from the final basis: y = c_B B^-T, mapped through row flips
    k_rows_total = std.A.shape[0]
    y_int = np.zeros(k_rows_total)
    if sim.k:
        bmat = std.A[np.ix_(sim.row_ids, sim.basis)]
        cb = std.c2[sim.basis]
        y_alive = np.linalg.solve(bmat.T, cb)
        y_int[sim.row_ids] = y_alive
    y_int *= std.row_sign
    y_user = y_int[: std.n_user_rows]
    upper_duals = np.zeros(n)
    for t, j in enumerate(std.bounded_vars):
        upper_duals[j] = y_int[std.n_user_rows + t]

    basis_user = set()
    basic_cols = set(int(c) for c in sim.basis)
    for j in range(n):
        if std.col_of[j] in basic_cols:
            basis_user.add(j)
        elif std.free[j] and std.neg_col_of[j] in basic_cols:
            basis_user.add(j)

    frac = np.abs(x - np.round(x))
    return LpSolution(
        status=OPTIMAL,
        x=x,
        value=float(np.dot(lp.obj, x)),
        y=y_user,
        upper_duals=upper_duals,
        basis=frozenset(basis_user),
        integral_mask=frac <= INTEGRALITY_TOL,
        max_fractionality=float(np.max(frac)) if n else 0.0,
        iterations=sim.iterations,
    )


def check_solution(lp: LinearProgram, sol: LpSolution) -> ResidualReport:
    """Report worst primal, dual, complementary-slackness, and gap residuals.

    Works from the user-facing vectors only, so hand-perturbed copies of a
    solution report exactly the damage done to them.
    """
    if not sol.is_optimal():
        raise ParameterError("check_solution needs an Optimal solution")
    a, rels, b = lp.dense()
    x = np.asarray(sol.x, dtype=float)
    y = np.asarray(sol.y, dtype=float)
    mu = np.asarray(sol.upper_duals, dtype=float)
    lower = np.array(lp.lower)
    upper = np.array(lp.upper)

    ax = a @ x if lp.n_rows else np.zeros(0)
    primal = 0.0
    comp = 0.0
    dual = 0.0
    for i, rel in enumerate(rels):
        slack = b[i] - ax[i]
        if rel == "<=":
            primal = max(primal, -slack)
            dual = max(dual, y[i])  # must be <= 0
        elif rel == ">=":
            primal = max(primal, slack)
            dual = max(dual, -y[i])  # must be >= 0
        else:
            primal = max(primal, abs(slack))
        comp = max(comp, abs(y[i] * slack))

    finite_lo = np.isfinite(lower)
    finite_up = np.isfinite(upper)
    if np.any(finite_lo):
        primal = max(primal, float(np.max(lower[finite_lo] - x[finite_lo])))
    if np.any(finite_up):
        primal = max(primal, float(np.max(x[finite_up] - upper[finite_up])))

    # reduced costs implied by (y, mu): rc = c - A^T y - mu
    rc = np.array(lp.obj) - (a.T @ y if lp.n_rows else 0.0) - mu
    for j in range(lp.n_vars):
        if finite_up[j]:
            dual = max(dual, mu[j])  # must be <= 0
        elif mu[j] != 0.0:
            dual = max(dual, abs(mu[j]))
        if finite_lo[j]:
            dual = max(dual, -rc[j])  # must be >= 0
            comp = max(comp, abs(rc[j] * (x[j] - lower[j])))
        else:
            dual = max(dual, abs(rc[j]))
        if finite_up[j]:
            comp = max(comp, abs(mu[j] * (upper[j] - x[j])))

    bound_terms = float(np.sum(mu[finite_up] * upper[finite_up]))
    if np.any(finite_lo):
        bound_terms += float(np.sum(rc[finite_lo] * lower[finite_lo]))
    gap = abs(float(np.dot(lp.obj, x)) - (float(np.dot(y, b)) + bound_terms))
    return ResidualReport(float(primal), float(dual), float(comp), float(gap))
