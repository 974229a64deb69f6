"""Dense two-phase primal simplex for small and mid-size LPs.

Minimization only, variables bounded below by zero.  Rows may be >=, <= or =.
Internally every row is converted to an equality with a nonnegative right-hand
side; reported duals are mapped back to the caller's row senses, so duals of
>= rows come out nonnegative and duals of <= rows nonpositive (up to
tolerance).  Columns can be appended after a solve and the previous basis is
reused, which keeps re-solves cheap in column-generation loops.

Models are independent: two LpModel instances share no state and may be
solved concurrently from different threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-7
PIVOT_TOL = 1e-9
RC_TOL = 1e-9

# internal column kinds
_STRUCT = 0
_SURPLUS = 1
_ARTIFICIAL = 2


class RowSense(enum.Enum):
    GE = ">="
    LE = "<="
    EQ = "="


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpError(Exception):
    pass


class LpStructureError(LpError):
    """Bad model input: unknown row, non-finite data, wrong shapes."""


class LpNumericalError(LpError):
    """Simplex broke down and the Bland fallback did not recover."""


class _Breakdown(Exception):
    # internal signal, converted to LpNumericalError after the retry
    pass


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray | None
    objective: float | None
    duals: np.ndarray | None
    iterations: int


class LpModel:
    """A minimization LP over nonnegative variables with fixed rows.

    Rows are given at construction as (sense, rhs) pairs; columns are added
    with `add_column` and may keep arriving after solves.
    """

    def __init__(self, rows):
        self._senses: list[RowSense] = []
        self._rhs: list[float] = []
        for sense, rhs in rows:
            if not isinstance(sense, RowSense):
                raise LpStructureError(f"row sense must be RowSense, got {sense!r}")
            rhs = float(rhs)
            if not np.isfinite(rhs):
                raise LpStructureError("row rhs must be finite")
            self._senses.append(sense)
            self._rhs.append(rhs)
        self._costs: list[float] = []
        self._coeffs: list[dict[int, float]] = []
        self._built = False
        self._basis: np.ndarray | None = None
        # filled by _build()
        self._row_mult: np.ndarray | None = None
        self._beq: np.ndarray | None = None
        self._A: np.ndarray | None = None
        self._n_int = 0
        self._kind: np.ndarray | None = None
        self._c2: np.ndarray | None = None
        self._struct_int: list[int] = []
        self._art_int: np.ndarray | None = None

    # ------------------------------------------------------------------
    @property
    def num_rows(self) -> int:
        return len(self._senses)

    @property
    def num_cols(self) -> int:
        return len(self._costs)

    def row_sense(self, i: int) -> RowSense:
        return self._senses[i]

    def row_rhs(self, i: int) -> float:
        return self._rhs[i]

    def column_cost(self, j: int) -> float:
        return self._costs[j]

    def column_coeffs(self, j: int) -> dict[int, float]:
        return dict(self._coeffs[j])

    def add_column(self, cost, coeffs) -> int:
        """Append a variable; `coeffs` maps row index to coefficient.

        Accepts a dict or an iterable of (row, value) pairs; repeated rows
        accumulate.  Returns the new column's index.
        """
        cost = float(cost)
        if not np.isfinite(cost):
            raise LpStructureError("column cost must be finite")
        acc: dict[int, float] = {}
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        for row, val in items:
            row = int(row)
            if row < 0 or row >= self.num_rows:
                raise LpStructureError(f"column references unknown row {row}")
            val = float(val)
            if not np.isfinite(val):
                raise LpStructureError("column coefficient must be finite")
            acc[row] = acc.get(row, 0.0) + val
        j = len(self._costs)
        self._costs.append(cost)
        self._coeffs.append(acc)
        if self._built:
            col = np.zeros(self.num_rows)
            for row, val in acc.items():
                col[row] = val * self._row_mult[row]
            self._append_internal(col, cost, _STRUCT, j)
            self._struct_int.append(self._n_int - 1)
        return j

    # ------------------------------------------------------------------
    def _append_internal(self, col: np.ndarray, cost: float, kind: int, ref: int):
        m = self.num_rows
        if self._n_int == self._A.shape[1]:
            grown = np.zeros((m, max(16, 2 * self._A.shape[1])))
            grown[:, : self._n_int] = self._A[:, : self._n_int]
            self._A = grown
            for arr_name in ("_kind", "_c2", "_ref"):
                old = getattr(self, arr_name)
                new = np.zeros(max(16, 2 * old.shape[0]), dtype=old.dtype)
                new[: self._n_int] = old[: self._n_int]
                setattr(self, arr_name, new)
        self._A[:, self._n_int] = col
        self._kind[self._n_int] = kind
        self._c2[self._n_int] = cost
        self._ref[self._n_int] = ref
        self._n_int += 1

    def _build(self):
        m = self.num_rows
        senses = self._senses
        u = np.array([-1.0 if s is RowSense.LE else 1.0 for s in senses])
        b1 = np.asarray(self._rhs, dtype=float) * u
        s = np.where(b1 < 0, -1.0, 1.0)
        self._row_mult = u * s
        self._beq = b1 * s
        n = self.num_cols
        n_ineq = sum(1 for sense in senses if sense is not RowSense.EQ)
        cap = n + n_ineq + m + 16
        self._A = np.zeros((m, cap))
        self._kind = np.zeros(cap, dtype=np.int8)
        self._c2 = np.zeros(cap)
        self._ref = np.zeros(cap, dtype=np.int64)
        self._n_int = 0
        self._struct_int = []
        self._built = True
        for j in range(n):
            col = np.zeros(m)
            for row, val in self._coeffs[j].items():
                col[row] = val * self._row_mult[row]
            self._append_internal(col, self._costs[j], _STRUCT, j)
            self._struct_int.append(self._n_int - 1)
        for i, sense in enumerate(senses):
            if sense is RowSense.EQ:
                continue
            col = np.zeros(m)
            col[i] = -s[i]  # surplus of the >= form, scaled
            self._append_internal(col, 0.0, _SURPLUS, i)
        art = []
        for i in range(m):
            col = np.zeros(m)
            col[i] = 1.0
            self._append_internal(col, 0.0, _ARTIFICIAL, i)
            art.append(self._n_int - 1)
        self._art_int = np.asarray(art, dtype=np.int64)

    # ------------------------------------------------------------------
    def solve(self) -> LpSolution:
        """Run the simplex; warm-starts from the last optimal basis."""
        if not self._built:
            self._build()
        try:
            return self._solve_attempt(bland_from_start=False, refactor_every=128)
        except _Breakdown:
            self._basis = None
            try:
                return self._solve_attempt(bland_from_start=True, refactor_every=32)
            except _Breakdown as exc:
                raise LpNumericalError(f"simplex failed to converge: {exc}") from exc

    def _solve_attempt(self, bland_from_start: bool, refactor_every: int) -> LpSolution:
        m = self.num_rows
        A = self._A[:, : self._n_int]
        beq = self._beq
        kind = self._kind[: self._n_int]
        allow = kind != _ARTIFICIAL
        iters = 0

        basis = None
        b_inv = None
        if self._basis is not None and len(self._basis) == m:
            cand = self._basis.copy()
            try:
                b_inv = np.linalg.inv(A[:, cand])
            except np.linalg.LinAlgError:
                b_inv = None
            if b_inv is not None:
                xb = b_inv @ beq
                if xb.min(initial=0.0) >= -1e-6:
                    basis = cand
                else:
                    b_inv = None

        if basis is None:
            # phase 1 from the all-artificial basis
            basis = self._art_int.copy()
            b_inv = np.eye(m)
            c1 = np.where(kind == _ARTIFICIAL, 1.0, 0.0)
            status, n1 = self._simplex(
                A, beq, c1, basis, b_inv, allow, bland_from_start, refactor_every,
                pin_artificials=False,
            )
            iters += n1
            if status != "optimal":
                raise _Breakdown("phase 1 did not reach an optimum")
            xb = np.maximum(b_inv @ beq, 0.0)
            if float(c1[basis] @ xb) > FEAS_TOL:
                self._basis = None
                return LpSolution(LpStatus.INFEASIBLE, None, None, None, iters)

        c2 = self._c2[: self._n_int]
        status, n2 = self._simplex(
            A, beq, c2, basis, b_inv, allow, bland_from_start, refactor_every,
            pin_artificials=True,
        )
        iters += n2
        if status == "unbounded":
            self._basis = None
            return LpSolution(LpStatus.UNBOUNDED, None, None, None, iters)
        if status != "optimal":
            raise _Breakdown("phase 2 did not reach an optimum")

        xb = np.maximum(b_inv @ beq, 0.0)
        x_int = np.zeros(self._n_int)
        x_int[basis] = xb
        x = x_int[self._struct_int] if self._struct_int else np.zeros(0)
        objective = float(np.asarray(self._costs) @ x) if len(x) else 0.0
        y = c2[basis] @ b_inv
        duals = y * self._row_mult
        self._basis = basis.copy()
        return LpSolution(LpStatus.OPTIMAL, x, objective, duals, iters)

    def _simplex(self, A, beq, costs, basis, b_inv, allow, bland, refactor_every,
                 pin_artificials):
        """Primal simplex iterations on the current basis, in place.

        Dantzig entering rule, switching to Bland's rule once the run of
        degenerate pivots exceeds 3*(rows+cols).  With `pin_artificials`,
        zero-level basic artificials are never allowed to grow back (forced
        ratio 0), which keeps phase-2 iterates feasible for the real rows.
        Returns (status, pivots).
        """
        m = len(beq)
        n = A.shape[1]
        if m == 0:
            if np.any(costs[allow] < -RC_TOL):
                return "unbounded", 0
            return "optimal", 0
        max_pivots = max(2000, 60 * (m + n))
        degen_limit = 3 * (m + n)
        degen_run = 0
        pivots = 0
        while True:
            y = costs[basis] @ b_inv
            rc = costs - y @ A
            rc_view = np.where(allow, rc, np.inf)
            if bland:
                neg = np.flatnonzero(rc_view < -RC_TOL)
                if neg.size == 0:
                    return "optimal", pivots
                enter = int(neg[0])
            else:
                enter = int(np.argmin(rc_view))
                if rc_view[enter] >= -RC_TOL:
                    return "optimal", pivots
            d = b_inv @ A[:, enter]
            xb = np.maximum(b_inv @ beq, 0.0)
            theta = np.full(m, np.inf)
            pos = d > PIVOT_TOL
            theta[pos] = xb[pos] / d[pos]
            if pin_artificials:
                # basic artificials must never grow back above zero
                art_grow = (self._kind[basis] == _ARTIFICIAL) & (d < -PIVOT_TOL)
                theta[art_grow] = 0.0
            if not np.isfinite(theta).any():
                return "unbounded", pivots
            t_min = theta.min()
            ties = np.flatnonzero(theta == t_min)
            if bland:
                leave = int(ties[np.argmin(basis[ties])])
            else:
                art_tie = ties[self._kind[basis[ties]] == _ARTIFICIAL]
                pool = art_tie if art_tie.size else ties
                best = pool[np.abs(d[pool]).argmax()]
                leave = int(best)
            piv = d[leave]
            if abs(piv) <= PIVOT_TOL:
                raise _Breakdown("vanishing pivot element")
            row = b_inv[leave] / piv
            rest = d.copy()
            rest[leave] = 0.0
            b_inv -= np.outer(rest, row)
            b_inv[leave] = row
            basis[leave] = enter
            pivots += 1
            if t_min <= 1e-12:
                degen_run += 1
                if degen_run > degen_limit:
                    bland = True
            else:
                degen_run = 0
            if pivots % refactor_every == 0:
                try:
                    b_inv[:, :] = np.linalg.inv(A[:, basis])
                except np.linalg.LinAlgError as exc:
                    raise _Breakdown("singular basis during refactorization") from exc
            if pivots > max_pivots:
                raise _Breakdown("pivot limit exceeded")


def optimality_report(model: LpModel, sol: LpSolution) -> dict:
    """Certificate residuals for an OPTIMAL solution, for checks and tests.

    Returns primal/dual objectives, worst row violation, worst dual-sign
    violation, and the complementary-slackness residual.
    """
    if sol.status is not LpStatus.OPTIMAL:
        raise ValueError("optimality_report needs an optimal solution")
    m, n = model.num_rows, model.num_cols
    activity = np.zeros(m)
    for j in range(n):
        xj = sol.x[j]
        if xj == 0.0:
            continue
        for row, val in model.column_coeffs(j).items():
            activity[row] += val * xj
    row_violation = 0.0
    dual_sign_violation = 0.0
    comp_slack = 0.0
    dual_obj = 0.0
    for i in range(m):
        rhs = model.row_rhs(i)
        sense = model.row_sense(i)
        slack = activity[i] - rhs
        if sense is RowSense.GE:
            row_violation = max(row_violation, -slack)
            dual_sign_violation = max(dual_sign_violation, -sol.duals[i])
        elif sense is RowSense.LE:
            row_violation = max(row_violation, slack)
            dual_sign_violation = max(dual_sign_violation, sol.duals[i])
        else:
            row_violation = max(row_violation, abs(slack))
        comp_slack = max(comp_slack, abs(sol.duals[i] * slack))
        dual_obj += sol.duals[i] * rhs
    return {
        "primal_objective": sol.objective,
        "dual_objective": dual_obj,
        "duality_gap": abs(sol.objective - dual_obj),
        "row_violation": row_violation,
        "dual_sign_violation": dual_sign_violation,
        "complementary_slackness": comp_slack,
    }
