"""Delayed column generation over block-structured LPs with pricing screening.

Each iteration solves the restricted master, stores the fresh linking duals,
then visits every block: screening bounds built from earlier pricing results
may prove a block cannot price an improving column, in which case its solve
is skipped; otherwise the block is priced exactly, the outcome is recorded,
and improving columns (reduced cost < -epsilon) enter the master.  The run
stops when an iteration adds nothing or the iteration cap is hit.

Baseline mode never skips.  Exact screening preserves the baseline optimum;
heuristic screening (support-restricted bounds) keeps primal feasibility but
may stop above it.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .filtering import FilterMode, Strategy, should_filter
from .lp import LpModel, LpStatus, RowSense
from .model import BlockProblem, Column, DualSolution, PricingRecord


class EngineError(RuntimeError):
    pass


@dataclass
class DwdConfig:
    mode: FilterMode = FilterMode.BASELINE
    strategy: Strategy = Strategy.ALL
    epsilon: float = 1e-4
    retain_duals: int | None = None  # None keeps every dual vector
    max_iterations: int = 10_000
    seed: int = 0  # reserved for stochastic tie-breaking; current rules are fixed
    audit: bool = False
    trace: bool = False

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.retain_duals is not None and self.retain_duals < 1:
            raise ValueError("retain_duals must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


class DualStore:
    """Linking-dual vectors by iteration, keeping only the newest `retain`."""

    def __init__(self, retain: int | None = None):
        if retain is not None and retain < 1:
            raise ValueError("retain must be at least 1")
        self._retain = retain
        self._data: dict[int, np.ndarray] = {}
        self._order: deque[int] = deque()

    def push(self, iteration: int, pi: np.ndarray) -> None:
        if self._order and iteration <= self._order[-1]:
            raise ValueError("iterations must be pushed in increasing order")
        self._data[iteration] = np.array(pi, dtype=float, copy=True)
        self._order.append(iteration)
        if self._retain is not None:
            while len(self._order) > self._retain:
                del self._data[self._order.popleft()]

    def get(self, iteration: int) -> np.ndarray | None:
        """The stored vector, or None if it was evicted or never pushed."""
        return self._data.get(iteration)

    def __len__(self) -> int:
        return len(self._order)

    @property
    def retained_iterations(self) -> tuple[int, ...]:
        return tuple(self._order)


@dataclass(frozen=True)
class BlockTrace:
    block: int
    decision: str  # priced / filtered / skipped-evicted (see FilterDecision.decision)
    bounds: tuple[tuple[int, float], ...]
    records_evicted: int
    reduced_cost: float | None
    column_added: bool


@dataclass(frozen=True)
class IterationTrace:
    iteration: int
    objective: float
    blocks: tuple[BlockTrace, ...]
    columns_added: int


@dataclass
class RunStats:
    iterations: int = 0
    pricing_calls: int = 0
    columns_added: int = 0
    wall_time_s: float = 0.0
    filters_attempted: int = 0
    filters_succeeded: int = 0
    bounds_evaluated: int = 0
    records_skipped_evicted: int = 0


@dataclass
class AuditReport:
    """Cross-checks collected when DwdConfig.audit is set.

    `soundness_violations` lists exact-mode skips whose re-priced reduced
    cost was still improving; `heuristic_unsound_skips` counts the same event
    in heuristic mode, where it is expected rather than an error.
    """

    reduced_cost_checks: int = 0
    reduced_cost_mismatches: list[str] = field(default_factory=list)
    filter_checks: int = 0
    soundness_violations: list[str] = field(default_factory=list)
    heuristic_unsound_skips: int = 0
    final_checks: int = 0
    final_violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.reduced_cost_mismatches or self.soundness_violations
                    or self.final_violations)


@dataclass
class DwdResult:
    objective: float
    termination: str  # "optimal" | "iteration_limit"
    stats: RunStats
    per_block_added: tuple[int, ...]
    columns: tuple[Column, ...]
    column_values: np.ndarray
    artificial_value: float
    initial_column_count: int
    duals: DualSolution
    trace: tuple[IterationTrace, ...] | None
    audit: AuditReport | None


def reduced_cost(column: Column, pi: np.ndarray, mu_k: float, sigma_k: float) -> float:
    """Master reduced cost of a column at the given normalized duals."""
    acc = column.cost
    for row, val in column.coeffs:
        acc -= pi[row] * val
    return acc - sigma_k * mu_k


_RC_CHECK_TOL = 1e-7


def run_dwd(problem: BlockProblem, config: DwdConfig | None = None) -> DwdResult:
    """Run column generation on `problem` and return the terminal state.

    The master always stays feasible: one high-cost fallback column is
    attached to every row, priced far above any real column, so it only
    carries weight while real coverage is missing (or the instance itself is
    infeasible, which then shows up as a large objective and a positive
    `artificial_value`).
    """
    t_start = time.perf_counter()
    if config is None:
        config = DwdConfig()
    num_blocks = problem.num_blocks
    linking = problem.linking_rows()
    num_linking = len(linking)

    flip = np.ones(num_linking)
    rows: list[tuple[RowSense, float]] = []
    for r, (sense, rhs) in enumerate(linking):
        if sense is RowSense.LE:
            flip[r] = -1.0
            rows.append((RowSense.GE, -float(rhs)))
        else:
            rows.append((sense, float(rhs)))
    sigma = np.ones(num_blocks)
    for k in range(num_blocks):
        sense = problem.convexity_sense(k)
        if sense is RowSense.LE:
            sigma[k] = -1.0
            rows.append((RowSense.GE, -1.0))
        elif sense is RowSense.GE:
            rows.append((RowSense.GE, 1.0))
        else:
            rows.append((RowSense.EQ, 1.0))

    lp = LpModel(rows)
    columns: list[Column] = []
    col_lp_idx: list[int] = []
    per_block_added = [0] * num_blocks

    def install(col: Column) -> None:
        coeffs = [(r, v * flip[r]) for r, v in col.coeffs]
        coeffs.append((num_linking + col.block, float(sigma[col.block])))
        col_lp_idx.append(lp.add_column(col.cost, coeffs))
        columns.append(col)
        problem.register_column(col.block, col)

    initial = problem.initial_columns()
    for col in initial:
        install(col)
    n_initial = len(initial)

    big_m = 1e4 * (max((abs(c.cost) for c in initial), default=0.0) + 1.0)
    artificial_idx = []
    for i, (sense, rhs) in enumerate(rows):
        coef = -1.0 if (sense is RowSense.EQ and rhs < 0) else 1.0
        artificial_idx.append(lp.add_column(big_m, [(i, coef)]))

    store = DualStore(config.retain_duals)
    history: list[list[PricingRecord]] = [[] for _ in range(num_blocks)]
    stats = RunStats()
    audit = AuditReport() if config.audit else None
    trace: list[IterationTrace] | None = [] if config.trace else None
    termination = "iteration_limit"
    last_sol = None
    pi = mu = None

    def check_reduced_cost(col, cbar, k, t, context):
        rc = reduced_cost(col, pi, float(mu[k]), float(sigma[k]))
        audit.reduced_cost_checks += 1
        if abs(rc - cbar) > _RC_CHECK_TOL:
            audit.reduced_cost_mismatches.append(
                f"iteration {t} block {k} ({context}): pricing said {cbar!r}, "
                f"recomputed {rc!r}")

    iterations = 0
    for t in range(1, config.max_iterations + 1):
        sol = lp.solve()
        if sol.status is not LpStatus.OPTIMAL:
            raise EngineError(f"master LP came back {sol.status.value} at iteration {t}")
        last_sol = sol
        iterations = t
        pi = sol.duals[:num_linking]
        mu = sol.duals[num_linking:]
        store.push(t, pi)
        added = 0
        block_traces: list[BlockTrace] = []
        for k in range(num_blocks):
            support = problem.support_set(k) if config.mode is FilterMode.HEURISTIC else None
            fd = should_filter(k, t, pi, store, history[k], float(mu[k]), float(sigma[k]),
                               problem, support, config.mode, config.strategy, config.epsilon)
            stats.bounds_evaluated += fd.bounds_evaluated
            stats.records_skipped_evicted += fd.records_evicted
            if fd.bounds_evaluated > 0:
                stats.filters_attempted += 1
            cbar_seen: float | None = None
            col_added = False
            if fd.skip:
                stats.filters_succeeded += 1
                if audit is not None:
                    cbar_a, col_a = problem.solve_pricing(k, pi, float(mu[k]))
                    audit.filter_checks += 1
                    if col_a is not None:
                        check_reduced_cost(col_a, cbar_a, k, t, "filtered-block audit")
                    if cbar_a < -config.epsilon:
                        if config.mode is FilterMode.EXACT:
                            audit.soundness_violations.append(
                                f"iteration {t} block {k}: skipped on bound "
                                f"{fd.best_bound!r} but exact pricing found {cbar_a!r}")
                        else:
                            audit.heuristic_unsound_skips += 1
            else:
                cbar, col = problem.solve_pricing(k, pi, float(mu[k]))
                stats.pricing_calls += 1
                history[k].append(PricingRecord(t, cbar, float(mu[k])))
                cbar_seen = cbar
                if audit is not None and col is not None:
                    check_reduced_cost(col, cbar, k, t, "pricing")
                if cbar < -config.epsilon and col is not None:
                    install(col)
                    per_block_added[k] += 1
                    stats.columns_added += 1
                    added += 1
                    col_added = True
            if trace is not None:
                block_traces.append(BlockTrace(k, fd.decision, fd.bounds,
                                               fd.records_evicted, cbar_seen, col_added))
        if trace is not None:
            trace.append(IterationTrace(t, sol.objective, tuple(block_traces), added))
        if added == 0:
            termination = "optimal"
            break

    if (audit is not None and termination == "optimal"
            and config.mode in (FilterMode.BASELINE, FilterMode.EXACT)):
        for k in range(num_blocks):
            cbar_f, col_f = problem.solve_pricing(k, pi, float(mu[k]))
            audit.final_checks += 1
            if col_f is not None:
                check_reduced_cost(col_f, cbar_f, k, iterations, "final sweep")
            if cbar_f < -config.epsilon:
                audit.final_violations.append(
                    f"final sweep block {k}: reduced cost {cbar_f!r} still improving")

    stats.iterations = iterations
    stats.wall_time_s = time.perf_counter() - t_start
    x = last_sol.x
    values = np.zeros(len(columns))
    for idx, j in enumerate(col_lp_idx):
        if j < len(x):
            values[idx] = x[j]
    artificial_value = float(sum(x[j] for j in artificial_idx if j < len(x)))
    duals = DualSolution(iterations, pi.copy(), mu.copy())
    return DwdResult(
        objective=last_sol.objective,
        termination=termination,
        stats=stats,
        per_block_added=tuple(per_block_added),
        columns=tuple(columns),
        column_values=values,
        artificial_value=artificial_value,
        initial_column_count=n_initial,
        duals=duals,
        trace=tuple(trace) if trace is not None else None,
        audit=audit,
    )
