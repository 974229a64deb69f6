"""Shared objects for the decomposition engine and its problem plug-ins."""

from __future__ import annotations

import abc
from dataclasses import dataclass, field

import numpy as np

from .lp import RowSense


@dataclass(frozen=True)
class Column:
    """One master variable proposed by a block.

    `coeffs` holds (linking row, coefficient) pairs sorted by row; the
    convexity-row coefficient is not stored here, the engine derives it from
    the block's convexity sense.  `native` is the block-level description of
    the column (arc indices of a path, item indices of an assignment).
    """

    block: int
    cost: float
    coeffs: tuple[tuple[int, float], ...]
    native: tuple = ()

    def coeff_rows(self) -> tuple[int, ...]:
        return tuple(row for row, _ in self.coeffs)


@dataclass(frozen=True)
class DualSolution:
    """Duals of one restricted-master solve, split by row group."""

    iteration: int
    linking: np.ndarray
    convexity: np.ndarray

    def __post_init__(self):
        if self.iteration < 1:
            raise ValueError("iteration index starts at 1")
        if not (np.all(np.isfinite(self.linking)) and np.all(np.isfinite(self.convexity))):
            raise ValueError("dual vectors must be finite")


@dataclass(frozen=True)
class PricingRecord:
    """Outcome of one exact pricing solve, kept for later screening bounds.

    Only exact solves may be recorded; a heuristically priced value would
    make every bound built from it unsound.
    """

    iteration: int
    reduced_cost: float
    convexity_dual: float


@dataclass(frozen=True)
class SupportSet:
    """Linking rows touched by a block's columns generated so far."""

    block: int
    rows: frozenset[int] = field(default_factory=frozenset)


class BlockProblem(abc.ABC):
    """Contract a problem must satisfy to run under the engine.

    Implementations are stateful: `register_column` is called by the engine
    for every column actually installed in the master (initial ones
    included), which is what keeps `support_set` current.  Pricing must be
    exact -- it returns the true minimum reduced cost over the block's
    column set, not an approximation.
    """

    @property
    @abc.abstractmethod
    def num_blocks(self) -> int: ...

    @abc.abstractmethod
    def linking_rows(self) -> list[tuple[RowSense, float]]:
        """Linking-row senses and right-hand sides, in row order."""

    @abc.abstractmethod
    def convexity_sense(self, block: int) -> RowSense:
        """Sense of the block's convexity row (rhs is always 1)."""

    @abc.abstractmethod
    def initial_columns(self) -> list[Column]:
        """Columns seeding the first restricted master."""

    @abc.abstractmethod
    def solve_pricing(self, block: int, pi: np.ndarray, mu_k: float) -> tuple[float, Column | None]:
        """Exact pricing at the given duals.

        `pi` spans the linking rows in normalized >= form and `mu_k` is the
        block's normalized convexity dual.  Returns the minimum reduced cost
        and the achieving column (None when the block has no column at all).
        Must not mutate the dual arrays.
        """

    @abc.abstractmethod
    def hypercube_bound_term(self, block: int, pi_prev: np.ndarray, pi_now: np.ndarray) -> float:
        """Minimum of the dual-shift form over the block's 0/1 box; <= 0."""

    @abc.abstractmethod
    def heuristic_bound_term(self, block: int, pi_prev: np.ndarray, pi_now: np.ndarray,
                             support: SupportSet) -> float:
        """Like hypercube_bound_term but summed over `support` rows only.

        Always >= the exact term, so bounds built from it may overshoot and
        skip blocks that still had improving columns.
        """

    @abc.abstractmethod
    def support_set(self, block: int) -> SupportSet: ...

    def register_column(self, block: int, column: Column) -> None:
        """Engine callback after a column enters the master."""
