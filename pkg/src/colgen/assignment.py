"""Generalized assignment: cover every item, at most one pattern per bin.

Each block is a bin; a column is a subset of items that fits the bin's
capacity, costing the sum of the bin's item costs.  Item rows require
coverage >= 1; bin rows limit each bin to one pattern.  Pricing is an exact
0/1 knapsack minimization over values (cost - item dual).

Instance text format ('#' starts a comment):

    ga <num_items> <num_bins>
    bin <k> <capacity>
    item <i> <k> <cost> <weight>
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .filtering import negative_part_sum, restricted_negative_part_sum
from .lp import RowSense
from .model import BlockProblem, Column, SupportSet

# shapes of the synthetic evaluation families: (bins, items)
E_SET_SHAPES = {
    "E1": (100, 10), "E2": (100, 50), "E3": (100, 100),
    "E4": (1000, 10), "E5": (1000, 50), "E6": (1000, 100),
    "E7": (5000, 10), "E8": (5000, 50), "E9": (5000, 100),
}
DESK_INSTANCES_PER_SET = 10


class GaParseError(ValueError):
    pass


@dataclass
class GaInstance:
    """costs/weights have shape (bins, items); capacities has shape (bins,).

    `hidden_assignment` (item -> bin, or None) is the generator's seed
    assignment, kept for introspection only; it takes no part in equality or
    serialization.
    """

    num_items: int
    num_bins: int
    costs: np.ndarray
    weights: np.ndarray
    capacities: np.ndarray
    hidden_assignment: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        self.costs = np.asarray(self.costs, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=np.int64)
        self.capacities = np.asarray(self.capacities, dtype=np.int64)
        if self.costs.shape != (self.num_bins, self.num_items):
            raise ValueError("costs shape must be (bins, items)")
        if self.weights.shape != (self.num_bins, self.num_items):
            raise ValueError("weights shape must be (bins, items)")
        if self.capacities.shape != (self.num_bins,):
            raise ValueError("capacities shape must be (bins,)")
        if self.num_items < 0 or self.num_bins <= 0:
            raise ValueError("need at least one bin and a nonnegative item count")
        if np.any(self.weights < 0) or np.any(self.capacities < 0):
            raise ValueError("weights and capacities must be nonnegative")

    def __eq__(self, other):
        if not isinstance(other, GaInstance):
            return NotImplemented
        return (self.num_items == other.num_items and self.num_bins == other.num_bins
                and np.array_equal(self.costs, other.costs)
                and np.array_equal(self.weights, other.weights)
                and np.array_equal(self.capacities, other.capacities))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.num_bins, self.num_items)


# ----------------------------------------------------------------------
# text format

def parse_ga_instance(text: str) -> GaInstance:
    header = None
    caps: dict[int, int] = {}
    entries: dict[tuple[int, int], tuple[int, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "ga":
                if header is not None:
                    raise ValueError("duplicate ga header")
                if len(parts) != 3:
                    raise ValueError("ga header takes 2 values")
                header = (int(parts[1]), int(parts[2]))
            elif parts[0] == "bin":
                if len(parts) != 3:
                    raise ValueError("bin takes 2 values")
                caps[int(parts[1])] = int(parts[2])
            elif parts[0] == "item":
                if len(parts) != 5:
                    raise ValueError("item takes 4 values")
                entries[(int(parts[1]), int(parts[2]))] = (int(parts[3]), int(parts[4]))
            else:
                raise ValueError(f"unknown directive {parts[0]!r}")
        except ValueError as exc:
            raise GaParseError(f"line {lineno}: {exc}") from exc
    if header is None:
        raise GaParseError("missing ga header")
    m, bins = header
    costs = np.zeros((bins, m), dtype=np.int64)
    weights = np.zeros((bins, m), dtype=np.int64)
    capacities = np.zeros(bins, dtype=np.int64)
    for k in range(bins):
        if k not in caps:
            raise GaParseError(f"missing bin line for bin {k}")
        capacities[k] = caps[k]
    for i in range(m):
        for k in range(bins):
            if (i, k) not in entries:
                raise GaParseError(f"missing item line for item {i}, bin {k}")
            costs[k, i], weights[k, i] = entries[(i, k)]
    try:
        return GaInstance(m, bins, costs, weights, capacities)
    except ValueError as exc:
        raise GaParseError(str(exc)) from exc


def write_ga_instance(inst: GaInstance) -> str:
    out = [f"ga {inst.num_items} {inst.num_bins}"]
    for k in range(inst.num_bins):
        out.append(f"bin {k} {int(inst.capacities[k])}")
    for i in range(inst.num_items):
        for k in range(inst.num_bins):
            out.append(f"item {i} {k} {int(inst.costs[k, i])} {int(inst.weights[k, i])}")
    return "\n".join(out) + "\n"


# ----------------------------------------------------------------------
# generator

def generate_ga_instance(num_bins: int, num_items: int, seed: int) -> GaInstance:
    """Seeded random instance with a guaranteed feasible cover.

    Integer costs are uniform on [1, 100] and weights on [5, 20].  Every
    item is secretly assigned to a random bin; a bin's capacity is the total
    weight of its assigned items plus one, or uniform on [5, 100] when
    nothing was assigned to it, so packing each item into its hidden bin is
    always feasible.  PCG64(seed) drives the draws in a fixed order: costs,
    weights, assignment, then capacities of empty bins.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    costs = rng.integers(1, 101, size=(num_bins, num_items), dtype=np.int64)
    weights = rng.integers(5, 21, size=(num_bins, num_items), dtype=np.int64)
    assigned = rng.integers(0, num_bins, size=num_items, dtype=np.int64)
    capacities = np.zeros(num_bins, dtype=np.int64)
    for i, k in enumerate(assigned):
        capacities[k] += weights[k, i]
    for k in range(num_bins):
        if np.any(assigned == k):
            capacities[k] += 1
        else:
            capacities[k] = rng.integers(5, 101)
    return GaInstance(num_items, num_bins, costs, weights, capacities,
                      hidden_assignment=tuple(int(k) for k in assigned))


# ----------------------------------------------------------------------
# pricing

def knapsack_min(values, weights, capacity: int) -> tuple[float, tuple[int, ...]]:
    """Exact 0/1 knapsack minimization; the empty set is always allowed.

    Ties on value prefer fewer items, then the lexicographically smallest
    index tuple, so the result is a pure function of the inputs.  Items with
    nonnegative value are never selected (they cannot improve on skipping).
    O(len(values) * capacity) time and memory.
    """
    values = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=np.int64)
    m = len(values)
    cap = int(capacity)
    if cap < 0:
        raise ValueError("capacity must be nonnegative")
    # suffix DP over items i..m-1: best value and item count per capacity
    val = np.zeros((m + 1, cap + 1))
    cnt = np.zeros((m + 1, cap + 1), dtype=np.int64)
    for i in range(m - 1, -1, -1):
        skip_v = val[i + 1]
        skip_c = cnt[i + 1]
        wi = int(w[i])
        if wi > cap:
            val[i] = skip_v
            cnt[i] = skip_c
            continue
        take_v = np.full(cap + 1, np.inf)
        take_c = np.zeros(cap + 1, dtype=np.int64)
        take_v[wi:] = values[i] + skip_v[: cap + 1 - wi]
        take_c[wi:] = 1 + skip_c[: cap + 1 - wi]
        choose = (take_v < skip_v) | ((take_v == skip_v) & (take_c <= skip_c))
        val[i] = np.where(choose, take_v, skip_v)
        cnt[i] = np.where(choose, take_c, skip_c)
    picked = []
    c = cap
    for i in range(m):
        wi = int(w[i])
        if wi > c:
            continue
        take_v = values[i] + val[i + 1][c - wi]
        take_c = 1 + cnt[i + 1][c - wi]
        if take_v < val[i + 1][c] or (take_v == val[i + 1][c] and take_c <= cnt[i + 1][c]):
            picked.append(i)
            c -= wi
    return float(val[0][cap]), tuple(picked)


# ----------------------------------------------------------------------
# block plug-in

class GaBlockProblem(BlockProblem):
    """One block per bin; linking rows are item-coverage rows.

    Bin convexity rows are <= 1, so their normalized duals enter the reduced
    cost with a plus sign:

        sum over picked items of (cost - pi_item) + mu_k
    """

    def __init__(self, inst: GaInstance):
        self.inst = inst
        self._support = [np.zeros(inst.num_items, dtype=bool) for _ in range(inst.num_bins)]

    @property
    def num_blocks(self) -> int:
        return self.inst.num_bins

    @property
    def shape_label(self) -> str:
        return f"({self.inst.num_bins}, {self.inst.num_items})"

    def linking_rows(self):
        return [(RowSense.GE, 1.0) for _ in range(self.inst.num_items)]

    def convexity_sense(self, block: int) -> RowSense:
        return RowSense.LE

    def assignment_column(self, block: int, items) -> Column:
        items = tuple(sorted(int(i) for i in items))
        cost = float(self.inst.costs[block, list(items)].sum()) if items else 0.0
        coeffs = tuple((i, 1.0) for i in items)
        return Column(block=block, cost=cost, coeffs=coeffs, native=items)

    def initial_columns(self):
        # one empty pattern per bin; item coverage starts on the engine's
        # high-cost fallback columns until pricing fills it in
        return [self.assignment_column(k, ()) for k in range(self.inst.num_bins)]

    def solve_pricing(self, block, pi, mu_k):
        values = self.inst.costs[block].astype(float) - pi
        best, items = knapsack_min(values, self.inst.weights[block],
                                   int(self.inst.capacities[block]))
        return best + mu_k, self.assignment_column(block, items)

    def hypercube_bound_term(self, block, pi_prev, pi_now):
        return negative_part_sum(pi_prev - pi_now)

    def heuristic_bound_term(self, block, pi_prev, pi_now, support: SupportSet):
        return restricted_negative_part_sum(pi_prev - pi_now, sorted(support.rows))

    def support_set(self, block) -> SupportSet:
        return SupportSet(block, frozenset(int(i) for i in np.flatnonzero(self._support[block])))

    def register_column(self, block, column):
        for row, _ in column.coeffs:
            self._support[block][row] = True
