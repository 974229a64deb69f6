"""Splittable multi-commodity flow over delay-constrained paths.

A commodity k ships `bandwidth` units from its source to its target along
simple paths whose total delay stays within the commodity's budget.  The
master minimizes total routing cost subject to arc capacities; one block per
commodity prices new paths with a label-setting shortest-path solver under a
delay resource.

Instance text format (0-based indices, '#' starts a comment):

    nodes N
    arc tail head capacity delay cost
    commodity source target bandwidth maxdelay
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .filtering import negative_part_sum, restricted_negative_part_sum
from .lp import RowSense
from .model import BlockProblem, Column, SupportSet

DELAY_TOL = 1e-9


class McParseError(ValueError):
    pass


class UnroutableCommodityError(ValueError):
    """No delay-feasible path exists for some commodity."""


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    capacity: float
    delay: float
    cost: float


@dataclass(frozen=True)
class Commodity:
    source: int
    target: int
    bandwidth: float
    max_delay: float


@dataclass(frozen=True)
class McInstance:
    num_nodes: int
    arcs: tuple[Arc, ...]
    commodities: tuple[Commodity, ...]

    def __post_init__(self):
        if self.num_nodes <= 0:
            raise ValueError("instance needs at least one node")
        for a in self.arcs:
            if not (0 <= a.tail < self.num_nodes and 0 <= a.head < self.num_nodes):
                raise ValueError(f"arc endpoint out of range: {a}")
            if a.capacity < 0 or a.delay < 0 or a.cost < 0:
                raise ValueError(f"arc attributes must be nonnegative: {a}")
        for c in self.commodities:
            if not (0 <= c.source < self.num_nodes and 0 <= c.target < self.num_nodes):
                raise ValueError(f"commodity endpoint out of range: {c}")
            if c.source == c.target:
                raise ValueError("commodity source and target must differ")
            if c.bandwidth <= 0 or c.max_delay < 0:
                raise ValueError(f"commodity needs positive bandwidth, nonnegative budget: {c}")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.num_nodes, len(self.arcs), len(self.commodities))


# ----------------------------------------------------------------------
# text format

def parse_mc_instance(text: str) -> McInstance:
    num_nodes = None
    arcs: list[tuple[int, Arc]] = []
    commodities: list[tuple[int, Commodity]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind, args = parts[0], parts[1:]
        try:
            if kind == "nodes":
                if num_nodes is not None:
                    raise ValueError("duplicate nodes line")
                if len(args) != 1:
                    raise ValueError("nodes takes one value")
                num_nodes = int(args[0])
            elif kind == "arc":
                if len(args) != 5:
                    raise ValueError("arc takes 5 values")
                arcs.append((lineno, Arc(int(args[0]), int(args[1]),
                                         float(args[2]), float(args[3]), float(args[4]))))
            elif kind == "commodity":
                if len(args) != 4:
                    raise ValueError("commodity takes 4 values")
                commodities.append((lineno, Commodity(int(args[0]), int(args[1]),
                                                      float(args[2]), float(args[3]))))
            else:
                raise ValueError(f"unknown directive {kind!r}")
        except ValueError as exc:
            raise McParseError(f"line {lineno}: {exc}") from exc
    if num_nodes is None:
        raise McParseError("missing nodes line")
    for lineno, a in arcs:
        if not (0 <= a.tail < num_nodes and 0 <= a.head < num_nodes):
            raise McParseError(f"line {lineno}: arc endpoint out of range: {a}")
        if a.capacity < 0 or a.delay < 0 or a.cost < 0:
            raise McParseError(f"line {lineno}: arc attributes must be nonnegative: {a}")
    for lineno, c in commodities:
        if not (0 <= c.source < num_nodes and 0 <= c.target < num_nodes):
            raise McParseError(f"line {lineno}: commodity endpoint out of range: {c}")
    try:
        return McInstance(num_nodes, tuple(a for _, a in arcs),
                          tuple(c for _, c in commodities))
    except ValueError as exc:
        raise McParseError(str(exc)) from exc


def write_mc_instance(inst: McInstance) -> str:
    out = [f"nodes {inst.num_nodes}"]
    for a in inst.arcs:
        out.append(f"arc {a.tail} {a.head} {a.capacity!r} {a.delay!r} {a.cost!r}")
    for c in inst.commodities:
        out.append(f"commodity {c.source} {c.target} {c.bandwidth!r} {c.max_delay!r}")
    return "\n".join(out) + "\n"


# ----------------------------------------------------------------------
# shortest paths

def _as_pairs(arcs) -> list[tuple[int, int]]:
    """(tail, head) pairs from Arc objects or bare pairs."""
    out = []
    for a in arcs:
        if isinstance(a, Arc):
            out.append((a.tail, a.head))
        else:
            tail, head = a[0], a[1]
            out.append((int(tail), int(head)))
    return out


def _min_to_target(num_nodes, arcs, values, target) -> np.ndarray:
    """Dijkstra on reversed arcs: least total `values` from each node to target."""
    into: list[list[int]] = [[] for _ in range(num_nodes)]
    for idx, (tail, head) in enumerate(arcs):
        into[head].append(idx)
    dist = np.full(num_nodes, np.inf)
    dist[target] = 0.0
    heap = [(0.0, target)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for idx in into[v]:
            tail = arcs[idx][0]
            nd = d + values[idx]
            if nd < dist[tail]:
                dist[tail] = nd
                heapq.heappush(heap, (nd, tail))
    return dist


def rcsp(num_nodes: int, arcs, weights, delays, max_delay: float,
         source: int, target: int) -> tuple[float, tuple[int, ...]] | None:
    """Cheapest simple source-target path with total delay within budget.

    `arcs` holds Arc objects or bare (tail, head) pairs; `weights` (nonnegative) are
    minimized, `delays` (nonnegative) are capped by `max_delay`.  Label
    setting with (weight, delay) dominance; among equal-weight optima the
    lexicographically smallest arc-index sequence wins, which pins the result
    independent of arc ordering quirks.  Returns (weight, arc tuple) or None.
    """
    arcs = _as_pairs(arcs)
    weights = np.asarray(weights, dtype=float)
    delays = np.asarray(delays, dtype=float)
    if source == target:
        return (0.0, ())
    dmin = _min_to_target(num_nodes, arcs, delays, target)
    if dmin[source] > max_delay + DELAY_TOL:
        return None
    out: list[list[int]] = [[] for _ in range(num_nodes)]
    for idx, (tail, head) in enumerate(arcs):
        out[tail].append(idx)
    for adj in out:
        adj.sort()
    # retained labels per node: (weight, delay, arcseq); a new label is kept
    # unless some retained one is no worse in weight, delay and lex order
    retained: list[list[tuple[float, float, tuple[int, ...]]]] = [[] for _ in range(num_nodes)]
    start = (0.0, 0.0, ())
    retained[source].append(start)
    heap: list[tuple[float, tuple[int, ...], float, int]] = [(0.0, (), 0.0, source)]
    while heap:
        w, seq, dl, v = heapq.heappop(heap)
        if v == target:
            return (w, seq)
        for idx in out[v]:
            head = arcs[idx][1]
            nw = w + weights[idx]
            ndl = dl + delays[idx]
            if ndl + dmin[head] > max_delay + DELAY_TOL:
                continue
            nseq = seq + (idx,)
            dominated = False
            for (ow, odl, oseq) in retained[head]:
                if ow <= nw and odl <= ndl and oseq <= nseq:
                    dominated = True
                    break
            if dominated:
                continue
            retained[head].append((nw, ndl, nseq))
            heapq.heappush(heap, (nw, nseq, ndl, head))
    return None


def path_delay(inst: McInstance, path) -> float:
    return float(sum(inst.arcs[a].delay for a in path))


def path_cost(inst: McInstance, path) -> float:
    return float(sum(inst.arcs[a].cost for a in path))


# ----------------------------------------------------------------------
# block plug-in

class McBlockProblem(BlockProblem):
    """One block per commodity; linking rows are arc capacities.

    Capacity rows are declared directly in >= form (negated loads against
    negated capacities), so a column for a path crossing arc `a` carries
    coefficient -bandwidth on row `a` and the capacity duals come back
    nonnegative.  Reduced cost of a path column:

        bandwidth * sum(arc cost + pi_arc) - mu_k
    """

    def __init__(self, inst: McInstance):
        self.inst = inst
        self._arc_pairs = [(a.tail, a.head) for a in inst.arcs]
        self._costs = np.array([a.cost for a in inst.arcs])
        self._delays = np.array([a.delay for a in inst.arcs])
        self._support = [np.zeros(len(inst.arcs), dtype=bool) for _ in inst.commodities]
        self._initial: list[Column] = []
        for k, com in enumerate(inst.commodities):
            found = rcsp(inst.num_nodes, self._arc_pairs, self._delays, self._delays,
                         com.max_delay, com.source, com.target)
            if found is None:
                raise UnroutableCommodityError(
                    f"commodity {k} has no path within delay budget {com.max_delay}")
            _, path = found
            self._initial.append(self.path_column(k, path))

    @property
    def num_blocks(self) -> int:
        return len(self.inst.commodities)

    @property
    def shape_label(self) -> str:
        v, a, k = self.inst.shape
        return f"({v}, {a}, {k})"

    def linking_rows(self):
        return [(RowSense.GE, -a.capacity) for a in self.inst.arcs]

    def convexity_sense(self, block: int) -> RowSense:
        return RowSense.GE

    def path_column(self, block: int, path) -> Column:
        com = self.inst.commodities[block]
        b = com.bandwidth
        cost = b * path_cost(self.inst, path)
        coeffs = tuple((a, -b) for a in sorted(path))
        return Column(block=block, cost=cost, coeffs=coeffs, native=tuple(path))

    def initial_columns(self):
        return list(self._initial)

    def solve_pricing(self, block, pi, mu_k):
        com = self.inst.commodities[block]
        b = com.bandwidth
        # capacity duals are >=0 up to LP tolerance; clamp the dust so the
        # path weights stay nonnegative for the label-setting solver
        w = b * (self._costs + np.maximum(pi, 0.0))
        found = rcsp(self.inst.num_nodes, self._arc_pairs, w, self._delays,
                     com.max_delay, com.source, com.target)
        if found is None:
            raise UnroutableCommodityError(f"commodity {block} lost all feasible paths")
        _, path = found
        cbar = b * float(sum(self._costs[a] + pi[a] for a in path)) - mu_k
        return cbar, self.path_column(block, path)

    def hypercube_bound_term(self, block, pi_prev, pi_now):
        b = self.inst.commodities[block].bandwidth
        return negative_part_sum(b * (pi_now - pi_prev))

    def heuristic_bound_term(self, block, pi_prev, pi_now, support: SupportSet):
        b = self.inst.commodities[block].bandwidth
        return restricted_negative_part_sum(b * (pi_now - pi_prev), sorted(support.rows))

    def support_set(self, block) -> SupportSet:
        return SupportSet(block, frozenset(int(i) for i in np.flatnonzero(self._support[block])))

    def register_column(self, block, column):
        for row, _ in column.coeffs:
            self._support[block][row] = True


# ----------------------------------------------------------------------
# random instances

def generate_mc_instance(num_nodes: int, num_arcs: int, num_commodities: int,
                         seed: int, capacity_slack: tuple[float, float] = (0.0, 0.1),
                         ) -> McInstance:
    """Seeded random instance: a directed ring plus random chord arcs.

    Synthetic data, not drawn from any benchmark set.  The ring keeps the
    graph strongly connected; delay budgets are set above each pair's
    minimum achievable delay so every commodity is routable, and capacities
    cover the load of routing everything on minimum-delay paths, so the
    master is feasible without artificial help.  PCG64(seed) drives all
    draws in a fixed order: topology, arc attributes, commodities, budgets,
    capacities.
    """
    if num_arcs < num_nodes:
        raise ValueError("need at least num_nodes arcs for the connecting ring")
    rng = np.random.Generator(np.random.PCG64(seed))
    pairs = [(i, (i + 1) % num_nodes) for i in range(num_nodes)]
    while len(pairs) < num_arcs:
        tail = int(rng.integers(num_nodes))
        head = int(rng.integers(num_nodes))
        if tail != head:
            pairs.append((tail, head))
    costs = np.round(rng.uniform(1.0, 10.0, size=num_arcs), 3)
    delays = np.round(rng.uniform(1.0, 10.0, size=num_arcs), 3)
    commodities = []
    for _ in range(num_commodities):
        source = int(rng.integers(num_nodes))
        target = int(rng.integers(num_nodes))
        while target == source:
            target = int(rng.integers(num_nodes))
        bandwidth = float(rng.integers(1, 6))
        commodities.append((source, target, bandwidth))
    budgets = []
    for source, target, _ in commodities:
        dmin = _min_to_target(num_nodes, pairs, delays, target)[source]
        budgets.append(round(float(dmin) * float(rng.uniform(1.3, 2.2)) + 0.5, 3))
    load = np.zeros(num_arcs)
    for (source, target, bandwidth), budget in zip(commodities, budgets):
        found = rcsp(num_nodes, pairs, delays, delays, budget, source, target)
        for a in found[1]:
            load[a] += bandwidth
    total_b = sum(b for _, _, b in commodities)
    lo, hi = capacity_slack
    caps = np.round(load + rng.uniform(lo, hi, size=num_arcs) * max(total_b, 1.0) + 1.0, 3)
    arcs = tuple(Arc(t, h, float(caps[i]), float(delays[i]), float(costs[i]))
                 for i, (t, h) in enumerate(pairs))
    comms = tuple(Commodity(s, t, b, d) for (s, t, b), d in zip(commodities, budgets))
    return McInstance(num_nodes, arcs, comms)
