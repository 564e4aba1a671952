"""Sequential spanning-tree partitioner and repetition accounting.

Plans assign every graph node to one of k districts; partial plans have the
first m districts marked and a connected unassigned remainder.  Districts
are drawn by cutting a uniformly random spanning tree of the remainder at a
population-balanced edge.  A population of S such builds, coupled through
weighted resampling between generations, yields a sample of complete plans
together with the descendancy diagram the resampling realized.

Population balance is checked in exact integers: a piece with population p
is within tolerance iff ``abs(p*k - total) <= pop_tol*total``.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .diagrams import DescendancyDiagram, decorate
from .graphs import (
    WeightedGraph,
    is_connected,
    log_spanning_tree_count,
    random_spanning_tree,
)

__all__ = [
    "BottleneckError",
    "RunAbortedError",
    "PartialPlan",
    "Plan",
    "empty_plan",
    "split_district",
    "partial_plan_weight",
    "validate_plan",
    "enumerate_balanced_partitions",
    "RepetitionReport",
    "repetition_report",
    "MiniSmcResult",
    "run_mini_smc",
    "ENUMERATION_NODE_LIMIT",
]

ENUMERATION_NODE_LIMIT = 20
_STREAM_SMC = 3


class BottleneckError(RuntimeError):
    """No balanced connected split was found in the allotted attempts."""


class RunAbortedError(RuntimeError):
    """A whole generation failed to extend; the run cannot continue."""

    def __init__(self, generation: int, message: str):
        super().__init__(message)
        self.generation = generation


def _pop_in_tolerance(pop: int, total: int, k: int, pop_tol: float) -> bool:
    # |pop - total/k| <= pop_tol * total/k, cleared of the division
    return abs(pop * k - total) <= pop_tol * total


@dataclass(frozen=True)
class Plan:
    """Complete assignment of nodes to districts 0..k-1."""

    districts: int
    assignment: np.ndarray

    def district_nodes(self, d: int) -> tuple[int, ...]:
        return tuple(int(u) for u in np.flatnonzero(self.assignment == d))

    def fingerprints(self) -> tuple[tuple[int, ...], ...]:
        """Canonical per-district keys: the sorted node tuple of each district.

        Equal node sets give equal keys and vice versa, so no hash-collision
        audit is needed.
        """
        return tuple(self.district_nodes(d) for d in range(self.districts))


@dataclass(frozen=True)
class PartialPlan:
    """Plan under construction: districts 0..marked-1 assigned, rest -1."""

    graph: WeightedGraph
    districts: int
    assignment: np.ndarray
    marked: int

    @property
    def level(self) -> int:
        """Diagram level this plan sits at (k - marked)."""
        return self.districts - self.marked

    @property
    def remaining_districts(self) -> int:
        return self.districts - self.marked

    def unassigned_nodes(self) -> list[int]:
        return [int(u) for u in np.flatnonzero(self.assignment < 0)]

    def district_nodes(self, d: int) -> list[int]:
        return [int(u) for u in np.flatnonzero(self.assignment == d)]

    def finalize(self) -> Plan:
        """Assign the remainder as the last district."""
        if self.marked != self.districts - 1:
            raise ValueError(
                f"finalize needs exactly one district left, have {self.remaining_districts}"
            )
        assignment = self.assignment.copy()
        assignment[assignment < 0] = self.districts - 1
        return Plan(districts=self.districts, assignment=assignment)


def empty_plan(g: WeightedGraph, k: int) -> PartialPlan:
    if k < 2:
        raise ValueError(f"district count must be >= 2, got {k}")
    if not is_connected(g):
        raise ValueError("graph must be connected")
    return PartialPlan(
        graph=g,
        districts=k,
        assignment=np.full(g.num_nodes, -1, dtype=np.int64),
        marked=0,
    )


def _rooted_orientation(region: list[int], tree_edges) -> tuple[list[int], dict[int, int]]:
    """BFS order and parent map for the tree rooted at region's first node."""
    adj: dict[int, list[int]] = {u: [] for u in region}
    for u, v in tree_edges:
        adj[u].append(v)
        adj[v].append(u)
    root = region[0]
    parent = {root: root}
    order = [root]
    for u in order:
        for v in adj[u]:
            if v not in parent:
                parent[v] = u
                order.append(v)
    return order, parent


def split_district(
    plan: PartialPlan,
    pop_tol: float,
    attempts: int,
    seed,
) -> PartialPlan:
    """Mark the next district by cutting a random spanning tree of the remainder.

    Each attempt draws a fresh uniform spanning tree of the unassigned
    region, scans every tree edge for a cut whose severed side carries one
    district's worth of population (when exactly two districts remain, both
    sides must), and picks uniformly among the qualifying cuts.  If every
    one of ``attempts`` trees comes up empty, raises
    :class:`BottleneckError`, the signal callers react to.
    """
    g = plan.graph
    if plan.remaining_districts < 2:
        raise ValueError("splitting needs at least two districts still unassigned")
    region = plan.unassigned_nodes()
    total = g.total_weight
    k = plan.districts
    region_pop = int(g.node_weights[region].sum())
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    weights = g.node_weights
    final_pair = plan.remaining_districts == 2

    for _ in range(attempts):
        tree = random_spanning_tree(g, rng, nodes=region)
        order, parent = _rooted_orientation(region, tree)
        subtree_pop = {u: int(weights[u]) for u in region}
        for u in reversed(order[1:]):
            subtree_pop[parent[u]] += subtree_pop[u]
        candidates: list[tuple[int, bool]] = []  # (node whose parent edge is cut, take subtree side)
        for u in order[1:]:
            side = subtree_pop[u]
            side_ok = _pop_in_tolerance(side, total, k, pop_tol)
            rest_ok = _pop_in_tolerance(region_pop - side, total, k, pop_tol)
            if final_pair:
                if side_ok and rest_ok:
                    candidates.append((u, True))
            else:
                if side_ok:
                    candidates.append((u, True))
                if rest_ok:
                    candidates.append((u, False))
        if not candidates:
            continue
        cut_node, take_subtree = candidates[rng.integers(0, len(candidates))]
        children: dict[int, list[int]] = {u: [] for u in region}
        for u in order[1:]:
            children[parent[u]].append(u)
        member = [cut_node]
        for u in member:
            member.extend(children[u])
        side_nodes = set(member)
        district = side_nodes if take_subtree else set(region) - side_nodes
        assignment = plan.assignment.copy()
        assignment[sorted(district)] = plan.marked
        return PartialPlan(
            graph=g, districts=k, assignment=assignment, marked=plan.marked + 1
        )
    raise BottleneckError(
        f"no balanced connected split of the remainder after {attempts} trees "
        f"(district {plan.marked}, region of {len(region)} nodes)"
    )


def partial_plan_weight(
    plan: PartialPlan,
    rho: float,
    count_remainder_boundary: bool = True,
) -> float:
    """Log selection weight (rho - 1) * log(tree-count product) - log(cut size).

    The tree-count product runs over every piece of the plan: each marked
    district and, when districts remain, the unassigned remainder.  The cut
    size counts edges joining distinct pieces; with
    ``count_remainder_boundary`` False, edges touching the remainder are
    ignored.  A fully marked plan (marked == k) is scored over its k
    districts, so complete partitions can be weighed too.
    """
    g = plan.graph
    assignment = plan.assignment
    piece_ids = assignment.copy()
    has_remainder = (piece_ids < 0).any()
    log_tau = 0.0
    for d in range(plan.marked):
        log_tau += log_spanning_tree_count(g, plan.district_nodes(d))
    if has_remainder:
        log_tau += log_spanning_tree_count(g, plan.unassigned_nodes())
    cut = 0
    for u, v in g.edges:
        pu, pv = piece_ids[u], piece_ids[v]
        if pu == pv:
            continue
        if not count_remainder_boundary and (pu < 0 or pv < 0):
            continue
        cut += 1
    if cut == 0:
        raise ValueError("plan has no cut edges; weights are undefined")
    return (rho - 1.0) * log_tau - math.log(cut)


def validate_plan(g: WeightedGraph, plan: Plan, pop_tol: float) -> None:
    """Independent validity check: every district connected and balanced.

    Raises ``ValueError`` on the first violation.  Deliberately ignores how
    the plan was built.
    """
    k = plan.districts
    total = g.total_weight
    assignment = plan.assignment
    if assignment.shape != (g.num_nodes,):
        raise ValueError("assignment length does not match the graph")
    if assignment.min() < 0 or assignment.max() >= k:
        raise ValueError("assignment contains out-of-range district ids")
    for d in range(k):
        nodes = plan.district_nodes(d)
        if not nodes:
            raise ValueError(f"district {d} is empty")
        if not is_connected(g, nodes):
            raise ValueError(f"district {d} is disconnected")
        pop = int(g.node_weights[list(nodes)].sum())
        if not _pop_in_tolerance(pop, total, k, pop_tol):
            raise ValueError(
                f"district {d} has population {pop}, outside tolerance "
                f"{pop_tol} of {total}/{k}"
            )


def _connected_subsets_by_anchor(
    g: WeightedGraph, max_pop: int
) -> dict[int, list[tuple[int, int]]]:
    """All connected node subsets with population <= max_pop, as bitmasks.

    Grouped by lowest member node; each entry is (mask, population).
    """
    weights = g.node_weights
    seen: set[int] = set()
    queue: list[tuple[int, int]] = []
    for u in range(g.num_nodes):
        if weights[u] <= max_pop:
            mask = 1 << u
            seen.add(mask)
            queue.append((mask, int(weights[u])))
    for mask, pop in queue:
        for u in range(g.num_nodes):
            if not mask >> u & 1:
                continue
            for v in g.adjacency[u]:
                bit = 1 << v
                if mask & bit:
                    continue
                new_pop = pop + int(weights[v])
                if new_pop > max_pop:
                    continue
                new_mask = mask | bit
                if new_mask not in seen:
                    seen.add(new_mask)
                    queue.append((new_mask, new_pop))
    grouped: dict[int, list[tuple[int, int]]] = {}
    for mask, pop in queue:
        anchor = (mask & -mask).bit_length() - 1
        grouped.setdefault(anchor, []).append((mask, pop))
    for lst in grouped.values():
        lst.sort()
    return grouped


def enumerate_balanced_partitions(
    g: WeightedGraph, k: int, pop_tol: float
) -> list[Plan]:
    """Every partition of the graph into k connected, balanced districts.

    Exhaustive and unlabeled: each plan appears once, with districts numbered
    by their lowest node.  Refuses graphs beyond
    ``ENUMERATION_NODE_LIMIT`` nodes, where the search space explodes.
    """
    if g.num_nodes > ENUMERATION_NODE_LIMIT:
        raise ValueError(
            f"enumeration capped at {ENUMERATION_NODE_LIMIT} nodes, "
            f"graph has {g.num_nodes}"
        )
    if k < 2:
        raise ValueError(f"district count must be >= 2, got {k}")
    total = g.total_weight
    max_pop = math.floor((1.0 + pop_tol) * total / k)
    by_anchor = _connected_subsets_by_anchor(g, max_pop)
    balanced: dict[int, list[tuple[int, int]]] = {
        a: [(m, p) for m, p in lst if _pop_in_tolerance(p, total, k, pop_tol)]
        for a, lst in by_anchor.items()
    }
    full_mask = (1 << g.num_nodes) - 1
    plans: list[Plan] = []
    chosen: list[int] = []

    def rec(remaining: int, depth: int) -> None:
        if depth == k - 1:
            pop = int(g.node_weights[_mask_nodes(remaining)].sum())
            if _pop_in_tolerance(pop, total, k, pop_tol) and is_connected(
                g, _mask_nodes(remaining)
            ):
                assignment = np.full(g.num_nodes, k - 1, dtype=np.int64)
                for d, mask in enumerate(chosen):
                    assignment[_mask_nodes(mask)] = d
                plans.append(Plan(districts=k, assignment=assignment))
            return
        anchor = (remaining & -remaining).bit_length() - 1
        for mask, _pop in balanced.get(anchor, ()):
            if mask & ~remaining:
                continue
            chosen.append(mask)
            rec(remaining ^ mask, depth + 1)
            chosen.pop()

    rec(full_mask, 0)
    return plans


def _mask_nodes(mask: int) -> list[int]:
    out = []
    u = 0
    while mask:
        if mask & 1:
            out.append(u)
        mask >>= 1
        u += 1
    return out


@dataclass(frozen=True)
class DistrictIndexStats:
    """Repetition of the districts drawn at one position in the sequence."""

    index: int
    distinct: int
    average_multiplicity: float
    max_multiplicity: int


@dataclass(frozen=True)
class RepetitionReport:
    """How much of a plan sample is made of repeated districts."""

    total_districts: int
    distinct_districts: int
    average_multiplicity: float
    max_multiplicity: int
    slot_average_multiplicity: float
    multiplicity_histogram: dict[int, int]
    per_index: tuple[DistrictIndexStats, ...]
    shared_counts: tuple[int, ...] | None

    @property
    def initial_average_multiplicity(self) -> float:
        """Average repetition of the first-marked districts."""
        return self.per_index[0].average_multiplicity


def repetition_report(
    plans: list[Plan], diagram: DescendancyDiagram | None = None
) -> RepetitionReport:
    """Fingerprint every district of every plan and tally repetitions.

    ``average_multiplicity`` counts total district slots per distinct
    district; ``slot_average_multiplicity`` averages, over slots, how often
    that slot's district recurs (dominated by heavy repeats).  When the
    sample's diagram is supplied, the shared-block counts G(D, j) for
    j = 1..k-1 come along for the ride.
    """
    if not plans:
        raise ValueError("empty plan sample")
    k = plans[0].districts
    overall: Counter = Counter()
    by_index: list[Counter] = [Counter() for _ in range(k)]
    for plan in plans:
        for d, key in enumerate(plan.fingerprints()):
            overall[key] += 1
            by_index[d][key] += 1
    total = sum(overall.values())
    distinct = len(overall)
    mults = np.array(sorted(overall.values()))
    histogram = dict(sorted(Counter(overall.values()).items()))
    per_index = tuple(
        DistrictIndexStats(
            index=d,
            distinct=len(c),
            average_multiplicity=len(plans) / len(c),
            max_multiplicity=max(c.values()),
        )
        for d, c in enumerate(by_index)
    )
    shared = None
    if diagram is not None:
        _, deco = decorate(diagram)
        shared = tuple(
            int(deco.level(diagram.districts - j).max())
            for j in range(1, diagram.districts)
        )
    return RepetitionReport(
        total_districts=total,
        distinct_districts=distinct,
        average_multiplicity=total / distinct,
        max_multiplicity=int(mults[-1]),
        slot_average_multiplicity=float((mults**2).sum() / total),
        multiplicity_histogram=histogram,
        per_index=per_index,
        shared_counts=shared,
    )


def _smc_rng(seed: int, generation: int, particle: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence((seed, _STREAM_SMC, generation, particle)))
    )


@dataclass(frozen=True)
class MiniSmcResult:
    """One sequential run: sample, realized ancestry, weights, repetition."""

    plans: tuple[Plan, ...]
    diagram: DescendancyDiagram
    log_weights: np.ndarray  # (k-2, S): selection weights before each resampling
    resampling_probs: np.ndarray  # (k-2, S)
    report: RepetitionReport
    parent_redraws: np.ndarray  # (k-2,): bottleneck-induced parent re-draws


def run_mini_smc(
    g: WeightedGraph,
    k: int,
    S: int,
    rho: float,
    pop_tol: float,
    seed: int,
    attempts: int = 1000,
    particle_retries: int = 200,
    workers: int = 1,
) -> MiniSmcResult:
    """Sequentially partition with S coupled builds and weighted resampling.

    Generation 1 draws each particle's first district independently.  Every
    later generation scores the current partial plans with
    :func:`partial_plan_weight`, resamples parents in proportion, and extends
    each child by one district; a child whose parent's remainder will not
    split re-draws its parent (the repetition-boosting bottleneck dynamic).
    After the last generation the remainder becomes the final district, and
    every emitted plan is re-checked by the independent validator.

    The accepted parent choices form the returned descendancy diagram
    (level k - j holds generation j's choices).
    """
    if S < 1:
        raise ValueError(f"sample size must be >= 1, got {S}")
    if k < 2:
        raise ValueError(f"district count must be >= 2, got {k}")
    if pop_tol == 0 and g.total_weight % k != 0:
        raise ValueError(
            f"total weight {g.total_weight} not divisible by {k}: "
            "no exactly balanced plan exists"
        )

    def extend_first(j: int) -> PartialPlan:
        rng = _smc_rng(seed, 1, j)
        last_err: BottleneckError | None = None
        for _ in range(particle_retries):
            try:
                return split_district(empty_plan(g, k), pop_tol, attempts, rng)
            except BottleneckError as err:
                last_err = err
        raise RunAbortedError(1, f"generation 1 could not draw a first district: {last_err}")

    particles = _map_particles(extend_first, S, workers)

    parents = np.zeros((max(k - 2, 0), S), dtype=np.int64)
    log_weights = np.zeros((max(k - 2, 0), S))
    probs = np.zeros((max(k - 2, 0), S))
    redraws = np.zeros(max(k - 2, 0), dtype=np.int64)

    for gen in range(2, k):
        row = gen - 2
        lw = np.array([partial_plan_weight(p, rho) for p in particles])
        shifted = np.exp(lw - lw.max())
        pvec = shifted / shifted.sum()
        cum = np.cumsum(pvec)
        cum[-1] = 1.0
        log_weights[row] = lw
        probs[row] = pvec

        def extend_child(j: int, _cum=cum, _particles=particles, _gen=gen):
            rng = _smc_rng(seed, _gen, j)
            for attempt in range(particle_retries):
                parent = int(np.searchsorted(_cum, rng.random(), side="right"))
                try:
                    child = split_district(_particles[parent], pop_tol, attempts, rng)
                    return parent, child, attempt
                except BottleneckError:
                    continue
            return None

        results = _map_particles(extend_child, S, workers)
        if any(r is None for r in results):
            failed = sum(r is None for r in results)
            raise RunAbortedError(
                gen,
                f"generation {gen}: {failed}/{S} particles exhausted "
                f"{particle_retries} parent draws without a feasible split",
            )
        level = k - gen
        parents[level - 1] = [r[0] for r in results]
        redraws[row] = sum(r[2] for r in results)
        particles = [r[1] for r in results]

    plans = tuple(p.finalize() for p in particles)
    for plan in plans:
        validate_plan(g, plan, pop_tol)
    diagram = DescendancyDiagram(width=S, districts=k, parents=parents)
    report = repetition_report(list(plans), diagram)
    return MiniSmcResult(
        plans=plans,
        diagram=diagram,
        log_weights=log_weights,
        resampling_probs=probs,
        report=report,
        parent_redraws=redraws,
    )


def _map_particles(fn, S: int, workers: int) -> list:
    out = [None] * S
    if workers <= 1:
        for j in range(S):
            out[j] = fn(j)
        return out
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for j, res in enumerate(pool.map(fn, range(S))):
            out[j] = res
    return out
