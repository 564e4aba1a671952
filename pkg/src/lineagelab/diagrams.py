"""Descendancy diagrams: sampling, decoration, and repetition statistics.

A descendancy diagram records which parent each member of a resampled
population chose, level by level.  Width S is the population size; for k
districts there are k-1 levels, numbered 1 (bottom, the complete plans) to
k-1 (top, the first-marked districts).  Nodes at levels 1..k-2 each store a
parent index into the level above.

A node is *active* when it has at least one bottom-level descendant, and the
decoration d(i, j) counts bottom-level descendants of node j at level i.
Everything here is derived from those counts: surviving ancestors A(D),
the lowest level holding a dominant ancestor, and the shared-district count
G(D, j).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exact import as_probability_vector

__all__ = [
    "WeightSchedule",
    "DescendancyDiagram",
    "ActiveProfile",
    "DescendantDecoration",
    "sample_diagram",
    "decorate",
    "surviving_ancestors",
    "mega_ancestor_level",
    "dominance_threshold",
    "common_district_count",
    "chain_diagram",
    "identity_diagram",
    "active_count_trajectories",
    "estimate_expected_ancestors",
    "square_diagram_experiment",
    "FTableRow",
    "f_table",
]

# stream tags keeping per-trial RNG streams from distinct experiments disjoint
_STREAM_TRAJECTORY = 1
_STREAM_COLLAPSE = 2


def trial_rng(seed: int, tag: int, trial: int) -> np.random.Generator:
    """Independent, reproducible per-trial stream (counter-based seeding)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, tag, trial))))


@dataclass(frozen=True)
class WeightSchedule:
    """Per-level parent-selection law.

    Modes:
      * ``uniform``   -- every parent slot equally likely at every level.
      * ``spike``     -- slot 0 is ``ratio`` times likelier than each other
                         slot at every level, i.e. weights (r, 1, ..., 1).
      * ``fixed``     -- one explicit vector used at every level.
      * ``per-level`` -- explicit vector per parent level, bottom-up; the
                         first entry applies to parent level 2.
    """

    mode: str
    vectors: tuple[tuple[float, ...], ...] | None = None
    ratio: float | None = None

    @classmethod
    def uniform(cls) -> "WeightSchedule":
        return cls(mode="uniform")

    @classmethod
    def spike(cls, ratio: float) -> "WeightSchedule":
        if ratio <= 0:
            raise ValueError(f"spike ratio must be positive, got {ratio}")
        return cls(mode="spike", ratio=float(ratio))

    @classmethod
    def fixed(cls, vector) -> "WeightSchedule":
        vec = as_probability_vector(vector)
        return cls(mode="fixed", vectors=(tuple(float(x) for x in vec),))

    @classmethod
    def per_level(cls, vectors) -> "WeightSchedule":
        vecs = tuple(tuple(float(x) for x in as_probability_vector(v)) for v in vectors)
        if not vecs:
            raise ValueError("per-level schedule needs at least one vector")
        return cls(mode="per-level", vectors=vecs)

    def probabilities(self, parent_level: int, S: int) -> np.ndarray | None:
        """Selection law for the given parent level, or None for uniform."""
        if parent_level < 2:
            raise ValueError(f"parent levels start at 2, got {parent_level}")
        if self.mode == "uniform":
            return None
        if self.mode == "spike":
            vec = np.ones(S)
            vec[0] = self.ratio
            return vec / vec.sum()
        if self.mode == "fixed":
            vec = np.asarray(self.vectors[0])
            if vec.size != S:
                raise ValueError(f"schedule vector has size {vec.size}, expected {S}")
            return vec
        if self.mode == "per-level":
            idx = parent_level - 2
            if idx >= len(self.vectors):
                raise ValueError(
                    f"schedule supplies {len(self.vectors)} level vectors, "
                    f"none for parent level {parent_level}"
                )
            vec = np.asarray(self.vectors[idx])
            if vec.size != S:
                raise ValueError(f"schedule vector has size {vec.size}, expected {S}")
            return vec
        raise ValueError(f"unknown schedule mode {self.mode!r}")

    def label(self) -> str:
        if self.mode == "spike":
            return f"spike({self.ratio:g})"
        return self.mode


@dataclass(frozen=True)
class DescendancyDiagram:
    """Parent-choice record of width S over k-1 levels.

    ``parents[i-1][j]`` is the parent (a node index at level i+1) of node j
    at level i, for i = 1..k-2.
    """

    width: int
    districts: int
    parents: np.ndarray

    def __post_init__(self) -> None:
        S, k = self.width, self.districts
        if S < 1:
            raise ValueError(f"width must be >= 1, got {S}")
        if k < 2:
            raise ValueError(f"district count must be >= 2, got {k}")
        arr = np.asarray(self.parents, dtype=np.int64)
        if arr.shape != (k - 2, S):
            raise ValueError(f"parents must have shape {(k - 2, S)}, got {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() >= S):
            raise ValueError("parent indices must lie in [0, width)")
        object.__setattr__(self, "parents", arr)

    @property
    def levels(self) -> int:
        return self.districts - 1


@dataclass(frozen=True)
class ActiveProfile:
    """Active-node counts X_1..X_{k-1} and per-level membership masks."""

    counts: np.ndarray
    active: np.ndarray  # bool, shape (k-1, S)


@dataclass(frozen=True)
class DescendantDecoration:
    """Bottom-level descendant counts d(i, j), shape (k-1, S)."""

    counts: np.ndarray

    def level(self, i: int) -> np.ndarray:
        return self.counts[i - 1]


def sample_diagram(S: int, k: int, w: WeightSchedule, seed) -> DescendancyDiagram:
    """Sample a diagram; every node picks its parent i.i.d. from w's law.

    ``seed`` may be an integer or an existing ``numpy.random.Generator``;
    a given integer seed always yields byte-identical parent arrays.
    """
    if S < 1:
        raise ValueError(f"width must be >= 1, got {S}")
    if k < 3:
        raise ValueError(f"sampling needs k >= 3, got {k}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    parents = np.empty((k - 2, S), dtype=np.int64)
    for i in range(1, k - 1):
        p = w.probabilities(i + 1, S)
        if p is None:
            parents[i - 1] = rng.integers(0, S, size=S)
        else:
            parents[i - 1] = rng.choice(S, size=S, p=p)
    return DescendancyDiagram(width=S, districts=k, parents=parents)


def decorate(diagram: DescendancyDiagram) -> tuple[ActiveProfile, DescendantDecoration]:
    """Propagate bottom-level descendant counts up the diagram.

    d(1, j) = 1 for every bottom node; d(i+1, p) sums the counts of the
    level-i nodes whose parent is p.  A node is active iff its count is
    positive, so the two returned views are consistent by construction.
    """
    S, k = diagram.width, diagram.districts
    d = np.zeros((k - 1, S), dtype=np.int64)
    d[0] = 1
    for i in range(k - 2):
        d[i + 1] = np.bincount(
            diagram.parents[i], weights=d[i], minlength=S
        ).astype(np.int64)
    active = d > 0
    profile = ActiveProfile(counts=active.sum(axis=1), active=active)
    return profile, DescendantDecoration(counts=d)


def surviving_ancestors(diagram: DescendancyDiagram) -> int:
    """Number of top-level nodes with at least one bottom-level descendant."""
    active = np.arange(diagram.width, dtype=np.int64)
    for row in diagram.parents:
        active = np.unique(row[active])
    return int(active.size)


def dominance_threshold(phi: float, S: int) -> int:
    """Minimum descendant count for a node to account for a phi share.

    A node qualifies when d >= ceil(phi*S): for fractional phi*S this equals
    the strict comparison d > phi*S, while for integer phi*S a node holding
    exactly a phi share qualifies.  The integer-case choice is what makes
    phi = 1 meaningful (full collapse onto one ancestor), matching how the
    collapse-level tables are tallied.
    """
    if not 0.0 < phi <= 1.0:
        raise ValueError(f"share must lie in (0, 1], got {phi}")
    return max(1, math.ceil(phi * S - 1e-9))


def mega_ancestor_level(diagram: DescendancyDiagram, phi: float) -> int | None:
    """Lowest level holding a node that accounts for a phi share of the bottom.

    Returns None when no level of this diagram holds such a node.  When
    phi*S <= 1 every bottom node qualifies and the answer is level 1.
    """
    threshold = dominance_threshold(phi, diagram.width)
    _, deco = decorate(diagram)
    for i in range(1, diagram.levels + 1):
        if deco.level(i).max() >= threshold:
            return i
    return None


def common_district_count(diagram: DescendancyDiagram, j: int) -> int:
    """Largest number of final plans sharing j marked districts, G(D, j).

    A node at level k-j stands for a block of j marked districts, and its
    descendant count is the number of final plans carrying that block.
    """
    k = diagram.districts
    if not 1 <= j <= k - 1:
        raise ValueError(f"district count j must satisfy 1 <= j <= {k - 1}, got {j}")
    _, deco = decorate(diagram)
    return int(deco.level(k - j).max())


def chain_diagram(S: int, k: int) -> DescendancyDiagram:
    """Every node picks parent 0: total collapse one level up."""
    return DescendancyDiagram(S, k, np.zeros((k - 2, S), dtype=np.int64))


def identity_diagram(S: int, k: int) -> DescendancyDiagram:
    """Node j always picks parent j: no collapse at all."""
    parents = np.tile(np.arange(S, dtype=np.int64), (k - 2, 1))
    return DescendancyDiagram(S, k, parents)


def _map_trials(fn, trials: int, workers: int) -> list:
    """Run fn(trial) for trial in range(trials), results in trial order.

    Each trial derives its own RNG stream, so the schedule of execution
    (serial or thread pool) cannot change any result.
    """
    out: list = [None] * trials
    if workers <= 1:
        for t in range(trials):
            out[t] = fn(t)
        return out
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for t, res in enumerate(pool.map(fn, range(trials))):
            out[t] = res
    return out


def active_count_trajectories(
    S: int,
    k: int,
    w: WeightSchedule,
    trials: int,
    seed: int,
    workers: int = 1,
) -> np.ndarray:
    """Active-lineage counts X_1..X_{k-1} for each of ``trials`` diagrams.

    Only active lineages are followed, which leaves the law of the counts
    unchanged (inactive nodes' choices never influence descendant counts)
    while making wide-and-deep runs affordable.  Row t of the result is the
    trajectory of trial t; column i-1 holds X_i.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if k < 2:
        raise ValueError(f"district count must be >= 2, got k={k}")
    levels = k - 1
    vectors = [w.probabilities(level, S) for level in range(2, k)]

    def one(trial: int) -> np.ndarray:
        rng = trial_rng(seed, _STREAM_TRAJECTORY, trial)
        traj = np.empty(levels, dtype=np.int64)
        t = S
        traj[0] = t
        for step in range(levels - 1):
            p = vectors[step]
            if p is None:
                chosen = rng.integers(0, S, size=t)
            else:
                chosen = rng.choice(S, size=t, p=p)
            t = np.unique(chosen).size
            traj[step + 1] = t
        return traj

    return np.vstack(_map_trials(one, trials, workers))


def estimate_expected_ancestors(
    S: int,
    k: int,
    w: WeightSchedule,
    trials: int,
    seed: int,
    workers: int = 1,
) -> tuple[float, float]:
    """Monte Carlo mean and standard error of the surviving-ancestor count."""
    traj = active_count_trajectories(S, k, w, trials, seed, workers)
    tops = traj[:, -1].astype(float)
    mean = float(tops.mean())
    stderr = float(tops.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return mean, stderr


def square_diagram_experiment(
    S_values,
    trials: int,
    seed: int,
    workers: int = 1,
) -> list[tuple[int, float, float]]:
    """Estimate the surviving-ancestor count of width-S, S-district diagrams.

    Returns (S, mean, stderr) per requested S; the means settle just above 2
    as S grows.
    """
    out = []
    for S in S_values:
        mean, stderr = estimate_expected_ancestors(
            int(S), int(S), WeightSchedule.uniform(), trials, seed, workers
        )
        out.append((int(S), mean, stderr))
    return out


@dataclass(frozen=True)
class FTableRow:
    """Aggregate first-dominance level for one (S, phi) cell."""

    S: int
    phi: float
    mean_level: float | None
    occurrence_rate: float
    trials: int


def _collapse_levels(
    S: int,
    thresholds: np.ndarray,
    w: WeightSchedule,
    seed: int,
    trial: int,
    max_levels: int,
) -> np.ndarray:
    """First level at which the max descendant count reaches each threshold.

    Streams one open-ended diagram bottom-up, tracking descendant mass per
    parent slot; stops once every threshold is crossed (at the latest, at
    full collapse) or at the level cap.  Uncrossed thresholds report 0.
    """
    rng = trial_rng(seed, _STREAM_COLLAPSE, trial)
    thresholds = np.asarray(thresholds, dtype=np.int64)
    first = np.zeros(thresholds.size, dtype=np.int64)
    d = np.ones(S, dtype=np.int64)
    level = 1
    max_d = 1
    first[thresholds <= max_d] = level
    while (first == 0).any() and level < max_levels:
        level += 1
        p = w.probabilities(level, S)
        if p is None:
            chosen = rng.integers(0, S, size=d.size)
        else:
            chosen = rng.choice(S, size=d.size, p=p)
        mass = np.bincount(chosen, weights=d, minlength=S)
        d = mass[mass > 0].astype(np.int64)
        max_d = int(d.max())
        first[(first == 0) & (thresholds <= max_d)] = level
    return first


def f_table(
    S_values,
    phi_values,
    w: WeightSchedule,
    trials: int,
    seed: int,
    max_levels: int | None = None,
    workers: int = 1,
) -> list[FTableRow]:
    """Mean first-dominance levels over open-ended diagrams.

    For each width S, diagrams are extended level by level until a single
    ancestor holds the whole bottom generation (or ``max_levels``, default
    100*S + 1000, is hit).  Each (S, phi) cell reports the mean level at
    which some node first accounted for a phi share, over the trials where
    that ever happened, plus the fraction of trials where it did.
    """
    phi_values = [float(p) for p in phi_values]
    rows: list[FTableRow] = []
    for S in S_values:
        S = int(S)
        cap = max_levels if max_levels is not None else 100 * S + 1000
        thresholds = np.array([dominance_threshold(p, S) for p in phi_values])

        def one(trial: int) -> np.ndarray:
            return _collapse_levels(S, thresholds, w, seed, trial, cap)

        firsts = np.vstack(_map_trials(one, trials, workers))
        for col, phi in enumerate(phi_values):
            hits = firsts[:, col]
            found = hits > 0
            rate = float(found.mean())
            mean_level = float(hits[found].mean()) if found.any() else None
            rows.append(
                FTableRow(S=S, phi=phi, mean_level=mean_level, occurrence_rate=rate, trials=trials)
            )
    return rows
