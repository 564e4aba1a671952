"""Controlled-repetition sampling and an empirical scaled-error harness.

The controlled-repetition sampler builds a size-S weighted sample by drawing
one state from the target and repeating it ceil(S^alpha) times at weight 1/S
each, then filling the remaining S' slots from any consistent weighted
sampler, renormalized by S'/S.  For alpha < 1/2 the repeated block vanishes
at the sqrt(S) scale, so the scaled error sqrt(S) * (sample mean - true
mean) still settles into a fixed-variance law; past alpha = 1/2 it does not.
The harness measures exactly that on small enumerable instances, where the
target expectation is known exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .partition import Plan, run_mini_smc


def _map_replications(fn, n: int, workers: int) -> list:
    """fn(i) for i in range(n), results in index order regardless of schedule."""
    out = [None] * n
    if workers <= 1:
        for i in range(n):
            out[i] = fn(i)
        return out
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for i, res in enumerate(pool.map(fn, range(n))):
            out[i] = res
    return out

__all__ = [
    "WeightedSample",
    "EnumeratedTarget",
    "repeat_count",
    "assemble_crs",
    "crs_sample",
    "iid_ingredient",
    "snis_ingredient",
    "minismc_ingredient",
    "CLTRow",
    "CLTResult",
    "clt_experiment",
]

_STREAM_CRS = 4
_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class WeightedSample:
    """States with nonnegative weights summing to 1 (within 1e-12)."""

    states: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        states = np.asarray(self.states)
        weights = np.asarray(self.weights, dtype=float)
        if states.shape[0] != weights.shape[0]:
            raise ValueError("states and weights must have equal length")
        if (weights < 0).any():
            raise ValueError("weights must be nonnegative")
        total = math.fsum(weights)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def entries(self) -> list[tuple]:
        return [(s, float(w)) for s, w in zip(self.states, self.weights)]

    def expectation(self, h) -> float:
        """Weighted mean of h: an array indexed by state, or a callable."""
        if callable(h):
            values = np.array([h(s) for s in self.states], dtype=float)
        else:
            values = np.asarray(h, dtype=float)[self.states]
        return math.fsum(values * self.weights)


@dataclass(frozen=True)
class EnumeratedTarget:
    """Exact distribution over an enumerated finite state space.

    States are indices 0..m-1; callers keep the index-to-object mapping
    (say, a plan list from exhaustive enumeration) alongside.
    """

    probabilities: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("need a nonempty 1-d probability vector")
        if (p < 0).any() or abs(math.fsum(p) - 1.0) > _WEIGHT_TOL:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "_cumulative", np.cumsum(p))

    @classmethod
    def uniform(cls, m: int) -> "EnumeratedTarget":
        return cls(np.full(m, 1.0 / m))

    @classmethod
    def proportional(cls, weights) -> "EnumeratedTarget":
        w = np.asarray(weights, dtype=float)
        return cls(w / math.fsum(w))

    def __len__(self) -> int:
        return len(self.probabilities)

    def draw(self, rng: np.random.Generator, size: int | None = None):
        """Inverse-CDF draw(s) over the enumerated states."""
        cum = self._cumulative
        if size is None:
            return int(np.searchsorted(cum, rng.random(), side="right"))
        idx = np.searchsorted(cum, rng.random(size), side="right")
        return np.minimum(idx, len(cum) - 1).astype(np.int64)

    def expectation(self, h) -> float:
        if callable(h):
            values = np.array([h(i) for i in range(len(self))], dtype=float)
        else:
            values = np.asarray(h, dtype=float)
        return math.fsum(values * self.probabilities)


def repeat_count(S: int, alpha: float) -> int:
    """Number of repeated entries, ceil(S^alpha), with the alpha domain check."""
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"repetition exponent must lie in (0, 1/2), got {alpha}")
    return math.ceil(S**alpha)


def assemble_crs(
    base: Callable[[np.random.Generator], object],
    ingredient: Callable[[int, np.random.Generator], WeightedSample],
    S: int,
    repeats: int,
    rng: np.random.Generator,
) -> WeightedSample:
    """Assemble a size-S sample with an explicit repeated-block size.

    This is the knob the harness's negative control turns; regular use goes
    through :func:`crs_sample`, which derives ``repeats`` from alpha.
    """
    if S < 2:
        raise ValueError(f"sample size must be >= 2, got {S}")
    if not 1 <= repeats < S:
        raise ValueError(f"repeat count must lie in [1, S), got {repeats}")
    x0 = base(rng)
    rest = ingredient(S - repeats, rng)
    scale = (S - repeats) / S
    states = np.concatenate([np.full(repeats, x0, dtype=np.asarray(rest.states).dtype),
                             rest.states])
    weights = np.concatenate([np.full(repeats, 1.0 / S), rest.weights * scale])
    return WeightedSample(states=states, weights=weights)


def crs_sample(
    base: Callable[[np.random.Generator], object],
    ingredient: Callable[[int, np.random.Generator], WeightedSample],
    S: int,
    alpha: float,
    seed,
) -> WeightedSample:
    """Controlled-repetition sample: ceil(S^alpha) copies of one base draw
    at weight 1/S each, plus S' = S - ceil(S^alpha) ingredient entries with
    weights scaled by S'/S."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return assemble_crs(base, ingredient, S, repeat_count(S, alpha), rng)


def iid_ingredient(target: EnumeratedTarget):
    """Equal-weight i.i.d. draws from the exact target."""

    def sample(n: int, rng: np.random.Generator) -> WeightedSample:
        states = target.draw(rng, size=n)
        return WeightedSample(states=states, weights=np.full(n, 1.0 / n))

    return sample


def snis_ingredient(target: EnumeratedTarget, proposal: EnumeratedTarget):
    """Self-normalized importance sampling from an explicit proposal."""
    ratios = target.probabilities / proposal.probabilities

    def sample(n: int, rng: np.random.Generator) -> WeightedSample:
        states = proposal.draw(rng, size=n)
        w = ratios[states]
        return WeightedSample(states=states, weights=w / math.fsum(w))

    return sample


def minismc_ingredient(g, k: int, rho: float, pop_tol: float, plans: list[Plan]):
    """Equal-weight entries from a sequential partition run on the instance.

    ``plans`` must be the exhaustive plan list; each emitted plan is mapped
    to its index there, so the sample lives on the same enumerated states as
    the exact target.
    """
    index = {p.fingerprints(): i for i, p in enumerate(plans)}
    canonical = {frozenset(fp): i for fp, i in index.items()}

    def sample(n: int, rng: np.random.Generator) -> WeightedSample:
        run_seed = int(rng.integers(0, 2**62))
        result = run_mini_smc(g, k, n, rho, pop_tol, run_seed)
        states = np.array(
            [canonical[frozenset(p.fingerprints())] for p in result.plans],
            dtype=np.int64,
        )
        return WeightedSample(states=states, weights=np.full(n, 1.0 / n))

    return sample


@dataclass(frozen=True)
class CLTRow:
    """Scaled-error summary for one sample size."""

    S: int
    replications: int
    repeats: int
    repeat_fraction: float
    mean: float
    variance: float
    ad_statistic: float


@dataclass(frozen=True)
class CLTResult:
    rows: tuple[CLTRow, ...]
    raw: dict[int, np.ndarray]

    def row_for(self, S: int) -> CLTRow:
        for row in self.rows:
            if row.S == S:
                return row
        raise KeyError(S)


def clt_experiment(
    h,
    target: EnumeratedTarget,
    ingredient,
    S_grid,
    replications: int,
    seed: int,
    alpha: float = 1.0 / 3.0,
    repeat_exponent: float | None = None,
    workers: int = 1,
) -> CLTResult:
    """Distribution of the scaled error Y_S = sqrt(S) (E_sample[h] - E[h]).

    For each S in the grid, ``replications`` independent controlled-
    repetition samples are assembled and Y_S recorded.  Rows report the mean
    (should drift to 0), the variance (should stabilize), an Anderson-
    Darling normality statistic (reported, never asserted; replication
    counts are finite), and the repeated-block fraction.

    ``repeat_exponent`` overrides the block size to ceil(S^exponent) without
    the alpha < 1/2 domain check; setting it at or above 1/2 is the
    negative control, whose scaled error fails to settle.
    """
    if replications < 2:
        raise ValueError("need at least 2 replications")
    if repeat_exponent is not None and not 0.0 < repeat_exponent < 1.0:
        raise ValueError(f"repeat exponent must lie in (0, 1), got {repeat_exponent}")
    h_values = (
        np.array([h(i) for i in range(len(target))], dtype=float) if callable(h)
        else np.asarray(h, dtype=float)
    )
    exact = target.expectation(h_values)
    base = target.draw

    rows = []
    raw: dict[int, np.ndarray] = {}
    for si, S in enumerate(int(s) for s in S_grid):
        repeats = (
            math.ceil(S**repeat_exponent) if repeat_exponent is not None
            else repeat_count(S, alpha)
        )

        def one(rep: int, _si=si, _S=S, _repeats=repeats) -> float:
            rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence((seed, _STREAM_CRS, _si, rep)))
            )
            sample = assemble_crs(base, ingredient, _S, _repeats, rng)
            return math.sqrt(_S) * (sample.expectation(h_values) - exact)

        ys = np.array(_map_replications(one, replications, workers))
        spread = ys.std(ddof=1)
        if spread == 0.0:
            ad = 0.0  # degenerate (constant h): nothing to test
        else:
            centered = (ys - ys.mean()) / spread
            ad = float(stats.anderson(centered, dist="norm").statistic)
        rows.append(
            CLTRow(
                S=S,
                replications=replications,
                repeats=repeats,
                repeat_fraction=repeats / S,
                mean=float(ys.mean()),
                variance=float(ys.var(ddof=1)),
                ad_statistic=ad,
            )
        )
        raw[S] = ys
    return CLTResult(rows=tuple(rows), raw=raw)
