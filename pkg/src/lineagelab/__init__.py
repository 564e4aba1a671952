"""Ancestor collapse and district repetition diagnostics for sequential
resampling samplers.

Submodules:
  exact      -- exact one-step law, transition matrix, surviving-ancestor
                expectations, and the recursive bounding sequences.
  diagrams   -- descendancy-diagram sampling, decorations, dominance levels,
                shared-district counts, Monte Carlo experiments.
  graphs     -- weighted graphs, uniform spanning trees, tree counts.
  partition  -- spanning-tree district splitting, plan weights, the mini
                sequential sampler, exhaustive enumeration, repetition reports.
  crs        -- controlled-repetition sampling and the scaled-error harness.
  cli        -- experiment runner emitting CSV artifacts.
"""

from .exact import (
    BoundSequence,
    TransitionMatrix,
    a_limit_iterations,
    a_sequence,
    b_sequence,
    expected_ancestors_exact,
    expected_ancestors_float,
    nonuniform_one_step_expectation,
    one_step_expectation,
    one_step_pmf,
    transition_matrix,
)
from .diagrams import (
    DescendancyDiagram,
    WeightSchedule,
    common_district_count,
    decorate,
    estimate_expected_ancestors,
    f_table,
    mega_ancestor_level,
    sample_diagram,
    square_diagram_experiment,
    surviving_ancestors,
)
from .graphs import (
    WeightedGraph,
    grid_graph,
    log_spanning_tree_count,
    random_spanning_tree,
    spanning_tree_count,
)
from .partition import (
    BottleneckError,
    PartialPlan,
    Plan,
    RepetitionReport,
    RunAbortedError,
    empty_plan,
    enumerate_balanced_partitions,
    partial_plan_weight,
    repetition_report,
    run_mini_smc,
    split_district,
    validate_plan,
)
from .crs import (
    CLTResult,
    EnumeratedTarget,
    WeightedSample,
    clt_experiment,
    crs_sample,
    iid_ingredient,
    minismc_ingredient,
    snis_ingredient,
)

__version__ = "0.1.0"
