"""Sampling descendancy diagrams and reading repetition off the decoration.

A diagram records which parent every population member chose at every
level.  Decorating each node with its count of final-generation
descendants exposes the collapse: big numbers low in the diagram mean many
final plans share a large block of early choices.
"""

import numpy as np

from lineagelab import (
    DescendancyDiagram,
    WeightSchedule,
    common_district_count,
    decorate,
    estimate_expected_ancestors,
    expected_ancestors_exact,
    sample_diagram,
    surviving_ancestors,
)
from lineagelab.diagrams import mega_ancestor_level, square_diagram_experiment


def main():
    rng_seed = 11
    d = sample_diagram(12, 11, WeightSchedule.uniform(), rng_seed)
    profile, deco = decorate(d)
    print("active lineages per level (bottom to top):", profile.counts.tolist())
    print("surviving ancestors A(D):", surviving_ancestors(d))
    print("descendant counts of the top level:", sorted(deco.level(10), reverse=True))

    print("\nmost final plans sharing j drawn districts:")
    for j in (1, 3, 5, 7):
        print(f"    j={j}: G(D, j) = {common_district_count(d, j)}")
    print("lowest level with a half-share ancestor:",
          mega_ancestor_level(d, 0.5))

    # Monte Carlo agrees with the exact chain
    mean, stderr = estimate_expected_ancestors(
        20, 10, WeightSchedule.uniform(), trials=50_000, seed=rng_seed
    )
    exact = float(expected_ancestors_exact(20, 10))
    print(f"\nA(20,10): exact {exact:.4f}, Monte Carlo {mean:.4f} +- {stderr:.4f}")

    # skewed parent selection accelerates collapse
    spike, _ = estimate_expected_ancestors(
        20, 10, WeightSchedule.spike(100), trials=50_000, seed=rng_seed
    )
    print(f"A(20,10) under 100:1:...:1 weights: {spike:.4f} (uniform minimizes collapse)")

    # square diagrams settle just above two survivors
    print("\nsquare diagrams, k = S:")
    for S, mean, stderr in square_diagram_experiment([10, 20, 40, 80], 20_000, 7):
        print(f"    S={S:3d}: A approx {mean:.3f} +- {stderr:.3f}")


if __name__ == "__main__":
    main()
