"""How many first-drawn districts survive to the final sample, exactly.

Each of S lineages picks a parent uniformly at random, level after level.
The number of distinct parents follows an occupancy law, and iterating that
law gives the exact expected count of surviving top-level ancestors.
"""

from fractions import Fraction

from lineagelab import (
    expected_ancestors_exact,
    expected_ancestors_float,
    one_step_expectation,
    transition_matrix,
)


def main():
    # One resampling step: 3 lineages over 3 slots activate 19/9 parents on
    # average, and the full one-step law is a tiny lower-triangular matrix.
    print("one-step expectation, 3 of 3 active:", one_step_expectation(3, 3))
    M = transition_matrix(3)
    print("transition matrix rows (from 1, 2, 3 active):")
    for row in M.entries:
        print("   ", [str(x) for x in row])

    # Deeper pipelines collapse further: A(S, k) is exact and rational
    # (the exact numerators grow huge fast, so print those only while small).
    print("\nexpected surviving ancestors A(S, k):")
    for S, k in [(3, 3), (3, 5), (5, 10), (10, 10), (50, 20)]:
        val = expected_ancestors_exact(S, k)
        shown = str(val) if len(str(val)) <= 40 else "(long rational)"
        print(f"    S={S:3d} k={k:3d}: {float(val):9.6f}  {shown}")

    # For a 100-particle, 6-district run the prediction is ~3.2 repetitions
    # of each surviving first district.
    S, k = 100, 6
    A = expected_ancestors_float(S, k)
    print(f"\nS={S}, k={k}: A={A:.3f}, predicted first-district repetition "
          f"S/A = {S / A:.2f}")

    # The k = 2S rule of thumb: by that depth a single ancestor remains.
    for S in (5, 10):
        val = expected_ancestors_exact(S, 2 * S)
        print(f"    A({S}, {2 * S}) = {float(val):.4f}  (collapse nearly total)")


if __name__ == "__main__":
    main()
