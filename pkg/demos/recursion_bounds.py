"""Two cheap recursions that bracket the active-lineage fraction.

a_{i+1} = 1 - (1 - 1/S)^(a_i S) tracks the expected active fraction for a
given width S; b_{i+1} = 1 - e^(-b_i) is its width-free limit.  Together
they sandwich the exact expectation: b_{k-2} S <= A(S, k) <= a_{k-2} S.
"""

from lineagelab import a_limit_iterations, a_sequence, b_sequence, expected_ancestors_exact


def main():
    n = 10
    print("active-fraction recursions, indices 0..10:")
    header = "  i  " + "".join(f"{i:>9d}" for i in range(n + 1))
    print(header)
    for S in (10, 100, 1000, 5000):
        vals = a_sequence(S, n).values
        print(f"a S={S:<5d}" + "".join(f"{v:9.4f}" for v in vals))
    print("b      " + "".join(f"{v:9.4f}" for v in b_sequence(n).values))

    print("\nsandwich around the exact value (S=20):")
    S = 20
    a = a_sequence(S, 40).values
    b = b_sequence(40).values
    for k in (3, 5, 10, 20, 40):
        A = float(expected_ancestors_exact(S, k))
        print(f"    k={k:3d}:  {b[k - 2] * S:8.4f} <= {A:8.4f} <= {a[k - 2] * S:8.4f}")

    print("\nsteps until the recursion is within 1e-6 of its 1/S limit:")
    for S in (2, 10, 100):
        print(f"    S={S:4d}: {a_limit_iterations(S, 1e-6)} steps")


if __name__ == "__main__":
    main()
