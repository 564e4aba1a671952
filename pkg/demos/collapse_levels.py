"""How soon does one ancestor dominate a given share of the final sample?

For each width S, diagrams are extended level by level until a single
lineage holds everything.  The table reports the mean first level at which
some node accounts for a phi share of the final generation; low numbers at
high shares are the signature of extreme redundancy.  A single spiked slot
(100x likelier parent) collapses dramatically faster than uniform choice.
"""

from lineagelab.diagrams import WeightSchedule, f_table


def show_block(title, schedule, trials, seed):
    phis = [0.25, 0.5, 0.75, 1.0]
    rows = f_table([10, 100, 1000], phis, schedule, trials, seed, workers=4)
    print(f"\n{title} (mean first level, {trials} trials)")
    print("  phi:  " + "".join(f"{phi:>10.2f}" for phi in phis))
    for S in (10, 100, 1000):
        cells = [r for r in rows if r.S == S]
        print(f"  S={S:<5d}" + "".join(f"{r.mean_level:10.1f}" for r in cells))


def main():
    show_block("uniform parent choice", WeightSchedule.uniform(), 400, 1)
    show_block("100:1:...:1 parent choice", WeightSchedule.spike(100), 400, 2)


if __name__ == "__main__":
    main()
