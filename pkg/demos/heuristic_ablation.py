"""Small benchmark sweep: does the type penalty help on mixed-type tasks?

Runs a reduced suite (one size, two overlaps, the two-type and three-type
mixes) with the penalty term switched on and off, then prints per-cell
success rates.  The full-size sweep lives behind ``modlattice bench``.
"""
from modlattice.benchmark import SuiteSpec, run_suite


def main():
    spec = SuiteSpec(
        sizes=(20,),
        overlaps=(0.5, 0.2),
        ratios=("typeB", "typeC"),
        trials=10,
        timeout_s=10.0,
        penalties=(True, False),
    )
    print("running", len(spec.overlaps) * len(spec.ratios) * 2 * spec.trials,
          "trials (one size, hungarian heuristic) ...")
    _, agg = run_suite(spec, workers=2)
    print(f"{'overlap':>8} {'ratio':>7} {'penalty':>8} {'success':>8} {'mean cost':>10}")
    for cell in agg["cells"]:
        cost = cell["mean_exec_cost"]
        print(f"{cell['overlap']:>8} {cell['ratio']:>7} "
              f"{str(cell['penalty']):>8} {cell['success_rate']:>8.2f} "
              f"{cost if cost is None else round(cost, 1):>10}")


if __name__ == "__main__":
    main()
