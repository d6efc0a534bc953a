"""Identity and closeness testing for product distributions.

Runs the chi-square identity tester against the uniform product, then the
two-sample closeness tester on the heavy/light hard pair, and prints the
empirical acceptance rates with Wilson intervals.
"""
from bntest.harness import ExperimentConfig, run_trials


def show(label, report, expect):
    lo, hi = report.correct_interval(expect)
    print(f"{label:<38} accept {report.accept:>3}/{report.T}  "
          f"correct in [{lo:.3f}, {hi:.3f}]  mean samples {report.mean_samples:,.0f}")


def main():
    n, eps, T = 50, 0.25, 200
    print(f"identity, n={n}, eps={eps}")
    show("  uniform P", run_trials(ExperimentConfig("product_identity", "product_uniform", eps, T,
                                                    0, family_params={"n": n})), "accept")
    show("  P with means 1/2 +- eps/sqrt(n)",
         run_trials(ExperimentConfig("product_identity", "product_uniformity_no", eps, T, 1,
                                     family_params={"n": n})), "reject")

    n, eps = 20, 0.3
    print(f"\ncloseness, n={n}, eps={eps} (calibrated constant)")
    show("  identical pair", run_trials(ExperimentConfig("product_closeness", "closeness_pair", eps, T,
                                                         0, family_params={"n": n, "far": False})),
         "accept")
    show("  pair differing on light coordinates",
         run_trials(ExperimentConfig("product_closeness", "closeness_pair", eps, T, 1,
                                     family_params={"n": n, "far": True})), "reject")


if __name__ == "__main__":
    main()
