"""Sample-budget sweep on the matching-orientation tree family.

The alternative pairs coordinates with small positive or negative
correlation, so every marginal is uniform.  A tester that is told the tree
reads the pair configurations directly.  The alternative is caught at every
budget; the null needs a budget near the design size before its false
rejections settle down.  Budgets too small for the balance precondition
(about m=100 here) are refused, and show up as undefined rows.
"""
from bntest.bn_testers import identity_sample_size_bn
from bntest.harness import ExperimentConfig, sweep_table


def main(n=16, eps=0.3, T=100):
    common = dict(tester="bn_identity_known", family="tree_matching", eps=eps, T=T,
                  sweep={"m": [100, 300, 1000, 4000, 12000]})
    null = ExperimentConfig(**common, seed=0, family_params={"n": n, "structured": True, "null": True})
    alt = ExperimentConfig(**common, seed=1, family_params={"n": n, "structured": True})
    print(f"n={n}, eps={eps}, T={T}, design size m={identity_sample_size_bn(n, 1, eps)}")
    print(f"{'m':>6} {'null accept':>12} {'alt reject':>11}")
    for row in sweep_table(null, alt):
        print(f"{row['m']:>6} {row['null_accept']:>12.2f} {row['alt_reject']:>11.2f}")


if __name__ == "__main__":
    main()
