"""Pick the closeness constant C empirically.

The analysis leaves C unspecified.  This walks a grid of constants and keeps
the first one whose Wilson lower bounds clear 2/3 on both the null and the
far pair, at every dimension tried.  Expect a few minutes on one core.
"""
import sys

from bntest.harness import calibrate_closeness_constant


def main(T=200):
    C, history = calibrate_closeness_constant(T=T)
    print(f"{'C':>9} {'n':>4} {'null lo':>8} {'alt lo':>8}")
    for p in history:
        print(f"{p.constant:>9g} {p.n:>4} {p.null_lo:>8.3f} {p.alt_lo:>8.3f}{'  ok' if p.ok else ''}")
    print(f"\nchosen C = {C}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 200)
