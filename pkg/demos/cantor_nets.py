"""Nets over Cantor circles: exponent, box dimension and the Moran value.

Run: python3 demos/cantor_nets.py
"""

from limitset.constructions.boundary import CantorCircle, full_circle
from limitset.constructions.nets import net_construction
from limitset.dimension import box_dimension_estimate
from limitset.exponent import critical_exponent
from limitset.pointset import dyadic_counts
from limitset.regularity import separation_profile, shell_surrogate


def main():
    K = 18
    for X in (full_circle(), CantorCircle(1 / 3), CantorCircle(1 / 4)):
        E = net_construction(X, K)
        est = critical_exponent(dyadic_counts(E))
        S = shell_surrogate(E)
        bd = box_dimension_estimate(S.points, S.box_range())
        c1 = separation_profile(E).c1_hat
        print(f"ratio={X.ratio:.4f} points={E.count:>7} delta_hat={est.delta_hat:.4f} "
              f"boxdim={bd.slope:.4f} s_sim={X.s_sim:.4f} c1_hat={c1:.3f}")


if __name__ == "__main__":
    main()
