"""Critical exponents of the gallery sets, from dyadic bin counts.

Run: python3 demos/gallery_exponents.py
"""

from limitset.constructions.gallery import example1, example2, example4
from limitset.exponent import critical_exponent, diverging_diagnostic
from limitset.pointset import dyadic_counts


def main():
    # k equally spread points at gap 2^-k: linear bin growth, exponent 0
    for K in (20, 30, 40):
        est = critical_exponent(dyadic_counts(example1(K=K)))
        print(f"example1 K={K}: delta_hat={est.delta_hat:.4f}")

    # separated set with a single-point limit set, exponent near 1
    est = critical_exponent(dyadic_counts(example4(K=60)))
    print(f"example4 K=60: delta_hat={est.delta_hat:.4f} (stderr {est.slope_stderr:.3g})")

    # super-exponential bins: log2 N_k / k keeps growing
    diag = diverging_diagnostic(dyadic_counts(example2(K=4)), n=2)
    print("example2 log2 N_k / k:", [round(r, 3) for r in diag["ratios"]], "diverging:", diag["diverging"])


if __name__ == "__main__":
    main()
