"""Orbit of a two-generator Schottky group against the parabolic example.

Run: python3 demos/schottky_orbit.py
"""

from limitset import kleinian


def main():
    G = kleinian.schottky_group(4.0)
    for L in (8, 10):
        O = kleinian.enumerate_orbit(G, L)
        r = kleinian.kleinian_checks(O, G, box=False)
        print(f"schottky L={L}: points={O.count} delta_hat={r['exponent']['delta_hat']:.4f} "
              f"shell rate={r['shell_growth']['rate']:.4f} beta_fit={r['approximation']['beta_fit']:.3f}")

    # horocyclic orbit: gaps ~ 2/k^2 but distance to the fixed point ~ 2/k
    P = kleinian.parabolic_group()
    r = kleinian.kleinian_checks(kleinian.parabolic_orbit(2000), P)
    print(f"parabolic: beta_fit={r['approximation']['beta_fit']:.4f} "
          f"well_approximated={r['approximation']['well_approximated']} ratio={r['sqrt_ratio']:.5f}")


if __name__ == "__main__":
    main()
