"""
Centers accumulating on a Misiurewicz point and on two parabolic points.

At c1 the spacing is geometric with ratio 1/mu; at -3/4 (two petals) it
decays like 1/n and at -7/4 (one petal) like 1/n^2.

    python demos/cascade.py
"""
import math

from decolab import (MisiurewiczSpec, cascade, find_center_near, multiplier_at_misiurewicz,
                     solve_superattracting_center, tune_misiurewicz)

C0 = "-0.1010963638456221+0.9562865108091415i"


def show(name, rec):
    print(f"{name}: law {rec.fitted_law}, exponent {rec.exponent:.4f}")
    for s, q in rec.centers:
        print(f"    q = {q:4d}  {s}")


def main():
    s5 = solve_superattracting_center(5, "0.36+0.64i")
    c1 = tune_misiurewicz(s5, 5, MisiurewiczSpec(4, 1), C0)
    s1, q = find_center_near("0.3626684938191616+0.6450238859863952i", 300)
    mu = multiplier_at_misiurewicz(c1, MisiurewiczSpec(16, 5))
    print(f"mu at c1 = {mu}, 1/mu = {1 / complex(mu):.6f}")
    show("Misiurewicz c1", cascade(c1, s1, q, 5, 6, mu=mu))

    q0 = 11
    s = solve_superattracting_center(q0, complex(-0.75, math.pi / q0))
    show("parabolic -3/4", cascade(-0.75, s, q0, 2, 10, first_ratio=q0 / (q0 + 2)))

    s = solve_superattracting_center(17, -1.7433378329345027)
    show("parabolic -7/4", cascade(-1.75, s, 17, 3, 12))


if __name__ == "__main__":
    main()
