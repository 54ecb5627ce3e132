"""
Golden parameters of the zoom toward s1.

Solves the Misiurewicz parameter c0, the period-4 center near 0.36+0.64i,
the tuned parameter c1 and the small-copy center s1, and prints each with
its residual.

    python demos/golden_parameters.py
"""
from decolab import (DomainError, MisiurewiczSpec, atom_size, find_center_near,
                     solve_misiurewicz, solve_superattracting_center, tune_misiurewicz)

C0_SEED = "-0.1+0.95i"
S0_SEED = "0.36+0.64i"
S1_SEED = "0.3626684938191616+0.6450238859863952i"
S0_QUOTED = "0.3591071125276155+0.6423830938166145i"


def main():
    c0 = solve_misiurewicz(MisiurewiczSpec(4, 1), C0_SEED)
    print(f"c0  (4,1) Misiurewicz     {c0}")

    s0 = solve_superattracting_center(4, S0_SEED)
    print(f"    period-4 center        {s0}")
    try:
        tune_misiurewicz(S0_QUOTED, 4, MisiurewiczSpec(4, 1), c0)
    except DomainError as e:
        # the quoted s0 is not a period-4 center; its neighbour of period 5 is
        print(f"    quoted s0 rejected: {e}")
    s5 = solve_superattracting_center(5, S0_SEED)
    c1 = tune_misiurewicz(s5, 5, MisiurewiczSpec(4, 1), c0)
    print(f"s0  period-5 center        {s5}")
    print(f"c1  s0 tuned with c0       {c1}")

    s1, q = find_center_near(S1_SEED, 300)
    lam = atom_size(s1, q)
    print(f"s1  center of period {q}  {s1}")
    print(f"    copy size |lambda|     {abs(complex(lam)):.3e}")


if __name__ == "__main__":
    main()
