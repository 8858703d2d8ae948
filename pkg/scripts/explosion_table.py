"""E_1 zeta for pure birth with rate x^beta: solver on growing windows next to Monte Carlo."""

import argparse

import numpy as np
from scipy.special import zeta

from ctmc_lab.chain import window_range
from ctmc_lab.models import RateProfile, make_pure_birth
from ctmc_lab.simulate import Caps, classify_explosion, simulate_batch
from ctmc_lab.solver import Truncation, solve_mean_explosion


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", type=float, nargs="+", default=[1.5, 2.0, 3.0])
    ap.add_argument("--runs", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()
    print(f"{'beta':>5} {'zeta(beta)':>11} {'n=1e3':>10} {'n=1e4':>10} {'n=1e5':>10} {'MC':>10} {'p_expl':>7}")
    for i, beta in enumerate(args.beta):
        m = make_pure_birth(RateProfile.power(1.0, beta))
        sol = [solve_mean_explosion(m, Truncation(window_range(m, 1, n))).value_at(1) for n in (10**3, 10**4, 10**5)]
        b = simulate_batch(m, 1, Caps(max_jumps=10**4, max_time=1e3), args.seed + i, args.runs)
        rep = classify_explosion(b)
        print(f"{beta:5.2f} {zeta(beta):11.6f} " + " ".join(f"{v:10.6f}" for v in sol)
              + f" {np.mean(b.elapsed):10.6f} {rep.p_explode_hat:7.3f}")


if __name__ == "__main__":
    main()
