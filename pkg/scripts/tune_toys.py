#!/usr/bin/env python3
"""Select and verify the frozen toy-scenario constants.

The scenarios have to reproduce two qualitative contrasts at the sample
sizes the CLI uses:

  scenario 1: the two hypothetical models land essentially the same FID
      (population 1-d Frechet gaps matched by construction, so the scores
      differ well under 25%) while the density-aware score separates them
      by at least a factor of two.

  scenario 2: the model's first two truncated moments are solved to match
      the ground truth, pushing its FID down to the sampling-noise floor,
      while the shape mismatch keeps the density-aware score far above
      its own floor.

Running this script recomputes the constants from those targets and
re-verifies the margins across several seeds.  The winners are frozen in
trend/toys.py; rerun after changing anything upstream of them.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from trend.special_math import QuadratureSpec, integrate
from trend.tgn import TgnParams, effective_support, pdf
from trend.toys import ToyScenario, run_scenario

INF = math.inf
FID_TARGET = 4e-3          # population 1-d Frechet gap for both scenario-1 models
MODEL1_BETA = 1.9          # wrong shape, near-Gaussian
MODEL2_BETA = 1.22         # close to the truth's 1.2
SCENARIO2_BETA = 2.5       # flat-topped, against a sharply peaked truth
SEEDS = (1729, 7, 99, 2024, 5, 11, 23, 42)
N = 50_000


def truncated_moments(p: TgnParams) -> tuple[float, float]:
    lo, hi = effective_support(p)
    spec = QuadratureSpec(lo, hi)
    mean = integrate(lambda t: t * pdf(p, t), spec, breakpoints=(p.mu,))
    var = integrate(lambda t: (t - mean) ** 2 * pdf(p, t), spec, breakpoints=(p.mu,))
    return mean, math.sqrt(var)


def frechet_gap(p: TgnParams, truth_mean: float, truth_std: float) -> float:
    mean, std = truncated_moments(p)
    return (mean - truth_mean) ** 2 + (std - truth_std) ** 2


def solve_scenario1() -> ToyScenario:
    truth = TgnParams(1.0, 0.5, 1.2, 0.0, INF)
    t_mean, t_std = truncated_moments(truth)
    print(f"scenario1 truth: mean={t_mean:.6f} std={t_std:.6f}")

    def sigma_for(beta: float) -> float:
        def gap_minus_target(sigma: float) -> float:
            return frechet_gap(TgnParams(1.0, sigma, beta, 0.0, INF), t_mean, t_std) - FID_TARGET

        # locate the gap's minimum over sigma, then root-find on its right
        # branch (the model ends up at least as broad as the truth)
        best = minimize_scalar(gap_minus_target, bounds=(0.2, 1.2), method="bounded",
                               options={"xatol": 1e-8})
        lo = float(best.x)
        if gap_minus_target(lo) > 0.0:
            raise RuntimeError(f"beta={beta}: minimum reachable gap exceeds the target")
        hi = lo + 0.05
        while gap_minus_target(hi) < 0.0:
            hi += 0.05
        return brentq(gap_minus_target, lo, hi, xtol=1e-10)

    sigma1 = sigma_for(MODEL1_BETA)
    sigma2 = sigma_for(MODEL2_BETA)
    model1 = TgnParams(1.0, round(sigma1, 4), MODEL1_BETA, 0.0, INF)
    model2 = TgnParams(1.0, round(sigma2, 4), MODEL2_BETA, 0.0, INF)
    for name, m in (("model1", model1), ("model2", model2)):
        mean, std = truncated_moments(m)
        print(f"scenario1 {name}: sigma={m.sigma} beta={m.beta} "
              f"mean={mean:.6f} std={std:.6f} "
              f"pop_fid={frechet_gap(m, t_mean, t_std):.6e}")
    return ToyScenario("scenario1", truth, (("model1", model1), ("model2", model2)))


def solve_scenario2() -> ToyScenario:
    truth = TgnParams(0.3, 0.4, 0.9, 0.0, INF)
    t_mean, t_std = truncated_moments(truth)
    print(f"scenario2 truth: mean={t_mean:.6f} std={t_std:.6f}")

    def loss(theta) -> float:
        mu, log_sigma = theta
        try:
            p = TgnParams(mu, math.exp(log_sigma), SCENARIO2_BETA, 0.0, INF)
            mean, std = truncated_moments(p)
        except ValueError:
            return 1e6
        return (mean - t_mean) ** 2 + (std - t_std) ** 2

    res = minimize(loss, x0=np.array([t_mean, math.log(t_std)]),
                   method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-16, "maxiter": 2000})
    mu, sigma = float(res.x[0]), math.exp(float(res.x[1]))
    model = TgnParams(round(mu, 4), round(sigma, 4), SCENARIO2_BETA, 0.0, INF)
    mean, std = truncated_moments(model)
    print(f"scenario2 model: mu={model.mu} sigma={model.sigma} beta={model.beta} "
          f"mean={mean:.6f} std={std:.6f} "
          f"pop_fid={frechet_gap(model, t_mean, t_std):.6e}")
    return ToyScenario("scenario2", truth, (("model", model),))


def verify(sc1: ToyScenario, sc2: ToyScenario) -> None:
    print(f"\nverification at n={N}:")
    for seed in SEEDS:
        r = run_scenario(sc1, N, seed)
        t1, t2 = r.trend_scores["model1"], r.trend_scores["model2"]
        f1, f2 = r.fid_scores["model1"], r.fid_scores["model2"]
        rel_fid = abs(f1 - f2) / max(f1, f2)
        print(f"  s1 seed={seed:<5} trend1={t1:.6f} trend2={t2:.6f} "
              f"ratio={t1 / t2:5.1f} (need >=2)  "
              f"fid1={f1:.6f} fid2={f2:.6f} rel_diff={rel_fid:5.1%} (need <25%)")
    for seed in SEEDS:
        r = run_scenario(sc2, N, seed)
        t, f = r.trend_scores["model"], r.fid_scores["model"]
        tn = t / r.self_trend
        fn = f / r.self_fid
        print(f"  s2 seed={seed:<5} trend={t:.6f} fid={f:.3e} "
              f"self_t={r.self_trend:.2e} self_f={r.self_fid:.2e} "
              f"norm_ratio={tn / fn:7.1f} (need >=50)")


def main() -> None:
    sc1 = solve_scenario1()
    sc2 = solve_scenario2()
    verify(sc1, sc2)
    print("\nfreeze these in trend/toys.py:")
    for sc in (sc1, sc2):
        print(f"  {sc.name}: truth={sc.truth}")
        for name, m in sc.models:
            print(f"    {name}: {m}")


if __name__ == "__main__":
    main()
