"""A slowly-cooled noise schedule can settle in the deep well; constant
noise of the same initial size either stays stuck or never settles.

The asymmetric double well has a shallow minimum and a deeper one separated
by a barrier. Langevin dynamics with noise size beta(s) = gamma / log(2+s)
("cooling") is compared against a constant noise of the same starting value:
a path counts as a success if it ends near the deep minimizer. For
well-chosen gamma the cooled paths cross the barrier early (while the noise
is still large) and then freeze, while constant noise keeps re-crossing and
splits its mass between the wells.
"""

import numpy as np

import sgdlab as lab


def main():
    pot = lab.builtin("asym_double_well_1d")
    mins = pot.minimizers()
    shallow = max(mins, key=lambda c: float(pot.value(c.location)))
    deep = min(mins, key=lambda c: float(pot.value(c.location)))
    print(f"shallow minimum at x = {float(shallow.location[0]):+.3f} "
          f"(value {float(pot.value(shallow.location)):.4f}), "
          f"deep at x = {float(deep.location[0]):+.3f} "
          f"(value {float(pot.value(deep.location)):.4f})")
    print("paths start in the shallow well; success = ending near the deep one\n")

    T, n_paths, eps = 500.0, 400, 0.25
    print(f"{'gamma':>6}  {'cooled':>16}  {'constant':>16}  {'gap':>7}")
    for gamma in (0.1, 0.2, 0.4, 0.8):
        cool = lab.anneal_experiment(pot, gamma, T, n_paths, eps,
                                     start=shallow.location, mode="cooling",
                                     seed=2)
        const = lab.anneal_experiment(pot, gamma, T, n_paths, eps,
                                      start=shallow.location, mode="constant",
                                      seed=2)
        print(f"{gamma:>6.2f}  "
              f"{cool.success_prob:6.3f} [{cool.ci_low:.3f},{cool.ci_high:.3f}]  "
              f"{const.success_prob:6.3f} [{const.ci_low:.3f},{const.ci_high:.3f}]  "
              f"{cool.success_prob - const.success_prob:+7.3f}")

    # Occupancy of the deep well over time for one gamma: cooling locks in,
    # constant noise keeps exchanging mass between the wells.
    gamma = 0.4
    cool = lab.anneal_experiment(pot, gamma, T, n_paths, eps,
                                 start=shallow.location, mode="cooling", seed=2)
    const = lab.anneal_experiment(pot, gamma, T, n_paths, eps,
                                  start=shallow.location, mode="constant", seed=2)
    print(f"\nfraction of paths near the deep minimum over time (gamma = {gamma}):")
    print(f"{'time':>8}  {'cooled':>7}  {'constant':>9}")
    for i in range(0, len(cool.occupancy_times), len(cool.occupancy_times) // 10):
        print(f"{cool.occupancy_times[i]:>8.1f}  {cool.occupancy_fracs[i]:>7.3f}  "
              f"{const.occupancy_fracs[i]:>9.3f}")


if __name__ == "__main__":
    main()
