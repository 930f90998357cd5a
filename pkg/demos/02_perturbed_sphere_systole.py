"""The local systolic inequality on a perturbed sphere.

Conformally perturb the round magnetic sphere with the axial harmonic
(volume-normalized, so the comparison volume is unchanged), enumerate the
closed magnetic geodesics that survive, and check the two-sided bound

    l_min <= pi a^2(1) <= l_max

with its slack.  At eps = 0 every orbit closes with the same magnetic
length (the Zoll case, zero slack); for eps > 0 the surviving orbits are
the two polar circles and the slack opens linearly in eps.
"""

from magsys_lab import ExperimentConfig, check_two_sided, run_experiment, sweep

cfg = ExperimentConfig(kappa=1.0, strength=1.0,
                       perturbation_name="sphere_harmonic_z",
                       eps=0.05, normalize=True, grid_density=2)

report = run_experiment(cfg)
print(f"eps = {cfg.eps}: found {report.orbit_count} distinct closed orbits "
      f"from {report.seeds_attempted} seeds")
for sid, period, lmag in zip(report.seed_ids, report.periods,
                             report.magnetic_lengths):
    print(f"    {sid:12s} period {period:.6f}  l_mag {lmag:.6f}")
print(f"reference pi a^2(1) = {report.reference:.6f}")
print(f"l_min = {report.l_min:.6f}  l_max = {report.l_max:.6f}")
print(f"slack: lower {report.slack_lower:+.6f}, upper {report.slack_upper:+.6f}")
print(f"two-sided sandwich: {check_two_sided(report)}")
print(f"P(l_min - ref) = {report.p_at_lmin:+.4f}  "
      f"P(l_max - ref) = {report.p_at_lmax:+.4f}  (signs bracket zero)")

print("\nslack vs eps (expected to shrink to zero):")
for rep in sweep(cfg, [0.0, 0.01, 0.02, 0.04]):
    print(f"    eps {rep.config['eps']:<5g} slack_lower {rep.slack_lower:.6f} "
          f"slack_upper {rep.slack_upper:.6f} zoll_flag {rep.zoll_flag}")
