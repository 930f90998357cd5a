"""magsys-lab: magnetic geodesic flows on constant-curvature model surfaces.

A numerical laboratory for closed magnetic geodesics of perturbed Zoll
systems: flow integration, Poincare-section orbit search, magnetic-length
and flux functionals, Zoll reference constants and polynomials, the
odd-symplectic volume identity, and systolic-inequality experiments.
"""

from .errors import (CapNotFound, DivergedFromFamily, IoError, MagsysError,
                     NoConvergence, NoOrbitsFound, NoReturn, ParseError,
                     QuadratureFailure, StepFailure, TangencyError,
                     ValidationError, ZollRegimeViolation)
from .fields import OneForm, ScalarField, one_form_names, scalar_field_names
from .geometry import (Chart, MagneticSystem, ModelSurface, TangentState,
                       christoffel, conformal_perturb, curvature_probe,
                       gaussian_curvature, g_dot, g_norm, make_model,
                       make_surface, magnetic_density, random_state,
                       riemannian_volume, rotate90, sigma0_pair,
                       state_distance, tangent_state, unperturbed_volume,
                       with_sigma_perturbation)
from .dynamics import (Trajectory, flow, geodesic_curvature_series,
                       latitude_seed, measure_geodesic_curvature,
                       reference_period, trajectory_to_csv)
from .orbits import (Orbit, SectionSpec, enumerate_orbits, find_closed_orbit,
                     make_section, return_map, seed_grid)
from .functionals import (ActionValue, FluxMethod, FluxResult,
                          closed_form_flux, flux_through_cap, length,
                          magnetic_action, magnetic_length)
from .zollref import (CohomologyData, ZollReference, a_of_r, a1_squared,
                      inequality_constant_C, k_tilde, kahler_bundle_pairings,
                      make_reference, reference_length, sphere_bundle_pairings,
                      torus_bundle_pairings, zoll_polynomial_generic,
                      zoll_polynomial_kahler)
from .volume import (VolumeReport, identity_constant, vol_closed_form,
                     vol_quadrature_oracle, volume_report)
from .syslab import (ExperimentConfig, ExperimentReport, check_two_sided,
                     run_experiment, run_experiment_full, sweep, sweep_table)

__version__ = "0.1.0"
