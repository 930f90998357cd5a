"""Model surface geometries and magnetic-system construction.

Three constant-curvature charts are supported:

* ``Chart.SPHERE_AMBIENT`` (kappa > 0): points are ambient R^3 vectors on
  the radius R = 1/sqrt(kappa) sphere, velocities ambient tangent vectors.
  Chart-free dynamics, robust near every point.
* ``Chart.HYPERBOLIC_POLAR`` (kappa < 0): geodesic polar coordinates
  (rho, phi) with metric drho^2 + (sinh^2(sqrt(-kappa) rho)/(-kappa)) dphi^2.
* ``Chart.FLAT_TORUS`` (kappa = 0): flat fundamental domain with periods
  (P1, P2); positions may live on the universal cover.

The magnetic 2-form of an unperturbed model is the area form sigma0 of the
unperturbed metric g0.  Perturbations are conformal, g = lam e^{2 eps u} g0,
plus an optional exact term sigma = sigma0 + eps d(eta).  The complex
structure J is the g0-orthogonal positive rotation (conformally invariant),
fixed so that sigma0(v, Jv) > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import integrate

from .errors import QuadratureFailure, ValidationError, ZollRegimeViolation
from .fields import OneForm, ScalarField


class Chart(Enum):
    SPHERE_AMBIENT = "sphere_ambient"
    HYPERBOLIC_POLAR = "hyperbolic_polar"
    FLAT_TORUS = "flat_torus"


@dataclass(frozen=True)
class ModelSurface:
    """A constant-curvature model surface.

    ``domain_rho`` bounds the hyperbolic chart for volume bookkeeping (the
    hyperbolic plane itself is not compact); it defaults to 3/sqrt(-kappa).
    """

    kappa: float
    chart: Chart
    torus_periods: tuple = (2.0 * math.pi, 2.0 * math.pi)
    domain_rho: float = 0.0

    def __post_init__(self):
        k = self.kappa
        if self.chart is Chart.SPHERE_AMBIENT and not k > 0:
            raise ValidationError("SphereAmbient requires kappa > 0")
        if self.chart is Chart.HYPERBOLIC_POLAR and not k < 0:
            raise ValidationError("HyperbolicPolar requires kappa < 0")
        if self.chart is Chart.FLAT_TORUS and k != 0:
            raise ValidationError("FlatTorus requires kappa = 0")
        if self.chart is Chart.FLAT_TORUS:
            p1, p2 = self.torus_periods
            if not (p1 > 0 and p2 > 0):
                raise ValidationError("torus periods must be positive")

    @property
    def radius(self):
        """Sphere radius 1/sqrt(kappa)."""
        return 1.0 / math.sqrt(self.kappa)

    def point_dim(self):
        return 3 if self.chart is Chart.SPHERE_AMBIENT else 2


def make_surface(kappa, torus_periods=None, domain_rho=None):
    """Build the model surface of curvature kappa (chart chosen by sign)."""
    kappa = float(kappa)
    if kappa > 0:
        return ModelSurface(kappa, Chart.SPHERE_AMBIENT)
    if kappa < 0:
        dom = 3.0 / math.sqrt(-kappa) if domain_rho is None else float(domain_rho)
        return ModelSurface(kappa, Chart.HYPERBOLIC_POLAR, domain_rho=dom)
    periods = tuple(float(p) for p in (torus_periods or (2.0 * math.pi, 2.0 * math.pi)))
    return ModelSurface(0.0, Chart.FLAT_TORUS, torus_periods=periods)


@dataclass(frozen=True)
class MagneticSystem:
    """A model surface with magnetic strength and optional perturbation data."""

    surface: ModelSurface
    strength: float
    conformal_exponent: ScalarField | None = None
    conformal_eps: float = 0.0
    sigma_perturbation: OneForm | None = None
    volume_normalized: bool = False
    conformal_scale: float = 1.0    # the global constant lam in g = lam e^{2 eps u} g0

    @property
    def kappa(self):
        return self.surface.kappa

    def is_unperturbed(self):
        no_fields = self.conformal_exponent is None and self.sigma_perturbation is None
        return (self.conformal_eps == 0.0 or no_fields) and self.conformal_scale == 1.0


def check_zoll_regime(kappa, strength):
    if not strength**2 + kappa > 0:
        raise ZollRegimeViolation(
            f"Zoll regime violated: s^2+kappa = {strength**2 + kappa:g} <= 0 "
            "(horocycle threshold)")


def make_model(kappa, strength):
    """Unperturbed Zoll magnetic system: sigma = area form, strength s.

    Requires s^2 + kappa > 0 (below that threshold the circle-action
    structure degenerates and no closed reference orbits exist).
    """
    check_zoll_regime(kappa, strength)
    return MagneticSystem(surface=make_surface(kappa), strength=float(strength))


# --- metric, rotation, conformal data ----------------------------------------

def polar_weight(surface, rho):
    """w(rho) with metric drho^2 + w^2 dphi^2 in geodesic polar coordinates."""
    k = surface.kappa
    rho = np.asarray(rho, dtype=float)
    if k > 0:
        sk = math.sqrt(k)
        return np.sin(sk * rho) / sk
    if k < 0:
        sk = math.sqrt(-k)
        return np.sinh(sk * rho) / sk
    return rho * np.ones_like(rho) if np.ndim(rho) else float(rho)


def conf_log(sys: MagneticSystem, q):
    """Log-conformal factor Lambda with g = e^{2 Lambda} g0."""
    lam_part = 0.5 * math.log(sys.conformal_scale)
    if sys.conformal_exponent is None or sys.conformal_eps == 0.0:
        q = np.asarray(q, dtype=float)
        return np.full(q.shape[:-1], lam_part) if q.ndim > 1 else lam_part
    return sys.conformal_eps * sys.conformal_exponent.value(sys.surface, q) + lam_part


def conf_log_diff(sys: MagneticSystem, q):
    """Differential of Lambda as a chart covector (ambient covector on the sphere)."""
    if sys.conformal_exponent is None or sys.conformal_eps == 0.0:
        return np.zeros_like(np.asarray(q, dtype=float))
    return sys.conformal_eps * sys.conformal_exponent.differential(sys.surface, q)


def g0_dot(surface, q, u, v):
    """Unperturbed metric pairing of chart vectors u, v at q."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if surface.chart is Chart.HYPERBOLIC_POLAR:
        w = polar_weight(surface, np.asarray(q, dtype=float)[..., 0])
        return u[..., 0] * v[..., 0] + w**2 * u[..., 1] * v[..., 1]
    return np.sum(u * v, axis=-1)


def g_dot(sys, q, u, v):
    """Perturbed metric pairing g = lam e^{2 eps u} g0."""
    return np.exp(2.0 * conf_log(sys, q)) * g0_dot(sys.surface, q, u, v)


def g_norm(sys, q, v):
    return np.sqrt(g_dot(sys, q, v, v))


def rotate90(sys, q, v):
    """The complex structure J: g-orthogonal positive rotation (J^2 = -Id).

    On the sphere J v = n x v with n the outward unit normal; on the chart
    surfaces it is the standard positive rotation of the oriented frame.
    """
    surface = sys.surface if isinstance(sys, MagneticSystem) else sys
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    if surface.chart is Chart.SPHERE_AMBIENT:
        n = q * math.sqrt(surface.kappa)
        return np.cross(n, v)
    out = np.empty_like(v)
    if surface.chart is Chart.HYPERBOLIC_POLAR:
        w = polar_weight(surface, q[..., 0])
        out[..., 0] = -w * v[..., 1]
        out[..., 1] = v[..., 0] / w
        return out
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


def sigma0_pair(surface, q, u, v):
    """Unperturbed area form sigma0(u, v) at q."""
    if surface.chart is Chart.SPHERE_AMBIENT:
        n = np.asarray(q, dtype=float) * math.sqrt(surface.kappa)
        return np.sum(n * np.cross(u, v), axis=-1)
    if surface.chart is Chart.HYPERBOLIC_POLAR:
        w = polar_weight(surface, np.asarray(q, dtype=float)[..., 0])
        return w * (u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0])
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def magnetic_density(sys, q):
    """Density b = sigma/dA_g = (1 + eps D_eta) e^{-2 Lambda}.

    Magnetic geodesics of the system satisfy nabla^g_v v = s b(q) J v at
    unit g-speed.
    """
    dens = 1.0
    if sys.sigma_perturbation is not None and sys.conformal_eps != 0.0:
        dens = 1.0 + sys.conformal_eps * sys.sigma_perturbation.density(sys.surface, q)
    return dens * np.exp(-2.0 * conf_log(sys, q))


# --- tangent states -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TangentState:
    """A point of the unit tangent bundle: chart position + unit g-velocity."""

    position: np.ndarray
    velocity: np.ndarray


def tangent_state(sys, position, velocity):
    """Construct a TangentState, projecting to the surface and to unit g-speed."""
    q = np.asarray(position, dtype=float).copy()
    v = np.asarray(velocity, dtype=float).copy()
    surface = sys.surface
    if surface.chart is Chart.SPHERE_AMBIENT:
        R = surface.radius
        q *= R / np.linalg.norm(q)
        n = q / R
        v -= np.dot(v, n) * n
    nrm = g_norm(sys, q, v)
    if not nrm > 0:
        raise ValidationError("velocity must be nonzero")
    return TangentState(position=q, velocity=v / nrm)


def wrap_position(surface, q, ref=None):
    """Shift periodic chart coordinates of q next to ref (or into one period)."""
    q = np.asarray(q, dtype=float).copy()
    if surface.chart is Chart.FLAT_TORUS:
        periods = np.asarray(surface.torus_periods)
        base = np.zeros(2) if ref is None else np.asarray(ref, dtype=float)
        q -= periods * np.round((q - base) / periods) if ref is not None else \
            periods * np.floor(q / periods)
    elif surface.chart is Chart.HYPERBOLIC_POLAR:
        base = 0.0 if ref is None else float(ref[1])
        two_pi = 2.0 * math.pi
        if ref is None:
            q[1] = q[1] % two_pi
        else:
            q[1] -= two_pi * round((q[1] - base) / two_pi)
    return q


def state_distance(sys, s1: TangentState, s2: TangentState):
    """Chart-Euclidean distance in state space (periodic coordinates wrap)."""
    surface = sys.surface
    dq = wrap_position(surface, s1.position, ref=s2.position) - s2.position
    dv = s1.velocity - s2.velocity
    return math.sqrt(float(np.dot(dq, dq) + np.dot(dv, dv)))


# --- volume quadrature ---------------------------------------------------------

def unperturbed_volume(surface):
    """Closed-form g0-area of the model (hyperbolic: of the chart domain)."""
    k = surface.kappa
    if surface.chart is Chart.SPHERE_AMBIENT:
        return 4.0 * math.pi / k
    if surface.chart is Chart.HYPERBOLIC_POLAR:
        sk = math.sqrt(-k)
        return 2.0 * math.pi * (math.cosh(sk * surface.domain_rho) - 1.0) / (-k)
    p1, p2 = surface.torus_periods
    return p1 * p2


def _conf_weight(sys):
    eps = sys.conformal_eps
    u = sys.conformal_exponent
    surface = sys.surface
    if u is None or eps == 0.0:
        return lambda q: 1.0
    return lambda q: math.exp(2.0 * eps * float(u.value(surface, q)))


def _quad_area(sys, weight, rel_tol):
    """Nested adaptive quadrature of weight(q) dA_{g0} over the chart."""
    surface = sys.surface
    if surface.chart is Chart.SPHERE_AMBIENT:
        R = surface.radius

        def f(alpha, phi):
            sa = math.sin(alpha)
            q = np.array([R * sa * math.cos(phi), R * sa * math.sin(phi), R * math.cos(alpha)])
            return weight(q) * R * R * sa

        val, err = integrate.dblquad(f, 0.0, 2.0 * math.pi, 0.0, math.pi,
                                     epsabs=0.0, epsrel=0.1 * rel_tol)
    elif surface.chart is Chart.HYPERBOLIC_POLAR:
        def f(rho, phi):
            return weight(np.array([rho, phi])) * float(polar_weight(surface, rho))

        val, err = integrate.dblquad(f, 0.0, 2.0 * math.pi, 0.0, surface.domain_rho,
                                     epsabs=0.0, epsrel=0.1 * rel_tol)
    else:
        p1, p2 = surface.torus_periods

        def f(x, y):
            return weight(np.array([x, y]))

        val, err = integrate.dblquad(f, 0.0, p2, 0.0, p1,
                                     epsabs=0.0, epsrel=0.1 * rel_tol)
    if not math.isfinite(val) or err > rel_tol * abs(val) + 1e-300:
        raise QuadratureFailure(
            f"area quadrature reached error {err:g} on value {val:g} "
            f"(requested rel {rel_tol:g})")
    return val


def riemannian_volume(sys, rel_tol=1e-8):
    """Surface area under the (possibly perturbed) metric, by adaptive quadrature."""
    return sys.conformal_scale * _quad_area(sys, _conf_weight(sys), rel_tol)


def conformal_perturb(sys, u, eps, normalize, rel_tol=1e-10):
    """Conformally perturb the metric: g = lam e^{2 eps u} g0.

    With normalize=True the single global constant lam is chosen so that the
    perturbed area equals the unperturbed one; the perturbation's shape is
    untouched.  eps = 0 returns the input system unchanged.
    """
    if eps == 0.0:
        return sys
    if isinstance(u, str):
        u = ScalarField(u)
    probe = replace(sys, conformal_exponent=u, conformal_eps=float(eps),
                    conformal_scale=1.0, volume_normalized=False)
    if not normalize:
        return probe
    raw = _quad_area(probe, _conf_weight(probe), rel_tol)
    lam = unperturbed_volume(sys.surface) / raw
    return replace(probe, conformal_scale=lam, volume_normalized=True)


def with_sigma_perturbation(sys, eta, eps=None):
    """Attach an exact magnetic perturbation: sigma = sigma0 + eps d(eta).

    eps defaults to the system's conformal_eps so metric and magnetic
    perturbations share one small parameter.
    """
    if isinstance(eta, str):
        eta = OneForm(eta)
    if eps is None:
        eps = sys.conformal_eps
    return replace(sys, sigma_perturbation=eta, conformal_eps=float(eps))


# --- chart conversions and probes ----------------------------------------------

def sphere_polar(surface, q):
    """(theta, phi) geodesic polar coordinates about the north pole +z R."""
    R = surface.radius
    q = np.asarray(q, dtype=float)
    theta = np.arccos(np.clip(q[..., 2] / R, -1.0, 1.0)) * R
    phi = np.arctan2(q[..., 1], q[..., 0])
    return np.stack([theta, phi], axis=-1)


def sphere_from_polar(surface, theta, phi):
    R = surface.radius
    alpha = np.asarray(theta, dtype=float) / R
    return np.stack([R * np.sin(alpha) * np.cos(phi),
                     R * np.sin(alpha) * np.sin(phi),
                     R * np.cos(alpha)], axis=-1)


def _metric_components(sys, rho, phi):
    """(E, G) of g = E drho^2 + G dphi^2 in the model's polar/flat chart."""
    surface = sys.surface
    if surface.chart is Chart.SPHERE_AMBIENT:
        q = sphere_from_polar(surface, rho, phi)
        w = polar_weight(surface, rho)
    elif surface.chart is Chart.HYPERBOLIC_POLAR:
        q = np.array([rho, phi])
        w = float(polar_weight(surface, rho))
    else:
        q = np.array([rho, phi])
        w = 1.0
    e2l = math.exp(2.0 * float(conf_log(sys, q)))
    return e2l, e2l * float(w) ** 2


def christoffel(sys, position):
    """Christoffel symbols Gamma[k, i, j] of the perturbed metric.

    Coordinates are the model's own chart: (rho, phi) for the polar charts
    (the sphere position may be given in ambient form and is converted),
    (x, y) on the torus.
    """
    surface = sys.surface
    q = np.asarray(position, dtype=float)
    if surface.chart is Chart.SPHERE_AMBIENT and q.shape[-1] == 3:
        q = sphere_polar(surface, q)
    rho, phi = float(q[0]), float(q[1])

    if surface.chart is Chart.FLAT_TORUS:
        w, wp = 1.0, 0.0
    elif surface.chart is Chart.SPHERE_AMBIENT:
        sk = math.sqrt(surface.kappa)
        w, wp = math.sin(sk * rho) / sk, math.cos(sk * rho)
    else:
        sk = math.sqrt(-surface.kappa)
        w, wp = math.sinh(sk * rho) / sk, math.cosh(sk * rho)

    gam = np.zeros((2, 2, 2))
    gam[0, 1, 1] = -w * wp
    gam[1, 0, 1] = gam[1, 1, 0] = wp / w if w != 0.0 else 0.0

    if sys.conformal_exponent is not None and sys.conformal_eps != 0.0:
        dl = _conf_diff_chart(sys, rho, phi)
        grad = np.array([dl[0], dl[1] / w**2])
        g0 = np.diag([1.0, w**2])
        for k in range(2):
            for i in range(2):
                for j in range(2):
                    gam[k, i, j] += (i == k) * dl[j] + (j == k) * dl[i] - g0[i, j] * grad[k]
    return gam


def _conf_diff_chart(sys, rho, phi):
    """d(Lambda) in polar-chart components, converting from ambient on the sphere."""
    surface = sys.surface
    if surface.chart is Chart.SPHERE_AMBIENT:
        dl_amb = conf_log_diff(sys, sphere_from_polar(surface, rho, phi))
        R = surface.radius
        alpha = rho / R
        dq_drho = np.array([math.cos(alpha) * math.cos(phi),
                            math.cos(alpha) * math.sin(phi), -math.sin(alpha)])
        dq_dphi = np.array([-R * math.sin(alpha) * math.sin(phi),
                            R * math.sin(alpha) * math.cos(phi), 0.0])
        return np.array([float(dl_amb @ dq_drho), float(dl_amb @ dq_dphi)])
    return conf_log_diff(sys, np.array([rho, phi]))


def gaussian_curvature(sys, position, fd_step=1e-3):
    """Gaussian curvature probe by finite differences of the metric.

    Uses the Brioschi formula for a diagonal metric E drho^2 + G dphi^2 with
    5-point stencils; independent of any closed-form curvature expression.
    """
    surface = sys.surface
    q = np.asarray(position, dtype=float)
    if surface.chart is Chart.SPHERE_AMBIENT and q.shape[-1] == 3:
        q = sphere_polar(surface, q)
    rho, phi = float(q[0]), float(q[1])
    h = fd_step

    def E(r, p):
        return _metric_components(sys, r, p)[0]

    def G(r, p):
        return _metric_components(sys, r, p)[1]

    def root_eg(r, p):
        e, g = _metric_components(sys, r, p)
        return math.sqrt(e * g)

    dr = _fd1(lambda r, p: _fd1(G, r, p, 0, h) / root_eg(r, p), rho, phi, 0, h)
    dp = _fd1(lambda r, p: _fd1(E, r, p, 1, h) / root_eg(r, p), rho, phi, 1, h)
    return -0.5 / root_eg(rho, phi) * (dr + dp)


def _fd1(f, rho, phi, axis, h):
    vals = []
    for i in (-2, -1, 1, 2):
        r = rho + (i * h if axis == 0 else 0.0)
        p = phi + (i * h if axis == 1 else 0.0)
        vals.append(f(r, p))
    return (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)


def random_point(surface, rng):
    """A random chart point, kept away from polar-chart singularities."""
    if surface.chart is Chart.SPHERE_AMBIENT:
        q = rng.normal(size=3)
        return q / np.linalg.norm(q) * surface.radius
    if surface.chart is Chart.HYPERBOLIC_POLAR:
        hi = min(2.5 / math.sqrt(-surface.kappa), surface.domain_rho)
        return np.array([rng.uniform(0.15, hi), rng.uniform(0.0, 2.0 * math.pi)])
    p1, p2 = surface.torus_periods
    return np.array([rng.uniform(0.0, p1), rng.uniform(0.0, p2)])


def random_state(sys, rng):
    """A random unit-g-speed tangent state."""
    surface = sys.surface
    q = random_point(surface, rng)
    if surface.chart is Chart.SPHERE_AMBIENT:
        v = rng.normal(size=3)
    else:
        v = rng.normal(size=2)
    return tangent_state(sys, q, v)


def curvature_probe(sys, n=100, seed=0):
    """Gaussian curvature at n random probe points (polar-chart safe)."""
    rng = np.random.default_rng(seed)
    out = []
    surface = sys.surface
    for _ in range(n):
        if surface.chart is Chart.SPHERE_AMBIENT:
            theta = rng.uniform(0.3, math.pi - 0.3) * surface.radius
            q = np.array([theta, rng.uniform(0.0, 2.0 * math.pi)])
        elif surface.chart is Chart.HYPERBOLIC_POLAR:
            hi = min(2.5 / math.sqrt(-surface.kappa), surface.domain_rho)
            q = np.array([rng.uniform(0.2, hi), rng.uniform(0.0, 2.0 * math.pi)])
        else:
            q = random_point(surface, rng)
        out.append(gaussian_curvature(sys, q))
    return np.array(out)
