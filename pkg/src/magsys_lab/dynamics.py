"""Magnetic geodesic flow: nabla^g_v v = s b(q) J v at unit g-speed.

The flow is integrated with an adaptive high-order Runge-Kutta stepper
(DOP853).  Long runs are split into chunks of roughly one reference period;
between chunks the state is projected back onto the sphere and onto unit
g-speed, which stops secular drift without touching the local error control.
Trajectories are parametrized by g-arc length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import StepFailure
from .geometry import (Chart, MagneticSystem, TangentState, conf_log_diff,
                       g_dot, g_norm, magnetic_density, polar_weight,
                       rotate90, tangent_state)

DEFAULT_TOL = 1e-10
MAX_REFERENCE_PERIODS = 100.0


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-ordered samples of the flow, parametrized by arc length."""

    states: list
    times: np.ndarray
    speed_drift: float

    def positions(self):
        return np.array([s.position for s in self.states])

    def velocities(self):
        return np.array([s.velocity for s in self.states])


def reference_period(sys: MagneticSystem):
    """Common period 2 pi / sqrt(s^2 + kappa) of the unperturbed closed orbits."""
    return 2.0 * math.pi / math.sqrt(sys.strength**2 + sys.kappa)


def rhs(sys: MagneticSystem):
    """Right-hand side of the first-order system y = (q, v)."""
    surface = sys.surface
    s = sys.strength

    if surface.chart is Chart.SPHERE_AMBIENT:
        kap = surface.kappa
        sqk = math.sqrt(kap)

        def f(t, y):
            q, v = y[:3], y[3:]
            n = q * sqk
            v0sq = float(v @ v)
            acc = -v0sq * kap * q
            if not sys.is_unperturbed():
                dl = conf_log_diff(sys, q)
                grad = dl - float(dl @ n) * n
                acc += -2.0 * float(dl @ v) * v + v0sq * grad
                b = float(magnetic_density(sys, q))
            else:
                b = 1.0
            acc += s * b * np.cross(n, v)
            return np.concatenate([v, acc])

        return f

    hyperbolic = surface.chart is Chart.HYPERBOLIC_POLAR
    kap = surface.kappa

    def f(t, y):
        q, v = y[:2], y[2:]
        rho = q[0]
        if hyperbolic:
            sk = math.sqrt(-kap)
            w = math.sinh(sk * rho) / sk
            wp = math.cosh(sk * rho)
            acc = np.array([w * wp * v[1] ** 2, -2.0 * (wp / w) * v[0] * v[1]])
        else:
            w = 1.0
            acc = np.zeros(2)
        if not sys.is_unperturbed():
            dl = conf_log_diff(sys, q)
            v0sq = v[0] ** 2 + w**2 * v[1] ** 2
            grad = np.array([dl[0], dl[1] / w**2])
            acc += -2.0 * float(dl @ v) * v + v0sq * grad
            b = float(magnetic_density(sys, q))
        else:
            b = 1.0
        jv = np.array([-w * v[1], v[0] / w])
        acc += s * b * jv
        return np.concatenate([v, acc])

    return f


def _pack(state: TangentState):
    return np.concatenate([state.position, state.velocity])


def _unpack(surface, y):
    d = 3 if surface.chart is Chart.SPHERE_AMBIENT else 2
    return TangentState(position=y[:d].copy(), velocity=y[d:].copy())


def _renormalize(sys, y):
    st = _unpack(sys.surface, y)
    st = tangent_state(sys, st.position, st.velocity)
    return _pack(st)


def flow(sys: MagneticSystem, start: TangentState, duration, tol=DEFAULT_TOL,
         n_samples=None):
    """Integrate the magnetic geodesic flow for the given arc length.

    Returns a Trajectory sampled on a uniform grid (both endpoints included).
    Negative durations integrate backwards.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    t_ref = reference_period(sys)
    if abs(duration) > MAX_REFERENCE_PERIODS * t_ref:
        raise ValueError(
            f"duration {duration:g} exceeds the {MAX_REFERENCE_PERIODS:g} "
            "reference-period cap")
    # the stepper runs a decade below the requested tolerance so that derived
    # quantities (speed drift, closure defects) meet tol-level bounds with margin
    rtol = max(tol * 0.1, 1e-13)
    atol = max(tol * 1e-3, 1e-14)
    if n_samples is None:
        n_samples = max(64, int(math.ceil(512 * abs(duration) / t_ref)))
    times = np.linspace(0.0, duration, n_samples + 1)

    f = rhs(sys)
    y = _pack(start)
    out = np.empty((n_samples + 1, y.size))
    out[0] = y
    chunk = t_ref if duration >= 0 else -t_ref
    t0 = 0.0
    filled = 1
    while (duration - t0) * np.sign(duration or 1.0) > 1e-15:
        t1 = t0 + chunk
        if (duration - t1) * np.sign(duration or 1.0) < 0:
            t1 = duration
        sol = solve_ivp(f, (t0, t1), y, method="DOP853", rtol=rtol,
                        atol=atol, dense_output=True)
        if not sol.success:
            raise StepFailure(f"integrator failed on [{t0:g}, {t1:g}]: {sol.message}")
        lo = filled
        hi = lo
        while hi <= n_samples and (times[hi] - t1) * np.sign(duration or 1.0) <= 1e-13:
            hi += 1
        if hi > lo:
            out[lo:hi] = sol.sol(times[lo:hi]).T
            filled = hi
        y = _renormalize(sys, sol.y[:, -1])
        t0 = t1
    if filled <= n_samples:
        out[filled:] = out[filled - 1]

    states = [_unpack(sys.surface, row) for row in out]
    speeds = np.array([g_norm(sys, st.position, st.velocity) for st in states])
    drift = float(np.max(np.abs(speeds - 1.0)))
    return Trajectory(states=states, times=times, speed_drift=drift)


def latitude_seed(sys: MagneticSystem) -> TangentState:
    """A state lying exactly on a closed orbit of the unperturbed Zoll flow.

    Placement: the circle whose signed geodesic curvature equals s, i.e.
    tan(sqrt(kappa) theta*) = sqrt(kappa)/s on the sphere,
    tanh(sqrt(-kappa) theta*) = sqrt(-kappa)/s on the hyperbolic chart,
    radius 1/s on the torus.  Orientation keeps the enclosed center on the
    J-side of the velocity.
    """
    surface = sys.surface
    s = sys.strength
    if surface.chart is Chart.SPHERE_AMBIENT:
        sk = math.sqrt(surface.kappa)
        R = surface.radius
        alpha = math.atan2(sk, abs(s))    # polar angle from the enclosed pole
        pole = 1.0 if s >= 0 else -1.0
        q = np.array([R * math.sin(alpha), 0.0, pole * R * math.cos(alpha)])
        v = np.array([0.0, pole, 0.0])
        return tangent_state(sys, q, v)
    if surface.chart is Chart.HYPERBOLIC_POLAR:
        sk = math.sqrt(-surface.kappa)
        if abs(s) <= sk:
            # construction guarantees s^2+kappa>0, so this cannot trigger
            raise StepFailure("no latitude circle below the horocycle threshold")
        rho = math.atanh(sk / abs(s)) / sk
        w = float(polar_weight(surface, rho))
        return tangent_state(sys, np.array([rho, 0.0]),
                             np.array([0.0, math.copysign(1.0, s) / w]))
    p1, p2 = surface.torus_periods
    if s == 0:
        # straight lines never close into short loops; seed along x anyway
        return tangent_state(sys, np.array([0.5 * p1, 0.5 * p2]), np.array([1.0, 0.0]))
    center = np.array([0.5 * p1, 0.5 * p2])
    q = center + np.array([1.0 / abs(s), 0.0])
    v = np.array([0.0, math.copysign(1.0, s)])
    return tangent_state(sys, q, v)


def chart_coordinates(sys, state: TangentState):
    """Chart coordinates of a state for export (sphere states stay ambient)."""
    return np.concatenate([state.position, state.velocity])


def geodesic_curvature_series(sys, traj: Trajectory):
    """Signed geodesic curvature kappa_g = g(nabla_v v, Jv)/|v|_g^3 per sample.

    The covariant acceleration is measured from the sampled data with
    five-point finite differences of the velocity (second order one-sided at
    the ends), so the measurement does not assume the force law.
    """
    times = traj.times
    vel = traj.velocities()
    pos = traj.positions()
    n = len(times)
    if n < 5:
        raise ValueError("need at least 5 samples to measure curvature")
    h = times[1] - times[0]
    dv = np.empty_like(vel)
    dv[2:-2] = (vel[:-4] - 8 * vel[1:-3] + 8 * vel[3:-1] - vel[4:]) / (12 * h)
    c = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    for i in (0, 1):
        dv[i] = sum(c[j] * vel[i + j] for j in range(5)) / h
        dv[-1 - i] = -sum(c[j] * vel[-1 - i - j] for j in range(5)) / h

    out = np.empty(n)
    for i in range(n):
        out[i] = _signed_curvature(sys, pos[i], vel[i], dv[i])
    return out


def measure_geodesic_curvature(sys, state: TangentState, fd_step=1e-3):
    """High-accuracy signed geodesic curvature at one state.

    Integrates a short burst through the state and differentiates the
    five-point velocity stencil; measurement error is ~1e-11, far below the
    flow tolerances it is used to certify.
    """
    h = fd_step
    fwd = flow(sys, state, 2 * h, tol=1e-12, n_samples=2)
    bwd = flow(sys, state, -2 * h, tol=1e-12, n_samples=2)
    sts = [bwd.states[2], bwd.states[1], state, fwd.states[1], fwd.states[2]]
    vel = np.array([s.velocity for s in sts])
    dv = (vel[0] - 8 * vel[1] + 8 * vel[3] - vel[4]) / (12 * h)
    return _signed_curvature(sys, state.position, state.velocity, dv)


def _signed_curvature(sys, q, v, dv):
    surface = sys.surface
    if surface.chart is Chart.SPHERE_AMBIENT:
        nvec = q * math.sqrt(surface.kappa)
        cov = dv - float(dv @ nvec) * nvec
    else:
        gam = christoffel_background(sys, q)
        cov = dv + np.einsum("kij,i,j->k", gam, v, v)
    if not sys.is_unperturbed():
        dl = conf_log_diff(sys, q)
        if surface.chart is Chart.SPHERE_AMBIENT:
            nvec = q * math.sqrt(surface.kappa)
            grad = dl - float(dl @ nvec) * nvec
            v0sq = float(v @ v)
        else:
            w = float(polar_weight(surface, q[0])) if \
                surface.chart is Chart.HYPERBOLIC_POLAR else 1.0
            grad = np.array([dl[0], dl[1] / w**2])
            v0sq = v[0] ** 2 + w**2 * v[1] ** 2
        cov = cov + 2.0 * float(dl @ v) * v - v0sq * grad
    jv = rotate90(sys, q, v)
    return float(g_dot(sys, q, cov, jv)) / float(g_norm(sys, q, v)) ** 3


def christoffel_background(sys, q):
    """Gamma of the *unperturbed* chart metric at chart point q."""
    surface = sys.surface
    gam = np.zeros((2, 2, 2))
    if surface.chart is Chart.HYPERBOLIC_POLAR:
        sk = math.sqrt(-surface.kappa)
        w = math.sinh(sk * q[0]) / sk
        wp = math.cosh(sk * q[0])
        gam[0, 1, 1] = -w * wp
        gam[1, 0, 1] = gam[1, 1, 0] = wp / w
    return gam


def trajectory_to_csv(sys, traj: Trajectory, path):
    """Write t, chart coordinates, velocity and measured geodesic curvature."""
    surface = sys.surface
    if surface.chart is Chart.SPHERE_AMBIENT:
        cols = ["t", "qx", "qy", "qz", "vx", "vy", "vz", "geodesic_curvature"]
    elif surface.chart is Chart.HYPERBOLIC_POLAR:
        cols = ["t", "rho", "phi", "v_rho", "v_phi", "geodesic_curvature"]
    else:
        cols = ["t", "x", "y", "vx", "vy", "geodesic_curvature"]
    kappa_g = geodesic_curvature_series(sys, traj)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for i, t in enumerate(traj.times):
            st = traj.states[i]
            row = [t, *st.position, *st.velocity, kappa_g[i]]
            fh.write(",".join(f"{x:.12g}" for x in row) + "\n")
