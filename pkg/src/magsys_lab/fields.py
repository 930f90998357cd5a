"""Named built-in perturbation fields.

Metric perturbations enter as conformal exponents u (dimensionless scalar
fields), magnetic perturbations as 1-forms eta with closed-form exterior
derivative.  Fields are referenced by name plus a coefficient list, so
configs stay declarative (no code loading) and systems stay picklable.

Conventions per chart:

* ``sphere_ambient`` -- points are ambient R^3 vectors on the radius-R
  sphere; differentials are returned as Euclidean covectors (project onto
  the tangent plane to get the intrinsic gradient).
* ``hyperbolic_polar`` -- points are (rho, phi); covectors are (d_rho, d_phi)
  components.
* ``flat_torus`` -- points are (x, y) in the fundamental domain (or its
  universal cover); covectors are (dx, dy) components.

``OneForm.density`` returns d(eta)/sigma0, the exterior derivative measured
against the unperturbed area form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

_SPHERE = "sphere_ambient"
_HYPER = "hyperbolic_polar"
_TORUS = "flat_torus"


def _axis(coeffs):
    ax = np.asarray(coeffs[1:4], dtype=float)
    n = np.linalg.norm(ax)
    if n == 0.0:
        raise ValidationError("sphere_harmonic axis must be nonzero")
    return ax / n


# --- scalar fields -----------------------------------------------------------
# value(coeffs, surface, q) -> (...,);  diff(coeffs, surface, q) -> (..., dim)

def _const_val(coeffs, surface, q):
    q = np.asarray(q, dtype=float)
    return np.full(q.shape[:-1], float(coeffs[0]))


def _const_diff(coeffs, surface, q):
    return np.zeros_like(np.asarray(q, dtype=float))


def _sphere_harmonic_val(coeffs, surface, q):
    # u = c * sqrt(kappa) * <axis, q>; restriction of a linear harmonic.
    c = float(coeffs[0])
    ax = _axis(coeffs) if len(coeffs) >= 4 else np.array([0.0, 0.0, 1.0])
    q = np.asarray(q, dtype=float)
    return c * np.sqrt(surface.kappa) * (q @ ax)


def _sphere_harmonic_diff(coeffs, surface, q):
    c = float(coeffs[0])
    ax = _axis(coeffs) if len(coeffs) >= 4 else np.array([0.0, 0.0, 1.0])
    q = np.asarray(q, dtype=float)
    out = np.broadcast_to(c * np.sqrt(surface.kappa) * ax, q.shape)
    return np.array(out, dtype=float)


def _torus_cos_val(idx):
    def val(coeffs, surface, q):
        c = float(coeffs[0])
        period = surface.torus_periods[idx]
        q = np.asarray(q, dtype=float)
        return c * np.cos(2.0 * np.pi * q[..., idx] / period)
    return val


def _torus_cos_diff(idx):
    def diff(coeffs, surface, q):
        c = float(coeffs[0])
        period = surface.torus_periods[idx]
        q = np.asarray(q, dtype=float)
        out = np.zeros_like(q)
        k = 2.0 * np.pi / period
        out[..., idx] = -c * k * np.sin(k * q[..., idx])
        return out
    return diff


def _hyper_bump_val(coeffs, surface, q):
    c, rho0 = float(coeffs[0]), float(coeffs[1])
    q = np.asarray(q, dtype=float)
    return c * np.exp(-((q[..., 0] / rho0) ** 2))


def _hyper_bump_diff(coeffs, surface, q):
    c, rho0 = float(coeffs[0]), float(coeffs[1])
    q = np.asarray(q, dtype=float)
    out = np.zeros_like(q)
    out[..., 0] = c * np.exp(-((q[..., 0] / rho0) ** 2)) * (-2.0 * q[..., 0] / rho0**2)
    return out


_SCALAR_FIELDS = {
    "const": (_const_val, _const_diff, None, 1),
    "sphere_harmonic_z": (_sphere_harmonic_val, _sphere_harmonic_diff, _SPHERE, 1),
    "sphere_harmonic_axis": (_sphere_harmonic_val, _sphere_harmonic_diff, _SPHERE, 4),
    "torus_cos_x": (_torus_cos_val(0), _torus_cos_diff(0), _TORUS, 1),
    "torus_cos_y": (_torus_cos_val(1), _torus_cos_diff(1), _TORUS, 1),
    "hyperbolic_bump": (_hyper_bump_val, _hyper_bump_diff, _HYPER, 2),
}


@dataclass(frozen=True)
class ScalarField:
    """A named built-in scalar field with a coefficient tuple."""

    name: str
    coeffs: tuple = (1.0,)

    def __post_init__(self):
        if self.name not in _SCALAR_FIELDS:
            raise ValidationError(
                f"unknown scalar field {self.name!r}; known: {sorted(_SCALAR_FIELDS)}")
        needed = _SCALAR_FIELDS[self.name][3]
        if len(self.coeffs) < needed:
            raise ValidationError(
                f"scalar field {self.name!r} needs {needed} coefficient(s)")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def _check_chart(self, surface):
        chart = _SCALAR_FIELDS[self.name][2]
        if chart is not None and surface.chart.value != chart:
            raise ValidationError(
                f"scalar field {self.name!r} is defined on {chart}, not {surface.chart.value}")

    def value(self, surface, q):
        self._check_chart(surface)
        return _SCALAR_FIELDS[self.name][0](self.coeffs, surface, q)

    def differential(self, surface, q):
        self._check_chart(surface)
        return _SCALAR_FIELDS[self.name][1](self.coeffs, surface, q)


# --- 1-forms ------------------------------------------------------------------
# comp(coeffs, surface, q) -> (..., dim) covector components
# dens(coeffs, surface, q) -> (...,)      d(eta)/sigma0

def _torus_eta_comp(coeffs, surface, q):
    # eta = c sin(2 pi x / P1) dy
    c = float(coeffs[0])
    k = 2.0 * np.pi / surface.torus_periods[0]
    q = np.asarray(q, dtype=float)
    out = np.zeros_like(q)
    out[..., 1] = c * np.sin(k * q[..., 0])
    return out


def _torus_eta_dens(coeffs, surface, q):
    c = float(coeffs[0])
    k = 2.0 * np.pi / surface.torus_periods[0]
    q = np.asarray(q, dtype=float)
    return c * k * np.cos(k * q[..., 0])


def _sphere_eta_comp(coeffs, surface, q):
    # eta = c (x dy - y dx) restricted to the sphere
    c = float(coeffs[0])
    q = np.asarray(q, dtype=float)
    out = np.zeros_like(q)
    out[..., 0] = -c * q[..., 1]
    out[..., 1] = c * q[..., 0]
    return out


def _sphere_eta_dens(coeffs, surface, q):
    # d(eta) = 2c dx^dy; against the round area form this is 2c z/R = 2c z sqrt(kappa)
    c = float(coeffs[0])
    q = np.asarray(q, dtype=float)
    return 2.0 * c * q[..., 2] * np.sqrt(surface.kappa)


def _hyper_eta_comp(coeffs, surface, q):
    # eta = c rho^2 dphi
    c = float(coeffs[0])
    q = np.asarray(q, dtype=float)
    out = np.zeros_like(q)
    out[..., 1] = c * q[..., 0] ** 2
    return out


def _hyper_eta_dens(coeffs, surface, q):
    # d(eta) = 2c rho drho^dphi = (2c rho / w(rho)) sigma0
    c = float(coeffs[0])
    q = np.asarray(q, dtype=float)
    rho = q[..., 0]
    sk = np.sqrt(-surface.kappa)
    w = np.sinh(sk * rho) / sk
    return np.where(rho == 0.0, 2.0 * c, 2.0 * c * rho / np.where(w == 0.0, 1.0, w))


_ONE_FORMS = {
    "torus_eta_sin_x": (_torus_eta_comp, _torus_eta_dens, _TORUS, 1),
    "sphere_eta_axial": (_sphere_eta_comp, _sphere_eta_dens, _SPHERE, 1),
    "hyperbolic_eta_radial": (_hyper_eta_comp, _hyper_eta_dens, _HYPER, 1),
}


@dataclass(frozen=True)
class OneForm:
    """A named built-in 1-form perturbation with closed-form d(eta)."""

    name: str
    coeffs: tuple = (1.0,)

    def __post_init__(self):
        if self.name not in _ONE_FORMS:
            raise ValidationError(
                f"unknown 1-form {self.name!r}; known: {sorted(_ONE_FORMS)}")
        needed = _ONE_FORMS[self.name][3]
        if len(self.coeffs) < needed:
            raise ValidationError(f"1-form {self.name!r} needs {needed} coefficient(s)")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def _check_chart(self, surface):
        chart = _ONE_FORMS[self.name][2]
        if chart is not None and surface.chart.value != chart:
            raise ValidationError(
                f"1-form {self.name!r} is defined on {chart}, not {surface.chart.value}")

    def components(self, surface, q):
        self._check_chart(surface)
        return _ONE_FORMS[self.name][0](self.coeffs, surface, q)

    def density(self, surface, q):
        """Exterior-derivative density d(eta)/sigma0 at q."""
        self._check_chart(surface)
        return _ONE_FORMS[self.name][1](self.coeffs, surface, q)


def scalar_field_names():
    return sorted(_SCALAR_FIELDS)


def one_form_names():
    return sorted(_ONE_FORMS)
