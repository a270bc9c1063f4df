"""Constructors for structured initial data: smooth far-field perturbations,
isolated mass groups (compact mass surrounded by a vacuum annulus with
constant boundary velocity) and hyperbolic singularity sets (vacuum regions
whose initial velocity gradient has a negative real eigenvalue).

Analytic velocity objects carry exact Jacobians so the characteristics
oracle can be evaluated at arbitrary points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import grid as g
from . import model
from .functionals import Region, region_from_ball
from .linearized import State
from .vacuum import predict_blowup


# ---------------------------------------------------------------------------
# scalar radial profiles b(q), q = |x - c|^2, with exact derivative db/dq
# ---------------------------------------------------------------------------

class GaussianProfile:
    """b(q) = exp(-q / w^2)."""

    def __init__(self, width):
        self.w2 = float(width) ** 2

    def value(self, q):
        return np.exp(-q / self.w2)

    def deriv(self, q):
        return -np.exp(-q / self.w2) / self.w2


class PlateauProfile:
    """1 on q <= q_in, quintic-smoothstep down to 0 at q = q_out (C^2)."""

    def __init__(self, r_inner, r_outer):
        if not 0 <= r_inner < r_outer:
            raise ValueError("need 0 <= r_inner < r_outer")
        self.q_in = float(r_inner) ** 2
        self.q_out = float(r_outer) ** 2

    def _s(self, t):
        # quintic smoothstep and derivative on [0, 1]
        t = np.clip(t, 0.0, 1.0)
        return (
            1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t**2),
            -(30.0 * t**2 - 60.0 * t**3 + 30.0 * t**4),
        )

    def value(self, q):
        t = (q - self.q_in) / (self.q_out - self.q_in)
        return self._s(t)[0]

    def deriv(self, q):
        t = (q - self.q_in) / (self.q_out - self.q_in)
        return self._s(t)[1] / (self.q_out - self.q_in)


class BumpProfile:
    """C-infinity bump exp(1 - 1/(1 - q/r^2)) inside radius r, 0 outside."""

    def __init__(self, radius):
        self.r2 = float(radius) ** 2

    def value(self, q):
        q = np.asarray(q, dtype=float)
        out = np.zeros_like(q)
        inside = q < self.r2 * (1.0 - 1e-12)
        s = q[inside] / self.r2
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s))
        return out

    def deriv(self, q):
        q = np.asarray(q, dtype=float)
        out = np.zeros_like(q)
        inside = q < self.r2 * (1.0 - 1e-12)
        s = q[inside] / self.r2
        out[inside] = -np.exp(1.0 - 1.0 / (1.0 - s)) / (self.r2 * (1.0 - s) ** 2)
        return out


# ---------------------------------------------------------------------------
# analytic velocity fields with exact Jacobians
# ---------------------------------------------------------------------------

class AnalyticVelocity:
    """Base: subclasses implement __call__(points) and jacobian(points).

    points has shape (..., d); values have shape (..., d) and Jacobians
    (..., d, d) with J[..., i, j] = d u_i / d x_j.
    """

    dim = None

    def __call__(self, points):
        raise NotImplementedError

    def jacobian(self, points):
        raise NotImplementedError

    def check_jacobian(self, points, step=1e-5, tol=1e-6):
        """Central-difference consistency check of the analytic Jacobian."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        d = points.shape[-1]
        J = np.atleast_2d(self.jacobian(points))
        for j in range(d):
            e = np.zeros(d)
            e[j] = step
            fd = (np.asarray(self(points + e)) - np.asarray(self(points - e))) / (
                2 * step
            )
            err = np.max(np.abs(fd - np.asarray(J)[..., j]))
            if err > tol:
                raise AssertionError(
                    f"Jacobian column {j} off by {err:.3e} (tol {tol:.1e})"
                )
        return True


class LinearVelocity(AnalyticVelocity):
    """u(x) = c + B x."""

    def __init__(self, B, c=None):
        self.B = np.atleast_2d(np.asarray(B, dtype=float))
        self.dim = self.B.shape[0]
        self.c = np.zeros(self.dim) if c is None else np.asarray(c, dtype=float)

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        return self.c + points @ self.B.T

    def jacobian(self, points):
        points = np.asarray(points, dtype=float)
        return np.broadcast_to(self.B, points.shape[:-1] + self.B.shape).copy()


class RadialScaledVelocity(AnalyticVelocity):
    """u(x) = s * (x - c) * b(|x - c|^2) with an exact Jacobian.

    s < 0 is compression (negative eigenvalues of grad u0 near the center),
    s > 0 expansion.
    """

    def __init__(self, scale, profile, center=None, dim=1):
        self.s = float(scale)
        self.profile = profile
        self.dim = dim
        self.c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        r = points - self.c
        q = np.sum(r**2, axis=-1)
        return self.s * r * self.profile.value(q)[..., None]

    def jacobian(self, points):
        points = np.asarray(points, dtype=float)
        r = points - self.c
        q = np.sum(r**2, axis=-1)
        b = self.profile.value(q)
        db = self.profile.deriv(q)
        eye = np.eye(self.dim)
        outer = r[..., :, None] * r[..., None, :]
        return self.s * (b[..., None, None] * eye + 2.0 * db[..., None, None] * outer)


class ShearVelocity(AnalyticVelocity):
    """2D shear u = (x2 * b(|x|^2), 0): nilpotent Jacobian, Sp = {0}."""

    def __init__(self, profile, center=None):
        self.profile = profile
        self.dim = 2
        self.c = np.zeros(2) if center is None else np.asarray(center, dtype=float)

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        r = points - self.c
        q = np.sum(r**2, axis=-1)
        out = np.zeros_like(r)
        out[..., 0] = r[..., 1] * self.profile.value(q)
        return out

    def jacobian(self, points):
        points = np.asarray(points, dtype=float)
        r = points - self.c
        q = np.sum(r**2, axis=-1)
        b = self.profile.value(q)
        db = self.profile.deriv(q)
        J = np.zeros(points.shape[:-1] + (2, 2))
        J[..., 0, 0] = r[..., 1] * db * 2.0 * r[..., 0]
        J[..., 0, 1] = b + r[..., 1] * db * 2.0 * r[..., 1]
        return J


class RotationVelocity(AnalyticVelocity):
    """2D rigid rotation u = omega * (-x2, x1): skew Jacobian, no blow-up."""

    def __init__(self, omega=1.0, center=None):
        self.omega = float(omega)
        self.dim = 2
        self.c = np.zeros(2) if center is None else np.asarray(center, dtype=float)

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        r = points - self.c
        return self.omega * np.stack([-r[..., 1], r[..., 0]], axis=-1)

    def jacobian(self, points):
        points = np.asarray(points, dtype=float)
        J = np.array([[0.0, -self.omega], [self.omega, 0.0]])
        return np.broadcast_to(J, points.shape[:-1] + (2, 2)).copy()


def sample_on_grid(u0: AnalyticVelocity, gr: g.Grid):
    return np.asarray(u0(gr.nodes()))


# ---------------------------------------------------------------------------
# state constructors
# ---------------------------------------------------------------------------

@dataclass
class IsolatedMassGroupSpec:
    center: tuple
    r_inner: float           # radius of the mass-carrying ball A0
    r_outer: float           # radius of the vacuum-enclosing ball B0
    amplitude: float = 1.0   # peak density of the C-inf bump in A0
    boundary_velocity: tuple = None   # constant u0 on the collar of dA0
    inner_velocity: AnalyticVelocity = None
    collar_width: float = None        # blend width around dA0 (default 4h)


def build_isolated_mass_group(spec: IsolatedMassGroupSpec, gr: g.Grid,
                              p: model.Params, markers_per_region=None):
    """State with rho0 a C-inf bump in A0, rho0 = 0 on B0 \\ A0, and u0
    equal to the constant boundary velocity on a collar around dA0.

    Returns (state0, region_A, region_B).
    """
    if spec.amplitude <= 0:
        raise ValueError("density amplitude must be positive (mass in A0 required)")
    if not 0 < spec.r_inner < spec.r_outer:
        raise ValueError("need 0 < r_inner < r_outer")
    center = np.asarray(spec.center, dtype=float)
    if center.shape != (gr.dim,):
        raise ValueError("center dimension mismatch")
    collar = spec.collar_width if spec.collar_width is not None else 4 * gr.min_h
    if collar < 3 * gr.min_h:
        raise ValueError("collar width below 3 grid spacings")
    if spec.r_inner + collar >= spec.r_outer:
        raise ValueError("A0 collar not strictly inside B0 on this grid")

    nodes = gr.nodes()
    q = np.sum((nodes - center) ** 2, axis=-1)
    rho0 = spec.amplitude * BumpProfile(spec.r_inner).value(q)
    # the annulus is vacuum by construction: set, not computed
    rho0[q >= spec.r_inner**2] = 0.0
    phi0 = model.rho_to_phi(rho0, p)

    ubar = (
        np.zeros(gr.dim)
        if spec.boundary_velocity is None
        else np.asarray(spec.boundary_velocity, dtype=float)
    )
    u0 = np.broadcast_to(ubar, gr.n + (gr.dim,)).copy()
    if spec.inner_velocity is not None:
        inner = np.asarray(spec.inner_velocity(nodes))
        # blend to the constant boundary value over the collar inside dA0
        r = np.sqrt(q)
        t = np.clip((r - (spec.r_inner - collar)) / collar, 0.0, 1.0)
        w = 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t**2)
        u0 = ubar + w[..., None] * (inner - ubar)

    region_a = region_from_ball(center, spec.r_inner, gr,
                                markers=markers_per_region)
    region_b = region_from_ball(center, spec.r_outer, gr,
                                markers=markers_per_region)
    return State(phi=phi0, u=u0, t=0.0), region_a, region_b


def build_hyperbolic_singularity_data(center, radius, u0: AnalyticVelocity,
                                      gr: g.Grid, p: model.Params,
                                      rho_outside=0.0, collar_width=None,
                                      n_samples=64, rng=None):
    """Vacuum ball V with a velocity whose gradient has a negative real
    eigenvalue somewhere in V.  Returns (state0, region_V, prediction).

    Raises ValueError when the spectral condition fails at every sample.
    """
    center = np.asarray(center, dtype=float)
    nodes = gr.nodes()
    q = np.sum((nodes - center) ** 2, axis=-1)
    collar = collar_width if collar_width is not None else 4 * gr.min_h
    if rho_outside > 0:
        t = np.clip((np.sqrt(q) - radius) / collar, 0.0, 1.0)
        ramp = t**3 * (10.0 - 15.0 * t + 6.0 * t**2)
        rho0 = rho_outside * ramp
    else:
        rho0 = np.zeros(gr.n)
    phi0 = model.rho_to_phi(rho0, p)

    rng = np.random.default_rng(rng)
    pts = rng.uniform(-radius, radius, size=(4 * n_samples, gr.dim))
    pts = pts[np.sum(pts**2, axis=-1) < radius**2][:n_samples] + center
    if len(pts) == 0:
        pts = center[None, :]
    pred = predict_blowup(u0, pts)
    if not np.isfinite(pred.predicted_time):
        raise ValueError(
            "no negative real eigenvalue of grad u0 found in V: "
            "not a hyperbolic singularity set"
        )

    region_v = region_from_ball(center, radius, gr)
    state = State(phi=phi0, u=sample_on_grid(u0, gr), t=0.0)
    state.analytic_u0 = u0
    return state, region_v, pred


def build_smooth_state(gr: g.Grid, p: model.Params, rho_amplitude=0.0,
                       rho_width=0.25, u_amplitude=0.0, u_width=0.25,
                       center=None):
    """Gaussian perturbation of the constant far-field state (rho_bar, 0)."""
    nodes = gr.nodes()
    if center is None:
        center = np.array(
            [gr.origin[k] + 0.5 * gr.length[k] for k in range(gr.dim)]
        )
    q = np.sum((nodes - np.asarray(center)) ** 2, axis=-1)
    rho0 = p.rho_bar + rho_amplitude * np.exp(-q / rho_width**2)
    if np.any(rho0 < 0):
        raise ValueError("negative density: perturbation amplitude too large")
    phi0 = model.rho_to_phi(rho0, p)
    u0 = gr.zeros_vector()
    if u_amplitude != 0.0:
        u0[..., 0] = u_amplitude * np.exp(-q / u_width**2)
    return State(phi=phi0, u=u0, t=0.0)


def build_pure_vacuum_state(u0: AnalyticVelocity, gr: g.Grid):
    """phi identically zero with the analytic velocity sampled on the grid."""
    state = State(phi=gr.zeros(), u=sample_on_grid(u0, gr), t=0.0)
    state.analytic_u0 = u0
    return state
