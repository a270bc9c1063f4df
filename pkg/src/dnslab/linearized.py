"""One pass of the linearized problem with frozen coefficients (psi, v).

The transported field phi is advanced explicitly by upwind differences; the
velocity is advanced by a theta-implicit solve in the regularized diffusion
term (phi^2 + eta^2) L u, everything else explicit.  The implicit system is
divided by the coefficient a = phi^2 + eta^2 so that the operator

    M x = x / a + dt * theta * L x

is symmetric positive definite (L is self-adjoint for both boundary modes),
and solved by matrix-free Jacobi-preconditioned conjugate gradients.  On
vacuum nodes a is tiny and the solve degenerates to the explicit transport
update, which is exactly the hyperbolic limit of the model.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import grid as g
from . import model
from .errors import CFLError, SolverConvergenceError

# regularization floor for 1/a on exact-vacuum nodes with eta = 0
DEGENERATE_FLOOR = 1e-16

CFL_LIMIT = 0.9


@dataclass
class State:
    """Transformed density phi, velocity u and current time."""

    phi: np.ndarray
    u: np.ndarray
    t: float

    def copy(self):
        return State(self.phi.copy(), self.u.copy(), self.t)


@dataclass
class FrozenCoeffs:
    """The given functions (psi, v) of the linearized problem."""

    psi: np.ndarray
    v: np.ndarray


@dataclass
class StepConfig:
    dt: float = 1e-3
    solver_tol: float = 1e-10
    solver_max_iter: int = 2000
    theta: float = 1.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not 0.5 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0.5, 1]")
        if self.solver_tol <= 0:
            raise ValueError("solver_tol must be positive")


@dataclass
class TickStats:
    clip_count: int = 0
    cg_iterations: int = 0
    cg_residual: float = 0.0


def transport_step(phi, coeffs: FrozenCoeffs, cfg: StepConfig, p: model.Params,
                   gr: g.Grid):
    """Explicit upwind step of phi_t + v.grad(phi) + (delta-1)/2 psi div v = 0.

    Returns (phi_new, clip_count); the result is clipped at 0 from below.
    """
    vmax = float(np.max(np.abs(coeffs.v)))
    if cfg.dt * vmax / gr.min_h > CFL_LIMIT:
        raise CFLError(cfg.dt, CFL_LIMIT * gr.min_h / vmax)
    adv = g.advect(coeffs.v, phi, gr, pad=p.phi_bar)
    dv = g.div(coeffs.v, gr, pad=0.0)
    phi_new = phi - cfg.dt * (adv + 0.5 * (p.delta - 1.0) * coeffs.psi * dv)
    clip = int(np.sum(phi_new < 0))
    np.maximum(phi_new, 0.0, out=phi_new)
    return phi_new, clip


def _cg(apply_M, b, x0, diag, tol, max_iter):
    """Jacobi-preconditioned conjugate gradients, matrix-free.

    Reductions use np.dot on flattened arrays: deterministic for a fixed
    array size.
    """
    x = x0.copy()
    r = b - apply_M(x)
    bnorm = float(np.sqrt(np.dot(b.ravel(), b.ravel())))
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0
    rnorm = float(np.sqrt(np.dot(r.ravel(), r.ravel())))
    if rnorm <= tol * bnorm:
        return x, 0, rnorm / bnorm
    z = r / diag
    d = z.copy()
    rz = float(np.dot(r.ravel(), z.ravel()))
    for it in range(1, max_iter + 1):
        Md = apply_M(d)
        dMd = float(np.dot(d.ravel(), Md.ravel()))
        alpha = rz / dMd
        x += alpha * d
        r -= alpha * Md
        rnorm = float(np.sqrt(np.dot(r.ravel(), r.ravel())))
        if rnorm <= tol * bnorm:
            return x, it, rnorm / bnorm
        z = r / diag
        rz_new = float(np.dot(r.ravel(), z.ravel()))
        d = z + (rz_new / rz) * d
        rz = rz_new
    raise SolverConvergenceError(rnorm / bnorm, max_iter, tol)


def momentum_operator(inv_a, dt_theta, gr: g.Grid, p: model.Params):
    """Action and (approximate) diagonal of M x = x/a + dt*theta*L x."""

    def apply_M(x):
        return x * inv_a[..., None] + dt_theta * model.lame_L(x, gr, p, pad=0.0)

    diag_L = np.zeros(gr.dim)
    for c in range(gr.dim):
        diag_L[c] = p.alpha * sum(2.0 / h**2 for h in gr.h)
        diag_L[c] += (p.alpha + p.beta) * 0.5 / gr.h[c] ** 2
    diag = inv_a[..., None] + dt_theta * diag_L
    return apply_M, diag


def momentum_step(u, phi_new, coeffs: FrozenCoeffs, cfg: StepConfig,
                  p: model.Params, gr: g.Grid, force=None):
    """Theta-implicit solve for the velocity equation of the linearized tick.

    force, when given, is the explicit body-force field h(x, t^n) sampled on
    the grid (shape (*n, d)).
    """
    a = phi_new**2 + p.eta**2
    inv_a = 1.0 / np.maximum(a, DEGENERATE_FLOOR)

    # explicit right-hand side
    adv = g.advect_vector(coeffs.v, u, gr, pad=0.0)
    pfield = model.fractional_power(phi_new, p.pressure_exponent)
    pgrad = (p.A * p.gamma / (p.gamma - 1.0)) * g.grad(
        pfield, gr, pad=p.phi_bar**p.pressure_exponent
    )
    Qv = model.q_operator(coeffs.v, gr, p, pad=0.0)
    gphi2 = g.grad(phi_new**2, gr, pad=p.phi_bar**2)
    coupling = np.einsum("...i,...ij->...j", gphi2, Qv)

    rhs = u - cfg.dt * (adv + pgrad - coupling)
    if cfg.theta < 1.0:
        rhs -= cfg.dt * (1.0 - cfg.theta) * a[..., None] * model.lame_L(
            u, gr, p, pad=0.0
        )
    if force is not None:
        rhs += cfg.dt * force

    dt_theta = cfg.dt * cfg.theta
    apply_M, diag = momentum_operator(inv_a, dt_theta, gr, p)
    b = rhs * inv_a[..., None]
    x, iters, res = _cg(apply_M, b, rhs, diag, cfg.solver_tol, cfg.solver_max_iter)
    return x, TickStats(cg_iterations=iters, cg_residual=res)


def linearized_tick(state: State, coeffs: FrozenCoeffs, cfg: StepConfig,
                    p: model.Params, gr: g.Grid):
    """Transport then momentum; advances t by dt.  Returns (state', stats)."""
    phi_new, clip = transport_step(state.phi, coeffs, cfg, p, gr)
    force = None
    if p.force is not None:
        force = np.asarray(p.force(gr.nodes(), state.t))
    u_new, stats = momentum_step(state.u, phi_new, coeffs, cfg, p, gr, force)
    stats.clip_count = clip
    return State(phi_new, u_new, state.t + cfg.dt), stats
