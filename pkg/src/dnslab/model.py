"""Physical parameters, the phi <-> rho transform, pressure and the
operators L (Lame), S (stress) and Q evaluated on discrete fields.

The velocity equation is written in terms of phi = rho^((delta-1)/2); all
fractional powers of phi are evaluated with the convention 0^q = 0 for q > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import grid as g

VACUUM_EPS = 1e-8


@dataclass
class Params:
    """Physical and numerical constants of the flow model.

    force, when given, is h(x, t): a callable (points, t) -> vector values
    added to the right-hand side of the velocity equation.
    """

    A: float = 1.0
    gamma: float = 2.0
    alpha: float = 1.0
    beta: float = 0.0
    delta: float = 1.5
    rho_bar: float = 0.0
    eta: float = 1e-2
    force: Optional[Callable] = None
    eps_vac: float = VACUUM_EPS

    @property
    def K(self):
        """Derived exponent 4(gamma-1)/(delta-1); admissible data give K >= 8."""
        return 4.0 * (self.gamma - 1.0) / (self.delta - 1.0)

    @property
    def phi_bar(self):
        return self.rho_bar ** ((self.delta - 1.0) / 2.0)

    @property
    def pressure_exponent(self):
        """Exponent of phi in the pressure-gradient term, (2 gamma - 2)/(delta - 1)."""
        return (2.0 * self.gamma - 2.0) / (self.delta - 1.0)

    @property
    def q_factor(self):
        return self.delta / (self.delta - 1.0)


def validate_params(p: Params):
    """Returns the list of violated admissibility constraints (empty = ok)."""
    violations = []
    if not p.A > 0:
        violations.append("A > 0 fails")
    if not p.gamma > 1:
        violations.append("gamma > 1 fails")
    if not p.alpha > 0:
        violations.append("alpha > 0 fails")
    if not 2 * p.alpha + 3 * p.beta >= 0:
        violations.append("2*alpha + 3*beta >= 0 fails")
    if not p.delta > 1:
        violations.append("delta > 1 fails")
    else:
        cap = min((p.gamma + 1.0) / 2.0, 3.0)
        if p.delta > cap + 1e-14:
            if p.delta > 3.0:
                violations.append("delta <= 3 fails")
            else:
                violations.append("delta <= (gamma+1)/2 fails")
    if not p.rho_bar >= 0:
        violations.append("rho_bar >= 0 fails")
    if not 0 < p.eta < 1:
        violations.append("eta in (0,1) fails")
    return violations


def fractional_power(f, exponent):
    """f**exponent with 0**q = 0 for q > 0 and no warnings at vacuum nodes."""
    f = np.asarray(f, dtype=float)
    out = np.zeros_like(f)
    pos = f > 0
    out[pos] = np.exp(exponent * np.log(f[pos]))
    return out


def rho_to_phi(rho, p: Params):
    """phi = rho^((delta-1)/2), the nonnegative root."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        idx = np.unravel_index(int(np.argmin(rho)), rho.shape)
        idx = tuple(int(i) for i in idx)
        raise ValueError(f"negative density {rho[idx]:.3e} at node {idx}")
    return fractional_power(rho, (p.delta - 1.0) / 2.0)


def phi_to_rho(phi, p: Params):
    """rho = phi^(2/(delta-1)); inverse of rho_to_phi away from vacuum."""
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < 0):
        idx = np.unravel_index(int(np.argmin(phi)), phi.shape)
        idx = tuple(int(i) for i in idx)
        raise ValueError(f"negative phi {phi[idx]:.3e} at node {idx}")
    return fractional_power(phi, 2.0 / (p.delta - 1.0))


def pressure(rho, p: Params):
    """P = A rho^gamma."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("negative density in pressure()")
    return p.A * fractional_power(rho, p.gamma)


def lame_L(u, gr: g.Grid, p: Params, pad=0.0):
    """Lu = -alpha lap(u) - (alpha+beta) grad(div u), centered second order."""
    gr.check_vector(u)
    lap = np.stack(
        [g.laplacian(u[..., c], gr, pad) for c in range(gr.dim)], axis=-1
    )
    dv = g.div(u, gr, pad)
    graddiv = g.grad(dv, gr, 0.0)
    return -p.alpha * lap - (p.alpha + p.beta) * graddiv


def stress_S(u, gr: g.Grid, p: Params, pad=0.0):
    """S(u) = alpha (grad u + grad u^T) + beta div u I, shape (*n, d, d)."""
    J = g.jacobian(u, gr, pad)
    dv = np.trace(J, axis1=-2, axis2=-1)
    eye = np.eye(gr.dim)
    return p.alpha * (J + np.swapaxes(J, -1, -2)) + p.beta * dv[..., None, None] * eye


def q_operator(u, gr: g.Grid, p: Params, pad=0.0):
    """Q(u) = delta/(delta-1) S(u)."""
    return p.q_factor * stress_S(u, gr, p, pad)


def div_tensor(T, gr: g.Grid, pad=0.0):
    """(div T)_j = sum_i d_i T_ij for a (*n, d, d) tensor field."""
    out = np.zeros(gr.n + (gr.dim,))
    for j in range(gr.dim):
        for i in range(gr.dim):
            out[..., j] += g.d1(T[..., i, j], i, gr, pad)
    return out


def viscous_stress(rho, u, gr: g.Grid, p: Params, pad=0.0):
    """T = rho^delta S(u), the physical viscous stress tensor."""
    return fractional_power(rho, p.delta)[..., None, None] * stress_S(u, gr, p, pad)
