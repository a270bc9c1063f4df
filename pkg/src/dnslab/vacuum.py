"""Vacuum-region dynamics: free-transport residual monitoring, the exact
characteristics solution on vacuum, and the gradient blow-up predictor.

On vacuum the velocity obeys u_t + u.grad(u) = h; with h = 0 it is constant
along characteristics, so u(x,t) = u0(xi0) with xi0 = x - t u(x,t) and

    grad u(x,t) = (I + t grad u0(xi0))^{-1} grad u0(xi0).

The gradient blows up at the smallest positive root of
det(I + t grad u0) = 0, i.e. at -1/l for a negative real eigenvalue l.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grid as g
from .linearized import State
from .model import Params

DET_FLOOR = 1e-10


@dataclass
class VacuumReport:
    mask: np.ndarray
    residual_linf: float
    fraction: float


@dataclass
class BlowupPrediction:
    min_eigenvalue: float
    location: tuple
    predicted_time: float


class CharacteristicsBlowup(Exception):
    """det(I + t grad u0) fell below the floor: characteristics crossed."""

    def __init__(self, det, point):
        super().__init__(f"characteristic collapse: det={det:.3e} near {point}")
        self.det = det
        self.point = point


def vacuum_residual(prev_state: State, next_state: State, p: Params,
                    gr: g.Grid):
    """Discrete material-derivative residual |u_t + u.grad u - h| on vacuum.

    Vacuum nodes are those with phi below the threshold at both times; u_t is
    a backward difference of the two snapshots.
    """
    if next_state.t <= prev_state.t:
        raise ValueError("need t_next > t_prev")
    mask = (prev_state.phi < p.eps_vac) & (next_state.phi < p.eps_vac)
    fraction = float(np.mean(mask))
    if not mask.any():
        return VacuumReport(mask=mask, residual_linf=0.0, fraction=0.0)
    dt = next_state.t - prev_state.t
    ut = (next_state.u - prev_state.u) / dt
    adv = g.advect_vector(next_state.u, next_state.u, gr, pad=0.0)
    res = ut + adv
    if p.force is not None:
        res -= np.asarray(p.force(gr.nodes(), next_state.t))
    res_mag = np.max(np.abs(res), axis=-1)
    return VacuumReport(
        mask=mask,
        residual_linf=float(np.max(res_mag[mask])),
        fraction=fraction,
    )


def free_transport_exact(u0, x, t, tol=1e-12, max_iter=100,
                         det_floor=DET_FLOOR):
    """Exact vacuum velocity and gradient at point x, time t.

    u0 must expose u0(points) and u0.jacobian(points) (analytic initial-data
    object).  Solves xi0 = x - t*u0(xi0) by damped Newton; returns
    (u, grad_u).  Raises CharacteristicsBlowup when the map degenerates.
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[-1] if x.ndim else 1
    xi = x - t * np.asarray(u0(x))
    last_res = np.inf
    for _ in range(max_iter):
        fval = xi + t * np.asarray(u0(xi)) - x
        res = float(np.max(np.abs(fval)))
        if res <= tol:
            break
        J = np.eye(d) + t * np.asarray(u0.jacobian(xi))
        det = float(np.linalg.det(J))
        if abs(det) <= det_floor:
            raise CharacteristicsBlowup(det, tuple(np.atleast_1d(xi)))
        step = np.linalg.solve(J, fval)
        damping = 1.0
        # backtrack if the full Newton step does not reduce the residual
        while damping > 1e-4:
            trial = xi - damping * step
            tres = float(np.max(np.abs(trial + t * np.asarray(u0(trial)) - x)))
            if tres < res:
                xi = trial
                break
            damping *= 0.5
        else:
            raise CharacteristicsBlowup(det, tuple(np.atleast_1d(xi)))
        last_res = res
    else:
        raise CharacteristicsBlowup(0.0, tuple(np.atleast_1d(xi)))

    J0 = np.asarray(u0.jacobian(xi))
    A = np.eye(d) + t * J0
    det = float(np.linalg.det(A))
    if abs(det) <= det_floor:
        raise CharacteristicsBlowup(det, tuple(np.atleast_1d(xi)))
    grad_u = np.linalg.solve(A, J0)
    return np.asarray(u0(xi)), grad_u


def _det_poly_coeffs(J):
    """Coefficients of det(I + t J) as a polynomial in t (ascending order)."""
    d = J.shape[0]
    if d == 1:
        return [1.0, J[0, 0]]
    if d == 2:
        return [1.0, np.trace(J), np.linalg.det(J)]
    # d == 3: 1 + t tr(J) + t^2 (sum of 2x2 principal minors) + t^3 det(J)
    m = (
        J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        + J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0]
        + J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1]
    )
    return [1.0, np.trace(J), m, np.linalg.det(J)]


def first_positive_det_root(J, tol=1e-12):
    """Smallest t > 0 with det(I + t J) = 0, or inf when none exists."""
    coeffs = _det_poly_coeffs(np.asarray(J, dtype=float))
    # strip trailing (highest-order) zero coefficients for numpy.roots
    c = np.array(coeffs[::-1], dtype=float)
    while len(c) > 1 and c[0] == 0.0:
        c = c[1:]
    if len(c) <= 1:
        return np.inf
    roots = np.roots(c)
    best = np.inf
    for r in roots:
        if abs(r.imag) <= 1e-9 * max(1.0, abs(r.real)) and r.real > tol:
            best = min(best, float(r.real))
    return best


def predict_blowup(u0, points):
    """Scan grad u0 over sample points for the earliest gradient blow-up.

    points: array (m, d) of sample locations (e.g. nodes of a vacuum region).
    predicted_time is the minimum over points of the smallest positive root
    of det(I + t grad u0) = 0; min_eigenvalue is the most negative real
    eigenvalue found.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    best_time = np.inf
    best_loc = tuple(points[0])
    min_eig = np.inf
    eig_loc = tuple(points[0])
    for pt in points:
        J = np.atleast_2d(np.asarray(u0.jacobian(pt)))
        eigs = np.linalg.eigvals(J)
        for lam in eigs:
            if abs(lam.imag) <= 1e-9 * max(1.0, abs(lam.real)):
                if lam.real < min_eig:
                    min_eig = float(lam.real)
                    eig_loc = tuple(pt)
        t_star = first_positive_det_root(J)
        if t_star < best_time:
            best_time = t_star
            best_loc = tuple(pt)
    if min_eig is np.inf:
        min_eig = 0.0
    loc = best_loc if np.isfinite(best_time) else eig_loc
    return BlowupPrediction(
        min_eigenvalue=float(min_eig),
        location=loc,
        predicted_time=float(best_time),
    )
