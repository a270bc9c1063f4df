"""Material-region tracking and the blow-up functional machinery.

Regions are advected marker clouds rasterized to node masks; the moments
m, M, F, energy and the functional

    I(t) = M - 2(t+1) F + 2(t+1)^2 energy
         = int |x - (t+1) u|^2 rho + 2/(gamma-1) (t+1)^2 int P

are integrated over the current mask.  The convexity (Jensen) lower bound
and the regime-dependent closed-form upper bounds give a certified finite
crossing time for admissible parameters, which the contradiction monitor
reports.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as sp_integrate
from scipy.interpolate import RegularGridInterpolator
from scipy.spatial import ConvexHull, Delaunay

from . import grid as g
from . import model
from .errors import RegionEscapeError
from .linearized import State
from .model import Params


@dataclass
class Region:
    """Tracked material region: marker cloud plus rasterized node mask."""

    markers: np.ndarray
    mask: np.ndarray
    initial_volume: float
    initial_mass: float = float("nan")

    def volume(self):
        return hull_volume(self.markers)


def hull_volume(markers):
    markers = np.atleast_2d(markers)
    d = markers.shape[1]
    if d == 1:
        return float(np.max(markers) - np.min(markers))
    return float(ConvexHull(markers).volume)


def rasterize(markers, gr: g.Grid):
    """Boolean node mask of the convex hull of the markers."""
    markers = np.atleast_2d(markers)
    nodes = gr.nodes().reshape(-1, gr.dim)
    if gr.dim == 1:
        lo, hi = float(np.min(markers)), float(np.max(markers))
        mask = (nodes[:, 0] >= lo) & (nodes[:, 0] <= hi)
    else:
        tri = Delaunay(markers)
        mask = tri.find_simplex(nodes) >= 0
    return mask.reshape(gr.n)


def region_from_ball(center, radius, gr: g.Grid, markers=None):
    """Region over a ball: boundary markers plus a small interior fill."""
    center = np.asarray(center, dtype=float)
    d = gr.dim
    if markers is None:
        markers = {1: 8, 2: 96, 3: 256}[d]
    if d == 1:
        pts = center[0] + radius * np.linspace(-1.0, 1.0, max(markers, 4))
        pts = pts[:, None]
    elif d == 2:
        angles = np.linspace(0.0, 2 * np.pi, markers, endpoint=False)
        pts = center + radius * np.stack(
            [np.cos(angles), np.sin(angles)], axis=-1
        )
    else:
        # Fibonacci sphere
        i = np.arange(markers)
        z = 1.0 - 2.0 * (i + 0.5) / markers
        r = np.sqrt(1.0 - z**2)
        phi = np.pi * (1.0 + np.sqrt(5.0)) * i
        pts = center + radius * np.stack(
            [r * np.cos(phi), r * np.sin(phi), z], axis=-1
        )
    mask = rasterize(pts, gr)
    return Region(markers=pts, mask=mask, initial_volume=hull_volume(pts))


def _velocity_interpolator(u, gr: g.Grid):
    axes = [np.asarray(a) for a in gr.axes()]
    values = u
    if gr.boundary == g.PERIODIC:
        # append the wrapped first node so markers can live in the last cell
        axes = [np.append(a, a[0] + L) for a, L in zip(axes, gr.length)]
        pad_width = [(0, 1)] * gr.dim + [(0, 0)]
        values = np.pad(u, pad_width, mode="wrap")
    try:
        return RegularGridInterpolator(axes, values, method="linear",
                                       bounds_error=True)
    except ValueError as exc:  # pragma: no cover
        raise RegionEscapeError(str(exc)) from exc


def advance_flow_map(region: Region, u, dt, gr: g.Grid):
    """Advance every marker by explicit midpoint RK2 through the flow map."""
    interp = _velocity_interpolator(u, gr)
    x = region.markers

    def wrap(pts):
        if gr.boundary != g.PERIODIC:
            return pts
        out = pts.copy()
        for k in range(gr.dim):
            out[:, k] = gr.origin[k] + np.mod(
                out[:, k] - gr.origin[k], gr.length[k]
            )
        return out

    try:
        k1 = interp(wrap(x))
        k2 = interp(wrap(x + 0.5 * dt * k1))
    except ValueError as exc:
        raise RegionEscapeError(f"marker left the domain: {exc}") from exc
    new_markers = x + dt * k2
    if gr.boundary != g.PERIODIC:
        for k in range(gr.dim):
            lo = gr.origin[k]
            hi = gr.origin[k] + gr.length[k]
            if np.any(new_markers[:, k] < lo) or np.any(new_markers[:, k] > hi):
                raise RegionEscapeError("marker left the domain after advance")
    mask = rasterize(new_markers, gr)
    return Region(
        markers=new_markers,
        mask=mask,
        initial_volume=region.initial_volume,
        initial_mass=region.initial_mass,
    )


@dataclass
class MomentSet:
    t: float
    m: float
    second_moment: float
    radial_momentum: float
    total_energy: float
    functional_I: float
    functional_I_alt: float
    jensen_lower_bound: float = float("nan")
    upper_bound: float = float("nan")


I_IDENTITY_RTOL = 1e-10


def moments(state: State, region: Region, p: Params, gr: g.Grid,
            check_identity=True):
    """Moments over the region mask plus both expressions of I(t).

    The two I expressions are an algebraic identity; a mismatch beyond
    roundoff indicates a discretization fault and raises.
    """
    if region.mask.shape != gr.n:
        raise ValueError("region mask does not match grid")
    t = state.t
    rho = model.phi_to_rho(state.phi, p)
    P = model.pressure(rho, p)
    nodes = gr.nodes()
    x2 = np.sum(nodes**2, axis=-1)
    u2 = np.sum(state.u**2, axis=-1)
    ux = np.sum(state.u * nodes, axis=-1)

    m = g.integrate(rho, gr, region.mask)
    M = g.integrate(rho * x2, gr, region.mask)
    F = g.integrate(rho * ux, gr, region.mask)
    energy = g.integrate(0.5 * rho * u2 + P / (p.gamma - 1.0), gr, region.mask)

    s = t + 1.0
    I1 = M - 2.0 * s * F + 2.0 * s**2 * energy
    core = np.sum((nodes - s * state.u) ** 2, axis=-1)
    I2 = g.integrate(core * rho, gr, region.mask) + (
        2.0 / (p.gamma - 1.0)
    ) * s**2 * g.integrate(P, gr, region.mask)

    if check_identity and abs(I1 - I2) > I_IDENTITY_RTOL * (1.0 + abs(I1)):
        raise AssertionError(
            f"I(t) dual-expression identity violated: {I1!r} vs {I2!r}"
        )
    return MomentSet(
        t=t,
        m=m,
        second_moment=M,
        radial_momentum=F,
        total_energy=energy,
        functional_I=I1,
        functional_I_alt=I2,
    )


def jensen_bound(t, region: Region, p: Params, m0=None):
    """Convexity lower bound 2A/(gamma-1) (1+t)^2 |A0|^(1-gamma) m(0)^gamma.

    Uses volume invariance of the tracked region and mass conservation, so
    |A0| and m(0) are the recorded initial values.
    """
    m0 = region.initial_mass if m0 is None else m0
    if not np.isfinite(m0):
        raise ValueError("initial mass m(0) not recorded on the region")
    if m0 == 0.0:
        return 0.0
    a0 = region.initial_volume
    return (
        (2.0 * p.A / (p.gamma - 1.0))
        * (1.0 + t) ** 2
        * a0 ** (1.0 - p.gamma)
        * m0**p.gamma
    )


def bound_constants(p: Params, area0):
    """The explicit constants of the upper-bound ODE solutions."""
    visc = 18.0 * (p.beta + 2.0 * p.alpha / 3.0)
    a1 = visc * p.delta * (p.gamma - 1.0) / (2.0 * p.A * p.gamma)
    a2 = visc * (p.gamma - p.delta) / p.gamma * area0
    return a1, a2


def upper_bound(t, p: Params, I0, area0):
    """Closed-form upper bound on I(t) for the matching gamma regime.

    gamma >= 5/3:    e^{a1} (I(0) + a2 t)
    gamma  = 4/3:    (t+1) e^{a1 (1 - 1/(t+1))} (I(0) + a2 ln(t+1))
    else (<5/3):     (t+1)^{2-3(gamma-1)} e^{-a1/(t+1)} *
                     (e^{a1} I(0) + a2 int_0^t (tau+1)^{3(gamma-1)-2}
                                               e^{a1/(tau+1)} d tau)
    """
    a1, a2 = bound_constants(p, area0)
    gm = p.gamma
    t = np.asarray(t, dtype=float)
    if gm >= 5.0 / 3.0:
        return np.exp(a1) * (I0 + a2 * t)
    q = 3.0 * (gm - 1.0) - 2.0
    if abs(q + 1.0) < 1e-12:  # gamma = 4/3: logarithmic branch
        return (t + 1.0) * np.exp(a1 * (1.0 - 1.0 / (t + 1.0))) * (
            I0 + a2 * np.log(t + 1.0)
        )

    def single(tv):
        integral, _ = sp_integrate.quad(
            lambda tau: (tau + 1.0) ** q * np.exp(a1 / (tau + 1.0)), 0.0, tv
        )
        return (
            (tv + 1.0) ** (-q)
            * np.exp(-a1 / (tv + 1.0))
            * (np.exp(a1) * I0 + a2 * integral)
        )

    if t.ndim == 0:
        return single(float(t))
    return np.array([single(tv) for tv in t])


def analytic_crossing_time(p: Params, I0, area0, region: Region, m0=None,
                           t_max=1e12, rtol=1e-9):
    """First t where the Jensen lower bound exceeds the upper bound.

    Bracketing by doubling, then bisection to relative tolerance.  Returns
    inf when no crossing below t_max exists (e.g. m(0) = 0).
    """
    m0 = region.initial_mass if m0 is None else m0
    if not np.isfinite(m0) or m0 <= 0.0:
        return np.inf

    def gap(t):
        return jensen_bound(t, region, p, m0) - upper_bound(t, p, I0, area0)

    lo, hi = 0.0, 1.0
    while gap(hi) <= 0.0:
        lo = hi
        hi *= 2.0
        if hi > t_max:
            return np.inf
    while hi - lo > rtol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass
class ContradictionVerdict:
    crossed: bool
    first_crossing_time: float       # first recorded step with lb > ub
    analytic_crossing_time: float    # bisection on the closed-form curves


def contradiction_monitor(history, p: Params, I0, area0, region: Region,
                          m0=None):
    """history: iterable of (t, jensen_lb, upper_ub) records."""
    first = np.inf
    for t, lb, ub in history:
        if lb > ub:
            first = t
            break
    analytic = analytic_crossing_time(p, I0, area0, region, m0=m0)
    return ContradictionVerdict(
        crossed=np.isfinite(first),
        first_crossing_time=float(first),
        analytic_crossing_time=float(analytic),
    )


def viscous_work_slack(state: State, p: Params, gr: g.Grid, region=None):
    """Integrated slack of div(u T) >= u . div T + (beta + 2 alpha/3)
    rho^delta (div u)^2 over the region (nonnegative up to discretization)."""
    rho = model.phi_to_rho(state.phi, p)
    T = model.viscous_stress(rho, state.u, gr, p)
    uT = np.einsum("...i,...ij->...j", state.u, T)
    div_uT = g.div(uT, gr)
    u_divT = np.sum(state.u * model.div_tensor(T, gr), axis=-1)
    dv = g.div(state.u, gr)
    quad = (p.beta + 2.0 * p.alpha / 3.0) * model.fractional_power(
        rho, p.delta
    ) * dv**2
    mask = region.mask if region is not None else None
    return g.integrate(div_uT - u_divT - quad, gr, mask)
