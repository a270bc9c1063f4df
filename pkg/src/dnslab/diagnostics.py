"""Per-step diagnostics assembly and the conservative-form mass oracle.

The CSV schema (exact column order) is:

    t, dt, eta, mass, mass_drift, M, F, energy, I_expr1, I_expr2,
    jensen_lb, upper_ub, vac_fraction, vac_residual, phi_h3, u_h3,
    wgt_grad4, picard_iters, cg_iters, clip_count
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass

import numpy as np

from . import grid as g
from . import model
from .functionals import MomentSet, Region, jensen_bound, moments, upper_bound
from .linearized import State
from .model import Params
from .vacuum import VacuumReport, vacuum_residual

CSV_COLUMNS = [
    "t", "dt", "eta", "mass", "mass_drift", "M", "F", "energy",
    "I_expr1", "I_expr2", "jensen_lb", "upper_ub", "vac_fraction",
    "vac_residual", "phi_h3", "u_h3", "wgt_grad4", "picard_iters",
    "cg_iters", "clip_count",
]


@dataclass
class DiagnosticsRecord:
    t: float
    dt: float
    eta: float
    mass: float
    mass_drift: float
    M: float = float("nan")
    F: float = float("nan")
    energy: float = float("nan")
    I_expr1: float = float("nan")
    I_expr2: float = float("nan")
    jensen_lb: float = float("nan")
    upper_ub: float = float("nan")
    vac_fraction: float = 0.0
    vac_residual: float = 0.0
    phi_h3: float = 0.0
    u_h3: float = 0.0
    wgt_grad4: float = 0.0
    picard_iters: int = 0
    cg_iters: int = 0
    clip_count: int = 0

    def row(self):
        d = asdict(self)
        return [d[c] for c in CSV_COLUMNS]


def total_mass(state: State, p: Params, gr: g.Grid):
    return g.integrate(model.phi_to_rho(state.phi, p), gr)


def record(state: State, prev_state, p: Params, gr: g.Grid, dt, eta,
           mass0=None, region=None, bound_inputs=None, solver_stats=None,
           with_norms=True):
    """Assemble one fully-populated record; pure function of its inputs.

    bound_inputs, when given, is (I0, area0) for the closed-form upper bound.
    """
    mass = total_mass(state, p, gr)
    drift = 0.0
    if mass0 is not None:
        drift = abs(mass - mass0) / max(mass0, 1.0)

    rec = DiagnosticsRecord(
        t=state.t, dt=dt, eta=eta, mass=mass, mass_drift=drift,
    )
    if solver_stats:
        rec.picard_iters = int(solver_stats.get("picard_iters", 0))
        rec.cg_iters = int(solver_stats.get("cg_iters", 0))
        rec.clip_count = int(solver_stats.get("clip_count", 0))

    if region is not None:
        ms = moments(state, region, p, gr)
        rec.M = ms.second_moment
        rec.F = ms.radial_momentum
        rec.energy = ms.total_energy
        rec.I_expr1 = ms.functional_I
        rec.I_expr2 = ms.functional_I_alt
        if np.isfinite(region.initial_mass):
            rec.jensen_lb = jensen_bound(state.t, region, p)
        if bound_inputs is not None:
            I0, area0 = bound_inputs
            rec.upper_ub = float(upper_bound(state.t, p, I0, area0))

    if prev_state is not None:
        vac = vacuum_residual(prev_state, state, p, gr)
        rec.vac_fraction = vac.fraction
        rec.vac_residual = vac.residual_linf
    else:
        rec.vac_fraction = float(np.mean(state.phi < p.eps_vac))

    if with_norms and all(ni >= 9 for ni in gr.n):
        nr_phi = g.sobolev_norms(state.phi - p.phi_bar, gr)
        nr_u = g.sobolev_norms(state.u, gr, weight=state.phi)
        rec.phi_h3 = nr_phi.h3
        rec.u_h3 = nr_u.h3
        rec.wgt_grad4 = nr_u.weighted_grad4
    return rec


def write_csv(path, records):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for rec in records:
            w.writerow([repr(v) if isinstance(v, float) else v
                        for v in rec.row()])


def read_csv(path):
    """Re-parse a diagnostics CSV into DiagnosticsRecord objects."""
    out = []
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        if r.fieldnames != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV columns: {r.fieldnames}")
        for row in r:
            kwargs = {}
            for c in CSV_COLUMNS:
                if c in ("picard_iters", "cg_iters", "clip_count"):
                    kwargs[c] = int(row[c])
                else:
                    kwargs[c] = float(row[c])
            out.append(DiagnosticsRecord(**kwargs))
    return out


def conservative_mass_oracle(rho, u, dt, gr: g.Grid):
    """One step of rho_t + div(rho u) = 0 in first-order upwind flux form.

    Periodic grids only; total mass is preserved to roundoff by the
    telescoping flux sum.  Used as a cross-check of the primal phi-form
    transport, never inside the solver.
    """
    if gr.boundary != g.PERIODIC:
        raise ValueError("conservative mass oracle requires a periodic grid")
    gr.check_scalar(rho)
    gr.check_vector(u)
    out = rho.copy()
    for k in range(gr.dim):
        h = gr.h[k]
        u_right = 0.5 * (u[..., k] + np.roll(u[..., k], -1, axis=k))
        rho_right = np.roll(rho, -1, axis=k)
        flux_right = np.where(u_right >= 0, rho * u_right, rho_right * u_right)
        flux_left = np.roll(flux_right, 1, axis=k)
        out = out - dt * (flux_right - flux_left) / h
    return out
