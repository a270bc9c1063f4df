"""Nonlinear solver: Picard iteration over time slabs with frozen
coefficients from the previous iterate, contraction monitoring, dt
adaptivity and eta-continuation toward the vanishing artificial-viscosity
limit.

A slab of ticks_per_slab steps is iterated to a fixed point; iteration 0
freezes the coefficients at the slab's initial data.  A slab is rejected
(and dt halved) on CFL violation, linear-solver failure, non-contraction or
NaNs.  When dt falls below dt_min, or the velocity gradient can no longer be
resolved on the grid, the run aborts with MaximalTimeError carrying the
suspected blow-up time.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import grid as g
from .errors import (CFLError, MaximalTimeError, PicardError,
                     SolverConvergenceError)
from .linearized import FrozenCoeffs, State, StepConfig, linearized_tick
from .model import Params


@dataclass
class PicardConfig:
    cfg: StepConfig = field(default_factory=StepConfig)
    ticks_per_slab: int = 10
    max_picard_iters: int = 30
    picard_tol: float = 1e-8
    eta_schedule: tuple = (1e-2,)
    dt_min: float = 1e-8
    dt_growth: float = 1.5
    cfl_safety: float = 0.8
    # a velocity jump of this many field units across one cell means the
    # gradient is no longer resolved -> regularity loss
    grad_resolution_limit: float = 0.25

    def __post_init__(self):
        if self.picard_tol <= 0:
            raise ValueError("picard_tol must be positive")
        etas = tuple(self.eta_schedule)
        if not etas:
            raise ValueError("eta_schedule must be nonempty")
        if any(e < 0 for e in etas) or etas[0] >= 1:
            raise ValueError("eta_schedule entries must lie in [0, 1)")
        if any(b >= a for a, b in zip(etas[:-1], etas[1:])):
            raise ValueError("eta_schedule must be strictly decreasing")
        object.__setattr__(self, "eta_schedule", etas)

    @property
    def slab_dt(self):
        return self.ticks_per_slab * self.cfg.dt


@dataclass
class ContractionTrace:
    """Per-iteration Gamma^{k+1} values and weighted gradient increments."""

    gammas: list = field(default_factory=list)
    weighted_grad_increments: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0


def _state_gap_sq(a: State, b: State, gr: g.Grid):
    return g.l2_norm(a.phi - b.phi, gr) ** 2 + g.l2_norm(a.u - b.u, gr) ** 2


def picard_slab(state0: State, config: PicardConfig, p: Params, gr: g.Grid,
                dt=None, n_ticks=None):
    """Iterate the linearized problem over one slab to a fixed point.

    Returns (end_state, trace, trajectory, total_stats) where trajectory is
    the converged per-tick state list (length n_ticks + 1).
    """
    dt = config.cfg.dt if dt is None else dt
    n_ticks = config.ticks_per_slab if n_ticks is None else n_ticks
    cfg = replace(config.cfg, dt=dt)

    # iteration-0 coefficients: initial data frozen across the slab
    prev_traj = [state0] * (n_ticks + 1)
    trace = ContractionTrace()
    cg_total = 0
    clip_total = 0

    for k in range(config.max_picard_iters):
        traj = [state0]
        cg_iter = 0
        clip = 0
        for j in range(n_ticks):
            coeffs = FrozenCoeffs(prev_traj[j].phi, prev_traj[j].u)
            new_state, stats = linearized_tick(traj[j], coeffs, cfg, p, gr)
            traj.append(new_state)
            cg_iter += stats.cg_iterations
            clip += stats.clip_count
        cg_total += cg_iter
        clip_total = clip

        gamma = max(_state_gap_sq(a, b, gr) for a, b in zip(traj, prev_traj))
        wginc = sum(
            dt * g.l2_norm(a.phi[..., None, None] * g.jacobian(a.u - b.u, gr), gr) ** 2
            for a, b in zip(traj[1:], prev_traj[1:])
        )
        trace.gammas.append(gamma)
        trace.weighted_grad_increments.append(wginc)
        trace.iterations = k + 1
        if not np.isfinite(gamma):
            raise PicardError("non-finite Picard increment", trace)

        if gamma < config.picard_tol**2:
            trace.converged = True
            stats_totals = {"picard_iters": k + 1, "cg_iters": cg_total,
                            "clip_count": clip_total}
            return traj[-1], trace, traj, stats_totals

        # contraction monitor: growth after the first corrected iterate
        # signals a slab that is too long for the data
        if k >= 2 and gamma > trace.gammas[k - 1] * (1.0 + 1e-9):
            raise PicardError(
                f"Picard increment grew at iteration {k + 1} "
                f"({trace.gammas[k - 1]:.3e} -> {gamma:.3e})",
                trace,
            )
        prev_traj = traj

    raise PicardError(
        f"no contraction after {config.max_picard_iters} iterations "
        f"(last Gamma={trace.gammas[-1]:.3e})",
        trace,
    )


@dataclass
class RunResult:
    final_state: State
    eta_end_states: dict = field(default_factory=dict)
    eta_gaps: list = field(default_factory=list)
    traces: list = field(default_factory=list)
    n_ticks: int = 0


def _resolution_check(state: State, config: PicardConfig, gr: g.Grid):
    jmax = float(np.max(np.abs(g.jacobian(state.u, gr))))
    return gr.min_h * jmax <= config.grad_resolution_limit, jmax


def _run_horizon(state0: State, t_end, config: PicardConfig, p: Params,
                 gr: g.Grid, observer=None, collect_traces=None):
    """Chain Picard slabs from state0.t to t_end for one fixed eta."""
    state = state0.copy()
    dt = config.cfg.dt
    eps = 1e-12 * (1.0 + abs(t_end))
    while state.t < t_end - eps:
        ok, jmax = _resolution_check(state, config, gr)
        if not ok:
            # state-level failure: no dt can fix it, so the halving loop
            # bottoms out immediately
            raise MaximalTimeError(
                state.t, f"velocity gradient {jmax:.3e} unresolved at h={gr.min_h:.3e}"
            )
        umax = float(np.max(np.abs(state.u)))
        dt_stab = config.cfl_safety * gr.min_h / max(umax, 1e-300)
        if dt_stab < config.dt_min:
            raise MaximalTimeError(state.t, f"CFL dt {dt_stab:.3e} below floor")
        dt_try = min(dt, dt_stab)
        remaining = t_end - state.t
        n_ticks = config.ticks_per_slab
        if n_ticks * dt_try > remaining:
            n_ticks = max(1, int(np.ceil(remaining / dt_try - 1e-12)))
            dt_try = remaining / n_ticks
        try:
            end_state, trace, traj, stats = picard_slab(
                state, config, p, gr, dt=dt_try, n_ticks=n_ticks
            )
        except (CFLError, SolverConvergenceError, PicardError) as exc:
            dt = dt_try / 2.0
            if dt < config.dt_min:
                raise MaximalTimeError(state.t, str(exc)) from exc
            continue
        if collect_traces is not None:
            collect_traces.append(trace)
        if observer is not None:
            for prev, cur in zip(traj[:-1], traj[1:]):
                observer(prev, cur, stats, p.eta, dt_try)
        state = end_state
        dt = min(dt * config.dt_growth, config.cfg.dt)
    return state


def solve(state0: State, t_end, config: PicardConfig, p: Params, gr: g.Grid,
          observer=None):
    """Full run: one horizon sweep per eta-schedule entry.

    The observer, when given, is called as
    observer(prev_state, state, stats, eta, dt) after every accepted tick.
    The returned RunResult carries the final (smallest-eta) trajectory's end
    state, per-eta end states and sup-in-time inter-eta L2 gaps measured on
    per-tick samples.
    """
    if t_end <= state0.t:
        return RunResult(final_state=state0.copy())

    result = RunResult(final_state=state0.copy())
    samples = {}
    for idx, eta in enumerate(config.eta_schedule):
        p_eta = replace(p, eta=eta)
        is_last = idx == len(config.eta_schedule) - 1
        this_samples = []

        def tick_observer(prev, cur, stats, eta_val, dt,
                          _sink=this_samples, _fwd=is_last):
            _sink.append(cur)
            if _fwd and observer is not None:
                observer(prev, cur, stats, eta_val, dt)

        traces = result.traces if is_last else None
        end = _run_horizon(state0, t_end, config, p_eta, gr,
                           observer=tick_observer, collect_traces=traces)
        samples[eta] = this_samples
        result.eta_end_states[eta] = end
        if is_last:
            result.final_state = end
            result.n_ticks = len(this_samples)

    etas = config.eta_schedule
    for ea, eb in zip(etas[:-1], etas[1:]):
        sa, sb = samples[ea], samples[eb]
        m = min(len(sa), len(sb))
        gap = max(
            (np.sqrt(_state_gap_sq(sa[j], sb[j], gr)) for j in range(m)),
            default=0.0,
        )
        result.eta_gaps.append((ea, eb, float(gap)))
    return result


def eta_robustness(state0: State, t_end, config: PicardConfig, p: Params,
                   gr: g.Grid):
    """Sup-in-time L2 gaps between consecutive eta-schedule runs."""
    if len(config.eta_schedule) < 3:
        raise ValueError("eta_robustness needs at least 3 schedule entries")
    result = solve(state0, t_end, config, p, gr)
    return result.eta_gaps
