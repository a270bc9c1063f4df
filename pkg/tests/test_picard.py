"""Picard slabs, contraction monitoring, dt adaptivity, eta continuation."""

import numpy as np
import pytest

from dnslab import grid as g
from dnslab import initdata, picard
from dnslab.errors import MaximalTimeError
from dnslab.linearized import State, StepConfig
from dnslab.model import Params


def smooth_setup(n=64, amp=0.05):
    gr = g.Grid(dim=1, n=n, length=1.0, boundary=g.PERIODIC)
    p = Params(A=1.0, gamma=2.0, alpha=1.0, beta=0.0, delta=1.5, rho_bar=1.0)
    state = initdata.build_smooth_state(
        gr, p, rho_amplitude=amp, rho_width=0.1, u_amplitude=amp, u_width=0.1
    )
    return gr, p, state


class TestConfigValidation:
    def test_empty_schedule_rejected(self):
        with pytest.raises(ValueError):
            picard.PicardConfig(eta_schedule=())

    def test_nondecreasing_schedule_rejected(self):
        with pytest.raises(ValueError):
            picard.PicardConfig(eta_schedule=(1e-3, 1e-2))

    def test_schedule_above_one_rejected(self):
        with pytest.raises(ValueError):
            picard.PicardConfig(eta_schedule=(2.0, 1e-2))

    def test_decreasing_schedule_accepted(self):
        pc = picard.PicardConfig(eta_schedule=(1e-2, 1e-3, 1e-4))
        assert pc.eta_schedule == (1e-2, 1e-3, 1e-4)

    def test_slab_dt(self):
        pc = picard.PicardConfig(cfg=StepConfig(dt=1e-3), ticks_per_slab=10)
        assert pc.slab_dt == pytest.approx(1e-2)


class TestPicardSlab:
    def test_constant_state_converges_in_one_iteration(self):
        gr = g.Grid(dim=1, n=32, length=1.0, boundary=g.PERIODIC)
        p = Params(rho_bar=1.0, eta=1e-2)
        state = State(np.full(gr.n, p.phi_bar), np.zeros(gr.n + (1,)), 0.0)
        pc = picard.PicardConfig(cfg=StepConfig(dt=1e-3))
        end, trace, traj, stats = picard.picard_slab(state, pc, p, gr)
        assert trace.converged
        assert trace.iterations == 1
        assert np.array_equal(end.phi, state.phi)

    def test_contraction_is_geometric_on_smooth_data(self):
        gr, p, state = smooth_setup()
        pc = picard.PicardConfig(cfg=StepConfig(dt=1e-3), ticks_per_slab=10,
                                 picard_tol=1e-12)
        end, trace, traj, stats = picard.picard_slab(state, pc, p, gr)
        assert trace.converged
        ratios = [b / a for a, b in zip(trace.gammas, trace.gammas[1:])]
        assert all(r < 0.9 for r in ratios), ratios

    def test_trajectory_length(self):
        gr, p, state = smooth_setup(n=32)
        pc = picard.PicardConfig(cfg=StepConfig(dt=1e-3), ticks_per_slab=7)
        _, _, traj, _ = picard.picard_slab(state, pc, p, gr)
        assert len(traj) == 8
        assert traj[0] is state

    def test_stats_totals(self):
        gr, p, state = smooth_setup(n=32)
        pc = picard.PicardConfig(cfg=StepConfig(dt=1e-3))
        _, trace, _, stats = picard.picard_slab(state, pc, p, gr)
        assert stats["picard_iters"] == trace.iterations
        assert stats["cg_iters"] > 0


class TestSolve:
    def test_reaches_t_end(self):
        gr, p, state = smooth_setup(n=64)
        pc = picard.PicardConfig(cfg=StepConfig(dt=1e-3),
                                 eta_schedule=(1e-3,))
        res = picard.solve(state, 0.02, pc, p, gr)
        assert res.final_state.t == pytest.approx(0.02)
        assert res.n_ticks == 20

    def test_observer_sees_every_tick(self):
        gr, p, state = smooth_setup(n=64)
        pc = picard.PicardConfig(cfg=StepConfig(dt=1e-3),
                                 eta_schedule=(1e-3,))
        times = []
        picard.solve(state, 0.02, pc, p, gr,
                     observer=lambda prev, cur, st, eta, dt: times.append(cur.t))
        assert len(times) == 20
        assert times == sorted(times)

    def test_noop_when_t_end_not_ahead(self):
        gr, p, state = smooth_setup(n=32)
        pc = picard.PicardConfig(cfg=StepConfig(dt=1e-3))
        res = picard.solve(state, 0.0, pc, p, gr)
        assert res.final_state.t == 0.0
        assert res.n_ticks == 0

    def test_unresolved_gradient_aborts_with_time(self):
        # sharp compression on a coarse grid trips the resolution monitor
        gr = g.Grid(dim=1, n=128, length=4.0, boundary=g.FAR_FIELD,
                    origin=(-2.0,))
        u0 = initdata.RadialScaledVelocity(
            -1.0, initdata.BumpProfile(1.8), dim=1
        )
        state = initdata.build_pure_vacuum_state(u0, gr)
        p = Params(delta=1.5, gamma=2.0, rho_bar=0.0)
        pc = picard.PicardConfig(cfg=StepConfig(dt=1e-2),
                                 eta_schedule=(0.0,), picard_tol=1e-10)
        with pytest.raises(MaximalTimeError) as exc_info:
            picard.solve(state, 10.0, pc, p, gr)
        assert 0.5 < exc_info.value.time < 2.0

    def test_eta_gaps_recorded_per_schedule_step(self):
        gr, p, state = smooth_setup(n=64)
        pc = picard.PicardConfig(cfg=StepConfig(dt=1e-3),
                                 eta_schedule=(1e-2, 1e-3))
        res = picard.solve(state, 0.01, pc, p, gr)
        assert len(res.eta_gaps) == 1
        ea, eb, gap = res.eta_gaps[0]
        assert (ea, eb) == (1e-2, 1e-3)
        assert gap > 0.0


class TestEtaRobustness:
    def test_needs_three_entries(self):
        gr, p, state = smooth_setup(n=32)
        pc = picard.PicardConfig(eta_schedule=(1e-2, 1e-3))
        with pytest.raises(ValueError):
            picard.eta_robustness(state, 0.01, pc, p, gr)

    def test_gaps_nonincreasing(self):
        gr, p, state = smooth_setup(n=64)
        pc = picard.PicardConfig(cfg=StepConfig(dt=1e-3),
                                 eta_schedule=(1e-2, 1e-3, 1e-4),
                                 picard_tol=1e-10)
        gaps = picard.eta_robustness(state, 0.02, pc, p, gr)
        vals = [gap for _, _, gap in gaps]
        assert all(b <= a for a, b in zip(vals, vals[1:])), vals
