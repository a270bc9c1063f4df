"""Structured initial data: analytic Jacobians, isolated mass groups and
hyperbolic singularity sets."""

import numpy as np
import pytest

from dnslab import grid as g
from dnslab import initdata, model
from dnslab.model import Params


class TestAnalyticJacobians:
    """Every velocity family must carry an exact Jacobian; verified against
    central differences (the check raises on mismatch)."""

    def sample_points(self, dim, seed=0):
        return np.random.default_rng(seed).uniform(-0.8, 0.8, size=(20, dim))

    def test_linear(self):
        u0 = initdata.LinearVelocity([[0.3, -1.2], [0.7, 0.1]], c=[1.0, -2.0])
        assert u0.check_jacobian(self.sample_points(2))

    @pytest.mark.parametrize("dim", [1, 2, 3])
    @pytest.mark.parametrize("profile", [
        initdata.GaussianProfile(0.5),
        initdata.PlateauProfile(0.2, 0.6),
        initdata.BumpProfile(0.7),
    ])
    def test_radial(self, dim, profile):
        u0 = initdata.RadialScaledVelocity(-0.9, profile, dim=dim)
        assert u0.check_jacobian(self.sample_points(dim), tol=1e-5)

    def test_shear(self):
        u0 = initdata.ShearVelocity(initdata.GaussianProfile(0.6))
        assert u0.check_jacobian(self.sample_points(2))

    def test_rotation(self):
        u0 = initdata.RotationVelocity(omega=0.7)
        assert u0.check_jacobian(self.sample_points(2))


class TestProfiles:
    def test_bump_compact_support(self):
        b = initdata.BumpProfile(0.5)
        q = np.array([0.0, 0.24, 0.25, 1.0])
        vals = b.value(q)
        assert vals[0] == pytest.approx(1.0)
        assert vals[2] == 0.0 and vals[3] == 0.0
        assert b.deriv(q)[2] == 0.0

    def test_plateau_is_one_inside(self):
        pl = initdata.PlateauProfile(0.3, 0.6)
        assert pl.value(np.array([0.05]))[0] == pytest.approx(1.0)
        assert pl.value(np.array([0.5]))[0] == pytest.approx(0.0, abs=1e-12)

    def test_plateau_rejects_bad_radii(self):
        with pytest.raises(ValueError):
            initdata.PlateauProfile(0.6, 0.3)


class TestIsolatedMassGroup:
    def build(self, n=128):
        gr = g.Grid(dim=1, n=n, length=4.0, boundary=g.FAR_FIELD,
                    origin=(-2.0,))
        p = Params(gamma=1.4, delta=1.2, rho_bar=0.0)
        spec = initdata.IsolatedMassGroupSpec(
            center=(0.0,), r_inner=0.8, r_outer=1.5, amplitude=1.0,
            boundary_velocity=(0.25,),
            inner_velocity=initdata.RadialScaledVelocity(
                -0.5, initdata.BumpProfile(0.7), dim=1
            ),
        )
        state, ra, rb = initdata.build_isolated_mass_group(spec, gr, p)
        return gr, p, spec, state, ra, rb

    def test_annulus_is_exact_vacuum(self):
        gr, p, spec, state, ra, rb = self.build()
        q = np.sum(gr.nodes() ** 2, axis=-1)
        annulus = (q >= spec.r_inner**2) & (q <= spec.r_outer**2)
        assert np.all(state.phi[annulus] == 0.0)

    def test_mass_concentrated_in_inner_ball(self):
        gr, p, spec, state, ra, rb = self.build()
        rho = model.phi_to_rho(state.phi, p)
        assert g.integrate(rho, gr, ra.mask) > 0.0
        assert g.integrate(rho, gr) == pytest.approx(
            g.integrate(rho, gr, rb.mask)
        )

    def test_velocity_constant_on_collar_and_beyond(self):
        gr, p, spec, state, ra, rb = self.build()
        q = np.sum(gr.nodes() ** 2, axis=-1)
        outside = q >= spec.r_inner**2
        assert np.allclose(state.u[outside], 0.25, atol=1e-14)

    def test_rejects_zero_amplitude(self):
        gr = g.Grid(dim=1, n=64, length=4.0, boundary=g.FAR_FIELD,
                    origin=(-2.0,))
        spec = initdata.IsolatedMassGroupSpec(
            center=(0.0,), r_inner=0.8, r_outer=1.5, amplitude=0.0
        )
        with pytest.raises(ValueError, match="amplitude"):
            initdata.build_isolated_mass_group(spec, gr, Params())

    def test_rejects_collar_overflow(self):
        gr = g.Grid(dim=1, n=64, length=4.0, boundary=g.FAR_FIELD,
                    origin=(-2.0,))
        spec = initdata.IsolatedMassGroupSpec(
            center=(0.0,), r_inner=0.8, r_outer=0.81, amplitude=1.0
        )
        with pytest.raises(ValueError):
            initdata.build_isolated_mass_group(spec, gr, Params())


class TestHyperbolicSingularity:
    def test_compression_accepted_with_prediction(self):
        gr = g.Grid(dim=2, n=48, length=4.0, boundary=g.FAR_FIELD,
                    origin=(-2.0, -2.0))
        u0 = initdata.LinearVelocity([[-1.0, 0.0], [0.0, 0.5]])
        state, region, pred = initdata.build_hyperbolic_singularity_data(
            (0.0, 0.0), 0.5, u0, gr, Params(rho_bar=0.0), rng=0
        )
        assert pred.predicted_time == pytest.approx(1.0)
        assert np.all(state.phi == 0.0)

    def test_rotation_rejected(self):
        # skew gradient: spectrum is imaginary, no hyperbolic point exists
        gr = g.Grid(dim=2, n=48, length=4.0, boundary=g.FAR_FIELD,
                    origin=(-2.0, -2.0))
        u0 = initdata.RotationVelocity(omega=1.0)
        with pytest.raises(ValueError, match="eigenvalue"):
            initdata.build_hyperbolic_singularity_data(
                (0.0, 0.0), 0.5, u0, gr, Params(rho_bar=0.0), rng=0
            )

    def test_nonzero_far_density_ramp(self):
        gr = g.Grid(dim=1, n=256, length=8.0, boundary=g.FAR_FIELD,
                    origin=(-4.0,))
        u0 = initdata.LinearVelocity([[-1.0]])
        p = Params(rho_bar=1.0)
        state, region, pred = initdata.build_hyperbolic_singularity_data(
            (0.0,), 0.5, u0, gr, p, rho_outside=1.0, rng=0
        )
        q = np.sum(gr.nodes() ** 2, axis=-1)
        assert np.all(state.phi[q < 0.25] == 0.0)
        assert state.phi[0] == pytest.approx(p.phi_bar)


class TestSmoothState:
    def test_constant_background(self):
        gr = g.Grid(dim=1, n=32, length=1.0, boundary=g.PERIODIC)
        p = Params(rho_bar=2.0)
        state = initdata.build_smooth_state(gr, p)
        assert np.allclose(state.phi, p.phi_bar)
        assert np.all(state.u == 0.0)

    def test_negative_density_rejected(self):
        gr = g.Grid(dim=1, n=32, length=1.0, boundary=g.PERIODIC)
        p = Params(rho_bar=0.5)
        with pytest.raises(ValueError, match="amplitude"):
            initdata.build_smooth_state(gr, p, rho_amplitude=-1.0)
