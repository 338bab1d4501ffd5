"""Solver tests: tendencies, steady states, drift oracle, conservation,
convergence, reversibility.

The traveling-wave drift rate c = beta / (l(l+1) + alpha2) is first derived
symbolically (sympy) from the evolution equation under the declared bracket
convention, then confirmed by short-time numerical phase tracking, and only
then asserted against the frozen 1/31 value used by the acceptance suite.
"""

import numpy as np
import pytest

from qgsphere.dynamics import (
    QGParams,
    QGState,
    SolverBlowupError,
    casimirs,
    consistency_residual,
    energy,
    measure_angular_drift,
    predicted_drift_magnitude,
    run,
    state_from_omega,
    state_from_stream,
    step_rk4,
    tendency,
    vorticity_range,
)
from qgsphere.spharm import (
    SphField,
    grid_for,
    inner_product,
    lambda_derivative,
    mu_derivative_scaled,
    sph_index,
    synthesize,
)

from conftest import random_band_field


def zonal_field(lmax, seed=0):
    f = SphField.zeros(lmax)
    rng = np.random.default_rng(seed)
    for l in range(1, min(6, lmax) + 1):
        f.coeffs[sph_index(l, 0)] = rng.standard_normal() * 0.5
    return f


class TestStateConstruction:
    def test_consistency_from_stream(self):
        params = QGParams(alpha2=1.3, beta=0.8, lmax=16)
        f = random_band_field(16, seed=1, lmin=1)
        state = state_from_stream(f, params)
        assert consistency_residual(state, params) < 1e-12

    def test_round_trip_omega_stream(self):
        params = QGParams(alpha2=0.7, beta=1.0, lmax=12)
        f = random_band_field(12, seed=2, lmin=1)
        s1 = state_from_stream(f, params)
        s2 = state_from_omega(s1.omega, params)
        assert np.max(np.abs(s2.f.coeffs - s1.f.coeffs)) < 1e-13

    def test_mean_zero_guard(self):
        params = QGParams(lmax=8)
        bad = SphField.harmonic(8, 0, 0, 1.0)
        with pytest.raises(ValueError):
            state_from_omega(bad, params)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            QGParams(alpha2=-1.0)
        with pytest.raises(ValueError):
            QGParams(dt=0.0)


class TestTendency:
    def test_zonal_state_is_steady(self):
        for beta in (0.0, 1.0):
            params = QGParams(alpha2=1.0, beta=beta, lmax=16)
            state = state_from_stream(zonal_field(16), params)
            dw = tendency(state, params)
            assert np.max(np.abs(dw.coeffs)) == 0.0

    def test_single_harmonic_beta0_is_steady(self):
        params = QGParams(alpha2=2.5, beta=0.0, lmax=16)
        state = state_from_stream(SphField.harmonic(16, 5, 3), params)
        dw = tendency(state, params)
        assert np.max(np.abs(dw.coeffs)) < 1e-13

    def test_rossby_symbolic_oracle(self):
        # independent oracle: the ansatz f = P(mu) cos(m (lam - c t)) with
        # omega = -(l(l+1)+alpha2) f - beta mu satisfies
        # omega_t + {f, omega} = 0 exactly when c = beta/(l(l+1)+alpha2),
        # under the bracket {a,b} = a_lam b_mu - a_mu b_lam.
        sympy = pytest.importorskip("sympy")
        mu, lam, t, beta, alpha2 = sympy.symbols("mu lam t beta alpha2", real=True)
        l, m = 5, 3
        kappa = l * (l + 1) + alpha2
        c = beta / kappa
        P = sympy.Function("P")(mu)
        f = P * sympy.cos(m * (lam - c * t))
        omega = -kappa * f - beta * mu

        def bracket(a, b):
            return sympy.diff(a, lam) * sympy.diff(b, mu) - sympy.diff(a, mu) * sympy.diff(b, lam)

        residual = sympy.simplify(sympy.diff(omega, t) + bracket(f, omega))
        assert residual == 0

    def test_rossby_numerical_phase_tracking(self):
        # short-time measurement against the symbolic value
        params = QGParams(alpha2=1.0, beta=1.0, lmax=16, dt=2e-3, t_end=1.0)
        state = state_from_stream(SphField.harmonic(16, 5, 3), params)
        measured = measure_angular_drift(state, params, 5, 3)
        assert abs(measured - 1.0 / 31.0) < 1e-6
        assert abs(abs(measured) - predicted_drift_magnitude(5, params)) < 1e-6

    def test_central_extension_equivalence(self):
        lmax = 16
        for seed in range(5):
            f = random_band_field(lmax, seed=100 + seed, lmin=1, lband=10)
            pa = QGParams(alpha2=1.0, beta=1.0, central_a=0.0, lmax=lmax)
            pb = QGParams(alpha2=1.0, beta=0.0, central_a=1.0, lmax=lmax)
            ta = tendency(state_from_stream(f, pa), pa)
            tb = tendency(state_from_stream(f, pb), pb)
            scale = max(1.0, np.max(np.abs(ta.coeffs)))
            assert np.max(np.abs(ta.coeffs - tb.coeffs)) < 1e-12 * scale

    def test_hyperviscosity_default_off_and_sign(self):
        lmax = 12
        f = random_band_field(lmax, seed=3, lmin=1)
        p0 = QGParams(alpha2=1.0, lmax=lmax)
        p1 = QGParams(alpha2=1.0, lmax=lmax, hyper_nu=1e-4, hyper_order=1)
        s = state_from_stream(f, p0)
        t0 = tendency(s, p0)
        t1 = tendency(s, p1)
        extra = t1.coeffs - t0.coeffs
        grid = grid_for(lmax)
        l = grid._l_of_index
        want = -1e-4 * (l * (l + 1.0)) * s.omega.coeffs
        assert np.max(np.abs(extra - want)) < 1e-12


class TestEnergy:
    def test_y10_energy_with_quadrature_oracle(self):
        # oracle: grid quadrature of alpha2 f^2 + |grad f|^2
        lmax = 8
        params = QGParams(alpha2=1.0, beta=0.0, lmax=lmax)
        f = SphField.harmonic(lmax, 1, 0)
        state = state_from_stream(f, params)
        grid = grid_for(lmax)
        vals = synthesize(f, grid)
        fl = synthesize(lambda_derivative(f), grid)
        fm = mu_derivative_scaled(f, grid)
        grad2 = (fl**2 + fm**2) / (1.0 - grid.mu**2)[:, None]
        oracle = inner_product(vals, vals, grid) * params.alpha2 + float(
            np.sum(grid.quad_weights_2d() * grad2)
        )
        got = energy(state, params)
        assert abs(got - oracle) < 1e-10
        assert abs(got - 3.0) < 1e-12  # alpha2 + l(l+1) = 1 + 2

    def test_constant_direction_degenerate(self):
        params = QGParams(alpha2=2.0, lmax=8)
        state = state_from_stream(SphField.harmonic(8, 0, 0, 5.0), params)
        # gauge projects the constant away; energy of the degenerate direction is 0
        assert energy(state, params) == 0.0

    def test_zero_field(self):
        params = QGParams(alpha2=1.0, lmax=8)
        state = state_from_stream(SphField.zeros(8), params)
        assert energy(state, params) == 0.0


class TestCasimirs:
    def test_mean_omega_zero_and_conserved(self):
        params = QGParams(alpha2=1.0, beta=1.0, lmax=16, dt=5e-3, t_end=0.5)
        state = state_from_stream(random_band_field(16, seed=5, lmin=1, lband=8) * 0.2, params)
        c0 = casimirs(state, (1,))[0]
        final, _ = run(state, params)
        c1 = casimirs(final, (1,))[0]
        assert abs(c0) < 1e-12
        assert abs(c1 - c0) < 1e-12

    def test_zonal_run_all_casimirs_constant(self):
        params = QGParams(alpha2=1.0, beta=1.0, lmax=12, dt=1e-2, t_end=1.0)
        state = state_from_stream(zonal_field(12), params)
        before = casimirs(state, (1, 2, 3, 4))
        final, _ = run(state, params)
        after = casimirs(final, (1, 2, 3, 4))
        for b, a in zip(before, after):
            assert abs(a - b) <= 1e-12 * max(1.0, abs(b))

    def test_enstrophy_short_run_drift(self):
        params = QGParams(alpha2=1.0, beta=0.5, lmax=24, dt=2e-3, t_end=0.5)
        f = random_band_field(24, seed=6, lmin=2, lband=8)
        f = f * (1.0 / np.sqrt(energy(state_from_stream(f, params), params)))
        state = state_from_stream(f, params)
        z0 = casimirs(state, (2,))[0]
        final, _ = run(state, params)
        z1 = casimirs(final, (2,))[0]
        assert abs(z1 - z0) / abs(z0) < 1e-10

    def test_exponent_validation(self):
        params = QGParams(lmax=8)
        state = state_from_stream(SphField.zeros(8), params)
        with pytest.raises(ValueError):
            casimirs(state, (0,))


class TestVorticityRange:
    def test_y10_symmetric(self):
        params = QGParams(alpha2=0.0, beta=0.0, lmax=8)
        state = state_from_omega(SphField.harmonic(8, 1, 0, 2.0), params)
        vmin, vmax = vorticity_range(state)
        assert abs(vmin + vmax) < 1e-10

    def test_steady_zonal_constant(self):
        params = QGParams(alpha2=1.0, beta=1.0, lmax=12, dt=1e-2, t_end=1.0)
        state = state_from_stream(zonal_field(12), params)
        r0 = vorticity_range(state)
        final, _ = run(state, params)
        r1 = vorticity_range(final)
        assert r0 == r1

    def test_refined_range_tighter_than_grid(self):
        params = QGParams(alpha2=0.0, beta=0.0, lmax=10)
        state = state_from_omega(SphField.harmonic(10, 4, 3), params)
        vmin_r, vmax_r = vorticity_range(state, refine=True)
        vmin_g, vmax_g = vorticity_range(state)
        assert vmax_r >= vmax_g - 1e-14
        assert vmin_r <= vmin_g + 1e-14


class TestStepping:
    def test_zonal_fixed_point_many_steps(self):
        params = QGParams(alpha2=1.0, beta=1.0, lmax=12, dt=1e-2, t_end=10.0)
        state = state_from_stream(zonal_field(12), params)
        final, _ = run(state, params)
        assert np.max(np.abs(final.f.coeffs - state.f.coeffs)) < 1e-10
        assert consistency_residual(final, params) < 1e-10

    def test_steady_eigenfunction_beta0(self):
        params = QGParams(alpha2=1.0, beta=0.0, lmax=12, dt=1e-2, t_end=1.0)
        state = state_from_stream(SphField.harmonic(12, 2, 1), params)
        final, _ = run(state, params)
        assert np.max(np.abs(final.f.coeffs - state.f.coeffs)) < 1e-8

    def test_rk4_convergence_order(self):
        lmax = 16
        base = QGParams(alpha2=1.0, beta=1.0, lmax=lmax, dt=0.0125, t_end=0.1)
        f = random_band_field(lmax, seed=8, lmin=2, lband=6)
        f = f * (2.0 / np.sqrt(energy(state_from_stream(f, base), base)))
        state = state_from_stream(f, base)

        def solve(dt):
            p = QGParams(alpha2=1.0, beta=1.0, lmax=lmax, dt=dt, t_end=0.1)
            final, _ = run(state, p, cfl_warn=False)
            return final.omega.coeffs

        ref = solve(0.0125 / 16)
        errs = [np.linalg.norm(solve(dt) - ref) for dt in (0.0125, 0.00625, 0.003125)]
        order1 = np.log2(errs[0] / errs[1])
        order2 = np.log2(errs[1] / errs[2])
        assert order1 > 3.7 and order2 > 3.7, (errs, order1, order2)

    def test_time_reversibility_is_dt4(self):
        lmax = 16
        base = QGParams(alpha2=1.0, beta=1.0, lmax=lmax)
        f = random_band_field(lmax, seed=9, lmin=2, lband=6)
        f = f * (1.0 / np.sqrt(energy(state_from_stream(f, base), base)))
        state = state_from_stream(f, base)

        def round_trip_error(dt, nsteps):
            params = QGParams(alpha2=1.0, beta=1.0, lmax=lmax, dt=dt)
            fwd = state
            for _ in range(nsteps):
                fwd = step_rk4(fwd, params)
            back = fwd
            for _ in range(nsteps):
                back = step_rk4(back, params, dt=-dt)
            return np.max(np.abs(back.omega.coeffs - state.omega.coeffs))

        e1 = round_trip_error(1e-2, 20)   # horizon t = 0.2 both ways
        e2 = round_trip_error(5e-3, 40)
        assert e1 < 1e-6
        ratio = e1 / e2
        # at least fourth order (the forward/backward pair actually cancels
        # the leading term, so the ratio tends to 2^5)
        assert ratio > 14.0, (e1, e2, ratio)

    def test_blowup_detection(self):
        params = QGParams(alpha2=1.0, lmax=8)
        state = state_from_stream(SphField.harmonic(8, 2, 1), params)
        state.omega.coeffs[3] = np.nan
        with pytest.raises(SolverBlowupError):
            step_rk4(state, params)

    def test_t_end_zero_returns_init(self):
        params = QGParams(alpha2=1.0, lmax=8, t_end=0.0)
        state = state_from_stream(SphField.harmonic(8, 3, 1), params)
        final, _ = run(state, params)
        assert final.time == state.time
        assert np.array_equal(final.omega.coeffs, state.omega.coeffs)


def test_cfl_warning():
    params = QGParams(alpha2=1.0, beta=0.0, lmax=12, dt=5.0, t_end=5.0)
    state = state_from_stream(SphField.harmonic(12, 2, 1, 50.0), params)
    with pytest.warns(UserWarning, match="grid spacing"):
        try:
            run(state, params)
        except SolverBlowupError:
            pass
