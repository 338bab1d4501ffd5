"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
report.  The heavy turbulence fixtures are shared via module-scoped
fixtures; the whole suite is desk-scale (minutes).

Fixture notes.  The turbulence initial condition is the seeded random
band-limited stream function prescribed by the criteria; its free
amplitude is normalized to total energy TURB_ENERGY, chosen so the run is
genuinely nonlinear while the truncation-limited identities (pointwise
transport, extremum drift) stay inside their stated tolerances at
lmax = 64.  Relative drifts are measured against the natural scale of
each quantity: the initial value where it is sign-definite (energy,
enstrophy, int omega^4), and the initial integral of |omega|^k for the
sign-indefinite int omega^k (k = 1, 3).
"""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from qgsphere import contact as ct
from qgsphere.dynamics import (
    QGParams,
    casimir_scales,
    casimirs,
    energy,
    measure_angular_drift,
    predicted_drift_magnitude,
    run,
    state_from_stream,
    tendency,
    vorticity_range,
)
from qgsphere.io import parse_config, read_snapshot, write_snapshot
from qgsphere.lagrangian import (
    ParticleEnsemble,
    holder_bound_check,
    pairs_at_separations,
    pv_transport_residual,
    quasi_lipschitz_constant,
    random_ensemble,
)
from qgsphere.spharm import SphField, grid_for, sph_index, synthesize
from qgsphere.verify import analytic_panel, contact_suite, fd_panel, hopf_suite

from conftest import random_band_field

TURB_SEED = 424242
TURB_ENERGY = 0.04
TURB_BAND = (3, 10)
PARTICLE_SEED = 777
PAIR_SEED = 778


def report(cid: str, passed: bool, detail: str) -> None:
    print(f"ACCEPTANCE {cid}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, f"{cid}: {detail}"


def _turb_stream(lmax: int, params: QGParams) -> SphField:
    f = random_band_field(lmax, seed=TURB_SEED, lmin=TURB_BAND[0], lband=TURB_BAND[1])
    e = energy(state_from_stream(f, params), params)
    return f * np.sqrt(TURB_ENERGY / e)


@pytest.fixture(scope="module")
def turbulence_run_t5():
    params = QGParams(alpha2=1.0, beta=1.0, lmax=64, dt=1e-3, t_end=5.0)
    init = state_from_stream(_turb_stream(64, params), params)
    final, _ = run(init, params)
    return {"params": params, "init": init, "final": final}


@pytest.fixture(scope="module")
def transport_run_t2():
    params = QGParams(alpha2=1.0, beta=1.0, lmax=64, dt=1e-3, t_end=2.0)
    init = state_from_stream(_turb_stream(64, params), params)

    particles = random_ensemble(100, PARTICLE_SEED)
    rho0 = np.logspace(-4, 0, 50)
    pair_ens = pairs_at_separations(rho0, PAIR_SEED)
    pair_index = [(i + 100, j + 100) for i, j in pair_ens.pair_index]
    positions = np.concatenate([particles.positions, pair_ens.positions], axis=0)

    times = []
    sep_rows = []
    k_max = [0.0]

    from qgsphere.dynamics import RunSink

    class PairSink(RunSink):
        def diagnostics(self, state, pos):
            times.append(state.time)
            seps = np.array(
                [
                    np.arccos(np.clip(np.dot(pos[i], pos[j]), -1.0, 1.0))
                    for i, j in pair_index
                ]
            )
            sep_rows.append(seps)
            probe = ParticleEnsemble(pos.copy(), pair_index, state.time)
            k_max[0] = max(k_max[0], quasi_lipschitz_constant(state.f, probe).K)

    final, pos = run(init, params, PairSink(), diag_every=100, positions=positions)
    return {
        "params": params,
        "init": init,
        "final": final,
        "positions0": positions,
        "positions1": pos,
        "times": np.array(times),
        "separations": np.array(sep_rows),
        "K": k_max[0],
    }


def test_criterion_01_contact_identity_suite():
    t0 = time.perf_counter()
    results = contact_suite(arities=(1, 2), npoints=200)
    elapsed = time.perf_counter() - t0
    bad = [r for r in results if not r.passed]
    worst = max(results, key=lambda r: r.residual / r.threshold)
    report(
        "1 contact identities",
        not bad and elapsed < 10.0,
        f"{len(results)} checks, worst {worst.name} residual {worst.residual:.2e}, "
        f"runtime {elapsed:.1f}s"
        + ("" if not bad else "; FAILED: " + ", ".join(r.name for r in bad)),
    )


def test_criterion_02_adjoint_and_laplacian():
    from qgsphere.verify import _adjointness_check

    res1 = _adjointness_check(1)
    res2 = _adjointness_check(2)

    # composition vs the displayed n=1 closed form, exact-derivative panel
    pts = ct.sample_box_points(1, 200, seed=31)
    worst = 0.0
    for f in analytic_panel(1):
        comp = ct.s_theta_adjoint(ct.s_theta(f, check_points=pts[:8]))
        for p in pts[:60]:
            formula = (
                2.0 * f(p)
                - (2.0 * p[0] * f.partial(0, p) + (1.0 + p[0] ** 2) * f.partial2(0, 0, p))
                - f.partial2(1, 1, p)
            )
            worst = max(worst, abs(comp(p) - formula))
    ok = res1.passed and res2.passed and worst < 1e-8
    report(
        "2 adjoint/laplacian",
        ok,
        f"quadrature residuals n=1 {res1.residual:.2e}, n=2 {res2.residual:.2e} (tol 1e-6); "
        f"S*Sf vs closed form max {worst:.2e} (tol 1e-8)",
    )


def test_criterion_03_berger_hopf_reduction():
    import qgsphere.hopf as hopf

    t0 = time.perf_counter()
    qs = hopf.random_unit_quaternions(100, seed=13)
    worst = 0.0
    for l, m in ((1, 0), (2, 1), (3, 2)):
        field = SphField.harmonic(max(4, l), l, m)
        lift = hopf.lift_from_sphere(field)
        base = lift(qs)
        scale = float(np.max(np.abs(base)))
        for alpha2 in (0.5, 1.0, 4.0):
            got = hopf.berger_contact_laplacian(lift, hopf.BergerParams(np.sqrt(alpha2)), qs)
            want = (alpha2 + l * (l + 1)) * base
            rel = float(np.max(np.abs(got - want))) / ((alpha2 + l * (l + 1)) * scale)
            worst = max(worst, rel)
    elapsed = time.perf_counter() - t0
    report(
        "3 berger/hopf reduction",
        worst < 1e-4 and elapsed < 30.0,
        f"max relative residual {worst:.2e} (tol 1e-4), runtime {elapsed:.1f}s",
    )


def _sup_norm_diff(fa: SphField, fb: SphField) -> float:
    grid = grid_for(fa.lmax)
    return float(np.max(np.abs(synthesize(fa, grid) - synthesize(fb, grid))))


def test_criterion_04_steady_states():
    # (a) zonal initial data
    params = QGParams(alpha2=1.0, beta=1.0, lmax=42, dt=1e-3, t_end=10.0)
    fz = SphField.zeros(42)
    fz.coeffs[sph_index(2, 0)] = 0.6
    fz.coeffs[sph_index(4, 0)] = 0.4
    state = state_from_stream(fz, params)
    final, _ = run(state, params)
    da = _sup_norm_diff(final.f, state.f)

    # (b) single harmonic with beta = 0
    params_b = QGParams(alpha2=1.0, beta=0.0, lmax=42, dt=1e-3, t_end=10.0)
    state_b = state_from_stream(SphField.harmonic(42, 2, 1), params_b)
    final_b, _ = run(state_b, params_b)
    db = _sup_norm_diff(final_b.f, state_b.f)

    report(
        "4 steady states",
        da < 1e-8 and db < 1e-8,
        f"zonal sup drift {da:.2e}, Y21 sup drift {db:.2e} (tol 1e-8)",
    )


def test_criterion_05_rossby_drift():
    params = QGParams(alpha2=1.0, beta=1.0, lmax=42, dt=1e-3, t_end=10.0)
    state = state_from_stream(SphField.harmonic(42, 5, 3), params)
    predicted = predicted_drift_magnitude(5, params)
    assert abs(predicted - 1.0 / 31.0) < 1e-15
    measured = measure_angular_drift(state, params, 5, 3, sample_every=100)
    rel = abs(abs(measured) - predicted) / predicted
    report(
        "5 rossby drift",
        rel < 0.01,
        f"predicted |c| {predicted:.6f}, measured {abs(measured):.6f}, rel err {rel:.2e} (tol 1%)",
    )


def test_criterion_06_conservation_under_turbulence(turbulence_run_t5):
    params = turbulence_run_t5["params"]
    init = turbulence_run_t5["init"]
    final = turbulence_run_t5["final"]

    e0, e1 = energy(init, params), energy(final, params)
    c0 = casimirs(init, (1, 2, 3, 4))
    c1 = casimirs(final, (1, 2, 3, 4))
    scales = casimir_scales(init, (1, 2, 3, 4))
    r0 = vorticity_range(init, refine=True)
    r1 = vorticity_range(final, refine=True)

    d_energy = abs(e1 - e0) / abs(e0)
    d_mean = abs(c1[0] - c0[0]) / scales[0]
    d_enst = abs(c1[1] - c0[1]) / abs(c0[1])
    d_c3 = abs(c1[2] - c0[2]) / scales[2]
    d_c4 = abs(c1[3] - c0[3]) / abs(c0[3])
    d_min = abs(r1[0] - r0[0]) / abs(r0[0])
    d_max = abs(r1[1] - r0[1]) / abs(r0[1])

    ok = (
        d_energy < 1e-6
        and d_mean < 1e-12
        and d_enst < 1e-6
        and d_c3 < 1e-2
        and d_c4 < 1e-2
        and d_min < 1e-3
        and d_max < 1e-3
    )
    report(
        "6 turbulent conservation",
        ok,
        f"drifts: energy {d_energy:.2e} (1e-6), mean omega {d_mean:.2e} (1e-12), "
        f"enstrophy {d_enst:.2e} (1e-6), omega^3 {d_c3:.2e}, omega^4 {d_c4:.2e} (1e-2), "
        f"range {max(d_min, d_max):.2e} (1e-3)",
    )


def test_criterion_07_central_extension_equivalence():
    lmax = 42
    worst = 0.0
    for k in range(20):
        f = random_band_field(lmax, seed=9000 + k, lmin=1, lband=20)
        f = f * (0.3 / np.max(np.abs(f.coeffs)))
        pa = QGParams(alpha2=1.0, beta=1.0, central_a=0.0, lmax=lmax)
        pb = QGParams(alpha2=1.0, beta=0.0, central_a=1.0, lmax=lmax)
        ta = tendency(state_from_stream(f, pa), pa)
        tb = tendency(state_from_stream(f, pb), pb)
        worst = max(worst, float(np.max(np.abs(ta.coeffs - tb.coeffs))))
    report(
        "7 central extension",
        worst < 1e-12,
        f"max coefficient difference over 20 states {worst:.2e} (tol 1e-12)",
    )


def test_criterion_08_pv_transport(transport_run_t2):
    data = transport_run_t2
    res = pv_transport_residual(
        data["init"].omega,
        data["final"].omega,
        data["positions0"][:100],
        data["positions1"][:100],
    )
    report("8 pv transport", res < 1e-3, f"max residual over 100 particles {res:.2e} (tol 1e-3)")


def test_criterion_09_holder_pair_bound(transport_run_t2):
    data = transport_run_t2
    K = data["K"]
    rep = holder_bound_check(data["times"], data["separations"], K, slack=1.05)
    # the rho-form with L and exponent derived from K at the final horizon
    t_final = data["times"][-1] - data["times"][0]
    decay = np.exp(-K * t_final)
    L = np.e * np.pi ** (1.0 - decay)
    rho0 = data["separations"][0]
    rhoT = data["separations"][-1]
    rho_form_ok = bool(np.all(rhoT <= 1.05 * L * rho0**decay))
    report(
        "9 pair-separation bound",
        rep["passed"] and rho_form_ok,
        f"K {K:.3f}, worst margin {rep['worst_margin']:.3f} (>1 passes), "
        f"rho-form {'holds' if rho_form_ok else 'violated'}",
    )


def test_criterion_10_rk4_convergence():
    lmax = 32
    base = QGParams(alpha2=1.0, beta=1.0, lmax=lmax, dt=1e-2, t_end=0.1)
    f = random_band_field(lmax, seed=2024, lmin=2, lband=10)
    f = f * np.sqrt(1.0 / energy(state_from_stream(f, base), base))
    state = state_from_stream(f, base)

    def solve(dt):
        p = QGParams(alpha2=1.0, beta=1.0, lmax=lmax, dt=dt, t_end=0.1)
        final, _ = run(state, p, cfl_warn=False)
        return final.omega.coeffs

    ref = solve(1e-2 / 16)
    errs = [np.linalg.norm(solve(dt) - ref) for dt in (1e-2, 5e-3, 2.5e-3)]
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    ok = all(o >= 3.7 for o in orders)
    report(
        "10 rk4 convergence",
        ok,
        f"errors {[f'{e:.2e}' for e in errs]}, observed orders {[f'{o:.2f}' for o in orders]} (>= 3.7)",
    )


def test_criterion_11_determinism_and_format(tmp_path):
    cfg_text = (
        "lmax = 24\nalpha2 = 1.0\nbeta = 1.0\ndt = 0.002\nt_end = 0.2\n"
        "init = random-band 3 10 4242 0.25\nsnapshot_every = 50\ndiag_every = 50\nseed = 5\n"
    )
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "qgsphere", "solve", "--config", "/dev/stdin",
             "--output-dir", str(out)],
            input=cfg_text,
            capture_output=True,
            text=True,
            env={"QQG_THREADS": "1", "PATH": "/usr/bin:/bin", "PYTHONPATH": str(Path.cwd() / "src")},
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(out)
    snaps_a = sorted(outs[0].glob("*.qgs"))
    snaps_b = sorted(outs[1].glob("*.qgs"))
    identical = len(snaps_a) == len(snaps_b) > 0 and all(
        a.read_bytes() == b.read_bytes() for a, b in zip(snaps_a, snaps_b)
    )

    # snapshot write/read round trip is bit-exact
    params = QGParams(alpha2=1.0, beta=0.5, lmax=16)
    state = state_from_stream(random_band_field(16, seed=77, lmin=1), params, time=2.5)
    p1 = tmp_path / "rt1.qgs"
    p2 = tmp_path / "rt2.qgs"
    write_snapshot(state, params, p1)
    back, _ = read_snapshot(p1)
    write_snapshot(back, params, p2)
    round_trip = p1.read_bytes() == p2.read_bytes() and np.array_equal(
        back.omega.coeffs, state.omega.coeffs
    )
    report(
        "11 determinism & format",
        identical and round_trip,
        f"{len(snaps_a)} snapshot pairs bitwise identical: {identical}; "
        f"round trip bit-exact: {round_trip}",
    )
