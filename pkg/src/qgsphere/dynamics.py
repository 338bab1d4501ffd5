"""Time integration of the quasigeostrophic equation in potential-vorticity
form, plus conserved-quantity diagnostics.

The prognostic variable is the potential vorticity
omega = Lap f - alpha2 f - beta cos(theta); the stream function f is
recovered each stage by Helmholtz inversion (mean-zero gauge).  The
tendency is

    d omega / dt = -{f, omega - a cos(theta)},

which covers both parameterizations of the planetary term: beta enters
through the definition of omega, the central charge a through the
cocycle term.  Running with (beta, a=0) or with (beta=0, a=beta) on the
same stream function produces identical tendencies.

Time stepping is explicit fixed-step RK4.  With the alias-free transform
grid the semi-discrete system conserves energy, enstrophy and mean
vorticity exactly; observed drifts come from time discretization only.
An optional hyperviscosity term -nu (-Lap)^p omega is available for long
turbulent runs but is off by default and is not part of the inviscid
equation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .spharm import (
    SphField,
    SphGrid,
    eval_at,
    grid_for,
    gradient_at,
    helmholtz_invert,
    jacobian_bracket,
    laplacian,
    max_speed,
    num_coeffs,
    sph_index,
    synthesize,
)

__all__ = [
    "QGParams",
    "QGState",
    "SolverBlowupError",
    "state_from_stream",
    "state_from_omega",
    "tendency",
    "step_rk4",
    "energy",
    "casimirs",
    "casimir_scales",
    "vorticity_range",
    "run",
    "RunSink",
]


class SolverBlowupError(RuntimeError):
    """Raised when the integration produces non-finite values."""


@dataclass
class QGParams:
    """Physical and integration parameters.

    alpha2   : squared rotational Froude number (>= 0).
    beta     : coefficient of cos(theta) in the potential vorticity.
    central_a: central-extension charge multiplying {f, cos(theta)}.
    dt       : fixed RK4 step (> 0).
    t_end    : integration horizon.
    lmax     : spectral band limit.
    dealias  : use the alias-free (2/3-rule) transform grid.
    hyper_nu, hyper_order : optional -nu (-Lap)^p omega stabilization,
        off by default (beyond the inviscid equation; excluded from all
        acceptance runs).
    """

    alpha2: float = 1.0
    beta: float = 0.0
    central_a: float = 0.0
    dt: float = 1e-3
    t_end: float = 1.0
    lmax: int = 42
    dealias: bool = True
    hyper_nu: float = 0.0
    hyper_order: int = 2

    def __post_init__(self):
        if self.alpha2 < 0:
            raise ValueError("alpha2 must be >= 0")
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.lmax < 1:
            raise ValueError("lmax must be >= 1")
        if self.hyper_nu < 0:
            raise ValueError("hyper_nu must be >= 0")

    def grid(self) -> SphGrid:
        if self.dealias:
            return grid_for(self.lmax)
        return grid_for(self.lmax, self.lmax + 1, None)


@dataclass
class QGState:
    """Potential vorticity + diagnosed stream function at a time."""

    time: float
    omega: SphField
    f: SphField

    @property
    def lmax(self) -> int:
        return self.omega.lmax

    def copy(self) -> "QGState":
        return QGState(self.time, self.omega.copy(), self.f.copy())


def _cos_theta_coeffs(lmax: int) -> np.ndarray:
    c = np.zeros(num_coeffs(lmax))
    c[sph_index(1, 0)] = np.sqrt(4.0 * np.pi / 3.0)
    return c


def _recover_stream(omega_coeffs: np.ndarray, params: QGParams) -> np.ndarray:
    lmax = params.lmax
    q = omega_coeffs + params.beta * _cos_theta_coeffs(lmax)
    f = helmholtz_invert(SphField(lmax, q), params.alpha2)
    return f.coeffs


def state_from_stream(f: SphField, params: QGParams, time: float = 0.0) -> QGState:
    """Build a consistent state from a stream function (gauged to zero mean)."""
    if f.lmax != params.lmax:
        raise ValueError("stream band limit differs from params.lmax")
    fc = f.coeffs.copy()
    fc[0] = 0.0
    omega = laplacian(SphField(params.lmax, fc)).coeffs - params.alpha2 * fc
    omega -= params.beta * _cos_theta_coeffs(params.lmax)
    omega[0] = 0.0  # canonical +0.0 in the gauge/solvability mode
    return QGState(time, SphField(params.lmax, omega), SphField(params.lmax, fc))


def state_from_omega(omega: SphField, params: QGParams, time: float = 0.0) -> QGState:
    """Build a state from potential vorticity.

    The mean of omega must vanish: the stream function is gauged to zero
    mean, and with int cos(theta) = 0 the consistency relation forces
    int omega = 0.  (It is conserved exactly by the dynamics.)
    """
    if omega.lmax != params.lmax:
        raise ValueError("omega band limit differs from params.lmax")
    scale = max(1.0, float(np.max(np.abs(omega.coeffs))))
    if abs(omega.coeffs[0]) > 1e-10 * scale:
        raise ValueError("omega must have zero spherical mean (solvability/gauge)")
    oc = omega.coeffs.copy()
    oc[0] = 0.0
    return QGState(time, SphField(params.lmax, oc), SphField(params.lmax, _recover_stream(oc, params)))


def consistency_residual(state: QGState, params: QGParams) -> float:
    """Max |omega - (Lap f - alpha2 f - beta cos)| over coefficients."""
    want = (
        laplacian(state.f).coeffs
        - params.alpha2 * state.f.coeffs
        - params.beta * _cos_theta_coeffs(params.lmax)
    )
    return float(np.max(np.abs(state.omega.coeffs - want)))


def _tendency_coeffs(
    omega_coeffs: np.ndarray, params: QGParams, grid: SphGrid
) -> tuple[np.ndarray, np.ndarray]:
    """d omega/dt and the stage stream function, from omega coefficients."""
    lmax = params.lmax
    fc = _recover_stream(omega_coeffs, params)
    q = omega_coeffs - params.central_a * _cos_theta_coeffs(lmax)
    domega = -jacobian_bracket(SphField(lmax, fc), SphField(lmax, q), grid).coeffs
    if params.hyper_nu > 0.0:
        l = grid._l_of_index
        domega = domega - params.hyper_nu * (l * (l + 1.0)) ** params.hyper_order * omega_coeffs
    return domega, fc


def tendency(state: QGState, params: QGParams) -> SphField:
    """d omega / dt = -{f, omega - a cos(theta)} at the given state."""
    grid = params.grid()
    domega, _ = _tendency_coeffs(state.omega.coeffs, params, grid)
    return SphField(params.lmax, domega)


def _particle_velocity(f_coeffs: np.ndarray, lmax: int, positions: np.ndarray) -> np.ndarray:
    """Hamiltonian velocity v = x cross grad f at unit 3-vectors."""
    grad = gradient_at(SphField(lmax, f_coeffs), positions)
    return np.cross(positions, grad)


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def _step_joint(
    omega_coeffs: np.ndarray,
    params: QGParams,
    grid: SphGrid,
    dt: float,
    positions: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray | None]:
    """One RK4 step of the field, optionally coupled with particle positions."""
    lmax = params.lmax
    k1, f1 = _tendency_coeffs(omega_coeffs, params, grid)
    k2, f2 = _tendency_coeffs(omega_coeffs + 0.5 * dt * k1, params, grid)
    k3, f3 = _tendency_coeffs(omega_coeffs + 0.5 * dt * k2, params, grid)
    k4, f4 = _tendency_coeffs(omega_coeffs + dt * k3, params, grid)
    new_omega = omega_coeffs + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(new_omega)):
        raise SolverBlowupError("non-finite potential vorticity; aborting")

    new_positions = None
    if positions is not None:
        v1 = _particle_velocity(f1, lmax, positions)
        p2 = _normalize_rows(positions + 0.5 * dt * v1)
        v2 = _particle_velocity(f2, lmax, p2)
        p3 = _normalize_rows(positions + 0.5 * dt * v2)
        v3 = _particle_velocity(f3, lmax, p3)
        p4 = _normalize_rows(positions + dt * v3)
        v4 = _particle_velocity(f4, lmax, p4)
        new_positions = _normalize_rows(
            positions + (dt / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4)
        )
        if not np.all(np.isfinite(new_positions)):
            raise SolverBlowupError("non-finite particle positions; aborting")
    return new_omega, new_positions


def step_rk4(state: QGState, params: QGParams, dt: float | None = None) -> QGState:
    """Advance one RK4 step (dt defaults to params.dt; negative dt = reversal)."""
    dt = params.dt if dt is None else dt
    grid = params.grid()
    new_omega, _ = _step_joint(state.omega.coeffs, params, grid, dt, None)
    return QGState(
        state.time + dt,
        SphField(params.lmax, new_omega),
        SphField(params.lmax, _recover_stream(new_omega, params)),
    )


def energy(state: QGState, params: QGParams) -> float:
    """Kinetic-energy metric value sum_{l>=1} (alpha2 + l(l+1)) |f_lm|^2.

    This is the spectral form of int f (alpha2 - Lap) f dOmega minus the
    projection on the degenerate constant direction; with the mean-zero
    gauge the l = 0 contribution cancels identically.
    """
    grid = grid_for(params.lmax)
    l = grid._l_of_index
    weights = params.alpha2 + l * (l + 1.0)
    fc = state.f.coeffs
    return float(np.sum(weights[1:] * fc[1:] ** 2))


def _casimir_grid(lmax: int, kmax: int) -> SphGrid:
    nlat = max(lmax + 2, (kmax * lmax) // 2 + 2)
    nlon = 8
    while nlon < max(2 * lmax + 2, kmax * lmax + 2):
        nlon *= 2
    return grid_for(lmax, nlat, nlon)


def casimirs(state: QGState, k_list: tuple[int, ...] = (1, 2, 3, 4)) -> list[float]:
    """int omega^k dOmega by quadrature on an internally upsampled grid."""
    kmax = max(k_list)
    if min(k_list) < 1:
        raise ValueError("Casimir exponents must be >= 1")
    grid = _casimir_grid(state.lmax, kmax)
    vals = synthesize(state.omega, grid)
    w2d = grid.quad_weights_2d()
    return [float(np.sum(w2d * vals**k)) for k in k_list]


def casimir_scales(state: QGState, k_list: tuple[int, ...] = (1, 2, 3, 4)) -> list[float]:
    """int |omega|^k dOmega, the natural normalizers for Casimir drift."""
    kmax = max(k_list)
    grid = _casimir_grid(state.lmax, kmax)
    vals = np.abs(synthesize(state.omega, grid))
    w2d = grid.quad_weights_2d()
    return [float(np.sum(w2d * vals**k)) for k in k_list]


def _polish_extremum(field: SphField, x0: np.ndarray, sign: float, iters: int = 40) -> float:
    """Projected gradient ascent on sign*field from x0; returns the extremal value."""
    x = x0 / np.linalg.norm(x0)
    val = sign * float(eval_at(field, x[None, :])[0])
    step = 0.05
    for _ in range(iters):
        g = gradient_at(field, x[None, :])[0] * sign
        gn = np.linalg.norm(g)
        if gn < 1e-14:
            break
        cand = x + step * g / gn
        cand /= np.linalg.norm(cand)
        cval = sign * float(eval_at(field, cand[None, :])[0])
        if cval > val:
            x, val = cand, cval
            step *= 1.3
        else:
            step *= 0.4
            if step < 1e-10:
                break
    return sign * val


def vorticity_range(state: QGState, refine: bool = False) -> tuple[float, float]:
    """(min, max) of omega on the synthesis grid; refine polishes the grid
    extrema by local ascent using exact point evaluation."""
    grid = grid_for(state.lmax) if not refine else _casimir_grid(state.lmax, 2)
    vals = synthesize(state.omega, grid)
    jmin, kmin = np.unravel_index(np.argmin(vals), vals.shape)
    jmax, kmax_ = np.unravel_index(np.argmax(vals), vals.shape)
    vmin = float(vals[jmin, kmin])
    vmax = float(vals[jmax, kmax_])
    if refine:
        def point(j, k):
            st = np.sqrt(1.0 - grid.mu[j] ** 2)
            return np.array([st * np.cos(grid.lon[k]), st * np.sin(grid.lon[k]), grid.mu[j]])

        vmin = _polish_extremum(state.omega, point(jmin, kmin), -1.0)
        vmax = _polish_extremum(state.omega, point(jmax, kmax_), +1.0)
    return vmin, vmax


def predicted_drift_magnitude(l: int, params: QGParams) -> float:
    """|c| = |beta| / (l(l+1) + alpha2): the angular drift rate of a
    degree-l harmonic stream function under the planetary term."""
    return abs(params.beta) / (l * (l + 1) + params.alpha2)


def measure_angular_drift(
    init: QGState, params: QGParams, l: int, m: int, sample_every: int = 10
) -> float:
    """Angular drift rate of the (l, m) stream-function pair over a run.

    Tracks the rotation of the (cos, sin) coefficient pair; for a steadily
    drifting wave f ~ P(mu) cos(m(lam - c t)) the pair rotates with phase
    m c t, so the fitted phase slope / m is the signed drift rate c.
    """
    if m <= 0:
        raise ValueError("drift measurement needs m > 0")
    ip = sph_index(l, m)
    im = sph_index(l, -m)
    times = []
    phases = []

    class PhaseSink(RunSink):
        def diagnostics(self, state: QGState, positions) -> None:
            times.append(state.time)
            phases.append(np.arctan2(state.f.coeffs[im], state.f.coeffs[ip]))

    run(init, params, PhaseSink(), diag_every=sample_every)
    t = np.array(times)
    ph = np.unwrap(np.array(phases))
    slope = np.polyfit(t - t[0], ph, 1)[0]
    return float(slope / m)


class RunSink:
    """Consumer of solver output; override any of the hooks."""

    def snapshot(self, state: QGState) -> None:  # pragma: no cover - default no-op
        pass

    def diagnostics(self, state: QGState, positions: np.ndarray | None) -> None:  # pragma: no cover
        pass


def run(
    init: QGState,
    params: QGParams,
    sink: RunSink | None = None,
    *,
    snapshot_every: int = 0,
    diag_every: int = 0,
    positions: np.ndarray | None = None,
    cfl_warn: bool = True,
) -> tuple[QGState, np.ndarray | None]:
    """Integrate n = round(t_end/dt) fixed steps, emitting snapshots and
    diagnostics at the given step cadences (0 = initial and final only).
    Optional particle positions are co-advected inside the same RK4 stages
    as the field."""
    grid = params.grid()
    nsteps = int(round(params.t_end / params.dt))
    if nsteps < 0:
        raise ValueError("t_end must be >= 0 for forward runs")

    if cfl_warn and nsteps > 0:
        umax = max_speed(init.f, grid)
        spacing = np.pi / grid.nlat
        if params.dt * umax > spacing:
            warnings.warn(
                f"dt*max|u| = {params.dt * umax:.3e} exceeds grid spacing {spacing:.3e}; "
                "the run may be under-resolved",
                stacklevel=2,
            )

    state = init.copy()
    pos = None if positions is None else np.array(positions, dtype=float)
    if sink is not None:
        sink.snapshot(state)
        sink.diagnostics(state, pos)
    omega = state.omega.coeffs.copy()
    time = state.time
    for step in range(1, nsteps + 1):
        omega, pos = _step_joint(omega, params, grid, params.dt, pos)
        time = init.time + step * params.dt
        emit_snap = sink is not None and (
            step == nsteps or (snapshot_every > 0 and step % snapshot_every == 0)
        )
        emit_diag = sink is not None and (
            step == nsteps or (diag_every > 0 and step % diag_every == 0)
        )
        if emit_snap or emit_diag:
            state = QGState(
                time,
                SphField(params.lmax, omega.copy()),
                SphField(params.lmax, _recover_stream(omega, params)),
            )
            if emit_snap:
                sink.snapshot(state)
            if emit_diag:
                sink.diagnostics(state, pos)
    final = QGState(
        time,
        SphField(params.lmax, omega),
        SphField(params.lmax, _recover_stream(omega, params)),
    )
    return final, pos
