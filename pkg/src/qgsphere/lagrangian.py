"""Particle advection by the Hamiltonian velocity of a stream function,
potential-vorticity transport residuals, and the quasi-Lipschitz /
pair-separation diagnostics from the global-existence argument.

The velocity is v = x cross grad f (tangent by construction), the skew
gradient consistent with the bracket convention: as a derivation,
v(g) = {f, g}.  Off-grid values come from direct spherical-harmonic
summation, so advection and transport tests carry no grid-interpolation
error.  Distances are great-circle, the sphere diameter is R = pi, and
parallel transport along minimal arcs is the rotation in the plane of the
two points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spharm import SphField, eval_at, gradient_at

__all__ = [
    "SPHERE_DIAMETER",
    "ParticleEnsemble",
    "HolderDiag",
    "random_ensemble",
    "pairs_at_separations",
    "velocity_at",
    "advect",
    "pv_transport_residual",
    "great_circle_distance",
    "parallel_transport",
    "quasi_lipschitz_constant",
    "separation_bound",
    "holder_bound_check",
]

SPHERE_DIAMETER = np.pi


@dataclass
class ParticleEnsemble:
    """Unit 3-vector positions, tracked index pairs, and the ensemble time."""

    positions: np.ndarray
    pair_index: list[tuple[int, int]] = field(default_factory=list)
    time: float = 0.0

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        norms = np.linalg.norm(self.positions, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-9:
            raise ValueError("particle positions must be unit vectors")
        self.positions = self.positions / norms[:, None]

    def copy(self) -> "ParticleEnsemble":
        return ParticleEnsemble(self.positions.copy(), list(self.pair_index), self.time)

    def pair_separations(self) -> np.ndarray:
        return np.array(
            [
                great_circle_distance(self.positions[i], self.positions[j])
                for i, j in self.pair_index
            ]
        )


def random_ensemble(count: int, seed: int) -> ParticleEnsemble:
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((count, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    return ParticleEnsemble(pts)


def pairs_at_separations(separations: np.ndarray, seed: int) -> ParticleEnsemble:
    """An ensemble of point pairs (2k positions) at prescribed great-circle
    separations, each pair at a random location/orientation."""
    rng = np.random.default_rng(seed)
    positions = []
    pair_index = []
    for idx, rho in enumerate(np.asarray(separations, dtype=float)):
        x = rng.standard_normal(3)
        x /= np.linalg.norm(x)
        t = rng.standard_normal(3)
        t -= np.dot(t, x) * x
        t /= np.linalg.norm(t)
        y = np.cos(rho) * x + np.sin(rho) * t
        positions.extend([x, y])
        pair_index.append((2 * idx, 2 * idx + 1))
    return ParticleEnsemble(np.array(positions), pair_index)


def velocity_at(f: SphField, points: np.ndarray) -> np.ndarray:
    """Hamiltonian velocity v = x cross grad f at unit 3-vectors.

    In (mu, lam) charts this is dlam/dt = -df/dmu, dmu/dt = +df/dlam, the
    orientation for which the advective derivative of g equals {f, g} and
    the transport form of the evolution equation holds.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    v = np.cross(pts, gradient_at(f, pts))
    return v if np.ndim(points) > 1 else v[0]


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def _resolve_stream(stream, t: float) -> SphField:
    return stream(t) if callable(stream) else stream


def advect(
    ensemble: ParticleEnsemble,
    stream,
    dt: float,
    t_end: float,
    *,
    t_start: float | None = None,
) -> ParticleEnsemble:
    """RK4 advection of all particles from t_start to t_end.

    ``stream`` is either a frozen SphField or a callable t -> SphField
    supplying the stream function at the RK stage times.  A negative dt
    integrates backward; combined with the reversed field
    t -> stream(t0 - t) this realizes the inverse-flow construction.
    """
    t0 = ensemble.time if t_start is None else t_start
    nsteps = int(round((t_end - t0) / dt))
    if nsteps < 0:
        raise ValueError("dt has the wrong sign for the requested horizon")
    x = ensemble.positions.copy()
    t = t0
    for _ in range(nsteps):
        f1 = _resolve_stream(stream, t)
        f2 = _resolve_stream(stream, t + 0.5 * dt)
        f4 = _resolve_stream(stream, t + dt)
        k1 = velocity_at(f1, x)
        k2 = velocity_at(f2, _normalize_rows(x + 0.5 * dt * k1))
        k3 = velocity_at(f2, _normalize_rows(x + 0.5 * dt * k2))
        k4 = velocity_at(f4, _normalize_rows(x + dt * k3))
        x = _normalize_rows(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        if not np.all(np.isfinite(x)):
            raise RuntimeError("non-finite particle positions; aborting")
        t += dt
    return ParticleEnsemble(x, list(ensemble.pair_index), t_end)


def pv_transport_residual(
    omega_start: SphField,
    omega_end: SphField,
    positions_start: np.ndarray,
    positions_end: np.ndarray,
) -> float:
    """max_i |omega_end(eta(x_i)) - omega_start(x_i)| over the particles."""
    w0 = eval_at(omega_start, positions_start)
    w1 = eval_at(omega_end, positions_end)
    return float(np.max(np.abs(w1 - w0)))


def great_circle_distance(x: np.ndarray, y: np.ndarray) -> float:
    dot = float(np.clip(np.dot(x, y), -1.0, 1.0))
    return float(np.arccos(dot))


def parallel_transport(v: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Parallel transport of tangent v from x to y along the minimal arc
    (rotation in the plane spanned by x and y)."""
    axis = np.cross(x, y)
    s = np.linalg.norm(axis)
    if s < 1e-14:
        return v.copy()
    axis = axis / s
    angle = great_circle_distance(x, y)
    # Rodrigues rotation
    return (
        v * np.cos(angle)
        + np.cross(axis, v) * np.sin(angle)
        + axis * np.dot(axis, v) * (1.0 - np.cos(angle))
    )


@dataclass
class HolderDiag:
    """Quasi-Lipschitz constant of the velocity and derived flow-regularity
    parameters: at horizon t, separations obey the Hoelder bound with
    exponent exp(-K t) and prefactor L = e * R^(1 - exponent)."""

    K: float
    R: float = SPHERE_DIAMETER
    t_horizon: float = 0.0
    hoelder_exponent: float = 1.0
    L: float = np.e

    def __post_init__(self):
        if self.K < 0:
            raise ValueError("K must be >= 0")
        self.hoelder_exponent = float(np.exp(-self.K * self.t_horizon))
        self.L = float(np.e * self.R ** (1.0 - self.hoelder_exponent))


def quasi_lipschitz_constant(
    f: SphField, pairs: ParticleEnsemble, t_horizon: float = 0.0
) -> HolderDiag:
    """K = max over pairs of |u(y) - P u(x)| / (rho (1 + log(R/rho))).

    P is parallel transport along the minimal arc; coincident (and
    antipodal) pairs are skipped.
    """
    R = SPHERE_DIAMETER
    K = 0.0
    for i, j in pairs.pair_index:
        x = pairs.positions[i]
        y = pairs.positions[j]
        rho = great_circle_distance(x, y)
        if rho < 1e-12 or rho > R - 1e-12:
            continue
        ux = velocity_at(f, x)
        uy = velocity_at(f, y)
        diff = np.linalg.norm(uy - parallel_transport(ux, x, y))
        K = max(K, diff / (rho * (1.0 + np.log(R / rho))))
    return HolderDiag(K=K, R=R, t_horizon=t_horizon)


def separation_bound(rho0: float, t: float, K: float, R: float = SPHERE_DIAMETER) -> float:
    """Integrated pair-separation bound: with psi = log(rho/R),
    psi(t) <= psi(0) e^(-K t) + 1 - e^(-K t); returned in rho form."""
    decay = np.exp(-K * t)
    psi0 = np.log(max(rho0, 1e-300) / R)
    return float(R * np.exp(psi0 * decay + 1.0 - decay))


def holder_bound_check(
    times: np.ndarray,
    separations: np.ndarray,
    K: float,
    slack: float = 1.05,
    R: float = SPHERE_DIAMETER,
) -> dict:
    """Check every tracked pair at every output time against the integrated
    inequality (x slack) and the Hoelder form rho(t) <= L rho(0)^exp(-Kt).

    ``separations`` has shape (ntimes, npairs); times[0] is the reference.
    Returns a report with the worst margin (bound/observed, > 1 means pass).
    """
    times = np.asarray(times, dtype=float)
    seps = np.atleast_2d(np.asarray(separations, dtype=float))
    rho0 = seps[0]
    worst_margin = np.inf
    worst = None
    ok = True
    for it, t in enumerate(times):
        dt = t - times[0]
        decay = np.exp(-K * dt)
        for ip in range(seps.shape[1]):
            bound = slack * separation_bound(rho0[ip], dt, K, R)
            holder = slack * np.e * R ** (1.0 - decay) * rho0[ip] ** decay
            observed = seps[it, ip]
            margin = min(bound, holder) / max(observed, 1e-300)
            if margin < worst_margin:
                worst_margin = margin
                worst = {"time": float(t), "pair": ip, "observed": float(observed), "bound": float(bound)}
            if observed > bound or observed > holder:
                ok = False
    return {"passed": ok, "worst_margin": float(worst_margin), "worst": worst, "K": K}
