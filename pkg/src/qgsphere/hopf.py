"""Quaternionic S^3 with the Berger metric and the Hopf projection to S^2.

Quaternions are stored as arrays (..., 4) in (w, x, y, z) order.  The
invariant frame {E1, E2, E3} consists of the generators of left
translations, E_i f(q) = d/dt f(exp(t e_i) q) at t = 0, which satisfy the
cyclic relations [E1, E2] = -2 E3 etc.  The Hopf map is the conjugation
pi(q) = conj(q) * i * q, read as a point of S^2; its fibers are the orbits
q -> exp(t e_1) q of the E1 flow, so functions lifted from S^2 are
E1-invariant.

The Berger contact Laplacian alpha^2 - (E2^2 + E3^2)/4 is evaluated by
second-order central differences along the frame flows (step h, error
O(h^2)).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .spharm import SphField, eval_at

__all__ = [
    "Quaternion",
    "BergerParams",
    "quat_mul",
    "quat_conj",
    "quat_exp_imag",
    "random_unit_quaternions",
    "hopf_project",
    "frame_derivative",
    "frame_second_derivative",
    "berger_contact_laplacian",
    "lift_from_sphere",
    "s_theta_s3_derivation",
]


@dataclass
class Quaternion:
    """Convenience wrapper; computational routines take raw (..., 4) arrays."""

    w: float
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, a: np.ndarray) -> "Quaternion":
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def normalized(self) -> "Quaternion":
        a = self.as_array()
        return Quaternion.from_array(a / np.linalg.norm(a))


@dataclass
class BergerParams:
    """Berger metric parameter: alpha = |E1|, the fiber scaling."""

    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    @property
    def alpha2(self) -> float:
        return self.alpha * self.alpha


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product, broadcasting over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_conj(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_exp_imag(i: int, t: float) -> np.ndarray:
    """exp(t e_i) = cos(t) + sin(t) e_i for frame index i in 1..3."""
    if i not in (1, 2, 3):
        raise ValueError("frame index must be 1, 2 or 3")
    out = np.zeros(4)
    out[0] = np.cos(t)
    out[i] = np.sin(t)
    return out


def random_unit_quaternions(count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((count, 4))
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def hopf_project(q: np.ndarray) -> np.ndarray:
    """Hopf map conj(q) * i * q -> unit 3-vector(s); fibers are E1 orbits."""
    q = np.asarray(q, dtype=float)
    i_unit = np.zeros(q.shape[:-1] + (4,))
    i_unit[..., 1] = 1.0
    img = quat_mul(quat_conj(q), quat_mul(i_unit, q))
    return img[..., 1:]


def frame_derivative(f: Callable[[np.ndarray], np.ndarray], i: int, q: np.ndarray, h: float = 1e-4):
    """Central difference of f along the frame flow exp(t e_i) q."""
    step = quat_exp_imag(i, h)
    step_m = quat_exp_imag(i, -h)
    return (f(quat_mul(step, q)) - f(quat_mul(step_m, q))) / (2.0 * h)


def frame_second_derivative(
    f: Callable[[np.ndarray], np.ndarray], i: int, q: np.ndarray, h: float = 1e-4
):
    step = quat_exp_imag(i, h)
    step_m = quat_exp_imag(i, -h)
    return (f(quat_mul(step, q)) - 2.0 * f(q) + f(quat_mul(step_m, q))) / (h * h)


def berger_contact_laplacian(
    f: Callable[[np.ndarray], np.ndarray],
    params: BergerParams,
    q: np.ndarray,
    h: float = 1e-4,
):
    """alpha^2 f - (E2^2 f + E3^2 f) / 4 at unit quaternion(s) q."""
    return (
        params.alpha2 * f(q)
        - 0.25 * frame_second_derivative(f, 2, q, h)
        - 0.25 * frame_second_derivative(f, 3, q, h)
    )


def lift_from_sphere(field: SphField) -> Callable[[np.ndarray], np.ndarray]:
    """Lift a sphere field through the Hopf map: f = field o pi."""

    def f(q: np.ndarray) -> np.ndarray:
        pts = hopf_project(np.atleast_2d(q))
        vals = eval_at(field, pts)
        return vals if np.ndim(q) > 1 else vals[0]

    return f


def s_theta_s3_derivation(
    f: Callable[[np.ndarray], np.ndarray],
    g: Callable[[np.ndarray], np.ndarray],
    q: np.ndarray,
    h: float = 1e-4,
):
    """The derivation S_theta f applied to g on S^3 for E1-invariant f, g:

    S_theta f = f E1 - (E3 f) E2 / 2 + (E2 f) E3 / 2, and E1 g = 0, so
    S_theta f (g) = -(E3 f)(E2 g)/2 + (E2 f)(E3 g)/2.
    """
    e2f = frame_derivative(f, 2, q, h)
    e3f = frame_derivative(f, 3, q, h)
    e2g = frame_derivative(g, 2, q, h)
    e3g = frame_derivative(g, 3, q, h)
    return -0.5 * e3f * e2g + 0.5 * e2f * e3g
