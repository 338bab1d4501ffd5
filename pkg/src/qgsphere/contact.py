"""Contact-geometric operators in Darboux coordinates on R^(2n+1).

Coordinates are ordered (x^1..x^n, y^1..y^n, z); the contact form is
theta = dz + sum_k x^k dy^k with Reeb field d/dz.  Scalars carry optional
exact derivatives; absent those, central differences are used (step
``fd_step`` for first derivatives, a larger dedicated step for second
derivatives and for differentiating quantities that are themselves
finite-difference approximations).

All operators act pointwise on analytic test data; nothing here commits to
a grid discretization.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DarbouxScalar",
    "DarbouxVector",
    "ReebInvarianceError",
    "s_theta",
    "contact_bracket",
    "s_theta_adjoint",
    "contact_laplacian_darboux",
    "theta_of",
    "contraction_dtheta",
    "lie_derivative_theta",
    "lie_bracket",
    "divergence",
    "sample_box_points",
]

# second-derivative / derived-quantity differencing step: balances h^2
# truncation against eps/h^2 roundoff
_FD2_STEP = 5e-4


class ReebInvarianceError(ValueError):
    """Input scalar depends on the Reeb coordinate z beyond tolerance."""


class DarbouxScalar:
    """Scalar function on R^(2n+1) with exact or finite-difference derivatives.

    Parameters
    ----------
    n : ambient arity; the space has dimension 2n+1.
    func : point -> float.
    grad : optional, point -> array (2n+1,) of exact first partials.
    hess : optional, point -> array (2n+1, 2n+1) of exact second partials.
    fd_step : central-difference step used when grad is absent.
    """

    def __init__(
        self,
        n: int,
        func: Callable[[np.ndarray], float],
        grad: Callable[[np.ndarray], np.ndarray] | None = None,
        hess: Callable[[np.ndarray], np.ndarray] | None = None,
        fd_step: float = 1e-5,
        name: str = "",
    ):
        if n < 1:
            raise ValueError("arity n must be >= 1")
        self.n = n
        self.dim = 2 * n + 1
        self.func = func
        self.grad = grad
        self.hess = hess
        self.fd_step = float(fd_step)
        self.name = name

    def __call__(self, point: np.ndarray) -> float:
        return float(self.func(np.asarray(point, dtype=float)))

    def partial(self, i: int, point: np.ndarray) -> float:
        point = np.asarray(point, dtype=float)
        if self.grad is not None:
            return float(self.grad(point)[i])
        h = self.fd_step
        e = np.zeros(self.dim)
        e[i] = h
        return (self(point + e) - self(point - e)) / (2.0 * h)

    def partial2(self, i: int, j: int, point: np.ndarray) -> float:
        point = np.asarray(point, dtype=float)
        if self.hess is not None:
            return float(self.hess(point)[i, j])
        h = _FD2_STEP
        ei = np.zeros(self.dim)
        ej = np.zeros(self.dim)
        ei[i] = h
        ej[j] = h
        if i == j:
            return (self(point + ei) - 2.0 * self(point) + self(point - ei)) / (h * h)
        return (
            self(point + ei + ej)
            - self(point + ei - ej)
            - self(point - ei + ej)
            + self(point - ei - ej)
        ) / (4.0 * h * h)

    def gradient(self, point: np.ndarray) -> np.ndarray:
        point = np.asarray(point, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(point), dtype=float)
        return np.array([self.partial(i, point) for i in range(self.dim)])

    @property
    def is_exact(self) -> bool:
        return self.grad is not None

    def check_reeb_invariant(self, points: np.ndarray, tol: float = 1e-8) -> None:
        """Raise unless df/dz vanishes (to tol) at every given point."""
        z = self.dim - 1
        worst = 0.0
        for p in np.atleast_2d(points):
            worst = max(worst, abs(self.partial(z, p)))
        if worst > tol:
            raise ReebInvarianceError(
                f"scalar {self.name or '<anonymous>'} has |df/dz| = {worst:.3e} > {tol:.1e}"
            )


class DarbouxVector:
    """Vector field on R^(2n+1); components ordered (p^1..p^n, q^1..q^n, r)."""

    def __init__(
        self,
        n: int,
        components: Sequence[Callable[[np.ndarray], float]],
        jac: Callable[[np.ndarray], np.ndarray] | None = None,
        fd_step: float = 1e-5,
        name: str = "",
    ):
        self.n = n
        self.dim = 2 * n + 1
        if len(components) != self.dim:
            raise ValueError(f"need exactly {self.dim} components, got {len(components)}")
        self.components = list(components)
        self.jac = jac  # point -> array [i_comp, j_coord] of exact partials
        self.fd_step = float(fd_step)
        self.name = name

    def __call__(self, point: np.ndarray) -> np.ndarray:
        point = np.asarray(point, dtype=float)
        return np.array([float(c(point)) for c in self.components])

    def component_partial(self, i: int, j: int, point: np.ndarray) -> float:
        """d(component i)/d(coordinate j)."""
        point = np.asarray(point, dtype=float)
        if self.jac is not None:
            return float(self.jac(point)[i, j])
        h = self.fd_step
        e = np.zeros(self.dim)
        e[j] = h
        return (self.components[i](point + e) - self.components[i](point - e)) / (2.0 * h)

    @property
    def is_exact(self) -> bool:
        return self.jac is not None


def _derived_step(*sources) -> float:
    """Differencing step for quantities built from possibly-FD inputs."""
    if all(getattr(s, "is_exact", False) for s in sources):
        return 1e-5
    return _FD2_STEP


def sample_box_points(n: int, count: int = 200, seed: int = 0) -> np.ndarray:
    """Seeded uniform sample points in the box [-1, 1]^(2n+1)."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, size=(count, 2 * n + 1))


def s_theta(
    f: DarbouxScalar, check_points: np.ndarray | None = None, reeb_tol: float = 1e-8
) -> DarbouxVector:
    """The stream operator: u with theta(u) = f and i_u dtheta = -df.

    In coordinates u = sum_k(-f_y_k d_x_k + f_x_k d_y_k)
    + (f - sum_k x^k f_x_k) d_z.  Rejects inputs whose z-derivative exceeds
    ``reeb_tol`` at the check points.
    """
    n = f.n
    if check_points is None:
        check_points = sample_box_points(n, count=16, seed=101)
    f.check_reeb_invariant(check_points, tol=reeb_tol)

    def p_comp(k):
        return lambda pt: -f.partial(n + k, pt)

    def q_comp(k):
        return lambda pt: f.partial(k, pt)

    def r_comp(pt):
        return f(pt) - sum(pt[k] * f.partial(k, pt) for k in range(n))

    comps = [p_comp(k) for k in range(n)] + [q_comp(k) for k in range(n)] + [r_comp]

    jac = None
    if f.hess is not None and f.grad is not None:
        def jac(pt):
            H = np.asarray(f.hess(pt), dtype=float)
            g = np.asarray(f.grad(pt), dtype=float)
            J = np.zeros((f.dim, f.dim))
            for k in range(n):
                J[k, :] = -H[n + k, :]
                J[n + k, :] = H[k, :]
            # r = f - sum x^k f_x_k
            J[2 * n, :] = g - sum(pt[k] * H[k, :] for k in range(n))
            for k in range(n):
                J[2 * n, k] -= g[k]
            return J

    return DarbouxVector(n, comps, jac=jac, fd_step=_derived_step(f), name=f"S_theta({f.name})")


def contact_bracket(
    f: DarbouxScalar,
    g: DarbouxScalar,
    check_points: np.ndarray | None = None,
    reeb_tol: float = 1e-8,
) -> DarbouxScalar:
    """{f, g} = sum_k f_x_k g_y_k - f_y_k g_x_k (equals S_theta f applied to g)."""
    if f.n != g.n:
        raise ValueError("arity mismatch")
    n = f.n
    if check_points is None:
        check_points = sample_box_points(n, count=16, seed=101)
    f.check_reeb_invariant(check_points, tol=reeb_tol)
    g.check_reeb_invariant(check_points, tol=reeb_tol)

    def func(pt):
        return sum(
            f.partial(k, pt) * g.partial(n + k, pt) - f.partial(n + k, pt) * g.partial(k, pt)
            for k in range(n)
        )

    grad = None
    if f.hess is not None and g.hess is not None and f.grad is not None and g.grad is not None:
        def grad(pt):
            Hf = np.asarray(f.hess(pt), dtype=float)
            Hg = np.asarray(g.hess(pt), dtype=float)
            gf = np.asarray(f.grad(pt), dtype=float)
            gg = np.asarray(g.grad(pt), dtype=float)
            out = np.zeros(f.dim)
            for k in range(n):
                out += Hf[k, :] * gg[n + k] + gf[k] * Hg[n + k, :]
                out -= Hf[n + k, :] * gg[k] + gf[n + k] * Hg[k, :]
            return out

    return DarbouxScalar(
        n, func, grad=grad, fd_step=_derived_step(f, g), name=f"{{{f.name},{g.name}}}"
    )


def s_theta_adjoint(w: DarbouxVector) -> DarbouxScalar:
    """Formal L2 adjoint of s_theta in the Euclidean Darboux setting.

    S*w = (1+n) r + sum_k (dp^k/dy^k - dq^k/dx^k + x^k dr/dx^k).
    """
    n = w.n
    r_index = 2 * n

    def func(pt):
        pt = np.asarray(pt, dtype=float)
        val = (1.0 + n) * w.components[r_index](pt)
        for k in range(n):
            val += w.component_partial(k, n + k, pt)
            val -= w.component_partial(n + k, k, pt)
            val += pt[k] * w.component_partial(r_index, k, pt)
        return val

    return DarbouxScalar(n, func, fd_step=_derived_step(w), name=f"S*({w.name})")


def contact_laplacian_darboux(f: DarbouxScalar) -> DarbouxScalar:
    """Contact Laplacian S* S in closed coordinate form:

    (1+n) f - (1+n) sum_k x^k f_x_k - sum_k (f_x_k x_k + f_y_k y_k)
            - sum_{j,k} x^j x^k f_x_j x_k.

    For n = 1 this is 2 f - d/dx((1 + x^2) f_x) - f_yy; for n > 1 the
    composition with the displayed adjoint produces the cross terms above,
    and the composition is the authority.
    """
    n = f.n

    def func(pt):
        pt = np.asarray(pt, dtype=float)
        val = (1.0 + n) * f(pt)
        for k in range(n):
            val -= (1.0 + n) * pt[k] * f.partial(k, pt)
            val -= f.partial2(k, k, pt) + f.partial2(n + k, n + k, pt)
            for j in range(n):
                val -= pt[j] * pt[k] * f.partial2(j, k, pt)
        return val

    return DarbouxScalar(n, func, fd_step=_derived_step(f), name=f"Lap_theta({f.name})")


def theta_of(u: DarbouxVector) -> DarbouxScalar:
    """The scalar theta(u) = r + sum_k x^k q^k."""
    n = u.n

    def func(pt):
        pt = np.asarray(pt, dtype=float)
        return u.components[2 * n](pt) + sum(pt[k] * u.components[n + k](pt) for k in range(n))

    grad = None
    if u.jac is not None:
        def grad(pt):
            pt = np.asarray(pt, dtype=float)
            J = np.asarray(u.jac(pt), dtype=float)
            out = J[2 * n, :].copy()
            for k in range(n):
                out += pt[k] * J[n + k, :]
                out[k] += u.components[n + k](pt)
            return out

    return DarbouxScalar(n, func, grad=grad, fd_step=_derived_step(u), name=f"theta({u.name})")


def contraction_dtheta(u: DarbouxVector, point: np.ndarray) -> np.ndarray:
    """Components of i_u dtheta = sum_k (p^k dy^k - q^k dx^k) at a point."""
    n = u.n
    point = np.asarray(point, dtype=float)
    out = np.zeros(u.dim)
    for k in range(n):
        out[k] = -u.components[n + k](point)       # dx^k component
        out[n + k] = u.components[k](point)        # dy^k component
    return out


def lie_derivative_theta(u: DarbouxVector, point: np.ndarray) -> np.ndarray:
    """Components of L_u theta = d(theta(u)) + i_u dtheta at a point."""
    th = theta_of(u)
    return th.gradient(point) + contraction_dtheta(u, point)


def lie_bracket(u: DarbouxVector, v: DarbouxVector) -> DarbouxVector:
    """Vector-field commutator [u, v] = (u . grad) v - (v . grad) u."""
    if u.n != v.n:
        raise ValueError("arity mismatch")
    dim = u.dim

    def comp(i):
        def fn(pt):
            pt = np.asarray(pt, dtype=float)
            uv = u(pt)
            vv = v(pt)
            val = 0.0
            for j in range(dim):
                val += uv[j] * v.component_partial(i, j, pt)
                val -= vv[j] * u.component_partial(i, j, pt)
            return val

        return fn

    return DarbouxVector(
        u.n, [comp(i) for i in range(dim)], fd_step=_derived_step(u, v), name=f"[{u.name},{v.name}]"
    )


def divergence(u: DarbouxVector) -> DarbouxScalar:
    def func(pt):
        return sum(u.component_partial(i, i, pt) for i in range(u.dim))

    return DarbouxScalar(u.n, func, fd_step=_derived_step(u), name=f"div({u.name})")
