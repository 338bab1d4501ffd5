"""Real spherical-harmonic machinery on the unit 2-sphere.

Fields are stored as real coefficients against orthonormal real spherical
harmonics

    Y_{l,0}  = Pbar_l^0(mu) / sqrt(2 pi)
    Y_{l,m}  = Pbar_l^m(mu) cos(m lam) / sqrt(pi)   (m > 0)
    Y_{l,-m} = Pbar_l^m(mu) sin(m lam) / sqrt(pi)   (m > 0)

with mu = cos(colatitude), lam = longitude in [0, 2pi), and Pbar_l^m the
associated Legendre functions normalized so that
int_{-1}^{1} Pbar_l^m Pbar_{l'}^m dmu = delta_{l l'} (no Condon-Shortley
phase).  Coefficients are packed l-major: index(l, m) = l*l + l + m for
-l <= m <= l, giving (lmax+1)**2 entries.  This layout is the one written
to snapshot files.

Grids are Gauss-Legendre in latitude and equiangular in longitude.  The
default grid sizes give alias-free (2/3-rule) evaluation of quadratic
products of band-limited fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "SphGrid",
    "SphField",
    "sph_index",
    "num_coeffs",
    "grid_for",
    "analyze",
    "synthesize",
    "laplacian",
    "helmholtz_invert",
    "jacobian_bracket",
    "lambda_derivative",
    "mu_derivative_scaled",
    "inner_product",
    "eval_at",
    "gradient_at",
    "max_speed",
    "UnsolvableError",
]

_SQRT_2PI = np.sqrt(2.0 * np.pi)
_SQRT_PI = np.sqrt(np.pi)


class UnsolvableError(ValueError):
    """Raised when a Helmholtz inversion has no solution (alpha2 = 0, nonzero mean)."""


def sph_index(l: int, m: int) -> int:
    """Flat l-major index of the (l, m) coefficient."""
    return l * l + l + m


def num_coeffs(lmax: int) -> int:
    return (lmax + 1) * (lmax + 1)


def _next_pow2(n: int) -> int:
    p = 8
    while p < n:
        p *= 2
    return p


def _legendre_table(lmax_tab: int, mu: np.ndarray) -> np.ndarray:
    """Normalized associated Legendre values Pbar_l^m(mu).

    Returns an array of shape (lmax_tab+1, lmax_tab+1, len(mu)) indexed
    [m, l, j]; entries with l < m are zero.  Standard stable recurrences,
    no Condon-Shortley phase.
    """
    nj = mu.shape[0]
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - mu * mu))
    tab = np.zeros((lmax_tab + 1, lmax_tab + 1, nj))
    pmm = np.full(nj, np.sqrt(0.5))
    for m in range(lmax_tab + 1):
        if m > 0:
            pmm = pmm * np.sqrt((2 * m + 1) / (2.0 * m)) * sin_t
        tab[m, m] = pmm
        if m + 1 <= lmax_tab:
            tab[m, m + 1] = np.sqrt(2 * m + 3.0) * mu * pmm
        for l in range(m + 2, lmax_tab + 1):
            a_l = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            a_lm1 = np.sqrt((4.0 * (l - 1) ** 2 - 1.0) / ((l - 1) ** 2 - m * m))
            tab[m, l] = a_l * (mu * tab[m, l - 1] - tab[m, l - 2] / a_lm1)
    return tab


class SphGrid:
    """Gauss-Legendre x equiangular transform grid for band limit lmax.

    Default sizes satisfy the 2/3-rule for quadratic nonlinearities:
    nlat = 3*lmax//2 + 3 and nlon = next power of two >= 3*lmax + 2.
    """

    def __init__(self, lmax: int, nlat: int | None = None, nlon: int | None = None):
        if lmax < 1:
            raise ValueError("lmax must be >= 1")
        self.lmax = int(lmax)
        self.nlat = int(nlat) if nlat is not None else 3 * self.lmax // 2 + 3
        self.nlon = int(nlon) if nlon is not None else _next_pow2(3 * self.lmax + 2)
        if self.nlat < self.lmax + 1:
            raise ValueError("nlat must be at least lmax + 1")
        if self.nlon < 2 * self.lmax + 1:
            raise ValueError("nlon must be at least 2*lmax + 1")
        nodes, weights = np.polynomial.legendre.leggauss(self.nlat)
        self.mu = nodes            # ascending in mu = cos(theta)
        self.weights = weights     # sum to 2
        self.lon = 2.0 * np.pi * np.arange(self.nlon) / self.nlon

        L = self.lmax
        ltab = L + 1  # table carries l up to lmax+1 for the mu-derivative
        self._ptab = _legendre_table(ltab, self.mu)  # [m, l, j], m,l <= lmax+1

        # flat <-> (m, l) packing helpers (cos part m>=0, sin part m>=1)
        ls = np.arange(L + 1)
        mgrid, lgrid = np.meshgrid(np.arange(L + 1), ls, indexing="ij")
        self._valid = lgrid >= mgrid
        base = lgrid * lgrid + lgrid
        self._cos_idx = np.where(self._valid, base + mgrid, 0)
        self._sin_idx = np.where(self._valid & (mgrid > 0), base - mgrid, 0)
        self._sin_valid = self._valid & (mgrid > 0)

        # spectral lambda-derivative permutation on flat coefficients
        src_plus, src_minus, dst_plus, dst_minus, scale = [], [], [], [], []
        for l in range(L + 1):
            for m in range(1, l + 1):
                src_plus.append(sph_index(l, m))
                src_minus.append(sph_index(l, -m))
                dst_plus.append(sph_index(l, m))
                dst_minus.append(sph_index(l, -m))
                scale.append(float(m))
        self._dl_src_plus = np.array(src_plus, dtype=np.intp)
        self._dl_src_minus = np.array(src_minus, dtype=np.intp)
        self._dl_scale = np.array(scale)

        # (1-mu^2) d/dmu coefficients on the padded (m, l) matrices
        marr = np.arange(L + 1, dtype=float)[:, None]
        larr = np.arange(L + 2, dtype=float)[None, :]
        num = larr * larr - marr * marr
        self._cmat = np.sqrt(np.maximum(num, 0.0) / (4.0 * larr * larr - 1.0))  # c_l^m, [m, l<=L+1]

        self._l_of_index = np.repeat(ls, 2 * ls + 1)
        self._eig = -(self._l_of_index * (self._l_of_index + 1.0))

        # per-m transform scales
        sm = np.full(L + 1, 1.0 / _SQRT_PI)
        sm[0] = 1.0 / _SQRT_2PI
        self._synth_scale = sm
        am = np.full(L + 1, _SQRT_PI)
        am[0] = _SQRT_2PI
        self._ana_scale = am

    # -- packing ----------------------------------------------------------

    def _to_padded(self, flat: np.ndarray, ltab: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Flat coefficients -> (cosmat, sinmat) of shape (lmax+1, ltab+1)."""
        L = self.lmax
        ltab = L if ltab is None else ltab
        cos = np.zeros((L + 1, ltab + 1))
        sin = np.zeros((L + 1, ltab + 1))
        cos[:, : L + 1] = np.where(self._valid, flat[self._cos_idx], 0.0)
        sin[:, : L + 1] = np.where(self._sin_valid, flat[self._sin_idx], 0.0)
        return cos, sin

    def _from_padded(self, cos: np.ndarray, sin: np.ndarray) -> np.ndarray:
        flat = np.zeros(num_coeffs(self.lmax))
        flat[self._cos_idx[self._valid]] = cos[:, : self.lmax + 1][self._valid]
        flat[self._sin_idx[self._sin_valid]] = sin[:, : self.lmax + 1][self._sin_valid]
        return flat

    # -- transforms --------------------------------------------------------

    def synthesize_padded(self, cos: np.ndarray, sin: np.ndarray) -> np.ndarray:
        """Grid values from padded (m, l) coefficient matrices (l up to lmax+1)."""
        L = self.lmax
        ltab = cos.shape[1] - 1
        ptab = self._ptab[: L + 1, : ltab + 1, :]
        am = np.einsum("mlj,ml->mj", ptab, cos) * self._synth_scale[:, None]
        bm = np.einsum("mlj,ml->mj", ptab, sin) * self._synth_scale[:, None]
        ghat = np.zeros((self.nlat, self.nlon // 2 + 1), dtype=complex)
        ghat[:, 0] = self.nlon * am[0]
        ghat[:, 1 : L + 1] = (0.5 * self.nlon) * (am[1:] - 1j * bm[1:]).T
        return np.fft.irfft(ghat, n=self.nlon, axis=1)

    def analyze_values(self, values: np.ndarray) -> np.ndarray:
        """Flat coefficients (band limit lmax) from grid values."""
        if values.shape != (self.nlat, self.nlon):
            raise ValueError(
                f"grid value shape {values.shape} does not match ({self.nlat}, {self.nlon})"
            )
        L = self.lmax
        fhat = np.fft.rfft(values, axis=1)
        am = np.empty((L + 1, self.nlat))
        bm = np.zeros((L + 1, self.nlat))
        am[0] = fhat[:, 0].real / self.nlon
        am[1:] = 2.0 * fhat[:, 1 : L + 1].real.T / self.nlon
        bm[1:] = -2.0 * fhat[:, 1 : L + 1].imag.T / self.nlon
        wam = am * self.weights[None, :] * self._ana_scale[:, None]
        wbm = bm * self.weights[None, :] * self._ana_scale[:, None]
        ptab = self._ptab[: L + 1, : L + 1, :]
        cos = np.einsum("mlj,mj->ml", ptab, wam)
        sin = np.einsum("mlj,mj->ml", ptab, wbm)
        cos[~self._valid] = 0.0
        sin[~self._sin_valid] = 0.0
        return self._from_padded(cos, sin)

    # -- derivative coefficient operators -----------------------------------

    def lambda_derivative_flat(self, flat: np.ndarray) -> np.ndarray:
        out = np.zeros_like(flat)
        out[self._dl_src_plus] = self._dl_scale * flat[self._dl_src_minus]
        out[self._dl_src_minus] = -self._dl_scale * flat[self._dl_src_plus]
        return out

    def dmu_padded(self, cos: np.ndarray, sin: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Padded coefficients of (1-mu^2) d/dmu of the field (degree lmax+1)."""
        L = self.lmax
        out_c = np.zeros((L + 1, L + 2))
        out_s = np.zeros((L + 1, L + 2))
        ls = np.arange(L + 1, dtype=float)[None, :]
        c_here = self._cmat[:, : L + 1]    # c_l^m
        c_up = self._cmat[:, 1 : L + 2]    # c_{l+1}^m
        for out, mat in ((out_c, cos), (out_s, sin)):
            down = (ls + 1.0) * c_here * mat[:, : L + 1]   # sends l -> l-1
            up = -ls * c_up * mat[:, : L + 1]              # sends l -> l+1
            out[:, : L] += down[:, 1:]
            out[:, 1 : L + 2] += up
        return out_c, out_s

    def quad_weights_2d(self) -> np.ndarray:
        return self.weights[:, None] * (2.0 * np.pi / self.nlon)


@lru_cache(maxsize=16)
def grid_for(lmax: int, nlat: int | None = None, nlon: int | None = None) -> SphGrid:
    """Shared, cached grid instances (grids are immutable after construction)."""
    return SphGrid(lmax, nlat, nlon)


@dataclass
class SphField:
    """Real scalar field on the sphere, stored as flat real coefficients."""

    lmax: int
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (num_coeffs(self.lmax),):
            raise ValueError(
                f"coefficient array has shape {self.coeffs.shape}, expected ({num_coeffs(self.lmax)},)"
            )

    @classmethod
    def zeros(cls, lmax: int) -> "SphField":
        return cls(lmax, np.zeros(num_coeffs(lmax)))

    @classmethod
    def harmonic(cls, lmax: int, l: int, m: int, amplitude: float = 1.0) -> "SphField":
        if not (0 <= l <= lmax and -l <= m <= l):
            raise ValueError(f"(l, m) = ({l}, {m}) outside band limit {lmax}")
        f = cls.zeros(lmax)
        f.coeffs[sph_index(l, m)] = amplitude
        return f

    @classmethod
    def cos_colatitude(cls, lmax: int, amplitude: float = 1.0) -> "SphField":
        """The field amplitude * cos(theta) = amplitude * mu."""
        return cls.harmonic(lmax, 1, 0, amplitude * np.sqrt(4.0 * np.pi / 3.0))

    def copy(self) -> "SphField":
        return SphField(self.lmax, self.coeffs.copy())

    def __add__(self, other: "SphField") -> "SphField":
        return SphField(self.lmax, self.coeffs + other.coeffs)

    def __sub__(self, other: "SphField") -> "SphField":
        return SphField(self.lmax, self.coeffs - other.coeffs)

    def __mul__(self, s: float) -> "SphField":
        return SphField(self.lmax, self.coeffs * s)

    __rmul__ = __mul__

    def mean(self) -> float:
        """Spherical mean (1/4pi) int f dOmega = c_{0,0} / (2 sqrt(pi))."""
        return float(self.coeffs[0]) / (2.0 * _SQRT_PI)

    def integral(self) -> float:
        """int f dOmega = sqrt(4 pi) * c_{0,0}."""
        return float(self.coeffs[0]) * 2.0 * _SQRT_PI

    def norm_l2(self) -> float:
        return float(np.sqrt(np.sum(self.coeffs**2)))

    def eval_at(self, points: np.ndarray) -> np.ndarray:
        return eval_at(self, points)


# -- public operations -------------------------------------------------------


def analyze(values: np.ndarray, grid: SphGrid) -> SphField:
    """Forward transform of grid values to band limit grid.lmax."""
    return SphField(grid.lmax, grid.analyze_values(np.asarray(values, dtype=float)))


def synthesize(field: SphField, grid: SphGrid) -> np.ndarray:
    """Grid values of a coefficient field.  grid.lmax may exceed field.lmax."""
    if grid.lmax < field.lmax:
        raise ValueError("grid band limit below field band limit")
    if grid.lmax == field.lmax:
        cos, sin = grid._to_padded(field.coeffs)
    else:
        padded = np.zeros(num_coeffs(grid.lmax))
        padded[: num_coeffs(field.lmax)] = field.coeffs
        cos, sin = grid._to_padded(padded)
    return grid.synthesize_padded(cos, sin)


def laplacian(field: SphField) -> SphField:
    """Laplace-Beltrami operator; multiplies (l, m) coefficients by -l(l+1)."""
    grid = grid_for(field.lmax)
    return SphField(field.lmax, grid._eig * field.coeffs)


def helmholtz_invert(q: SphField, alpha2: float) -> SphField:
    """Solve (Laplacian - alpha2) f = q coefficientwise.

    For alpha2 = 0 the mean of q must vanish (the constant mode is in the
    kernel); the result is then gauge-fixed to zero mean.
    """
    if alpha2 < 0:
        raise ValueError("alpha2 must be >= 0")
    grid = grid_for(q.lmax)
    denom = grid._eig - alpha2
    out = np.empty_like(q.coeffs)
    if alpha2 == 0.0:
        scale = max(1.0, float(np.max(np.abs(q.coeffs))))
        if abs(q.coeffs[0]) > 1e-12 * scale:
            raise UnsolvableError(
                "alpha2 = 0 with nonzero spherical mean: Helmholtz problem unsolvable"
            )
        out[0] = 0.0
        out[1:] = q.coeffs[1:] / denom[1:]
    else:
        out = q.coeffs / denom
    return SphField(q.lmax, out)


def lambda_derivative(field: SphField) -> SphField:
    grid = grid_for(field.lmax)
    return SphField(field.lmax, grid.lambda_derivative_flat(field.coeffs))


def mu_derivative_scaled(field: SphField, grid: SphGrid) -> np.ndarray:
    """Grid values of (1-mu^2) df/dmu via the Legendre derivative recurrence."""
    cos, sin = grid._to_padded(field.coeffs)
    dc, ds = grid.dmu_padded(cos[:, : grid.lmax + 1], sin[:, : grid.lmax + 1])
    return grid.synthesize_padded(dc, ds)


def jacobian_bracket(f: SphField, g: SphField, grid: SphGrid | None = None) -> SphField:
    """Pseudo-spectral Poisson bracket {f, g} = f_lam g_mu - f_mu g_lam.

    Products are formed on the (alias-free) transform grid and re-analyzed,
    truncating back to the band limit.
    """
    if f.lmax != g.lmax:
        raise ValueError("band limits differ")
    grid = grid_for(f.lmax) if grid is None else grid
    one_minus_mu2 = 1.0 - grid.mu**2
    fl = synthesize(lambda_derivative(f), grid)
    gl = synthesize(lambda_derivative(g), grid)
    fm = mu_derivative_scaled(f, grid)   # (1-mu^2) f_mu
    gm = mu_derivative_scaled(g, grid)
    jac = (fl * gm - fm * gl) / one_minus_mu2[:, None]
    return analyze(jac, grid)


def inner_product(f_values: np.ndarray, g_values: np.ndarray, grid: SphGrid) -> float:
    """Quadrature inner product int f g dOmega of grid-sampled fields."""
    return float(np.sum(grid.quad_weights_2d() * f_values * g_values))


# -- point evaluation --------------------------------------------------------


def _points_to_angles(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    nrm = np.linalg.norm(pts, axis=1)
    pts = pts / nrm[:, None]
    mu = np.clip(pts[:, 2], -1.0, 1.0)
    lam = np.arctan2(pts[:, 1], pts[:, 0])
    return mu, lam


def _embed_padded(cos: np.ndarray, sin: np.ndarray, lmax_tab: int) -> tuple[np.ndarray, np.ndarray]:
    """Zero-pad [m, l] coefficient matrices to shape (lmax_tab+1, lmax_tab+1)."""
    mc, lc = cos.shape
    out_c = np.zeros((lmax_tab + 1, lmax_tab + 1))
    out_s = np.zeros((lmax_tab + 1, lmax_tab + 1))
    out_c[:mc, :lc] = cos
    out_s[:mc, :lc] = sin
    return out_c, out_s


def _eval_padded_many(
    coeff_sets: list[tuple[np.ndarray, np.ndarray]], lmax_tab: int, mu: np.ndarray, lam: np.ndarray
) -> list[np.ndarray]:
    """Evaluate several padded coefficient sets at scattered points.

    One shared Legendre recurrence pass; coefficient matrices are
    (lmax_tab+1, lmax_tab+1) padded [m, l] cos/sin pairs.
    """
    coeff_sets = [_embed_padded(c, s, lmax_tab) for c, s in coeff_sets]
    npts = mu.shape[0]
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - mu * mu))
    outs = [np.zeros(npts) for _ in coeff_sets]
    mtab = np.arange(lmax_tab + 1.0)
    cos_ml = np.cos(mtab[:, None] * lam[None, :])
    sin_ml = np.sin(mtab[:, None] * lam[None, :])
    pmm = np.full(npts, np.sqrt(0.5))
    for m in range(lmax_tab + 1):
        if m > 0:
            pmm = pmm * np.sqrt((2 * m + 1) / (2.0 * m)) * sin_t
        scale = (1.0 / _SQRT_2PI) if m == 0 else (1.0 / _SQRT_PI)
        p_prev = None
        p_here = pmm
        for l in range(m, lmax_tab + 1):
            if l > m:
                a_l = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
                if l - 1 > m:
                    a_lm1 = np.sqrt((4.0 * (l - 1) ** 2 - 1.0) / ((l - 1) ** 2 - m * m))
                    p_next = a_l * (mu * p_here - p_prev / a_lm1)
                else:
                    p_next = a_l * mu * p_here
                p_prev, p_here = p_here, p_next
            for out, (cosmat, sinmat) in zip(outs, coeff_sets):
                a = cosmat[m, l]
                b = sinmat[m, l]
                if a != 0.0 or b != 0.0:
                    out += p_here * scale * (a * cos_ml[m] + b * sin_ml[m])
    return outs


def eval_at(field: SphField, points: np.ndarray) -> np.ndarray:
    """Exact evaluation of a band-limited field at unit 3-vectors (N, 3)."""
    mu, lam = _points_to_angles(points)
    grid = grid_for(field.lmax)
    cos, sin = grid._to_padded(field.coeffs)
    (vals,) = _eval_padded_many([(cos, sin)], field.lmax, mu, lam)
    return vals if np.ndim(points) > 1 else vals


def gradient_at(field: SphField, points: np.ndarray) -> np.ndarray:
    """Tangential gradient of the field at unit 3-vectors, shape (N, 3).

    Uses the spectral lambda derivative and the Legendre derivative
    recurrence; near the poles (1 - z^2 < 1e-6) it falls back to central
    differences of exact point evaluations along tangent great circles.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    mu, lam = _points_to_angles(pts)
    grid = grid_for(field.lmax)
    cos, sin = grid._to_padded(field.coeffs, ltab=field.lmax + 1)
    dc, ds = grid.dmu_padded(cos[:, : field.lmax + 1], sin[:, : field.lmax + 1])
    lc, lsn = grid._to_padded(grid.lambda_derivative_flat(field.coeffs), ltab=field.lmax + 1)
    dmu_vals, dlam_vals = _eval_padded_many([(dc, ds), (lc, lsn)], field.lmax + 1, mu, lam)

    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    one_minus_z2 = 1.0 - z * z
    grad = np.zeros_like(pts)
    safe = one_minus_z2 > 1e-6
    # grad f = f_theta theta_hat + (f_lam / sin) lam_hat, with
    # (1-mu^2) f_mu = -sin(theta) f_theta
    with np.errstate(divide="ignore", invalid="ignore"):
        gx = (-dmu_vals * z * x - dlam_vals * y) / one_minus_z2
        gy = (-dmu_vals * z * y + dlam_vals * x) / one_minus_z2
    gz = dmu_vals
    grad[safe, 0] = gx[safe]
    grad[safe, 1] = gy[safe]
    grad[safe, 2] = gz[safe]

    if np.any(~safe):
        h = 1e-5
        for i in np.nonzero(~safe)[0]:
            p = pts[i]
            t1 = np.array([1.0, 0.0, 0.0])
            t1 = t1 - np.dot(t1, p) * p
            if np.linalg.norm(t1) < 1e-6:
                t1 = np.array([0.0, 1.0, 0.0]) - p[1] * p
            t1 /= np.linalg.norm(t1)
            t2 = np.cross(p, t1)
            g = np.zeros(3)
            for t in (t1, t2):
                plus = np.cos(h) * p + np.sin(h) * t
                minus = np.cos(h) * p - np.sin(h) * t
                df = (eval_at(field, plus[None, :]) - eval_at(field, minus[None, :])) / (2 * h)
                g += df[0] * t
            grad[i] = g
    return grad if np.ndim(points) > 1 else grad[0]


def max_speed(f: SphField, grid: SphGrid | None = None) -> float:
    """Max |grad f| on the transform grid (the advecting speed scale)."""
    grid = grid_for(f.lmax) if grid is None else grid
    fl = synthesize(lambda_derivative(f), grid)
    fm = mu_derivative_scaled(f, grid)
    speed2 = (fl * fl + fm * fm) / (1.0 - grid.mu**2)[:, None]
    return float(np.sqrt(np.max(speed2)))
