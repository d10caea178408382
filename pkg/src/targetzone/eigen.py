"""Orthonormal eigen-systems of the pricing operator.

The operator is  A psi = -(sigma^2/2) (psi'' - U(x) psi)  on [x_minus, x_plus]
with slope boundary conditions  psi'(x_pm) = h_pm * psi(x_pm).  Whenever the
data come from a consistent drift field h (U = h^2 + h'), the ground state is
psi_0 ∝ exp(∫h) with eigenvalue exactly zero and all other eigenvalues are
positive and simple.

Three constructions are provided:

* ``cos_system``      -- flat potential, Neumann slopes (closed form).
* ``tan_system``      -- constant negative potential with tangent slopes
                         (closed form up to a transcendental root).
* ``numeric_system``  -- generic bounded potential, second-order finite
                         differences with ghost-node boundary rows and
                         Richardson extrapolation of the eigenvalues.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal

from .bands import Band
from .errors import NumericalError, ValidationError

__all__ = [
    "EigenSystem",
    "CosineEigenSystem",
    "TanEigenSystem",
    "GridEigenSystem",
    "cos_system",
    "tan_lambda",
    "tan_norm",
    "tan_system",
    "numeric_system",
    "ground_state",
]


def _sin_over(y):
    """sin(y)/y, stable through y = 0."""
    return np.sinc(np.asarray(y, dtype=float) / np.pi)


def _check_nu(nu: float, width: float) -> None:
    if not 0.0 < nu < math.pi / width:
        raise ValidationError(
            f"tan frequency requires 0 < nu < pi/L = {math.pi / width}, got {nu}"
        )


class EigenSystem:
    """Base container: eigenvalues plus eigenfunction evaluators.

    ``energies[0]`` is exactly zero; the rest are strictly increasing.
    ``psi_matrix(x)`` returns the (n_max+1, len(x)) table of psi_n(x).
    """

    kind = "base"

    def __init__(self, band: Band, sigma: float, energies: np.ndarray,
                 h_minus: float, h_plus: float):
        self.band = band
        self.sigma = float(sigma)
        self.energies = np.asarray(energies, dtype=float)
        self.h_minus = float(h_minus)
        self.h_plus = float(h_plus)

    @property
    def n_max(self) -> int:
        return len(self.energies) - 1

    # subclasses implement the matrix evaluators
    def psi_matrix(self, x) -> np.ndarray:
        raise NotImplementedError

    def psi_prime_matrix(self, x) -> np.ndarray:
        raise NotImplementedError

    def psi_pair_matrix(self, x, n_top=None):
        """(psi, psi') tables for modes 0..n_top; overridden where the
        phase computation can be shared."""
        stop = self.n_max + 1 if n_top is None else n_top + 1
        return self.psi_matrix(x)[:stop], self.psi_prime_matrix(x)[:stop]

    def psi(self, n: int, x):
        out = self.psi_matrix(x)[n]
        return float(out[0]) if np.ndim(x) == 0 else out

    def psi_prime(self, n: int, x):
        out = self.psi_prime_matrix(x)[n]
        return float(out[0]) if np.ndim(x) == 0 else out

    def sup_abs(self, n: int) -> float:
        """Upper bound for |psi_n| on the band (used by truncation bounds)."""
        raise NotImplementedError

    def mode_records(self):
        """(n, E_n, lambda_n, a_n) rows; lambda/a are None when not defined."""
        return [(n, float(self.energies[n]), None, None)
                for n in range(self.n_max + 1)]

    @staticmethod
    def _as_row(x) -> np.ndarray:
        return np.atleast_1d(np.asarray(x, dtype=float))


class CosineEigenSystem(EigenSystem):
    """Neumann cosines: psi_0 = 1/sqrt(L), psi_n = sqrt(2/L) cos(pi n x / L)."""

    kind = "cos"

    def __init__(self, band: Band, sigma: float, n_max: int):
        L = band.width
        n = np.arange(n_max + 1)
        energies = 0.5 * (math.pi * n / L) ** 2 * sigma**2
        super().__init__(band, sigma, energies, 0.0, 0.0)
        self._norms = np.full(n_max + 1, math.sqrt(2.0 / L))
        self._norms[0] = 1.0 / math.sqrt(L)
        self._wavenumbers = math.pi * n / L

    def psi_matrix(self, x):
        xr = self._as_row(x) - self.band.x_minus
        return self._norms[:, None] * np.cos(np.outer(self._wavenumbers, xr))

    def psi_prime_matrix(self, x):
        xr = self._as_row(x) - self.band.x_minus
        k = self._wavenumbers
        return -(self._norms * k)[:, None] * np.sin(np.outer(k, xr))

    def psi_pair_matrix(self, x, n_top=None):
        stop = self.n_max + 1 if n_top is None else n_top + 1
        xr = self._as_row(x) - self.band.x_minus
        k = self._wavenumbers[:stop]
        norms = self._norms[:stop]
        phase = np.outer(k, xr)
        return (norms[:, None] * np.cos(phase),
                -(norms * k)[:, None] * np.sin(phase))

    def sup_abs(self, n):
        return float(self._norms[n])


def tan_lambda(n: int, nu: float, L: float, tol: float = 1e-14) -> float:
    """n-th positive root of  lambda*tan((lambda*L - pi*n)/2) = nu*tan(nu*L/2).

    The root is bracketed in (n*pi/L, (n+1)*pi/L) where the left-hand side
    rises monotonically from 0 to +inf, so bisection is safe and the root is
    unique.  lambda_0 = nu exactly.
    """
    _check_nu(nu, L)
    if n < 0:
        raise ValidationError(f"mode index must be >= 0, got {n}")
    if n == 0:
        return float(nu)
    rhs = nu * math.tan(nu * L / 2.0)

    def resid(lam: float) -> float:
        return lam * math.tan((lam * L - math.pi * n) / 2.0) - rhs

    lo = n * math.pi / L
    hi = (n + 1) * math.pi / L
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if resid(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    lam = 0.5 * (lo + hi)
    r = abs(resid(lam))
    # slope of the left-hand side at the root; a residual consistent with a
    # one-ulp bracket is accepted even when it exceeds the absolute tol
    slope = abs(math.tan((lam * L - math.pi * n) / 2.0)) + lam * (L / 2.0) * (
        1.0 + (rhs / lam) ** 2
    )
    if r > tol * (1.0 + abs(rhs)) and r > 32.0 * slope * np.spacing(lam):
        raise NumericalError(
            f"tan eigenvalue bisection stalled at n={n}: residual {r:.3e}"
        )
    return lam


def tan_norm(n: int, lam: float, L: float) -> float:
    """Normalisation a_n = (L/2 [1 + (-1)^n sin(lam L)/(lam L)])^(-1/2).

    Evaluated through sin(lam*L - pi*n), which removes the cancellation when
    lam*L is close to a multiple of pi.
    """
    delta = lam * L - math.pi * n
    val = (L / 2.0) * (1.0 + math.sin(delta) / (lam * L))
    return 1.0 / math.sqrt(val)


class TanEigenSystem(EigenSystem):
    """psi_n = a_n cos(lambda_n (x - mid) + pi n / 2) with U = -nu^2."""

    kind = "tan"

    def __init__(self, nu: float, band: Band, sigma: float, n_max: int,
                 tol: float = 1e-14):
        L = band.width
        _check_nu(nu, L)
        lambdas = np.array([tan_lambda(n, nu, L, tol) for n in range(n_max + 1)])
        norms = np.array([tan_norm(n, lambdas[n], L) for n in range(n_max + 1)])
        energies = 0.5 * sigma**2 * (lambdas**2 - nu**2)
        energies[0] = 0.0
        hb = nu * math.tan(nu * L / 2.0)
        super().__init__(band, sigma, energies, hb, -hb)
        self.nu = float(nu)
        self.lambdas = lambdas
        self.norms = norms
        self._phase0 = 0.5 * math.pi * np.arange(n_max + 1)

    def _xi(self, x):
        return self._as_row(x) - self.band.mid

    def psi_matrix(self, x):
        xi = self._xi(x)
        return self.norms[:, None] * np.cos(
            np.outer(self.lambdas, xi) + self._phase0[:, None]
        )

    def psi_prime_matrix(self, x):
        xi = self._xi(x)
        return -(self.norms * self.lambdas)[:, None] * np.sin(
            np.outer(self.lambdas, xi) + self._phase0[:, None]
        )

    def psi_pair_matrix(self, x, n_top=None):
        stop = self.n_max + 1 if n_top is None else n_top + 1
        lam = self.lambdas[:stop]
        norms = self.norms[:stop]
        phase = np.outer(lam, self._xi(x)) + self._phase0[:stop, None]
        return (norms[:, None] * np.cos(phase),
                -(norms * lam)[:, None] * np.sin(phase))

    def sup_abs(self, n):
        return float(abs(self.norms[n]))

    def mode_records(self):
        return [(n, float(self.energies[n]), float(self.lambdas[n]),
                 float(self.norms[n])) for n in range(self.n_max + 1)]


class GridEigenSystem(EigenSystem):
    """Finite-difference eigen-system on a uniform grid.

    Eigenvalues carry an internal Richardson extrapolation (fine plus half
    grid); eigenfunctions are the fine-grid vectors, trapezoid-normalised,
    evaluated off-grid by linear interpolation.
    """

    kind = "numeric"

    def __init__(self, band, sigma, energies, h_minus, h_plus, grid, values,
                 e0_shift):
        super().__init__(band, sigma, energies, h_minus, h_plus)
        self.grid = grid
        self.values = values              # (n_max+1, M)
        self.e0_shift = float(e0_shift)   # eigenvalue shift applied to E_0
        self._dx = grid[1] - grid[0]
        self._derivs = np.gradient(values, self._dx, axis=1, edge_order=2)
        self._sup = np.max(np.abs(values), axis=1)

    def _interp(self, table, x):
        xr = self._as_row(x)
        pos = (xr - self.grid[0]) / self._dx
        idx = np.clip(pos.astype(int), 0, len(self.grid) - 2)
        frac = pos - idx
        return table[:, idx] * (1.0 - frac) + table[:, idx + 1] * frac

    def psi_matrix(self, x):
        return self._interp(self.values, x)

    def psi_prime_matrix(self, x):
        return self._interp(self._derivs, x)

    def psi_pair_matrix(self, x, n_top=None):
        stop = self.n_max + 1 if n_top is None else n_top + 1
        return (self._interp(self.values[:stop], x),
                self._interp(self._derivs[:stop], x))

    def sup_abs(self, n):
        return float(self._sup[n])


def cos_system(band: Band, sigma: float, n_max: int) -> CosineEigenSystem:
    """Closed-form system for flat potential and Neumann slopes."""
    if n_max < 1:
        raise ValidationError(f"n_max must be >= 1, got {n_max}")
    if sigma <= 0.0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    return CosineEigenSystem(band, sigma, n_max)


def tan_system(nu: float, band: Band, sigma: float, n_max: int,
               tol: float = 1e-14) -> TanEigenSystem:
    """Closed-form system for the constant potential U = -nu^2."""
    if n_max < 1:
        raise ValidationError(f"n_max must be >= 1, got {n_max}")
    if sigma <= 0.0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    return TanEigenSystem(nu, band, sigma, n_max, tol)


def _tridiag_eigen(U_vals, h_minus, h_plus, band, sigma, n_max, m):
    """Assemble and solve the symmetrised ghost-node discretisation."""
    L = band.width
    d = L / (m - 1)
    c = sigma**2 / (2.0 * d * d)
    diag = 2.0 * c + 0.5 * sigma**2 * U_vals
    diag = diag.copy()
    diag[0] = 2.0 * c * (1.0 + d * h_minus) + 0.5 * sigma**2 * U_vals[0]
    diag[-1] = 2.0 * c * (1.0 - d * h_plus) + 0.5 * sigma**2 * U_vals[-1]
    off = np.full(m - 1, -c)
    off[0] = -c * math.sqrt(2.0)
    off[-1] = -c * math.sqrt(2.0)
    w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_max))
    return w, v, d


def numeric_system(U, h_minus: float, h_plus: float, band: Band, sigma: float,
                   n_max: int = 64, grid_points: int = 2001) -> GridEigenSystem:
    """Generic Sturm-Liouville solver for a bounded potential.

    ``U`` is a vectorised callable on the band.  The discretisation is
    second-order central differences with the slope conditions imposed via
    ghost nodes; boundary rows are half-weighted so the operator is an exact
    symmetric tridiagonal matrix in the trapezoid inner product.  Eigenvalues
    from the full grid and the nested half grid are Richardson-extrapolated.
    The smallest eigenvalue is then shifted to exactly zero provided it is
    within the grid-error bound; a larger |E_0| signals an inconsistent
    (U, h_pm) triple and raises.
    """
    if grid_points < 201 or grid_points % 2 == 0:
        raise ValidationError(
            f"grid_points must be odd and >= 201, got {grid_points}"
        )
    if n_max < 1 or n_max > (grid_points + 1) // 2 - 2:
        raise ValidationError(f"n_max out of range for this grid: {n_max}")
    if sigma <= 0.0:
        raise ValidationError(f"sigma must be positive, got {sigma}")

    grid = band.grid(grid_points)
    U_fine = np.asarray(U(grid), dtype=float)
    if U_fine.ndim == 0:
        U_fine = np.full(grid_points, float(U_fine))
    if not np.all(np.isfinite(U_fine)):
        raise ValidationError("potential must be bounded on the band")

    w_fine, v_fine, d = _tridiag_eigen(U_fine, h_minus, h_plus, band, sigma,
                                       n_max, grid_points)
    m_half = (grid_points + 1) // 2
    w_half, _, _ = _tridiag_eigen(U_fine[::2], h_minus, h_plus, band, sigma,
                                  n_max, m_half)
    energies = w_fine + (w_fine - w_half) / 3.0

    scale = 0.5 * sigma**2 * (
        (math.pi / band.width) ** 2
        + np.max(np.abs(U_fine))
        + max(h_minus**2, h_plus**2)
    )
    bound = 100.0 * d * d * scale
    e0_shift = float(energies[0])
    if abs(e0_shift) > bound:
        raise NumericalError(
            "no zero-energy ground state: E_0 = "
            f"{e0_shift:.6e} exceeds the grid-error bound {bound:.6e}; "
            "the (U, h_pm) data are inconsistent"
        )
    energies[0] = 0.0

    # trapezoid weights: the eigenvectors are exactly orthonormal in this
    # inner product by construction of the symmetrised matrix
    weights = np.full(grid_points, 1.0)
    weights[0] = 0.5
    weights[-1] = 0.5
    values = (v_fine / np.sqrt(weights * d)[:, None]).T
    for i in range(n_max + 1):
        row = values[i]
        anchor = row[0] if abs(row[0]) > 1e-12 * np.max(np.abs(row)) else row[
            int(np.argmax(np.abs(row)))
        ]
        if anchor < 0:
            values[i] = -row
    return GridEigenSystem(band, sigma, energies, h_minus, h_plus, grid,
                           values, e0_shift)


def ground_state(h, band: Band, grid_points: int = 20001):
    """Normalised zero-energy eigenfunction psi_0 = a_0 exp(∫ h).

    ``h`` is a vectorised callable on the band.  Returns a callable; the
    normalisation constant is exposed as the ``a0`` attribute.
    """
    xs = band.grid(grid_points)
    hv = np.asarray(h(xs), dtype=float)
    if hv.ndim == 0:
        hv = np.full(grid_points, float(hv))
    integral = cumulative_simpson(hv, x=xs, initial=0.0)
    w = np.exp(integral)
    a0 = 1.0 / math.sqrt(simpson(w * w, x=xs))
    spline = CubicSpline(xs, w)

    def psi0(x):
        arr = np.clip(np.asarray(x, dtype=float), band.x_minus, band.x_plus)
        out = a0 * spline(arr)
        return float(out) if np.ndim(x) == 0 else out

    psi0.a0 = a0
    return psi0
