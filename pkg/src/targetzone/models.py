"""Target-zone FX rate models.

A model couples the bounded state diffusion

    dX_t = sigma dW_t + mu(X_t) dt,   X_t in [x_minus, x_plus], reflecting,

with a strictly increasing positive rate mapping S_t = f(X_t) whose slope
vanishes at both boundaries.  No-arbitrage then fixes the differential
(foreign minus domestic) short rate

    r(x) = mu(x) g'(x) + (sigma^2/2) (g''(x) + g'(x)^2),      g = ln f.

Derived fields used throughout the package:

    g = ln f,  h = g' + mu/sigma^2,  U = h^2 + h',  p = g' (local FXR vol).

Three explicit constructions are provided:

* ``build_cos_model``     -- flat potential (U = 0): mu = -sigma^2 g' and
                             f = S_mid / (1 + sqrt(2) gamma cos(pi x / L)).
* ``build_tan_model``     -- constant potential U = -nu^2 from the slope
                             field h = -nu tan(nu (x - mid)); mean-reverting
                             drift; f built from the first two eigenfunctions.
* ``build_quartic_model`` -- zero drift, cubic log-rate ramp g with a quartic
                             potential; solved by the numeric eigensolver.

``build_custom_model`` accepts arbitrary evaluators and fills in missing
derivatives with five-point finite differences.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import eigen
from .bands import Band, FxBand
from .errors import OutOfBandError, ValidationError

__all__ = [
    "ZoneModel",
    "CosModel",
    "TanModel",
    "QuarticModel",
    "CustomModel",
    "build_cos_model",
    "build_tan_model",
    "build_quartic_model",
    "build_custom_model",
    "fit_cos_band",
    "fit_tan_band",
    "fx_invert",
    "local_vol",
    "short_rate",
    "uip_rate",
    "model_from_dict",
    "model_to_dict",
    "model_from_json",
    "model_to_json",
]

_CLAMP_FRAC = 1e-12
_FD_STEP_FRAC = 1e-5


def _ret_like(x, value):
    return float(value) if np.ndim(x) == 0 else value


class ZoneModel:
    """Shared behaviour: domain checks, derived fields, inversion."""

    kind = "custom"

    def __init__(self, band: Band, sigma: float):
        if sigma <= 0.0:
            raise ValidationError(f"sigma must be positive, got {sigma}")
        self.band = band
        self.sigma = float(sigma)

    # -- domain ------------------------------------------------------------
    def _x(self, x) -> np.ndarray:
        """Validate x against the band; clamp roundoff-level excursions."""
        b = self.band
        tol = _CLAMP_FRAC * b.width
        arr = np.asarray(x, dtype=float)
        if np.any(arr < b.x_minus - tol) or np.any(arr > b.x_plus + tol):
            bad = arr[(arr < b.x_minus - tol) | (arr > b.x_plus + tol)]
            raise OutOfBandError("x", float(np.ravel(bad)[0]), b.x_minus, b.x_plus)
        return np.clip(arr, b.x_minus, b.x_plus)

    # -- fields implemented by subclasses ----------------------------------
    def f(self, x):
        raise NotImplementedError

    def g_prime(self, x):
        raise NotImplementedError

    def g_second(self, x):
        raise NotImplementedError

    def mu(self, x):
        raise NotImplementedError

    # -- derived fields ----------------------------------------------------
    def g(self, x):
        return _ret_like(x, np.log(self.f(x)))

    def f_prime(self, x):
        return _ret_like(x, np.asarray(self.f(x)) * np.asarray(self.g_prime(x)))

    def f_second(self, x):
        gp = np.asarray(self.g_prime(x))
        gs = np.asarray(self.g_second(x))
        return _ret_like(x, np.asarray(self.f(x)) * (gs + gp * gp))

    def h(self, x):
        xa = self._x(x)
        val = np.asarray(self.g_prime(xa)) + np.asarray(self.mu(xa)) / self.sigma**2
        return _ret_like(x, val)

    def h_prime(self, x):
        """d/dx of h; default five-point finite difference."""
        return _fd_derivative(self.h, self._x(x), self.band,
                              _FD_STEP_FRAC * self.band.width, order=1,
                              like=x)

    def potential(self, x):
        hv = np.asarray(self.h(x))
        return _ret_like(x, hv * hv + np.asarray(self.h_prime(x)))

    def local_vol(self, x):
        """p(x) = g'(x): lognormal volatility shape of the FX rate."""
        return self.g_prime(self._x(x))

    def short_rate(self, x):
        """Differential short rate fixed by no-arbitrage."""
        xa = self._x(x)
        gp = np.asarray(self.g_prime(xa))
        gs = np.asarray(self.g_second(xa))
        val = np.asarray(self.mu(xa)) * gp + 0.5 * self.sigma**2 * (gs + gp * gp)
        return _ret_like(x, val)

    # -- quote band ----------------------------------------------------------
    @property
    def s_minus(self) -> float:
        return float(self.f(self.band.x_minus))

    @property
    def s_plus(self) -> float:
        return float(self.f(self.band.x_plus))

    @property
    def s_mid(self) -> float:
        return float(self.f(self.band.mid))

    @property
    def fx_band(self) -> FxBand:
        return FxBand(self.s_minus, self.s_mid, self.s_plus)

    # -- inversion -----------------------------------------------------------
    def _check_s(self, s: float) -> float:
        lo, hi = self.s_minus, self.s_plus
        tol = _CLAMP_FRAC * self.s_mid
        if s < lo - tol or s > hi + tol:
            raise OutOfBandError("s", s, lo, hi)
        return min(max(s, lo), hi)

    def fx_invert(self, s: float) -> float:
        """x with f(x) = s, by bisection (f is strictly increasing)."""
        s = self._check_s(float(s))
        a, b = self.band.x_minus, self.band.x_plus
        for _ in range(200):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if self.f(mid) < s:
                a = mid
            else:
                b = mid
        return 0.5 * (a + b)

    # -- eigen ---------------------------------------------------------------
    def eigensystem(self, n_max: int = 64, grid_points: int = 2001):
        """Eigen-system matching this model's potential and boundary slopes."""
        if self.kind == "cos":
            return eigen.cos_system(self.band, self.sigma, n_max)
        if self.kind == "tan":
            return eigen.tan_system(self.nu, self.band, self.sigma, n_max)
        return eigen.numeric_system(
            self.potential,
            float(self.h(self.band.x_minus)),
            float(self.h(self.band.x_plus)),
            self.band,
            self.sigma,
            n_max,
            grid_points,
        )


def _fd_derivative(func, x, band: Band, step: float, order: int, like=None):
    """Five-point finite differences, stencil shifted to stay inside the band."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    lo, hi = band.x_minus, band.x_plus
    out = np.empty_like(arr)
    for i, xi in enumerate(arr):
        if xi - 2 * step >= lo and xi + 2 * step <= hi:
            pts = xi + step * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
            vals = np.array([func(p) for p in pts])
            if order == 1:
                out[i] = (vals[0] - 8 * vals[1] + 8 * vals[3] - vals[4]) / (12 * step)
            else:
                out[i] = (-vals[0] + 16 * vals[1] - 30 * vals[2]
                          + 16 * vals[3] - vals[4]) / (12 * step**2)
        else:
            sign = 1.0 if xi - 2 * step < lo else -1.0
            pts = xi + sign * step * np.arange(5.0)
            vals = np.array([func(p) for p in pts])
            if order == 1:
                out[i] = sign * (-25 * vals[0] + 48 * vals[1] - 36 * vals[2]
                                 + 16 * vals[3] - 3 * vals[4]) / (12 * step)
            else:
                out[i] = (35 * vals[0] - 104 * vals[1] + 114 * vals[2]
                          - 56 * vals[3] + 11 * vals[4]) / (12 * step**2)
    template = x if like is None else like
    return _ret_like(template, out if np.ndim(template) else out[0])


class CosModel(ZoneModel):
    """Flat-potential model: f = S_mid / (1 + sqrt(2) gamma cos(pi x / L))."""

    kind = "cos"

    def __init__(self, s_mid: float, gamma: float, band: Band, sigma: float):
        super().__init__(band, sigma)
        if gamma <= 0.0:
            raise ValidationError(f"gamma must be positive, got {gamma}")
        if math.sqrt(2.0) * gamma >= 1.0:
            raise ValidationError(
                f"sqrt(2)*gamma must be < 1 for a positive monotone rate "
                f"mapping, got gamma={gamma}"
            )
        if s_mid <= 0.0:
            raise ValidationError(f"s_mid must be positive, got {s_mid}")
        self._s_mid = float(s_mid)
        self.gamma = float(gamma)
        self._c = math.sqrt(2.0) * gamma
        self._k = math.pi / band.width

    @property
    def s_mid(self) -> float:
        return self._s_mid

    @property
    def s_minus(self) -> float:
        return self._s_mid / (1.0 + self._c)

    @property
    def s_plus(self) -> float:
        return self._s_mid / (1.0 - self._c)

    def _theta(self, x):
        return self._k * (self._x(x) - self.band.x_minus)

    def f(self, x):
        return _ret_like(x, self._s_mid / (1.0 + self._c * np.cos(self._theta(x))))

    def g_prime(self, x):
        th = self._theta(x)
        return _ret_like(
            x, self._c * self._k * np.sin(th) / (1.0 + self._c * np.cos(th))
        )

    def g_second(self, x):
        th = self._theta(x)
        den = 1.0 + self._c * np.cos(th)
        return _ret_like(
            x, self._c * self._k**2 * (np.cos(th) + self._c) / (den * den)
        )

    def mu(self, x):
        return _ret_like(x, -self.sigma**2 * np.asarray(self.g_prime(x)))

    def h(self, x):
        self._x(x)
        return _ret_like(x, np.zeros(np.shape(x)))

    def h_prime(self, x):
        self._x(x)
        return _ret_like(x, np.zeros(np.shape(x)))

    def potential(self, x):
        self._x(x)
        return _ret_like(x, np.zeros(np.shape(x)))

    def fx_invert(self, s: float) -> float:
        s = self._check_s(float(s))
        u = (self._s_mid / s - 1.0) / self._c
        return self.band.x_minus + math.acos(min(1.0, max(-1.0, u))) / self._k


class TanEigenData:
    """First two eigen-modes of the tangent slope field (shared by TanModel)."""

    def __init__(self, nu: float, band: Band, sigma: float):
        L = band.width
        self.nu = nu
        self.lambda1 = eigen.tan_lambda(1, nu, L)
        self.a0 = eigen.tan_norm(0, nu, L)
        self.a1 = eigen.tan_norm(1, self.lambda1, L)
        self.e1 = 0.5 * sigma**2 * (self.lambda1**2 - nu**2)


class TanModel(ZoneModel):
    """Constant-potential mean-reverting model built on h = -nu tan(nu (x-mid)).

    The rate mapping is f = S_mid / (1 + gamma psi_1/psi_0), which makes the
    zero-coupon bond and the differential short rate closed-form.
    """

    kind = "tan"

    def __init__(self, s_mid: float, gamma: float, nu: float, band: Band,
                 sigma: float):
        super().__init__(band, sigma)
        eigen._check_nu(nu, band.width)
        if gamma <= 0.0:
            raise ValidationError(f"gamma must be positive, got {gamma}")
        if s_mid <= 0.0:
            raise ValidationError(f"s_mid must be positive, got {s_mid}")
        self._s_mid = float(s_mid)
        self.gamma = float(gamma)
        self.nu = float(nu)
        self._modes = TanEigenData(nu, band, sigma)
        # reject gammas that push 1 + gamma psi_1/psi_0 through zero
        q = 1.0 + self.gamma * self._ratio(band.grid(4001))
        if np.min(q) <= 1e-10:
            raise ValidationError(
                f"gamma={gamma} violates positivity of 1 + gamma psi_1/psi_0"
            )

    @property
    def s_mid(self) -> float:
        return self._s_mid

    def _xi(self, x):
        return self._x(x) - self.band.mid

    def _psi0(self, xi):
        return self._modes.a0 * np.cos(self.nu * xi)

    def _psi1(self, xi):
        return -self._modes.a1 * np.sin(self._modes.lambda1 * xi)

    def _ratio(self, x):
        xi = np.asarray(x, dtype=float) - self.band.mid
        return self._psi1(xi) / self._psi0(xi)

    def _ratio_derivs(self, x):
        """R = psi1/psi0 with first and second derivatives."""
        xi = self._xi(x)
        m = self._modes
        p0 = self._psi0(xi)
        p1 = self._psi1(xi)
        dp0 = -m.a0 * self.nu * np.sin(self.nu * xi)
        dp1 = -m.a1 * m.lambda1 * np.cos(m.lambda1 * xi)
        r = p1 / p0
        rp = (dp1 * p0 - p1 * dp0) / (p0 * p0)
        hv = -self.nu * np.tan(self.nu * xi)
        rpp = -(2.0 * m.e1 / self.sigma**2) * r - 2.0 * hv * rp
        return r, rp, rpp, hv

    def f(self, x):
        xi = self._xi(x)
        return _ret_like(
            x, self._s_mid / (1.0 + self.gamma * self._psi1(xi) / self._psi0(xi))
        )

    def g_prime(self, x):
        r, rp, _, _ = self._ratio_derivs(x)
        return _ret_like(x, -self.gamma * rp / (1.0 + self.gamma * r))

    def g_second(self, x):
        r, rp, rpp, _ = self._ratio_derivs(x)
        q = 1.0 + self.gamma * r
        gp = -self.gamma * rp / q
        return _ret_like(x, -self.gamma * rpp / q + gp * gp)

    def h(self, x):
        xi = self._xi(x)
        return _ret_like(x, -self.nu * np.tan(self.nu * xi))

    def h_prime(self, x):
        xi = self._xi(x)
        return _ret_like(x, -self.nu**2 / np.cos(self.nu * xi) ** 2)

    def mu(self, x):
        r, rp, _, hv = self._ratio_derivs(x)
        gp = -self.gamma * rp / (1.0 + self.gamma * r)
        return _ret_like(x, self.sigma**2 * (hv - gp))

    def potential(self, x):
        self._x(x)
        return _ret_like(x, np.full(np.shape(x), -self.nu**2))

    @property
    def e1(self) -> float:
        return self._modes.e1


class QuarticModel(ZoneModel):
    """Zero-drift model with a cubic log-rate ramp and quartic potential."""

    kind = "quartic"

    def __init__(self, gamma: float, s_minus: float, band: Band, sigma: float):
        super().__init__(band, sigma)
        if gamma <= 0.0:
            raise ValidationError(f"gamma must be positive, got {gamma}")
        if s_minus <= 0.0:
            raise ValidationError(f"s_minus must be positive, got {s_minus}")
        self.gamma = float(gamma)
        self._s_minus = float(s_minus)

    def _u(self, x):
        return (self._x(x) - self.band.x_minus) / self.band.width

    def f(self, x):
        u = self._u(x)
        return _ret_like(
            x, self._s_minus * np.exp(self.gamma * (3.0 * u * u - 2.0 * u**3))
        )

    def g_prime(self, x):
        u = self._u(x)
        return _ret_like(x, (6.0 * self.gamma / self.band.width) * (u - u * u))

    def g_second(self, x):
        u = self._u(x)
        return _ret_like(
            x, (6.0 * self.gamma / self.band.width**2) * (1.0 - 2.0 * u)
        )

    def mu(self, x):
        self._x(x)
        return _ret_like(x, np.zeros(np.shape(x)))

    def h(self, x):
        return self.g_prime(x)

    def h_prime(self, x):
        return self.g_second(x)

    def potential(self, x):
        u = self._u(x)
        L2 = self.band.width**2
        return _ret_like(
            x,
            (6.0 * self.gamma / L2)
            * (1.0 - 2.0 * u + 6.0 * self.gamma * (u - u * u) ** 2),
        )

    @property
    def s_minus(self) -> float:
        return self._s_minus

    @property
    def s_plus(self) -> float:
        return self._s_minus * math.exp(self.gamma)


class CustomModel(ZoneModel):
    """User-supplied rate mapping; missing derivatives via finite differences."""

    kind = "custom"

    def __init__(self, f, band: Band, sigma: float, mu=None, f_prime=None,
                 f_second=None):
        super().__init__(band, sigma)
        self._f = f
        self._mu = mu
        self._fp = f_prime
        self._fpp = f_second
        self._step = _FD_STEP_FRAC * band.width
        self._validate()

    def _validate(self):
        xs = self.band.grid(1001)
        fv = np.asarray(self._f(xs), dtype=float)
        if np.any(fv <= 0.0):
            raise ValidationError("custom rate mapping must be positive")
        if np.any(np.diff(fv) <= 0.0):
            raise ValidationError("custom rate mapping must be strictly increasing")
        slope_scale = np.max(fv) / self.band.width
        for edge in (self.band.x_minus, self.band.x_plus):
            if abs(self.f_prime(edge)) > 1e-6 * slope_scale:
                raise ValidationError(
                    "custom rate mapping must have zero slope at the boundaries"
                )

    def f(self, x):
        return _ret_like(x, np.asarray(self._f(self._x(x)), dtype=float))

    def f_prime(self, x):
        if self._fp is not None:
            return _ret_like(x, np.asarray(self._fp(self._x(x)), dtype=float))
        return _fd_derivative(self._f, self._x(x), self.band, self._step, 1, like=x)

    def f_second(self, x):
        if self._fpp is not None:
            return _ret_like(x, np.asarray(self._fpp(self._x(x)), dtype=float))
        return _fd_derivative(self._f, self._x(x), self.band, self._step, 2, like=x)

    def g_prime(self, x):
        return _ret_like(
            x, np.asarray(self.f_prime(x)) / np.asarray(self.f(x))
        )

    def g_second(self, x):
        gp = np.asarray(self.g_prime(x))
        return _ret_like(
            x, np.asarray(self.f_second(x)) / np.asarray(self.f(x)) - gp * gp
        )

    def mu(self, x):
        self._x(x)
        if self._mu is None:
            return _ret_like(x, np.zeros(np.shape(x)))
        return _ret_like(x, np.asarray(self._mu(self._x(x)), dtype=float))


# ---------------------------------------------------------------------------
# builders, fits and free-function forms of the model operations
# ---------------------------------------------------------------------------

def build_cos_model(s_mid: float, gamma: float, band: Band = Band(),
                    sigma: float = 0.1) -> CosModel:
    return CosModel(s_mid, gamma, band, sigma)


def build_tan_model(s_mid: float, gamma: float, nu: float, band: Band = Band(),
                    sigma: float = 0.1) -> TanModel:
    return TanModel(s_mid, gamma, nu, band, sigma)


def build_quartic_model(gamma: float, s_minus: float, band: Band = Band(),
                        sigma: float = 0.1) -> QuarticModel:
    return QuarticModel(gamma, s_minus, band, sigma)


def build_custom_model(f, band: Band = Band(), sigma: float = 0.1, mu=None,
                       f_prime=None, f_second=None) -> CustomModel:
    return CustomModel(f, band, sigma, mu, f_prime, f_second)


def _fit_from_edge_ratio(s_minus: float, s_plus: float, edge_ratio: float):
    """Solve S_pm = S_mid/(1 + gamma R(x_pm)) for (S_mid, gamma).

    ``edge_ratio`` is psi_1/psi_0 at the lower edge (the upper edge carries
    the opposite sign by symmetry).
    """
    if not 0.0 < s_minus < s_plus:
        raise ValidationError(
            f"need 0 < s_minus < s_plus, got ({s_minus}, {s_plus})"
        )
    gamma = (s_plus - s_minus) / (edge_ratio * (s_minus + s_plus))
    s_mid = s_minus * (1.0 + gamma * edge_ratio)
    return s_mid, gamma


def fit_cos_band(s_minus: float, s_plus: float):
    """(S_mid, gamma) reproducing the quote band exactly (harmonic-mean fit)."""
    return _fit_from_edge_ratio(s_minus, s_plus, math.sqrt(2.0))


def fit_tan_band(s_minus: float, s_plus: float, nu: float,
                 band: Band = Band()):
    """(S_mid, gamma) for the tangent model hitting the quote band exactly."""
    L = band.width
    eigen._check_nu(nu, L)
    lam1 = eigen.tan_lambda(1, nu, L)
    a0 = eigen.tan_norm(0, nu, L)
    a1 = eigen.tan_norm(1, lam1, L)
    edge = a1 * math.sin(lam1 * L / 2.0) / (a0 * math.cos(nu * L / 2.0))
    return _fit_from_edge_ratio(s_minus, s_plus, edge)


def fx_invert(model: ZoneModel, s: float) -> float:
    return model.fx_invert(s)


def local_vol(model: ZoneModel, x):
    return model.local_vol(x)


def short_rate(model: ZoneModel, x):
    return model.short_rate(x)


def uip_rate(mu: float, sigma: float) -> float:
    """Uncovered-interest-parity rate for the unbounded lognormal FX rate."""
    return mu + 0.5 * sigma**2


# ---------------------------------------------------------------------------
# JSON serialisation
# ---------------------------------------------------------------------------

_KEYS_BY_KIND = {
    "cos": {"kind", "s_mid", "gamma", "sigma", "x_minus", "x_plus"},
    "tan": {"kind", "s_mid", "gamma", "nu", "sigma", "x_minus", "x_plus"},
    "quartic": {"kind", "s_mid", "gamma", "sigma", "x_minus", "x_plus"},
}


def model_from_dict(data: dict, path: str = "model") -> ZoneModel:
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    kind = data.get("kind")
    if kind == "custom":
        raise ValidationError(
            f"{path}.kind: 'custom' models need Python evaluators and cannot "
            "be built from JSON"
        )
    if kind not in _KEYS_BY_KIND:
        raise ValidationError(
            f"{path}.kind: expected one of cos|tan|quartic|custom, got {kind!r}"
        )
    allowed = _KEYS_BY_KIND[kind]
    for key in data:
        if key not in allowed:
            raise ValidationError(f"{path}.{key}: unknown key for kind={kind}")
    missing = allowed - set(data)
    if missing:
        raise ValidationError(
            f"{path}: missing keys {sorted(missing)} for kind={kind}"
        )

    def num(key):
        v = data[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"{path}.{key}: expected a number, got {v!r}")
        return float(v)

    band = Band(num("x_minus"), num("x_plus"))
    sigma = num("sigma")
    if kind == "cos":
        return build_cos_model(num("s_mid"), num("gamma"), band, sigma)
    if kind == "tan":
        return build_tan_model(num("s_mid"), num("gamma"), num("nu"), band, sigma)
    # quartic: the JSON mid quote is f at the band midpoint = s_minus e^(gamma/2)
    gamma = num("gamma")
    s_minus = num("s_mid") * math.exp(-0.5 * gamma)
    return build_quartic_model(gamma, s_minus, band, sigma)


def model_to_dict(model: ZoneModel) -> dict:
    if model.kind not in _KEYS_BY_KIND:
        raise ValidationError(
            f"kind={model.kind!r} models cannot be serialised to JSON"
        )
    out = {
        "kind": model.kind,
        "s_mid": model.s_mid,
        "gamma": model.gamma,
        "sigma": model.sigma,
        "x_minus": model.band.x_minus,
        "x_plus": model.band.x_plus,
    }
    if model.kind == "tan":
        out["nu"] = model.nu
    return out


def model_from_json(text: str) -> ZoneModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"model: invalid JSON ({exc})") from exc
    return model_from_dict(data)


def model_to_json(model: ZoneModel) -> str:
    return json.dumps(model_to_dict(model), indent=2)
