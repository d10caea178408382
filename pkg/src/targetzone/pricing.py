"""Series pricing of European claims on the banded FX rate.

The price of a claim Y(X_T) under the foreign-numeraire convention (cash bond
normalised to 1 at valuation) is

    v(x, tau) = f(x) [ c_0 + (1/psi_0(x)) sum_{n>=1} c_n psi_n(x) e^{-E_n tau} ]
    c_n = ∫ psi_0 psi_n Y/f dx                 over the band,

with {E_n, psi_n} the model's eigen-system.  Coefficients come either from
adaptive quadrature (any claim, any model) or from closed forms for the
cosine and tangent models' calls, bonds and forwards.

Strike handling outside the quote band is linear by construction: a call
struck below S_minus prices as a forward, above S_plus as zero, and puts and
binaries mirror that policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad_vec, simpson

from . import eigen as eigen_mod
from .eigen import EigenSystem, GridEigenSystem
from .errors import NumericalError, ValidationError
from .models import TanModel, ZoneModel

__all__ = [
    "Claim",
    "CoefficientSet",
    "PriceResult",
    "coeffs_generic",
    "coeffs_call_cos",
    "coeffs_call_tan",
    "coeffs_bond",
    "coeffs_forward",
    "claim_coefficients",
    "price_series",
    "price",
    "call_price",
    "put_price",
    "forward_price",
    "binary_price",
    "bond_price",
]

DEFAULT_N = 64
_TAIL_TOL_FRAC = 1e-10
_GIBBS_FRAC = 1e-6


@dataclass(frozen=True)
class Claim:
    """Payoff specification expressed through the rate mapping f."""

    kind: str
    strike: Optional[float] = None
    payoff: Optional[Callable] = None

    _KINDS = ("call", "put", "binary", "bond", "forward", "custom")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValidationError(f"unknown claim kind {self.kind!r}")
        if self.kind in ("call", "put", "binary", "forward"):
            if self.strike is None:
                raise ValidationError(f"{self.kind} claim needs a strike")
            if self.kind != "forward" and self.strike < 0.0:
                raise ValidationError(f"strike must be >= 0, got {self.strike}")
        if self.kind == "custom" and self.payoff is None:
            raise ValidationError("custom claim needs a payoff callable")

    @classmethod
    def call(cls, strike: float) -> "Claim":
        return cls("call", strike=float(strike))

    @classmethod
    def put(cls, strike: float) -> "Claim":
        return cls("put", strike=float(strike))

    @classmethod
    def binary(cls, strike: float) -> "Claim":
        return cls("binary", strike=float(strike))

    @classmethod
    def bond(cls) -> "Claim":
        return cls("bond")

    @classmethod
    def forward(cls, strike: float = 0.0) -> "Claim":
        return cls("forward", strike=float(strike))

    @classmethod
    def custom(cls, payoff: Callable) -> "Claim":
        return cls("custom", payoff=payoff)

    def payoff_x(self, model: ZoneModel) -> Callable:
        """Terminal payoff as a vectorised function of the state x."""
        k = self.strike
        if self.kind == "call":
            return lambda x: np.maximum(np.asarray(model.f(x)) - k, 0.0)
        if self.kind == "put":
            return lambda x: np.maximum(k - np.asarray(model.f(x)), 0.0)
        if self.kind == "binary":
            return lambda x: (np.asarray(model.f(x)) > k).astype(float)
        if self.kind == "bond":
            return lambda x: np.ones(np.shape(x)) if np.ndim(x) else 1.0
        if self.kind == "forward":
            return lambda x: np.asarray(model.f(x)) - k
        return self.payoff


@dataclass(frozen=True)
class CoefficientSet:
    """Series coefficients of a claim under one model's eigen-basis."""

    values: np.ndarray
    claim: Claim
    model_kind: str
    hedgeable: bool = True

    @property
    def n_max(self) -> int:
        return len(self.values) - 1


@dataclass(frozen=True)
class PriceResult:
    value: float
    n_used: int
    tail_bound: float
    x_hat: float
    warning: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "n_used": self.n_used,
            "tail_bound": self.tail_bound,
            "x_hat": self.x_hat,
        }


# ---------------------------------------------------------------------------
# coefficient construction
# ---------------------------------------------------------------------------

def _kink(claim: Claim, model: ZoneModel) -> Optional[float]:
    if claim.kind in ("call", "put", "binary"):
        k = claim.strike
        if model.s_minus < k < model.s_plus:
            return model.fx_invert(k)
    return None


def _quad_segments(claim: Claim, model: ZoneModel):
    a, b = model.band.x_minus, model.band.x_plus
    x_star = _kink(claim, model)
    if x_star is None:
        return [(a, b)]
    if claim.kind in ("call", "binary"):
        return [(x_star, b)]
    if claim.kind == "put":
        return [(a, x_star)]
    return [(a, x_star), (x_star, b)]


def _custom_hedgeable(claim: Claim, model: ZoneModel) -> bool:
    """Check Y'(x_pm) = 0 by one-sided finite differences."""
    y = claim.payoff
    band = model.band
    d = 1e-5 * band.width
    grid = band.grid(101)
    scale = max(1.0, float(np.max(np.abs(np.asarray(y(grid), dtype=float)))))

    def one_sided(x0, sign):
        pts = x0 + sign * d * np.arange(5.0)
        v = np.asarray([float(y(p)) for p in pts])
        return sign * (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3]
                       - 3 * v[4]) / (12 * d)

    slope = max(abs(one_sided(band.x_minus, 1.0)),
                abs(one_sided(band.x_plus, -1.0)))
    return slope <= 1e-6 * scale / band.width


def coeffs_generic(claim: Claim, eig: EigenSystem, model: ZoneModel,
                   epsabs: float = 1e-12) -> CoefficientSet:
    """c_n = ∫ psi_0 psi_n Y/f dx by adaptive quadrature split at the kink.

    Grid eigen-systems integrate with composite Simpson on refined segment
    grids instead (their eigenfunctions only exist at grid accuracy).
    """
    payoff = claim.payoff_x(model)
    segments = _quad_segments(claim, model)
    n_coeff = eig.n_max + 1

    if isinstance(eig, GridEigenSystem):
        total = np.zeros(n_coeff)
        for a, b in segments:
            if b - a <= 0:
                continue
            xs = np.linspace(a, b, 8193)
            mat = eig.psi_matrix(xs)
            integrand = mat * (mat[0] * np.asarray(payoff(xs))
                               / np.asarray(model.f(xs)))
            total += simpson(integrand, x=xs, axis=1)
    else:
        def integrand(x):
            col = eig.psi_matrix(x)[:, 0]
            return col * (col[0] * float(payoff(x)) / model.f(x))

        total = np.zeros(n_coeff)
        for a, b in segments:
            if b - a <= 0:
                continue
            res, err, info = quad_vec(integrand, a, b, epsabs=epsabs,
                                      epsrel=1e-10, norm="max", limit=2000,
                                      full_output=True)
            if not info.success:
                worst = float(np.max(getattr(info, "errors", [err])))
                raise NumericalError(
                    f"coefficient quadrature did not converge on [{a}, {b}]: "
                    f"worst subinterval error {worst:.3e}"
                )
            total += res

    hedgeable = claim.kind != "binary"
    if claim.kind == "custom":
        hedgeable = _custom_hedgeable(claim, model)
    return CoefficientSet(total, claim, model.kind, hedgeable)


def coeffs_call_cos(k: float, model: ZoneModel, n_max: int = DEFAULT_N
                    ) -> CoefficientSet:
    """Closed-form call coefficients for the cosine model."""
    if model.kind != "cos":
        raise ValidationError("coeffs_call_cos requires a cosine model")
    _require_in_quote_band(k, model)
    s = model.s_mid
    c = math.sqrt(2.0) * model.gamma
    u = (s / k - 1.0) / c
    phi = math.acos(min(1.0, max(-1.0, u)))
    pref = model.gamma * k / (math.pi * s)

    vals = np.empty(n_max + 1)
    vals[0] = math.sqrt(2.0) * pref * ((math.pi - phi) * math.cos(phi)
                                       + math.sin(phi))
    vals[1] = -pref * (math.pi - phi + math.sin(phi) * math.cos(phi))
    n = np.arange(2, n_max + 1)
    vals[2:] = pref * (np.sin((n + 1) * phi) / (n + 1)
                       + np.sin((n - 1) * phi) / (n - 1)
                       - 2.0 * math.cos(phi) * np.sin(n * phi) / n)
    return CoefficientSet(vals, Claim.call(k), "cos")


def coeffs_call_tan(k: float, model: TanModel, n_max: int = DEFAULT_N
                    ) -> CoefficientSet:
    """Closed-form call coefficients for the tangent model.

    Difference quotients are evaluated through exact product identities
    (sin y / y factors), which realises their analytic limits continuously
    for near-degenerate wavenumber gaps.
    """
    if model.kind != "tan":
        raise ValidationError("coeffs_call_tan requires a tangent model")
    _require_in_quote_band(k, model)
    band = model.band
    L = band.width
    nu = model.nu
    s = model.s_mid
    gamma = model.gamma

    x_star = model.fx_invert(k) - band.x_minus
    half = L - x_star                      # length of the in-the-money leg
    mid = 0.5 * x_star                     # (L/2 + xi_star)/2 in centred coords

    lambdas = np.array([eigen_mod.tan_lambda(n, nu, L)
                        for n in range(n_max + 1)])
    norms = np.array([eigen_mod.tan_norm(n, lambdas[n], L)
                      for n in range(n_max + 1)])
    a0, a1 = norms[0], norms[1]
    lam1 = lambdas[1]

    def dsin(a, n):
        # [sin(aL/2 + pi n/2) - sin(a xi_* + pi n/2)] / a
        return half * np.cos(a * mid + 0.5 * math.pi * n) * eigen_mod._sin_over(
            0.5 * a * half)

    def gcos(a, n):
        # [cos(aL/2 + pi n/2) - cos(a xi_* + pi n/2)] / a
        return -half * np.sin(a * mid + 0.5 * math.pi * n) * eigen_mod._sin_over(
            0.5 * a * half)

    p00 = 0.5 * a0**2 * half * (1.0 + math.cos(nu * x_star)
                                * float(eigen_mod._sin_over(nu * half)))
    p11 = 0.5 * a1**2 * half * (1.0 - math.cos(lam1 * x_star)
                                * float(eigen_mod._sin_over(lam1 * half)))
    p01 = 0.5 * a0 * a1 * (gcos(lam1 - nu, 0) + gcos(lam1 + nu, 0))

    w_fwd = 1.0 - k / s
    w_bond = gamma * k / s

    vals = np.empty(n_max + 1)
    vals[0] = w_fwd * p00 - w_bond * p01
    vals[1] = w_fwd * p01 - w_bond * p11
    n = np.arange(2, n_max + 1)
    lam_n = lambdas[2:]
    a_n = norms[2:]
    p0n = 0.5 * a0 * a_n * (dsin(lam_n - nu, n) + dsin(lam_n + nu, n))
    p1n = 0.5 * a1 * a_n * (gcos(lam_n + lam1, n) - gcos(lam_n - lam1, n))
    vals[2:] = w_fwd * p0n - w_bond * p1n
    return CoefficientSet(vals, Claim.call(k), "tan")


def _require_in_quote_band(k: float, model: ZoneModel) -> None:
    lo, hi = model.s_minus, model.s_plus
    tol = 1e-12 * model.s_mid
    if k < lo - tol or k > hi + tol:
        raise ValidationError(
            f"strike {k} outside the quote band [{lo}, {hi}]"
        )


def _zero_coeffs(claim: Claim, eig: EigenSystem, model_kind: str,
                 hedgeable=True) -> CoefficientSet:
    return CoefficientSet(np.zeros(eig.n_max + 1), claim, model_kind, hedgeable)


def coeffs_bond(eig: EigenSystem, model: ZoneModel,
                epsabs: float = 1e-12) -> CoefficientSet:
    """Unit claim.  Closed form c = (1, gamma)/S_mid for cos/tan models."""
    if model.kind in ("cos", "tan"):
        vals = np.zeros(eig.n_max + 1)
        vals[0] = 1.0 / model.s_mid
        vals[1] = model.gamma / model.s_mid
        return CoefficientSet(vals, Claim.bond(), model.kind)
    return coeffs_generic(Claim.bond(), eig, model, epsabs)


def coeffs_forward(k: float, eig: EigenSystem, model: ZoneModel,
                   epsabs: float = 1e-12) -> CoefficientSet:
    """Y = f - k: the unit-forward coefficient minus k times the bond's."""
    vals = -k * coeffs_bond(eig, model, epsabs).values
    vals[0] += 1.0
    return CoefficientSet(vals, Claim.forward(k), model.kind)


def claim_coefficients(claim: Claim, eig: EigenSystem, model: ZoneModel,
                       method: str = "auto",
                       epsabs: float = 1e-12) -> CoefficientSet:
    """Best available coefficient route for the claim, with strike clamping."""
    if method not in ("auto", "generic", "closed"):
        raise ValidationError(f"unknown coefficient method {method!r}")
    kind = claim.kind
    if kind == "bond":
        return coeffs_bond(eig, model, epsabs)
    if kind == "forward":
        return coeffs_forward(claim.strike, eig, model, epsabs)
    if kind == "custom":
        return coeffs_generic(claim, eig, model, epsabs)

    k = claim.strike
    lo, hi = model.s_minus, model.s_plus
    if kind == "call":
        if k < lo:
            fwd = coeffs_forward(k, eig, model, epsabs)
            return CoefficientSet(fwd.values, claim, model.kind)
        if k > hi:
            return _zero_coeffs(claim, eig, model.kind)
        if method != "generic" and model.kind == "cos":
            return coeffs_call_cos(k, model, eig.n_max)
        if method != "generic" and model.kind == "tan":
            return coeffs_call_tan(k, model, eig.n_max)
        return coeffs_generic(claim, eig, model, epsabs)
    if kind == "put":
        if k < lo:
            return _zero_coeffs(claim, eig, model.kind)
        call_part = (
            _zero_coeffs(Claim.call(k), eig, model.kind).values
            if k > hi
            else claim_coefficients(Claim.call(k), eig, model, method,
                                    epsabs).values
        )
        fwd = coeffs_forward(k, eig, model, epsabs)
        return CoefficientSet(call_part - fwd.values, claim, model.kind)
    if kind == "binary":
        if k < lo:
            bond = coeffs_bond(eig, model, epsabs)
            return CoefficientSet(bond.values, claim, model.kind,
                                  hedgeable=False)
        if k > hi:
            return _zero_coeffs(claim, eig, model.kind, hedgeable=False)
        return coeffs_generic(claim, eig, model, epsabs)
    raise ValidationError(f"unknown claim kind {kind!r}")


# ---------------------------------------------------------------------------
# series evaluation
# ---------------------------------------------------------------------------

def price_series(s_t: float, tau: float, coeffs: CoefficientSet,
                 eig: EigenSystem, model: ZoneModel) -> PriceResult:
    """Evaluate the eigen-series price at spot s_t and tenor tau.

    The series is truncated at the first mode whose geometrically-summed
    tail bound drops below 1e-10 * S_mid, capped at the basis size.  If the
    cap is hit with a large remaining bound the result carries the
    short-tenor (Gibbs) warning flag and the reported bound is the last
    term's magnitude.
    """
    if tau < 0.0:
        raise ValidationError(f"tenor must be >= 0, got {tau}")
    if coeffs.n_max > eig.n_max:
        raise ValidationError(
            f"coefficient set has {coeffs.n_max + 1} modes but the basis only "
            f"{eig.n_max + 1}"
        )
    s_t = model._check_s(float(s_t))
    x_hat = model.fx_invert(s_t)
    psi_hat = eig.psi_matrix(x_hat)[:, 0]
    psi0_hat = psi_hat[0]
    pref = s_t / psi0_hat
    c = coeffs.values
    n_top = coeffs.n_max
    energies = eig.energies
    tol = _TAIL_TOL_FRAC * model.s_mid

    # suffix maximum of the undamped term amplitudes: the bound for the tail
    # from mode n must cover every remaining mode, not just mode n itself
    amps = np.abs(c) * np.array([eig.sup_abs(n) for n in range(n_top + 1)])
    amps *= abs(pref)
    suffix = np.maximum.accumulate(amps[::-1])[::-1]

    acc = 0.0
    n_used = 0
    tail_bound = 0.0
    capped = True
    for n in range(1, n_top + 1):
        damp = math.exp(-energies[n] * tau)
        b_n = suffix[n] * damp
        gap = (energies[n + 1] - energies[n]) if n < n_top else (
            energies[n] - energies[n - 1])
        ratio = math.exp(-gap * tau)
        geo = b_n / (1.0 - ratio) if ratio < 1.0 else math.inf
        if b_n == 0.0:
            geo = 0.0
        if geo < tol:
            tail_bound = geo
            capped = False
            break
        acc += c[n] * psi_hat[n] * damp
        n_used = n
        tail_bound = geo if math.isfinite(geo) else b_n
    warning = capped and n_top >= 1 and tail_bound > _GIBBS_FRAC * model.s_mid
    value = s_t * (c[0] + acc / psi0_hat)
    return PriceResult(float(value), n_used, float(tail_bound), float(x_hat),
                       warning)


def price(claim: Claim, s_t: float, tau: float, eig: EigenSystem,
          model: ZoneModel, method: str = "auto") -> PriceResult:
    coeffs = claim_coefficients(claim, eig, model, method)
    return price_series(s_t, tau, coeffs, eig, model)


def call_price(s_t: float, k: float, tau: float, eig: EigenSystem,
               model: ZoneModel) -> PriceResult:
    return price(Claim.call(k), s_t, tau, eig, model)


def put_price(s_t: float, k: float, tau: float, eig: EigenSystem,
              model: ZoneModel) -> PriceResult:
    return price(Claim.put(k), s_t, tau, eig, model)


def forward_price(s_t: float, k: float, tau: float, eig: EigenSystem,
                  model: ZoneModel) -> PriceResult:
    return price(Claim.forward(k), s_t, tau, eig, model)


def binary_price(s_t: float, k: float, tau: float, eig: EigenSystem,
                 model: ZoneModel) -> PriceResult:
    return price(Claim.binary(k), s_t, tau, eig, model)


def bond_price(s_t: float, tau: float, model: ZoneModel,
               eig: Optional[EigenSystem] = None) -> float:
    """Zero-coupon bond.  Closed form for cos/tan models:

        P(tau) = S_t/S_mid + (1 - S_t/S_mid) e^(-E_1 tau).
    """
    if tau < 0.0:
        raise ValidationError(f"tenor must be >= 0, got {tau}")
    if model.kind in ("cos", "tan"):
        model._check_s(float(s_t))
        if model.kind == "cos":
            e1 = 0.5 * model.sigma**2 * (math.pi / model.band.width) ** 2
        else:
            e1 = model.e1
        ratio = s_t / model.s_mid
        return float(ratio + (1.0 - ratio) * math.exp(-e1 * tau))
    if eig is None:
        raise ValidationError(
            "bond_price needs an eigen-system for non-closed-form models"
        )
    return price(Claim.bond(), s_t, tau, eig, model).value
