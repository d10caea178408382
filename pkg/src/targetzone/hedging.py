"""Replicating portfolio: FX holding (delta) and cash-bond holding.

The claim is replicated by holding phi_t units of the FX rate and psi_t units
of the cash bond, V_t = phi_t S_t + psi_t B_t.  In the interior

    phi_t = d v / d S = (d_x v) / f'(x),

with the series differentiated term by term.  Both numerator and denominator
vanish at the boundaries; there the limit

    phi_t|x_pm = (d_x^2 v) / f''(x_pm)

applies whenever f''(x_pm) is finite, and is used inside a thin switching
zone where the interior quotient loses accuracy to cancellation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import EigenSystem
from .errors import NumericalError, ValidationError
from .models import ZoneModel
from .pricing import CoefficientSet, price_series

__all__ = ["HedgeState", "delta", "bond_holding", "hedge_state"]

BOUNDARY_ZONE_FRAC = 1e-4


@dataclass(frozen=True)
class HedgeState:
    """Portfolio (phi, bond units) with value phi*S + units*B."""

    phi: float
    bond_units: float
    value: float


def _boundary_delta(x_b: float, c: np.ndarray, damp: np.ndarray,
                    eig: EigenSystem, model: ZoneModel) -> float:
    f_b = model.f(x_b)
    fpp_b = model.f_second(x_b)
    if abs(fpp_b) < 1e-14 and abs(model.f_prime(x_b)) < 1e-14:
        raise NumericalError(
            f"degenerate rate mapping at x={x_b}: f' and f'' both vanish"
        )
    psi_b = eig.psi_matrix(x_b)[: len(c), 0]
    ratios = psi_b / psi_b[0]
    curv = c * damp * ratios * (fpp_b - f_b * 2.0 * eig.energies[: len(c)]
                                / model.sigma**2)
    d2v = fpp_b * c[0] + float(np.sum(curv[1:]))
    return d2v / fpp_b


def delta(x, tau: float, coeffs: CoefficientSet, eig: EigenSystem,
          model: ZoneModel):
    """Units of S_t held by the replicating strategy, as a function of x."""
    if not coeffs.hedgeable:
        raise ValidationError(
            f"{coeffs.claim.kind} claim is price-only (payoff violates the "
            "zero-slope boundary requirement); no replicating delta"
        )
    if tau < 0.0:
        raise ValidationError(f"tenor must be >= 0, got {tau}")
    band = model.band
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    zone = BOUNDARY_ZONE_FRAC * band.width
    near_lo = arr - band.x_minus < zone
    near_hi = band.x_plus - arr < zone
    interior = ~(near_lo | near_hi)
    out = np.empty_like(arr)

    c = coeffs.values
    # modes with E_n tau > 45 contribute below double precision
    cut = max(2, int(np.searchsorted(eig.energies[: len(c)] * tau, 45.0)))
    c = c[:cut]
    damp = np.exp(-eig.energies[:cut] * tau)
    w = c * damp

    if np.any(interior):
        xi = arr[interior]
        psi, dpsi = eig.psi_pair_matrix(xi, n_top=cut - 1)
        psi0 = psi[0]
        dpsi0 = dpsi[0]
        big_phi = w[0] + np.einsum("n,nm->m", w[1:], psi[1:]) / psi0
        wron = (dpsi[1:] * psi0 - psi[1:] * dpsi0) / (psi0 * psi0)
        dphi = np.einsum("n,nm->m", w[1:], wron)
        fv = np.asarray(model.f(xi))
        fp = np.asarray(model.f_prime(xi))
        out[interior] = big_phi + fv * dphi / fp
    if np.any(near_lo):
        out[near_lo] = _boundary_delta(band.x_minus, c, damp, eig, model)
    if np.any(near_hi):
        out[near_hi] = _boundary_delta(band.x_plus, c, damp, eig, model)
    return float(out[0]) if np.ndim(x) == 0 else out


def bond_holding(e_t: float, phi: float, z_t: float) -> float:
    """psi_t = E_t - phi_t Z_t (discounted claim and FXR prices)."""
    return e_t - phi * z_t


def hedge_state(s_t: float, tau: float, coeffs: CoefficientSet,
                eig: EigenSystem, model: ZoneModel,
                b_t: float = 1.0) -> HedgeState:
    """Replicating portfolio at spot s_t with the cash bond at b_t."""
    res = price_series(s_t, tau, coeffs, eig, model)
    phi = delta(res.x_hat, tau, coeffs, eig, model)
    units = bond_holding(res.value / b_t, phi, s_t / b_t)
    return HedgeState(float(phi), float(units), float(res.value))
