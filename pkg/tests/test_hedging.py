import math

import numpy as np
import pytest

import targetzone as tz
from targetzone import hedging, pricing
from targetzone.errors import ValidationError


@pytest.fixture(scope="module")
def call_coeffs(eig_cos, cos_model):
    return pricing.claim_coefficients(tz.Claim.call(7.80), eig_cos, cos_model)


class TestDelta:
    def test_forward_is_one_everywhere(self, eig_cos, cos_model, band):
        c = pricing.coeffs_forward(0.0, eig_cos, cos_model)
        xs = np.linspace(0.0, 1.0, 101)
        np.testing.assert_array_equal(hedging.delta(xs, 0.3, c, eig_cos,
                                                    cos_model), 1.0)

    def test_bond_matches_closed_form(self, eig_cos, cos_model):
        c = pricing.coeffs_bond(eig_cos, cos_model)
        e1 = eig_cos.energies[1]
        for tau in (0.1, 0.5, 2.0):
            expected = (1.0 - math.exp(-e1 * tau)) / cos_model.s_mid
            got = hedging.delta(cos_model.fx_invert(7.78), tau, c, eig_cos,
                                cos_model)
            assert got == pytest.approx(expected, rel=1e-12)

    def test_matches_spot_derivative(self, eig_cos, cos_model, call_coeffs):
        d = 1e-6
        for s0 in (7.76, 7.7997, 7.83):
            up = pricing.price_series(s0 + d, 0.25, call_coeffs, eig_cos,
                                      cos_model).value
            dn = pricing.price_series(s0 - d, 0.25, call_coeffs, eig_cos,
                                      cos_model).value
            got = hedging.delta(cos_model.fx_invert(s0), 0.25, call_coeffs,
                                eig_cos, cos_model)
            assert got == pytest.approx((up - dn) / (2 * d), abs=1e-6)

    def test_boundary_formula_matches_extrapolation(self, eig_cos, cos_model,
                                                    call_coeffs):
        # Richardson extrapolation of the interior quotient onto the edge
        for edge, sign in ((1.0, -1.0), (0.0, 1.0)):
            eps = 5e-3
            d1 = hedging.delta(edge + sign * eps, 0.25, call_coeffs, eig_cos,
                               cos_model)
            d2 = hedging.delta(edge + sign * eps / 2, 0.25, call_coeffs,
                               eig_cos, cos_model)
            boundary = hedging.delta(edge, 0.25, call_coeffs, eig_cos,
                                     cos_model)
            assert abs(2 * d2 - d1 - boundary) <= 1e-6

    def test_continuity_at_switch(self, eig_cos, cos_model, call_coeffs):
        zone = 1e-4
        for tau in (0.05, 0.25, 1.0):
            inside = hedging.delta(1.0 - 1.01 * zone, tau, call_coeffs,
                                   eig_cos, cos_model)
            outside = hedging.delta(1.0 - 0.99 * zone, tau, call_coeffs,
                                    eig_cos, cos_model)
            assert abs(inside - outside) <= 1e-6 * max(1.0, abs(inside))

    def test_call_delta_bounds(self, cos_model):
        eig = cos_model.eigensystem(512)
        c = pricing.claim_coefficients(tz.Claim.call(7.80), eig, cos_model)
        xs = np.linspace(0.0, 1.0, 801)
        for tau in (1 / 252, 0.1, 0.25, 1.0):
            dl = hedging.delta(xs, tau, c, eig, cos_model)
            assert dl.min() >= -1e-8
            assert dl.max() <= 1.0 + 1e-8

    def test_binary_rejected(self, eig_cos, cos_model):
        c = pricing.claim_coefficients(tz.Claim.binary(7.8), eig_cos,
                                       cos_model)
        with pytest.raises(ValidationError, match="price-only"):
            hedging.delta(0.5, 0.25, c, eig_cos, cos_model)

    def test_negative_tenor_rejected(self, eig_cos, cos_model, call_coeffs):
        with pytest.raises(ValidationError):
            hedging.delta(0.5, -0.1, call_coeffs, eig_cos, cos_model)

    def test_tan_model_spot_derivative(self, eig_tan, tan_model):
        c = pricing.claim_coefficients(tz.Claim.call(7.80), eig_tan,
                                       tan_model)
        d = 1e-6
        up = pricing.price_series(7.78 + d, 0.25, c, eig_tan, tan_model).value
        dn = pricing.price_series(7.78 - d, 0.25, c, eig_tan, tan_model).value
        got = hedging.delta(tan_model.fx_invert(7.78), 0.25, c, eig_tan,
                            tan_model)
        assert got == pytest.approx((up - dn) / (2 * d), abs=1e-6)


class TestBondHolding:
    def test_identity(self):
        assert hedging.bond_holding(1.25, 0.5, 2.0) == 0.25

    def test_pure_spot_claim(self, eig_cos, cos_model):
        state = hedging.hedge_state(7.78, 0.3,
                                    pricing.coeffs_forward(0.0, eig_cos,
                                                           cos_model),
                                    eig_cos, cos_model)
        assert state.phi == 1.0
        assert state.bond_units == pytest.approx(0.0, abs=1e-14)
        assert state.value == 7.78

    def test_portfolio_value_identity(self, eig_cos, cos_model, call_coeffs):
        state = hedging.hedge_state(7.78, 0.25, call_coeffs, eig_cos,
                                    cos_model)
        assert state.phi * 7.78 + state.bond_units == pytest.approx(
            state.value, abs=1e-14)

    def test_bond_claim_at_mid(self, eig_cos, cos_model):
        c = pricing.coeffs_bond(eig_cos, cos_model)
        s = cos_model.s_mid
        state = hedging.hedge_state(s, 0.5, c, eig_cos, cos_model)
        assert state.value == pytest.approx(1.0, abs=1e-12)
        assert state.bond_units == pytest.approx(1.0 - state.phi * s,
                                                 abs=1e-12)
