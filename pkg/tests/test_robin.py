import math

import numpy as np
import pytest

from targetzone.errors import ValidationError
from targetzone.robin import RobinDensityParams, density, martingale_checks


def gauss_nodes(length=1.0, order=400):
    t, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * length * (t + 1.0), 0.5 * length * w


class TestParams:
    def test_neumann_case_has_zero_ground_energy(self):
        p = RobinDensityParams(0.3, 0.5, 0.0, 1.0)
        assert p.e0 == 0.0

    def test_exponential_martingale_case(self):
        mu, sigma = 0.3, 0.5
        p = RobinDensityParams(mu, sigma, -2 * mu / sigma**2, 1.0)
        assert p.e0 == pytest.approx(0.0, abs=1e-18)
        assert p.rho_tilde == pytest.approx(p.rho / 2.0)

    def test_validation(self):
        with pytest.raises(ValidationError):
            RobinDensityParams(0.0, -1.0, 0.0, 1.0)
        with pytest.raises(ValidationError):
            RobinDensityParams(0.0, 1.0, 0.0, 0.0)


class TestDensity:
    def test_matches_neumann_cosine_kernel(self):
        # independent classical form: 1/L + (2/L) sum e^{-(pi n/L)^2 s^2 t/2}
        # cos(pi n x/L) cos(pi n x'/L)
        sigma, tau, L = 0.6, 0.3, 1.0
        p = RobinDensityParams(0.0, sigma, 0.0, L)
        xs = np.linspace(0.0, 1.0, 9)
        for x in (0.2, 0.5, 0.9):
            ref = np.full_like(xs, 1.0 / L)
            for n in range(1, 80):
                ref += ((2.0 / L)
                        * math.exp(-(math.pi * n / L) ** 2 * sigma**2 * tau / 2)
                        * math.cos(math.pi * n * x / L)
                        * np.cos(math.pi * n * xs / L))
            np.testing.assert_allclose(density(x, xs, tau, p), ref,
                                       atol=1e-12)

    def test_normalisation(self):
        p = RobinDensityParams(0.0, 0.6, 0.0, 1.0)
        y, w = gauss_nodes()
        total = float(np.sum(w * density(0.37, y, 0.2, p)))
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_long_time_stationary_profile(self):
        p = RobinDensityParams(0.3, 0.5, 0.0, 1.0)
        xs = np.linspace(0.0, 1.0, 11)
        rt = p.rho_tilde
        stationary = 2 * rt * np.exp(2 * rt * xs) / math.expm1(2 * rt)
        np.testing.assert_allclose(density(0.2, xs, 200.0, p), stationary,
                                   atol=1e-14)
        np.testing.assert_allclose(density(0.8, xs, 200.0, p),
                                   density(0.2, xs, 200.0, p), atol=1e-14)

    def test_uniform_limit(self):
        p = RobinDensityParams(0.0, 0.5, 0.0, 1.0)
        xs = np.linspace(0.0, 1.0, 11)
        np.testing.assert_allclose(density(0.3, xs, 500.0, p), 1.0,
                                   atol=1e-14)

    @pytest.mark.parametrize("params", [
        RobinDensityParams(0.0, 0.6, 0.0, 1.0),
        RobinDensityParams(0.3, 0.5, 0.0, 1.0),
        RobinDensityParams(0.2, 0.5, 0.7, 1.0),
        RobinDensityParams(0.25, 0.5, -2 * 0.25 / 0.25, 1.0),
    ])
    def test_chapman_kolmogorov(self, params):
        x, xp, t1, t2 = 0.3, 0.65, 0.12, 0.23
        y, w = gauss_nodes()
        first = density(x, y, t1, params)
        second = np.array([density(float(yy), xp, t2, params) for yy in y])
        composed = float(np.sum(w * first * second))
        assert composed == pytest.approx(density(x, xp, t1 + t2, params),
                                         abs=1e-6)

    def test_positivity_up_to_truncation(self):
        params = RobinDensityParams(0.2, 0.5, 0.7, 1.0)
        grid = np.linspace(0.0, 1.0, 201)
        assert np.min(density(0.35, grid, 0.15, params)) > -1e-12

    def test_detilted_symmetry(self):
        params = RobinDensityParams(0.2, 0.5, 0.7, 1.0)
        rt, rho = params.rho_tilde, params.rho
        a, b, tau = 0.35, 0.8, 0.2
        sym_ab = density(a, b, tau, params) * math.exp(-(rt - rho) * (b - a))
        sym_ba = density(b, a, tau, params) * math.exp(-(rt - rho) * (a - b))
        assert sym_ab == pytest.approx(sym_ba, rel=1e-13)

    def test_degenerate_tilde_limit(self):
        # rho = -mu/sigma^2 makes rho_tilde exactly zero
        exact = RobinDensityParams(0.25, 0.5, -1.0, 1.0)
        assert exact.rho_tilde == 0.0
        nearby = RobinDensityParams(0.25, 0.5, -1.0 + 1e-9, 1.0)
        assert density(0.3, 0.6, 0.4, exact) == pytest.approx(
            density(0.3, 0.6, 0.4, nearby), abs=1e-8)

    def test_bad_arguments(self):
        p = RobinDensityParams(0.0, 0.5, 0.0, 1.0)
        with pytest.raises(ValidationError):
            density(0.3, 0.5, 0.0, p)
        with pytest.raises(ValidationError):
            density(1.5, 0.5, 0.1, p)
        with pytest.raises(ValidationError):
            density(0.5, 1.5, 0.1, p)


class TestMartingaleChecks:
    def test_reflecting_case_conserves_probability(self):
        p = RobinDensityParams(0.3, 0.5, 0.0, 1.0)
        rep = martingale_checks(p, 0.7, 0.5)
        assert rep.identity_deviation <= 1e-8

    def test_exponential_martingale_case(self):
        mu, sigma = 0.3, 0.5
        p = RobinDensityParams(mu, sigma, -2 * mu / sigma**2, 1.0)
        rep = martingale_checks(p, 0.4, 0.3)
        assert rep.exp_rho_deviation <= 1e-8
        # probability leaks through the boundaries in this measure
        assert rep.identity_deviation > 1e-3

    def test_uniform_stationary_density(self):
        p = RobinDensityParams(0.0, 0.5, 0.0, 1.0)
        rep = martingale_checks(p, 0.5, 300.0)
        assert rep.identity == pytest.approx(1.0, abs=1e-10)
