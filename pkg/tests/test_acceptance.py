"""Acceptance gate: every release criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass/fail line
per criterion.
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
from scipy.integrate import simpson
from scipy.stats import chisquare

import targetzone as tz
from targetzone import pricing

from conftest import HKD_HI, HKD_LO


def report(num, name, ok, detail, elapsed, limit):
    status = "PASS" if ok and elapsed < limit else "FAIL"
    print(f"criterion {num} ({name}): {status} [{elapsed:.1f}s] {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"
    assert elapsed < limit, f"criterion {num} exceeded {limit}s ({elapsed:.1f}s)"


def test_criterion_1_local_vol_shape(cos_model, quartic_model, band):
    t0 = time.time()
    grid = band.grid(20001)
    p_cos = np.asarray(cos_model.local_vol(grid))
    r6 = cos_model.local_vol(1.0 / 6.0) / p_cos.max()
    r10 = cos_model.local_vol(0.1) / p_cos.max()
    p_q = np.asarray(quartic_model.local_vol(grid))
    q10 = quartic_model.local_vol(0.1) / p_q.max()
    ok = (abs(r6 - 0.50) <= 0.02 and abs(r10 - 0.31) <= 0.02
          and abs(q10 - 0.36) <= 0.01)
    report(1, "local-vol shape", ok,
           f"cos p(L/6)/pmax={r6:.4f}, p(L/10)/pmax={r10:.4f}, "
           f"quartic p(L/10)/pmax={q10:.4f}",
           time.time() - t0, 1.0)


def test_criterion_2_eigen_suite(eig_cos, eig_tan, band):
    t0 = time.time()
    from scipy.integrate import quad

    worst_ortho = 0.0
    for eig in (eig_cos, eig_tan):
        assert eig.energies[0] == 0.0
        for n in range(9):
            for m in range(n, 9):
                val, _ = quad(lambda x: eig.psi(n, x) * eig.psi(m, x),
                              0.0, 1.0, epsabs=1e-11, epsrel=1e-11, limit=300)
                worst_ortho = max(worst_ortho,
                                  abs(val - (1.0 if n == m else 0.0)))
    worst_bc = 0.0
    for eig in (eig_cos, eig_tan):
        for edge, h_edge in ((0.0, eig.h_minus), (1.0, eig.h_plus)):
            psi = eig.psi_matrix(edge)[:11, 0]
            dpsi = eig.psi_prime_matrix(edge)[:11, 0]
            worst_bc = max(worst_bc, float(np.max(np.abs(dpsi - h_edge * psi))))

    num_cos = tz.numeric_system(lambda x: np.zeros_like(x), 0.0, 0.0, band,
                                0.1, 12, 4001)
    num_tan = tz.numeric_system(lambda x: np.full_like(x, -4.0),
                                eig_tan.h_minus, eig_tan.h_plus, band, 0.1,
                                12, 4001)
    rel = max(
        float(np.max(np.abs(num_cos.energies[1:11]
                            / eig_cos.energies[1:11] - 1.0))),
        float(np.max(np.abs(num_tan.energies[1:11]
                            / eig_tan.energies[1:11] - 1.0))),
    )
    ok = worst_ortho <= 1e-8 and worst_bc <= 1e-10 and rel <= 1e-6
    report(2, "eigen-system suite", ok,
           f"orthonormality={worst_ortho:.2e}, boundary={worst_bc:.2e}, "
           f"numeric-vs-analytic rel={rel:.2e}",
           time.time() - t0, 10.0)


def test_criterion_3_closed_form_coefficients(cos_model, tan_model, eig_cos,
                                              eig_tan, band):
    t0 = time.time()
    worst_cos = 0.0
    for k in np.linspace(HKD_LO, HKD_HI, 11):
        closed = pricing.coeffs_call_cos(k, cos_model, 24).values
        ref = pricing.coeffs_generic(tz.Claim.call(k), eig_cos,
                                     cos_model).values[:25]
        worst_cos = max(worst_cos, float(np.max(np.abs(closed - ref))))
    worst_tan = 0.0
    for k in np.linspace(tan_model.s_minus, tan_model.s_plus, 11):
        closed = pricing.coeffs_call_tan(k, tan_model, 24).values
        ref = pricing.coeffs_generic(tz.Claim.call(k), eig_tan,
                                     tan_model).values[:25]
        worst_tan = max(worst_tan, float(np.max(np.abs(closed - ref))))
    tan_small = tz.build_tan_model(cos_model.s_mid, cos_model.gamma, 1e-4,
                                   band, 0.1)
    worst_limit = 0.0
    for k in np.linspace(HKD_LO + 1e-6, HKD_HI - 1e-6, 11):
        ct = pricing.coeffs_call_tan(k, tan_small, 24).values
        cc = pricing.coeffs_call_cos(k, cos_model, 24).values
        worst_limit = max(worst_limit, float(np.max(np.abs(ct - cc))))
    ok = worst_cos <= 1e-8 and worst_tan <= 1e-8 and worst_limit <= 1e-6
    report(3, "closed-form coefficients", ok,
           f"cos vs quad={worst_cos:.2e}, tan vs quad={worst_tan:.2e}, "
           f"small-frequency limit={worst_limit:.2e}",
           time.time() - t0, 30.0)


def test_criterion_4_consistency_identities(cos_model, tan_model, eig_cos,
                                            eig_tan, band):
    t0 = time.time()
    worst_parity = 0.0
    for eig, model in ((eig_cos, cos_model), (eig_tan, tan_model)):
        for k in np.linspace(model.s_minus, model.s_plus, 9):
            c = pricing.call_price(7.78, k, 0.25, eig, model).value
            p = pricing.put_price(7.78, k, 0.25, eig, model).value
            f = pricing.forward_price(7.78, k, 0.25, eig, model).value
            worst_parity = max(worst_parity, abs(c - p - f))

    worst_bond = 0.0
    for eig, model in ((eig_cos, cos_model), (eig_tan, tan_model)):
        c = pricing.coeffs_generic(tz.Claim.bond(), eig, model)
        for tau in (0.05, 0.25, 1.0):
            series = pricing.price_series(7.78, tau, c, eig, model).value
            worst_bond = max(worst_bond,
                             abs(series - tz.bond_price(7.78, tau, model)))

    worst_rate = 0.0
    xs = band.grid(200)
    for model, e1 in ((cos_model, eig_cos.energies[1]),
                      (tan_model, eig_tan.energies[1])):
        direct = np.asarray(model.short_rate(xs))
        closed = e1 * (1.0 - np.asarray(model.f(xs)) / model.s_mid)
        worst_rate = max(worst_rate, float(np.max(np.abs(direct - closed))))

    k, tau = 7.80, 0.25
    d = 1e-5 * cos_model.s_mid
    up = pricing.call_price(7.78, k + d, tau, eig_cos, cos_model).value
    dn = pricing.call_price(7.78, k - d, tau, eig_cos, cos_model).value
    fd = -(up - dn) / (2.0 * d)
    analytic = pricing.binary_price(7.78, k, tau, eig_cos, cos_model).value
    binary_err = abs(analytic - fd)

    ok = (worst_parity <= 1e-12 and worst_bond <= 1e-10
          and worst_rate <= 1e-9 and binary_err <= 1e-6)
    report(4, "consistency identities", ok,
           f"parity={worst_parity:.2e}, bond={worst_bond:.2e}, "
           f"rate={worst_rate:.2e}, binary-vs-fd={binary_err:.2e}",
           time.time() - t0, 10.0)


def test_criterion_5_monte_carlo_agreement(cos_model, tan_model, eig_cos,
                                           eig_tan):
    t0 = time.time()
    cfg = tz.McConfig(paths=200_000, dt=1e-4 * 0.25, seed=42)
    s0, k, tenor = 7.78, 7.80, 0.25
    zs = {}
    for label, model, eig in (("cos", cos_model, eig_cos),
                              ("tan", tan_model, eig_tan)):
        x_t, disc = tz.sample_terminal(model, model.fx_invert(s0), tenor, cfg)
        s_t = np.asarray(model.f(x_t))

        def z_score(sample, target):
            se = sample.std(ddof=1) / math.sqrt(len(sample))
            return (sample.mean() - target) / se

        series_call = pricing.call_price(s0, k, tenor, eig, model).value
        zs[f"{label}-call"] = z_score(np.maximum(s_t - k, 0.0) * disc,
                                      series_call)
        zs[f"{label}-bond"] = z_score(disc, tz.bond_price(s0, tenor, model))
        zs[f"{label}-martingale"] = z_score(s_t * disc, s0)
    ok = all(abs(z) <= 3.0 for z in zs.values())
    detail = ", ".join(f"{k}={v:+.2f}" for k, v in zs.items())
    report(5, "Monte Carlo agreement", ok, f"z-scores: {detail}",
           time.time() - t0, 180.0)


def test_criterion_6_density_suite(band):
    t0 = time.time()
    p_neumann = tz.RobinDensityParams(0.3, 0.5, 0.0, 1.0)
    rep = tz.martingale_checks(p_neumann, 0.7, 0.5)
    norm_dev = rep.identity_deviation

    mu, sigma = 0.3, 0.5
    p_exp = tz.RobinDensityParams(mu, sigma, -2 * mu / sigma**2, 1.0)
    rep_exp = tz.martingale_checks(p_exp, 0.4, 0.3)
    exp_dev = rep_exp.exp_rho_deviation
    leak = rep_exp.identity_deviation

    nodes, weights = np.polynomial.legendre.leggauss(400)
    y = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    ck_worst = 0.0
    for params in (p_neumann, p_exp, tz.RobinDensityParams(0.2, 0.5, 0.7,
                                                           1.0)):
        first = tz.density(0.3, y, 0.12, params)
        second = np.array([tz.density(float(yy), 0.65, 0.23, params)
                           for yy in y])
        ck_worst = max(ck_worst, abs(float(np.sum(w * first * second))
                                     - tz.density(0.3, 0.65, 0.35, params)))

    qm = tz.build_quartic_model(0.05, 1.0, band, 0.7)
    x_t, _ = tz.sample_terminal(qm, 0.5, 0.25,
                                tz.McConfig(paths=50_000, dt=4e-5, seed=11))
    kernel = tz.RobinDensityParams(0.0, 0.7, 0.0, 1.0)
    edges = np.linspace(0.0, 1.0, 21)
    observed, _ = np.histogram(x_t, bins=edges)
    probs = []
    for a, b in zip(edges[:-1], edges[1:]):
        g = np.linspace(a, b, 101)
        probs.append(simpson(tz.density(0.5, g, 0.25, kernel), x=g))
    probs = np.asarray(probs)
    probs /= probs.sum()
    _, p_value = chisquare(observed, probs * len(x_t))

    ok = (norm_dev <= 1e-8 and exp_dev <= 1e-8 and leak > 1e-3
          and ck_worst <= 1e-6 and p_value > 0.01)
    report(6, "Robin density suite", ok,
           f"normalisation={norm_dev:.2e}, exp-martingale={exp_dev:.2e}, "
           f"leak={leak:.2e}, chapman-kolmogorov={ck_worst:.2e}, "
           f"chi2 p={p_value:.3f}",
           time.time() - t0, 60.0)


def test_criterion_7_replication(cos_model, eig_cos):
    t0 = time.time()
    fwd = tz.replicate(tz.Claim.forward(0.0), cos_model, 7.78, 0.25, 64,
                       tz.McConfig(paths=500, dt=1e-3, seed=2), eig=eig_cos)

    eig = cos_model.eigensystem(384)
    s_mid = cos_model.s_mid
    tenor = 0.5
    claim = tz.Claim.call(s_mid)
    medians = {}
    ratios = {n: [] for n in (32, 64, 128)}
    for seed in (101, 202, 303):
        cfg = tz.McConfig(paths=4000, dt=tenor / 4096, seed=seed)
        res = tz.replicate_sweep(claim, cos_model, s_mid, tenor,
                                 [32, 64, 128, 256], cfg, eig=eig)
        for n in (32, 64, 128):
            ratios[n].append(res[2 * n].mean / res[n].mean)
    for n in (32, 64, 128):
        medians[n] = sorted(ratios[n])[1]
    ok = fwd.mean <= 1e-10 and all(m <= 0.75 for m in medians.values())
    detail = ", ".join(f"median[{n}->{2*n}]={medians[n]:.3f}"
                       for n in (32, 64, 128))
    report(7, "hedge replication", ok,
           f"forward rms={fwd.mean:.2e}, {detail}",
           time.time() - t0, 300.0)


def test_criterion_8_cli_determinism(tmp_path, cos_model):
    t0 = time.time()
    cfg_path = tmp_path / "model.json"
    cfg_path.write_text(tz.model_to_json(cos_model))
    argv = [sys.executable, "-m", "targetzone", "mc-validate",
            "--claim", "call", "--strike", "7.80", "--spot", "7.78",
            "--tenor", "0.25", "--paths", "4000", "--dt", "2.5e-4",
            "--seed", "42", "--config", str(cfg_path)]

    def run(threads):
        env = dict(os.environ)
        if threads:
            env["TZO_THREADS"] = threads
        else:
            env.pop("TZO_THREADS", None)
        out = subprocess.run(argv, capture_output=True, env=env)
        assert out.returncode == 0, out.stderr.decode()
        return out.stdout

    outputs = [run(None), run(None), run("1"), run("4")]
    ok = all(o == outputs[0] for o in outputs)
    report(8, "CLI determinism", ok,
           f"4 runs byte-identical across TZO_THREADS: {ok}",
           time.time() - t0, 60.0)
