"""End-to-end acceptance checks.

Each test pins one quantitative exit criterion at its stated tolerance
and prints a PASS/FAIL line (run ``pytest -s tests/test_acceptance.py``
to see them live). The heavyweight Monte Carlo criteria use 1e5 trials
and take a few minutes combined.
"""

import csv
import math

import numpy as np
import pytest
from scipy.integrate import quad

from scnperf.analytic import coverage_probability, laplace_interference
from scnperf.ase import ase, ase_direct
from scnperf.case3gpp import (
    Case1Params,
    coverage_case1,
    interference_integral,
    interference_tail_integral,
    laplace_los_near,
    laplace_nlos_far,
    laplace_nlos_near,
    pdf_serving_los,
    pdf_serving_nlos,
)
from scnperf.cli import main
from scnperf.model import LOS, NLOS, NetworkParams, preset
from scnperf.montecarlo import (
    McConfig,
    default_disk_radius,
    estimate_association_pdf,
    estimate_coverage,
)
from test_analytic import integrate_distance_law

P_TX = 10.0**2.4


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def closed_cov(lam: float, gamma: float) -> float:
    return coverage_case1(Case1Params.from_network(NetworkParams(lam)), gamma).p_cov


def general_cov(name: str, lam: float, gamma: float) -> float:
    model, f = preset(name)
    return coverage_probability(
        model, f, NetworkParams(lam, sinr_threshold=gamma)
    ).p_cov


def run_peak_cli(tmp_path, gamma_db: float) -> float:
    out = tmp_path / f"peak_{gamma_db}.csv"
    code = main(
        [
            "peak",
            "--preset",
            "case1",
            "--provider",
            "analytic-closed",
            "--gamma-db",
            str(gamma_db),
            "--lambda-range",
            "2:200",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    with open(out, encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    header, data = rows[0], rows[1]
    return float(data[header.index("lambda_star")])


def test_criterion_1_coverage_peak_densities(tmp_path):
    got0 = run_peak_cli(tmp_path, 0.0)
    got3 = run_peak_cli(tmp_path, 3.0)
    ok = abs(got0 - 19.01) <= 0.5 and abs(got3 - 16.52) <= 0.5
    report(
        "criterion 1 (coverage peak densities)",
        ok,
        f"lambda*(0dB)={got0:.3f} (want 19.01+-0.5), "
        f"lambda*(3dB)={got3:.3f} (want 16.52+-0.5)",
    )


def test_criterion_2_closed_vs_general_equivalence():
    worst = 0.0
    for lam in (1.0, 10.0, 100.0, 1000.0, 10000.0):
        for gamma_db in (0.0, 3.0):
            gamma = 10.0 ** (gamma_db / 10.0)
            diff = abs(closed_cov(lam, gamma) - general_cov("case1", lam, gamma))
            worst = max(worst, diff)
    report(
        "criterion 2 (closed form vs general engine)",
        worst <= 1e-3,
        f"sup |diff| = {worst:.3e} (tolerance 1e-3)",
    )


def test_criterion_3_monte_carlo_validation():
    model, f = preset("case1")
    details = []
    ok = True
    for lam in (10.0, 100.0, 1000.0):
        params = NetworkParams(lam, sinr_threshold=1.0)
        cfg = McConfig(
            disk_radius_km=default_disk_radius(lam, f), trials=100000, seed=20240101
        )
        est = estimate_coverage(model, f, params, cfg)
        ref = closed_cov(lam, 1.0)
        tol = max(0.01, 3.0 * est.std_error)
        good = abs(est.mean - ref) <= tol
        ok = ok and good
        details.append(
            f"lam={lam:g}: |{est.mean:.4f}-{ref:.4f}|={abs(est.mean - ref):.4f}"
            f"<=+-{tol:.4f}:{'y' if good else 'N'}"
        )
    report("criterion 3 (Monte Carlo validation, 1e5 trials)", ok, "; ".join(details))


def test_criterion_4_transform_and_kernel_oracles():
    model, f = preset("case1")
    rng = np.random.default_rng(314)
    worst_lemma = 0.0
    for _ in range(34):
        lam = 10.0 ** float(rng.uniform(0, 3))
        gamma = 10.0 ** float(rng.uniform(-1, 1.3))
        c = Case1Params.from_network(NetworkParams(lam))
        d1 = c.los_cutoff_km

        r = float(rng.uniform(1e-3, d1))
        s = gamma * r**c.alpha_los / (P_TX * c.a_los)
        ref = laplace_interference(model, f, lam, s, LOS, r, tx_power_mw=P_TX)
        worst_lemma = max(
            worst_lemma, abs(laplace_los_near(c, gamma, r) - ref) / ref
        )

        r = float(rng.uniform(1e-3, d1))
        s = gamma * r**c.alpha_nlos / (P_TX * c.a_nlos)
        ref = laplace_interference(model, f, lam, s, NLOS, r, tx_power_mw=P_TX)
        worst_lemma = max(
            worst_lemma, abs(laplace_nlos_near(c, gamma, r) - ref) / ref
        )

        r = float(rng.uniform(d1 * 1.001, 4 * d1))
        s = gamma * r**c.alpha_nlos / (P_TX * c.a_nlos)
        ref = laplace_interference(model, f, lam, s, NLOS, r, tx_power_mw=P_TX)
        worst_lemma = max(
            worst_lemma, abs(laplace_nlos_far(c, gamma, r) - ref) / ref
        )

    worst_kernel = 0.0
    n_head = n_tail = 0
    while n_head + n_tail < 1000:
        alpha = float(rng.uniform(2.05, 6.0))
        beta = float(rng.integers(1, 3))
        t = 10.0 ** float(rng.uniform(-4, 6))
        d = 10.0 ** float(rng.uniform(-2.5, 0.5))
        if n_head <= n_tail:
            got = interference_integral(alpha, beta, t, d)
            ref, _ = quad(
                lambda u: u**beta / (1.0 + t * u**alpha),
                0,
                d,
                epsabs=1e-14,
                epsrel=1e-13,
                limit=300,
            )
            n_head += 1
        else:
            if alpha <= beta + 1.0:
                continue
            got = interference_tail_integral(alpha, beta, t, d)
            ref, _ = quad(
                lambda u: u**beta / (1.0 + t * u**alpha),
                d,
                np.inf,
                epsabs=1e-14,
                epsrel=1e-12,
                limit=300,
            )
            n_tail += 1
        worst_kernel = max(worst_kernel, abs(got - ref) / abs(ref))

    ok = worst_lemma <= 1e-6 and worst_kernel <= 1e-9
    report(
        "criterion 4 (transform and kernel oracles)",
        ok,
        f"lemma worst rel = {worst_lemma:.2e} (tol 1e-6); "
        f"kernel worst rel = {worst_kernel:.2e} over {n_head + n_tail} tuples (tol 1e-9)",
    )


def test_criterion_5_distance_law_normalisation_and_histogram():
    worst = 0.0
    for name in ("case1", "case2", "approx-case2", "single-slope"):
        model, f = preset(name)
        for lam in (1.0, 10.0, 100.0, 1000.0):
            worst = max(worst, abs(integrate_distance_law(model, f, lam) - 1.0))
    norm_ok = worst <= 1e-4

    model, f = preset("case1")
    lam = 100.0
    params = NetworkParams(lam, sinr_threshold=1.0)
    c = Case1Params.from_network(params)
    cfg = McConfig(
        disk_radius_km=default_disk_radius(lam, f), trials=100000, seed=5150
    )
    hist = estimate_association_pdf(model, f, params, cfg, bins=40)
    sup, chi2 = hist.compare(
        lambda r: pdf_serving_los(c, r), lambda r: pdf_serving_nlos(c, r)
    )
    hist_ok = sup <= 0.05
    report(
        "criterion 5 (distance-law normalisation + association histogram)",
        norm_ok and hist_ok,
        f"worst |norm - 1| = {worst:.2e} (tol 1e-4); "
        f"histogram sup/peak = {sup:.4f} (tol 0.05, chi2 = {chi2:.0f})",
    )


def test_criterion_6a_single_slope_flat_in_dense_regime():
    p3 = general_cov("single-slope", 1e3, 1.0)
    p4 = general_cov("single-slope", 1e4, 1.0)
    report(
        "criterion 6a (single-slope baseline flat when dense)",
        abs(p3 - p4) <= 0.01,
        f"|p(1e3) - p(1e4)| = {abs(p3 - p4):.2e} (tol 0.01)",
    )


def test_criterion_6b_coverage_rises_then_falls():
    lam_star = 19.01
    lams = [lam_star / 8, lam_star / 3, lam_star, lam_star * 3, lam_star * 8]
    vals = [closed_cov(l, 1.0) for l in lams]
    rises = vals[0] < vals[1] < vals[2]
    falls = vals[2] > vals[3] > vals[4]
    report(
        "criterion 6b (coverage rises then falls around the peak)",
        rises and falls,
        "p_cov(" + ", ".join(f"{l:.1f}" for l in lams) + ") = "
        + ", ".join(f"{v:.4f}" for v in vals),
    )


def test_criterion_6c_ase_valley_at_3db():
    gamma0 = 10.0**0.3
    lams = (20.0, 40.0, 70.0, 100.0)
    vals = {l: ase(closed_cov, l, gamma0).ase for l in lams}
    found = any(
        vals[b] < vals[a] for i, a in enumerate(lams) for b in lams[i + 1 :]
    )
    report(
        "criterion 6c (ASE decreases somewhere in [20, 100] at 3 dB)",
        found,
        "; ".join(f"A({l:g})={vals[l]:.2f}" for l in lams),
    )


def test_criterion_6d_near_linear_ase_growth():
    a1 = ase(closed_cov, 2000.0, 1.0).ase
    a2 = ase(closed_cov, 4000.0, 1.0).ase
    ratio = a2 / a1
    report(
        "criterion 6d (near-linear ASE growth at lambda = 2e3)",
        1.8 <= ratio <= 2.2,
        f"A(4000)/A(2000) = {ratio:.4f} (band [1.8, 2.2])",
    )


def test_criterion_7_piecewise_linear_fit_tracks_exact_curve():
    worst = 0.0
    for lam in np.geomspace(1.0, 1e4, 9):
        diff = abs(
            general_cov("case2", float(lam), 1.0)
            - general_cov("approx-case2", float(lam), 1.0)
        )
        worst = max(worst, diff)
    report(
        "criterion 7 (piecewise-linear fit vs exact curve)",
        worst <= 0.05,
        f"sup |diff| over lambda in [1, 1e4] = {worst:.4f} (tol 0.05)",
    )


def test_criterion_8_ase_routes_agree():
    worst = 0.0
    for lam in (10.0, 100.0, 1000.0):
        a1 = ase(closed_cov, lam, 1.0).ase
        a2 = ase_direct(closed_cov, lam, 1.0)
        worst = max(worst, abs(a1 - a2) / a1)
    report(
        "criterion 8 (ASE by-parts vs direct differentiation)",
        worst <= 1e-3,
        f"worst rel diff = {worst:.2e} (tol 1e-3)",
    )
