"""General coverage engine for stacked LoS/NLoS path loss models.

Coverage probability of the typical user under smallest-path-loss
association and Rayleigh fading is computed by nested adaptive
quadrature: serving-distance densities for the LoS- and NLoS-served
events, the Laplace transform of the aggregate interference at the
required argument, and an outer integral over the serving distance.

Works for any :class:`~scnperf.model.PathLossModel` /
:class:`~scnperf.model.LosProbabilityFn` pair; the closed forms in
:mod:`scnperf.case3gpp` cover only the linear-ramp special case and are
cross-checked against this engine.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .model import (
    LOS,
    NLOS,
    LosProbabilityFn,
    NetworkParams,
    PathLossModel,
    equal_loss_radius,
    los_probability,
)

# Absolute quadrature tolerances, tightest innermost so the composed
# error stays well below the 1e-3 cross-validation band.
EPSABS_INNER = 1e-10
EPSABS_MIDDLE = 1e-10
EPSABS_OUTER = 1e-8
_TAIL_RTOL = 1e-14


class QuadratureError(RuntimeError):
    """An adaptive quadrature failed to converge."""


class NoPeakError(RuntimeError):
    """No interior coverage maximum exists on the searched range."""


@dataclass(frozen=True)
class DistancePdfSample:
    """Serving-distance density split by serving branch at one distance."""

    r: float
    density_los: float
    density_nlos: float


@dataclass(frozen=True)
class CoveragePoint:
    """One coverage probability evaluation with provenance."""

    bs_density: float
    sinr_threshold: float
    p_cov: float
    method: str
    abs_error_est: float


@dataclass(frozen=True)
class PeakResult:
    """Location of a coverage maximum over base-station density."""

    bs_density: float
    p_cov: float
    bracket: tuple[float, float]


def _checked_quad(fn, a, b, *, epsabs, epsrel=1e-9, points=None):
    """``scipy.integrate.quad`` that raises instead of warning."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err = quad(
                fn, a, b, epsabs=epsabs, epsrel=epsrel, limit=200, points=points
            )
        except IntegrationWarning as exc:
            raise QuadratureError(
                f"quadrature on ({a:g}, {b:g}) did not converge: {exc}"
            ) from exc
    return val, err


def _log_subpanels(lo: float, hi: float) -> list[float]:
    """Geometric interior points keeping each subpanel under ~1.5 decades.

    Steep or sharply peaked integrands over wide panels defeat the
    adaptive rule; pre-splitting keeps the per-panel dynamic range
    modest. Panels starting at zero get a tiny geometric anchor so the
    ladder can reach arbitrarily small peak locations.
    """
    if lo <= 0:
        anchor = hi * 1e-9
        return [anchor] + _log_subpanels(anchor, hi)
    if hi / lo <= 30.0:
        return []
    n = math.ceil(math.log10(hi / lo) / 1.5)
    return [lo * (hi / lo) ** (k / n) for k in range(1, n)]


def _nlos_void_exponent(f: LosProbabilityFn, bs_density: float, r: float) -> float:
    """``integral_0^r (1 - Pr_los(u)) 2 pi u lam du`` (no-closer-NLoS-BS mass)."""
    if r <= 0:
        return 0.0
    if math.isinf(r):
        return math.inf
    return bs_density * (math.pi * r * r - f.cumulative_los_area(r))


def _los_void_exponent(f: LosProbabilityFn, bs_density: float, r: float) -> float:
    """``integral_0^r Pr_los(u) 2 pi u lam du`` (no-closer-LoS-BS mass)."""
    if r <= 0:
        return 0.0
    if math.isinf(r):
        r = f.support_radius()
        if math.isinf(r):
            return math.inf
    return bs_density * f.cumulative_los_area(r)


def pdf_distance_los(
    model: PathLossModel, f: LosProbabilityFn, bs_density: float, r: float
) -> float:
    """Density of the serving distance given a LoS-served typical user.

    The serving base station is LoS at distance ``r`` iff no LoS station
    is closer and no NLoS station lies within the equal-loss radius.
    """
    if r <= 0:
        raise ValueError("distance must be positive")
    p_los = los_probability(f, r)
    if p_los == 0.0:
        return 0.0
    r1 = equal_loss_radius(model, r, LOS)
    expo = _nlos_void_exponent(f, bs_density, r1) + _los_void_exponent(
        f, bs_density, r
    )
    return math.exp(-expo) * p_los * 2.0 * math.pi * r * bs_density


def pdf_distance_nlos(
    model: PathLossModel, f: LosProbabilityFn, bs_density: float, r: float
) -> float:
    """Density of the serving distance given an NLoS-served typical user."""
    if r <= 0:
        raise ValueError("distance must be positive")
    p_nlos = 1.0 - los_probability(f, r)
    if p_nlos == 0.0:
        return 0.0
    r2 = equal_loss_radius(model, r, NLOS)
    expo = _los_void_exponent(f, bs_density, r2) + _nlos_void_exponent(
        f, bs_density, r
    )
    return math.exp(-expo) * p_nlos * 2.0 * math.pi * r * bs_density


def distance_pdf(
    model: PathLossModel, f: LosProbabilityFn, bs_density: float, r: float
) -> DistancePdfSample:
    """Both serving-branch densities at one distance."""
    return DistancePdfSample(
        r,
        pdf_distance_los(model, f, bs_density, r),
        pdf_distance_nlos(model, f, bs_density, r),
    )


def _interference_kernel(model: PathLossModel, branch: str, sp: float, u: float):
    """``u / (1 + u**alpha / (sp * A))`` with segment constants at ``u``.

    ``sp`` is the Laplace argument times the transmit power; the unit-mean
    Rayleigh fading expectation collapses to this rational kernel.
    """
    a, alpha = model.branch_params_at(u, branch)
    return u / (1.0 + u**alpha / (sp * a))


def _branch_exponent(
    model: PathLossModel,
    f: LosProbabilityFn,
    bs_density: float,
    sp: float,
    branch: str,
    lower: float,
) -> float:
    """``2 pi lam * integral_lower^inf w(u) * kernel(u) du`` for one branch.

    ``w`` is the LoS probability for LoS interferers and its complement
    for NLoS interferers. The improper tail is handled by quad's internal
    variable transformation; panels are split at every model or
    probability-curve break so the integrand is smooth per panel.
    """
    if branch == LOS:
        support = f.support_radius()
        if support <= lower:
            return 0.0

        def weight(u):
            return los_probability(f, u)

        upper_cap = support
    else:

        def weight(u):
            return 1.0 - los_probability(f, u)

        upper_cap = math.inf

    def integrand(u):
        w = weight(u)
        if w == 0.0:
            return 0.0
        return w * _interference_kernel(model, branch, sp, u)

    breaks = sorted(set(model.breaks) | set(f.breakpoints()))
    finite_edges: list[float] = []
    lo = lower
    for b in [b for b in breaks if lower < b < upper_cap]:
        finite_edges += _log_subpanels(lo, b) + [b]
        lo = b
    if math.isfinite(upper_cap):
        finite_edges += _log_subpanels(lo, upper_cap) + [upper_cap]
    else:
        finite_edges += _log_subpanels(lo, 100.0 * max(lo, 1.0))

    total = 0.0
    lo = lower
    for hi in finite_edges:
        val, _ = _checked_quad(integrand, lo, hi, epsabs=EPSABS_MIDDLE)
        total += val
        lo = hi
    if math.isinf(upper_cap):
        val, _ = _checked_quad(integrand, lo, math.inf, epsabs=EPSABS_MIDDLE)
        total += val
    return 2.0 * math.pi * bs_density * total


def _laplace_from_sp(
    model: PathLossModel,
    f: LosProbabilityFn,
    bs_density: float,
    sp: float,
    serving_branch: str,
    r: float,
) -> float:
    if sp == 0.0:
        return 1.0
    if serving_branch == LOS:
        lower_los = r
        lower_nlos = equal_loss_radius(model, r, LOS)
    else:
        lower_los = equal_loss_radius(model, r, NLOS)
        lower_nlos = r
    expo = _branch_exponent(model, f, bs_density, sp, LOS, lower_los)
    expo += _branch_exponent(model, f, bs_density, sp, NLOS, lower_nlos)
    return math.exp(-expo)


def laplace_interference(
    model: PathLossModel,
    f: LosProbabilityFn,
    bs_density: float,
    s: float,
    serving_branch: str,
    r: float,
    *,
    tx_power_mw: float = 10.0 ** 2.4,
) -> float:
    """Laplace transform of the aggregate interference at argument ``s``.

    The typical user is served by ``serving_branch`` at distance ``r``;
    interferers of each branch are excluded inside the region where they
    would have beaten the serving station's path loss.
    """
    if s < 0:
        raise ValueError("Laplace argument must be nonnegative")
    if r <= 0:
        raise ValueError("distance must be positive")
    return _laplace_from_sp(model, f, bs_density, s * tx_power_mw, serving_branch, r)


def _collect_split_points(
    model: PathLossModel, f: LosProbabilityFn, serving_branch: str
) -> list[float]:
    """Breaks plus their equal-loss images, where the integrand kinks."""
    breaks = sorted(set(model.breaks) | set(f.breakpoints()))
    pts = set(breaks)
    source = NLOS if serving_branch == LOS else LOS
    for b in breaks:
        img = equal_loss_radius(model, b, source)
        if 0.0 < img < math.inf:
            pts.add(img)
    return sorted(pts)


def _truncation_radius(integrand, start: float, bs_density: float) -> float:
    """Outer-integral cutoff: beyond it the integrand is negligible.

    Starts from the radius where the void probability alone reaches
    ``exp(-45)`` and doubles until the integrand has fallen below
    ``1e-14`` of its sampled peak.
    """
    upper = start + math.sqrt(45.0 / (math.pi * bs_density))
    # The serving-distance density peaks near 1/sqrt(density); probing two
    # decades below the cutoff brackets it without touching tiny radii.
    probe = np.geomspace(upper / 100.0, upper, 40)
    peak = max((integrand(float(x)) for x in probe), default=0.0)
    if peak <= 0.0:
        return upper
    for _ in range(12):
        if integrand(upper) <= _TAIL_RTOL * peak:
            return upper
        upper *= 2.0
    return upper


def _coverage_term(
    model: PathLossModel,
    f: LosProbabilityFn,
    params: NetworkParams,
    branch: str,
) -> tuple[float, float]:
    lam = params.bs_density
    gamma = params.sinr_threshold
    noise_over_p = params.noise_mw / params.tx_power_mw

    if branch == LOS:
        density = pdf_distance_los
    else:
        density = pdf_distance_nlos

    def integrand(r: float) -> float:
        if r <= 0:
            return 0.0
        dens = density(model, f, lam, r)
        if dens == 0.0:
            return 0.0
        zeta = model.gain(r, branch)
        sp = gamma / zeta
        lap = _laplace_from_sp(model, f, lam, sp, branch, r)
        return math.exp(-gamma * noise_over_p / zeta) * lap * dens

    if branch == LOS and math.isfinite(f.support_radius()):
        upper = f.support_radius()
    else:
        upper = _truncation_radius(integrand, max(model.breaks, default=0.0), lam)

    pts = [p for p in _collect_split_points(model, f, branch) if 0.0 < p < upper]
    edges: list[float] = []
    lo = 0.0
    for p in pts + [upper]:
        edges += _log_subpanels(lo, p) + [p]
        lo = p
    total = 0.0
    err = 0.0
    lo = 0.0
    for hi in edges:
        val, e = _checked_quad(integrand, lo, hi, epsabs=EPSABS_OUTER, epsrel=1e-8)
        total += val
        err += e
        lo = hi
    return total, err


def coverage_probability(
    model: PathLossModel, f: LosProbabilityFn, params: NetworkParams
) -> CoveragePoint:
    """Probability that the typical user's SINR exceeds the threshold.

    Sums the LoS-served and NLoS-served contributions, each an outer
    quadrature of (noise factor) x (interference Laplace transform) x
    (serving-distance density) over the serving distance.
    """
    t_los, e_los = _coverage_term(model, f, params, LOS)
    t_nlos, e_nlos = _coverage_term(model, f, params, NLOS)
    p = t_los + t_nlos
    if not -1e-9 <= p <= 1.0 + 1e-9:
        raise QuadratureError(f"coverage probability {p!r} escaped [0, 1]")
    p = min(max(p, 0.0), 1.0)
    return CoveragePoint(
        params.bs_density, params.sinr_threshold, p, "analytic-general", e_los + e_nlos
    )


def find_coverage_peak(
    model: PathLossModel,
    f: LosProbabilityFn,
    params: NetworkParams,
    lambda_range: tuple[float, float],
    coverage_fn=None,
) -> PeakResult:
    """Density maximising coverage probability on ``lambda_range``.

    A coarse geometric scan guards against non-unimodal curves and
    brackets the maximum; bisection on the central-difference slope
    (relative step 1e-3) then pins it down.
    """
    lo, hi = lambda_range
    if not 0 < lo < hi:
        raise ValueError("need 0 < lo < hi")
    if coverage_fn is None:

        def coverage_fn(lam: float, gamma: float) -> float:
            from dataclasses import replace

            return coverage_probability(
                model, f, replace(params, bs_density=lam, sinr_threshold=gamma)
            ).p_cov

    gamma = params.sinr_threshold

    def p_of(lam: float) -> float:
        return coverage_fn(lam, gamma)

    grid = np.geomspace(lo, hi, 25)
    vals = [p_of(float(g)) for g in grid]
    i = int(np.argmax(vals))
    if i in (0, len(grid) - 1):
        raise NoPeakError(
            "no interior coverage peak on the given density range"
        )

    def slope(lam: float) -> float:
        h = 1e-3 * lam
        return p_of(lam + h) - p_of(lam - h)

    a, b = float(grid[i - 1]), float(grid[i + 1])
    sa, sb = slope(a), slope(b)
    if sa <= 0 or sb >= 0:
        raise NoPeakError("coverage slope does not change sign inside the bracket")
    for _ in range(60):
        mid = math.sqrt(a * b)
        if (b - a) <= 1e-3 * mid:
            break
        sm = slope(mid)
        if sm > 0:
            a = mid
        else:
            b = mid
    lam_star = math.sqrt(a * b)
    return PeakResult(lam_star, p_of(lam_star), (a, b))
