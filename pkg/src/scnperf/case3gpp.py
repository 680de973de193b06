"""Closed-form coverage for the two-slope model with a linear LoS ramp.

With a single LoS/NLoS exponent pair and the linear LoS probability
ramp, the interference Laplace transforms reduce to differences of two
hypergeometric-expressible integrals

* ``interference_integral(alpha, beta, t, d)   = int_0^d  u^beta / (1 + t u^alpha) du``
* ``interference_tail_integral(alpha, beta, t, d) = int_d^inf u^beta / (1 + t u^alpha) du``

so coverage needs one adaptive quadrature per serving regime instead of
the three nested folds of the general engine in :mod:`scnperf.analytic`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy.integrate import quad

from .analytic import CoveragePoint, QuadratureError, _checked_quad, _log_subpanels
from .model import (
    DEFAULT_NOISE_MW,
    DEFAULT_TX_POWER_MW,
    LINEAR_LOS_CUTOFF_KM,
    LOS,
    NLOS,
    PICO_A_LOS,
    PICO_A_NLOS,
    PICO_ALPHA_LOS,
    PICO_ALPHA_NLOS,
    LinearLos,
    LosProbabilityFn,
    NetworkParams,
    PathLossModel,
)

_FAMILY_TOL = 1e-9
_SERIES_RTOL = 1e-15
_MAX_TERMS = 20000


def _series_a1(b: float, c: float, w: float) -> float:
    """``sum_k ((b)_k / (c)_k) w^k`` — the Gauss series with first parameter 1."""
    term = 1.0
    total = 1.0
    for k in range(_MAX_TERMS):
        term *= (b + k) / (c + k) * w
        total += term
        if abs(term) <= _SERIES_RTOL * abs(total):
            return total
    raise QuadratureError("hypergeometric series did not converge")


def _base_integral_by_quadrature(b: float, x: float) -> float:
    """``int_0^x v^(b-1) / (1 + v) dv`` for the near-integer-b fallback."""
    points = [1.0] if x > 1.0 else None
    val, _ = quad(
        lambda v: v ** (b - 1.0) / (1.0 + v),
        0.0,
        x,
        epsabs=1e-13,
        epsrel=1e-12,
        limit=200,
        points=points,
    )
    return val


def _hyp2f1_far_negative(b: float, z: float) -> float:
    """Inverse-argument evaluation for z << -1 where the Gauss series stalls."""
    x = -z
    nearest = round(b)
    if nearest != 0 and abs(b - nearest) < 1e-3:
        # The two inversion terms cancel catastrophically near integer b;
        # fall back to the defining integral.
        return b * x**-b * _base_integral_by_quadrature(b, x)
    head = (b / (b - 1.0)) / x * _series_a1(1.0 - b, 2.0 - b, 1.0 / z)
    return head + b * math.pi / math.sin(math.pi * b) * x**-b


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function on the family the closed forms need.

    Only ``a == 1``, ``c == b + 1`` and ``z <= 0`` are supported; other
    parameters raise. Evaluation uses the Gauss series directly for
    small ``|z|``, the Pfaff transform ``z -> z/(z-1)`` for moderate
    negative ``z`` and an inverse-argument expansion beyond that.
    """
    if a != 1:
        raise ValueError("only the a=1 family is implemented")
    if abs(c - (b + 1.0)) > _FAMILY_TOL:
        raise ValueError("only the c=b+1 family is implemented")
    if b <= 0:
        raise ValueError("need b > 0")
    if z > 0:
        raise ValueError("only z <= 0 is implemented")
    if z == 0.0:
        return 1.0
    if z >= -0.9:
        return _series_a1(b, c, z)
    if z >= -9.0:
        # Pfaff: F(1,b;b+1;z) = (1-z)^-1 F(1,1;b+1;z/(z-1)), argument in (0, 0.9].
        return _series_a1(1.0, c, z / (z - 1.0)) / (1.0 - z)
    return _hyp2f1_far_negative(b, z)


def interference_integral(alpha: float, beta: float, t: float, d: float) -> float:
    """``int_0^d u^beta / (1 + t u^alpha) du``.

    The Rayleigh expectation of interference from a disk of radius ``d``
    collapses to this kernel; ``t`` is the reciprocal of the Laplace
    argument times the interferer reference gain.
    """
    if alpha <= 0 or beta < 0 or d < 0 or t < 0:
        raise ValueError("need alpha > 0, beta >= 0, d >= 0, t >= 0")
    if d == 0.0:
        return 0.0
    if t == 0.0:
        return d ** (beta + 1.0) / (beta + 1.0)
    b = (beta + 1.0) / alpha
    return d ** (beta + 1.0) / (beta + 1.0) * hyp2f1(1, b, b + 1.0, -t * d**alpha)


def interference_tail_integral(
    alpha: float, beta: float, t: float, d: float
) -> float:
    """``int_d^inf u^beta / (1 + t u^alpha) du`` (requires ``alpha > beta + 1``)."""
    if alpha <= beta + 1.0:
        raise ValueError("tail integral diverges unless alpha > beta + 1")
    if t <= 0 or d <= 0 or beta < 0:
        raise ValueError("need t > 0, d > 0, beta >= 0")
    b = 1.0 - (beta + 1.0) / alpha
    return (
        d ** (beta + 1.0 - alpha)
        / (t * (alpha - beta - 1.0))
        * hyp2f1(1, b, b + 1.0, -1.0 / (t * d**alpha))
    )


@dataclass(frozen=True)
class Case1Params:
    """Two-slope model with the linear LoS ramp, plus network parameters.

    ``los_cutoff_km`` is the distance where the LoS probability reaches
    zero; beyond it every link (serving or interfering) is NLoS.
    """

    los_cutoff_km: float
    a_los: float
    alpha_los: float
    a_nlos: float
    alpha_nlos: float
    bs_density: float
    tx_power_mw: float
    noise_mw: float

    def __post_init__(self) -> None:
        if self.los_cutoff_km <= 0:
            raise ValueError("LoS cutoff must be positive")
        if min(self.a_los, self.a_nlos) <= 0:
            raise ValueError("reference gains must be positive")
        if self.alpha_nlos <= 2.0:
            raise ValueError(
                "NLoS exponent must exceed 2 for the interference tail to converge"
            )
        if self.alpha_los <= 0:
            raise ValueError("LoS exponent must be positive")
        for name in ("bs_density", "tx_power_mw", "noise_mw"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        y1 = self.mixed_interference_radius
        if not 0.0 < y1 < self.los_cutoff_km:
            raise ValueError(
                "the NLoS-serving exclusion disk must reach the LoS cutoff "
                "inside (0, cutoff)"
            )

    @property
    def mixed_interference_radius(self) -> float:
        """Serving distance below which an NLoS-served user still sees LoS interferers.

        For smaller serving distances the equal-loss exclusion disk ends
        inside the LoS cutoff, leaving LoS interferers between the two.
        """
        return self.los_cutoff_km ** (self.alpha_los / self.alpha_nlos) * (
            self.a_nlos / self.a_los
        ) ** (1.0 / self.alpha_nlos)

    def los_equal_radius(self, r: float) -> float:
        """NLoS distance with the same path loss as a LoS link at ``r``."""
        return (self.a_nlos / self.a_los) ** (1.0 / self.alpha_nlos) * r ** (
            self.alpha_los / self.alpha_nlos
        )

    def nlos_equal_radius(self, r: float) -> float:
        """LoS distance with the same path loss as an NLoS link at ``r``."""
        return (self.a_los / self.a_nlos) ** (1.0 / self.alpha_los) * r ** (
            self.alpha_nlos / self.alpha_los
        )

    @classmethod
    def from_network(cls, params: NetworkParams, **overrides) -> "Case1Params":
        """Standard pico-cell constants bound to the given network parameters."""
        fields = dict(
            los_cutoff_km=LINEAR_LOS_CUTOFF_KM,
            a_los=PICO_A_LOS,
            alpha_los=PICO_ALPHA_LOS,
            a_nlos=PICO_A_NLOS,
            alpha_nlos=PICO_ALPHA_NLOS,
            bs_density=params.bs_density,
            tx_power_mw=params.tx_power_mw,
            noise_mw=params.noise_mw,
        )
        fields.update(overrides)
        return cls(**fields)

    @classmethod
    def from_components(
        cls,
        model: PathLossModel,
        los_fn: LosProbabilityFn,
        params: NetworkParams,
    ) -> "Case1Params":
        """Extract closed-form parameters from a model/curve pair.

        Raises if the pair is not a uniform two-branch power law with a
        linear LoS ramp, which is the only shape the closed forms cover.
        """
        if not isinstance(los_fn, LinearLos):
            raise ValueError("closed forms need the linear LoS probability ramp")
        uni_l = model.uniform_branch(LOS)
        uni_n = model.uniform_branch(NLOS)
        if uni_l is None or uni_n is None:
            raise ValueError("closed forms need distance-uniform branch exponents")
        return cls(
            los_cutoff_km=los_fn.cutoff_km,
            a_los=uni_l[0],
            alpha_los=uni_l[1],
            a_nlos=uni_n[0],
            alpha_nlos=uni_n[1],
            bs_density=params.bs_density,
            tx_power_mw=params.tx_power_mw,
            noise_mw=params.noise_mw,
        )

    def with_density(self, bs_density: float) -> "Case1Params":
        return replace(self, bs_density=bs_density)


def laplace_los_near(c: Case1Params, gamma: float, r: float) -> float:
    """Interference Laplace transform for a LoS-served user inside the cutoff.

    Argument is the coverage-threshold value ``gamma * r^alpha_los /
    (P * a_los)``. LoS interferers contribute between ``r`` and the
    cutoff, NLoS interferers from the equal-loss radius outward.
    """
    d1 = c.los_cutoff_km
    if not 0.0 < r <= d1:
        raise ValueError("serving distance must lie in (0, cutoff]")
    if gamma < 0:
        raise ValueError("threshold must be nonnegative")
    if gamma == 0.0:
        return 1.0
    lam = c.bs_density
    t_los = 1.0 / (gamma * r**c.alpha_los)
    t_nlos = 1.0 / (gamma * (c.a_nlos / c.a_los) * r**c.alpha_los)
    r1 = c.los_equal_radius(r)
    two_pi_lam = 2.0 * math.pi * lam
    expo = two_pi_lam * (
        interference_integral(c.alpha_los, 1, t_los, d1)
        - interference_integral(c.alpha_los, 1, t_los, r)
    )
    expo -= (two_pi_lam / d1) * (
        interference_integral(c.alpha_los, 2, t_los, d1)
        - interference_integral(c.alpha_los, 2, t_los, r)
    )
    expo += (two_pi_lam / d1) * (
        interference_integral(c.alpha_nlos, 2, t_nlos, d1)
        - interference_integral(c.alpha_nlos, 2, t_nlos, r1)
    )
    expo += two_pi_lam * interference_tail_integral(c.alpha_nlos, 1, t_nlos, d1)
    return math.exp(-expo)


def laplace_nlos_near(c: Case1Params, gamma: float, r: float) -> float:
    """Interference Laplace transform for an NLoS-served user inside the cutoff.

    Below the mixed-interference radius the exclusion disk ends inside
    the cutoff and both branches interfere; above it only NLoS
    interferers remain.
    """
    d1 = c.los_cutoff_km
    if not 0.0 < r <= d1:
        raise ValueError("serving distance must lie in (0, cutoff]")
    if gamma < 0:
        raise ValueError("threshold must be nonnegative")
    if gamma == 0.0:
        return 1.0
    lam = c.bs_density
    t_nlos = 1.0 / (gamma * r**c.alpha_nlos)
    two_pi_lam = 2.0 * math.pi * lam
    expo = (two_pi_lam / d1) * (
        interference_integral(c.alpha_nlos, 2, t_nlos, d1)
        - interference_integral(c.alpha_nlos, 2, t_nlos, r)
    )
    expo += two_pi_lam * interference_tail_integral(c.alpha_nlos, 1, t_nlos, d1)
    if r <= c.mixed_interference_radius:
        t_los = 1.0 / (gamma * (c.a_los / c.a_nlos) * r**c.alpha_nlos)
        r2 = c.nlos_equal_radius(r)
        expo += two_pi_lam * (
            interference_integral(c.alpha_los, 1, t_los, d1)
            - interference_integral(c.alpha_los, 1, t_los, r2)
        )
        expo -= (two_pi_lam / d1) * (
            interference_integral(c.alpha_los, 2, t_los, d1)
            - interference_integral(c.alpha_los, 2, t_los, r2)
        )
    return math.exp(-expo)


def laplace_nlos_far(c: Case1Params, gamma: float, r: float) -> float:
    """Interference Laplace transform for an NLoS-served user beyond the cutoff.

    Only NLoS interferers exist out there and the exclusion disk covers
    every possible LoS position, leaving a single tail term.
    """
    if r <= c.los_cutoff_km:
        raise ValueError("serving distance must exceed the cutoff")
    if gamma < 0:
        raise ValueError("threshold must be nonnegative")
    if gamma == 0.0:
        return 1.0
    t_nlos = 1.0 / (gamma * r**c.alpha_nlos)
    return math.exp(
        -2.0
        * math.pi
        * c.bs_density
        * interference_tail_integral(c.alpha_nlos, 1, t_nlos, r)
    )


def pdf_serving_los(c: Case1Params, r: float) -> float:
    """Closed-form LoS serving-distance density (zero beyond the cutoff)."""
    if r <= 0:
        raise ValueError("distance must be positive")
    d1 = c.los_cutoff_km
    if r > d1:
        return 0.0
    lam = c.bs_density
    r1 = c.los_equal_radius(r)
    expo = -math.pi * lam * r**2 + 2.0 * math.pi * lam * (r**3 - r1**3) / (3.0 * d1)
    return math.exp(expo) * (1.0 - r / d1) * 2.0 * math.pi * r * lam


def pdf_serving_nlos(c: Case1Params, r: float) -> float:
    """Closed-form NLoS serving-distance density over all distances."""
    if r <= 0:
        raise ValueError("distance must be positive")
    d1 = c.los_cutoff_km
    lam = c.bs_density
    if r > d1:
        return math.exp(-math.pi * lam * r**2) * 2.0 * math.pi * r * lam
    if r <= c.mixed_interference_radius:
        r2 = c.nlos_equal_radius(r)
        expo = -math.pi * lam * r2**2 + 2.0 * math.pi * lam * (r2**3 - r**3) / (
            3.0 * d1
        )
    else:
        expo = -math.pi * lam * d1**2 / 3.0 - 2.0 * math.pi * lam * r**3 / (3.0 * d1)
    return math.exp(expo) * (r / d1) * 2.0 * math.pi * r * lam


def _truncation_radius_far(integrand, d1: float, lam: float) -> float:
    upper = d1 + math.sqrt(45.0 / (math.pi * lam))
    peak = max(integrand(d1 * 1.0001), integrand(min(2 * d1, upper)), 1e-300)
    for _ in range(12):
        if integrand(upper) <= 1e-14 * peak:
            return upper
        upper *= 2.0
    return upper


def coverage_case1(c: Case1Params, gamma: float) -> CoveragePoint:
    """Coverage probability via the closed-form Laplace transforms.

    Three single quadratures: LoS-served inside the cutoff, NLoS-served
    inside the cutoff (split where the interference mix changes) and
    NLoS-served beyond it.
    """
    if gamma <= 0:
        raise ValueError("threshold must be positive")
    d1 = c.los_cutoff_km
    y1 = c.mixed_interference_radius
    noise_over_p = c.noise_mw / c.tx_power_mw

    def term_los(r: float) -> float:
        noise = math.exp(-gamma * r**c.alpha_los * noise_over_p / c.a_los)
        return noise * laplace_los_near(c, gamma, r) * pdf_serving_los(c, r)

    def term_nlos_near(r: float) -> float:
        noise = math.exp(-gamma * r**c.alpha_nlos * noise_over_p / c.a_nlos)
        return noise * laplace_nlos_near(c, gamma, r) * pdf_serving_nlos(c, r)

    def term_nlos_far(r: float) -> float:
        noise = math.exp(-gamma * r**c.alpha_nlos * noise_over_p / c.a_nlos)
        return noise * laplace_nlos_far(c, gamma, r) * pdf_serving_nlos(c, r)

    total = 0.0
    err = 0.0
    for fn, lo, hi in (
        (term_los, 0.0, y1),
        (term_los, y1, d1),
        (term_nlos_near, 0.0, y1),
        (term_nlos_near, y1, d1),
    ):
        for edge in _log_subpanels(lo, hi) + [hi]:
            val, e = _checked_quad(fn, lo, edge, epsabs=1e-10, epsrel=1e-9)
            total += val
            err += e
            lo = edge
    upper = _truncation_radius_far(term_nlos_far, d1, c.bs_density)
    lo = d1
    for edge in _log_subpanels(d1, upper) + [upper]:
        val, e = _checked_quad(term_nlos_far, lo, edge, epsabs=1e-10, epsrel=1e-9)
        total += val
        err += e
        lo = edge
    if not -1e-9 <= total <= 1.0 + 1e-9:
        raise QuadratureError(f"coverage probability {total!r} escaped [0, 1]")
    total = min(max(total, 0.0), 1.0)
    return CoveragePoint(c.bs_density, gamma, total, "analytic-closed", err)
