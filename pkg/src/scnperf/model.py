"""Piecewise LoS/NLoS path loss models and LoS probability functions.

The propagation model is a two-branch power law stacked into distance
segments: at distance ``r`` (km) a link is line-of-sight (LoS) with a
distance-dependent probability, and each branch attenuates as
``A * r**-alpha`` with branch- and segment-specific constants.

Conventions used throughout the package:

* distances in km, powers in linear mW, gains dimensionless;
* dB/dBm conversion happens only at tool boundaries (helpers below);
* at a segment break the lower segment owns the boundary point;
* ``r = 0`` is outside the domain of the power-law gains.

All model objects are immutable after construction and every operation is
a pure function, so they are safe to share across threads and processes.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.integrate import quad

LOS = "los"
NLOS = "nlos"

# 3GPP pico-cell defaults: 24 dBm transmit power and -95 dBm noise power
# (a 9 dB UE noise figure is already folded into the noise value).
DEFAULT_TX_POWER_MW = 10.0 ** 2.4
DEFAULT_NOISE_MW = 10.0 ** -9.5

# 3GPP pico-cell dual-branch path loss constants (distances in km):
# LoS 103.8 + 20.9 log10(r), NLoS 145.4 + 37.5 log10(r).
PICO_A_LOS = 10.0 ** -10.38
PICO_ALPHA_LOS = 2.09
PICO_A_NLOS = 10.0 ** -14.54
PICO_ALPHA_NLOS = 3.75

# Shape parameters of the standard LoS probability curves.
LINEAR_LOS_CUTOFF_KM = 0.3
EXP_LOS_R1_KM = 0.156
EXP_LOS_R2_KM = 0.03
APPROX_EXP_KNOTS = ((0.0, 1.0), (0.0184, 1.0), (0.1171, 0.0))


def db_to_linear(x_db: float) -> float:
    """Convert a dB ratio to a linear ratio."""
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    """Convert a linear ratio to dB."""
    if x <= 0:
        raise ValueError("linear value must be positive to convert to dB")
    return 10.0 * math.log10(x)


def dbm_to_mw(x_dbm: float) -> float:
    """Convert a power in dBm to linear mW."""
    return 10.0 ** (x_dbm / 10.0)


def mw_to_dbm(x_mw: float) -> float:
    """Convert a power in linear mW to dBm."""
    return linear_to_db(x_mw)


def _other_branch(branch: str) -> str:
    if branch == LOS:
        return NLOS
    if branch == NLOS:
        return LOS
    raise ValueError(f"unknown branch {branch!r}")


@dataclass(frozen=True)
class PathLossSegment:
    """One distance segment of the stacked path loss model.

    The segment covers ``d_lo < r <= d_hi`` (``d_hi`` may be ``inf``) and
    carries a power-law gain per branch: ``a_* * r**-alpha_*`` where the
    ``a_*`` are the linear gains at the 1 km reference distance.
    """

    d_lo: float
    d_hi: float
    a_los: float
    alpha_los: float
    a_nlos: float
    alpha_nlos: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.d_lo < self.d_hi:
            raise ValueError("segment needs 0 <= d_lo < d_hi")
        if min(self.a_los, self.a_nlos) <= 0:
            raise ValueError("reference gains must be positive")
        if min(self.alpha_los, self.alpha_nlos) <= 0:
            raise ValueError("path loss exponents must be positive")
        if self.alpha_nlos < self.alpha_los:
            raise ValueError("NLoS must attenuate at least as fast as LoS")

    def branch(self, which: str) -> tuple[float, float]:
        """Return ``(a, alpha)`` for the requested branch."""
        if which == LOS:
            return self.a_los, self.alpha_los
        if which == NLOS:
            return self.a_nlos, self.alpha_nlos
        raise ValueError(f"unknown branch {which!r}")

    def gain(self, r: float, which: str) -> float:
        a, alpha = self.branch(which)
        return a * r ** -alpha


@dataclass(frozen=True)
class PathLossModel:
    """Ordered segments tiling ``(0, inf)`` with no gaps or overlaps."""

    segments: tuple[PathLossSegment, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("need at least one segment")
        object.__setattr__(self, "segments", tuple(self.segments))
        if self.segments[0].d_lo != 0.0:
            raise ValueError("first segment must start at 0")
        if not math.isinf(self.segments[-1].d_hi):
            raise ValueError("last segment must extend to infinity")
        for lo, hi in zip(self.segments, self.segments[1:]):
            if lo.d_hi != hi.d_lo:
                raise ValueError("segments must tile (0, inf) contiguously")
        object.__setattr__(
            self, "_edges", tuple(s.d_hi for s in self.segments)
        )

    @property
    def breaks(self) -> tuple[float, ...]:
        """Interior break distances (excludes 0 and inf)."""
        return tuple(s.d_hi for s in self.segments[:-1])

    def segment_at(self, r: float) -> PathLossSegment:
        if r <= 0:
            raise ValueError("distance must be positive")
        # A break distance belongs to the segment below it.
        return self.segments[bisect_left(self._edges, r)]

    def branch_params_at(self, r: float, branch: str) -> tuple[float, float]:
        return self.segment_at(r).branch(branch)

    def gain(self, r: float, branch: str) -> float:
        """Linear path gain ``A * r**-alpha`` of a branch at distance r."""
        return self.segment_at(r).gain(r, branch)

    def gain_many(self, r: np.ndarray, los_mask: np.ndarray) -> np.ndarray:
        """Vectorised gain for mixed LoS/NLoS links at distances ``r``."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("distances must be positive")
        edges = np.asarray(self._edges)
        idx = np.searchsorted(edges, r, side="left")
        a_l = np.asarray([s.a_los for s in self.segments])[idx]
        al_l = np.asarray([s.alpha_los for s in self.segments])[idx]
        a_n = np.asarray([s.a_nlos for s in self.segments])[idx]
        al_n = np.asarray([s.alpha_nlos for s in self.segments])[idx]
        a = np.where(los_mask, a_l, a_n)
        alpha = np.where(los_mask, al_l, al_n)
        return a * r ** -alpha

    def uniform_branch(self, branch: str) -> tuple[float, float] | None:
        """``(a, alpha)`` if every segment shares them, else ``None``."""
        first = self.segments[0].branch(branch)
        for seg in self.segments[1:]:
            if seg.branch(branch) != first:
                return None
        return first


def path_loss(model: PathLossModel, r: float, branch: str) -> float:
    """Linear path gain of ``branch`` at distance ``r`` (km)."""
    return model.gain(r, branch)


def _invert_stacked_gain(model: PathLossModel, branch: str, target: float) -> float:
    """Outer radius of the region where the stacked branch gain exceeds ``target``.

    The stacked gain is strictly decreasing within each segment, so the
    boundary is either an interior power-law inversion or a segment break
    when the target falls into a jump of the stacked function. By
    convention the result is 0 when the target exceeds every gain value
    and ``inf`` when it lies below all of them.
    """
    if target <= 0:
        return math.inf
    if math.isinf(target):
        return 0.0
    for seg in model.segments:
        a, alpha = seg.branch(branch)
        # Gain at entry to this segment (infinite for the first segment).
        entry = math.inf if seg.d_lo == 0.0 else a * seg.d_lo ** -alpha
        if target >= entry:
            return seg.d_lo
        exit_ = 0.0 if math.isinf(seg.d_hi) else a * seg.d_hi ** -alpha
        if target > exit_:
            return (a / target) ** (1.0 / alpha)
    return math.inf


def _equal_loss_radius_bisection(
    model: PathLossModel, branch: str, target: float
) -> float:
    """Reference bisection solver for the stacked-gain inversion."""
    if target <= 0:
        return math.inf
    lo, hi = 1e-12, 1.0
    for _ in range(200):
        if model.gain(hi, branch) < target:
            break
        hi *= 2.0
    else:
        return math.inf
    if model.gain(lo, branch) < target:
        return 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if model.gain(mid, branch) >= target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def equal_loss_radius(model: PathLossModel, r: float, source_branch: str) -> float:
    """Distance at which the opposite branch matches the source branch loss.

    For a LoS link of length ``r`` this returns the radius of the disk
    inside which an NLoS link would have a smaller path loss (and vice
    versa). Single-exponent-pair models reduce to a closed-form power-law
    inversion; stacked models are inverted segment by segment.
    """
    target = model.gain(r, source_branch)
    return _invert_stacked_gain(model, _other_branch(source_branch), target)


class LosProbabilityFn:
    """Base class for distance-dependent LoS probability curves.

    Subclasses implement :meth:`value` accepting scalars or numpy arrays
    of nonnegative distances; values are defensively clipped to [0, 1] by
    :func:`los_probability`.
    """

    def value(self, r):
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        """Distances where the curve changes functional form."""
        return ()

    def support_radius(self) -> float:
        """Distance beyond which the curve is identically zero."""
        return math.inf

    def cumulative_los_area(self, r: float) -> float:
        """``integral_0^r Pr_los(u) * 2*pi*u du`` (km^2-weighted LoS mass).

        Subclasses override this with closed forms; the fallback splits
        the quadrature at the curve's breakpoints.
        """
        return self._cumulative_by_quadrature(r)

    def _cumulative_by_quadrature(self, r: float) -> float:
        if r < 0:
            raise ValueError("distance must be nonnegative")
        if r == 0:
            return 0.0
        pts = sorted({b for b in self.breakpoints() if 0.0 < b < r})
        total = 0.0
        lo = 0.0
        for hi in pts + [r]:
            val, _ = quad(
                lambda u: float(np.clip(self.value(u), 0.0, 1.0)) * 2.0 * math.pi * u,
                lo,
                hi,
                epsabs=1e-12,
                epsrel=1e-11,
                limit=200,
            )
            total += val
            lo = hi
        return total


def _as_float_or_array(r, values):
    if np.isscalar(r) or getattr(r, "ndim", 1) == 0:
        return float(values)
    return values


@dataclass(frozen=True)
class LinearLos(LosProbabilityFn):
    """LoS probability falling linearly from 1 at r=0 to 0 at the cutoff."""

    cutoff_km: float

    def __post_init__(self) -> None:
        if self.cutoff_km <= 0:
            raise ValueError("cutoff distance must be positive")

    def value(self, r):
        r = np.asarray(r, dtype=float)
        v = np.where(r <= self.cutoff_km, 1.0 - r / self.cutoff_km, 0.0)
        return _as_float_or_array(r, v)

    def breakpoints(self) -> tuple[float, ...]:
        return (self.cutoff_km,)

    def support_radius(self) -> float:
        return self.cutoff_km

    def cumulative_los_area(self, r: float) -> float:
        if r < 0:
            raise ValueError("distance must be nonnegative")
        d = self.cutoff_km
        r_eff = min(r, d)
        return math.pi * r_eff**2 - 2.0 * math.pi * r_eff**3 / (3.0 * d)


@dataclass(frozen=True)
class TwoPieceExpLos(LosProbabilityFn):
    """The 3GPP two-piece exponential LoS probability curve.

    ``1 - 5*exp(-r1/r)`` up to the split distance ``r1/ln(10)`` (where the
    value is exactly 0.5) and ``5*exp(-r/r2)`` beyond it, clipped to
    [0, 1]. ``r1_km``/``r2_km`` are the 3GPP shape parameters.
    """

    r1_km: float
    r2_km: float

    def __post_init__(self) -> None:
        if min(self.r1_km, self.r2_km) <= 0:
            raise ValueError("shape parameters must be positive")

    @property
    def split_km(self) -> float:
        return self.r1_km / math.log(10.0)

    @property
    def _saturation_km(self) -> float:
        # Where the far branch 5*exp(-r/r2) crosses 1.
        return self.r2_km * math.log(5.0)

    def value(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            near = 1.0 - 5.0 * np.exp(-self.r1_km / np.maximum(r, 1e-300))
        far = 5.0 * np.exp(-r / self.r2_km)
        v = np.clip(np.where(r <= self.split_km, near, far), 0.0, 1.0)
        return _as_float_or_array(r, v)

    def breakpoints(self) -> tuple[float, ...]:
        pts = [self.split_km]
        if self._saturation_km > self.split_km:
            pts.append(self._saturation_km)
        return tuple(pts)

    def cumulative_los_area(self, r: float) -> float:
        if r < 0:
            raise ValueError("distance must be nonnegative")
        if r == 0:
            return 0.0
        d = self.split_km
        r_near = min(r, d)
        # integral of (1 - 5 e^{-r1/u}) 2 pi u du = pi u^2 - 10 pi u^2 E3(r1/u)
        total = math.pi * r_near**2 - 10.0 * math.pi * r_near**2 * float(
            special.expn(3, self.r1_km / r_near)
        )
        if r <= d:
            return total
        sat = self._saturation_km
        if sat > d:
            # Far branch clipped at 1 on (d, sat].
            r_flat = min(r, sat)
            total += math.pi * (r_flat**2 - d**2)
        start = max(d, sat)
        if r > start:
            # integral of 5 e^{-u/r2} 2 pi u du via its antiderivative.
            r2 = self.r2_km

            def anti(u: float) -> float:
                return -10.0 * math.pi * r2 * (u + r2) * math.exp(-u / r2)

            total += anti(r) - anti(start)
        return total


@dataclass(frozen=True)
class PiecewiseLinearLos(LosProbabilityFn):
    """LoS probability interpolated linearly between knots.

    The curve extends as a constant before the first and after the last
    knot. Knot distances must be strictly increasing with values in
    [0, 1].
    """

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "knots", tuple(tuple(k) for k in self.knots))
        xs = [k[0] for k in self.knots]
        ps = [k[1] for k in self.knots]
        if len(xs) < 2:
            raise ValueError("need at least two knots")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("knot distances must be strictly increasing")
        if any(not 0.0 <= p <= 1.0 for p in ps):
            raise ValueError("knot values must lie in [0, 1]")
        if xs[0] < 0:
            raise ValueError("knot distances must be nonnegative")

    def _xp(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.asarray([k[0] for k in self.knots])
        ps = np.asarray([k[1] for k in self.knots])
        return xs, ps

    def value(self, r):
        r = np.asarray(r, dtype=float)
        xs, ps = self._xp()
        return _as_float_or_array(r, np.interp(r, xs, ps))

    def breakpoints(self) -> tuple[float, ...]:
        return tuple(k[0] for k in self.knots if k[0] > 0.0)

    def support_radius(self) -> float:
        if self.knots[-1][1] == 0.0:
            return self.knots[-1][0]
        return math.inf

    def cumulative_los_area(self, r: float) -> float:
        if r < 0:
            raise ValueError("distance must be nonnegative")
        xs, ps = self._xp()
        total = 0.0
        # Constant extension before the first knot.
        lo = 0.0
        if xs[0] > 0.0:
            hi = min(r, float(xs[0]))
            total += math.pi * ps[0] * (hi**2 - lo**2)
            lo = hi
        if r <= lo:
            return total
        for (x0, p0), (x1, p1) in zip(self.knots, self.knots[1:]):
            if r <= x0:
                break
            hi = min(r, x1)
            if hi <= x0:
                continue
            slope = (p1 - p0) / (x1 - x0)
            a = p0 - slope * x0
            total += math.pi * a * (hi**2 - x0**2) + (
                2.0 * math.pi / 3.0
            ) * slope * (hi**3 - x0**3)
        if r > xs[-1]:
            total += math.pi * ps[-1] * (r**2 - xs[-1] ** 2)
        return total


@dataclass(frozen=True)
class AlwaysNlos(LosProbabilityFn):
    """Single-slope baseline: every link is NLoS."""

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return _as_float_or_array(r, np.zeros_like(r))

    def support_radius(self) -> float:
        return 0.0

    def cumulative_los_area(self, r: float) -> float:
        if r < 0:
            raise ValueError("distance must be nonnegative")
        return 0.0


def los_probability(f: LosProbabilityFn, r):
    """LoS probability of a link of length ``r`` (km), clipped to [0, 1]."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise ValueError("distance must be nonnegative")
    return _as_float_or_array(arr, np.clip(f.value(arr), 0.0, 1.0))


@dataclass(frozen=True)
class NetworkParams:
    """Deployment and link-budget parameters of a downlink network."""

    bs_density: float  # base stations per km^2
    tx_power_mw: float = DEFAULT_TX_POWER_MW
    noise_mw: float = DEFAULT_NOISE_MW
    sinr_threshold: float = 1.0  # linear

    def __post_init__(self) -> None:
        for name in ("bs_density", "tx_power_mw", "noise_mw", "sinr_threshold"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def _two_slope_model() -> PathLossModel:
    return PathLossModel(
        (
            PathLossSegment(
                0.0,
                math.inf,
                PICO_A_LOS,
                PICO_ALPHA_LOS,
                PICO_A_NLOS,
                PICO_ALPHA_NLOS,
            ),
        )
    )


def preset(
    name: str, *, alpha_los: float | None = None
) -> tuple[PathLossModel, LosProbabilityFn]:
    """Named model/LoS-curve pairs used across the package.

    * ``case1`` — two-branch pico path loss with the linear LoS ramp;
    * ``case2`` — same path loss with the two-piece exponential curve;
    * ``approx-case2`` — same path loss with the three-knot piecewise
      linear fit of the ``case2`` curve;
    * ``single-slope`` — always-NLoS baseline (one exponent, 3.75).

    ``alpha_los`` overrides the LoS exponent for sensitivity studies.
    """
    if name == "single-slope":
        if alpha_los is not None:
            raise ValueError("single-slope has no LoS branch to override")
        model = PathLossModel(
            (
                PathLossSegment(
                    0.0,
                    math.inf,
                    PICO_A_NLOS,
                    PICO_ALPHA_NLOS,
                    PICO_A_NLOS,
                    PICO_ALPHA_NLOS,
                ),
            )
        )
        return model, AlwaysNlos()

    model = _two_slope_model()
    if alpha_los is not None:
        seg = model.segments[0]
        model = PathLossModel(
            (
                PathLossSegment(
                    seg.d_lo,
                    seg.d_hi,
                    seg.a_los,
                    alpha_los,
                    seg.a_nlos,
                    seg.alpha_nlos,
                ),
            )
        )
    if name == "case1":
        return model, LinearLos(LINEAR_LOS_CUTOFF_KM)
    if name == "case2":
        return model, TwoPieceExpLos(EXP_LOS_R1_KM, EXP_LOS_R2_KM)
    if name == "approx-case2":
        return model, PiecewiseLinearLos(APPROX_EXP_KNOTS)
    raise ValueError(f"unknown preset {name!r}")


PRESET_NAMES = ("case1", "case2", "approx-case2", "single-slope")
