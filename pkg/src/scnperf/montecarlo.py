"""Monte Carlo oracle: simulate the network the analysis describes.

Base stations are dropped as a Poisson process on a disk around the
typical user, each link is independently LoS or NLoS according to the
probability curve, the user associates with the smallest path loss, and
SINR is measured under unit-mean Rayleigh (exponential power) fading.

Reproducibility contract: trial ``i`` consumes only the counter-based
stream keyed by ``(seed, i)``, so results are bit-identical for a given
seed regardless of how many trials run or how they are scheduled. Per
trial the stream is consumed in a fixed order: station count (redrawn
while zero), squared-radius uniforms (redrawn for stations inside the
origin guard), LoS coin uniforms, then fading exponentials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    LosProbabilityFn,
    NetworkParams,
    PathLossModel,
    los_probability,
)

_ZERO_DRAW_BUDGET = 1000


@dataclass(frozen=True)
class McConfig:
    """Simulation window, replication count and RNG seed."""

    disk_radius_km: float
    trials: int
    seed: int
    min_bs_guard_km: float = 1e-9

    def __post_init__(self) -> None:
        if self.disk_radius_km <= 0:
            raise ValueError("disk radius must be positive")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.min_bs_guard_km < 0:
            raise ValueError("guard radius must be nonnegative")


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo point estimate with its standard error."""

    mean: float
    std_error: float
    trials: int
    seed: int


@dataclass(frozen=True)
class AssociationHistogram:
    """Serving-distance histogram split by serving branch.

    ``density_*`` are per-km densities normalised by the trial count, so
    summing ``(density_los + density_nlos) * widths`` recovers the
    in-range probability mass (essentially 1 for a well-sized range).
    """

    edges: np.ndarray
    density_los: np.ndarray
    density_nlos: np.ndarray
    trials: int
    seed: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def compare(self, pdf_los, pdf_nlos) -> tuple[float, float]:
        """(sup-norm deviation / peak density, chi-square-style statistic).

        ``pdf_los``/``pdf_nlos`` are callables evaluated at bin centers.
        """
        ref_l = np.asarray([pdf_los(float(r)) for r in self.centers])
        ref_n = np.asarray([pdf_nlos(float(r)) for r in self.centers])
        ref = np.concatenate([ref_l, ref_n])
        got = np.concatenate([self.density_los, self.density_nlos])
        peak = float(ref.max())
        sup = float(np.abs(got - ref).max()) / peak
        expected_counts = ref * np.concatenate([self.widths, self.widths]) * self.trials
        mask = expected_counts > 5.0
        observed = got * np.concatenate([self.widths, self.widths]) * self.trials
        chi2 = float(
            ((observed[mask] - expected_counts[mask]) ** 2 / expected_counts[mask]).sum()
        )
        return sup, chi2


def default_disk_radius(bs_density: float, f: LosProbabilityFn) -> float:
    """Simulation window capturing the association region and dominant interference."""
    if bs_density <= 0:
        raise ValueError("density must be positive")
    last_break = max(f.breakpoints(), default=0.0)
    return max(5.0 / math.sqrt(bs_density), 3.0 * last_break, 2.0)


def _trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, trial_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _draw_distances(rng: np.random.Generator, cfg: McConfig, mean_count: float):
    for _ in range(_ZERO_DRAW_BUDGET):
        k = int(rng.poisson(mean_count))
        if k > 0:
            break
    else:
        raise RuntimeError(
            "no base stations in the window after "
            f"{_ZERO_DRAW_BUDGET} draws (mean count {mean_count:.3g}); "
            "enlarge the simulation window"
        )
    r = cfg.disk_radius_km * np.sqrt(rng.random(k))
    while True:
        bad = r < cfg.min_bs_guard_km
        n_bad = int(bad.sum())
        if n_bad == 0:
            return r
        r[bad] = cfg.disk_radius_km * np.sqrt(rng.random(n_bad))


def _serving_index(beta: np.ndarray, dist: np.ndarray) -> int:
    """Largest gain wins; ties go to the nearer station, then lower index."""
    best_val = beta.max()
    cand = np.flatnonzero(beta == best_val)
    if cand.size == 1:
        return int(cand[0])
    cand = cand[np.argsort(dist[cand], kind="stable")]
    return int(cand[0])


def _run_trial(
    model: PathLossModel,
    f: LosProbabilityFn,
    params: NetworkParams,
    cfg: McConfig,
    rng: np.random.Generator,
) -> tuple[float, float, bool]:
    """One SINR draw; returns (sinr, serving distance, serving-is-LoS)."""
    mean_count = params.bs_density * math.pi * cfg.disk_radius_km**2
    dist = _draw_distances(rng, cfg, mean_count)
    p_los = np.asarray(los_probability(f, dist), dtype=float)
    is_los = rng.random(dist.size) < p_los
    beta = model.gain_many(dist, is_los)
    gains = rng.exponential(1.0, dist.size)
    j = _serving_index(beta, dist)
    power = params.tx_power_mw
    signal = power * beta[j] * gains[j]
    interference = power * (float(beta @ gains) - beta[j] * gains[j])
    sinr = signal / (interference + params.noise_mw)
    return float(sinr), float(dist[j]), bool(is_los[j])


def simulate_sinr(
    model: PathLossModel,
    f: LosProbabilityFn,
    params: NetworkParams,
    cfg: McConfig,
    trial_index: int,
) -> float:
    """Linear SINR of the typical user in one reproducible trial."""
    if trial_index < 0:
        raise ValueError("trial index must be nonnegative")
    rng = _trial_rng(cfg.seed, trial_index)
    sinr, _, _ = _run_trial(model, f, params, cfg, rng)
    return sinr


def sinr_samples(
    model: PathLossModel,
    f: LosProbabilityFn,
    params: NetworkParams,
    cfg: McConfig,
) -> np.ndarray:
    """All per-trial SINR samples for the configured replication count."""
    out = np.empty(cfg.trials)
    for i in range(cfg.trials):
        rng = _trial_rng(cfg.seed, i)
        out[i], _, _ = _run_trial(model, f, params, cfg, rng)
    return out


def estimate_coverage(
    model: PathLossModel,
    f: LosProbabilityFn,
    params: NetworkParams,
    cfg: McConfig,
) -> McEstimate:
    """Empirical frequency of SINR exceeding the configured threshold."""
    samples = sinr_samples(model, f, params, cfg)
    hits = (samples > params.sinr_threshold).astype(float)
    mean = float(hits.mean())
    if cfg.trials > 1:
        se = float(hits.std(ddof=1) / math.sqrt(cfg.trials))
    else:
        se = math.inf
    return McEstimate(mean, se, cfg.trials, cfg.seed)


def estimate_association_pdf(
    model: PathLossModel,
    f: LosProbabilityFn,
    params: NetworkParams,
    cfg: McConfig,
    bins: int,
    r_max: float | None = None,
) -> AssociationHistogram:
    """Histogram of (serving distance, serving branch) over the trials.

    The default range ``[0, 4/sqrt(density)]`` holds all but an
    exponentially negligible share of the serving-distance mass.
    """
    if bins < 2:
        raise ValueError("need at least two bins")
    if r_max is None:
        r_max = 4.0 / math.sqrt(params.bs_density)
    edges = np.linspace(0.0, r_max, bins + 1)
    dists = np.empty(cfg.trials)
    los_flags = np.empty(cfg.trials, dtype=bool)
    for i in range(cfg.trials):
        rng = _trial_rng(cfg.seed, i)
        _, dists[i], los_flags[i] = _run_trial(model, f, params, cfg, rng)
    counts_los, _ = np.histogram(dists[los_flags], bins=edges)
    counts_nlos, _ = np.histogram(dists[~los_flags], bins=edges)
    widths = np.diff(edges)
    return AssociationHistogram(
        edges=edges,
        density_los=counts_los / (cfg.trials * widths),
        density_nlos=counts_nlos / (cfg.trials * widths),
        trials=cfg.trials,
        seed=cfg.seed,
    )
