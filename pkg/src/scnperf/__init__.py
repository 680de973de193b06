"""Coverage and area spectral efficiency of dense small-cell networks.

A stochastic-geometry toolkit for downlink networks whose links switch
between LoS and NLoS power-law path loss with a distance-dependent
probability. Coverage probability and ASE are available through three
independent routes that cross-validate each other:

* a general nested-quadrature engine (:mod:`scnperf.analytic`),
* hypergeometric closed forms for the linear-ramp special case
  (:mod:`scnperf.case3gpp`),
* a reproducible Monte Carlo simulation (:mod:`scnperf.montecarlo`).
"""

from .analytic import (
    CoveragePoint,
    DistancePdfSample,
    NoPeakError,
    PeakResult,
    QuadratureError,
    coverage_probability,
    distance_pdf,
    find_coverage_peak,
    laplace_interference,
    pdf_distance_los,
    pdf_distance_nlos,
)
from .ase import AsePoint, ase, ase_direct, ase_mc
from .case3gpp import (
    Case1Params,
    coverage_case1,
    hyp2f1,
    interference_integral,
    interference_tail_integral,
    laplace_los_near,
    laplace_nlos_far,
    laplace_nlos_near,
)
from .model import (
    LOS,
    NLOS,
    AlwaysNlos,
    LinearLos,
    LosProbabilityFn,
    NetworkParams,
    PathLossModel,
    PathLossSegment,
    PiecewiseLinearLos,
    PRESET_NAMES,
    TwoPieceExpLos,
    db_to_linear,
    dbm_to_mw,
    equal_loss_radius,
    linear_to_db,
    los_probability,
    mw_to_dbm,
    path_loss,
    preset,
)
from .montecarlo import (
    AssociationHistogram,
    McConfig,
    McEstimate,
    default_disk_radius,
    estimate_association_pdf,
    estimate_coverage,
    simulate_sinr,
    sinr_samples,
)

__version__ = "0.1.0"

__all__ = [
    "AlwaysNlos",
    "AsePoint",
    "AssociationHistogram",
    "Case1Params",
    "CoveragePoint",
    "DistancePdfSample",
    "LOS",
    "LinearLos",
    "LosProbabilityFn",
    "McConfig",
    "McEstimate",
    "NLOS",
    "NetworkParams",
    "NoPeakError",
    "PathLossModel",
    "PathLossSegment",
    "PeakResult",
    "PiecewiseLinearLos",
    "PRESET_NAMES",
    "QuadratureError",
    "TwoPieceExpLos",
    "ase",
    "ase_direct",
    "ase_mc",
    "coverage_case1",
    "coverage_probability",
    "db_to_linear",
    "dbm_to_mw",
    "default_disk_radius",
    "distance_pdf",
    "equal_loss_radius",
    "estimate_association_pdf",
    "estimate_coverage",
    "find_coverage_peak",
    "hyp2f1",
    "interference_integral",
    "interference_tail_integral",
    "laplace_interference",
    "laplace_los_near",
    "laplace_nlos_far",
    "laplace_nlos_near",
    "linear_to_db",
    "los_probability",
    "mw_to_dbm",
    "path_loss",
    "pdf_distance_los",
    "pdf_distance_nlos",
    "preset",
    "simulate_sinr",
    "sinr_samples",
    "coverage_case1",
    "__version__",
]
