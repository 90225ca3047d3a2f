"""Multifractal spectra, adaptive dyadic partitions, and approximation orders."""

__version__ = "0.1.0"

from .cubes import Box, DyadicCube, children, neighbors, parse_cube, root, scaled_box
from .errors import (
    ParseError,
    ResourceLimitError,
    SolverError,
    ValidationError,
    WidthlabError,
)
from .measures import (
    AtomicMeasure,
    IfsMap,
    IfsMeasure,
    MeasureModel,
    ProductMeasure,
    UniformMeasure,
    ingest_points,
    lebesgue,
    load_measure,
)
from .spectrum import (
    ClosedFormSpectrum,
    DimensionEstimate,
    EmpiricalSpectrum,
    SpectrumCurve,
    ahlfors_spectrum,
    beta_n,
    closed_form_spectrum,
    empirical_spectrum,
    minkowski,
    s_b_solve,
)
from .coarse import (
    CoarseProfile,
    alpha_good_cubes,
    coarse_profile,
    count_alpha_good,
    j_value,
    well_separated,
)
from .partition import PartitionResult, build_partition, entropy_slope
from .orders import (
    EmbeddingParams,
    OrderReport,
    case_label,
    dual_exponent,
    geometric_bounds,
    hilbert_check,
    lower_order,
    upper_S,
    upper_order,
    width_exponent,
)
from .empirical import (
    DecayResult,
    PiecewisePolynomial,
    ProbeResult,
    decay_experiment,
    lq_error,
    moment_project,
    packing_probe,
    piecewise_project,
    polynomial_space_dim,
    scaling_check,
    sobolev_seminorm,
)
from .functions import Bump, Polynomial, SinProduct, catalog, coordinate

__all__ = [name for name in dir() if not name.startswith("_")]
