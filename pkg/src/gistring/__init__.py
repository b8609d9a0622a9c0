"""Spectral computation and classification for generalized indefinite strings."""

from .coefficients import (
    AntiDerivative,
    CompactPiecewise,
    ConstantTail,
    DomainError,
    EndpointDensity,
    EndpointTail,
    GIString,
    GrowthTail,
    MeasureRepr,
    ModelClassError,
    PowerDensity,
    PowerTail,
    UsageError,
    anti_derivative_of_measure,
    cesaro_mean_limit,
    kernel_delta,
    pair_distribution,
)
from .discretization import GalerkinModel, WhitenedPencil, build_galerkin, default_nodes, sqrt_psd, whiten
from .pencil import Spectrum, refine_until, solve_pencil_qep, solve_spectrum
from .oracle import PointMassProblem, oracle_spectrum, oracle_trace_sums
from .criteria import (
    Answer,
    Classification,
    Verdict,
    classify,
    classify_krein,
    singularity_gate,
    tail_functional,
)
from .camassa_holm import CHProblem, ExpDensity, ch_classify, ch_to_string
from .delta_prime import ExplicitSupport, PowerLawGenerator, dp_classify, dp_spectrum, dp_string
from .integral_ops import DiscretizedJ, build_J, build_JL, crossvalidate

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
