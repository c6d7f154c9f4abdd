"""Average-case approximation complexity of additive random fields."""

__version__ = "0.1.0"

from .complexity import (  # noqa: E402
    ComplexityResult,
    complexity_curve,
    exact_complexity,
    homogeneous_complexity,
    reduced_complexity,
)
from .field import AdditiveField, assemble, epsilon_0, epsilon_d, merged_stream  # noqa: E402
from .spectra import (  # noqa: E402
    KorobovParams,
    MarginalSpectrum,
    SequenceModel,
    SigmaRule,
    explicit_spectrum,
    korobov_spectrum,
    zeta,
)
from .spectral_df import StepDistribution, build_Fd, count_and_defect, integral_complexity  # noqa: E402

__all__ = [
    "AdditiveField",
    "ComplexityResult",
    "KorobovParams",
    "MarginalSpectrum",
    "SequenceModel",
    "SigmaRule",
    "StepDistribution",
    "assemble",
    "build_Fd",
    "complexity_curve",
    "count_and_defect",
    "epsilon_0",
    "epsilon_d",
    "exact_complexity",
    "explicit_spectrum",
    "homogeneous_complexity",
    "integral_complexity",
    "korobov_spectrum",
    "merged_stream",
    "reduced_complexity",
    "zeta",
]
