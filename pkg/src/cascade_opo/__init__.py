"""Simulation and analysis of a singly-pumped cavity with coupled
downconversion and sum-frequency generation."""

__version__ = "0.1.0"

from .model import (
    Regime,
    RegimeReport,
    SteadyState,
    SystemParams,
    classify_regime,
    mean_field_residual,
    standard_params,
    steady_state,
)
from .stability import (
    FluctuationMatrices,
    StabilityClass,
    StabilityReport,
    build_matrices,
    characteristic_poly_check,
    eigen_analysis,
    stability_map,
)
from .spectra import (
    SpectralResult,
    combination_variance,
    compute_spectra,
    intracavity_spectrum,
    output_spectrum,
    quadrature_transform,
)
from .criteria import (
    CriteriaSpectrum,
    GainSet,
    criteria_spectrum,
    optimal_gains,
    pairwise_criteria,
    scan_minimum,
    symmetric_criteria,
)
from .sde import (
    EnsembleMoments,
    Representation,
    SdeConfig,
    run_ensemble,
    sample_initial,
    step_positive_p,
    step_wigner,
    vijk_timeseries,
)
