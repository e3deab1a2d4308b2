"""Simulation and asymptotics of Parisian ruin for locally self-similar Gaussian risk processes."""

from .asymptotics import (
    Case,
    ConstantEstimate,
    HatExponents,
    RegimeReport,
    asymptotic_ruin,
    classify,
    constant_case_i_ii,
    constant_case_iii,
    hat_exponents,
    normal_survival,
)
from .errors import CoverageError, NumericError, ParameterError, ParisianError, SamplerError, SingularKernelError
from .functionals import ParisianWindow, apply_trend, parisian, pickands_integrand
from .kernels import (
    Family,
    KernelSpec,
    RiskModel,
    SelfSimilarClass,
    class_of,
    cov_eval,
    derive_model,
    derive_reversed_model,
    variogram,
    verify_class,
)
from .montecarlo import (
    Budget,
    Drift,
    EstimateWithCI,
    PickandsTable,
    build_pickands_table,
    pickands_limit,
    pickands_mc,
    ruin_prob_mc,
    scaling_check,
)
from .sampler import Grid, PathMatrix, factorize, sample_fbm_circulant, sample_paths

__version__ = "0.1.0"
