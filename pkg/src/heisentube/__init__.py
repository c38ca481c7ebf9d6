"""Grauert tubes of the Heisenberg group: exact algebra, gauges, Levi forms,
quadrature campaigns and representation checks."""

from .heisenberg import (
    AlgebraElement,
    C_IDENTITY,
    ComplexGroupElement,
    FactorizationError,
    GroupElement,
    HaarMeasure,
    IDENTITY,
    embed,
    exp_i,
    factorize,
    inverse,
    mul,
    unimodularity_check,
)
from .gauge import (
    DerivativeBundle,
    GaugeModel,
    TubePoint,
    derivatives,
    fd_bundle,
    phi,
    phi_tilde,
    project_to_group,
    rescaled_model,
    translate,
    tube_contains,
)
from .levi import (
    BranchDomainError,
    LeviPolynomial,
    SpcCertificate,
    bound_constants,
    certify_spc,
    eval_power,
    levi_form,
    levi_polynomial,
    negative_real_part_check,
)
from .quadrature import (
    ConvolutionKernel,
    CutoffFunction,
    DivergentIntegralError,
    IntegrationResult,
    QuadratureSpec,
    TubeBatch,
    convolve,
    integrate_box,
    model_integral,
    model_integral_closed_form,
    tube_integral,
)
from .analysis import (
    BlowupReport,
    EscapingSequence,
    GramReport,
    ProductBump,
    QuotientSection,
    TubeBump,
    amenability_check,
    continuity_sweep,
    escape_sequence,
    fubini_check,
    gram_rank,
    l1_group_norm,
    lp_threshold_sweep,
    quasi_norm,
    restrict_slice,
    separation_witness,
    unitarity_check,
)
from .cli import RunConfig, parse_config, emit_config, run

__version__ = "0.1.0"
