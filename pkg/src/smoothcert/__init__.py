"""Robustness certificates for Gaussian randomized smoothing.

First-order, second-order (value + gradient-norm) and dipole (antithetic
pair) L2 certificates, the confidence-bound machinery that turns seeded
Monte-Carlo samples into certified-safe evidence, analytic and external
base classifiers, and a reproducible sampling engine.
"""

from .certificates import (
    BoundCurveRequest,
    Certificate,
    DipoleEvidence,
    FirstOrderEvidence,
    RadiusCurveRequest,
    SecondOrderEvidence,
    SmoothingParams,
    anchor_mass,
    certificate_curve,
    dipole_lower_bound,
    dipole_radius,
    first_order_radius,
    max_gradient_norm,
    second_order_lower_bound,
    second_order_radius,
    smoothed_value_upper_bound,
)
from .classifiers import (
    ExternalClassifier,
    Halfspace,
    NearestNeighbor,
    Slab,
    halfspace_oracle,
    nn_classify,
    slab_oracle,
    swiss_roll_dataset,
    worst_case_slab,
)
from .engine import SamplingPlan, certify, sample_counts, sample_dipole_pairs, sample_gradient_pairs
from .estimation import (
    BinomialObservation,
    ConfidenceBudget,
    GradientEstimate,
    PairObservation,
    binomial_lower_bound,
    budget_for_method,
    dipole_mass_lower_bounds,
    gradient_deviation_bound,
    gradient_norm_upper_bound,
)
from .normal import Probability, std_cdf, std_pdf, std_quantile

__version__ = "0.1.0"
