"""Recovery of sparse trigonometric polynomials from random samples.

The package provides the Fourier measurement operator for random sampling
sets, two recovery methods (orthogonal matching pursuit and l1 minimisation
with a noise constraint), matrix diagnostics (coherence, restricted isometry
constants), closed-form sampling conditions and a Monte-Carlo harness.
"""

from .analysis import CoherenceReport, RicReport, coherence, gram_eig_extremes, ric_exhaustive, ric_monte_carlo
from .bpdn import BpdnConfig, BpdnResult, bp_stability_check, bpdn_solve, complex_soft_threshold, project_l2_ball
from .errors import *  # noqa: F401,F403
from .fourier_ops import (
    ContinuousUniform,
    FrequencySet,
    GridSubset,
    GridWithReplacement,
    MeasurementOperator,
    SamplingSet,
    SparseCoefficients,
    compute_D_prime,
    draw_noise_on_sphere,
    draw_samples,
    draw_sparse_coefficients,
    make_frequency_set,
)
from .harness import ExperimentConfig, TrialRecord, emit, load_stats, run_sweep, run_trial
from .omp import OmpConfig, RecoveryResult, Status, omp_recover

__version__ = "0.1.0"
