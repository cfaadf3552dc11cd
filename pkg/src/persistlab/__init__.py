"""persistlab: persistence of random walks with Markov-functional increments.

Exact and Monte Carlo tools for survival probabilities of partial sums of a
mean-zero functional of a finite stationary Markov chain, the limiting
variance of the associated CLT, first-hitting kernels, and simulators for
the three 1D 3-color excitable-media cellular automata (cyclic, Greenberg-
Hastings, firefly) whose clustering constants those walks predict.
"""

__version__ = "0.1.0"

from .automata import (
    DensitySeries,
    RingConfig,
    density_curve,
    differential,
    event_equivalence_check,
    excitation_identity_check,
    no_flip_check,
    particle_law_check,
    proposition_time,
    random_init,
    step,
    step_colors,
)
from .chain import (
    MarkovSpec,
    StationaryDist,
    WalkModel,
    WindowInfo,
    autocovariance_exact,
    load_chain_file,
    make_walk_model,
    parse_chain_text,
    reverse,
    sample_stationary_path,
    sample_stationary_paths,
    stationary,
    stationary_exact,
    validate,
)
from .errors import ComputationError, ParseError, PersistLabError, ValidationError
from .hitting import HittingKernel, Prop34Report, hitting_kernel, hitting_kernel_converged, prop34_check
from .presets import PRESET_NAMES, build_preset, preset_from_string
from .seeding import SeedSpec, as_seedspec
from .survival import (
    DualityGap,
    MaxStats,
    McEstimate,
    SkipfreeReport,
    SqrtFit,
    SurvivalTable,
    backward_max_mc,
    duality_gap,
    integrated_survival_dp,
    integrated_survival_mc,
    skipfree_checks,
    sqrt_fit,
    suggested_cap,
    survival_bruteforce,
    survival_dp,
)
from .variance import VarianceReport, gamma2_all, gamma2_exact, gamma2_series, gamma2_spectral
from .verify import CheckResult, SUITES, run_suite

__all__ = [name for name in dir() if not name.startswith("_")]
