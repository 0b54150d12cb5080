"""Conservative confidence sets from Monte Carlo tests.

A single set of Monte Carlo draws is frozen and reused to test every
hypothesized parameter value, which turns the P-value into a deterministic
step function of the parameter.  Inverting it by bisection gives confidence
bounds and intervals that keep the test's conservativeness.

Quick start::

    from mcci import OneSampleShiftCI, load_darwin
    est = OneSampleShiftCI(alpha=0.05, seed="demo").fit(load_darwin().x)
    est.lower_, est.upper_
"""

__version__ = "0.1.0"

from .confidence import freeze, pvalue_function, shift_interval
from .coverage import CoverageConfig, CoverageReport, run_coverage, run_subuniformity
from .datasets import load_darwin, load_lizard, load_sleep
from .estimators import OneSampleShiftCI, TwoSampleShiftCI
from .exceptions import (
    ContractError,
    DegenerateWeightsError,
    EmptyConfidenceSetError,
    InputError,
    MCCIError,
    PreconditionError,
    TooLargeError,
)
from .invert import (
    ConfidenceResult,
    SearchConfig,
    lower_bound,
    one_sided_interval,
    quasiconcave_interval,
    two_sided_interval,
    upper_bound,
)
from .oracle import (
    FullGroupIndex,
    breakpoint_scan_interval,
    full_group_index,
    full_group_interval,
    full_group_pvalue,
)
from .pvalues import (
    FrozenDraws,
    PValueFn,
    Tail,
    p_fixed_subset,
    p_plus_one,
    p_weighted,
    p_weighted_assignments,
    two_sided,
)
from .rng import FastGenerator, SeededGenerator, make_generator
from .shift_models import OneSampleData, TwoSampleData, make_pvalue_fn

__all__ = [
    "__version__",
    "ConfidenceResult",
    "ContractError",
    "CoverageConfig",
    "CoverageReport",
    "DegenerateWeightsError",
    "EmptyConfidenceSetError",
    "FastGenerator",
    "FrozenDraws",
    "FullGroupIndex",
    "InputError",
    "MCCIError",
    "OneSampleData",
    "OneSampleShiftCI",
    "PValueFn",
    "PreconditionError",
    "SearchConfig",
    "SeededGenerator",
    "Tail",
    "TooLargeError",
    "TwoSampleData",
    "TwoSampleShiftCI",
    "breakpoint_scan_interval",
    "freeze",
    "full_group_index",
    "full_group_interval",
    "full_group_pvalue",
    "load_darwin",
    "load_lizard",
    "load_sleep",
    "lower_bound",
    "make_generator",
    "make_pvalue_fn",
    "one_sided_interval",
    "p_fixed_subset",
    "p_plus_one",
    "p_weighted",
    "p_weighted_assignments",
    "pvalue_function",
    "quasiconcave_interval",
    "run_coverage",
    "run_subuniformity",
    "shift_interval",
    "two_sided",
    "two_sided_interval",
    "upper_bound",
]
