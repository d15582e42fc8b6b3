"""Instance generation, reports, property suites, fuzzing and the CLI."""

from .fuzz import FuzzResult, fuzz
from .instances import InstanceSpec, LambdaGen, MeasureGen, digest, dumps, gen, instance_from_dict, instance_to_dict, loads
from .report import RATIO_NAMES, VALUE_NAMES, Report, compute_values, evaluate
from .suites import SUITES, SuiteConfig, SuiteResult, UnknownSuiteError, check

__all__ = [
    "FuzzResult", "InstanceSpec", "LambdaGen", "MeasureGen", "RATIO_NAMES", "Report", "SUITES",
    "SuiteConfig", "SuiteResult", "UnknownSuiteError", "VALUE_NAMES", "check", "compute_values",
    "digest", "dumps", "evaluate", "fuzz", "gen", "instance_from_dict", "instance_to_dict", "loads",
]
