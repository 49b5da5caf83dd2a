"""Program generation and executable property checks."""

from .gen import COUNTER_PATTERN, FUEL_ONLY, GenConfig, gen_case, gen_program
from .minimize import NotFailing, minimize
from .mutants import MUTANTS, MUTANTS_BY_NAME, Mutant
from .props import Failure, PropertyReport, check_prop1, check_prop2, check_prop3_prop4
from .suite import PROPS, default_config, detect_mutant, run_case, run_suite

__all__ = [
    "COUNTER_PATTERN", "FUEL_ONLY", "GenConfig", "gen_case", "gen_program",
    "NotFailing", "minimize", "MUTANTS", "MUTANTS_BY_NAME", "Mutant",
    "Failure", "PropertyReport", "check_prop1", "check_prop2", "check_prop3_prop4",
    "PROPS", "default_config", "detect_mutant", "run_case", "run_suite",
]
