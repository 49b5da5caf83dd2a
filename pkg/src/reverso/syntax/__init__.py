"""Abstract syntax, parsing, printing and static checks."""

from .nodes import *  # noqa: F401,F403
from .nodes import Program, program
from .parser import Dialect, DialectError, ParseError, parse_expr, parse_program
from .render import render_expr, render_inline, render_program, render_stmt
from .validate import (
    ReservedName,
    ValidationError,
    Violation,
    require_valid,
    validate,
    variables_of,
)
