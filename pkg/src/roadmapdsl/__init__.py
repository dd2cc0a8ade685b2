"""Time-dependent technology roadmap models.

The package parses a hierarchical block model with embedded expressions,
lowers it into a flat constraint system, solves the system at any month by
fix-point interval narrowing, and analyzes availability over time.
"""

from .analysis import Sweep, classify, sweep
from .errors import (
    EvalTypeError,
    ExprSyntaxError,
    ModelSyntaxError,
    ResolveError,
    RoadmapError,
    TypeCheckError,
    ValidationError,
)
from .expr import extract_references, parse_expr, render
from .lowering import (
    Constraint,
    ConstraintSystem,
    Reference,
    expand_inheritance,
    generate_constraints,
    lower,
    render_constraints,
    resolve,
)
from .model import (
    Block,
    Model,
    allimpls,
    allprops,
    allreqs,
    impls,
    interfaces,
    parse_model,
)
from .solver import SolveResult, Solver, solve, trace
from .typecheck import ExprType, typecheck
from .values import (
    DateValue,
    DurationValue,
    NumInterval,
    Ternary,
    Value,
    display_value,
    render_value,
)

__version__ = "0.1.0"
