"""Parse, ground, simulate and plan on RDDL models."""
from .env import Environment, StepOutcome, make_environment
from .errors import RDDLError
from .grounder import GroundedModel, ground, mangle
from .parser import parse, parse_expression, parse_file
from .scheduler import build_graph, topological_order
from .validation import validate

__version__ = "0.1.0"

__all__ = ["Environment", "StepOutcome", "make_environment", "RDDLError",
           "GroundedModel", "ground", "mangle", "parse", "parse_expression",
           "parse_file", "build_graph", "topological_order", "validate"]
