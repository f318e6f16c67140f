"""Synthesis and execution of controllers for LTL safety specs over linear arithmetic."""
from importlib import resources

from .booleanizer import BooleanSpec, Partition, ReactionSet, booleanize, compute_reaction, discover_partitions
from .errors import (
    AbstractionAborted, AbstractionIncomplete, ContractViolation, NotRealizable, OptimizationCapped,
    ParseError, SolverError, SolverTimeout, SynthError, UnsupportedFragment,
)
from .frontend import SafetyMatrix, SpecAst, extract_literals, normalize_safety, parse_spec
from .oracle import Window, oracle_reaction_map, oracle_realizability
from .runtime import RuntimeController, TraceStep, parse_policy, random_inputs, run_trace
from .smt import Session, SolverConfig, start
from .synthesis import Artifact, MealyController, build_game, extract_controller, solve_safety, synthesize
from .theory import Cube, Literal, Sort, cube_formula, eval_ground, ground, make_literal, negate_literal

__version__ = "0.1.0"


def bundled_spec(name: str) -> str:
    """Filesystem path of a spec shipped with the package, e.g. ``"running_int.spec"``."""
    return str(resources.files(__name__).joinpath("specs", name))
