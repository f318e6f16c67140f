"""Run the realizable Int variant on a scripted input trace, picking the least output each step."""
import warnings
from fractions import Fraction

from synthmt import (
    OptimizationCapped, RuntimeController, SolverConfig, Sort, bundled_spec, booleanize, parse_policy,
    parse_spec, run_trace, start, synthesize,
)

warnings.simplefilter("ignore", OptimizationCapped)
ast = parse_spec(open(bundled_spec("running_mod_int.spec")).read())
with start(SolverConfig(sort=Sort.INT)) as session:
    artifact = synthesize(booleanize(ast, session))
    engine = RuntimeController(artifact, session, parse_policy("min:y"))
    trace = run_trace(engine, [{"x": Fraction(v)} for v in (4, 4, 1, 0, 2)])
    for t in trace:
        print(t.json_line())
