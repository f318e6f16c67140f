"""Cross-check the symbolic pipeline against brute-force enumeration on a bounded window."""
from synthmt import SolverConfig, Window, booleanize, bundled_spec, oracle_reaction_map, oracle_realizability
from synthmt import parse_spec, start, synthesize

window = Window(5)
for name in ["running_int.spec", "running_real.spec", "running_mod_int.spec", "band_int.spec"]:
    ast = parse_spec(open(bundled_spec(name)).read())
    with start(SolverConfig(sort=ast.sort)) as session:
        b = booleanize(ast, session)
    symbolic = synthesize(b).realizable
    brute = oracle_realizability(ast, window).realizable
    rmap = oracle_reaction_map(b.literals, ast.env_vars, ast.sys_vars, ast.sort, window)
    print(f"{name:22s} pipeline={symbolic!s:5s} oracle={brute!s:5s} partitions={b.K} window regions={len(rmap.groups())}")
