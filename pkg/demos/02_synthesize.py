"""Decide realizability for the three running variants and print the trap for the unrealizable one."""
from synthmt import (
    NotRealizable, SolverConfig, booleanize, build_game, bundled_spec, extract_controller, parse_spec, solve_safety,
    start, synthesize,
)

for name in ["running_int.spec", "running_real.spec", "running_mod_int.spec"]:
    ast = parse_spec(open(bundled_spec(name)).read())
    with start(SolverConfig(sort=ast.sort)) as session:
        artifact = synthesize(booleanize(ast, session))
    verdict = "REALIZABLE" if artifact.realizable else "UNREALIZABLE"
    print(f"{name:24s} {verdict}")
    if artifact.realizable:
        print(f"    controller: {len(artifact.controller.delta)} transitions")
    else:
        try:
            g = build_game(artifact.spec)
            extract_controller(g, solve_safety(g), artifact.spec.partitions)
        except NotRealizable as err:
            steps = ", ".join(f"e{k} (x={w['x']})" for k, w in zip(err.trap, err.witnesses))
            print(f"    environment wins with {steps}")
