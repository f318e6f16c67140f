"""Abstract the running example over Int and show each input region with its reaction set."""
from synthmt import SolverConfig, Sort, bundled_spec, booleanize, parse_spec, start

ast = parse_spec(open(bundled_spec("running_int.spec")).read())
with start(SolverConfig(sort=Sort.INT)) as session:
    b = booleanize(ast, session)

print("literals:")
for i, lit in enumerate(b.literals):
    print(f"  s{i}: {lit.text()}")
print(f"safety matrix: {b.matrix.text()}")
for p in b.partitions:
    print(f"e{p.id}  witness x={p.witness['x']}")
    for label in p.reaction.labels():
        print(f"    {label}")
