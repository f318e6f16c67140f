"""Command line: ``synthmt {check,booleanize,synth,simulate,oracle}``.

Exit codes: 0 realizable / success, 1 usage, IO or parse error,
2 unrealizable, 3 solver unknown, timeout or aborted abstraction.
"""
from __future__ import annotations

import argparse
import json
import sys

from .booleanizer import boolean_spec_to_json, booleanize
from .errors import (
    AbstractionAborted, AbstractionIncomplete, ContractViolation, NotRealizable, ParseError,
    SolverError, StateSpaceTooLarge, SynthError,
)
from .frontend import extract_literals, parse_spec
from .oracle import Window, oracle_reaction_map, oracle_realizability
from .runtime import RuntimeController, parse_policy, random_inputs, read_inputs
from .smt import DEFAULT_TIMEOUT_MS, SolverConfig, default_solver_command, start
from .synthesis import build_game, dump_artifact, environment_trap, load_artifact, solve_safety, synthesize
from .theory import Cube, value_to_json

EXIT_OK, EXIT_ERROR, EXIT_UNREALIZABLE, EXIT_UNKNOWN = 0, 1, 2, 3


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--solver", default=None, help="solver command line (default: $SYNTHMT_SOLVER or 'z3 -in')")
    common.add_argument("--timeout-ms", type=int, default=DEFAULT_TIMEOUT_MS, help="per-query solver timeout")
    common.add_argument("--seed", type=int, default=0, help="seed for --random inputs")
    common.add_argument("--window", type=int, default=None, help="value window (simulate --random: 100, oracle: 5)")
    common.add_argument("--policy", default=None, help="output selection, e.g. min:y,max:z,target:w=prev")
    common.add_argument("-o", "--output", default=None, help="write the result here instead of standard output")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="synthmt", description="Synthesize and run controllers for LTL safety specs over linear arithmetic.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("check", parents=[common], help="decide realizability")
    p.add_argument("spec")
    p = sub.add_parser("booleanize", parents=[common], help="emit the Boolean abstraction as JSON")
    p.add_argument("spec")
    p = sub.add_parser("synth", parents=[common], help="write a controller artifact")
    p.add_argument("spec")
    p = sub.add_parser("simulate", parents=[common], help="run a controller artifact, JSON lines on standard output")
    p.add_argument("artifact")
    source = p.add_mutually_exclusive_group()
    source.add_argument("--inputs", help="input script, one 'x=4' assignment line per step")
    source.add_argument("--random", type=int, metavar="N", help="N uniformly random inputs")
    p = sub.add_parser("oracle", parents=[common], help="brute-force verdict and regions on a bounded window")
    p.add_argument("spec")
    return parser


def _config(args, sort) -> SolverConfig:
    return SolverConfig(args.solver or default_solver_command(), args.timeout_ms, sort)


def _read_spec(path):
    with open(path) as fh:
        text = fh.read()
    return parse_spec(text, filename=path)


def _emit(args, text: str):
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _describe_trap(b, trap) -> str:
    steps = []
    for k in trap:
        witness = ", ".join(f"{n}={value_to_json(v)}" for n, v in b.partitions[k].witness.items())
        steps.append(f"e{k} ({witness})")
    return " then ".join(steps)


def cmd_check(args) -> int:
    ast = _read_spec(args.spec)
    with start(_config(args, ast.sort)) as session:
        b = booleanize(ast, session)
    g = build_game(b)
    W = solve_safety(g)
    if 0 in W:
        _emit(args, "REALIZABLE\n")
        return EXIT_OK
    _emit(args, "UNREALIZABLE\n")
    print(f"environment trap: {_describe_trap(b, environment_trap(g, W))}", file=sys.stderr)
    return EXIT_UNREALIZABLE


def cmd_booleanize(args) -> int:
    ast = _read_spec(args.spec)
    with start(_config(args, ast.sort)) as session:
        b = booleanize(ast, session)
    _emit(args, json.dumps(boolean_spec_to_json(b), indent=2) + "\n")
    return EXIT_OK


def cmd_synth(args) -> int:
    ast = _read_spec(args.spec)
    with start(_config(args, ast.sort)) as session:
        b = booleanize(ast, session)
    artifact = synthesize(b)
    _emit(args, dump_artifact(artifact))
    if not artifact.realizable:
        g = build_game(b)
        print(f"unrealizable; environment trap: {_describe_trap(b, environment_trap(g, solve_safety(g)))}", file=sys.stderr)
        return EXIT_UNREALIZABLE
    return EXIT_OK


def _interactive(lines):
    for line in lines:
        if line.strip() == "quit":
            return
        yield line


def cmd_simulate(args) -> int:
    artifact = load_artifact(args.artifact)
    b = artifact.spec
    if not artifact.realizable:
        print("artifact is unrealizable; nothing to simulate", file=sys.stderr)
        return EXIT_UNREALIZABLE
    policy = parse_policy(args.policy, b.sort)
    if args.random is not None:
        inputs = random_inputs(b.env_vars, b.sort, args.random, args.seed, args.window or 100)
    elif args.inputs:
        with open(args.inputs) as fh:
            inputs = list(read_inputs(fh, b.env_vars, b.sort))
    else:
        inputs = read_inputs(_interactive(sys.stdin), b.env_vars, b.sort)
    out = open(args.output, "w") if args.output else sys.stdout
    try:
        with start(_config(args, b.sort)) as session:
            engine = RuntimeController(artifact, session, policy)
            for step in engine.run(inputs):
                out.write(step.json_line() + "\n")
                out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_oracle(args) -> int:
    ast = _read_spec(args.spec)
    window = Window(args.window or 5)
    result = oracle_realizability(ast, window)
    lits = extract_literals(ast)
    rmap = oracle_reaction_map(lits, ast.env_vars, ast.sys_vars, ast.sort, window)
    regions = [
        {
            "reaction": mask,
            "cubes": [Cube(c, len(lits)).label() for c in range(1 << len(lits)) if mask >> c & 1],
            "points": [{n: value_to_json(v) for n, v in p.items()} for p in pts],
        }
        for mask, pts in sorted(rmap.groups().items())
    ]
    report = {
        "verdict": result.verdict,
        "window": window.bound,
        "literals": [lit.text() for lit in lits],
        "regions": regions,
    }
    _emit(args, json.dumps(report, indent=2) + "\n")
    return EXIT_OK if result.realizable else EXIT_UNREALIZABLE


COMMANDS = {
    "check": cmd_check,
    "booleanize": cmd_booleanize,
    "synth": cmd_synth,
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, which would read as "unrealizable"
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return COMMANDS[args.command](args)
    except ParseError as exc:
        print(exc.render(), file=sys.stderr)
        return EXIT_ERROR
    except NotRealizable as exc:
        print(exc, file=sys.stderr)
        return EXIT_UNREALIZABLE
    except (SolverError, AbstractionAborted, AbstractionIncomplete, StateSpaceTooLarge) as exc:
        print(f"synthmt: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except (OSError, ValueError, KeyError, ContractViolation, SynthError) as exc:
        print(f"synthmt: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
