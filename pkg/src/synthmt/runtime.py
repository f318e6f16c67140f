"""Runtime controller: partitioner, Mealy lookup, model provider and monitor."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from .booleanizer import compute_reaction
from .errors import (
    AbstractionIncomplete, ContractViolation, NotRealizable, OptimizationCapped, PolicyError,
    ProviderUnsat, SolverError,
)
from .frontend import SafetyMatrix
from .smt import Session, Status
from .synthesis import Artifact
from .theory import (
    And, Cube, Sort, check_value, cube_of, ground, make_literal, negate_literal, parse_value,
    value_to_json,
)


OPTIMIZATION_CAP = 2 ** 20


# -- policies ---------------------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    kind: str  # any | min | max | target
    target: object = None  # Fraction, or "prev"


@dataclass(frozen=True)
class Policy:
    rules: dict = field(default_factory=dict)  # sys var -> Rule

    def rule(self, var) -> Rule:
        return self.rules.get(var, Rule("any"))

    @property
    def uses_prev(self) -> bool:
        return any(r.kind == "target" and r.target == "prev" for r in self.rules.values())

    def validate(self, sys_vars, sort: Sort) -> "Policy":
        for var, rule in self.rules.items():
            if var not in sys_vars:
                raise PolicyError(f"policy names {var!r}, which is not a sys variable")
            if rule.kind in ("min", "max") and sort is not Sort.INT:
                raise PolicyError(f"{rule.kind} is only available under Int (infima over Real may be unattained)")
            if rule.kind == "target" and rule.target != "prev":
                check_value(rule.target, sort)
        return self


def parse_policy(text: str | None, sort: Sort = Sort.INT) -> Policy:
    """Parse ``"min:y,max:z,target:w=prev"`` (also ``target:w=3``, ``any:v``)."""
    if not text:
        return Policy()
    rules = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        kind, _, rest = item.partition(":")
        if kind not in ("any", "min", "max", "target") or not rest:
            raise PolicyError(f"bad policy item {item!r}")
        if kind == "target":
            var, eq, value = rest.partition("=")
            if not eq:
                raise PolicyError(f"target needs a value: {item!r}")
            target = "prev" if value == "prev" else parse_value(value, sort)
            rules[var] = Rule("target", target)
        else:
            rules[rest] = Rule(kind)
    return Policy(rules)


# -- trace records ---------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    ok: bool
    conjunct: str | None = None

    def __str__(self):
        return "ok" if self.ok else f"violation({self.conjunct})"


OK = Verdict(True)


@dataclass(frozen=True)
class TraceStep:
    step: int
    input: dict
    partition: int
    cube: int
    output: dict
    verdict: Verdict
    capped: tuple = ()

    def to_json(self) -> dict:
        data = {
            "step": self.step,
            "in": {k: value_to_json(v) for k, v in self.input.items()},
            "partition": self.partition,
            "cube": self.cube,
            "out": {k: value_to_json(v) for k, v in self.output.items()},
            "verdict": str(self.verdict),
        }
        if self.capped:
            data["capped"] = list(self.capped)
        return data

    def json_line(self) -> str:
        return json.dumps(self.to_json())


@dataclass
class RuntimeState:
    mealy_state: int
    prev_output: dict | None = None
    prev_assignment: tuple | None = None
    step: int = 0


@dataclass(frozen=True)
class Provision:
    values: dict
    capped: tuple = ()


def monitor_step(prev_assignment, cur_assignment, matrix: SafetyMatrix) -> Verdict:
    """Check the matrix on one consecutive pair of literal truth vectors.

    With no previous assignment (first step) nothing is checked yet; the
    first step's obligations are judged when the second step arrives.
    """
    if prev_assignment is None:
        return OK
    failed = matrix.first_violation(prev_assignment, cur_assignment)
    return OK if failed is None else Verdict(False, SafetyMatrix.render(failed))


# -- engine ------------------------------------------------------------------------

class RuntimeController:
    """Runs a synthesized artifact step by step against concrete inputs."""

    def __init__(self, artifact: Artifact, session: Session, policy: Policy | None = None):
        if not artifact.realizable:
            raise NotRealizable([])
        b = artifact.spec
        if session.config.sort is not b.sort:
            raise ContractViolation("session sort does not match the artifact")
        self.artifact = artifact
        self.spec = b
        self.session = session
        self.policy = (policy or Policy()).validate(b.sys_vars, b.sort)
        self.lits = list(b.literals)
        self.state = RuntimeState(artifact.controller.initial)
        self._reactions = {p.reaction: p.id for p in b.partitions}
        self._classify_cache: dict = {}
        self._provide_cache: dict = {}

    # helpers
    def _key(self, valuation) -> tuple:
        return tuple(valuation[name] for name in self.spec.env_vars)

    def check_input(self, valuation) -> dict:
        env = self.spec.env_vars
        if set(valuation) != set(env):
            raise ContractViolation(f"input must assign exactly {list(env)}; got {sorted(valuation)}")
        return {name: check_value(valuation[name], self.spec.sort) for name in env}

    def _solve(self, formula):
        result = self.session.solve_exists(self.spec.sys_vars, formula)
        if result.status is Status.UNKNOWN:
            raise SolverError("solver returned unknown while providing an output")
        return result

    # stages
    def classify_input(self, valuation) -> int:
        valuation = self.check_input(valuation)
        key = self._key(valuation)
        if key not in self._classify_cache:
            reaction = compute_reaction(valuation, self.lits, self.spec.env_vars, self.spec.sys_vars, self.session)
            if reaction not in self._reactions:
                raise AbstractionIncomplete(f"no partition has reaction {reaction.labels()} (input {valuation})")
            self._classify_cache[key] = self._reactions[reaction]
        return self._classify_cache[key]

    def grounded_cube(self, cube: int, valuation) -> And:
        residual = []
        for i, lit in enumerate(self.lits):
            polar = lit if cube >> i & 1 else negate_literal(lit)
            g = ground(polar, valuation, self.spec.env_vars)
            if g is False:
                raise ProviderUnsat(f"cube {Cube(cube, len(self.lits))} is ground-false at {valuation}")
            if g is not True:
                residual.append(g)
        return And(tuple(residual))

    def provide_output(self, cube: int, valuation, prev=None) -> Provision:
        valuation = self.check_input(valuation)
        key = (cube, self._key(valuation), tuple(sorted(prev.items())) if prev and self.policy.uses_prev else None)
        if key not in self._provide_cache:
            self._provide_cache[key] = self._provide(cube, valuation, prev)
        return self._provide_cache[key]

    def _provide(self, cube, valuation, prev) -> Provision:
        base = self.grounded_cube(cube, valuation)
        fixed = []
        capped = []

        def current():
            return And(base.args + tuple(fixed))

        if not self._solve(current()).sat:
            raise ProviderUnsat(f"cube {Cube(cube, len(self.lits))} has no model at {valuation}")
        for var in self.spec.sys_vars:
            rule = self.policy.rule(var)
            if rule.kind in ("min", "max"):
                value, was_capped = self._optimize(current(), var, 1 if rule.kind == "min" else -1)
                fixed.append(make_literal({var: 1}, "=", value))
                if was_capped:
                    capped.append(var)
            elif rule.kind == "target":
                target = prev.get(var) if rule.target == "prev" and prev else rule.target
                if target is None or target == "prev":
                    continue
                pinned = make_literal({var: 1}, "=", target)
                if self._solve(And(current().args + (pinned,))).sat:
                    fixed.append(pinned)
        result = self._solve(current())
        if not result.sat:  # pragma: no cover - every fix was checked satisfiable
            raise ProviderUnsat("provider lost satisfiability while fixing outputs")
        if capped:
            warnings.warn(f"optimization capped at +-{OPTIMIZATION_CAP} for {capped}", OptimizationCapped, stacklevel=3)
        return Provision(dict(result.model), tuple(capped))

    def _optimize(self, formula: And, var: str, sign: int) -> tuple[Fraction, bool]:
        """Least value of ``sign * var`` (so ``sign=-1`` maximizes), within the cap.

        Exponential probing below the first model, then binary search; every
        step is a plain satisfiability check.
        """
        def value(model):
            return sign * model[var]

        def at_most(bound):  # sign*var <= bound
            return make_literal({var: sign}, "<=", bound)

        first = value(self._solve(formula).model)
        floor = first - OPTIMIZATION_CAP
        bounded = And(formula.args + (make_literal({var: sign}, ">=", floor),))
        hi = first  # sign*var = hi is attainable
        step = 1
        reached_floor = False
        while True:
            probe = hi - step
            if probe < floor:
                lo = floor - 1  # nothing below floor in the bounded region
                reached_floor = True
                break
            r = self._solve(And(bounded.args + (at_most(probe),)))
            if not r.sat:
                lo = probe
                break
            hi = value(r.model)
            step *= 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            r = self._solve(And(bounded.args + (at_most(mid),)))
            if r.sat:
                hi = value(r.model)
            else:
                lo = mid
        capped = reached_floor and self._solve(And(formula.args + (make_literal({var: sign}, "<", floor),))).sat
        return Fraction(sign * hi), capped

    def monitor(self, prev_assignment, cur_assignment) -> Verdict:
        return monitor_step(prev_assignment, cur_assignment, self.spec.matrix)

    def step(self, valuation) -> TraceStep:
        valuation = self.check_input(valuation)
        state = self.state
        k = self.classify_input(valuation)
        cube, nxt = self.artifact.controller.step(state.mealy_state, k)
        provision = self.provide_output(cube, valuation, state.prev_output)
        full = {**valuation, **provision.values}
        assignment = cube_of(self.lits, full)
        if assignment.index != cube:
            raise ProviderUnsat(f"output {provision.values} realizes cube {assignment.index}, not {cube}")
        verdict = self.monitor(state.prev_assignment, assignment.bits)
        self.state = RuntimeState(nxt, provision.values, assignment.bits, state.step + 1)
        return TraceStep(state.step + 1, valuation, k, cube, provision.values, verdict, provision.capped)

    def run(self, inputs: Iterable) -> Iterator[TraceStep]:
        for valuation in inputs:
            yield self.step(valuation)


def run_trace(engine: RuntimeController, inputs: Iterable) -> list[TraceStep]:
    return list(engine.run(inputs))


def random_inputs(env_vars, sort: Sort, n: int, seed: int, window: int) -> list[dict]:
    """``n`` uniform inputs: integers in [-window, window], or halves under Real."""
    rng = np.random.default_rng(seed)
    if sort is Sort.INT:
        draws = rng.integers(-window, window, size=(n, len(env_vars)), endpoint=True)
        return [{v: Fraction(int(x)) for v, x in zip(env_vars, row)} for row in draws]
    draws = rng.integers(-2 * window, 2 * window, size=(n, len(env_vars)), endpoint=True)
    return [{v: Fraction(int(x), 2) for v, x in zip(env_vars, row)} for row in draws]


def parse_input_line(line: str, env_vars, sort: Sort) -> dict | None:
    """``"x=4 z=3/2"`` -> valuation; ``None`` for blank and comment lines."""
    line = line.split("#", 1)[0].strip()
    if not line:
        return None
    valuation = {}
    for item in line.split():
        name, eq, text = item.partition("=")
        if not eq:
            raise ContractViolation(f"expected name=value, got {item!r}")
        if name not in env_vars:
            raise ContractViolation(f"{name!r} is not an env variable")
        valuation[name] = parse_value(text, sort)
    missing = [v for v in env_vars if v not in valuation]
    if missing:
        raise ContractViolation(f"input line misses {missing}")
    return valuation


def read_inputs(lines: Iterable[str], env_vars, sort: Sort) -> Iterator[dict]:
    for line in lines:
        valuation = parse_input_line(line, env_vars, sort)
        if valuation is not None:
            yield valuation
