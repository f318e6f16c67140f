"""Boolean abstraction: environment partitions, reaction sets, the Boolean spec."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

from .errors import AbstractionAborted, ContractViolation
from .frontend import SafetyMatrix, SpecAst, extract_literals, normalize_safety
from .smt import Session, Status
from .theory import (
    TRUE, And, Cube, Exists, Forall, Literal, Not, Or, Sort, all_cubes, check_value,
    cube_formula, ground, make_literal, negate_literal, value_to_json,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class ReactionSet:
    """Cube indices the system can realize for one environment input."""

    mask: int
    width: int

    @classmethod
    def of(cls, cubes, width):
        return cls(sum(1 << c for c in set(cubes)), width)

    @property
    def cubes(self) -> tuple[int, ...]:
        return tuple(c for c in range(1 << self.width) if self.mask >> c & 1)

    def __contains__(self, cube):
        index = cube.index if isinstance(cube, Cube) else cube
        return bool(self.mask >> index & 1)

    def __len__(self):
        return bin(self.mask).count("1")

    def __iter__(self):
        return iter(self.cubes)

    def labels(self) -> list[str]:
        return [Cube(c, self.width).label() for c in self.cubes]


def characteristic_formula(reaction: ReactionSet, lits, sys_vars) -> And:
    """psi_k over env variables: exactly the cubes in ``reaction`` are achievable."""
    sys_vars = tuple(sys_vars)
    parts = []
    for cube in all_cubes(len(lits)):
        body = cube_formula(cube, lits)
        if cube.index in reaction:
            parts.append(Exists(sys_vars, body))
        else:
            parts.append(Forall(sys_vars, Not(body)))
    return And(tuple(parts))


@dataclass(frozen=True)
class Partition:
    id: int
    reaction: ReactionSet
    witness: dict = field(compare=False, hash=False)

    def formula(self, lits, sys_vars):
        return characteristic_formula(self.reaction, lits, sys_vars)


def _ground_cube(cube: Cube, lits, valuation, env_vars):
    """Residual sys-only conjuncts of a cube at an env valuation, or None if ground-false."""
    residual = []
    for i, lit in enumerate(lits):
        g = ground(lit if cube.polarity(i) else negate_literal(lit), valuation, env_vars)
        if g is False:
            return None
        if g is not True:
            residual.append(g)
    return And(tuple(residual))


def _check_env_valuation(valuation, env_vars, sort):
    missing = [v for v in env_vars if v not in valuation]
    extra = [v for v in valuation if v not in env_vars]
    if missing or extra:
        raise ContractViolation(f"env valuation must cover exactly {list(env_vars)}; got {sorted(valuation)}")
    return {name: check_value(valuation[name], sort) for name in env_vars}


def compute_reaction(valuation, lits, env_vars, sys_vars, session: Session) -> ReactionSet:
    """Cubes with a sys witness at ``valuation``: one existential query per live cube."""
    valuation = _check_env_valuation(valuation, env_vars, session.config.sort)
    achievable = []
    for cube in all_cubes(len(lits)):
        query = _ground_cube(cube, lits, valuation, env_vars)
        if query is None:
            continue
        result = session.solve_exists(sys_vars, query)
        if result.status is Status.UNKNOWN:
            raise AbstractionAborted(f"solver returned unknown on cube {cube} at {valuation}")
        if result.sat:
            achievable.append(cube.index)
    return ReactionSet.of(achievable, len(lits))


def discover_partitions(lits, env_vars, sys_vars, session: Session, verify: bool = True) -> list[Partition]:
    """Find every distinct reaction set by model-guided search.

    Each round asks for an input outside all regions found so far; an unsat
    answer proves the regions cover the env domain.
    """
    env_vars, sys_vars = tuple(env_vars), tuple(sys_vars)
    found: list[tuple[ReactionSet, dict]] = []
    bound = 2 ** (2 ** len(lits))
    for _ in range(bound + 1):
        outside = And(tuple(Not(characteristic_formula(r, lits, sys_vars)) for r, _ in found)) if found else TRUE
        result = session.check_quantified(env_vars, outside)
        if result.status is Status.UNKNOWN:
            raise AbstractionAborted("solver returned unknown during partition discovery")
        if result.unsat:
            break
        witness = result.model
        reaction = compute_reaction(witness, lits, env_vars, sys_vars, session)
        if not len(reaction):
            raise AbstractionAborted(f"empty reaction at {witness}")
        if any(reaction == r for r, _ in found):
            raise AbstractionAborted(f"witness {witness} falls inside an existing partition")
        log.debug("partition %s at %s", reaction.labels(), witness)
        found.append((reaction, witness))
    else:
        raise AbstractionAborted("partition discovery did not terminate")
    found.sort(key=lambda item: item[0].cubes)
    partitions = [Partition(k, r, w) for k, (r, w) in enumerate(found)]
    if verify:
        verify_partitions(partitions, lits, env_vars, sys_vars, session)
    return partitions


def verify_partitions(partitions, lits, env_vars, sys_vars, session: Session):
    """Assert that regions are pairwise disjoint and jointly cover the env domain."""
    formulas = [p.formula(lits, sys_vars) for p in partitions]
    cover = session.check_quantified(env_vars, And(tuple(Not(f) for f in formulas)))
    if not cover.unsat:
        raise AbstractionAborted(f"partitions do not cover the input domain ({cover.status.value})")
    for (i, fi), (j, fj) in itertools.combinations(enumerate(formulas), 2):
        overlap = session.check_quantified(env_vars, And((fi, fj)))
        if not overlap.unsat:
            raise AbstractionAborted(f"partitions {i} and {j} overlap ({overlap.status.value})")


def sample_region(partition: Partition, lits, env_vars, sys_vars, session: Session, n: int = 100) -> list[dict]:
    """Up to ``n`` distinct inputs of one region, drawn from solver models."""
    psi = partition.formula(lits, sys_vars)
    points = []
    blocked = []
    for _ in range(n):
        f = And((psi, *blocked))
        result = session.check_quantified(env_vars, f)
        if not result.sat:
            break
        points.append(result.model)
        blocked.append(_different_from(result.model))
    return points


def _different_from(point) -> Or:
    return Or(tuple(make_literal({name: 1}, "!=", value) for name, value in point.items()))


@dataclass(frozen=True)
class BooleanSpec:
    sort: Sort
    env_vars: tuple[str, ...]
    sys_vars: tuple[str, ...]
    literals: tuple[Literal, ...]
    matrix: SafetyMatrix
    partitions: tuple[Partition, ...]

    @property
    def K(self) -> int:
        return len(self.partitions)

    @property
    def L(self) -> int:
        return len(self.literals)

    @property
    def extra(self) -> dict[int, ReactionSet]:
        return {p.id: p.reaction for p in self.partitions}


def emit_boolean_spec(ast: SpecAst, matrix: SafetyMatrix, lits, partitions) -> BooleanSpec:
    if not partitions:
        raise ContractViolation("a Boolean spec needs at least one partition")
    return BooleanSpec(ast.sort, ast.env_vars, ast.sys_vars, tuple(lits), matrix, tuple(partitions))


def booleanize(ast: SpecAst, session: Session) -> BooleanSpec:
    """Literal extraction, safety normalization and partition discovery in one go."""
    if session.config.sort is not ast.sort:
        raise ContractViolation(f"session sort {session.config.sort.value} does not match spec sort {ast.sort.value}")
    lits = extract_literals(ast)
    matrix = normalize_safety(ast, lits)
    partitions = discover_partitions(lits, ast.env_vars, ast.sys_vars, session)
    return emit_boolean_spec(ast, matrix, lits, partitions)


def _legal_text(k: int) -> str:
    names = [f"e{i}" for i in range(k)]
    if k == 1:
        return names[0]
    parts = [f"({' | '.join(names)})"]
    parts += [f"!({a} & {b})" for a, b in itertools.combinations(names, 2)]
    return " & ".join(parts)


def export_ltl_text(b: BooleanSpec) -> str:
    """``G(psi) & G(legal -> extra)`` over atoms ``e0..`` and ``s0..``."""
    extra = []
    for p in b.partitions:
        cubes = " | ".join(f"({Cube(c, b.L).label()})" for c in p.reaction.cubes)
        extra.append(f"(e{p.id} -> ({cubes}))")
    return f"G({b.matrix.text()}) & G(({_legal_text(b.K)}) -> ({' & '.join(extra)}))"


def boolean_spec_to_json(b: BooleanSpec) -> dict:
    return {
        "sort": b.sort.value,
        "env": list(b.env_vars),
        "sys": list(b.sys_vars),
        "literals": [lit.text() for lit in b.literals],
        "matrix": b.matrix.text(),
        "partitions": [
            {
                "id": p.id,
                "reaction": p.reaction.mask,
                "cubes": list(p.reaction.cubes),
                "witness": {k: value_to_json(v) for k, v in p.witness.items()},
            }
            for p in b.partitions
        ],
        "ltl": export_ltl_text(b),
    }
