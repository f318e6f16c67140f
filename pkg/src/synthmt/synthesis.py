"""Explicit safety game over the Boolean abstraction and Mealy controller extraction.

States are ``init`` (id 0) and pairs ``(k, c)`` (id ``1 + k * 2**L + c``)
recording the previous step's partition and cube. A move from a state to
``(k', c')`` is edge-safe when the matrix holds with current atoms read from
the state's cube and next-step atoms from ``c'``; ``init`` has no edge
constraint.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .booleanizer import BooleanSpec, Partition, ReactionSet
from .errors import ContractViolation, NotRealizable, StateSpaceTooLarge
from .frontend import SafetyMatrix, matrix_from_text, parse_literal
from .theory import Cube, Sort, parse_value, value_to_json

DEFAULT_STATE_CAP = 2 ** 20
ARTIFACT_VERSION = 1
INIT = 0


@dataclass(frozen=True, eq=False)
class SafetyGame:
    K: int
    L: int
    extra: np.ndarray  # (K, 2**L) bool: cube allowed under partition
    safe: np.ndarray  # (2**L, 2**L) bool: matrix holds from cube p to cube c

    @property
    def C(self) -> int:
        return 1 << self.L

    @property
    def n_states(self) -> int:
        return self.K * self.C + 1

    def state(self, k: int, c: int) -> int:
        return 1 + k * self.C + c

    def decode(self, state: int):
        """``None`` for init, else ``(k, c)``."""
        if state == INIT:
            return None
        return divmod(state - 1, self.C)

    def cube_of(self, state: int):
        pair = self.decode(state)
        return None if pair is None else pair[1]

    def menu(self, state: int, k: int) -> list[int]:
        """System moves allowed at ``state`` for env move ``k``."""
        allowed = self.extra[k].copy()
        c = self.cube_of(state)
        if c is not None:
            allowed &= self.safe[c]
        return [int(i) for i in np.flatnonzero(allowed)]


def build_game(b: BooleanSpec, state_cap: int = DEFAULT_STATE_CAP) -> SafetyGame:
    if b.K * (1 << b.L) > state_cap:
        raise StateSpaceTooLarge(f"K*2^L = {b.K * (1 << b.L)} exceeds the cap {state_cap}")
    return game_from_parts(b.matrix, [p.reaction for p in b.partitions], b.L)


def game_from_parts(matrix: SafetyMatrix, reactions, width: int) -> SafetyGame:
    C = 1 << width
    extra = np.zeros((len(reactions), C), dtype=bool)
    for k, r in enumerate(reactions):
        extra[k, list(r.cubes)] = True
    bits = [Cube(c, width).bits for c in range(C)]
    safe = np.array([[matrix.holds(bits[p], bits[c]) for c in range(C)] for p in range(C)], dtype=bool)
    return SafetyGame(len(reactions), width, extra, safe)


def cpre(g: SafetyGame, Z: np.ndarray) -> np.ndarray:
    """States from which every env move has a safe system move into ``Z``."""
    target = g.extra & Z[1:].reshape(g.K, g.C)  # (K, C): good successor (k, c)
    # ok[p, k]: from cube p, some c with safe[p, c] and target[k, c]
    ok = (g.safe.astype(np.int32) @ target.T.astype(np.int32)) > 0
    per_cube = ok.all(axis=1)  # (C,)
    result = np.empty_like(Z)
    result[INIT] = target.any(axis=1).all()
    result[1:] = np.tile(per_cube, g.K)
    return result


@dataclass(frozen=True, eq=False)
class WinningRegion:
    mask: np.ndarray
    removed_at: np.ndarray  # fixpoint round that removed the state, -1 if winning

    def __contains__(self, state) -> bool:
        return bool(self.mask[state])

    @property
    def states(self) -> frozenset[int]:
        return frozenset(int(s) for s in np.flatnonzero(self.mask))


def solve_safety(g: SafetyGame) -> WinningRegion:
    """Greatest fixpoint ``W = nu Z. cpre(Z)``."""
    Z = np.ones(g.n_states, dtype=bool)
    removed_at = np.full(g.n_states, -1, dtype=np.int64)
    rnd = 0
    while True:
        nxt = Z & cpre(g, Z)
        removed_at[Z & ~nxt] = rnd
        if np.array_equal(nxt, Z):
            return WinningRegion(Z, removed_at)
        Z = nxt
        rnd += 1


def environment_trap(g: SafetyGame, W: WinningRegion) -> list[int]:
    """Partition sequence the environment plays from init to force a dead end.

    The system is assumed to answer with the move that survives longest.
    """
    if INIT in W:
        return []
    trap = []
    state = INIT
    while True:
        rank = W.removed_at[state]
        for k in range(g.K):
            moves = g.menu(state, k)
            if all(W.removed_at[g.state(k, c)] < rank and not W.mask[g.state(k, c)] for c in moves):
                break
        else:  # pragma: no cover - removed_at guarantees a forcing move
            raise AssertionError("no forcing environment move")
        trap.append(k)
        if all(_stuck(g, g.state(k, c)) for c in moves):
            return trap
        state = max((g.state(k, c) for c in moves), key=lambda s: (W.removed_at[s], -s))


def _stuck(g: SafetyGame, state: int) -> bool:
    """No safe move at all: the state's own cube already breaks the matrix."""
    return not any(g.menu(state, k) for k in range(g.K))


@dataclass
class MealyController:
    K: int
    L: int
    winning: frozenset
    delta: dict = field(default_factory=dict)  # (state, k) -> (cube, next state)
    initial: int = INIT
    realizable: bool = True

    def step(self, state: int, k: int) -> tuple[int, int]:
        try:
            return self.delta[state, k]
        except KeyError:
            raise ContractViolation(f"no transition from state {state} on partition {k}") from None


def extract_controller(g: SafetyGame, W: WinningRegion, partitions=None) -> MealyController:
    """Smallest-index safe cube whose successor stays in ``W``."""
    if INIT not in W:
        trap = environment_trap(g, W)
        witnesses = [partitions[k].witness for k in trap] if partitions else []
        raise NotRealizable(trap, witnesses)
    delta = {}
    for state in sorted(W.states):
        for k in range(g.K):
            choice = next((c for c in g.menu(state, k) if W.mask[g.state(k, c)]), None)
            if choice is None:  # pragma: no cover - W is a fixpoint
                raise AssertionError(f"winning state {state} has no move on {k}")
            delta[state, k] = (choice, g.state(k, choice))
    return MealyController(g.K, g.L, W.states, delta)


# -- artifacts --------------------------------------------------------------------

@dataclass
class Artifact:
    """Everything the runtime needs: abstraction plus controller."""

    spec: BooleanSpec
    controller: MealyController

    @property
    def realizable(self) -> bool:
        return self.controller.realizable


def synthesize(b: BooleanSpec, state_cap: int = DEFAULT_STATE_CAP) -> Artifact:
    """Build, solve and extract; unrealizable specs yield an artifact with no transitions."""
    g = build_game(b, state_cap)
    W = solve_safety(g)
    try:
        ctrl = extract_controller(g, W, b.partitions)
    except NotRealizable:
        ctrl = MealyController(g.K, g.L, W.states, {}, INIT, realizable=False)
    return Artifact(b, ctrl)


def artifact_to_json(a: Artifact) -> dict:
    b, ctrl = a.spec, a.controller
    return {
        "version": ARTIFACT_VERSION,
        "sort": b.sort.value,
        "env": list(b.env_vars),
        "sys": list(b.sys_vars),
        "literals": [lit.text() for lit in b.literals],
        "matrix": b.matrix.text(),
        "partitions": [
            {"id": p.id, "reaction": p.reaction.mask, "witness": {k: value_to_json(v) for k, v in p.witness.items()}}
            for p in b.partitions
        ],
        "initial": ctrl.initial,
        "realizable": ctrl.realizable,
        "transitions": [
            {"state": s, "input-partition": k, "cube": c, "next-state": n}
            for (s, k), (c, n) in sorted(ctrl.delta.items())
        ],
    }


def dump_artifact(a: Artifact) -> str:
    return json.dumps(artifact_to_json(a), indent=2) + "\n"


def artifact_from_json(data: dict) -> Artifact:
    if data.get("version") != ARTIFACT_VERSION:
        raise ContractViolation(f"unsupported artifact version {data.get('version')!r}")
    sort = Sort.parse(data["sort"])
    env, sys_ = tuple(data["env"]), tuple(data["sys"])
    lits = tuple(parse_literal(text, env + sys_, sort) for text in data["literals"])
    L = len(lits)
    matrix = matrix_from_text(data["matrix"], L)
    partitions = tuple(
        Partition(
            p["id"],
            ReactionSet(p["reaction"], L),
            {k: parse_value(str(v), sort) for k, v in p["witness"].items()},
        )
        for p in data["partitions"]
    )
    if [p.id for p in partitions] != list(range(len(partitions))):
        raise ContractViolation("partition ids must be 0..K-1 in order")
    b = BooleanSpec(sort, env, sys_, lits, matrix, partitions)
    delta = {
        (t["state"], t["input-partition"]): (t["cube"], t["next-state"]) for t in data["transitions"]
    }
    winning = frozenset(s for s, _ in delta)
    ctrl = MealyController(len(partitions), L, winning, delta, data["initial"], data["realizable"])
    return Artifact(b, ctrl)


def load_artifact(path) -> Artifact:
    with open(path) as fh:
        return artifact_from_json(json.load(fh))
