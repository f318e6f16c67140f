"""Brute-force reference on bounded grids, independent of the solver and the game code.

Everything here enumerates concrete values with numpy. It under-approximates
infinite domains: a cube counts as achievable only if some grid point of the
system variables realizes it, so windows must keep every region boundary
strictly inside (checked, see ``WindowTooSmall``).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ContractViolation, WindowTooSmall
from .frontend import Atom, Binary, BoolConst, SpecAst, Unary
from .theory import Literal, Sort

ENV_STEPS = {Sort.INT: 1, Sort.REAL: 2}  # grid points per unit
SYS_STEPS = {Sort.INT: 1, Sort.REAL: 8}
MAX_CELLS = 50_000_000


@dataclass(frozen=True)
class Window:
    bound: int

    def __post_init__(self):
        if self.bound < 1:
            raise ContractViolation("window bound must be at least 1")

    def points(self, sort: Sort) -> list[Fraction]:
        """Int: integers in [-B, B]; Real: halves k/2 with k in [-2B, 2B]."""
        d = ENV_STEPS[sort]
        return [Fraction(k, d) for k in range(-d * self.bound, d * self.bound + 1)]


def _sys_grid(lits, window: Window, sort: Sort) -> list[Fraction]:
    reach = 3 * window.bound + max((abs(lit.constant) for lit in lits), default=0) + 1
    d = SYS_STEPS[sort]
    return [Fraction(k, d) for k in range(-d * reach, d * reach + 1)]


def _truth(lit: Literal, columns: dict, scale: int) -> np.ndarray:
    """Vectorized literal value; ``columns`` hold values scaled by ``scale`` as int64."""
    lhs = sum(a * columns[name] for name, a in lit.coeffs)
    rhs = lit.constant * scale
    return {
        "<": lhs < rhs, "<=": lhs <= rhs, "=": lhs == rhs, "!=": lhs != rhs,
    }[lit.relop]


@dataclass(frozen=True)
class ReactionMap:
    """Reaction bitmask for every env grid point (in row-major product order)."""

    env_vars: tuple[str, ...]
    points: list[dict]
    masks: np.ndarray  # (n_points,) int64
    width: int

    def groups(self) -> dict[int, list[dict]]:
        out: dict[int, list[dict]] = {}
        for point, mask in zip(self.points, self.masks):
            out.setdefault(int(mask), []).append(point)
        return out

    def mask_at(self, point) -> int:
        return int(self.masks[self.points.index(dict(point))])


def oracle_reaction_map(lits, env_vars, sys_vars, sort: Sort, window: Window, check_edges: bool = True) -> ReactionMap:
    lits = list(lits)
    env_vars, sys_vars = tuple(env_vars), tuple(sys_vars)
    if len(lits) > 5:
        raise ContractViolation("the oracle packs reactions into 64 bits; at most 5 literals")
    env_axis = window.points(sort)
    sys_axis = _sys_grid(lits, window, sort)
    n_env = len(env_axis) ** len(env_vars)
    n_sys = len(sys_axis) ** len(sys_vars)
    if n_env * n_sys > MAX_CELLS:
        raise ContractViolation(f"oracle grid too large ({n_env} x {n_sys} points)")

    scale = SYS_STEPS[sort]
    env_pts = np.array(list(itertools.product(env_axis, repeat=len(env_vars))), dtype=object).reshape(n_env, len(env_vars))
    sys_pts = np.array(list(itertools.product(sys_axis, repeat=len(sys_vars))), dtype=object).reshape(n_sys, len(sys_vars))
    columns = {}
    for j, name in enumerate(env_vars):
        columns[name] = (env_pts[:, j] * scale).astype(np.int64)[:, None]
    for j, name in enumerate(sys_vars):
        columns[name] = (sys_pts[:, j] * scale).astype(np.int64)[None, :]

    cube = np.zeros((n_env, n_sys), dtype=np.int64)
    for i, lit in enumerate(lits):
        cube |= np.broadcast_to(_truth(lit, columns, scale), (n_env, n_sys)).astype(np.int64) << i
    masks = np.bitwise_or.reduce(np.left_shift(np.int64(1), cube), axis=1)

    points = [dict(zip(env_vars, row)) for row in env_pts.tolist()]
    rmap = ReactionMap(env_vars, points, masks, len(lits))
    if check_edges:
        _check_edges(rmap, len(env_axis))
    return rmap


def _check_edges(rmap: ReactionMap, side: int):
    """Reject windows whose outer ring carries information the interior lacks.

    With one env variable the reaction at each end must equal its inward
    neighbor's. With several, boundaries such as ``a = b`` meet the edge
    by nature, so the weaker test is that every reaction on the ring also
    occurs strictly inside.
    """
    grid = rmap.masks.reshape((side,) * len(rmap.env_vars))
    if len(rmap.env_vars) > 1:
        inner = grid[(slice(1, side - 1),) * grid.ndim]
        if not set(np.unique(grid)) <= set(np.unique(inner)):
            raise WindowTooSmall("a reaction occurs only on the window edge; enlarge the window")
        return
    for axis, name in enumerate(rmap.env_vars):
        lo = np.take(grid, [0, 1], axis=axis)
        hi = np.take(grid, [side - 1, side - 2], axis=axis)
        for edge in (lo, hi):
            first, second = np.take(edge, 0, axis=axis), np.take(edge, 1, axis=axis)
            if not np.array_equal(first, second):
                raise WindowTooSmall(f"reaction changes at the window edge along {name}; enlarge the window")


# -- bounded game -----------------------------------------------------------------

def _bodies(node) -> list:
    """Bodies of the top-level ``G`` blocks."""
    if isinstance(node, Binary) and node.op == "&":
        return _bodies(node.left) + _bodies(node.right)
    if isinstance(node, Unary) and node.op == "G":
        return [node.arg]
    raise ContractViolation("the oracle only handles conjunctions of G blocks")


def _atoms(node, out: list):
    if isinstance(node, Atom):
        if node.literal not in out:
            out.append(node.literal)
    elif isinstance(node, Unary):
        _atoms(node.arg, out)
    elif isinstance(node, Binary):
        _atoms(node.left, out)
        _atoms(node.right, out)
    return out


def _holds(node, index, cur: int, nxt: int) -> bool:
    if isinstance(node, Atom):
        return bool(cur >> index[node.literal] & 1)
    if isinstance(node, BoolConst):
        return node.value
    if isinstance(node, Unary):
        if node.op == "!":
            return not _holds(node.arg, index, cur, nxt)
        if node.op == "X" and isinstance(node.arg, Atom):
            return bool(nxt >> index[node.arg.literal] & 1)
        raise ContractViolation(f"oracle cannot evaluate {node.op} here")
    left = _holds(node.left, index, cur, nxt)
    right = _holds(node.right, index, cur, nxt)
    return {"&": left and right, "|": left or right, "->": (not left) or right, "<->": left == right}[node.op]


@dataclass(frozen=True)
class OracleVerdict:
    realizable: bool
    atoms: tuple[Literal, ...]
    moves: tuple[frozenset, ...]  # distinct env moves, each the set of reachable truth vectors
    winning: frozenset  # truth vectors (ints) from which the system survives

    @property
    def verdict(self) -> str:
        return "REALIZABLE" if self.realizable else "UNREALIZABLE"


def oracle_realizability(spec: SpecAst, window: Window) -> OracleVerdict:
    """Solve the bounded game directly on concrete values.

    The state is the truth vector of the spec's atoms at the previous step.
    From state ``p`` the environment picks a window value, the system a grid
    value; the move is allowed when every G body holds reading plain atoms
    from ``p`` and X-atoms from the new vector. The first step is free.
    """
    bodies = _bodies(spec.formula)
    atoms = []
    for body in bodies:
        _atoms(body, atoms)
    index = {lit: i for i, lit in enumerate(atoms)}
    rmap = oracle_reaction_map(atoms, spec.env_vars, spec.sys_vars, spec.sort, window)
    moves = tuple(sorted({frozenset(c for c in range(1 << len(atoms)) if m >> c & 1) for m in rmap.masks.tolist()}, key=sorted))

    vectors = range(1 << len(atoms))
    ok = {(p, c): all(_holds(b, index, p, c) for b in bodies) for p in vectors for c in vectors}
    alive = set(vectors)
    while True:
        keep = {p for p in alive if all(any(ok[p, c] and c in alive for c in move) for move in moves)}
        if keep == alive:
            break
        alive = keep
    start = all(any(c in alive for c in move) for move in moves)
    return OracleVerdict(start, tuple(atoms), moves, frozenset(alive))
