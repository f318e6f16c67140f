"""Linear-arithmetic literals, cubes and valuations.

Everything here is exact: values are :class:`fractions.Fraction` and a
literal ``sum(a_i * v_i) <op> b`` keeps integer coefficients and an integer
right-hand side after canonicalization.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import ContractViolation

RELOPS = ("<", "<=", "=", "!=", ">=", ">")

_FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "=", "!=": "!="}
_COMPLEMENT = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "=": "!=", "!=": "="}


class Sort(enum.Enum):
    INT = "Int"
    REAL = "Real"

    @property
    def logic(self):
        return "LIA" if self is Sort.INT else "LRA"

    @classmethod
    def parse(cls, name):
        for sort in cls:
            if sort.value == name:
                return sort
        raise ContractViolation(f"unknown sort {name!r}")


Value = Fraction
Valuation = Mapping[str, Fraction]


def parse_value(text, sort: Sort) -> Fraction:
    """Parse ``"4"``, ``"-3"``, ``"3/2"`` or ``"1.5"`` into an exact value."""
    if isinstance(text, bool):
        raise ContractViolation(f"not a value: {text!r}")
    if isinstance(text, float):
        raise ContractViolation("floating-point values are not accepted; use a string or Fraction")
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ContractViolation(f"not a value: {text!r}") from exc
    check_value(value, sort)
    return value


def check_value(value, sort: Sort) -> Fraction:
    if isinstance(value, (bool, float)) or not isinstance(value, (int, Fraction)):
        raise ContractViolation(f"value {value!r} must be an int or Fraction")
    value = Fraction(value)
    if sort is Sort.INT and value.denominator != 1:
        raise ContractViolation(f"value {value} is not an integer")
    return value


def format_value(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def value_to_json(value: Fraction):
    value = Fraction(value)
    return value.numerator if value.denominator == 1 else format_value(value)


def _compare(lhs: Fraction, relop: str, rhs: Fraction) -> bool:
    if relop == "<":
        return lhs < rhs
    if relop == "<=":
        return lhs <= rhs
    if relop == "=":
        return lhs == rhs
    if relop == "!=":
        return lhs != rhs
    if relop == ">=":
        return lhs >= rhs
    return lhs > rhs


@dataclass(frozen=True, order=True)
class Literal:
    """Canonical atom ``sum(coeff * var) relop constant``.

    Build instances with :func:`make_literal`; the constructor does not
    normalize.
    """

    coeffs: tuple[tuple[str, int], ...]
    relop: str
    constant: int

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(name for name, _ in self.coeffs)

    def text(self) -> str:
        lhs = " + ".join(f"{a}*{name}" for name, a in self.coeffs)
        return f"{lhs} {self.relop} {self.constant}"

    def __str__(self):
        return self.text()

    def __repr__(self):
        return f"Literal({self.text()!r})"


def make_literal(coeffs: Mapping[str, Union[int, Fraction]], relop: str, constant=0) -> Literal:
    """Canonicalize ``sum(coeffs) relop constant``.

    Raises :class:`ContractViolation` if every coefficient is zero; callers that
    may produce variable-free atoms should use :func:`ground` instead.
    """
    if relop not in RELOPS:
        raise ContractViolation(f"unknown relational operator {relop!r}")
    terms = {name: Fraction(a) for name, a in coeffs.items() if a != 0}
    if not terms:
        raise ContractViolation("literal has no variable with a nonzero coefficient")
    constant = Fraction(constant)
    scale = math.lcm(constant.denominator, *(a.denominator for a in terms.values()))
    ints = {name: int(a * scale) for name, a in terms.items()}
    rhs = int(constant * scale)
    if relop in (">", ">="):
        ints = {name: -a for name, a in ints.items()}
        rhs = -rhs
        relop = _FLIP[relop]
    g = math.gcd(rhs, *ints.values())
    ints = {name: a // g for name, a in ints.items()}
    rhs //= g
    ordered = tuple(sorted(ints.items()))
    if relop in ("=", "!=") and ordered[0][1] < 0:
        ordered = tuple((name, -a) for name, a in ordered)
        rhs = -rhs
    return Literal(ordered, relop, rhs)


def negate_literal(lit: Literal) -> Literal:
    return make_literal(dict(lit.coeffs), _COMPLEMENT[lit.relop], lit.constant)


GroundedLiteral = Union[Literal, bool]


def ground(lit: Literal, valuation: Valuation, env_vars: Iterable[str] | None = None) -> GroundedLiteral:
    """Substitute the variables bound in ``valuation``.

    Returns the residual literal over the unbound variables, or a bool when
    nothing is left. If ``env_vars`` is given, every env variable occurring in
    ``lit`` must be bound.
    """
    if env_vars is not None:
        missing = sorted((lit.variables & set(env_vars)) - set(valuation))
        if missing:
            raise ContractViolation(f"valuation misses env variable(s) {missing} of {lit}")
    residual = {}
    rhs = Fraction(lit.constant)
    for name, a in lit.coeffs:
        if name in valuation:
            rhs -= a * Fraction(valuation[name])
        else:
            residual[name] = a
    if not residual:
        return _compare(Fraction(0), lit.relop, rhs)
    return make_literal(residual, lit.relop, rhs)


def eval_ground(lit: Literal, valuation: Valuation) -> bool:
    total = Fraction(0)
    for name, a in lit.coeffs:
        try:
            v = valuation[name]
        except KeyError:
            raise ContractViolation(f"valuation misses variable {name!r} of {lit}") from None
        if isinstance(v, float):
            raise ContractViolation(f"floating-point value for {name!r}")
        total += a * Fraction(v)
    return _compare(total, lit.relop, Fraction(lit.constant))


# -- cubes -----------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Cube:
    """A polarity assignment over ``width`` literals; bit i is literal i."""

    index: int
    width: int

    def __post_init__(self):
        if not 0 <= self.index < (1 << self.width):
            raise ContractViolation(f"cube index {self.index} out of range for width {self.width}")

    def polarity(self, i: int) -> bool:
        return bool(self.index >> i & 1)

    @property
    def bits(self) -> tuple[bool, ...]:
        return tuple(self.polarity(i) for i in range(self.width))

    @classmethod
    def from_bits(cls, bits: Iterable[bool]) -> "Cube":
        bits = list(bits)
        return cls(sum(1 << i for i, b in enumerate(bits) if b), len(bits))

    def label(self, prefix="s") -> str:
        return " & ".join(f"{prefix}{i}" if b else f"!{prefix}{i}" for i, b in enumerate(self.bits))

    def __str__(self):
        return self.label()


def all_cubes(width: int) -> list[Cube]:
    return [Cube(i, width) for i in range(1 << width)]


def cube_formula(cube: Cube, lits: list[Literal]) -> "And":
    if cube.width != len(lits):
        raise ContractViolation(f"cube width {cube.width} does not match {len(lits)} literals")
    return And(tuple(lit if cube.polarity(i) else negate_literal(lit) for i, lit in enumerate(lits)))


def cube_of(lits: list[Literal], valuation: Valuation) -> Cube:
    """The unique cube that holds under a full valuation."""
    return Cube.from_bits(eval_ground(lit, valuation) for lit in lits)


# -- formulas handed to the solver ----------------------------------------------

@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Exists:
    variables: tuple[str, ...]
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    variables: tuple[str, ...]
    body: "Formula"


Formula = Union[Literal, Const, Not, And, Or, Exists, Forall]

TRUE = Const(True)
FALSE = Const(False)


def free_variables(f: Formula) -> frozenset[str]:
    if isinstance(f, Literal):
        return f.variables
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, Not):
        return free_variables(f.arg)
    if isinstance(f, (And, Or)):
        return frozenset().union(*(free_variables(a) for a in f.args))
    return free_variables(f.body) - set(f.variables)


def eval_formula(f: Formula, valuation: Valuation) -> bool:
    """Evaluate a quantifier-free formula."""
    if isinstance(f, Literal):
        return eval_ground(f, valuation)
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not eval_formula(f.arg, valuation)
    if isinstance(f, And):
        return all(eval_formula(a, valuation) for a in f.args)
    if isinstance(f, Or):
        return any(eval_formula(a, valuation) for a in f.args)
    raise ContractViolation("cannot evaluate a quantified formula")


def ground_formula(f: Formula, valuation: Valuation) -> Formula:
    """Substitute ``valuation`` into a quantifier-free formula, folding constants."""
    if isinstance(f, Literal):
        g = ground(f, valuation)
        return Const(g) if isinstance(g, bool) else g
    if isinstance(f, Const):
        return f
    if isinstance(f, Not):
        arg = ground_formula(f.arg, valuation)
        return Const(not arg.value) if isinstance(arg, Const) else Not(arg)
    if isinstance(f, (And, Or)):
        unit, zero = (True, False) if isinstance(f, And) else (False, True)
        args = []
        for a in f.args:
            g = ground_formula(a, valuation)
            if isinstance(g, Const):
                if g.value == zero:
                    return Const(zero)
                continue
            args.append(g)
        if not args:
            return Const(unit)
        return type(f)(tuple(args))
    raise ContractViolation("cannot ground a quantified formula")
