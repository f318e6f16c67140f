"""Specification files: tokenizer, parser, literal extraction, safety normalization.

File format::

    theory Int
    env x
    sys y
    spec G(((x < 2) -> X(y > 1)) & ((x >= 2) -> (y < x)))

``#`` and ``//`` start comments. Operators: ``G X ! & | -> <->``; ``U F R W``
are reserved and rejected.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import MixedSorts, ParseError, UndeclaredVariable, UnsupportedFragment
from .theory import Literal, Sort, make_literal, negate_literal

KEYWORDS = {"theory", "env", "sys", "spec", "true", "false"}
TEMPORAL = {"G", "X"}
RESERVED_TEMPORAL = {"U", "F", "R", "W", "M"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>(\#|//)[^\n]*)
  | (?P<num>\d+(\.\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><->|->|<=|>=|!=|==|&&|\|\||[<>=!&|()+\-*,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, id, op, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind in ("num", "id", "op"):
            tok = m.group()
            tok = {"&&": "&", "||": "|", "==": "="}.get(tok, tok)
            tokens.append(Token(kind, tok, line, pos - line_start + 1))
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    literal: Literal


@dataclass(frozen=True)
class Prop:
    name: str


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Unary:
    op: str  # "!", "G", "X"
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # "&", "|", "->", "<->"
    left: "Node"
    right: "Node"


Node = Union[Atom, Prop, BoolConst, Unary, Binary]


@dataclass(frozen=True)
class SpecAst:
    sort: Sort
    env_vars: tuple[str, ...]
    sys_vars: tuple[str, ...]
    formula: Node

    @property
    def variables(self):
        return self.env_vars + self.sys_vars


def render_formula(node: Node) -> str:
    if isinstance(node, Atom):
        return f"({node.literal.text()})"
    if isinstance(node, Prop):
        return node.name
    if isinstance(node, BoolConst):
        return "true" if node.value else "false"
    if isinstance(node, Unary):
        return f"{node.op}({render_formula(node.arg)})" if node.op != "!" else f"!{render_formula(node.arg)}"
    return f"({render_formula(node.left)} {node.op} {render_formula(node.right)})"


def render_spec(ast: SpecAst) -> str:
    lines = [f"theory {ast.sort.value}"]
    lines += [f"env {name}" for name in ast.env_vars]
    lines += [f"sys {name}" for name in ast.sys_vars]
    lines.append(f"spec {render_formula(ast.formula)}")
    return "\n".join(lines) + "\n"


# -- parser -------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens, sort=None, variables=None, propositional=False):
        self.tokens = tokens
        self.pos = 0
        self.sort = sort
        self.variables = variables if variables is not None else set()
        self.propositional = propositional

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def at(self, text) -> bool:
        tok = self.tok
        return tok.kind in ("op", "id") and tok.text == text

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.describe(self.tok)}")
        return self.advance()

    def fail(self, message, tok=None, cls=ParseError):
        tok = tok or self.tok
        raise cls(message, tok.line, tok.col)

    @staticmethod
    def describe(tok):
        return "end of input" if tok.kind == "eof" else repr(tok.text)

    def reject_reserved(self):
        tok = self.tok
        if tok.kind == "id" and tok.text in RESERVED_TEMPORAL:
            self.fail(
                f"unsupported fragment: temporal operator {tok.text!r} is outside the safety "
                "fragment (only G and X are supported)",
                cls=UnsupportedFragment,
            )

    # formulas
    def formula(self) -> Node:
        left = self.implication()
        while self.at("<->"):
            self.advance()
            left = Binary("<->", left, self.implication())
        self.reject_reserved()
        return left

    def implication(self) -> Node:
        left = self.disjunction()
        if self.at("->"):
            self.advance()
            return Binary("->", left, self.implication())
        return left

    def disjunction(self) -> Node:
        left = self.conjunction()
        while self.at("|"):
            self.advance()
            left = Binary("|", left, self.conjunction())
        return left

    def conjunction(self) -> Node:
        left = self.unary()
        self.reject_reserved()
        while self.at("&"):
            self.advance()
            left = Binary("&", left, self.unary())
            self.reject_reserved()
        return left

    def unary(self) -> Node:
        self.reject_reserved()
        tok = self.tok
        if self.at("!"):
            self.advance()
            return Unary("!", self.unary())
        if tok.kind == "id" and tok.text in TEMPORAL:
            self.advance()
            return Unary(tok.text, self.unary())
        return self.primary()

    def primary(self) -> Node:
        tok = self.tok
        if tok.kind == "id" and tok.text in ("true", "false"):
            self.advance()
            return BoolConst(tok.text == "true")
        if self.propositional:
            if tok.kind == "id" and tok.text not in KEYWORDS:
                self.advance()
                return Prop(tok.text)
            self.expect("(")
            inner = self.formula()
            self.expect(")")
            return inner
        start = self.pos
        try:
            return self.atom()
        except UndeclaredVariable:
            raise
        except MixedSorts:
            raise
        except ParseError as atom_error:
            self.pos = start
            if not self.at("("):
                raise atom_error
            try:
                self.advance()
                inner = self.formula()
                self.expect(")")
                return inner
            except UnsupportedFragment:
                raise
            except ParseError as formula_error:
                # report whichever attempt got further
                if (atom_error.line, atom_error.col) > (formula_error.line, formula_error.col):
                    raise atom_error from None
                raise

    def atom(self) -> Atom:
        left = self.arith()
        tok = self.tok
        if tok.kind != "op" or tok.text not in ("<", "<=", "=", "!=", ">=", ">"):
            self.fail(f"expected a comparison operator, found {self.describe(tok)}")
        self.advance()
        right = self.arith()
        coeffs = dict(left[0])
        for name, a in right[0].items():
            coeffs[name] = coeffs.get(name, 0) - a
        constant = right[1] - left[1]
        if not any(coeffs.values()):
            self.fail("comparison mentions no variable", tok)
        return Atom(make_literal(coeffs, tok.text, constant))

    # linear arithmetic: (coeff dict, constant)
    def arith(self):
        coeffs, const = self.term()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            sign = 1 if self.advance().text == "+" else -1
            c2, k2 = self.term()
            for name, a in c2.items():
                coeffs[name] = coeffs.get(name, 0) + sign * a
            const += sign * k2
        return coeffs, const

    def term(self):
        coeffs, const = self.factor()
        while self.at("*"):
            tok = self.advance()
            c2, k2 = self.factor()
            if coeffs and c2:
                self.fail("nonlinear term: product of two variables", tok)
            if coeffs:
                coeffs = {n: a * k2 for n, a in coeffs.items()}
                const = const * k2
            else:
                coeffs = {n: a * const for n, a in c2.items()}
                const = const * k2
        return coeffs, const

    def factor(self):
        tok = self.tok
        if self.at("-"):
            self.advance()
            coeffs, const = self.factor()
            return {n: -a for n, a in coeffs.items()}, -const
        if tok.kind == "num":
            self.advance()
            if "." in tok.text and self.sort is not Sort.REAL:
                self.fail(f"decimal constant {tok.text} requires theory Real", tok, MixedSorts)
            return {}, Fraction(tok.text)
        if tok.kind == "id":
            if tok.text in KEYWORDS or tok.text in TEMPORAL or tok.text in RESERVED_TEMPORAL:
                self.fail(f"expected a term, found keyword {tok.text!r}")
            if tok.text not in self.variables:
                self.fail(f"undeclared variable {tok.text!r}", tok, UndeclaredVariable)
            self.advance()
            return {tok.text: Fraction(1)}, Fraction(0)
        if self.at("("):
            self.advance()
            result = self.arith()
            self.expect(")")
            return result
        self.fail(f"expected a term, found {self.describe(tok)}")


def parse_spec(text: str, filename: str | None = None) -> SpecAst:
    """Parse a specification file.

    Errors carry ``filename:line:col`` positions.
    """
    try:
        return _parse_spec(text)
    except ParseError as exc:
        if filename is not None:
            raise exc.with_filename(filename) from None
        raise


def _parse_spec(text):
    p = _Parser(tokenize(text))
    sort = None
    env, sys_ = [], []
    conjuncts = []
    while p.tok.kind != "eof":
        tok = p.tok
        if p.at("theory"):
            p.advance()
            name = p.advance()
            if name.text not in ("Int", "Real"):
                p.fail(f"unknown theory {name.text!r} (expected Int or Real)", name)
            new = Sort(name.text)
            if sort is not None and new is not sort:
                p.fail("conflicting theory declarations; all variables must share one sort", name, MixedSorts)
            sort = new
            p.sort = sort
        elif p.at("env") or p.at("sys"):
            side = env if p.advance().text == "env" else sys_
            names = [_declare_name(p)]
            while p.at(","):
                p.advance()
                names.append(_declare_name(p))
            side.extend(names)
            p.variables.update(names)
        elif p.at("spec"):
            p.advance()
            if sort is None:
                p.fail("missing 'theory Int' or 'theory Real' before spec", tok)
            if not env or not sys_:
                p.fail("spec needs at least one env and one sys variable", tok)
            conjuncts.append(p.formula())
        else:
            p.reject_reserved()
            p.fail(f"expected a declaration or spec, found {p.describe(tok)}")
    if not conjuncts:
        raise ParseError("no spec formula", p.tok.line, p.tok.col)
    formula = conjuncts[0]
    for c in conjuncts[1:]:
        formula = Binary("&", formula, c)
    return SpecAst(sort, tuple(env), tuple(sys_), formula)


def _declare_name(p):
    tok = p.tok
    if tok.kind != "id" or tok.text in KEYWORDS or tok.text in TEMPORAL or tok.text in RESERVED_TEMPORAL:
        p.fail(f"expected a variable name, found {p.describe(tok)}")
    if tok.text in p.variables:
        p.fail(f"variable {tok.text!r} declared twice")
    return p.advance().text


def parse_ltl(text: str) -> Node:
    """Parse a purely propositional LTL formula (bare identifiers are atoms)."""
    p = _Parser(tokenize(text), propositional=True)
    node = p.formula()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.describe(p.tok)}")
    return node


def parse_literal(text: str, variables, sort: Sort = Sort.INT) -> Literal:
    """Parse one comparison such as ``"1*y + -1*x <= 0"``."""
    p = _Parser(tokenize(text), sort=sort, variables=set(variables))
    atom = p.atom()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.describe(p.tok)}")
    return atom.literal


def atoms_of(node: Node) -> set[str]:
    if isinstance(node, Prop):
        return {node.name}
    if isinstance(node, Unary):
        return atoms_of(node.arg)
    if isinstance(node, Binary):
        return atoms_of(node.left) | atoms_of(node.right)
    return set()


# -- literal extraction and safety normalization ----------------------------

def _walk_atoms(node):
    if isinstance(node, Atom):
        yield node
    elif isinstance(node, Unary):
        yield from _walk_atoms(node.arg)
    elif isinstance(node, Binary):
        yield from _walk_atoms(node.left)
        yield from _walk_atoms(node.right)


def extract_literals(ast: SpecAst) -> list[Literal]:
    """Distinct literals in first-occurrence order.

    An atom whose complement is already listed reuses that entry, so
    ``(x < 2)`` and ``(x >= 2)`` share one Boolean atom.
    """
    lits: list[Literal] = []
    seen = set()
    for atom in _walk_atoms(ast.formula):
        lit = atom.literal
        if lit in seen or negate_literal(lit) in seen:
            continue
        seen.add(lit)
        lits.append(lit)
    return lits


@dataclass(frozen=True)
class Slot:
    """Boolean atom ``s<index>``, read at the current step or the next one."""

    index: int
    next: bool = False


def _render_matrix(node) -> str:
    if isinstance(node, Slot):
        return f"X s{node.index}" if node.next else f"s{node.index}"
    if isinstance(node, BoolConst):
        return "true" if node.value else "false"
    if isinstance(node, Unary):
        return f"!{_render_matrix(node.arg)}"
    return f"({_render_matrix(node.left)} {node.op} {_render_matrix(node.right)})"


def _eval_matrix(node, cur, nxt) -> bool:
    if isinstance(node, Slot):
        return bool((nxt if node.next else cur)[node.index])
    if isinstance(node, BoolConst):
        return node.value
    if isinstance(node, Unary):
        return not _eval_matrix(node.arg, cur, nxt)
    a = _eval_matrix(node.left, cur, nxt)
    if node.op == "&":
        return a and _eval_matrix(node.right, cur, nxt)
    if node.op == "|":
        return a or _eval_matrix(node.right, cur, nxt)
    if node.op == "->":
        return (not a) or _eval_matrix(node.right, cur, nxt)
    return a == _eval_matrix(node.right, cur, nxt)


def _slots(node):
    if isinstance(node, Slot):
        yield node
    elif isinstance(node, Unary):
        yield from _slots(node.arg)
    elif isinstance(node, Binary):
        yield from _slots(node.left)
        yield from _slots(node.right)


@dataclass(frozen=True)
class SafetyMatrix:
    """Body of ``G(psi)``: a Boolean formula over current and next-step atoms.

    ``conjuncts`` are the top-level conjuncts of psi; the monitor reports the
    first one that fails.
    """

    conjuncts: tuple
    width: int

    def holds(self, cur, nxt) -> bool:
        return all(_eval_matrix(c, cur, nxt) for c in self.conjuncts)

    def first_violation(self, cur, nxt):
        for c in self.conjuncts:
            if not _eval_matrix(c, cur, nxt):
                return c
        return None

    @property
    def has_next(self) -> bool:
        return any(s.next for c in self.conjuncts for s in _slots(c))

    def indices(self) -> set[int]:
        return {s.index for c in self.conjuncts for s in _slots(c)}

    def text(self) -> str:
        return " & ".join(_render_matrix(c) for c in self.conjuncts)

    @staticmethod
    def render(conjunct) -> str:
        return _render_matrix(conjunct)


def _split_and(node):
    if isinstance(node, Binary) and node.op == "&":
        return _split_and(node.left) + _split_and(node.right)
    return [node]


def normalize_safety(ast: SpecAst, lits: list[Literal] | None = None) -> SafetyMatrix:
    """Reduce ``G(...) & G(...)`` to a matrix over literal indices.

    Raises :class:`UnsupportedFragment` outside the safety fragment.
    """
    lits = extract_literals(ast) if lits is None else lits
    index = {lit: i for i, lit in enumerate(lits)}
    conjuncts = []
    for block in _split_and(ast.formula):
        if not (isinstance(block, Unary) and block.op == "G"):
            raise UnsupportedFragment(
                f"unsupported fragment: top level must be a conjunction of G(...) blocks, "
                f"got {render_formula(block)}"
            )
        body = _to_matrix(block.arg, index)
        conjuncts.extend(_split_and(body))
    matrix = SafetyMatrix(tuple(conjuncts), len(lits))
    if not any(not s.next for c in conjuncts for s in _slots(c)):
        raise UnsupportedFragment("unsupported fragment: the safety body mentions no current-step atom")
    return matrix


def _lookup(atom: Atom, index):
    lit = atom.literal
    if lit in index:
        return index[lit], False
    neg = negate_literal(lit)
    if neg in index:
        return index[neg], True
    raise UnsupportedFragment(f"literal {lit} is not in the literal list")


def _to_matrix(node, index, under_next=False):
    if isinstance(node, Atom):
        i, negated = _lookup(node, index)
        slot = Slot(i, under_next)
        return Unary("!", slot) if negated else slot
    if isinstance(node, BoolConst):
        return node
    if isinstance(node, Unary):
        if node.op == "G":
            raise UnsupportedFragment("unsupported fragment: nested temporal operator G inside G")
        if node.op == "X":
            if under_next:
                raise UnsupportedFragment("unsupported fragment: X-depth greater than 1")
            if isinstance(node.arg, Atom):
                return _to_matrix(node.arg, index, True)
            if isinstance(node.arg, Unary) and node.arg.op == "X":
                raise UnsupportedFragment("unsupported fragment: X-depth greater than 1")
            raise UnsupportedFragment(
                f"unsupported fragment: X may only wrap an atom, got X({render_formula(node.arg)})"
            )
        return Unary("!", _to_matrix(node.arg, index, under_next))
    if isinstance(node, Binary):
        return Binary(node.op, _to_matrix(node.left, index, under_next), _to_matrix(node.right, index, under_next))
    raise UnsupportedFragment(f"unexpected node {node!r}")


def matrix_from_text(text: str, width: int) -> SafetyMatrix:
    """Inverse of :meth:`SafetyMatrix.text` (used when loading artifacts)."""
    node = parse_ltl(text)
    conjuncts = [_prop_to_slot(c, width) for c in _split_and(node)]
    return SafetyMatrix(tuple(conjuncts), width)


def _prop_to_slot(node, width, under_next=False):
    if isinstance(node, Prop):
        m = re.fullmatch(r"s(\d+)", node.name)
        if not m or int(m.group(1)) >= width:
            raise ParseError(f"bad matrix atom {node.name!r}")
        return Slot(int(m.group(1)), under_next)
    if isinstance(node, BoolConst):
        return node
    if isinstance(node, Unary):
        if node.op == "X":
            return _prop_to_slot(node.arg, width, True)
        if node.op == "!":
            return Unary("!", _prop_to_slot(node.arg, width, under_next))
        raise ParseError(f"unexpected {node.op} in matrix")
    return Binary(node.op, _prop_to_slot(node.left, width, under_next), _prop_to_slot(node.right, width, under_next))
