"""SMT-LIB v2 client driving an external solver over stdin/stdout."""
from __future__ import annotations

import enum
import logging
import os
import select
import shlex
import shutil
import subprocess
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import ContractViolation, SolverProtocolError, SolverSpawnError, SolverTimeout
from .theory import (
    And, Const, Exists, Forall, Formula, Literal, Not, Or, Sort, eval_formula, free_variables,
)

log = logging.getLogger(__name__)

DEFAULT_SOLVER = "z3 -in"
DEFAULT_TIMEOUT_MS = 10_000
SOLVER_ENV = "SYNTHMT_SOLVER"


def default_solver_command() -> str:
    return os.environ.get(SOLVER_ENV) or DEFAULT_SOLVER


@dataclass(frozen=True)
class SolverConfig:
    command: str = field(default_factory=default_solver_command)
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    sort: Sort = Sort.INT

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ContractViolation("solver timeout must be positive")

    @property
    def logic(self) -> str:
        return self.sort.logic

    @property
    def preamble(self) -> tuple[str, ...]:
        """Solver-specific options sent before ``set-logic``."""
        argv = shlex.split(self.command)
        name = os.path.basename(argv[0]) if argv else ""
        if name.startswith("z3"):
            # inside push scopes z3 runs its incremental core, which stalls or
            # answers unknown on quantified LRA; hand over to the
            # non-incremental (quantifier-eliminating) core instead
            return (
                "(set-option :combined_solver.solver2_unknown 2)",
                "(set-option :combined_solver.solver2_timeout 100)",
            )
        return ()


class Status(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class CheckResult:
    status: Status
    model: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status is Status.SAT

    @property
    def unsat(self) -> bool:
        return self.status is Status.UNSAT


# -- rendering ---------------------------------------------------------------

def smt_number(value, sort: Sort) -> str:
    value = Fraction(value)
    if sort is Sort.INT:
        if value.denominator != 1:
            raise ContractViolation(f"non-integer constant {value} under Int")
        n = value.numerator
        return str(n) if n >= 0 else f"(- {-n})"
    num, den = abs(value.numerator), value.denominator
    body = f"{num}.0" if den == 1 else f"(/ {num}.0 {den}.0)"
    return body if value >= 0 else f"(- {body})"


def smt_literal(lit: Literal, sort: Sort) -> str:
    terms = [name if a == 1 else f"(* {smt_number(a, sort)} {name})" for name, a in lit.coeffs]
    lhs = terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"
    rhs = smt_number(lit.constant, sort)
    if lit.relop == "!=":
        return f"(not (= {lhs} {rhs}))"
    return f"({lit.relop} {lhs} {rhs})"


def to_smtlib(f: Formula, sort: Sort) -> str:
    if isinstance(f, Literal):
        return smt_literal(f, sort)
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Not):
        return f"(not {to_smtlib(f.arg, sort)})"
    if isinstance(f, (And, Or)):
        if not f.args:
            return "true" if isinstance(f, And) else "false"
        if len(f.args) == 1:
            return to_smtlib(f.args[0], sort)
        op = "and" if isinstance(f, And) else "or"
        return f"({op} {' '.join(to_smtlib(a, sort) for a in f.args)})"
    if isinstance(f, (Exists, Forall)):
        if not f.variables:
            return to_smtlib(f.body, sort)
        q = "exists" if isinstance(f, Exists) else "forall"
        binders = " ".join(f"({v} {sort.value})" for v in f.variables)
        return f"({q} ({binders}) {to_smtlib(f.body, sort)})"
    raise ContractViolation(f"cannot render {f!r}")


# -- s-expressions -------------------------------------------------------------

def parse_sexpr(text: str):
    """Parse one s-expression into nested lists of atom strings."""
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise SolverProtocolError(f"truncated reply: {text!r}")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while pos < len(tokens) and tokens[pos] != ")":
                items.append(read())
            if pos >= len(tokens):
                raise SolverProtocolError(f"unbalanced reply: {text!r}")
            pos += 1
            return items
        if tok == ")":
            raise SolverProtocolError(f"unbalanced reply: {text!r}")
        return tok

    result = read()
    if pos != len(tokens):
        raise SolverProtocolError(f"trailing data in reply: {text!r}")
    return result


def sexpr_value(expr) -> Fraction:
    """Decode ``n``, ``(- n)``, ``(/ p q)``, ``(- (/ p q))`` and decimals."""
    if isinstance(expr, str):
        try:
            return Fraction(expr)
        except ValueError:
            raise SolverProtocolError(f"not a numeral: {expr!r}") from None
    if len(expr) == 2 and expr[0] == "-":
        return -sexpr_value(expr[1])
    if len(expr) == 3 and expr[0] == "/":
        den = sexpr_value(expr[2])
        if den == 0:
            raise SolverProtocolError("division by zero in model value")
        return sexpr_value(expr[1]) / den
    raise SolverProtocolError(f"unsupported model value {expr!r}")


# -- session -------------------------------------------------------------------

class Session:
    """One solver child process. Not safe for concurrent use.

    Every query runs inside ``push 1`` / ``pop 1`` and declares its own
    constants, so the base level never accumulates state.
    """

    def __init__(self, config: SolverConfig):
        self.config = config
        self.depth = 0
        self.queries = 0
        argv = shlex.split(config.command)
        if not argv or shutil.which(argv[0]) is None:
            raise SolverSpawnError(f"solver executable not found: {config.command!r}")
        try:
            self.proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise SolverSpawnError(f"cannot start {config.command!r}: {exc}") from exc
        self._buffer = ""
        self._send("(set-option :print-success false)")
        self._send("(set-option :produce-models true)")
        for command in config.preamble:
            self._send(command)
        self._send(f"(set-logic {config.logic})")

    # context manager / lifecycle
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        proc = getattr(self, "proc", None)
        if proc is None or proc.poll() is not None:
            return
        try:
            proc.stdin.write("(exit)\n")
            proc.stdin.flush()
            proc.wait(timeout=1)
        except (OSError, subprocess.TimeoutExpired):
            proc.kill()
            proc.wait()

    @property
    def alive(self) -> bool:
        return self.proc.poll() is None

    # protocol
    def _send(self, command: str):
        log.debug("smt> %s", command)
        try:
            self.proc.stdin.write(command + "\n")
            self.proc.stdin.flush()
        except OSError as exc:
            raise SolverProtocolError(f"solver pipe closed: {exc}") from exc

    def _read_reply(self) -> str:
        """Read one complete reply (an atom line or a balanced s-expression)."""
        deadline = time.monotonic() + self.config.timeout_ms / 1000
        fd = self.proc.stdout.fileno()
        while True:
            reply = self._take_reply()
            if reply is not None:
                log.debug("smt< %s", reply)
                return reply
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self.proc.kill()
                raise SolverTimeout(f"no solver reply within {self.config.timeout_ms} ms")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = os.read(fd, 65536).decode()
            if not chunk:
                raise SolverProtocolError("solver exited unexpectedly")
            self._buffer += chunk

    def _take_reply(self):
        text = self._buffer.lstrip()
        if not text:
            return None
        if text[0] != "(":
            if "\n" not in text:
                return None
            line, rest = text.split("\n", 1)
            self._buffer = rest
            return line.strip()
        depth = 0
        in_string = False
        for i, ch in enumerate(text):
            if ch == '"':
                in_string = not in_string
            elif in_string:
                continue
            elif ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    self._buffer = text[i + 1:]
                    return text[: i + 1]
        return None

    def push(self):
        self._send("(push 1)")
        self.depth += 1

    def pop(self):
        if self.depth == 0:
            raise SolverProtocolError("pop on empty assertion stack")
        self._send("(pop 1)")
        self.depth -= 1

    def check_sat(self) -> Status:
        self._send("(check-sat)")
        reply = self._read_reply()
        try:
            return Status(reply)
        except ValueError:
            raise SolverProtocolError(f"unexpected reply to check-sat: {reply!r}") from None

    def get_values(self, names: Iterable[str]) -> dict[str, Fraction]:
        names = list(names)
        if not names:
            return {}
        self._send(f"(get-value ({' '.join(names)}))")
        reply = parse_sexpr(self._read_reply())
        if not isinstance(reply, list) or (reply and reply[0] == "error"):
            raise SolverProtocolError(f"get-value failed: {reply!r}")
        model = {}
        for pair in reply:
            if not isinstance(pair, list) or len(pair) != 2 or not isinstance(pair[0], str):
                raise SolverProtocolError(f"malformed get-value entry {pair!r}")
            model[pair[0]] = sexpr_value(pair[1])
        if set(model) != set(names):
            raise SolverProtocolError(f"get-value returned {sorted(model)} for {names}")
        return model

    def _query(self, variables, formula: Formula) -> CheckResult:
        sort = self.config.sort
        variables = list(variables)
        depth = self.depth
        self.push()
        try:
            for v in variables:
                self._send(f"(declare-const {v} {sort.value})")
            self._send(f"(assert {to_smtlib(formula, sort)})")
            status = self.check_sat()
            self.queries += 1
            model = {}
            if status is Status.SAT:
                model = self.get_values(variables)
                if sort is Sort.INT and any(v.denominator != 1 for v in model.values()):
                    raise SolverProtocolError(f"non-integer model under Int: {model}")
        finally:
            if self.alive:
                self.pop()
        assert self.depth == depth
        return CheckResult(status, model)

    def solve_exists(self, variables, formula: Formula, validate: bool = True) -> CheckResult:
        """Satisfiability of a quantifier-free formula with a model over ``variables``."""
        variables = list(variables)
        missing = free_variables(formula) - set(variables)
        if missing:
            raise ContractViolation(f"formula has undeclared free variables {sorted(missing)}")
        result = self._query(variables, formula)
        if result.sat and validate and not eval_formula(formula, result.model):
            raise SolverProtocolError(f"solver model {result.model} does not satisfy the query")
        return result

    def check_quantified(self, outer, formula: Formula) -> CheckResult:
        """Satisfiability of ``exists outer. formula`` where ``formula`` may nest quantifiers.

        The model covers the outer variables only.
        """
        outer = list(outer)
        missing = free_variables(formula) - set(outer)
        if missing:
            raise ContractViolation(f"formula has unbound variables {sorted(missing)}")
        return self._query(outer, formula)


def start(config: SolverConfig | None = None, **kwargs) -> Session:
    return Session(config or SolverConfig(**kwargs))
