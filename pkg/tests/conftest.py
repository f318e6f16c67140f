import shutil
from fractions import Fraction

import pytest

from synthmt import bundled_spec
from synthmt.booleanizer import booleanize
from synthmt.frontend import parse_spec
from synthmt.smt import start
from synthmt.synthesis import synthesize
from synthmt.theory import Sort

if shutil.which("z3") is None:  # pragma: no cover
    pytest.exit("the z3 binary is required (pip install z3-solver)", returncode=4)

RUNNING = "spec G(((x < 2) -> X(y > 1)) & ((x >= 2) -> (y < x)))"
RUNNING_MOD = "spec G(((x < 2) -> X(y > 1)) & ((x >= 2) -> (y <= x)))"

BUNDLED = [
    "running_int.spec",
    "running_real.spec",
    "running_mod_int.spec",
    "stateless_int.spec",
    "lookahead_int.spec",
    "track_real.spec",
    "band_int.spec",
]


def spec_text(body, sort="Int", env="x", sys_="y"):
    return f"theory {sort}\nenv {env}\nsys {sys_}\n{body}\n"


def load(name):
    with open(bundled_spec(name)) as fh:
        return parse_spec(fh.read(), filename=name)


def F(x):
    return Fraction(x)


@pytest.fixture(scope="session")
def int_session():
    with start(sort=Sort.INT) as s:
        yield s


@pytest.fixture(scope="session")
def real_session():
    with start(sort=Sort.REAL) as s:
        yield s


@pytest.fixture(scope="session")
def session_for(int_session, real_session):
    return lambda sort: int_session if sort is Sort.INT else real_session


@pytest.fixture(scope="session")
def running_int():
    return parse_spec(spec_text(RUNNING))


@pytest.fixture(scope="session")
def running_real():
    return parse_spec(spec_text(RUNNING, "Real"))


@pytest.fixture(scope="session")
def running_mod():
    return parse_spec(spec_text(RUNNING_MOD))


@pytest.fixture(scope="session")
def boolean_specs(session_for):
    """Booleanized bundled specs, computed once per run."""
    cache = {}

    def get(name):
        if name not in cache:
            ast = load(name)
            cache[name] = booleanize(ast, session_for(ast.sort))
        return cache[name]

    return get


@pytest.fixture(scope="session")
def artifacts(boolean_specs):
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = synthesize(boolean_specs(name))
        return cache[name]

    return get


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:  # pragma: no cover
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
