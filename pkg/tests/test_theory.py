from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from synthmt.errors import ContractViolation
from synthmt.theory import (
    And, Cube, Exists, Forall, Not, Or, Sort, all_cubes, cube_formula, cube_of, eval_formula,
    eval_ground, free_variables, ground, make_literal, negate_literal, parse_value, value_to_json,
)

RELOPS = ["<", "<=", "=", "!=", ">=", ">"]
NAMES = ["x", "y", "z"]

coeff = st.integers(-6, 6)
literals = st.builds(
    lambda cs, rel, c: make_literal(dict(zip(NAMES, cs)), rel, c),
    st.lists(coeff, min_size=3, max_size=3).filter(any),
    st.sampled_from(RELOPS),
    st.fractions(min_value=-20, max_value=20, max_denominator=6),
)
valuations = st.fixed_dictionaries({n: st.fractions(min_value=-10, max_value=10, max_denominator=4) for n in NAMES})


def lit(text_coeffs, relop, constant):
    return make_literal(text_coeffs, relop, constant)


X_LT_2 = lit({"x": 1}, "<", 2)
Y_GT_1 = lit({"y": 1}, ">", 1)
Y_LT_X = lit({"y": 1, "x": -1}, "<", 0)
Y_LE_X = lit({"y": 1, "x": -1}, "<=", 0)


class TestCanonicalForm:
    def test_greater_is_rewritten(self):
        assert Y_GT_1 == lit({"y": -1}, "<", -1)
        assert Y_GT_1.text() == "-1*y < -1"

    def test_equivalent_atoms_compare_equal(self):
        assert lit({"x": 2, "y": 4}, "<=", 6) == lit({"x": 1, "y": 2}, "<=", 3)
        assert lit({"x": 1}, ">=", 2) == lit({"x": -1}, "<=", -2)
        assert lit({"x": Fraction(1, 2)}, "<", Fraction(3, 4)) == lit({"x": 2}, "<", 3)

    def test_equality_sign_normalized(self):
        assert lit({"x": -1, "y": 1}, "=", 3) == lit({"x": 1, "y": -1}, "=", -3)
        assert lit({"x": -2}, "!=", 4).coeffs == (("x", 1),)

    def test_rendering_is_name_ordered(self):
        assert Y_LE_X.text() == "-1*x + 1*y <= 0"

    def test_no_variable_rejected(self):
        with pytest.raises(ContractViolation):
            lit({"x": 0}, "<", 1)
        with pytest.raises(ContractViolation):
            lit({"x": 1}, "<<", 1)

    @given(literals)
    def test_idempotent(self, a):
        assert make_literal(dict(a.coeffs), a.relop, a.constant) == a


class TestNegate:
    def test_examples(self):
        assert negate_literal(Y_GT_1) == lit({"y": 1}, "<=", 1)
        assert negate_literal(negate_literal(X_LT_2)) == X_LT_2
        assert negate_literal(lit({"y": 1}, "=", 0)) == lit({"y": 1}, "!=", 0)

    @given(literals, valuations)
    def test_involution_and_complement(self, a, v):
        assert negate_literal(negate_literal(a)) == a
        assert eval_ground(negate_literal(a), v) is (not eval_ground(a, v))


class TestGround:
    def test_residual(self):
        assert ground(Y_LE_X, {"x": 4}) == lit({"y": 1}, "<=", 4)

    def test_env_only_becomes_bool(self):
        assert ground(X_LT_2, {"x": 4}) is False
        assert ground(X_LT_2, {"x": 1}) is True

    def test_untouched(self):
        assert ground(Y_GT_1, {"x": 0}) == Y_GT_1

    def test_missing_env_variable(self):
        with pytest.raises(ContractViolation):
            ground(Y_LT_X, {}, env_vars=["x"])

    @given(literals, valuations)
    def test_ground_then_eval_agrees(self, a, v):
        g = ground(a, {"x": v["x"]})
        expected = eval_ground(a, v)
        assert (g if isinstance(g, bool) else eval_ground(g, v)) is expected


class TestEval:
    def test_examples(self):
        assert eval_ground(X_LT_2, {"x": 0})
        assert eval_ground(Y_LE_X, {"x": 4, "y": 2})
        both = [Y_GT_1, lit({"y": 1}, "<", 2)]
        assert not all(eval_ground(a, {"y": 1}) for a in both)
        assert not all(eval_ground(a, {"y": 2}) for a in both)

    def test_missing_variable(self):
        with pytest.raises(ContractViolation):
            eval_ground(Y_LT_X, {"y": 1})

    def test_floats_rejected(self):
        with pytest.raises(ContractViolation):
            eval_ground(X_LT_2, {"x": 0.5})
        with pytest.raises(ContractViolation):
            parse_value(0.5, Sort.REAL)


class TestValues:
    def test_parse(self):
        assert parse_value("3/2", Sort.REAL) == Fraction(3, 2)
        assert parse_value("1.5", Sort.REAL) == Fraction(3, 2)
        assert parse_value("-4", Sort.INT) == -4
        with pytest.raises(ContractViolation):
            parse_value("1.5", Sort.INT)
        with pytest.raises(ContractViolation):
            parse_value("abc", Sort.INT)

    def test_json(self):
        assert value_to_json(Fraction(4)) == 4
        assert value_to_json(Fraction(-3, 2)) == "-3/2"


class TestCubes:
    LITS = [X_LT_2, Y_GT_1, Y_LT_X]

    def test_formula(self):
        f = cube_formula(Cube(6, 3), self.LITS)
        assert f.args == (negate_literal(X_LT_2), Y_GT_1, Y_LT_X)
        assert cube_formula(Cube(7, 3), self.LITS).args == tuple(self.LITS)

    def test_width_mismatch(self):
        with pytest.raises(ContractViolation):
            cube_formula(Cube(1, 2), self.LITS)
        with pytest.raises(ContractViolation):
            Cube(8, 3)

    def test_labels_and_bits(self):
        assert Cube(3, 3).label() == "s0 & s1 & !s2"
        assert Cube.from_bits([False, True, True]) == Cube(6, 3)
        assert len(all_cubes(3)) == 8

    @given(valuations)
    def test_exactly_one_cube_holds(self, v):
        holding = [c for c in all_cubes(3) if eval_formula(cube_formula(c, self.LITS), v)]
        assert holding == [cube_of(self.LITS, v)]

    @given(st.lists(literals, min_size=1, max_size=4), valuations)
    def test_exactly_one_cube_holds_any_list(self, lits, v):
        holding = [c for c in all_cubes(len(lits)) if eval_formula(cube_formula(c, lits), v)]
        assert len(holding) == 1


def test_formula_helpers():
    f = And((X_LT_2, Or((Not(Y_GT_1), Exists(("y",), Y_LT_X))), Forall(("z",), Y_GT_1)))
    assert free_variables(f) == {"x", "y"}
    assert eval_formula(Or((X_LT_2, Y_GT_1)), {"x": 3, "y": 5})
    with pytest.raises(ContractViolation):
        eval_formula(Exists(("y",), Y_GT_1), {"y": 0})
