from fractions import Fraction

import pytest

from synthmt.booleanizer import (
    ReactionSet, booleanize, boolean_spec_to_json, characteristic_formula, compute_reaction,
    discover_partitions, export_ltl_text, sample_region, verify_partitions,
)
from synthmt.errors import AbstractionAborted, ContractViolation
from synthmt.frontend import extract_literals, parse_ltl, parse_spec, atoms_of
from synthmt.theory import And, Not, make_literal

from conftest import spec_text

# cube indices: bit i is the polarity of literal i
E0 = {1, 3, 5}  # s0&!s1&!s2, s0&s1&!s2, s0&!s1&s2
E1 = {2, 4}  # !s0&s1&!s2, !s0&!s1&s2
E2 = {2, 4, 6}  # adds !s0&s1&s2


def cubes(partition):
    return set(partition.reaction.cubes)


def region(partitions, lits, env, sys_, session, points):
    """Map each reaction to the sorted points whose computed reaction equals it."""
    out = {}
    for v in points:
        r = compute_reaction({"x": Fraction(v)}, lits, env, sys_, session)
        out.setdefault(r.mask, []).append(Fraction(v))
    return out


class TestReactionSet:
    def test_basics(self):
        r = ReactionSet.of([1, 3, 5], 3)
        assert r.mask == 42 and len(r) == 3 and 3 in r and 2 not in r
        assert list(r) == [1, 3, 5]
        assert r.labels()[0] == "s0 & !s1 & !s2"


class TestComputeReaction:
    @pytest.mark.parametrize("x, expected", [(2, E1), (0, E0), (3, E2)])
    def test_running_int(self, running_int, int_session, x, expected):
        lits = extract_literals(running_int)
        r = compute_reaction({"x": Fraction(x)}, lits, ["x"], ["y"], int_session)
        assert set(r.cubes) == expected

    def test_wrong_sort_input(self, running_int, int_session):
        with pytest.raises(ContractViolation):
            compute_reaction({"x": Fraction(1, 2)}, extract_literals(running_int), ["x"], ["y"], int_session)
        with pytest.raises(ContractViolation):
            compute_reaction({}, extract_literals(running_int), ["x"], ["y"], int_session)


class TestDiscovery:
    def test_running_int(self, running_int, int_session):
        lits = extract_literals(running_int)
        parts = discover_partitions(lits, ["x"], ["y"], int_session)
        assert [cubes(p) for p in parts] == [E0, E1, E2]
        assert parts[0].witness["x"] < 2 and parts[1].witness["x"] == 2 and parts[2].witness["x"] > 2
        groups = region(parts, lits, ["x"], ["y"], int_session, range(-6, 7))
        assert groups[parts[0].reaction.mask] == list(range(-6, 2))
        assert groups[parts[1].reaction.mask] == [2]
        assert groups[parts[2].reaction.mask] == list(range(3, 7))

    def test_running_real(self, running_real, real_session):
        lits = extract_literals(running_real)
        parts = discover_partitions(lits, ["x"], ["y"], real_session)
        assert len(parts) == 3
        halves = [Fraction(k, 2) for k in range(-8, 9)]
        groups = region(parts, lits, ["x"], ["y"], real_session, halves)
        regions = sorted((min(g), max(g)) for g in groups.values())
        assert regions == [(-4, 1), (Fraction(3, 2), Fraction(3, 2)), (2, 4)]
        # an off-grid point in the open interval lands in the middle region
        mid = compute_reaction({"x": Fraction(101, 100)}, lits, ["x"], ["y"], real_session)
        assert groups[mid.mask] == [Fraction(3, 2)]

    def test_running_mod_refines(self, running_mod, int_session):
        lits = extract_literals(running_mod)
        parts = discover_partitions(lits, ["x"], ["y"], int_session)
        assert [cubes(p) for p in parts] == [E0, E2, {3, 5}]
        groups = region(parts, lits, ["x"], ["y"], int_session, range(-6, 7))
        assert groups[parts[0].reaction.mask] == list(range(-6, 1))
        assert groups[parts[1].reaction.mask] == list(range(2, 7))
        assert groups[parts[2].reaction.mask] == [1]

    def test_single_partition(self, int_session):
        ast = parse_spec(spec_text("spec G(y > 0)"))
        b = booleanize(ast, int_session)
        assert b.K == 1 and set(b.partitions[0].reaction.cubes) == {0, 1}

    def test_deterministic(self, running_int, int_session):
        lits = extract_literals(running_int)
        a = discover_partitions(lits, ["x"], ["y"], int_session)
        b = discover_partitions(lits, ["x"], ["y"], int_session)
        assert [p.reaction for p in a] == [p.reaction for p in b]

    def test_cover_and_disjointness(self, boolean_specs, session_for):
        for name in ["running_int.spec", "running_real.spec", "band_int.spec"]:
            b = boolean_specs(name)
            s = session_for(b.sort)
            formulas = [p.formula(b.literals, b.sys_vars) for p in b.partitions]
            assert s.check_quantified(b.env_vars, And(tuple(Not(f) for f in formulas))).unsat
            for i in range(b.K):
                for j in range(i + 1, b.K):
                    assert s.check_quantified(b.env_vars, And((formulas[i], formulas[j]))).unsat

    def test_verification_catches_missing_partition(self, running_int, int_session):
        lits = extract_literals(running_int)
        parts = discover_partitions(lits, ["x"], ["y"], int_session)
        with pytest.raises(AbstractionAborted):
            verify_partitions(parts[:2], lits, ["x"], ["y"], int_session)

    def test_verification_catches_overlap(self, running_int, int_session):
        lits = extract_literals(running_int)
        parts = discover_partitions(lits, ["x"], ["y"], int_session)
        with pytest.raises(AbstractionAborted):
            verify_partitions(parts + [parts[0]], lits, ["x"], ["y"], int_session)


class TestReactionSoundness:
    @pytest.mark.parametrize("name", ["running_int.spec", "running_mod_int.spec", "running_real.spec"])
    def test_sampled_points(self, boolean_specs, session_for, name):
        b = boolean_specs(name)
        s = session_for(b.sort)
        for p in b.partitions:
            points = sample_region(p, b.literals, b.env_vars, b.sys_vars, s, n=100)
            assert points
            for v in points:
                assert compute_reaction(v, b.literals, b.env_vars, b.sys_vars, s) == p.reaction
            # point regions such as x = 2 are exhausted before 100 samples
            if name == "running_int.spec" and set(p.reaction.cubes) == E1:
                assert points == [{"x": 2}]

    def test_witness_satisfies_characteristic(self, boolean_specs, int_session):
        b = boolean_specs("running_int.spec")
        for p in b.partitions:
            f = characteristic_formula(p.reaction, b.literals, b.sys_vars)
            pinned = And((f,) + tuple(make_literal({k: 1}, "=", v) for k, v in p.witness.items()))
            assert int_session.check_quantified(b.env_vars, pinned).sat


class TestEmit:
    def test_boolean_spec(self, boolean_specs):
        b = boolean_specs("running_int.spec")
        assert (b.K, b.L) == (3, 3)
        assert {k: set(r.cubes) for k, r in b.extra.items()} == {0: E0, 1: E1, 2: E2}

    def test_ltl_export(self, boolean_specs):
        b = boolean_specs("running_int.spec")
        text = export_ltl_text(b)
        assert "(e0 -> ((s0 & !s1 & !s2) | (s0 & s1 & !s2) | (s0 & !s1 & s2)))" in text
        assert "(e1 -> ((!s0 & s1 & !s2) | (!s0 & !s1 & s2)))" in text
        assert "!(e0 & e1)" in text
        node = parse_ltl(text)
        assert atoms_of(node) == {"e0", "e1", "e2", "s0", "s1", "s2"}

    def test_ltl_export_single_partition(self, boolean_specs):
        text = export_ltl_text(boolean_specs("stateless_int.spec"))
        assert "G((e0) -> " in text
        assert atoms_of(parse_ltl(text)) == {"e0", "s0"}

    def test_json(self, boolean_specs):
        data = boolean_spec_to_json(boolean_specs("running_real.spec"))
        assert data["sort"] == "Real"
        assert [p["id"] for p in data["partitions"]] == [0, 1, 2]
        assert all(isinstance(p["witness"]["x"], (int, str)) for p in data["partitions"])

    def test_sort_mismatch(self, running_real, int_session):
        with pytest.raises(ContractViolation):
            booleanize(running_real, int_session)

