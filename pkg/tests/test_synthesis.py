import json

import numpy as np
import pytest

from synthmt.errors import ContractViolation, NotRealizable, StateSpaceTooLarge
from synthmt.synthesis import (
    INIT, artifact_from_json, artifact_to_json, build_game, cpre, dump_artifact, environment_trap,
    extract_controller, game_from_parts, solve_safety, synthesize,
)
from synthmt.booleanizer import ReactionSet
from synthmt.frontend import matrix_from_text

REALIZABLE = ["running_real.spec", "running_mod_int.spec", "stateless_int.spec", "track_real.spec", "band_int.spec"]
UNREALIZABLE = ["running_int.spec", "lookahead_int.spec"]


class TestGame:
    def test_state_count(self, boolean_specs):
        assert build_game(boolean_specs("running_int.spec")).n_states == 25
        assert build_game(boolean_specs("running_mod_int.spec")).n_states == 25

    def test_state_ids(self, boolean_specs):
        g = build_game(boolean_specs("running_int.spec"))
        assert g.state(2, 5) == 1 + 2 * 8 + 5
        assert g.decode(g.state(2, 5)) == (2, 5) and g.decode(INIT) is None

    def test_cap(self, boolean_specs):
        with pytest.raises(StateSpaceTooLarge):
            build_game(boolean_specs("running_int.spec"), state_cap=10)

    def test_init_menu_is_reaction(self, boolean_specs):
        b = boolean_specs("running_mod_int.spec")
        g = build_game(b)
        k = next(p.id for p in b.partitions if p.witness["x"] >= 2)
        assert g.menu(INIT, k) == [2, 4, 6]

    def test_next_obligation_prunes(self, boolean_specs):
        b = boolean_specs("running_mod_int.spec")
        g = build_game(b)
        k_low = next(p.id for p in b.partitions if p.witness["x"] <= 0)
        k_high = next(p.id for p in b.partitions if p.witness["x"] >= 2)
        # previous cube 3 = s0 & s1 & !s2 commits X(s1)
        assert g.menu(g.state(k_low, 3), k_high) == [2, 6]

    def test_stateless_matrix(self):
        g = game_from_parts(matrix_from_text("s0", 1), [ReactionSet.of([0, 1], 1)], 1)
        # plain atoms are read from the predecessor, so safety ignores the successor
        assert g.safe[1, :].all() and not g.safe[0, :].any()


class TestSolve:
    @pytest.mark.parametrize("name", REALIZABLE)
    def test_realizable(self, boolean_specs, name):
        W = solve_safety(build_game(boolean_specs(name)))
        assert INIT in W

    @pytest.mark.parametrize("name", UNREALIZABLE)
    def test_unrealizable(self, boolean_specs, name):
        W = solve_safety(build_game(boolean_specs(name)))
        assert INIT not in W

    @pytest.mark.parametrize("name", REALIZABLE + UNREALIZABLE)
    def test_fixpoint_stable(self, boolean_specs, name):
        g = build_game(boolean_specs(name))
        W = solve_safety(g)
        assert np.array_equal(W.mask & cpre(g, W.mask), W.mask)
        assert np.array_equal(cpre(g, W.mask)[W.mask], np.ones(W.mask.sum(), dtype=bool))

    def test_cpre_against_loops(self, boolean_specs):
        # straightforward re-implementation of the one-step force operator
        g = build_game(boolean_specs("running_mod_int.spec"))
        rng = np.random.default_rng(3)
        for _ in range(20):
            Z = rng.random(g.n_states) < 0.7
            expected = np.array([
                all(any(Z[g.state(k, c)] for c in g.menu(s, k)) for k in range(g.K))
                for s in range(g.n_states)
            ])
            assert np.array_equal(cpre(g, Z), expected)


class TestController:
    def test_unrealizable_trap(self, boolean_specs):
        b = boolean_specs("running_int.spec")
        g = build_game(b)
        with pytest.raises(NotRealizable) as err:
            extract_controller(g, solve_safety(g), b.partitions)
        assert err.value.trap == [0, 1]
        assert err.value.witnesses[0]["x"] < 2 and err.value.witnesses[1]["x"] == 2

    def test_trap_is_a_forcing_sequence(self, boolean_specs):
        for name in UNREALIZABLE:
            g = build_game(boolean_specs(name))
            trap = environment_trap(g, solve_safety(g))
            # whatever the system answers along the trap, the last step leaves it stuck
            frontier = {INIT}
            for k in trap:
                frontier = {g.state(k, c) for s in frontier for c in g.menu(s, k)}
            assert all(not any(g.menu(s, k) for k in range(g.K)) for s in frontier)

    @pytest.mark.parametrize("name", REALIZABLE)
    def test_closed_and_safe(self, artifacts, name):
        a = artifacts(name)
        ctrl, b = a.controller, a.spec
        g = build_game(b)
        for (s, k), (c, n) in ctrl.delta.items():
            assert c in b.partitions[k].reaction
            assert n == g.state(k, c) and n in ctrl.winning
            assert g.cube_of(s) is None or g.safe[g.cube_of(s), c]
        assert {(s, k) for s in ctrl.winning for k in range(b.K)} == set(ctrl.delta)

    def test_smallest_cube_tie_break(self, artifacts):
        a = artifacts("running_mod_int.spec")
        g = build_game(a.spec)
        for (s, k), (c, _) in a.controller.delta.items():
            assert c == min(m for m in g.menu(s, k) if g.state(k, m) in a.controller.winning)

    @pytest.mark.parametrize("name", REALIZABLE)
    def test_random_walk(self, artifacts, name):
        a = artifacts(name)
        ctrl, b = a.controller, a.spec
        rng = np.random.default_rng(11)
        state, prev = ctrl.initial, None
        for k in rng.integers(0, b.K, size=10_000):
            cube, state = ctrl.step(state, int(k))
            assert state in ctrl.winning
            bits = tuple(bool(cube >> i & 1) for i in range(b.L))
            if prev is not None:
                assert b.matrix.holds(prev, bits)
            prev = bits

    def test_missing_transition(self, artifacts):
        with pytest.raises(ContractViolation):
            artifacts("running_mod_int.spec").controller.step(999, 0)


class TestArtifact:
    @pytest.mark.parametrize("name", REALIZABLE + UNREALIZABLE)
    def test_round_trip(self, artifacts, name):
        a = artifacts(name)
        data = artifact_to_json(a)
        again = artifact_from_json(json.loads(json.dumps(data)))
        assert artifact_to_json(again) == data
        assert again.spec.literals == a.spec.literals
        assert again.spec.matrix == a.spec.matrix

    def test_fields(self, artifacts):
        data = artifact_to_json(artifacts("running_mod_int.spec"))
        assert set(data) == {
            "version", "sort", "env", "sys", "literals", "matrix", "partitions", "initial", "realizable", "transitions",
        }
        assert set(data["transitions"][0]) == {"state", "input-partition", "cube", "next-state"}
        assert data["literals"] == ["1*x < 2", "-1*y < -1", "-1*x + 1*y <= 0"]

    def test_unrealizable_artifact(self, artifacts):
        data = artifact_to_json(artifacts("running_int.spec"))
        assert data["realizable"] is False and data["transitions"] == []

    def test_deterministic_dump(self, boolean_specs):
        b = boolean_specs("running_real.spec")
        assert dump_artifact(synthesize(b)) == dump_artifact(synthesize(b))

    def test_bad_version(self, artifacts):
        data = artifact_to_json(artifacts("running_mod_int.spec"))
        data["version"] = 99
        with pytest.raises(ContractViolation):
            artifact_from_json(data)
