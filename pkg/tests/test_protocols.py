"""Tree, k-regular and star identification: transition rules, invariants and end-to-end answers."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from popgraph.engine import NO, YES, check_stable, enumerate_reachable, run, uniform_output
from popgraph.errors import SpecError
from popgraph.graphs import connected_inventory, generate, is_kregular, line_graph, ring_graph, star_graph
from popgraph.impossibility import find_pump_pair
from popgraph.protocols import (CANDIDATE, L, LL, LR, LT_L, LT_SE, L_SE2, NEVER, PHI, PHI2, TI_CODEC, StateCodec,
                                TokenCensus, class_oracle, kreg_id, kri_codec, kri_level_bound_ok,
                                kri_max_level_has_leader, parse_protocol_spec, probes_for, si_codec,
                                si_conservation, si_star_consistent, star_id, token_census, tree_id)
from popgraph.schedulers import RandomScheduler, RoundRobinScheduler


def ti_step(protocol, a, b):
    p, q = protocol.delta(TI_CODEC.encode(*a), TI_CODEC.encode(*b))
    return TI_CODEC.decode(p), TI_CODEC.decode(q)


class TestStateCodec:
    def test_lexicographic_ids(self):
        codec = StateCodec([("x", ("a", "b")), ("y", (0, 1, 2))])
        assert codec.size == 6
        assert codec.encode("b", 0) == 3
        assert codec.decode(5) == ("b", 2)
        assert codec.label(1) == "(a,1)"

    def test_unknown_state(self):
        with pytest.raises(ValueError):
            StateCodec([("x", ("a",))]).encode("z")


class TestTreeId:
    def test_state_space(self, ti):
        assert ti.state_count == 18
        assert ti.initial == TI_CODEC.encode(LR, YES) == 4
        assert TI_CODEC.encode(L, YES) == 0
        assert TI_CODEC.encode(LL, YES) == 2

    def test_output_is_tre(self, ti):
        assert ti.gamma(TI_CODEC.encode(PHI, NO)) == NO
        assert ti.gamma(TI_CODEC.encode(PHI, YES)) == YES

    def test_token_election(self, ti):
        assert ti_step(ti, (LR, YES), (LR, YES)) == ((LR, YES), (LL, YES))
        assert ti_step(ti, (LL, YES), (LL, NO)) == ((LL, YES), (L, NO))
        assert ti_step(ti, (L, NO), (L_SE2, YES)) == ((L, YES), (PHI, YES))

    def test_leader_moves_with_its_answer(self, ti):
        assert ti_step(ti, (L, NO), (PHI, YES)) == ((PHI, NO), (L, NO))
        assert ti_step(ti, (LT_L, YES), (PHI, NO)) == ((PHI, YES), (LL, NO))

    def test_trial_steps(self, ti):
        assert ti_step(ti, (L, YES), (LL, NO)) == ((LT_L, YES), (L_SE2, YES))
        assert ti_step(ti, (L_SE2, NO), (LR, YES)) == (("Ltr", NO), (LT_SE, NO))

    def test_tokens_swap_when_they_meet(self, ti):
        assert ti_step(ti, (LL, YES), (LR, YES)) == ((LR, YES), (LL, YES))

    def test_census(self, ti):
        config = ti.initial_configuration(5)
        assert token_census(config).as_tuple() == (5, 0, 0)
        graph = ring_graph(5)
        after = run(ti, graph, RoundRobinScheduler(), max_steps=1, window=1, record=False).final
        assert token_census(after) == TokenCensus(4, 1, 0)

    def test_election_ends_with_one_token_of_each_kind(self, ti):
        graph = ring_graph(5)
        history = []
        run(ti, graph, RandomScheduler(1), max_steps=200_000, window=200_000, record=False,
            monitors=[lambda i, c: history.append(c)])
        censuses = [token_census(c).as_tuple() for c in history]
        assert (1, 1, 1) in censuses
        first = censuses.index((1, 1, 1))
        assert set(censuses[first:]) == {(1, 1, 1)}
        leader = next(s for s in history[first] if TI_CODEC.decode(s)[0] in (L, L_SE2, LT_SE, "Ltse'"))
        assert TI_CODEC.decode(leader)[1] == YES

    @pytest.mark.slow
    def test_answers_no_on_a_ring(self, ti, ring4):
        trace = run(ti, ring4, RandomScheduler(2), max_steps=1_000_000, window=50_000, record=False)
        assert trace.verdict == "converged(no)"


class TestKRegularId:
    def test_state_space(self, kri2):
        # (k + 3) tokens x 4 levels x loc x reg
        assert kri2.state_count == 5 * 4 * 4
        assert kri_codec(2, 8).decode(kri2.initial) == ("L0", 0, NO, NO)

    def test_levels_saturate_below_bound(self):
        assert kreg_id(3, 10).state_count == 6 * 4 * 4
        assert kreg_id(1, 2).state_count == 4 * 2 * 4

    @pytest.mark.parametrize("a, b, expected", [
        (("L1", 0, NO, NO), (PHI, 0, YES, NO), (("L2", 0, YES, YES), (PHI2, 0, YES, NO))),
        (("L2", 1, YES, YES), (PHI, 1, YES, YES), (("L0", 1, YES, NO), (PHI2, 1, YES, YES))),
        ((PHI, 2, YES, YES), ("L1", 1, YES, YES), ((PHI, 2, YES, YES), (PHI, 2, NO, YES))),
        (("L0", 1, YES, YES), ("L0", 1, YES, YES), (("L0", 2, NO, NO), (PHI, 1, YES, NO))),
        (("L0", 1, YES, YES), (PHI, 1, YES, NO), (("L1", 1, YES, YES), (PHI2, 1, YES, NO))),
        (("L1", 0, YES, YES), (PHI2, 0, YES, NO), ((PHI, 0, YES, YES), ("L0", 0, YES, YES))),
    ])
    def test_transitions(self, kri2, a, b, expected):
        codec = kri_codec(2, 8)
        p, q = kri2.delta(codec.encode(*a), codec.encode(*b))
        assert (codec.decode(p), codec.decode(q)) == expected

    @pytest.mark.parametrize("k", [1, 2, 3])
    @pytest.mark.parametrize("bound", [4, 8, 16])
    def test_state_count_formula(self, k, bound):
        assert kreg_id(k, bound).state_count == (k + 3) * (int(math.log2(bound)) + 1) * 4

    def test_top_level_merge_stays_at_top(self):
        protocol = kreg_id(2, 4)
        codec = kri_codec(2, 4)
        p, _ = protocol.delta(codec.encode("L0", 2, YES, YES), codec.encode("L1", 2, YES, YES))
        assert codec.decode(p) == ("L0", 2, NO, NO)

    def test_invalid_parameters(self):
        with pytest.raises(SpecError):
            kreg_id(0, 8)
        with pytest.raises(SpecError):
            kreg_id(2, 1)

    def test_probes(self, kri2):
        codec = kri_codec(2, 8)
        config = (codec.encode("L0", 2, NO, NO), codec.encode(PHI, 2, NO, NO), codec.encode(PHI, 1, NO, NO),
                  codec.encode(PHI, 0, NO, NO))
        assert kri_level_bound_ok(kri2, config)
        assert kri_max_level_has_leader(kri2, config)
        lost = (codec.encode(PHI, 2, NO, NO),) + config[1:]
        assert not kri_max_level_has_leader(kri2, lost)
        assert not kri_level_bound_ok(kri2, config[:3])

    def test_probes_hold_during_a_run(self):
        graph = generate("kregular:3:8:1")
        protocol = parse_protocol_spec("kreg-id:k=3", n=graph.n)
        probes = probes_for(protocol)
        run(protocol, graph, RandomScheduler(4), max_steps=30_000, window=30_000, monitors=probes, record=False)
        assert [p.name for p in probes] == ["level bound", "max-level leader"]
        assert all(p.ok and p.checked == 30_000 for p in probes)

    @pytest.mark.slow
    @pytest.mark.parametrize("k, spec, expected", [
        (1, "line:2", YES),
        (2, "ring:3", YES),
        (2, "line:3", NO),
        (2, "ring:4", YES),
        (2, "star:4", NO),
    ])
    def test_stable_answer_matches_oracle(self, k, spec, expected):
        graph = generate(spec)
        report = check_stable(kreg_id(k, graph.n, bound_is_exact_n=True), graph)
        assert report.output == expected

    @pytest.mark.slow
    @pytest.mark.parametrize("k", [1, 2, 3])
    @pytest.mark.parametrize("scale", [1, 2])
    def test_stable_answer_on_every_small_graph(self, k, scale):
        for graph in connected_inventory(4):
            protocol = kreg_id(k, max(2, scale * graph.n), bound_is_exact_n=scale == 1)
            expected = YES if is_kregular(graph, k) else NO
            assert check_stable(protocol, graph).output == expected, graph.edges

    @pytest.mark.slow
    def test_converges_on_a_ring(self, ring4):
        protocol = kreg_id(2, 4, bound_is_exact_n=True)
        trace = run(protocol, ring4, RandomScheduler(0), max_steps=5_000_000, window=200_000, record=False)
        assert trace.verdict == "converged(yes)"


class TestStarId:
    def test_state_space(self, si4):
        assert si4.state_count == 3 * 4 + 3
        assert star_id(7).state_count == 24
        assert si4.initial == si_codec(4).encode(PHI, NO) == 1
        assert si_codec(4).encode(CANDIDATE, NO) == 7

    def test_tiny_populations(self):
        protocol = star_id(2)
        assert protocol.state_count == 1
        assert protocol.outputs == (YES,)

    def test_symmetric(self, si4):
        assert si4.symmetry_violations() == []
        assert si4.weak_fair_compatible

    @pytest.mark.parametrize("a, b, expected", [
        ((PHI, NO), (PHI, NO), ((CANDIDATE, NO), (CANDIDATE, NO))),
        ((CANDIDATE, NO), (PHI, NO), (("L2", NO), (PHI2, NO))),
        ((PHI, NO), ("L2", NO), ((PHI2, YES), ("L3", YES))),
        ((PHI2, NO), (CANDIDATE, NO), ((PHI2, NEVER), (CANDIDATE, NEVER))),
        ((PHI2, NO), (PHI2, YES), ((PHI2, NEVER), (PHI2, NEVER))),
        ((CANDIDATE, YES), (PHI2, NEVER), ((CANDIDATE, NEVER), (PHI2, NEVER))),
        (("L3", YES), (CANDIDATE, NO), (("L3", YES), (CANDIDATE, YES))),
        ((CANDIDATE, NO), (CANDIDATE, NO), ((CANDIDATE, NO), (CANDIDATE, NO))),
    ])
    def test_transitions(self, si4, a, b, expected):
        codec = si_codec(4)
        p, q = si4.delta(codec.encode(*a), codec.encode(*b))
        assert (codec.decode(p), codec.decode(q)) == expected

    def test_output_is_yes_only_for_yes(self, si4):
        codec = si_codec(4)
        assert si4.gamma(codec.encode(PHI, YES)) == YES
        assert si4.gamma(codec.encode(PHI, NEVER)) == NO

    @pytest.mark.parametrize("states, expected", [
        ([("L2", NO), (PHI2, NO), (CANDIDATE, NO), (PHI, NO)], (2, 2)),
        ([("L3", YES), (PHI2, YES), (PHI2, YES), (CANDIDATE, YES)], (3, 3)),
    ])
    def test_conservation_examples(self, si4, states, expected):
        codec = si_codec(4)
        assert si_conservation(si4, tuple(codec.encode(*s) for s in states)) == expected

    def test_central_agent_shape(self, si4):
        codec = si_codec(4)
        good = tuple(codec.encode(*s) for s in [("L3", YES), (PHI2, YES), (PHI2, YES), (CANDIDATE, YES)])
        bad = tuple(codec.encode(*s) for s in [("L3", YES), (PHI2, YES), (PHI, YES), (CANDIDATE, YES)])
        assert si_star_consistent(si4, good)
        assert not si_star_consistent(si4, bad)

    @settings(max_examples=25, deadline=None)
    @given(family=st.sampled_from(["tree", "treechord"]), n=st.integers(min_value=3, max_value=9),
           seed=st.integers(min_value=0, max_value=1_000))
    def test_counters_match_marks_on_any_graph(self, family, n, seed):
        graph = generate(f"{family}:{n}:{seed}")
        protocol = star_id(n)
        probes = probes_for(protocol)
        run(protocol, graph, RandomScheduler(seed), max_steps=2_000, window=2_000, monitors=probes, record=False)
        assert all(p.ok for p in probes)

    @pytest.mark.parametrize("spec, scheduler, expected", [
        ("star:4", "rr", "converged(yes)"),
        ("star:7", "rr", "converged(yes)"),
        ("star:5", "rr:oneway", "converged(yes)"),
        ("line:4", "rr", "converged(no)"),
        ("line:4", "rr:oneway", "converged(no)"),
        ("ring:5", "rr", "converged(no)"),
        ("star:6+add:1-2", "rr", "converged(no)"),
    ])
    def test_round_robin(self, spec, scheduler, expected):
        graph = generate(spec)
        protocol = star_id(graph.n)
        trace = run(protocol, graph, RoundRobinScheduler(oneway=scheduler == "rr:oneway"),
                    max_steps=100_000, window=1_000, record=False)
        assert trace.verdict == expected

    def test_random_scheduler_on_a_star(self):
        graph = star_graph(6)
        trace = run(star_id(6), graph, RandomScheduler(3), max_steps=500_000, window=20_000, record=False)
        assert trace.verdict == "converged(yes)"

    @pytest.mark.parametrize("n", range(3, 21))
    def test_round_robin_on_every_star_size(self, n):
        graph = star_graph(n)
        trace = run(star_id(n), graph, RoundRobinScheduler(), max_steps=200_000, window=20 * graph.m,
                    record=False, confirm_cap=20_000)
        assert trace.verdict == "converged(yes)"
        assert trace.confirmed

    def test_counters_match_marks_for_a_hundred_thousand_steps(self):
        checked = 0
        for family, n in [("tree", 5), ("treechord", 5), ("tree", 8), ("treechord", 8), ("tree", 12)]:
            for seed in range(2):
                graph = generate(f"{family}:{n}:{seed}")
                protocol = star_id(n)
                probes = probes_for(protocol)
                run(protocol, graph, RandomScheduler(seed), max_steps=10_000, window=10_000, monitors=probes,
                    record=False)
                assert all(p.ok for p in probes), (family, n, seed)
                checked += probes[0].checked
        assert checked >= 100_000

    @pytest.mark.slow
    def test_no_absorbing_configuration_mixes_answers(self):
        for graph in connected_inventory(5):
            protocol = star_id(graph.n)
            reachable = enumerate_reachable(protocol, graph)
            has_successor = {i for i, _ in reachable.edges}
            for i, config in enumerate(reachable.configurations):
                if i not in has_successor:
                    assert uniform_output(protocol, config) is not None, (graph.edges, config)

    def test_pump_pair_within_squared_state_count(self, si4):
        bound = si4.state_count ** 2 + 1
        assert find_pump_pair(si4).j <= bound
        assert find_pump_pair(si4, aligned=True).j <= bound

    @pytest.mark.parametrize("spec, expected", [("star:4", YES), ("line:4", NO), ("ring:4", NO), ("line:3", YES)])
    def test_stable_answer_matches_oracle(self, spec, expected):
        graph = generate(spec)
        assert check_stable(star_id(graph.n), graph).output == expected


class TestSpecs:
    def test_tree_id(self):
        assert parse_protocol_spec("tree-id").name == "tree-id"
        with pytest.raises(SpecError):
            parse_protocol_spec("tree-id:k=2")

    def test_kreg_id_bound_from_population(self):
        protocol = parse_protocol_spec("kreg-id:k=2", n=6)
        assert protocol.params == {"k": 2, "bound": 6, "exact": True}
        assert protocol.spec == "kreg-id:k=2,bound=6,exact"

    def test_kreg_id_explicit_bound(self):
        protocol = parse_protocol_spec("kreg-id:k=3,bound=16", n=6)
        assert protocol.params == {"k": 3, "bound": 16, "exact": False}
        assert parse_protocol_spec(protocol.spec).params == protocol.params

    def test_star_id(self):
        assert parse_protocol_spec("star-id", n=5).params == {"n": 5}
        assert parse_protocol_spec("star-id:n=6", n=6).state_count == 21

    @pytest.mark.parametrize("text, n", [
        ("kreg-id", 5), ("kreg-id:k=x", 5), ("kreg-id:k=2", None), ("kreg-id:k=2,depth=3", 5),
        ("star-id", None), ("star-id:m=3", 4), ("leader-election", 4),
    ])
    def test_bad_specs(self, text, n):
        with pytest.raises(SpecError):
            parse_protocol_spec(text, n=n)

    def test_class_oracles(self):
        assert class_oracle(tree_id())(line_graph(4))
        assert not class_oracle(kreg_id(2, 4))(line_graph(4))
        assert class_oracle(star_id(4))(star_graph(4))

    def test_probe_sets(self, ti, si4, kri2):
        assert probes_for(ti) == []
        assert len(probes_for(kri2)) == 2
        assert len(probes_for(si4)) == 2
        assert probes_for(star_id(2)) == []
