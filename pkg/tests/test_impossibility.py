"""Counterexample constructions: graph doubling, pumping on line/ring, the bipartite triple, edge removal."""

import pytest

from popgraph.engine import YES, NO
from popgraph.errors import GraphError
from popgraph.graphs import Graph, generate, is_bipartite, is_tree, line_graph
from popgraph.impossibility import (PumpPair, alternating_pairs, build_bipartite_triple, build_doubled_execution,
                                    build_line_ring_executions, build_triangle_to_ring_execution, double_graph,
                                    edge_removal_counterexample, find_boundary_period, find_pump_pair,
                                    map_triangle_interaction, segment_script)
from popgraph.schedulers import RandomScheduler, fairness_audit


class TestDoubling:
    def test_doubled_line(self, line3):
        doubled = double_graph(line3).doubled
        assert doubled.n == 6
        assert doubled.edges == ((0, 1), (0, 4), (1, 2), (1, 3), (3, 4), (4, 5))
        assert not is_tree(doubled)
        assert doubled.label == "double(line:3)"

    def test_doubled_triangle(self):
        triple = build_bipartite_triple()
        assert triple.doubled_triangle.m == 10

    def test_needs_two_agents(self):
        with pytest.raises(GraphError):
            double_graph(Graph(n=1, edges=()))

    def test_segments_cover_every_ordered_pair(self, line3):
        doubled = double_graph(line3).doubled
        sweep = line3.ordered_pairs()
        script = segment_script(line3, 0, sweep) + segment_script(line3, 1, sweep)
        assert all(doubled.has_edge(a, b) for a, b in script)
        assert fairness_audit(script, doubled).fair

    def test_odd_segment_swaps_pivot_copies(self, line3):
        sweep = line3.ordered_pairs()
        assert segment_script(line3, 1, sweep)[:2] == [(3, 1), (1, 3)]
        assert segment_script(line3, 1, sweep)[4:6] == [(0, 4), (4, 0)]

    def test_boundary_period(self, ti, line3):
        assert find_boundary_period(ti, line3, budget=100) == (2, 1)

    def test_tree_id_cannot_tell_line_from_its_double(self, ti, line3):
        result = build_doubled_execution(ti, line3, segment_count=100)
        assert (result.mu, result.lam) == (2, 1)
        assert result.segments == 100
        assert result.witness.holds
        assert len(result.witness.pairs) == 101
        assert result.fairness.fair
        assert set(result.boundary_outputs[2:]) == {YES}
        assert result.base_trace.step_count == 400
        assert result.doubled_trace.step_count == 800
        assert result.passed
        assert result.to_dict()["doubled_edges"][1] == [0, 4]


class TestPumpPair:
    def test_alternating_sequence(self, ti):
        assert alternating_pairs(ti, 3) == [(4, 4), (4, 2), (2, 4), (4, 2)]

    def test_tree_id(self, ti):
        assert find_pump_pair(ti) == PumpPair(sa=4, sb=2, i=1, j=3)
        assert find_pump_pair(ti, aligned=True) == PumpPair(sa=4, sb=2, i=1, j=3)

    def test_star_id(self, si4):
        assert find_pump_pair(si4) == PumpPair(sa=7, sb=7, i=1, j=2)
        assert find_pump_pair(si4, aligned=True) == PumpPair(sa=7, sb=7, i=1, j=3)

    def test_pump_repeats(self, ti):
        pump = find_pump_pair(ti)
        pairs = alternating_pairs(ti, pump.j)
        assert pairs[pump.i] == pairs[pump.j] == (pump.sa, pump.sb)


class TestLineRing:
    def test_tree_id(self, ti):
        result = build_line_ring_executions(ti)
        assert result.passed
        assert result.outputs_agree
        assert result.to_dict()["boundary_configuration"] == [4, 2, 4, 2]
        assert result.to_dict()["boundary_outputs"] == [[YES] * 4]
        assert result.line_fairness.fair and result.ring_fairness.fair
        assert len(result.line_boundaries) == 13

    def test_star_id(self, si4):
        result = build_line_ring_executions(si4, phases=8)
        assert result.passed
        assert result.to_dict()["boundary_outputs"] == [[NO] * 4]

    def test_traces_replay(self, ti):
        result = build_line_ring_executions(ti, phases=4, cycles=3)
        assert result.line_trace.verify_replay(ti, line_graph(4)) is None
        assert result.ring_trace.final == (4, 2, 4, 2)

    def test_too_few_phases(self, ti):
        with pytest.raises(ValueError):
            build_line_ring_executions(ti, phases=3)


class TestBipartite:
    def test_triple(self):
        triple = build_bipartite_triple()
        assert triple.passed
        assert triple.oracle_checks() == {
            "triangle_bipartite": False,
            "six_ring_bipartite": True,
            "doubled_triangle_bipartite": False,
        }
        assert is_bipartite(triple.six_ring)

    @pytest.mark.parametrize("x, y, expected", [
        (0, 1, [(0, 1), (3, 4)]),
        (2, 0, [(2, 0), (5, 3)]),
        (1, 2, [(1, 5), (4, 2)]),
        (2, 1, [(2, 4), (5, 1)]),
    ])
    def test_interaction_map(self, x, y, expected):
        assert map_triangle_interaction(x, y) == expected

    def test_mapped_interactions_are_six_ring_edges(self):
        ring = build_bipartite_triple().six_ring
        for x in range(3):
            for y in range(3):
                if x != y:
                    assert all(ring.has_edge(a, b) for a, b in map_triangle_interaction(x, y))

    def test_triangle_to_ring_round_robin(self, ti):
        result = build_triangle_to_ring_execution(ti, steps=300)
        assert result.passed
        assert result.ring_trace.step_count == 600

    def test_triangle_to_ring_random(self, si4):
        result = build_triangle_to_ring_execution(si4, steps=500, scheduler=RandomScheduler(5))
        assert result.witness.holds
        assert result.triangle_trace.scheduler == "random:5"


class TestEdgeRemoval:
    @pytest.mark.slow
    def test_tree_id_ring_to_line(self, ti, ring4):
        report = edge_removal_counterexample(ti, ring4, (0, 1), seed=1)
        assert report.base_verdict == "converged(no)"
        assert report.method == "exhaustive"
        assert report.stable
        assert (report.graph_in_class, report.reduced_in_class) == (False, True)
        assert report.passed

    def test_star_id_extra_edge(self, si4):
        graph = generate("star:4+add:1-2")
        report = edge_removal_counterexample(si4, graph, (1, 2), seed=0, max_steps=200_000)
        assert report.output == NO
        assert report.reduced.edges == ((0, 1), (0, 2), (0, 3))
        assert report.passed
        assert report.to_dict()["edge"] == [1, 2]

    def test_absorbing_answer_has_nothing_to_explore(self, si4):
        graph = generate("star:4+add:1-2")
        report = edge_removal_counterexample(si4, graph, (1, 2), seed=0, max_steps=200_000, cap=1)
        assert report.method == "exhaustive"
        assert report.stable

    @pytest.mark.slow
    def test_simulation_fallback(self, ti, ring4):
        report = edge_removal_counterexample(ti, ring4, (0, 1), seed=1, cap=2)
        assert report.method == "simulation"
        assert report.stable
        assert report.passed
