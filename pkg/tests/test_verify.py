import numpy as np
import pytest

from epigraph import cut_table, generate, resilience_table
from epigraph.verify import (
    check_bound_walk_identity,
    check_crusade_certificates,
    check_cut_properties,
    check_oracle_agreement,
    check_resilience_properties,
    check_single_bag_route,
    check_up_crossing_mc,
    check_walk_bound_below_exact,
    enumerate_connected_graphs,
    graph_set,
    random_connected_graphs,
    run_scope,
)

# labeled connected simple graphs on n vertices
CONNECTED_COUNTS = {2: 1, 3: 4, 4: 38, 5: 728}


class TestGraphSets:
    @pytest.mark.parametrize("n,count", sorted(CONNECTED_COUNTS.items()))
    def test_enumeration_counts(self, n, count):
        assert sum(1 for _ in enumerate_connected_graphs(n)) == count

    def test_random_graphs_connected_and_seeded(self):
        a = random_connected_graphs([7, 8], 6, seed=3)
        b = random_connected_graphs([7, 8], 6, seed=3)
        assert all(g.connected for g in a)
        assert [g.edges for g in a] == [g.edges for g in b]
        assert {g.n for g in a} == {7, 8}

    def test_graph_set_sizes(self):
        graphs = list(graph_set(3, rand_count=2, seed=1))
        assert len(graphs) == 1 + 4 + 2


class TestChecksPassOnRealGraphs:
    def test_cut_properties(self):
        for kind, n in (("path", 5), ("complete", 5), ("grid", 6), ("star", 6)):
            for res in check_cut_properties(generate(kind, n)):
                assert res.passed, res.line()

    def test_resilience_properties(self):
        for kind, n in (("path", 5), ("complete", 5), ("cycle", 6), ("star", 6)):
            g = generate(kind, n)
            for res in check_resilience_properties(g):
                assert res.passed, res.line()

    def test_oracle_agreement(self):
        for kind, n in (("path", 5), ("complete", 5), ("grid", 6)):
            g = generate(kind, n)
            for res in check_oracle_agreement(g):
                assert res.passed, res.line()

    def test_certificates_and_single_bag(self):
        g = generate("grid", 6)
        t = resilience_table(g)
        bags = list(range(1, 1 << 6, 3))
        assert check_crusade_certificates(g, t, bags).passed
        assert check_single_bag_route(g, t, bags).passed


class TestFaultInjection:
    def test_corrupted_cut_detected_with_concrete_bag(self):
        g = generate("complete", 4)
        t = resilience_table(g)
        bad = t.cut.copy()
        bad[0b0111] = 0  # improvement bag with cut forced under the floor
        results = {r.name: r for r in check_resilience_properties(g, t, cut_override=bad)}
        floor = results["improvement_bag_cut_floor"]
        assert not floor.passed
        assert any("{0,1,2}" in f for f in floor.failures)

    def test_corrupted_cut_breaks_cut_properties(self):
        g = generate("path", 4)
        bad = cut_table(g).copy()
        bad[0b0011] = 9
        failed = [r for r in check_cut_properties(g, cuts=bad) if not r.passed]
        assert failed
        assert any(r.failures for r in failed)


class TestWalkChecks:
    def test_up_crossing_small(self):
        res = check_up_crossing_mc(seed=9, runs=4000, max_level=5)
        assert res.passed, res.line()
        assert res.checked == 3 * sum(range(1, 5))

    def test_bound_below_exact_full_grid(self):
        below, regen = check_walk_bound_below_exact()
        assert below.passed and below.checked == 9 * 19
        assert regen.passed

    def test_identity_samples(self):
        res = check_bound_walk_identity(seed=5, samples=30)
        assert res.passed and res.checked == 30


class TestRunScope:
    def test_all_small(self):
        report = run_scope("all", max_n=4, rand_count=2, seed=7, mc_runs=4000, mc_level=5)
        assert report.all_passed, "\n".join(report.lines())
        assert report.graphs_checked == 1 + 4 + 38 + 2
        names = {r.name for r in report.results}
        assert "fullset_resilience_equals_cutwidth" in names
        assert "algorithm_matches_oracle" in names
        assert "up_crossing_probability_mc" in names

    def test_walk_only_runs_no_graphs(self):
        report = run_scope("walk", seed=3, mc_runs=4000, mc_level=5)
        assert report.graphs_checked == 0
        assert report.all_passed

    def test_unknown_scope(self):
        with pytest.raises(ValueError):
            run_scope("everything")
