import itertools

import pytest

from funnelkernel.digraph import Digraph, delete_arcs
from funnelkernel.funnel import FORK, MERGE, has_labeling_extension
from funnelkernel.generator import gen_random_fadl
from funnelkernel.instance import FadlInstance, FadsInstance, Solution, from_fads, to_fads, verify_solution

from oracles import NINE_FIX, cycle, decision, nine_vertex


def test_from_fads_keeps_graph_and_budget():
    inst = from_fads(FadsInstance(cycle(3), 1))
    assert inst.labeling == {} and inst.budget == 1 and inst.digraph == cycle(3)
    assert decision(from_fads(FadsInstance(Digraph(0), 0)))
    assert decision(from_fads(FadsInstance(nine_vertex(), 2)))


def test_fads_budget_must_be_non_negative():
    with pytest.raises(ValueError):
        FadsInstance(cycle(3), -1)


def test_labels_must_be_on_live_vertices():
    with pytest.raises(ValueError):
        FadlInstance(Digraph(2), {5: FORK}, 0)


def test_to_fads_gadget_sizes():
    one_fork = FadlInstance(Digraph.from_arcs(2, [(0, 1)]), {0: FORK}, 1)
    out = to_fads(one_fork)
    assert out.digraph.num_vertices() == 2 + 6
    assert out.digraph.num_arcs() == 1 + 3
    assert out.budget == 1
    empty = to_fads(FadlInstance(Digraph(3), {}, 5))
    assert empty.digraph.num_vertices() == 3 + 14 and empty.digraph.num_arcs() == 0


def test_to_fads_gadget_layout():
    inst = FadlInstance(Digraph(2), {0: FORK, 1: MERGE}, 0)
    d = to_fads(inst).digraph
    assert d.successors(0) == [2, 3]          # sinks first
    assert d.predecessors(1) == [4, 5]        # then sources


def test_to_fads_rejects_refuted_instance():
    with pytest.raises(ValueError):
        to_fads(FadlInstance(Digraph(1), {}, -1))


def test_to_fads_preserves_decision_on_random_instances():
    for seed in range(250):
        n = 2 + seed % 6
        inst = gen_random_fadl(n, min(n * (n - 1), seed % 9), seed % 3, 0.6, seed)
        assert decision(inst) == decision(to_fads(inst)), seed


def test_gadget_forces_original_labels():
    """With at most k deletions, no funnel labeling of the gadget instance can
    flip a label that the FADL instance prescribed."""
    for seed in range(60):
        inst = gen_random_fadl(4, 4 + seed % 4, seed % 2, 0.7, seed)
        big = to_fads(inst)
        arcs = big.digraph.arcs()
        for size in range(inst.budget + 1):
            for s in itertools.combinations(arcs, size):
                rest = delete_arcs(big.digraph, s)
                for v, lab in inst.labeling.items():
                    assert has_labeling_extension(rest, {v: lab.other}) is None


# verify_solution ---------------------------------------------------------------------


def nine_vertex_solution() -> Solution:
    rest = delete_arcs(nine_vertex(), NINE_FIX)
    return Solution(NINE_FIX, has_labeling_extension(rest, {}))


def test_verify_funnel_with_empty_deletion():
    d = Digraph.from_arcs(3, [(0, 1), (0, 2)])
    sol = Solution(frozenset(), has_labeling_extension(d, {}))
    assert verify_solution(FadlInstance(d, {}, 0), sol)


def test_verify_nine_vertex_solution_and_budget():
    sol = nine_vertex_solution()
    assert verify_solution(FadlInstance(nine_vertex(), {}, 2), sol)
    assert not verify_solution(FadlInstance(nine_vertex(), {}, 1), sol)


def test_verify_rejects_bad_certificates():
    inst = FadlInstance(nine_vertex(), {}, 3)
    sol = nine_vertex_solution()
    missing_arc = Solution(sol.deleted_arcs | {(2, 0)}, sol.labeling)
    assert not verify_solution(inst, missing_arc)
    partial = Solution(sol.deleted_arcs, {v: l for v, l in sol.labeling.items() if v != 0})
    assert not verify_solution(inst, partial)
    flipped = dict(sol.labeling)
    flipped[0] = flipped[0].other
    assert not verify_solution(FadlInstance(nine_vertex(), {0: sol.labeling[0]}, 2), Solution(sol.deleted_arcs, flipped))


def test_verify_rejects_kept_merge_to_fork_arc():
    d = Digraph.from_arcs(2, [(0, 1)])
    assert not verify_solution(FadlInstance(d, {}, 0), Solution(frozenset(), {0: MERGE, 1: FORK}))
