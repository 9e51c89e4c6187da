import pytest

from funnelkernel.digraph import Digraph
from funnelkernel.funnel import FORK, MERGE, is_funnel
from funnelkernel.generator import GenSpec, gen_forbidden, gen_planted, gen_random_funnel
from funnelkernel.instance import FadlInstance, FadsInstance, from_fads
from funnelkernel.kernelizer import (
    CANONICAL_NO_ARCS,
    canonical_no_instance,
    kernelize,
    kernelize_fads,
    size_audit,
    vertex_bound,
)
from funnelkernel.rules import apply_trace, find_applicable

from oracles import decision, nine_vertex, fuzz_fadl, fuzz_fads


def test_funnel_with_zero_budget_is_a_yes_kernel():
    d, _ = gen_random_funnel(GenSpec(30, 45, seed=3))
    report = kernelize(FadlInstance(d, {}, 0))
    assert not report.trivial_no and decision(report.instance)
    assert report.audit.passed


def test_nine_vertex_budget_one_is_refuted_or_no():
    report = kernelize(FadlInstance(nine_vertex(), {}, 1))
    assert report.trivial_no or not decision(report.instance)


def test_nine_vertex_budget_two_is_yes_equivalent():
    out, report = kernelize_fads(FadsInstance(nine_vertex(), 2))
    assert decision(out)


def test_single_crowded_vertex_is_refuted():
    report = kernelize(FadlInstance(gen_forbidden(0), {}, 0))
    assert report.trivial_no and report.rule_counts["LowerBound"] == 1


def test_fads_pipeline_examples():
    d, _ = gen_random_funnel(GenSpec(12, 18, seed=1))
    assert decision(kernelize_fads(FadsInstance(d, 3))[0])
    d5 = FadsInstance(gen_forbidden(5), 1)
    assert decision(d5) and decision(kernelize_fads(d5)[0])


def test_canonical_no_instance_is_fixed():
    no = canonical_no_instance()
    assert no.budget == 0 and sorted(no.digraph.arcs()) == sorted(CANONICAL_NO_ARCS)
    assert not decision(no)
    out, report = kernelize_fads(FadsInstance(gen_forbidden(0), 0))
    assert report.trivial_no and out.digraph.arcs() == no.digraph.arcs()


def test_size_audit_requires_a_fixed_point():
    with pytest.raises(ValueError, match="fixed point"):
        size_audit(FadlInstance(Digraph.from_arcs(2, [(0, 1)]), {}, 0))


def test_size_audit_on_funnel_kernel_is_small():
    d, _ = gen_random_funnel(GenSpec(40, 60, seed=8))
    audit = kernelize(FadlInstance(d, {}, 0)).audit
    assert audit.passed and audit.both_degree_big == 0


def test_vertex_bound_grows_with_budget():
    assert vertex_bound(0) == 0
    assert all(vertex_bound(k) < vertex_bound(k + 1) for k in range(10))


def test_input_is_not_mutated():
    inst = fuzz_fadl(17)
    before = inst.key()
    kernelize(inst)
    assert inst.key() == before


def test_observer_sees_pre_application_states():
    inst = fuzz_fadl(40)
    states = []
    report = kernelize(inst, observer=lambda i, t: states.append((i.copy(), t)))
    assert states[0][0].key() == inst.key()
    work = inst.copy()
    for before, trace in states:
        assert before.key() == work.key()
        apply_trace(work, trace)
    if not report.trivial_no:
        assert work.key() == report.instance.key()


def test_fixed_point_idempotence_and_budget_monotonicity():
    for seed in range(600):
        inst = fuzz_fadl(seed)
        report = kernelize(inst)
        if report.trivial_no:
            continue
        out = report.instance
        assert find_applicable(out) is None
        assert out.budget <= inst.budget
        again = kernelize(out)
        assert again.instance.key() == out.key()
        assert sum(again.rule_counts.values()) == 0


def test_decisions_preserved_on_fuzzed_fads_instances():
    for seed in range(300):
        inst = fuzz_fads(seed)
        assert decision(inst) == decision(kernelize_fads(inst)[0]), seed


def test_batched_and_single_shifts_agree():
    for seed in range(500):
        inst = fuzz_fadl(seed)
        batch = kernelize(inst, shift_mode="batch")
        single = kernelize(inst, shift_mode="single")
        assert batch.trivial_no == single.trivial_no
        if not batch.trivial_no:
            assert find_applicable(single.instance) is None
            assert decision(batch.instance) == decision(single.instance) == decision(inst)


def test_planted_kernel_passes_audits():
    p = gen_planted(GenSpec(300, 500, 3, 0.5, 21))
    report = kernelize(from_fads(p))
    assert not report.trivial_no and report.audit.passed
    assert report.instance.budget <= 3


def test_every_label_class_reduces_away_on_a_funnel():
    d, lab = gen_random_funnel(GenSpec(25, 30, seed=5))
    report = kernelize(FadlInstance(d, lab, 0))
    assert report.instance.digraph.num_vertices() == 0
    assert is_funnel(d) and set(lab.values()) <= {FORK, MERGE}
