"""The eight FADL reduction rules.

Every rule is exposed as ``rule_*(instance, site, inplace=False)`` returning
a :class:`RuleOutcome`. Internally each rule first plans its effect as a
:class:`RuleTrace` (``plan_*``) and then commits it, so the kernelizer and
the standalone API run the same code.

The safety argument of each rule assumes every lower-numbered rule is no
longer applicable; the kernelizer guarantees that ordering, standalone
callers have to arrange it themselves.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator

from .digraph import Arc, Digraph
from .funnel import FORK, MERGE, Label
from .instance import FadlInstance

RULE_NAMES = {
    1: "LowerBound",
    2: "SetLabel",
    3: "Dissolve",
    4: "BreakCycle",
    5: "ShiftNeighbors",
    6: "LabeledNeighbor",
    7: "RemoveArcs",
    8: "RemoveSinks",
}


class Outcome(enum.Enum):
    UNCHANGED = "unchanged"
    CHANGED = "changed"
    TRIVIAL_NO = "trivial-no"


@dataclass(frozen=True)
class RuleTrace:
    """What one rule application does to an instance."""

    rule: int
    removed_arcs: tuple[Arc, ...] = ()
    added_arcs: tuple[Arc, ...] = ()
    removed_vertices: tuple[int, ...] = ()
    labels: tuple[tuple[int, Label], ...] = ()
    k_delta: int = 0
    applications: int = 1  # elementary rule applications composed into this trace

    @property
    def name(self) -> str:
        return RULE_NAMES[self.rule]

    def describe(self) -> str:
        parts = [self.name]
        if self.labels:
            parts.append("label " + ", ".join(f"{v}:{lab.value}" for v, lab in self.labels))
        if self.removed_vertices:
            parts.append(f"remove vertices {list(self.removed_vertices)}")
        if self.removed_arcs:
            parts.append(f"remove arcs {list(self.removed_arcs)}")
        if self.added_arcs:
            parts.append(f"add arcs {list(self.added_arcs)}")
        if self.k_delta:
            parts.append(f"k{self.k_delta:+d}")
        return "; ".join(parts)


@dataclass
class RuleOutcome:
    kind: Outcome
    instance: FadlInstance | None
    trace: RuleTrace | None = None

    @property
    def changed(self) -> bool:
        return self.kind is Outcome.CHANGED


@dataclass(frozen=True)
class DegreeCensus:
    in_big: frozenset[int]    # in-degree > 1
    out_big: frozenset[int]   # out-degree > 1
    both_big: frozenset[int]


def degree_census(d: Digraph) -> DegreeCensus:
    vi = frozenset(v for v in d if d.in_degree(v) > 1)
    vo = frozenset(v for v in d if d.out_degree(v) > 1)
    return DegreeCensus(vi, vo, vi & vo)


def apply_trace(inst: FadlInstance, trace: RuleTrace) -> None:
    """Mutate ``inst`` in place according to ``trace``."""
    d = inst.digraph
    for u, v in trace.removed_arcs:
        d.remove_arc(u, v)
    for v in trace.removed_vertices:
        d.remove_vertex(v)
        inst.labeling.pop(v, None)
    for u, v in trace.added_arcs:
        assert not d.has_arc(u, v) and u != v, f"rule would create a loop or parallel arc ({u},{v})"
        d.add_arc(u, v)
    for v, lab in trace.labels:
        assert v not in inst.labeling, f"vertex {v} is already labeled"
        inst.labeling[v] = lab
    inst.budget += trace.k_delta


def _commit(inst: FadlInstance, trace: RuleTrace | None, inplace: bool) -> RuleOutcome:
    if trace is None:
        return RuleOutcome(Outcome.UNCHANGED, inst)
    target = inst if inplace else inst.copy()
    apply_trace(target, trace)
    return RuleOutcome(Outcome.CHANGED, target, trace)


def _refuted(inst: FadlInstance) -> RuleOutcome:
    return RuleOutcome(Outcome.TRIVIAL_NO, None, RuleTrace(1))


# ---------------------------------------------------------------------------
# Rule 1: LowerBound
# ---------------------------------------------------------------------------


def lower_bound_contribution(indeg: int, outdeg: int, label: Label | None) -> int:
    """Arc deletions forced at one vertex by its degrees and label."""
    if label is MERGE:
        return outdeg - 1 if outdeg > 1 else 0
    if label is FORK:
        return indeg - 1 if indeg > 1 else 0
    if indeg > 1 and outdeg > 1:
        return min(indeg, outdeg) - 1
    return 0


def lower_bound_sum(inst: FadlInstance) -> int:
    d, lab = inst.digraph, inst.labeling
    return sum(lower_bound_contribution(d.in_degree(v), d.out_degree(v), lab.get(v)) for v in d)


def rule_lower_bound(inst: FadlInstance) -> RuleOutcome:
    if inst.budget < 0 or lower_bound_sum(inst) > 2 * inst.budget:
        return _refuted(inst)
    return RuleOutcome(Outcome.UNCHANGED, inst)


# ---------------------------------------------------------------------------
# Rule 2: SetLabel
# ---------------------------------------------------------------------------


def set_label_choice(d: Digraph, labeling: dict[int, Label], k: int, v: int) -> Label | None:
    """The label SetLabel assigns to unlabeled ``v``, Fork conditions first."""
    indeg, outdeg = d.in_degree(v), d.out_degree(v)
    ins, outs = d.in_set(v), d.out_set(v)

    if indeg == 0 or outdeg > k + 1:
        return FORK
    if indeg == 1 and labeling.get(next(iter(ins))) is FORK:
        return FORK
    if outdeg >= indeg + 1:
        good = 0
        for u in outs:
            lab = labeling.get(u)
            if lab is MERGE or (lab is FORK and d.in_degree(u) == 1):
                good += 1
        if good >= indeg + 1:
            return FORK

    if outdeg == 0 or indeg > k + 1:
        return MERGE
    if outdeg == 1 and labeling.get(next(iter(outs))) is MERGE:
        return MERGE
    if indeg >= outdeg + 1:
        good = 0
        for u in ins:
            lab = labeling.get(u)
            if lab is FORK or (lab is MERGE and d.out_degree(u) == 1):
                good += 1
        if good >= outdeg + 1:
            return MERGE
    return None


def plan_set_label(inst: FadlInstance, v: int) -> RuleTrace | None:
    if not inst.digraph.is_alive(v):
        raise ValueError(f"vertex {v} is not live")
    if v in inst.labeling:
        raise ValueError(f"SetLabel applied to already labeled vertex {v}")
    lab = set_label_choice(inst.digraph, inst.labeling, inst.budget, v)
    return None if lab is None else RuleTrace(2, labels=((v, lab),))


def rule_set_label(inst: FadlInstance, v: int, inplace: bool = False) -> RuleOutcome:
    if inst.budget < 0:
        return _refuted(inst)
    return _commit(inst, plan_set_label(inst, v), inplace)


# ---------------------------------------------------------------------------
# Rule 3: Dissolve
# ---------------------------------------------------------------------------


def plan_dissolve(inst: FadlInstance, v: int, literal: bool = False) -> RuleTrace | None:
    """Contract ``u -> v -> w`` to ``u -> w``.

    When ``v`` is labeled, the contraction is only done if the label of ``v``
    can be recovered afterwards: ``u`` must carry it, and so must ``w`` unless
    ``u`` has out-degree 1. Without this, a labeled ``v`` between unlabeled
    neighbours loses its constraint and a no-instance can become a
    yes-instance. ``literal=True`` skips that check (for demonstrations only).
    """
    d, lab = inst.digraph, inst.labeling
    if not d.is_alive(v) or d.in_degree(v) != 1 or d.out_degree(v) != 1:
        return None
    (u,) = d.in_set(v)
    (w,) = d.out_set(v)
    if u == w:
        return None
    if not (d.in_degree(w) == 1 or d.out_degree(u) == 1):
        return None
    lv = lab.get(v)
    if lv is not None:
        lu, lw = lab.get(u), lab.get(w)
        if (lu is not None and lu is not lv) or (lw is not None and lw is not lv):
            return None
        if not literal and (lu is None or (lw is None and d.out_degree(u) > 1)):
            return None
    return RuleTrace(3, removed_arcs=((u, v), (v, w)), removed_vertices=(v,), added_arcs=((u, w),))


def rule_dissolve(inst: FadlInstance, v: int, inplace: bool = False) -> RuleOutcome:
    if inst.budget < 0:
        return _refuted(inst)
    return _commit(inst, plan_dissolve(inst, v), inplace)


# ---------------------------------------------------------------------------
# Rule 4: BreakCycle
# ---------------------------------------------------------------------------


def _cycle_vertices(d: Digraph, cycle: list[Arc]) -> list[int]:
    if not cycle:
        raise ValueError("empty arc sequence is not a cycle")
    verts = [a for a, _ in cycle]
    for i, (a, b) in enumerate(cycle):
        if not d.has_arc(a, b):
            raise ValueError(f"arc ({a},{b}) of the cycle is not in the digraph")
        if b != cycle[(i + 1) % len(cycle)][0]:
            raise ValueError("arc sequence does not form a closed walk")
    if len(set(verts)) != len(verts):
        raise ValueError("arc sequence is not a simple cycle")
    return verts


def plan_break_cycle(inst: FadlInstance, cycle: list[Arc]) -> RuleTrace | None:
    d, lab = inst.digraph, inst.labeling
    cycle = list(cycle)
    verts = _cycle_vertices(d, cycle)
    labels = {lab.get(v) for v in verts}
    if all(d.in_degree(v) == 1 for v in verts) and labels in ({None}, {FORK}):
        return RuleTrace(4, removed_arcs=(min(cycle),), k_delta=-1)
    if all(d.out_degree(v) == 1 for v in verts) and labels in ({None}, {MERGE}):
        return RuleTrace(4, removed_arcs=(min(cycle),), k_delta=-1)
    return None


def rule_break_cycle(inst: FadlInstance, cycle: list[Arc], inplace: bool = False) -> RuleOutcome:
    if inst.budget < 0:
        return _refuted(inst)
    return _commit(inst, plan_break_cycle(inst, cycle), inplace)


def _walk_cycle(d: Digraph, start: int, forward: bool) -> list[Arc] | None:
    """Cycle through ``start`` along unique in-neighbours (backward) or unique
    out-neighbours (forward) with every vertex of degree one on that side."""
    step = d.out_set if forward else d.in_set
    seen = {start}
    order = [start]
    v = start
    while True:
        nbrs = step(v)
        if len(nbrs) != 1:
            return None
        (v,) = nbrs
        if v == start:
            break
        if v in seen:
            return None
        seen.add(v)
        order.append(v)
    if forward:
        return [(order[i], order[(i + 1) % len(order)]) for i in range(len(order))]
    rev = order[::-1]
    return [(rev[i], rev[(i + 1) % len(rev)]) for i in range(len(rev))]


def find_break_cycle_at(inst: FadlInstance, v: int) -> list[Arc] | None:
    """A cycle through ``v`` to which BreakCycle applies, if any."""
    d = inst.digraph
    if not d.is_alive(v):
        return None
    for forward in (False, True):
        cyc = _walk_cycle(d, v, forward)
        if cyc is not None and plan_break_cycle(inst, cyc) is not None:
            return cyc
    return None


# ---------------------------------------------------------------------------
# Rule 5: ShiftNeighbors
# ---------------------------------------------------------------------------


def _shift_case1(inst: FadlInstance, u: int, v: int, w: int) -> RuleTrace | None:
    d, lab = inst.digraph, inst.labeling
    if not (d.in_degree(u) == 1 and d.in_degree(v) == 1 and d.in_degree(w) == 1):
        return None
    if lab.get(u) is MERGE or lab.get(v) is MERGE:
        return None
    out_u = d.out_set(u)
    cands = [x for x in d.out_set(v) if x not in out_u and x != w and x != u]
    if not cands:
        return None
    x = min(cands)
    return RuleTrace(5, removed_arcs=((v, x),), added_arcs=((u, x),))


def _shift_case2(inst: FadlInstance, u: int, v: int, w: int) -> RuleTrace | None:
    d, lab = inst.digraph, inst.labeling
    if not (d.out_degree(u) == 1 and d.out_degree(v) == 1 and d.out_degree(w) == 1):
        return None
    if lab.get(v) is FORK or lab.get(w) is FORK:
        return None
    in_w = d.in_set(w)
    cands = [x for x in d.in_set(v) if x not in in_w and x != u and x != w]
    if not cands:
        return None
    x = min(cands)
    return RuleTrace(5, removed_arcs=((x, v),), added_arcs=((x, w),))


def plan_shift_neighbors(inst: FadlInstance, path: tuple[int, int, int]) -> RuleTrace | None:
    u, v, w = path
    d = inst.digraph
    if not (d.has_arc(u, v) and d.has_arc(v, w)):
        raise ValueError(f"({u},{v},{w}) is not a path of the digraph")
    if u == w:
        return None
    return _shift_case1(inst, u, v, w) or _shift_case2(inst, u, v, w)


def rule_shift_neighbors(inst: FadlInstance, path: tuple[int, int, int], inplace: bool = False) -> RuleOutcome:
    if inst.budget < 0:
        return _refuted(inst)
    return _commit(inst, plan_shift_neighbors(inst, path), inplace)


def _two_smallest(items) -> list[int]:
    a = b = None
    for y in items:
        if a is None or y < a:
            a, b = y, a
        elif b is None or y < b:
            b = y
    return [z for z in (a, b) if z is not None]


def find_shift_at(inst: FadlInstance, v: int) -> tuple[int, int, int] | None:
    """A path with middle vertex ``v`` on which ShiftNeighbors changes something."""
    d, lab = inst.digraph, inst.labeling
    if not d.is_alive(v):
        return None
    if d.in_degree(v) == 1 and lab.get(v) is not MERGE:
        (u,) = d.in_set(v)
        if d.in_degree(u) == 1 and lab.get(u) is not MERGE:
            out_u = d.out_set(u)
            xs = [x for x in d.out_set(v) if x not in out_u and x != u]
            if xs:
                ws = _two_smallest(w for w in d.out_set(v) if w != u and d.in_degree(w) == 1)
                for w in ws:
                    if len(xs) > 1 or xs[0] != w:
                        return (u, v, w)
    if d.out_degree(v) == 1 and lab.get(v) is not FORK:
        (w,) = d.out_set(v)
        if d.out_degree(w) == 1 and lab.get(w) is not FORK:
            in_w = d.in_set(w)
            xs = [x for x in d.in_set(v) if x not in in_w and x != w]
            if xs:
                us = _two_smallest(u for u in d.in_set(v) if u != w and d.out_degree(u) == 1)
                for u in us:
                    if len(xs) > 1 or xs[0] != u:
                        return (u, v, w)
    return None


def shift_step_legal(inst: FadlInstance, path: tuple[int, int, int], x: int, case: int) -> bool:
    """Whether moving the arc at ``x`` along ``path`` is a single legal
    ShiftNeighbors step (case 1: ``(v,x) -> (u,x)``; case 2: ``(x,v) -> (x,w)``)."""
    d, lab = inst.digraph, inst.labeling
    u, v, w = path
    if u == w or not (d.has_arc(u, v) and d.has_arc(v, w)):
        return False
    if case == 1:
        return (
            d.in_degree(u) == 1 and d.in_degree(v) == 1 and d.in_degree(w) == 1
            and lab.get(u) is not MERGE and lab.get(v) is not MERGE
            and d.has_arc(v, x) and not d.has_arc(u, x) and x not in (u, w)
        )
    return (
        d.out_degree(u) == 1 and d.out_degree(v) == 1 and d.out_degree(w) == 1
        and lab.get(v) is not FORK and lab.get(w) is not FORK
        and d.has_arc(x, v) and not d.has_arc(x, w) and x not in (u, w)
    )


def _chain(d: Digraph, lab: dict, start: int, stop: int, up: bool) -> list[int]:
    """``start`` followed by its unique in-neighbours (``up``) or unique
    out-neighbours, as long as each next vertex has degree one on that side,
    is not labeled against the direction, and has not been seen."""
    chain = [start]
    seen = {start, stop}
    y = start
    bad = MERGE if up else FORK
    while True:
        nbrs = d.in_set(y) if up else d.out_set(y)
        if len(nbrs) != 1:
            break
        (p,) = nbrs
        if p in seen or lab.get(p) is bad:
            break
        if (d.in_degree(p) if up else d.out_degree(p)) != 1:
            break
        chain.append(p)
        seen.add(p)
        y = p
    return chain


def plan_shift_batch(inst: FadlInstance, v: int) -> RuleTrace | None:
    """All ShiftNeighbors moves available at middle vertex ``v``, composed.

    Each arc leaving ``v`` (case 1) is moved as far up the chain of unique
    in-neighbours as repeated single steps would carry it; dually for arcs
    entering ``v`` in case 2. The result is one trace equal to a sequence of
    single-step applications (see :func:`decompose_shift_batch`).
    """
    d, lab = inst.digraph, inst.labeling
    path = find_shift_at(inst, v)
    if path is None:
        return None
    u, _, w = path
    removed: list[Arc] = []
    added: list[Arc] = []
    steps = 0
    if _shift_case1(inst, u, v, w) is not None:
        chain = _chain(d, lab, u, v, up=True)
        witnesses = {y for y in d.out_set(v) if d.in_degree(y) == 1 and y != u}
        out_u = d.out_set(u)
        for x in sorted(d.out_set(v)):
            if x in out_u or x == u or not (witnesses - {x}):
                continue
            witnesses.discard(x)  # once moved, x no longer witnesses v
            i = 0
            while i + 1 < len(chain) and chain[i + 1] != x and not d.has_arc(chain[i + 1], x):
                i += 1
            removed.append((v, x))
            added.append((chain[i], x))
            steps += i + 1
    else:
        chain = _chain(d, lab, w, v, up=False)
        witnesses = {y for y in d.in_set(v) if d.out_degree(y) == 1 and y != w}
        in_w = d.in_set(w)
        for x in sorted(d.in_set(v)):
            if x in in_w or x == w or not (witnesses - {x}):
                continue
            witnesses.discard(x)
            i = 0
            while i + 1 < len(chain) and chain[i + 1] != x and not d.has_arc(x, chain[i + 1]):
                i += 1
            removed.append((x, v))
            added.append((x, chain[i]))
            steps += i + 1
    if not removed:
        return None
    return RuleTrace(5, removed_arcs=tuple(removed), added_arcs=tuple(added), applications=steps)


def decompose_shift_batch(inst: FadlInstance, trace: RuleTrace) -> list[tuple[tuple[int, int, int], int, int]]:
    """Replay a batched shift as single steps on a copy of ``inst``.

    Returns the steps as ``(path, x, case)`` and raises ``AssertionError`` if
    some step is not a legal single ShiftNeighbors application or if the
    replay does not end in the batched result.
    """
    work = inst.copy()
    d = work.digraph
    steps = []
    for (a, b), (c, e) in zip(trace.removed_arcs, trace.added_arcs):
        if a == c:  # case 2: (x, v) -> (x, t), walk down
            x, cur, target = a, b, e
            while cur != target:
                (nxt,) = d.out_set(cur)
                others = [y for y in d.in_set(cur) if d.out_degree(y) == 1 and y not in (nxt, x)]
                assert others, f"no witness for moving ({x},{cur})"
                path = (min(others), cur, nxt)
                assert shift_step_legal(work, path, x, 2), f"illegal step {path} for {x}"
                d.remove_arc(x, cur)
                d.add_arc(x, nxt)
                steps.append((path, x, 2))
                cur = nxt
        else:  # case 1: (v, x) -> (t, x), walk up
            cur, x, target = a, b, c
            while cur != target:
                (prv,) = d.in_set(cur)
                others = [y for y in d.out_set(cur) if d.in_degree(y) == 1 and y not in (prv, x)]
                assert others, f"no witness for moving ({cur},{x})"
                path = (prv, cur, min(others))
                assert shift_step_legal(work, path, x, 1), f"illegal step {path} for {x}"
                d.remove_arc(cur, x)
                d.add_arc(prv, x)
                steps.append((path, x, 1))
                cur = prv
    expected = inst.copy()
    apply_trace(expected, trace)
    assert expected.digraph == work.digraph, "batched shift differs from its single-step replay"
    return steps


# ---------------------------------------------------------------------------
# Rule 6: LabeledNeighbor
# ---------------------------------------------------------------------------


def plan_labeled_neighbor(inst: FadlInstance, arc: Arc) -> RuleTrace | None:
    d, lab = inst.digraph, inst.labeling
    v, u = arc
    if not d.has_arc(v, u):
        raise ValueError(f"arc ({v},{u}) is not in the digraph")
    if v in lab or u in lab:
        raise ValueError(f"LabeledNeighbor needs two unlabeled endpoints, got arc ({v},{u})")
    first = (
        d.in_degree(u) == 1
        and d.in_degree(v) == 1
        and any(lab.get(w) is MERGE for w in d.out_set(v))
    )
    second = (
        d.out_degree(u) == 1
        and d.out_degree(v) == 1
        and any(lab.get(w) is FORK for w in d.in_set(u))
    )
    assert not (first and second), "both LabeledNeighbor cases fired on one arc"
    if first:
        return RuleTrace(6, labels=((u, FORK),))
    if second:
        return RuleTrace(6, labels=((v, MERGE),))
    return None


def rule_labeled_neighbor(inst: FadlInstance, arc: Arc, inplace: bool = False) -> RuleOutcome:
    if inst.budget < 0:
        return _refuted(inst)
    return _commit(inst, plan_labeled_neighbor(inst, arc), inplace)


def find_labeled_neighbor_at(inst: FadlInstance, y: int) -> Arc | None:
    """An arc incident to ``y`` on which LabeledNeighbor changes something."""
    d, lab = inst.digraph, inst.labeling
    if not d.is_alive(y) or y in lab:
        return None
    hits = [u for u in d.out_set(y) if u not in lab and plan_labeled_neighbor(inst, (y, u)) is not None]
    if hits:
        return (y, min(hits))
    hits = [v for v in d.in_set(y) if v not in lab and plan_labeled_neighbor(inst, (v, y)) is not None]
    if hits:
        return (min(hits), y)
    return None


# ---------------------------------------------------------------------------
# Rule 7: RemoveArcs
# ---------------------------------------------------------------------------


def plan_remove_arcs(inst: FadlInstance, arc: Arc) -> RuleTrace | None:
    lab = inst.labeling
    v, u = arc
    if not inst.digraph.has_arc(v, u):
        raise ValueError(f"arc ({v},{u}) is not in the digraph")
    lv, lu = lab.get(v), lab.get(u)
    if lv is None or lu is None:
        raise ValueError(f"RemoveArcs needs two labeled endpoints, got arc ({v},{u})")
    if lv is FORK and lu is MERGE:
        return RuleTrace(7, removed_arcs=(arc,))
    if lv is MERGE and lu is FORK:
        return RuleTrace(7, removed_arcs=(arc,), k_delta=-1)
    return None


def rule_remove_arcs(inst: FadlInstance, arc: Arc, inplace: bool = False) -> RuleOutcome:
    if inst.budget < 0:
        return _refuted(inst)
    return _commit(inst, plan_remove_arcs(inst, arc), inplace)


def find_remove_arc_at(inst: FadlInstance, y: int) -> Arc | None:
    d, lab = inst.digraph, inst.labeling
    ly = lab.get(y)
    if ly is None or not d.is_alive(y):
        return None
    other = ly.other
    outs = [u for u in d.out_set(y) if lab.get(u) is other]
    if outs:
        return (y, min(outs))
    ins = [v for v in d.in_set(y) if lab.get(v) is other]
    if ins:
        return (min(ins), y)
    return None


def plan_remove_arcs_at(inst: FadlInstance, y: int) -> RuleTrace | None:
    """Every RemoveArcs application at ``y`` at once.

    RemoveArcs is safe regardless of which other rules apply, so clearing all
    label-conflicting arcs incident to ``y`` in one step is equivalent to
    applying the rule to each of them in turn.
    """
    d, lab = inst.digraph, inst.labeling
    ly = lab.get(y)
    if ly is None or not d.is_alive(y):
        return None
    other = ly.other
    arcs = [(y, u) for u in d.out_set(y) if lab.get(u) is other]
    arcs += [(v, y) for v in d.in_set(y) if lab.get(v) is other]
    if not arcs:
        return None
    arcs.sort()
    paid = sum(1 for a, _ in arcs if lab[a] is MERGE)
    return RuleTrace(7, removed_arcs=tuple(arcs), k_delta=-paid, applications=len(arcs))


# ---------------------------------------------------------------------------
# Rule 8: RemoveSinks
# ---------------------------------------------------------------------------


def plan_remove_sinks(inst: FadlInstance, v: int, literal: bool = False) -> RuleTrace | None:
    """Remove a labeled source or sink whose neighbourhood is fully labeled.

    A source labeled Merge with out-degree > 1 (dually a sink labeled Fork
    with in-degree > 1) forces deletions at the vertex itself, so removing it
    can turn a no-instance into a yes-instance; such vertices are kept.
    ``literal=True`` drops that guard and is only meant for demonstrating
    the failure.
    """
    d, lab = inst.digraph, inst.labeling
    if not d.is_alive(v) or v not in lab:
        return None
    outs, ins = d.out_set(v), d.in_set(v)
    if ins and outs:
        return None
    if any(u not in lab for u in outs) or any(u not in lab for u in ins):
        return None
    lv = lab[v]
    removable = False
    if not ins and not any(lab[u] is FORK and d.in_degree(u) > 1 for u in outs):
        removable = literal or not (lv is MERGE and len(outs) > 1)
    if not removable and not outs and not any(lab[u] is MERGE and d.out_degree(u) > 1 for u in ins):
        removable = literal or not (lv is FORK and len(ins) > 1)
    if not removable:
        return None
    incident = tuple(sorted([(v, u) for u in outs] + [(u, v) for u in ins]))
    return RuleTrace(8, removed_arcs=incident, removed_vertices=(v,))


def rule_remove_sinks(inst: FadlInstance, v: int, inplace: bool = False) -> RuleOutcome:
    if inst.budget < 0:
        return _refuted(inst)
    return _commit(inst, plan_remove_sinks(inst, v), inplace)


# ---------------------------------------------------------------------------
# Exhaustive scan (independent of the incremental driver)
# ---------------------------------------------------------------------------


def _all_break_cycles(d: Digraph) -> list[list[Arc]]:
    cycles = {}
    for v in d:
        for forward in (False, True):
            cyc = _walk_cycle(d, v, forward)
            if cyc is not None:
                cycles[(forward, frozenset(cyc))] = cyc
    return list(cycles.values())


def _all_shift_paths(d: Digraph) -> Iterator[tuple[int, int, int]]:
    seen = set()
    for v in d:
        if d.in_degree(v) == 1:
            (u,) = d.in_set(v)
            for w in sorted(d.out_set(v)):
                seen.add((u, v, w))
        if d.out_degree(v) == 1:
            (w,) = d.out_set(v)
            for u in sorted(d.in_set(v)):
                seen.add((u, v, w))
    return iter(sorted(seen))


def shift_potential(inst: FadlInstance) -> int:
    """Number of pairs ``((u, v, w), x)`` for which one ShiftNeighbors step applies."""
    d = inst.digraph
    total = 0
    for u, v, w in _all_shift_paths(d):
        if u == w:
            continue
        for x in d.out_set(v):
            if shift_step_legal(inst, (u, v, w), x, 1):
                total += 1
        for x in d.in_set(v):
            if shift_step_legal(inst, (u, v, w), x, 2):
                total += 1
    return total


def progress_measure(inst: FadlInstance) -> tuple[int, int, int, int, int]:
    """(unlabeled vertices, vertices, arcs, budget, shift potential)."""
    d = inst.digraph
    unlabeled = sum(1 for v in d if v not in inst.labeling)
    return (unlabeled, d.num_vertices(), d.num_arcs(), inst.budget, shift_potential(inst))


def find_applicable(inst: FadlInstance) -> tuple[int, object] | None:
    """First ``(rule, site)`` in rule order that would change ``inst``.

    Scans every candidate site through the public ``rule_*`` functions. Used
    to validate fixed points; deliberately shares nothing with the worklist
    bookkeeping of the kernelizer. ``(1, None)`` means the instance is refuted.
    """
    if rule_lower_bound(inst).kind is Outcome.TRIVIAL_NO:
        return (1, None)
    d, lab = inst.digraph, inst.labeling
    for v in d:
        if v not in lab and rule_set_label(inst, v).changed:
            return (2, v)
    for v in d:
        if rule_dissolve(inst, v).changed:
            return (3, v)
    for cyc in _all_break_cycles(d):
        if rule_break_cycle(inst, cyc).changed:
            return (4, cyc)
    for path in _all_shift_paths(d):
        if rule_shift_neighbors(inst, path).changed:
            return (5, path)
    for arc in d.arcs():
        if arc[0] not in lab and arc[1] not in lab and rule_labeled_neighbor(inst, arc).changed:
            return (6, arc)
    for arc in d.arcs():
        if arc[0] in lab and arc[1] in lab and rule_remove_arcs(inst, arc).changed:
            return (7, arc)
    for v in d:
        if rule_remove_sinks(inst, v).changed:
            return (8, v)
    return None


def apply_rule(inst: FadlInstance, rule: int, site: object, inplace: bool = False) -> RuleOutcome:
    """Dispatch by rule number."""
    if rule == 1:
        return rule_lower_bound(inst)
    fn = {
        2: rule_set_label,
        3: rule_dissolve,
        4: rule_break_cycle,
        5: rule_shift_neighbors,
        6: rule_labeled_neighbor,
        7: rule_remove_arcs,
        8: rule_remove_sinks,
    }[rule]
    return fn(inst, site, inplace=inplace)
