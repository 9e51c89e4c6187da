"""Exhaustive reduction-rule application, size audits, and the FADS kernel.

The driver keeps one FIFO worklist of candidate vertices per rule and always
serves the lowest-numbered non-empty list, so a rule only fires once every
lower-numbered rule has run dry. LowerBound is tracked as a running sum of
per-vertex contributions and re-checked after every change.

A change at vertex ``y`` can only affect rule sites at ``y`` or, when the
degree class of ``y`` (0, 1, or at least 2 on either side) or its label
changes, at neighbours of ``y``. ShiftNeighbors also depends on the exact
out-set of the predecessor of its middle vertex (and the in-set of its
successor), so removing an arc ``(a, b)`` re-queues exactly the middle
vertices of the paths ``a -> y -> b``.

By default ShiftNeighbors is applied in batched form: all moves available at
one middle vertex are composed into a single trace, each arc travelling as
far along the in-degree-one (out-degree-one) chain as repeated single steps
would take it. ``shift_mode="single"`` applies one elementary move at a time.
RemoveArcs, whose safety does not depend on the other rules, likewise clears
all conflicting arcs at a vertex in one step.
"""
from __future__ import annotations

import time
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable

from .digraph import Digraph
from .funnel import FORK, MERGE
from .instance import FadlInstance, FadsInstance, from_fads, to_fads
from .rules import (
    RULE_NAMES,
    RuleTrace,
    apply_trace,
    find_applicable,
    find_break_cycle_at,
    find_labeled_neighbor_at,
    find_shift_at,
    lower_bound_contribution,
    plan_break_cycle,
    plan_dissolve,
    plan_labeled_neighbor,
    plan_remove_sinks,
    plan_set_label,
    plan_shift_batch,
    plan_shift_neighbors,
)

# Canonical refuted instance (a D_0 on five vertices with budget 0).
CANONICAL_NO_ARCS = ((1, 0), (2, 0), (0, 3), (0, 4))


def canonical_no_instance() -> FadsInstance:
    return FadsInstance(Digraph.from_arcs(5, CANONICAL_NO_ARCS), 0)


@dataclass
class BoundCheck:
    name: str
    limit: int
    observed: int

    @property
    def passed(self) -> bool:
        return self.observed <= self.limit


@dataclass
class SizeAudit:
    n: int
    m: int
    k: int
    both_degree_big: int
    unlabeled_count: int
    labeled_count: int
    checks: list[BoundCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "k": self.k,
            "both_degree_big": self.both_degree_big,
            "unlabeled_count": self.unlabeled_count,
            "labeled_count": self.labeled_count,
            "checks": [
                {"name": c.name, "limit": c.limit, "observed": c.observed, "passed": c.passed}
                for c in self.checks
            ],
        }


@dataclass
class KernelReport:
    instance: FadlInstance | None   # None means trivial no
    rule_counts: dict[str, int]
    audit: SizeAudit | None
    elapsed: float

    @property
    def trivial_no(self) -> bool:
        return self.instance is None


def unlabeled_low_degree_bound(k: int) -> int:
    return (5 * k * k + 5 * k) * (k ** 3 + 3 * k * k + 2 * k)


def vertex_bound(k: int) -> int:
    """Explicit vertex bound assembled from the per-class size bounds."""
    unlabeled = 2 * k + unlabeled_low_degree_bound(k)
    near_unlabeled = 2 * (k + 1) * unlabeled
    return unlabeled + 2 * k + near_unlabeled + 16 * k


def size_audit(inst: FadlInstance, check_fixed_point: bool = True) -> SizeAudit:
    """Evaluate the explicit kernel-size bounds on a reduced instance.

    Raises ``ValueError`` if some rule still applies (unless
    ``check_fixed_point`` is off).
    """
    if check_fixed_point:
        hit = find_applicable(inst)
        if hit is not None:
            raise ValueError(f"size audit needs a fixed point; rule {RULE_NAMES[hit[0]]} applies at {hit[1]!r}")
    d, lab, k = inst.digraph, inst.labeling, inst.budget
    unlabeled = [v for v in d if v not in lab]
    both_big = sum(1 for v in d if d.in_degree(v) > 1 and d.out_degree(v) > 1)
    labeled_heavy = sum(
        1
        for v in lab
        if (lab[v] is FORK and d.in_degree(v) > 1) or (lab[v] is MERGE and d.out_degree(v) > 1)
    )
    low = sum(1 for v in unlabeled if min(d.in_degree(v), d.out_degree(v)) <= 1)
    max_in = max((d.in_degree(v) for v in unlabeled), default=0)
    max_out = max((d.out_degree(v) for v in unlabeled), default=0)
    checks = [
        BoundCheck("both_degree_big <= 2k", 2 * k, both_big),
        BoundCheck("labeled_heavy <= 2k", 2 * k, labeled_heavy),
        BoundCheck("unlabeled_max_in <= k+1", k + 1, max_in),
        BoundCheck("unlabeled_max_out <= k+1", k + 1, max_out),
        BoundCheck("unlabeled_low_degree <= (5k^2+5k)(k^3+3k^2+2k)", unlabeled_low_degree_bound(k), low),
        BoundCheck("vertices <= vertex_bound(k)", vertex_bound(k), d.num_vertices()),
    ]
    return SizeAudit(
        n=d.num_vertices(),
        m=d.num_arcs(),
        k=k,
        both_degree_big=both_big,
        unlabeled_count=len(unlabeled),
        labeled_count=len(lab),
        checks=checks,
    )


def _cls(x: int) -> int:
    return x if x < 2 else 2


VERTEX_RULES = (2, 3, 4, 5, 6, 8)


class _Engine:
    """Worklist state for one kernelization run over a private instance.

    Rules 2-6 and 8 keep FIFO worklists of vertices. RemoveArcs keeps a
    worklist of arcs instead: an arc can only become label-conflicting when
    one of its endpoints is labeled or when it is created between two labeled
    vertices, and pending conflicts are cleared together in one step.
    """

    def __init__(self, inst: FadlInstance, observer: Callable | None = None, shift_mode: str = "batch") -> None:
        if shift_mode not in ("batch", "single"):
            raise ValueError(f"shift_mode must be 'batch' or 'single', not {shift_mode!r}")
        self.batch_shift = shift_mode == "batch"
        self.inst = inst
        self.d = inst.digraph
        self.lab = inst.labeling
        self.observer = observer
        self.counts: Counter = Counter()
        self.queues = {r: deque() for r in VERTEX_RULES}
        self.queued = {r: set() for r in VERTEX_RULES}
        self.conflicts: set[tuple[int, int]] = set()
        self.contrib = [0] * self.d.capacity
        self.lb_total = 0
        # unlabeled vertices bucketed by max(in, out), for SetLabel's k-dependent conditions
        self.bucket: dict[int, set[int]] = {}
        self.bucket_of: dict[int, int] = {}
        d = self.d
        for v in d:
            c = lower_bound_contribution(d.in_degree(v), d.out_degree(v), self.lab.get(v))
            self.contrib[v] = c
            self.lb_total += c
            if v not in self.lab:
                self._bucket_set(v)
        for r in VERTEX_RULES:
            for v in d:
                self._push(r, v)
        for v in self.lab:
            self._scan_conflicts(v)

    # -- bookkeeping ------------------------------------------------------------

    def _push(self, r: int, v: int) -> None:
        if v not in self.queued[r]:
            self.queued[r].add(v)
            self.queues[r].append(v)

    def _push_all(self, v: int) -> None:
        for r in VERTEX_RULES:
            if v not in self.queued[r]:
                self.queued[r].add(v)
                self.queues[r].append(v)

    def _scan_conflicts(self, v: int) -> None:
        lab = self.lab
        other = lab[v].other
        for u in self.d.out_set(v):
            if lab.get(u) is other:
                self.conflicts.add((v, u))
        for u in self.d.in_set(v):
            if lab.get(u) is other:
                self.conflicts.add((u, v))

    def _bucket_set(self, v: int) -> None:
        self._bucket_drop(v)
        key = max(self.d.in_degree(v), self.d.out_degree(v))
        self.bucket.setdefault(key, set()).add(v)
        self.bucket_of[v] = key

    def _bucket_drop(self, v: int) -> None:
        key = self.bucket_of.pop(v, None)
        if key is not None:
            self.bucket[key].discard(v)

    def refuted(self) -> bool:
        k = self.inst.budget
        return k < 0 or self.lb_total > 2 * k

    # -- applying a change ----------------------------------------------------------

    def commit(self, trace: RuleTrace) -> None:
        d, lab = self.d, self.lab
        removed = set(trace.removed_vertices)
        touched = set()
        for a, b in trace.removed_arcs:
            touched.add(a)
            touched.add(b)
        for a, b in trace.added_arcs:
            touched.add(a)
            touched.add(b)
        for v, _ in trace.labels:
            touched.add(v)
        before = {
            y: (_cls(d.in_degree(y)), _cls(d.out_degree(y)), lab.get(y))
            for y in touched
        }
        if self.observer is not None:
            self.observer(self.inst, trace)
        apply_trace(self.inst, trace)
        self.counts[trace.name] += trace.applications

        for v in removed:
            self.lb_total -= self.contrib[v]
            self.contrib[v] = 0
            self._bucket_drop(v)

        # ShiftNeighbors compares the out-set of a middle vertex with that of its
        # predecessor (in-sets with its successor): removing (a, b) can only
        # enable it at middle vertices y with a -> y -> b.
        for a, b in trace.removed_arcs:
            if a in removed or b in removed:
                continue
            outs, ins = d.out_set(a), d.in_set(b)
            small, big = (outs, ins) if len(outs) <= len(ins) else (ins, outs)
            for y in small:
                if y in big:
                    self._push(5, y)

        for v, _ in trace.labels:
            self._scan_conflicts(v)
        for a, b in trace.added_arcs:
            la, lb = lab.get(a), lab.get(b)
            if la is not None and lb is not None and la is not lb:
                self.conflicts.add((a, b))

        for y in touched:
            if y in removed:
                continue
            c = lower_bound_contribution(d.in_degree(y), d.out_degree(y), lab.get(y))
            self.lb_total += c - self.contrib[y]
            self.contrib[y] = c
            if y in lab:
                self._bucket_drop(y)
            else:
                self._bucket_set(y)
            self._push_all(y)
            if before[y] != (_cls(d.in_degree(y)), _cls(d.out_degree(y)), lab.get(y)):
                for x in d.out_set(y):
                    self._push_all(x)
                for x in d.in_set(y):
                    self._push_all(x)

        if trace.k_delta < 0:
            k = self.inst.budget
            # SetLabel's "degree > k+1" conditions newly hold at degree k+2
            for x in list(self.bucket.get(k + 2, ())):
                self._push(2, x)

    # -- site handlers ----------------------------------------------------------------

    def plan_at(self, r: int, v: int) -> RuleTrace | None:
        d, lab, inst = self.d, self.lab, self.inst
        if not d.is_alive(v):
            return None
        if r == 2:
            return None if v in lab else plan_set_label(inst, v)
        if r == 3:
            return plan_dissolve(inst, v)
        if r == 4:
            cyc = find_break_cycle_at(inst, v)
            return None if cyc is None else plan_break_cycle(inst, cyc)
        if r == 5:
            if self.batch_shift:
                return plan_shift_batch(inst, v)
            path = find_shift_at(inst, v)
            return None if path is None else plan_shift_neighbors(inst, path)
        if r == 6:
            arc = find_labeled_neighbor_at(inst, v)
            return None if arc is None else plan_labeled_neighbor(inst, arc)
        return plan_remove_sinks(inst, v)

    def plan_conflicts(self) -> RuleTrace | None:
        """One RemoveArcs step covering every pending conflicting arc."""
        d, lab = self.d, self.lab
        arcs = sorted(a for a in self.conflicts if d.has_arc(*a))
        self.conflicts.clear()
        if not arcs:
            return None
        paid = sum(1 for a, _ in arcs if lab[a] is MERGE)
        return RuleTrace(7, removed_arcs=tuple(arcs), k_delta=-paid, applications=len(arcs))

    def run(self) -> bool:
        """Apply rules to a fixed point. Returns False if the instance is refuted."""
        if self.refuted():
            self.counts[RULE_NAMES[1]] += 1
            return False
        queues, queued = self.queues, self.queued
        while True:
            trace = None
            for r in (2, 3, 4, 5, 6):
                if queues[r]:
                    break
            else:
                if self.conflicts:
                    r = 7
                elif queues[8]:
                    r = 8
                else:
                    return True
            if r == 7:
                trace = self.plan_conflicts()
            else:
                v = queues[r].popleft()
                queued[r].discard(v)
                trace = self.plan_at(r, v)
            if trace is None:
                continue
            self.commit(trace)
            if self.refuted():
                self.counts[RULE_NAMES[1]] += 1
                return False


def kernelize(
    inst: FadlInstance,
    observer: Callable | None = None,
    audit: bool = True,
    shift_mode: str = "batch",
) -> KernelReport:
    """Apply all reduction rules exhaustively, lowest-numbered rule first.

    ``observer(instance, trace)`` is called right before each rule
    application, with the instance still in its pre-application state.
    """
    start = time.perf_counter()
    work = inst.copy()
    engine = _Engine(work, observer, shift_mode)
    ok = engine.run()
    counts = {name: engine.counts.get(name, 0) for name in RULE_NAMES.values()}
    if not ok:
        return KernelReport(None, counts, None, time.perf_counter() - start)
    report_audit = size_audit(work, check_fixed_point=False) if audit else None
    return KernelReport(work, counts, report_audit, time.perf_counter() - start)


def kernelize_fads(inst: FadsInstance, audit: bool = True) -> tuple[FadsInstance, KernelReport]:
    """FADS -> FADL -> kernel -> FADS. A refuted input yields the canonical no-instance."""
    report = kernelize(from_fads(inst), audit=audit)
    if report.trivial_no:
        return canonical_no_instance(), report
    return to_fads(report.instance), report
