"""FADS / FADL instances, solutions, and the conversions between them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .digraph import Arc, Digraph
from .funnel import FORK, MERGE, Label, is_funnel_labeling


@dataclass
class FadlInstance:
    """Digraph, partial labeling and budget. A negative budget means refuted."""

    digraph: Digraph
    labeling: dict[int, Label] = field(default_factory=dict)
    budget: int = 0

    def __post_init__(self) -> None:
        for v in self.labeling:
            if not self.digraph.is_alive(v):
                raise ValueError(f"labeled vertex {v} is not a live vertex")

    def copy(self) -> "FadlInstance":
        return FadlInstance(self.digraph.copy(), dict(self.labeling), self.budget)

    def key(self) -> tuple:
        """Hashable identity of the instance (arcs, labels, budget, live set)."""
        return (
            tuple(self.digraph),
            tuple(self.digraph.arcs()),
            tuple(sorted((v, lab.value) for v, lab in self.labeling.items())),
            self.budget,
        )


@dataclass
class FadsInstance:
    digraph: Digraph
    budget: int = 0

    def __post_init__(self) -> None:
        if self.budget < 0:
            raise ValueError("FADS budget must be non-negative")


@dataclass(frozen=True)
class Solution:
    """Arc-deletion set together with the complete labeling that certifies it."""

    deleted_arcs: frozenset[Arc]
    labeling: Mapping[int, Label]

    @property
    def size(self) -> int:
        return len(self.deleted_arcs)


def from_fads(inst: FadsInstance) -> FadlInstance:
    return FadlInstance(inst.digraph.copy(), {}, inst.budget)


def to_fads(inst: FadlInstance) -> FadsInstance:
    """Encode the labeling with ``k+2`` pendant sinks behind every Fork vertex
    and ``k+2`` pendant sources in front of every Merge vertex.

    Adds exactly ``2k+4`` vertices: first ``f_1..f_{k+2}``, then ``m_1..m_{k+2}``.
    """
    k = inst.budget
    if k < 0:
        raise ValueError("cannot encode a refuted (negative budget) instance; emit a trivial no-instance")
    d = inst.digraph.copy()
    forks = sorted(v for v, lab in inst.labeling.items() if lab is FORK)
    merges = sorted(v for v, lab in inst.labeling.items() if lab is MERGE)
    sinks = [d.add_vertex() for _ in range(k + 2)]
    sources = [d.add_vertex() for _ in range(k + 2)]
    for v in forks:
        for f in sinks:
            d.add_arc(v, f)
    for v in merges:
        for m in sources:
            d.add_arc(m, v)
    return FadsInstance(d, k)


def verify_solution(inst: FadlInstance, sol: Solution) -> bool:
    """Certificate check: budget, arcs exist, labeling extends and is complete,
    and the labeling is a funnel labeling of ``D - S``."""
    d = inst.digraph
    if len(sol.deleted_arcs) > inst.budget:
        return False
    if not all(d.has_arc(u, v) for u, v in sol.deleted_arcs):
        return False
    if any(sol.labeling.get(v) is not lab for v, lab in inst.labeling.items()):
        return False
    if set(sol.labeling) != set(d):
        return False
    reduced = d.copy()
    for u, v in sol.deleted_arcs:
        reduced.remove_arc(u, v)
    return is_funnel_labeling(reduced, sol.labeling)
