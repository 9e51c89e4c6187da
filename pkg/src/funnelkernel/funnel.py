"""Funnel recognition, funnel labelings and forbidden-subgraph witnesses."""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

from .digraph import Digraph, induced_subgraph, is_acyclic, reachable_set


class Label(enum.Enum):
    FORK = "F"
    MERGE = "M"

    def __repr__(self) -> str:
        return f"Label.{self.name}"

    @property
    def other(self) -> "Label":
        return Label.MERGE if self is Label.FORK else Label.FORK


FORK = Label.FORK
MERGE = Label.MERGE

#: Partial map from vertex id to label.
Labeling = dict


def fork_set(labeling: Mapping[int, Label]) -> set[int]:
    return {v for v, lab in labeling.items() if lab is FORK}


def merge_set(labeling: Mapping[int, Label]) -> set[int]:
    return {v for v, lab in labeling.items() if lab is MERGE}


@dataclass(frozen=True)
class ForbiddenWitness:
    """An occurrence of a forbidden digraph D_k: two arcs into ``merge_vertex``,
    a path from it to ``fork_vertex``, and two arcs out of ``fork_vertex``."""

    merge_vertex: int
    fork_vertex: int
    path: tuple[int, ...]
    in_pair: tuple[int, int]
    out_pair: tuple[int, int]

    @property
    def k(self) -> int:
        return len(self.path) - 1

    def arcs(self) -> list[tuple[int, int]]:
        a, b = self.in_pair
        c, e = self.out_pair
        arcs = [(a, self.merge_vertex), (b, self.merge_vertex)]
        arcs += list(zip(self.path, self.path[1:]))
        arcs += [(self.fork_vertex, c), (self.fork_vertex, e)]
        return arcs

    def vertices(self) -> list[int]:
        return [*self.in_pair, *self.path, *self.out_pair]

    def is_valid_in(self, d: Digraph) -> bool:
        vs = self.vertices()
        if len(set(vs)) != len(vs):
            return False
        if self.path[0] != self.merge_vertex or self.path[-1] != self.fork_vertex:
            return False
        return all(d.has_arc(u, v) for u, v in self.arcs())


def is_funnel(d: Digraph) -> bool:
    """A DAG in which no vertex of out-degree >= 2 is reachable from a vertex
    of in-degree >= 2."""
    if not is_acyclic(d):
        return False
    merges = [v for v in d if d.in_degree(v) >= 2]
    return all(d.out_degree(v) < 2 for v in reachable_set(d, merges, "forward"))


def has_labeling_extension(d: Digraph, labeling: Mapping[int, Label]) -> dict[int, Label] | None:
    """Complete funnel labeling of ``d`` extending ``labeling``, or ``None``.

    Vertices forced to Merge (in-degree >= 2, pre-labeled Merge, and everything
    they reach) get Merge; all other vertices get Fork. This canonical choice
    is valid whenever any extension exists.
    """
    if not is_acyclic(d):
        return None
    merge_seed = [v for v in d if d.in_degree(v) >= 2 or labeling.get(v) is MERGE]
    fork_seed = [v for v in d if d.out_degree(v) >= 2 or labeling.get(v) is FORK]
    merge_forced = reachable_set(d, merge_seed, "forward")
    fork_forced = reachable_set(d, fork_seed, "backward")
    if merge_forced & fork_forced:
        return None
    return {v: (MERGE if v in merge_forced else FORK) for v in d}


def is_funnel_labeling(d: Digraph, labeling: Mapping[int, Label]) -> bool:
    """Check the partition certificate: Fork side an out-forest, Merge side an
    in-forest, no Merge->Fork arc, and every live vertex labeled."""
    if set(labeling) != set(d):
        return False
    forks = [v for v in d if labeling[v] is FORK]
    merges = [v for v in d if labeling[v] is MERGE]
    for v in forks:
        if sum(1 for u in d.in_set(v) if labeling[u] is FORK) > 1:
            return False
    for v in merges:
        outs = d.out_set(v)
        if any(labeling[w] is FORK for w in outs):
            return False
        if len(outs) > 1:
            return False
    return is_acyclic(induced_subgraph(d, forks)) and is_acyclic(induced_subgraph(d, merges))


def find_forbidden_witness(d: Digraph) -> ForbiddenWitness | None:
    """Shortest merge-to-fork path certifying that the DAG ``d`` is not a funnel.

    Multi-source BFS from all in-degree >= 2 vertices in ascending order; the
    first vertex of out-degree >= 2 reached ends the path.
    """
    if not is_acyclic(d):
        raise ValueError("forbidden-subgraph witnesses are only defined for acyclic digraphs")
    sources = [v for v in d if d.in_degree(v) >= 2]
    parent: dict[int, int | None] = {v: None for v in sources}
    queue = deque(sources)
    while queue:
        v = queue.popleft()
        if d.out_degree(v) >= 2:
            path = [v]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            path.reverse()
            head, tail = path[0], path[-1]
            ins = d.predecessors(head)
            outs = d.successors(tail)
            return ForbiddenWitness(
                merge_vertex=head,
                fork_vertex=tail,
                path=tuple(path),
                in_pair=(ins[0], ins[1]),
                out_pair=(outs[0], outs[1]),
            )
        for w in d.successors(v):
            if w not in parent:
                parent[w] = v
                queue.append(w)
    return None


def is_local_funnel(d: Digraph, vertices: Iterable[int]) -> bool:
    """Whether the subgraph induced by ``vertices`` is a local funnel of ``d``:
    a single-source funnel that splits into a Fork part of global in-degree
    <= 1 and a Merge part of global out-degree <= 1 with no Merge->Fork arc."""
    h_vertices = set(vertices)
    h = induced_subgraph(d, h_vertices)
    if not is_funnel(h):
        return False
    if sum(1 for v in h if h.in_degree(v) == 0) != 1:
        return False
    forced: dict[int, Label] = {}
    for v in h:
        big_in = d.in_degree(v) > 1
        big_out = d.out_degree(v) > 1
        if big_in and big_out:
            return False
        if big_in:
            forced[v] = MERGE
        elif big_out:
            forced[v] = FORK
    return has_labeling_extension(h, forced) is not None
