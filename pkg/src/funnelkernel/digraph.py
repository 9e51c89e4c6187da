"""Loop-free, parallel-arc-free digraphs with stable integer vertex ids.

Vertices are dense integers ``0 .. capacity-1``. Deleting a vertex leaves a
tombstone: the id stays reserved and is never handed out again, so ids held
in worklists elsewhere remain meaningful.
"""
from __future__ import annotations

import warnings
from collections import deque
from typing import Iterable, Iterator

Arc = tuple[int, int]


class Digraph:
    """Mutable directed graph with hashed in/out adjacency.

    Degree reads are O(1). Iteration helpers that promise an order
    (``vertices``, ``arcs``, ``successors``, ``predecessors``) return
    ascending ids.
    """

    __slots__ = ("_out", "_in", "_alive", "_n_live", "_m")

    def __init__(self, n: int = 0) -> None:
        self._out: list[set[int]] = [set() for _ in range(n)]
        self._in: list[set[int]] = [set() for _ in range(n)]
        self._alive: list[bool] = [True] * n
        self._n_live = n
        self._m = 0

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[Arc]) -> "Digraph":
        d = cls(n)
        for u, v in arcs:
            d.add_arc(u, v)
        return d

    # -- size ---------------------------------------------------------------

    @property
    def capacity(self) -> int:
        """Number of ids ever allocated, dead ones included."""
        return len(self._alive)

    def num_vertices(self) -> int:
        return self._n_live

    def num_arcs(self) -> int:
        return self._m

    def __len__(self) -> int:
        return self._n_live

    # -- queries --------------------------------------------------------------

    def is_alive(self, v: int) -> bool:
        return 0 <= v < len(self._alive) and self._alive[v]

    def vertices(self) -> list[int]:
        return [v for v, a in enumerate(self._alive) if a]

    def __iter__(self) -> Iterator[int]:
        return (v for v, a in enumerate(self._alive) if a)

    def arcs(self) -> list[Arc]:
        return [(u, v) for u in self for v in sorted(self._out[u])]

    def has_arc(self, u: int, v: int) -> bool:
        return 0 <= u < len(self._out) and v in self._out[u]

    def out_set(self, v: int) -> set[int]:
        """The live out-neighbour set of ``v``. Do not mutate it."""
        return self._out[v]

    def in_set(self, v: int) -> set[int]:
        """The live in-neighbour set of ``v``. Do not mutate it."""
        return self._in[v]

    def successors(self, v: int) -> list[int]:
        return sorted(self._out[v])

    def predecessors(self, v: int) -> list[int]:
        return sorted(self._in[v])

    def out_degree(self, v: int) -> int:
        return len(self._out[v])

    def in_degree(self, v: int) -> int:
        return len(self._in[v])

    # -- mutation -------------------------------------------------------------

    def add_vertex(self) -> int:
        self._out.append(set())
        self._in.append(set())
        self._alive.append(True)
        self._n_live += 1
        return len(self._alive) - 1

    def add_arc(self, u: int, v: int) -> None:
        if u == v:
            raise ValueError(f"self-loop ({u},{v}) not allowed")
        if not (self.is_alive(u) and self.is_alive(v)):
            raise ValueError(f"arc ({u},{v}) has an endpoint that is not a live vertex")
        if v in self._out[u]:
            raise ValueError(f"arc ({u},{v}) already present")
        self._out[u].add(v)
        self._in[v].add(u)
        self._m += 1

    def remove_arc(self, u: int, v: int) -> None:
        if not self.has_arc(u, v):
            raise KeyError(f"arc ({u},{v}) not present")
        self._out[u].discard(v)
        self._in[v].discard(u)
        self._m -= 1

    def remove_vertex(self, v: int) -> None:
        if not self.is_alive(v):
            raise KeyError(f"vertex {v} is not live")
        for w in self._out[v]:
            self._in[w].discard(v)
        for w in self._in[v]:
            self._out[w].discard(v)
        self._m -= len(self._out[v]) + len(self._in[v])
        self._out[v] = set()
        self._in[v] = set()
        self._alive[v] = False
        self._n_live -= 1

    # -- copies ---------------------------------------------------------------

    def copy(self) -> "Digraph":
        d = Digraph.__new__(Digraph)
        d._out = [set(s) for s in self._out]
        d._in = [set(s) for s in self._in]
        d._alive = list(self._alive)
        d._n_live = self._n_live
        d._m = self._m
        return d

    def reversed(self) -> "Digraph":
        d = self.copy()
        d._out, d._in = d._in, d._out
        return d

    def compacted(self) -> tuple["Digraph", dict[int, int]]:
        """Renumber live vertices to ``0..n-1`` preserving their order."""
        mapping = {v: i for i, v in enumerate(self)}
        d = Digraph(len(mapping))
        for u, v in self.arcs():
            d.add_arc(mapping[u], mapping[v])
        return d, mapping

    # -- comparison / debugging -------------------------------------------------

    def arc_set(self) -> frozenset[Arc]:
        return frozenset((u, v) for u in self for v in self._out[u])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Digraph):
            return NotImplemented
        return self._alive == other._alive and self._out == other._out

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Digraph(n={self._n_live}, m={self._m})"

    def validate(self) -> None:
        """Full scan of the structural invariants; raises AssertionError."""
        total = 0
        for v, alive in enumerate(self._alive):
            if not alive:
                assert not self._out[v] and not self._in[v], f"dead vertex {v} has arcs"
                continue
            assert v not in self._out[v], f"self-loop at {v}"
            for w in self._out[v]:
                assert self._alive[w], f"arc ({v},{w}) into dead vertex"
                assert v in self._in[w], f"arc ({v},{w}) missing from in-adjacency"
            for w in self._in[v]:
                assert v in self._out[w], f"arc ({w},{v}) missing from out-adjacency"
            total += len(self._out[v])
        assert total == self._m, f"arc count {self._m} != stored {total}"
        assert sum(self._alive) == self._n_live


def build_digraph(n: int, arcs: Iterable[Arc]) -> Digraph:
    """Build a digraph on ``n`` vertices.

    Self-loops and out-of-range endpoints raise ``ValueError``. Repeated
    pairs are collapsed and reported through a single ``UserWarning``.
    """
    if n < 0:
        raise ValueError("vertex count must be non-negative")
    d = Digraph(n)
    duplicates = 0
    for u, v in arcs:
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"arc ({u},{v}) out of range for n={n}")
        if u == v:
            raise ValueError(f"self-loop ({u},{v}) not allowed")
        if d.has_arc(u, v):
            duplicates += 1
            continue
        d.add_arc(u, v)
    if duplicates:
        warnings.warn(f"collapsed {duplicates} duplicate arc(s)", stacklevel=2)
    return d


def delete_arcs(d: Digraph, arcs: Iterable[Arc]) -> Digraph:
    """Return ``d - arcs`` as a new digraph; the vertex set is unchanged."""
    out = d.copy()
    for u, v in arcs:
        if not out.has_arc(u, v):
            raise KeyError(f"cannot delete arc ({u},{v}): not present")
        out.remove_arc(u, v)
    return out


def topological_order(d: Digraph) -> list[int] | None:
    """Kahn's algorithm, smallest ready id first; ``None`` if ``d`` has a cycle."""
    import heapq

    indeg = {v: d.in_degree(v) for v in d}
    ready = [v for v, k in indeg.items() if k == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for w in d.out_set(v):
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(ready, w)
    return order if len(order) == d.num_vertices() else None


def is_acyclic(d: Digraph) -> bool:
    indeg = [d.in_degree(v) for v in range(d.capacity)]
    stack = [v for v in d if indeg[v] == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        for w in d.out_set(v):
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    return seen == d.num_vertices()


def find_cycle(d: Digraph) -> list[int] | None:
    """Vertices of some directed cycle in order, or ``None`` if ``d`` is acyclic.

    Iterative depth-first search from ascending start ids, so the result is
    deterministic.
    """
    state = [0] * d.capacity   # 0 new, 1 on stack, 2 done
    for root in d:
        if state[root]:
            continue
        path = [root]
        iters = [iter(d.successors(root))]
        state[root] = 1
        while path:
            w = next(iters[-1], None)
            if w is None:
                state[path.pop()] = 2
                iters.pop()
            elif state[w] == 1:
                return path[path.index(w):]
            elif state[w] == 0:
                state[w] = 1
                path.append(w)
                iters.append(iter(d.successors(w)))
    return None


def reachable_set(d: Digraph, sources: Iterable[int], direction: str = "forward") -> set[int]:
    """Vertices reachable from (``forward``) or reaching (``backward``) ``sources``."""
    if direction == "forward":
        nbrs = d.out_set
    elif direction == "backward":
        nbrs = d.in_set
    else:
        raise ValueError(f"direction must be 'forward' or 'backward', not {direction!r}")
    seen = set(sources)
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for w in nbrs(v):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def induced_subgraph(d: Digraph, keep: Iterable[int]) -> Digraph:
    """Subgraph induced by ``keep``; vertex ids are preserved, the rest are tombstoned."""
    keep = set(keep)
    sub = Digraph(d.capacity)
    for v in range(d.capacity):
        if v not in keep:
            sub.remove_vertex(v)
    for u in keep:
        for v in d.out_set(u):
            if v in keep:
                sub.add_arc(u, v)
    return sub
