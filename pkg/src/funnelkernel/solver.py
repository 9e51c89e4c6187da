"""Exact FADL solvers and maximum branchings.

Three independent exact methods are provided:

* :func:`solve_bruteforce` enumerates arc subsets by increasing size and
  tests each remainder for a labeling extension. It knows nothing about
  labeling costs and serves as the reference oracle on small inputs.
* :func:`solve_labelings` enumerates complete labelings extending the given
  one, pricing each with :func:`cost_for_labeling`.
* :func:`solve_branch_and_bound` branches on the labels of unlabeled
  vertices with SetLabel propagation and a degree-based lower bound.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Mapping

from .digraph import Arc, Digraph, induced_subgraph
from .funnel import FORK, MERGE, Label, has_labeling_extension
from .instance import FadlInstance, Solution, verify_solution
from .rules import lower_bound_contribution, set_label_choice


# ---------------------------------------------------------------------------
# Maximum branchings (unweighted)
# ---------------------------------------------------------------------------


def strongly_connected_components(d: Digraph) -> list[list[int]]:
    """Tarjan's algorithm, iterative. Components come out in reverse topological order."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in d:
        if root in index:
            continue
        work = [(root, iter(sorted(d.out_set(root))))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(d.out_set(w)))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    x = stack.pop()
                    on_stack.discard(x)
                    comp.append(x)
                    if x == v:
                        break
                comps.append(sorted(comp))
    return comps


@dataclass(frozen=True)
class Branching:
    """A maximum out-branching: every vertex except the roots has one parent arc."""

    arcs: frozenset[Arc]
    roots: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.arcs)


def max_branching(d: Digraph) -> Branching:
    """Maximum-cardinality out-branching.

    Each source component of the condensation needs one root and every other
    vertex can be given a parent, so a BFS forest from one root per source
    component is optimal.
    """
    comps = strongly_connected_components(d)
    comp_of = {v: i for i, comp in enumerate(comps) for v in comp}
    has_entry = [False] * len(comps)
    for u, v in d.arcs():
        if comp_of[u] != comp_of[v]:
            has_entry[comp_of[v]] = True
    roots = tuple(sorted(comps[i][0] for i in range(len(comps)) if not has_entry[i]))
    seen = set(roots)
    frontier = list(roots)
    arcs = set()
    while frontier:
        nxt = []
        for v in frontier:
            for w in sorted(d.out_set(v)):
                if w not in seen:
                    seen.add(w)
                    arcs.add((v, w))
                    nxt.append(w)
        frontier = nxt
    return Branching(frozenset(arcs), roots)


def branching_count(d: Digraph) -> int:
    """Size of a maximum branching without building it: ``n`` minus the
    number of source components of the condensation."""
    comps = strongly_connected_components(d)
    comp_of = {v: i for i, comp in enumerate(comps) for v in comp}
    entered = {comp_of[v] for u, v in d.arcs() if comp_of[u] != comp_of[v]}
    return d.num_vertices() - (len(comps) - len(entered))


def max_branching_size(d: Digraph) -> tuple[int, Branching]:
    b = max_branching(d)
    return b.size, b


def max_in_branching(d: Digraph) -> Branching:
    """Maximum in-branching (every non-root vertex keeps exactly one out-arc)."""
    b = max_branching(d.reversed())
    return Branching(frozenset((v, u) for u, v in b.arcs), b.roots)


# ---------------------------------------------------------------------------
# Cost of a fixed labeling
# ---------------------------------------------------------------------------


def _check_complete(d: Digraph, labeling: Mapping[int, Label]) -> None:
    missing = [v for v in d if v not in labeling]
    if missing:
        raise ValueError(f"labeling is incomplete; unlabeled vertices {missing[:10]}")


def labeling_cost(d: Digraph, labeling: Mapping[int, Label]) -> int:
    """Cost of a complete labeling, computed without materialising the arc set."""
    _check_complete(d, labeling)
    forks = [v for v in d if labeling[v] is FORK]
    merges = [v for v in d if labeling[v] is MERGE]
    back = sum(1 for u, v in d.arcs() if labeling[u] is MERGE and labeling[v] is FORK)
    df = induced_subgraph(d, forks)
    dm = induced_subgraph(d, merges)
    return back + (df.num_arcs() - branching_count(df)) + (dm.num_arcs() - branching_count(dm.reversed()))


def cost_for_labeling(d: Digraph, labeling: Mapping[int, Label]) -> tuple[int, frozenset[Arc]]:
    """Fewest arc deletions making the complete ``labeling`` a funnel labeling,
    with an arc set realising it.

    Every Merge->Fork arc goes, the Fork side keeps a maximum branching, the
    Merge side keeps a maximum in-branching, and Fork->Merge arcs always stay.
    """
    _check_complete(d, labeling)
    forks = [v for v in d if labeling[v] is FORK]
    merges = [v for v in d if labeling[v] is MERGE]
    back = {(u, v) for u, v in d.arcs() if labeling[u] is MERGE and labeling[v] is FORK}
    df = induced_subgraph(d, forks)
    dm = induced_subgraph(d, merges)
    drop = back | (df.arc_set() - max_branching(df).arcs) | (dm.arc_set() - max_in_branching(dm).arcs)
    return len(drop), frozenset(drop)


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


class Status(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass
class SolveResult:
    status: Status
    solution: Solution | None = None
    optimum: int | None = None   # minimum deletion count when it was determined
    nodes: int = 0

    @property
    def is_yes(self) -> bool:
        return self.status is Status.YES


def _finish(inst: FadlInstance, best: tuple[int, dict] | None, nodes: int, optimize: bool) -> SolveResult:
    if best is None or best[0] > inst.budget:
        return SolveResult(Status.NO, None, best[0] if (best and optimize) else None, nodes)
    cost, full = best
    size, arcs = cost_for_labeling(inst.digraph, full)
    assert size == cost
    sol = Solution(arcs, dict(full))
    assert verify_solution(inst, sol)
    return SolveResult(Status.YES, sol, cost if optimize else None, nodes)


# ---------------------------------------------------------------------------
# Brute force over arc subsets
# ---------------------------------------------------------------------------


def _mask_extension(n: int, outm: list[int], inm: list[int], fork0: int, merge0: int) -> int | None:
    """Bitmask version of the closure test. Returns the Merge mask of the
    canonical extension or ``None``; vertices are ``0..n-1``."""
    left = (1 << n) - 1
    while left:
        ready = 0
        x = left
        while x:
            low = x & -x
            v = low.bit_length() - 1
            if not inm[v] & left:
                ready |= low
            x ^= low
        if not ready:
            return None
        left &= ~ready
    merge = merge0
    fork = fork0
    for v in range(n):
        if inm[v] & (inm[v] - 1):
            merge |= 1 << v
        if outm[v] & (outm[v] - 1):
            fork |= 1 << v
    frontier = merge
    while frontier:
        grow = 0
        x = frontier
        while x:
            low = x & -x
            grow |= outm[low.bit_length() - 1]
            x ^= low
        frontier = grow & ~merge
        merge |= frontier
    frontier = fork
    while frontier:
        grow = 0
        x = frontier
        while x:
            low = x & -x
            grow |= inm[low.bit_length() - 1]
            x ^= low
        frontier = grow & ~fork
        fork |= frontier
    if merge & fork:
        return None
    return merge


def solve_bruteforce(inst: FadlInstance, optimize: bool = False, max_arcs: int | None = None) -> SolveResult:
    """Try every arc subset of size 0, 1, ..., k (or up to |A| with ``optimize``)
    and accept the first whose removal leaves an extendable labeling.

    Running time is exponential in the arc count; pass ``max_arcs`` to refuse
    larger inputs with ``ValueError``.
    """
    d, lab, k = inst.digraph, inst.labeling, inst.budget
    arcs = d.arcs()
    if max_arcs is not None and len(arcs) > max_arcs:
        raise ValueError(f"brute force limited to {max_arcs} arcs, got {len(arcs)}")
    if k < 0 and not optimize:
        return SolveResult(Status.NO)
    verts = d.vertices()
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    outm0 = [0] * n
    inm0 = [0] * n
    for u, v in arcs:
        outm0[idx[u]] |= 1 << idx[v]
        inm0[idx[v]] |= 1 << idx[u]
    fork0 = sum(1 << idx[v] for v, l in lab.items() if l is FORK)
    merge0 = sum(1 << idx[v] for v, l in lab.items() if l is MERGE)
    pairs = [(idx[u], idx[v]) for u, v in arcs]
    limit = len(arcs) if optimize else min(k, len(arcs))
    nodes = 0
    for size in range(limit + 1):
        for subset in itertools.combinations(range(len(arcs)), size):
            nodes += 1
            outm = outm0[:]
            inm = inm0[:]
            for j in subset:
                a, b = pairs[j]
                outm[a] &= ~(1 << b)
                inm[b] &= ~(1 << a)
            merge = _mask_extension(n, outm, inm, fork0, merge0)
            if merge is None:
                continue
            if size > k:
                return SolveResult(Status.NO, None, size if optimize else None, nodes)
            full = {v: (MERGE if merge >> i & 1 else FORK) for i, v in enumerate(verts)}
            sol = Solution(frozenset(arcs[j] for j in subset), full)
            return SolveResult(Status.YES, sol, size if optimize else None, nodes)
    return SolveResult(Status.NO, None, None, nodes)


# ---------------------------------------------------------------------------
# Enumeration of labelings with partial-cost pruning
# ---------------------------------------------------------------------------


def _partial_cost(d: Digraph, labeling: Mapping[int, Label]) -> int:
    """Deletions forced among labeled vertices alone.

    Counts Merge->Fork arcs between labeled vertices plus, for each labeled
    Fork vertex, surplus Fork in-arcs and for each labeled Merge vertex
    surplus out-arcs into labeled Merge vertices. Every term stays valid
    when more vertices are labeled, so it never exceeds the final cost.
    """
    cost = 0
    for v, lv in labeling.items():
        if lv is FORK:
            fin = sum(1 for u in d.in_set(v) if labeling.get(u) is FORK)
            if fin > 1:
                cost += fin - 1
            cost += sum(1 for u in d.in_set(v) if labeling.get(u) is MERGE)
        else:
            mout = sum(1 for w in d.out_set(v) if labeling.get(w) is MERGE)
            if mout > 1:
                cost += mout - 1
    return cost


def solve_labelings(inst: FadlInstance, optimize: bool = False, max_free: int | None = None) -> SolveResult:
    """Depth-first enumeration of labelings of the unlabeled vertices.

    Branches are cut when the forced partial cost already exceeds the best
    cost found (or the budget when not optimizing).
    """
    d, lab, k = inst.digraph, inst.labeling, inst.budget
    if k < 0 and not optimize:
        return SolveResult(Status.NO)
    free = sorted((v for v in d if v not in lab), key=lambda v: (-(d.in_degree(v) + d.out_degree(v)), v))
    if max_free is not None and len(free) > max_free:
        raise ValueError(f"labeling enumeration limited to {max_free} free vertices, got {len(free)}")
    current = dict(lab)
    best: list = [None]
    cap = [k if not optimize else d.num_arcs()]
    nodes = 0

    def dfs(i: int) -> bool:
        nonlocal nodes
        nodes += 1
        if _partial_cost(d, current) > cap[0]:
            return False
        if i == len(free):
            c = labeling_cost(d, current)
            if c <= cap[0] and (best[0] is None or c < best[0][0]):
                best[0] = (c, dict(current))
                if not optimize:
                    return True
                cap[0] = c - 1
            return False
        v = free[i]
        for choice in (FORK, MERGE):
            current[v] = choice
            if dfs(i + 1):
                return True
        del current[v]
        return False

    dfs(0)
    return _finish(inst, best[0], nodes, optimize)


# ---------------------------------------------------------------------------
# Branch and bound
# ---------------------------------------------------------------------------


def _lb(d: Digraph, labeling: Mapping[int, Label]) -> int:
    total = sum(lower_bound_contribution(d.in_degree(v), d.out_degree(v), labeling.get(v)) for v in d)
    return max((total + 1) // 2, _partial_cost(d, labeling))


def _propagate(d: Digraph, labeling: dict, k_eff: int) -> None:
    """Apply SetLabel until nothing changes (labels only, graph untouched)."""
    changed = True
    while changed:
        changed = False
        for v in d:
            if v in labeling:
                continue
            lab = set_label_choice(d, labeling, k_eff, v)
            if lab is not None:
                labeling[v] = lab
                changed = True


class NodeLimit(Exception):
    pass


def solve_branch_and_bound(inst: FadlInstance, optimize: bool = False, node_limit: int = 1_000_000) -> SolveResult:
    """Branch on labels of unlabeled vertices, most constrained first.

    Each node propagates SetLabel with the remaining slack as its budget and
    prunes on ``max(ceil(LB/2), partial cost)``. Returns ``UNKNOWN`` if the
    node limit is reached.
    """
    d, k = inst.digraph, inst.budget
    if k < 0 and not optimize:
        return SolveResult(Status.NO)
    root_ext = has_labeling_extension(d, inst.labeling)
    if root_ext is not None:
        return _finish(inst, (0, root_ext), 1, optimize)
    if k == 0 and not optimize:
        return SolveResult(Status.NO, None, None, 1)
    best: list = [None]
    cap = [k if not optimize else d.num_arcs()]
    nodes = 0

    def dfs(labeling: dict) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > node_limit:
            raise NodeLimit
        labeling = dict(labeling)
        _propagate(d, labeling, cap[0])
        if _lb(d, labeling) > cap[0]:
            return False
        free = [v for v in d if v not in labeling]
        if not free:
            c = labeling_cost(d, labeling)
            if c <= cap[0] and (best[0] is None or c < best[0][0]):
                best[0] = (c, labeling)
                if not optimize:
                    return True
                cap[0] = c - 1
            return False
        v = max(free, key=lambda x: (min(d.in_degree(x), d.out_degree(x)), d.in_degree(x) + d.out_degree(x), -x))
        for choice in (FORK, MERGE):
            labeling[v] = choice
            if dfs(labeling):
                return True
        return False

    try:
        dfs(dict(inst.labeling))
    except NodeLimit:
        if best[0] is not None and not optimize:
            return _finish(inst, best[0], nodes, False)
        return SolveResult(Status.UNKNOWN, None, None, nodes)
    return _finish(inst, best[0], nodes, optimize)


def solve(inst: FadlInstance, method: str = "bnb", optimize: bool = False) -> SolveResult:
    if method == "bnb":
        return solve_branch_and_bound(inst, optimize)
    if method == "labelings":
        return solve_labelings(inst, optimize)
    if method == "brute":
        return solve_bruteforce(inst, optimize)
    raise ValueError(f"unknown solver method {method!r}")
