"""Shared fixtures and independent oracles for the test suite."""
from __future__ import annotations

import itertools

from funnelkernel.digraph import Digraph
from funnelkernel.funnel import FORK, MERGE
from funnelkernel.generator import SplitMix64, gen_random_digraph, gen_random_fadl
from funnelkernel.instance import FadlInstance, FadsInstance, from_fads
from funnelkernel.rules import apply_trace, decompose_shift_batch
from funnelkernel.solver import solve_bruteforce

# Small fixtures -----------------------------------------------------

# D_1: u1=0, u2=1, v0=2, v1=3, w1=4, w2=5
D1_ARCS = [(0, 2), (1, 2), (2, 3), (3, 4), (3, 5)]

# Nine-vertex DAG that is not a funnel; deleting (v,u) and (u,w) fixes it.
# a=0, v=1, b=2, c=3, u=4, w=5, d=6, e=7, f=8
NINE_V, NINE_U, NINE_W = 1, 4, 5
NINE_ARCS = [(0, 1), (3, 1), (1, 2), (1, 4), (4, 5), (8, 5), (5, 6), (5, 7)]
NINE_FIX = frozenset({(NINE_V, NINE_U), (NINE_U, NINE_W)})

# ShiftNeighbors chain: r=0 -> u=1 -> v=2 -> w=3, and v -> x=4.
SHIFT_R, SHIFT_U, SHIFT_V, SHIFT_W, SHIFT_X = 0, 1, 2, 3, 4
SHIFT_ARCS = [(0, 1), (1, 2), (2, 3), (2, 4)]


def d1_pattern() -> Digraph:
    return Digraph.from_arcs(6, D1_ARCS)


def nine_vertex() -> Digraph:
    return Digraph.from_arcs(9, NINE_ARCS)


def shift_chain() -> Digraph:
    return Digraph.from_arcs(5, SHIFT_ARCS)


def cycle(n: int) -> Digraph:
    return Digraph.from_arcs(n, [(i, (i + 1) % n) for i in range(n)])


# Decision oracle -------------------------------------------------------------

_DECISIONS: dict = {}


def decision(inst: FadlInstance | FadsInstance) -> bool:
    """Arc-subset brute force, memoized on the instance identity."""
    fadl = inst if isinstance(inst, FadlInstance) else from_fads(inst)
    if fadl.budget < 0:
        return False
    key = fadl.key()
    if key not in _DECISIONS:
        _DECISIONS[key] = solve_bruteforce(fadl).is_yes
    return _DECISIONS[key]


# Seeded instance families -----------------------------------------------------


def fuzz_fadl(seed: int, n_max: int = 8, m_max: int = 14, k_max: int = 3) -> FadlInstance:
    """FADL instance with n <= n_max, m <= m_max, k <= k_max; the label density
    itself is drawn per seed so both sparse and dense labelings occur."""
    rng = SplitMix64(seed)
    n = 1 + rng.below(n_max)
    m = rng.below(min(m_max, n * (n - 1)) + 1)
    k = rng.below(k_max + 1)
    label_prob = rng.random()
    return gen_random_fadl(n, m, k, label_prob, seed)


def fuzz_fads(seed: int, n_max: int = 10, m_max: int = 18, k_max: int = 3) -> FadsInstance:
    rng = SplitMix64(seed ^ 0x1234_5678)
    n = 1 + rng.below(n_max)
    m = rng.below(min(m_max, n * (n - 1)) + 1)
    k = rng.below(k_max + 1)
    return FadsInstance(gen_random_digraph(n, m, seed), k)


def all_digraphs(n: int):
    """Every loop-free digraph on vertices ``0..n-1``."""
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    for mask in range(1 << len(pairs)):
        yield Digraph.from_arcs(n, [p for i, p in enumerate(pairs) if mask >> i & 1])


def all_labelings(vertices):
    """Every partial labeling of ``vertices``."""
    for choice in itertools.product((None, FORK, MERGE), repeat=len(vertices)):
        yield {v: lab for v, lab in zip(vertices, choice) if lab is not None}


# Single-step replay ------------------------------------------------------------


def elementary_states(before: FadlInstance, trace) -> list[FadlInstance]:
    """Instances after each elementary application composed into ``trace``.

    Batched ShiftNeighbors traces are replayed as their single steps;
    batched RemoveArcs traces remove one arc at a time. Any other trace is
    a single application.
    """
    states = []
    if trace.rule == 5 and trace.applications > 1:
        work = before.copy()
        for (u, v, w), x, case in decompose_shift_batch(before, trace):
            if case == 1:
                work.digraph.remove_arc(v, x)
                work.digraph.add_arc(u, x)
            else:
                work.digraph.remove_arc(x, v)
                work.digraph.add_arc(x, w)
            states.append(work.copy())
    elif trace.rule == 7 and len(trace.removed_arcs) > 1:
        work = before.copy()
        for a, b in trace.removed_arcs:
            work.digraph.remove_arc(a, b)
            if work.labeling[a] is MERGE:
                work.budget -= 1
            states.append(work.copy())
    else:
        work = before.copy()
        apply_trace(work, trace)
        states.append(work)
    final = before.copy()
    apply_trace(final, trace)
    assert states[-1].key() == final.key(), "elementary replay does not reproduce the trace"
    return states
