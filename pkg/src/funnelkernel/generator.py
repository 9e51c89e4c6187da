"""Seeded instance generators.

All randomness comes from :class:`SplitMix64`, a 64-bit generator defined
entirely by three constants, so any language can reproduce the instances:

    state = (state + 0x9E3779B97F4A7C15) mod 2^64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    return z ^ (z >> 31)

``below(b)`` draws uniformly from ``0..b-1`` by rejecting raw outputs at or
above the largest multiple of ``b`` not exceeding 2^64, then taking ``r mod b``.
Shuffles are Fisher-Yates from the last index down.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .digraph import Arc, Digraph
from .funnel import FORK, MERGE, Label, is_funnel_labeling
from .instance import FadlInstance, FadsInstance

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % bound

    def random(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


@dataclass(frozen=True)
class GenSpec:
    n: int
    m: int
    k_plant: int = 0
    fork_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if self.m < 0 or self.m > self.n * (self.n - 1):
            raise ValueError(f"m must lie in 0..n(n-1) = {self.n * (self.n - 1)}, got {self.m}")
        if self.k_plant < 0:
            raise ValueError("k_plant must be non-negative")
        if not (0.0 <= self.fork_fraction <= 1.0):
            raise ValueError("fork_fraction must lie in [0, 1]")


@dataclass
class PlantedInstance(FadsInstance):
    """A planted FADS instance. Deleting ``noise_arcs`` leaves a funnel."""

    noise_arcs: tuple[Arc, ...] = ()
    funnel_labeling: dict[int, Label] = field(default_factory=dict)

    @property
    def planted_count(self) -> int:
        return len(self.noise_arcs)


def gen_forbidden(k: int) -> Digraph:
    """The forbidden digraph D_k.

    Ids: ``u1=0, u2=1``, path ``v_0..v_k = 2..k+2``, ``w1=k+3, w2=k+4``.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    v0, vk = 2, k + 2
    arcs = [(0, v0), (1, v0)]
    arcs += [(2 + i, 3 + i) for i in range(k)]
    arcs += [(vk, k + 3), (vk, k + 4)]
    return Digraph.from_arcs(k + 5, arcs)


def _sample_absent(rng: SplitMix64, d: Digraph, tails: list[int], heads: list[int], count: int) -> list[Arc]:
    """Up to ``count`` distinct absent non-loop pairs from ``tails x heads``,
    uniformly without replacement."""
    if count <= 0 or not tails or not heads:
        return []
    head_set = set(heads)
    total = len(tails) * len(heads) - sum(1 for t in tails if t in head_set)
    present = sum(1 for t in tails for h in d.out_set(t) if h in head_set)
    free = total - present
    if free <= 0:
        return []
    if count * 3 >= free:
        pool = [(t, h) for t in tails for h in heads if t != h and not d.has_arc(t, h)]
        rng.shuffle(pool)
        return pool[:count]
    chosen: list[Arc] = []
    seen: set[Arc] = set()
    while len(chosen) < count:
        t = tails[rng.below(len(tails))]
        h = heads[rng.below(len(heads))]
        if t == h or d.has_arc(t, h) or (t, h) in seen:
            continue
        seen.add((t, h))
        chosen.append((t, h))
    return chosen


def gen_random_funnel(spec: GenSpec) -> tuple[Digraph, dict[int, Label]]:
    """Random funnel with its funnel labeling.

    The first ``ceil(fork_fraction * n)`` vertices of a random permutation form
    the Fork side. Every non-first Fork vertex may take a parent among earlier
    Fork vertices, every non-last Merge vertex may point at a later Merge
    vertex; a random subset of these forest arcs is kept (at most ``m``) and
    the rest of the arc budget is filled with random Fork->Merge arcs.
    """
    rng = SplitMix64(spec.seed)
    n = spec.n
    order = list(range(n))
    rng.shuffle(order)
    n_fork = math.ceil(spec.fork_fraction * n)
    forks, merges = order[:n_fork], order[n_fork:]
    candidates: list[Arc] = []
    for i in range(1, len(forks)):
        candidates.append((forks[rng.below(i)], forks[i]))
    for i in range(len(merges) - 1):
        j = i + 1 + rng.below(len(merges) - i - 1)
        candidates.append((merges[i], merges[j]))
    rng.shuffle(candidates)
    d = Digraph(n)
    for u, v in candidates[: spec.m]:
        d.add_arc(u, v)
    for u, v in _sample_absent(rng, d, forks, merges, spec.m - d.num_arcs()):
        d.add_arc(u, v)
    labeling = {v: FORK for v in forks}
    labeling.update({v: MERGE for v in merges})
    assert is_funnel_labeling(d, labeling)
    return d, labeling


def gen_planted(spec: GenSpec) -> PlantedInstance:
    """A random funnel plus ``k_plant`` noise arcs, budget ``k_plant``.

    If fewer absent pairs exist than requested, all of them are added and
    ``noise_arcs`` records how many were actually planted.
    """
    d, labeling = gen_random_funnel(spec)
    rng = SplitMix64(spec.seed ^ 0x5DEECE66D)
    verts = list(range(spec.n))
    noise = _sample_absent(rng, d, verts, verts, spec.k_plant)
    for u, v in noise:
        d.add_arc(u, v)
    return PlantedInstance(d, spec.k_plant, tuple(sorted(noise)), labeling)


def gen_random_digraph(n: int, m: int, seed: int) -> Digraph:
    """Uniform digraph with ``m`` distinct non-loop arcs."""
    if m > n * (n - 1):
        raise ValueError("too many arcs requested")
    rng = SplitMix64(seed)
    d = Digraph(n)
    verts = list(range(n))
    for u, v in _sample_absent(rng, d, verts, verts, m):
        d.add_arc(u, v)
    return d


def gen_random_fadl(n: int, m: int, k: int, label_prob: float, seed: int) -> FadlInstance:
    """Random digraph with each vertex labeled (Fork or Merge, equally
    likely) with probability ``label_prob``."""
    d = gen_random_digraph(n, m, seed)
    rng = SplitMix64(seed ^ 0xA5A5A5A5A5A5A5A5)
    labeling = {}
    for v in range(n):
        if rng.random() < label_prob:
            labeling[v] = FORK if rng.below(2) == 0 else MERGE
    return FadlInstance(d, labeling, k)
