"""Recognizing funnels three ways and reading the obstruction when it fails.

Run: python demos/recognize_funnels.py
"""
from funnelkernel import (
    FORK,
    MERGE,
    Digraph,
    find_forbidden_witness,
    gen_forbidden,
    has_labeling_extension,
    is_funnel,
)


def show_labeling(labeling):
    return " ".join(f"{v}:{lab.name[0]}" for v, lab in sorted(labeling.items()))


# Two sources both feeding two sinks: dense, yet every source-to-sink path
# still owns its own arc.
bipartite = Digraph.from_arcs(4, [(0, 2), (0, 3), (1, 2), (1, 3)])
print("complete bipartite 2x2 is a funnel:", is_funnel(bipartite))
print("  certifying labeling:", show_labeling(has_labeling_extension(bipartite, {})))

# The smallest obstruction family: two arcs in, a path, two arcs out.
for k in (0, 1, 4):
    d = gen_forbidden(k)
    wit = find_forbidden_witness(d)
    print(f"D_{k}: funnel={is_funnel(d)}  in={wit.in_pair} path={wit.path} out={wit.out_pair}")

# A partial labeling can make an otherwise fine digraph infeasible.
arc = Digraph.from_arcs(2, [(0, 1)])
print("arc 0->1 with 0 Merge and 1 Fork extends:", has_labeling_extension(arc, {0: MERGE, 1: FORK}) is not None)
print("arc 0->1 with 0 Fork extends to:", show_labeling(has_labeling_extension(arc, {0: FORK})))
