"""Watch the reduction rules rewrite a small instance one trace at a time.

Run: python demos/rules_step_by_step.py
"""
from funnelkernel import Digraph, FadlInstance, kernelize
from funnelkernel.rules import progress_measure

# Nine vertices that need exactly two deletions to become a funnel.
arcs = [(0, 1), (3, 1), (1, 2), (1, 4), (4, 5), (8, 5), (5, 6), (5, 7)]
for budget in (1, 2):
    inst = FadlInstance(Digraph.from_arcs(9, arcs), {}, budget)
    print(f"--- budget {budget}: start measure {progress_measure(inst)}")

    def narrate(before, trace):
        print(f"  {trace.describe():60s} measure before {progress_measure(before)}")

    report = kernelize(inst, observer=narrate)
    if report.trivial_no:
        print("  refuted: the remaining budget cannot pay for the forced deletions")
    else:
        k = report.instance
        print(f"  kernel: {k.digraph.num_vertices()} vertices, {k.digraph.num_arcs()} arcs, budget {k.budget}")
