"""Plant a funnel, hide a few noise arcs in it, and let the kernel find them.

Run: python demos/kernelize_planted.py
"""
import time

from funnelkernel import GenSpec, from_fads, gen_planted, kernelize, solve_branch_and_bound, verify_solution

for n, k in ((200, 2), (2000, 5), (20000, 8)):
    planted = gen_planted(GenSpec(n, int(1.5 * n), k, 0.5, seed=n))
    start = time.perf_counter()
    report = kernelize(from_fads(planted))
    elapsed = time.perf_counter() - start
    fired = {name: c for name, c in report.rule_counts.items() if c}
    print(f"n={n} m={planted.digraph.num_arcs()} k={k}: {elapsed:.2f} s, rules {fired}")
    kernel = report.instance
    print(f"  kernel has {kernel.digraph.num_vertices()} vertices, {kernel.digraph.num_arcs()} arcs, budget {kernel.budget}")
    for check in report.audit.checks:
        print(f"  audit {check.name}: {check.observed} <= {check.limit}")
    res = solve_branch_and_bound(kernel, optimize=True)
    print(f"  kernel optimum {res.optimum}; plant used {planted.planted_count} noise arcs")
    original = solve_branch_and_bound(from_fads(planted), optimize=True)
    print(f"  original optimum {original.optimum}, certificate valid: {verify_solution(from_fads(planted), original.solution)}")
