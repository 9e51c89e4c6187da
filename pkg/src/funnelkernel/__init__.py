"""Funnel arc deletion: recognition, reduction rules, kernelization and exact solvers."""
from .digraph import Digraph, build_digraph, delete_arcs, induced_subgraph, is_acyclic, reachable_set, topological_order
from .funnel import (
    FORK,
    MERGE,
    ForbiddenWitness,
    Label,
    find_forbidden_witness,
    has_labeling_extension,
    is_funnel,
    is_funnel_labeling,
    is_local_funnel,
)
from .generator import GenSpec, PlantedInstance, SplitMix64, gen_forbidden, gen_planted, gen_random_digraph, gen_random_fadl, gen_random_funnel
from .instance import FadlInstance, FadsInstance, Solution, from_fads, to_fads, verify_solution
from .kernelizer import KernelReport, SizeAudit, kernelize, kernelize_fads, size_audit
from .solver import (
    Branching,
    SolveResult,
    Status,
    cost_for_labeling,
    max_branching_size,
    solve_branch_and_bound,
    solve_bruteforce,
    solve_labelings,
)

__version__ = "0.1.0"
