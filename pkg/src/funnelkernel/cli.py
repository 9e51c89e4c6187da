"""Command-line interface and the plain-text instance and solution formats.

Instance files are UTF-8 text with LF line endings. Each line is one of::

    c <comment>
    p <fads|fadl> <n> <m> <k>
    l <v> <F|M>          (fadl files only)
    a <u> <v>

There is exactly one ``p`` line and it is the first non-comment line. Vertex
ids are 1-based. Blank lines are ignored on input. On output, labels and
arcs are sorted and only the header and data lines are written.

Solution files use the same line kinds: an optional ``s <STATUS>`` line,
comments, ``a u v`` for every deleted arc and ``l v F|M`` for the complete
labeling that certifies the deletion.

Exit codes: 0 success or yes, 1 no or reject, 2 input error, 3 unknown.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .digraph import Digraph, find_cycle
from .funnel import FORK, MERGE, Label, find_forbidden_witness, has_labeling_extension
from .generator import GenSpec, gen_forbidden, gen_planted, gen_random_digraph
from .instance import FadlInstance, FadsInstance, Solution, from_fads, verify_solution
from .kernelizer import KernelReport, canonical_no_instance, kernelize, kernelize_fads, size_audit
from .solver import Status, solve_branch_and_bound, solve_bruteforce, solve_labelings

EXIT_OK = 0
EXIT_NO = 1
EXIT_INPUT = 2
EXIT_UNKNOWN = 3

LABEL_CHAR = {FORK: "F", MERGE: "M"}
CHAR_LABEL = {"F": FORK, "M": MERGE}

Instance = FadsInstance | FadlInstance


class FormatError(ValueError):
    """Malformed instance or solution text; ``line`` is 1-based (0 for end of input)."""

    def __init__(self, line: int, message: str) -> None:
        where = f"line {line}" if line else "end of input"
        super().__init__(f"{where}: {message}")
        self.line = line


# ---------------------------------------------------------------------------
# Instance format
# ---------------------------------------------------------------------------


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(lineno, f"{what} must be an integer, got {tok!r}") from None


def _vertex(tok: str, n: int, lineno: int) -> int:
    v = _int(tok, lineno, "vertex id")
    if not 1 <= v <= n:
        raise FormatError(lineno, f"vertex id {v} out of range 1..{n}")
    return v - 1


def _data_lines(text: str):
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r").strip()
        if not line or line == "c" or line.startswith("c "):
            continue
        yield lineno, line.split()


def parse_instance(text: str) -> Instance:
    """Parse instance text into a ``FadsInstance`` or a ``FadlInstance``.

    Raises ``FormatError`` with the offending line number on malformed input:
    a missing or repeated header, duplicate arcs, self-loops, labels in a fads
    file, ids out of range, or an arc count that differs from the header.
    """
    header = None
    arcs: set[tuple[int, int]] = set()
    labels: dict[int, Label] = {}
    d: Digraph | None = None
    for lineno, toks in _data_lines(text):
        kind = toks[0]
        if header is None:
            if kind != "p":
                raise FormatError(lineno, "the first non-comment line must be the 'p' header")
            if len(toks) != 5 or toks[1] not in ("fads", "fadl"):
                raise FormatError(lineno, "header must read 'p <fads|fadl> <n> <m> <k>'")
            n, m, k = (_int(t, lineno, w) for t, w in zip(toks[2:], ("n", "m", "k")))
            if n < 0 or m < 0 or k < 0:
                raise FormatError(lineno, "n, m and k must be non-negative")
            header = (toks[1], n, m, k)
            d = Digraph(n)
            continue
        problem, n = header[0], header[1]
        if kind == "p":
            raise FormatError(lineno, "second 'p' header")
        if kind == "a":
            if len(toks) != 3:
                raise FormatError(lineno, "arc line must read 'a <u> <v>'")
            u, v = _vertex(toks[1], n, lineno), _vertex(toks[2], n, lineno)
            if u == v:
                raise FormatError(lineno, f"self-loop at vertex {u + 1}")
            if (u, v) in arcs:
                raise FormatError(lineno, f"duplicate arc {u + 1} -> {v + 1}")
            arcs.add((u, v))
            d.add_arc(u, v)
        elif kind == "l":
            if problem != "fadl":
                raise FormatError(lineno, "label lines are only allowed in fadl files")
            if len(toks) != 3 or toks[2] not in CHAR_LABEL:
                raise FormatError(lineno, "label line must read 'l <v> <F|M>'")
            v = _vertex(toks[1], n, lineno)
            if v in labels:
                raise FormatError(lineno, f"vertex {v + 1} labeled twice")
            labels[v] = CHAR_LABEL[toks[2]]
        else:
            raise FormatError(lineno, f"unknown line kind {kind!r}")
    if header is None:
        raise FormatError(0, "missing 'p' header")
    problem, n, m, k = header
    if len(arcs) != m:
        raise FormatError(0, f"header announces {m} arcs but {len(arcs)} were given")
    if problem == "fads":
        return FadsInstance(d, k)
    return FadlInstance(d, labels, k)


def emit_instance(inst: Instance, comments: Sequence[str] = ()) -> str:
    """Canonical text of an instance. Dead vertex ids are compacted away."""
    if isinstance(inst, FadlInstance):
        if inst.budget < 0:
            raise ValueError("a refuted instance has no file form; emit the canonical no-instance")
        problem, labeling = "fadl", inst.labeling
    else:
        problem, labeling = "fads", {}
    d, mapping = inst.digraph.compacted()
    lines = [f"c {c}" for c in comments]
    lines.append(f"p {problem} {d.num_vertices()} {d.num_arcs()} {inst.budget}")
    for v in sorted(labeling):
        lines.append(f"l {mapping[v] + 1} {LABEL_CHAR[labeling[v]]}")
    lines += [f"a {u + 1} {v + 1}" for u, v in d.arcs()]
    return "\n".join(lines) + "\n"


def emit_dot(inst: Instance) -> str:
    """Plain DOT export: one node per vertex (1-based) and one edge per arc."""
    labeling = inst.labeling if isinstance(inst, FadlInstance) else {}
    lines = ["digraph instance {"]
    for v in inst.digraph:
        attr = f' [label="{v + 1} {LABEL_CHAR[labeling[v]]}"]' if v in labeling else ""
        lines.append(f"  {v + 1}{attr};")
    lines += [f"  {u + 1} -> {v + 1};" for u, v in inst.digraph.arcs()]
    lines.append("}")
    return "\n".join(lines) + "\n"


def as_fadl(inst: Instance) -> FadlInstance:
    return inst if isinstance(inst, FadlInstance) else from_fads(inst)


# ---------------------------------------------------------------------------
# Solution format
# ---------------------------------------------------------------------------


def parse_solution(text: str, n: int) -> Solution:
    """Parse solution text for an instance with ``n`` vertices."""
    deleted: set[tuple[int, int]] = set()
    labels: dict[int, Label] = {}
    for lineno, toks in _data_lines(text):
        kind = toks[0]
        if kind == "s":
            continue
        if kind == "a":
            if len(toks) != 3:
                raise FormatError(lineno, "arc line must read 'a <u> <v>'")
            u, v = _vertex(toks[1], n, lineno), _vertex(toks[2], n, lineno)
            if (u, v) in deleted:
                raise FormatError(lineno, f"duplicate arc {u + 1} -> {v + 1}")
            deleted.add((u, v))
        elif kind == "l":
            if len(toks) != 3 or toks[2] not in CHAR_LABEL:
                raise FormatError(lineno, "label line must read 'l <v> <F|M>'")
            v = _vertex(toks[1], n, lineno)
            if v in labels:
                raise FormatError(lineno, f"vertex {v + 1} labeled twice")
            labels[v] = CHAR_LABEL[toks[2]]
        else:
            raise FormatError(lineno, f"unknown line kind {kind!r} in a solution file")
    return Solution(frozenset(deleted), labels)


def emit_solution_lines(sol: Solution) -> list[str]:
    lines = [f"a {u + 1} {v + 1}" for u, v in sorted(sol.deleted_arcs)]
    lines += [f"l {v + 1} {LABEL_CHAR[sol.labeling[v]]}" for v in sorted(sol.labeling)]
    return lines


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


@dataclass
class CommandResult:
    """Exit code, text report lines, and the mirrored machine-readable report."""

    code: int
    lines: list[str] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def render(self, as_json: bool) -> str:
        if as_json:
            return json.dumps(self.data, sort_keys=True, indent=2) + "\n"
        return "".join(line + "\n" for line in self.lines)


def _input_error(path: str, err: Exception) -> CommandResult:
    msg = f"{path}: {err}"
    return CommandResult(EXIT_INPUT, [f"c error {msg}"], {"error": msg})


def _load(path: str) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def _write(path: str | os.PathLike, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _arc_list(arcs) -> list[list[int]]:
    return [[u + 1, v + 1] for u, v in sorted(arcs)]


def _label_dict(labeling) -> dict[str, str]:
    return {str(v + 1): LABEL_CHAR[labeling[v]] for v in sorted(labeling)}


def run_recognize(path: str, dot: str | None = None) -> CommandResult:
    try:
        inst = _load(path)
    except (OSError, ValueError) as err:
        return _input_error(path, err)
    if dot:
        _write(dot, emit_dot(inst))
    d = inst.digraph
    labeling = has_labeling_extension(d, {})
    if labeling is not None:
        lines = ["FUNNEL"] + [f"l {v + 1} {LABEL_CHAR[labeling[v]]}" for v in sorted(labeling)]
        return CommandResult(EXIT_OK, lines, {"funnel": True, "labeling": _label_dict(labeling)})
    cycle = find_cycle(d)
    if cycle is not None:
        ids = [v + 1 for v in cycle]
        return CommandResult(
            EXIT_NO,
            ["NOT-FUNNEL", "cycle " + " ".join(map(str, ids))],
            {"funnel": False, "cycle": ids},
        )
    wit = find_forbidden_witness(d)
    assert wit is not None, "an acyclic non-funnel always contains a forbidden path"
    path_ids = [v + 1 for v in wit.path]
    ins = [v + 1 for v in wit.in_pair]
    outs = [v + 1 for v in wit.out_pair]
    lines = [
        "NOT-FUNNEL",
        f"witness k {wit.k}",
        "in " + " ".join(map(str, ins)),
        "path " + " ".join(map(str, path_ids)),
        "out " + " ".join(map(str, outs)),
    ]
    data = {"funnel": False, "witness": {"k": wit.k, "in": ins, "path": path_ids, "out": outs}}
    return CommandResult(EXIT_NO, lines, data)


def _kernel_report_lines(report: KernelReport) -> tuple[list[str], dict]:
    lines = [f"c rule {name} {count}" for name, count in report.rule_counts.items()]
    data: dict = {"rule_counts": dict(report.rule_counts)}
    if report.audit is not None:
        a = report.audit
        lines.append(f"c audit n {a.n} m {a.m} k {a.k}")
        for c in a.checks:
            lines.append(f"c audit {c.name} {c.observed} <= {c.limit} {'PASS' if c.passed else 'FAIL'}")
        data["audit"] = {**a.as_dict(), "passed": a.passed}
    return lines, data


def run_kernelize(path: str, output: str | None, audit: bool = False, dot: str | None = None) -> CommandResult:
    """Kernelize one file. ``audit`` additionally re-scans the kernel for any
    applicable rule and turns a failed size bound into exit code 1."""
    try:
        inst = _load(path)
    except (OSError, ValueError) as err:
        return _input_error(path, err)
    if isinstance(inst, FadsInstance):
        kernel, report = kernelize_fads(inst)
        out_text = emit_instance(kernel)
    else:
        report = kernelize(inst)
        if report.trivial_no:
            no = canonical_no_instance()
            out_text = emit_instance(FadlInstance(no.digraph, {}, no.budget))
        else:
            out_text = emit_instance(report.instance)
    if output:
        _write(output, out_text)
    if dot:
        _write(dot, emit_dot(parse_instance(out_text)))
    rule_lines, data = _kernel_report_lines(report)
    d0 = inst.digraph
    head = [f"c input n {d0.num_vertices()} m {d0.num_arcs()} k {inst.budget}"]
    data["input"] = {"n": d0.num_vertices(), "m": d0.num_arcs(), "k": inst.budget}
    kernel_inst = parse_instance(out_text)
    kd = kernel_inst.digraph
    data["output"] = {"n": kd.num_vertices(), "m": kd.num_arcs(), "k": kernel_inst.budget}
    head.append(f"c output n {kd.num_vertices()} m {kd.num_arcs()} k {kernel_inst.budget}")
    if report.trivial_no:
        data["status"] = "NO"
        return CommandResult(EXIT_NO, ["s NO"] + head + rule_lines, data)
    code = EXIT_OK
    if audit:
        full = size_audit(report.instance, check_fixed_point=True)
        data["fixed_point"] = True
        if not full.passed:
            code = EXIT_NO
    elif report.audit is not None and not report.audit.passed:
        code = EXIT_NO
    data["status"] = "KERNEL"
    return CommandResult(code, ["s KERNEL"] + head + rule_lines, data)


ENGINES = ("brute", "labelings", "bnb")


def run_solve(
    path: str,
    engine: str = "bnb",
    optimize: bool = False,
    output: str | None = None,
    node_limit: int = 1_000_000,
    max_arcs: int | None = None,
    max_free: int | None = None,
) -> CommandResult:
    try:
        inst = _load(path)
    except (OSError, ValueError) as err:
        return _input_error(path, err)
    fadl = as_fadl(inst)
    try:
        if engine == "brute":
            res = solve_bruteforce(fadl, optimize, max_arcs=max_arcs)
        elif engine == "labelings":
            res = solve_labelings(fadl, optimize, max_free=max_free)
        elif engine == "bnb":
            res = solve_branch_and_bound(fadl, optimize, node_limit=node_limit)
        else:
            raise ValueError(f"unknown engine {engine!r}")
    except ValueError as err:
        lines = ["s UNKNOWN", f"c {err}"]
        return CommandResult(EXIT_UNKNOWN, lines, {"status": "UNKNOWN", "engine": engine, "reason": str(err)})
    status = res.status.name
    lines = [f"s {status}", f"c engine {engine}", f"c nodes {res.nodes}"]
    data: dict = {"status": status, "engine": engine, "nodes": res.nodes}
    if res.optimum is not None:
        lines.append(f"c optimum {res.optimum}")
        data["optimum"] = res.optimum
    if res.status is Status.YES:
        lines += emit_solution_lines(res.solution)
        data["deleted_arcs"] = _arc_list(res.solution.deleted_arcs)
        data["labeling"] = _label_dict(res.solution.labeling)
    if output and res.status is Status.YES:
        _write(output, "".join(line + "\n" for line in lines))
    code = {Status.YES: EXIT_OK, Status.NO: EXIT_NO, Status.UNKNOWN: EXIT_UNKNOWN}[res.status]
    return CommandResult(code, lines, data)


def run_verify(instance_path: str, solution_path: str) -> CommandResult:
    try:
        inst = as_fadl(_load(instance_path))
        sol = parse_solution(Path(solution_path).read_text(encoding="utf-8"), inst.digraph.num_vertices())
    except (OSError, ValueError) as err:
        return _input_error(instance_path + " / " + solution_path, err)
    d = inst.digraph
    reasons = []
    missing = [a for a in sorted(sol.deleted_arcs) if not d.has_arc(*a)]
    for u, v in missing:
        reasons.append(f"arc {u + 1} -> {v + 1} is not in the instance")
    if not missing and not verify_solution(inst, sol):
        if sol.size > inst.budget:
            reasons.append(f"{sol.size} deleted arcs exceed the budget {inst.budget}")
        unlabeled = [v + 1 for v in d if v not in sol.labeling]
        if unlabeled:
            reasons.append(f"labeling misses {len(unlabeled)} vertices, first {unlabeled[0]}")
        changed = [v + 1 for v, lab in sorted(inst.labeling.items()) if sol.labeling.get(v) is not lab]
        if changed:
            reasons.append(f"labeling changes the given label of vertex {changed[0]}")
        if not reasons:
            reasons.append("the labeling is not a funnel labeling of the digraph minus the deleted arcs")
    if reasons:
        return CommandResult(EXIT_NO, ["REJECT"] + [f"c {r}" for r in reasons], {"accepted": False, "reasons": reasons})
    return CommandResult(EXIT_OK, ["ACCEPT"], {"accepted": True})


FAMILIES = ("random", "planted", "forbidden")


def run_gen(
    output: str,
    family: str = "planted",
    n: int = 10,
    m: int = 10,
    k: int = 0,
    fork_fraction: float = 0.5,
    seed: int = 0,
) -> CommandResult:
    """Write a generated instance; the planted family also writes ``<output>.plant``
    holding the noise arcs and the funnel labeling of the planted funnel."""
    try:
        if family == "forbidden":
            if k < 0:
                raise ValueError("k must be non-negative")
            inst = FadsInstance(gen_forbidden(k), 1)
            sidecar = None
        elif family == "random":
            GenSpec(n, m, 0, fork_fraction, seed)
            if k < 0:
                raise ValueError("k must be non-negative")
            inst = FadsInstance(gen_random_digraph(n, m, seed), k)
            sidecar = None
        elif family == "planted":
            planted = gen_planted(GenSpec(n, m, k, fork_fraction, seed))
            inst = FadsInstance(planted.digraph, planted.budget)
            sidecar = Solution(frozenset(planted.noise_arcs), planted.funnel_labeling)
        else:
            raise ValueError(f"unknown family {family!r}")
    except ValueError as err:
        return _input_error("gen", err)
    text = emit_instance(inst)
    _write(output, text)
    data = {"family": family, "n": inst.digraph.num_vertices(), "m": inst.digraph.num_arcs(), "k": inst.budget}
    lines = [f"c wrote {output}", f"c n {data['n']} m {data['m']} k {data['k']}"]
    if sidecar is not None:
        plant_path = output + ".plant"
        _write(plant_path, "".join(line + "\n" for line in ["s PLANT"] + emit_solution_lines(sidecar)))
        data["noise_arcs"] = _arc_list(sidecar.deleted_arcs)
        lines.append(f"c plant {plant_path} noise {sidecar.size}")
    return CommandResult(EXIT_OK, lines, data)


# ---------------------------------------------------------------------------
# Batch mode
# ---------------------------------------------------------------------------


def _batch_one(task: tuple) -> tuple[str, CommandResult]:
    command, path, options = task
    name = Path(path).name
    if command == "recognize":
        return name, run_recognize(path)
    if command == "kernelize":
        out_dir = options.get("out_dir")
        output = str(Path(out_dir) / (name + ".kernel")) if out_dir else None
        return name, run_kernelize(path, output, audit=options.get("audit", False))
    return name, run_solve(
        path, options.get("engine", "bnb"), options.get("optimize", False), node_limit=options.get("node_limit", 1_000_000)
    )


def run_batch(directory: str, command: str, jobs: int = 1, **options) -> CommandResult:
    """Run one command over every regular file of ``directory`` in name order.

    Files are processed concurrently when ``jobs > 1``; the report is merged
    in name order, so it does not depend on ``jobs``. The exit code is 2 if
    any file failed to parse, otherwise 0.
    """
    root = Path(directory)
    if not root.is_dir():
        return _input_error(directory, ValueError("not a directory"))
    if options.get("out_dir"):
        Path(options["out_dir"]).mkdir(parents=True, exist_ok=True)
    files = sorted(p for p in root.iterdir() if p.is_file())
    tasks = [(command, str(p), options) for p in files]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_batch_one, tasks))
    else:
        results = [_batch_one(t) for t in tasks]
    lines, entries = [], []
    worst = EXIT_OK
    for name, res in results:
        status = res.lines[0] if res.lines else ""
        lines.append(f"{name} exit {res.code} {status}")
        entries.append({"file": name, "exit": res.code, "report": res.data})
        if res.code == EXIT_INPUT:
            worst = EXIT_INPUT
    return CommandResult(worst, lines, {"command": command, "files": entries})


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="funnelkernel", description="Funnel arc deletion toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--json", action="store_true", help="print the report as JSON")

    sp = sub.add_parser("recognize", help="decide whether the digraph is a funnel")
    sp.add_argument("path")
    sp.add_argument("--dot", help="also write the instance as DOT to this path")
    common(sp)

    sp = sub.add_parser("kernelize", help="apply the reduction rules exhaustively")
    sp.add_argument("path")
    sp.add_argument("-o", "--output", help="write the reduced instance here")
    sp.add_argument("--audit", action="store_true", help="re-scan the kernel for applicable rules")
    sp.add_argument("--dot", help="also write the reduced instance as DOT to this path")
    common(sp)

    sp = sub.add_parser("solve", help="decide the instance exactly")
    sp.add_argument("path")
    sp.add_argument("--engine", choices=ENGINES, default="bnb")
    sp.add_argument("--optimize", action="store_true", help="also report the minimum deletion count")
    sp.add_argument("-o", "--output", help="write the solution here on YES")
    sp.add_argument("--node-limit", type=int, default=1_000_000, help="search-node budget of bnb")
    sp.add_argument("--max-arcs", type=int, help="refuse brute force above this many arcs")
    sp.add_argument("--max-free", type=int, help="refuse labelings above this many unlabeled vertices")
    common(sp)

    sp = sub.add_parser("verify", help="check a solution file against an instance")
    sp.add_argument("instance")
    sp.add_argument("solution")
    common(sp)

    sp = sub.add_parser("gen", help="generate a seeded instance")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--family", choices=FAMILIES, default="planted")
    sp.add_argument("--n", type=int, default=10)
    sp.add_argument("--m", type=int, default=10)
    sp.add_argument("--k", type=int, default=0)
    sp.add_argument("--fork-fraction", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)

    sp = sub.add_parser("batch", help="run a command over every file in a directory")
    sp.add_argument("directory")
    sp.add_argument("--command", choices=("recognize", "kernelize", "solve"), default="kernelize", dest="batch_command")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out-dir", help="kernelize: write kernels here")
    sp.add_argument("--audit", action="store_true")
    sp.add_argument("--engine", choices=ENGINES, default="bnb")
    sp.add_argument("--optimize", action="store_true")
    sp.add_argument("--node-limit", type=int, default=1_000_000)
    common(sp)
    return p


def main(argv: Sequence[str] | None = None, out: Callable[[str], object] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.command == "recognize":
        res = run_recognize(args.path, args.dot)
    elif args.command == "kernelize":
        res = run_kernelize(args.path, args.output, args.audit, args.dot)
    elif args.command == "solve":
        res = run_solve(args.path, args.engine, args.optimize, args.output, args.node_limit, args.max_arcs, args.max_free)
    elif args.command == "verify":
        res = run_verify(args.instance, args.solution)
    elif args.command == "gen":
        res = run_gen(args.output, args.family, args.n, args.m, args.k, args.fork_fraction, args.seed)
    else:
        res = run_batch(
            args.directory,
            args.batch_command,
            jobs=args.jobs,
            out_dir=args.out_dir,
            audit=args.audit,
            engine=args.engine,
            optimize=args.optimize,
            node_limit=args.node_limit,
        )
    (out or sys.stdout.write)(res.render(args.json))
    return res.code


if __name__ == "__main__":
    sys.exit(main())
