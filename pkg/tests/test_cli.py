import json
import subprocess
import sys
from pathlib import Path

import pytest

from funnelkernel.cli import (
    FormatError,
    as_fadl,
    emit_instance,
    main,
    parse_instance,
    parse_solution,
    run_batch,
)
from funnelkernel.funnel import FORK, MERGE
from funnelkernel.instance import FadlInstance, FadsInstance
from funnelkernel.solver import solve_labelings

from oracles import NINE_ARCS, decision, fuzz_fadl, fuzz_fads

GOLDEN = Path(__file__).parent / "data" / "golden"


def run(*argv):
    chunks = []
    code = main([str(a) for a in argv], out=chunks.append)
    return code, "".join(chunks)


def write(path: Path, text: str) -> str:
    path.write_text(text)
    return str(path)


NINE_TEXT = "p fads 9 8 {k}\n" + "".join(f"a {u + 1} {v + 1}\n" for u, v in NINE_ARCS)


# parsing --------------------------------------------------------------------------------


def test_parse_examples():
    tri = parse_instance("p fads 3 3 1\na 1 2\na 2 3\na 3 1\n")
    assert isinstance(tri, FadsInstance) and tri.budget == 1
    assert sorted(tri.digraph.arcs()) == [(0, 1), (1, 2), (2, 0)]
    lab = parse_instance("p fadl 2 1 0\nl 1 F\na 1 2\n")
    assert isinstance(lab, FadlInstance) and lab.labeling == {0: FORK}


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("p fads 2 2 0\na 1 2\na 1 2\n", 3, "duplicate arc"),
        ("p fads 2 1 0\na 1 1\n", 2, "self-loop"),
        ("p fads 2 0 0\nl 1 F\n", 2, "only allowed in fadl"),
        ("c x\np fads 2 1 0\na 1 3\n", 3, "out of range"),
        ("a 1 2\n", 1, "first non-comment"),
        ("p fads 2 1 0\np fads 2 1 0\n", 2, "second"),
        ("p fadl 2 0 0\nl 1 X\n", 2, "label line"),
        ("p fadl 2 0 0\nl 1 F\nl 1 M\n", 3, "labeled twice"),
        ("p fads 2 0 -1\n", 1, "non-negative"),
        ("p fads two 0 0\n", 1, "n"),
        ("p fads 2 0 0\nq 1\n", 2, "unknown line kind"),
    ],
)
def test_parse_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(FormatError) as info:
        parse_instance(text)
    assert info.value.line == line and fragment in str(info.value)


def test_parse_errors_at_end_of_input():
    with pytest.raises(FormatError, match="end of input.*2 arcs"):
        parse_instance("p fads 2 2 0\na 1 2\n")
    with pytest.raises(FormatError, match="missing"):
        parse_instance("c only a comment\n")


@pytest.mark.parametrize("source", sorted(GOLDEN.glob("*.in")), ids=lambda p: p.stem)
def test_golden_round_trip(source):
    expected = source.with_suffix(".out").read_text()
    assert emit_instance(parse_instance(source.read_text())) == expected
    assert emit_instance(parse_instance(expected)) == expected


def test_emit_compacts_dead_vertices():
    inst = parse_instance("p fadl 3 1 0\nl 3 M\na 1 3\n")
    inst.digraph.remove_vertex(1)
    assert emit_instance(inst) == "p fadl 2 1 0\nl 2 M\na 1 2\n"


def test_random_instances_round_trip():
    for seed in range(200):
        inst = fuzz_fadl(seed)
        text = emit_instance(inst)
        again = parse_instance(text)
        assert again.labeling == inst.labeling and again.digraph.arcs() == inst.digraph.arcs()
        assert emit_instance(again) == text


def test_solution_parsing():
    sol = parse_solution("s YES\nc note\na 1 2\nl 1 F\nl 2 M\n", 2)
    assert sol.deleted_arcs == {(0, 1)} and sol.labeling == {0: FORK, 1: MERGE}
    with pytest.raises(FormatError):
        parse_solution("p fads 1 0 0\n", 1)


# recognize ------------------------------------------------------------------------------


def test_recognize_forbidden_pattern(tmp_path):
    path = write(tmp_path / "d1.txt", "p fads 6 5 0\na 1 3\na 2 3\na 3 4\na 4 5\na 4 6\n")
    code, out = run("recognize", path)
    assert code == 1
    assert out == "NOT-FUNNEL\nwitness k 1\nin 1 2\npath 3 4\nout 5 6\n"


def test_recognize_bipartite_and_empty(tmp_path):
    path = write(tmp_path / "k22.txt", "p fads 4 4 0\na 1 3\na 1 4\na 2 3\na 2 4\n")
    code, out = run("recognize", path)
    assert code == 0 and out.splitlines()[0] == "FUNNEL" and len(out.splitlines()) == 5
    code, out = run("recognize", write(tmp_path / "e.txt", "p fads 0 0 0\n"))
    assert code == 0 and out == "FUNNEL\n"


def test_recognize_cycle_and_dot(tmp_path):
    path = write(tmp_path / "tri.txt", (GOLDEN / "triangle.in").read_text())
    dot = tmp_path / "tri.dot"
    code, out = run("recognize", path, "--dot", dot)
    assert code == 1 and out == "NOT-FUNNEL\ncycle 1 2 3\n"
    assert dot.read_text() == "digraph instance {\n  1;\n  2;\n  3;\n  1 -> 2;\n  2 -> 3;\n  3 -> 1;\n}\n"


def test_parse_error_exit_code(tmp_path):
    path = write(tmp_path / "bad.txt", "p fads 2 2 0\na 1 2\na 1 2\n")
    code, out = run("recognize", path)
    assert code == 2 and "line 3" in out and "duplicate arc" in out
    assert run("recognize", tmp_path / "missing.txt")[0] == 2
    assert run("frobnicate")[0] == 2


# kernelize ------------------------------------------------------------------------------


def test_kernelize_funnel_zero_budget(tmp_path):
    src = write(tmp_path / "f.txt", "p fads 4 4 0\na 1 3\na 1 4\na 2 3\na 2 4\n")
    out_path = tmp_path / "k.txt"
    code, out = run("kernelize", src, "-o", out_path, "--audit")
    assert code == 0 and out.startswith("s KERNEL\nc input n 4 m 4 k 0\n")
    assert "FAIL" not in out
    assert decision(parse_instance(out_path.read_text()))


def test_kernelize_nine_vertex_budget_one_refutes(tmp_path):
    src = write(tmp_path / "nine.txt", NINE_TEXT.format(k=1))
    out_path = tmp_path / "k.txt"
    code, out = run("kernelize", src, "-o", out_path)
    if code == 1:
        assert out.startswith("s NO\n")
        assert out_path.read_text() == (GOLDEN / "canonical_no.out").read_text()
    else:
        assert not decision(parse_instance(out_path.read_text()))


def test_kernelize_fadl_refutation_writes_canonical_pattern(tmp_path):
    src = write(tmp_path / "x.txt", "p fadl 5 4 0\na 2 1\na 3 1\na 1 4\na 1 5\n")
    out_path = tmp_path / "k.txt"
    code, out = run("kernelize", src, "-o", out_path)
    assert code == 1 and out.startswith("s NO\n")
    assert out_path.read_text() == "p fadl 5 4 0\na 1 4\na 1 5\na 2 1\na 3 1\n"


def test_kernelize_json_mirrors_text(tmp_path):
    src = write(tmp_path / "nine.txt", NINE_TEXT.format(k=2))
    code, text = run("kernelize", src)
    code_j, raw = run("kernelize", src, "--json")
    data = json.loads(raw)
    assert code == code_j == 0
    assert data["status"] == "KERNEL" and text.startswith("s KERNEL")
    for name, count in data["rule_counts"].items():
        assert f"c rule {name} {count}\n" in text
    assert f"c output n {data['output']['n']} m {data['output']['m']} k {data['output']['k']}" in text


def test_kernelize_planted_with_audit(tmp_path):
    inst = tmp_path / "p.txt"
    assert run("gen", "-o", inst, "--n", 2000, "--m", 3000, "--k", 8, "--seed", 5)[0] == 0
    code, out = run("kernelize", inst, "--audit")
    assert code == 0 and "FAIL" not in out and out.count("PASS") == 6


# solve and verify ------------------------------------------------------------------------


def test_solve_nine_vertex_and_verify(tmp_path):
    src = write(tmp_path / "nine.txt", NINE_TEXT.format(k=2))
    sol = tmp_path / "sol.txt"
    code, out = run("solve", src, "--engine", "brute", "--optimize", "-o", sol)
    assert code == 0 and out.startswith("s YES\nc engine brute\n")
    assert "c optimum 2\n" in out and sum(line.startswith("a ") for line in out.splitlines()) == 2
    assert sol.read_text() == out
    assert run("verify", src, sol) == (0, "ACCEPT\n")
    tight = write(tmp_path / "nine_k1.txt", NINE_TEXT.format(k=1))
    code, out = run("verify", tight, sol)
    assert code == 1 and "exceed the budget 1" in out


def test_verify_fixed_certificate(tmp_path):
    src = write(tmp_path / "nine.txt", NINE_TEXT.format(k=2))
    # Deleting 2 -> 5 and 5 -> 6 leaves vertex 2 with two in-arcs, so 2 and
    # its successor 3 sit on the Merge side.
    labels = "".join(f"l {v} F\n" for v in (1, 4, 5, 6, 9)) + "".join(f"l {v} M\n" for v in (2, 3, 7, 8))
    good = write(tmp_path / "good.txt", "a 2 5\na 5 6\n" + labels)
    assert run("verify", src, good) == (0, "ACCEPT\n")
    # Relabel 9 as Merge: the kept arc 9 -> 6 becomes Merge -> Fork, nothing else breaks.
    tampered = labels.replace("l 9 F", "l 9 M")
    assert run("verify", src, write(tmp_path / "bad.txt", "a 2 5\na 5 6\n" + tampered)) == (
        1,
        "REJECT\nc the labeling is not a funnel labeling of the digraph minus the deleted arcs\n",
    )
    code, out = run("verify", src, write(tmp_path / "ghost.txt", "a 2 1\n" + labels))
    assert code == 1 and "arc 2 -> 1 is not in the instance" in out


def test_solve_no_and_unknown(tmp_path):
    src = write(tmp_path / "c4.txt", "p fads 4 4 0\na 1 2\na 2 3\na 3 4\na 4 1\n")
    for engine in ("brute", "labelings", "bnb"):
        code, out = run("solve", src, "--engine", engine)
        assert code == 1 and out.startswith("s NO\n")
    code, out = run("solve", src, "--engine", "brute", "--max-arcs", 2)
    assert code == 3 and out.startswith("s UNKNOWN\n")
    dense = tmp_path / "dense.txt"
    run("gen", "-o", dense, "--family", "random", "--n", 12, "--m", 60, "--k", 8, "--seed", 3)
    code, out = run("solve", dense, "--engine", "bnb", "--optimize", "--node-limit", 2)
    assert code == 3 and out.startswith("s UNKNOWN\n")


# gen ---------------------------------------------------------------------------------------


def test_gen_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for path in (a, b):
        assert run("gen", "-o", path, "--n", 10, "--m", 12, "--k", 2, "--seed", 7)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert Path(str(a) + ".plant").read_bytes() == Path(str(b) + ".plant").read_bytes()
    assert a.read_bytes().startswith(b"p fads 10 14 2\n")


def test_gen_plant_certificate_verifies(tmp_path):
    inst = tmp_path / "p.txt"
    run("gen", "-o", inst, "--n", 40, "--m", 60, "--k", 3, "--seed", 2)
    assert run("verify", inst, str(inst) + ".plant") == (0, "ACCEPT\n")


def test_gen_zero_budget_is_yes(tmp_path):
    inst = tmp_path / "p.txt"
    run("gen", "-o", inst, "--n", 30, "--m", 40, "--k", 0, "--seed", 4)
    assert run("solve", inst)[0] == 0


def test_gen_forbidden_family(tmp_path):
    inst = tmp_path / "d3.txt"
    assert run("gen", "-o", inst, "--family", "forbidden", "--k", 3)[0] == 0
    text = inst.read_text()
    assert text.startswith("p fads 8 7 1\n")
    code, out = run("recognize", inst)
    assert code == 1 and "witness k 3" in out and "path 3 4 5 6" in out


def test_gen_invalid_parameters(tmp_path):
    assert run("gen", "-o", tmp_path / "x", "--n", 3, "--m", 9)[0] == 2
    assert run("gen", "-o", tmp_path / "x", "--fork-fraction", 2)[0] == 2
    assert run("gen", "-o", tmp_path / "x", "--family", "random", "--n", 3, "--m", 9)[0] == 2


# batch ---------------------------------------------------------------------------------------


def _corpus(tmp_path: Path) -> Path:
    root = tmp_path / "corpus"
    root.mkdir()
    for seed in range(12):
        (root / f"i{seed:02d}.txt").write_text(emit_instance(fuzz_fads(seed)))
    return root


def test_batch_is_independent_of_job_count(tmp_path):
    root = _corpus(tmp_path)
    one = run_batch(str(root), "kernelize", jobs=1, out_dir=str(tmp_path / "k1"))
    two = run_batch(str(root), "kernelize", jobs=2, out_dir=str(tmp_path / "k2"))
    assert one.render(False) == two.render(False) and one.render(True) == two.render(True)
    for p in sorted((tmp_path / "k1").iterdir()):
        assert p.read_bytes() == (tmp_path / "k2" / p.name).read_bytes()
    assert one.lines[0].startswith("i00.txt exit ")


def test_batch_reports_parse_errors(tmp_path):
    root = _corpus(tmp_path)
    (root / "zz.txt").write_text("nonsense\n")
    code, out = run("batch", root, "--command", "recognize")
    assert code == 2 and out.splitlines()[-1].startswith("zz.txt exit 2")


def test_pipeline_soundness(tmp_path):
    """Solving the original and solving its kernel give the same answer."""
    root = _corpus(tmp_path)
    kernels = tmp_path / "kernels"
    run("batch", root, "--command", "kernelize", "--out-dir", kernels)
    for src in sorted(root.iterdir()):
        original = run("solve", src, "--engine", "labelings")[0]
        reduced = run("solve", kernels / (src.name + ".kernel"), "--engine", "labelings")[0]
        assert original == reduced, src.name


def test_file_round_trip_keeps_the_answer():
    for seed in range(100):
        inst = fuzz_fads(seed)
        assert solve_labelings(as_fadl(parse_instance(emit_instance(inst)))).is_yes == decision(inst)


def test_module_entry_point(tmp_path):
    path = write(tmp_path / "e.txt", "p fads 0 0 0\n")
    proc = subprocess.run([sys.executable, "-m", "funnelkernel", "recognize", path], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "FUNNEL\n"
