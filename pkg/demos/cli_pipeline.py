"""The command-line pipeline end to end: generate, recognize, kernelize, solve, verify.

Run: python demos/cli_pipeline.py
"""
import subprocess
import sys
import tempfile
from pathlib import Path


def cli(*args):
    cmd = [sys.executable, "-m", "funnelkernel", *map(str, args)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    print("$ funnelkernel " + " ".join(map(str, args)) + f"    (exit {proc.returncode})")
    print("".join("    " + line + "\n" for line in proc.stdout.splitlines()[:12]), end="")
    return proc.returncode


with tempfile.TemporaryDirectory() as tmp:
    work = Path(tmp)
    cli("gen", "-o", work / "d2.txt", "--family", "forbidden", "--k", 2)
    cli("recognize", work / "d2.txt")
    cli("gen", "-o", work / "planted.txt", "--n", 60, "--m", 90, "--k", 3, "--seed", 11)
    cli("kernelize", work / "planted.txt", "-o", work / "kernel.txt", "--audit")
    cli("solve", work / "kernel.txt", "--engine", "labelings", "--optimize")
    cli("solve", work / "planted.txt", "--optimize", "-o", work / "solution.txt")
    cli("verify", work / "planted.txt", work / "solution.txt")
    cli("verify", work / "planted.txt", str(work / "planted.txt") + ".plant")
