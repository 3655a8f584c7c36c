"""Shared helper: run a CLI command with its output directory under runs/."""

import sys
from pathlib import Path

from tilecohom.cli import main

RUNS = Path(__file__).resolve().parent.parent / "runs"


def run(name: str, *args: str) -> int:
    out = RUNS / name
    code = main([*args, "--out", str(out)])
    print(f"[{name}] exit {code}, outputs in {out}", file=sys.stderr)
    return code
