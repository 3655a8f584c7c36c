"""Plateau-kernel smoothing of the class reshaping the (3/2, 1) tiling to
lengths (1, 2), and the refusal on a zero-average cochain (exit code 3)."""

import sys

from _common import run

if __name__ == "__main__":
    level = sys.argv[1] if len(sys.argv) > 1 else "22"
    ok = run("smooth_a1_b2", "smooth", "--rule", "fibonacci_rational", "--cochain", "a1_b2", "--level", level)
    refused = run("smooth_zero_average", "smooth", "--cochain", "zero_average", "--level", "14")
    sys.exit(0 if ok == 0 and refused == 3 else 1)
