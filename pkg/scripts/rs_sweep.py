"""Empirical averages of tile indicators and the displacement cochain over
radii 10..160 on a level-22 Fibonacci window."""

import sys

from _common import run

if __name__ == "__main__":
    level = sys.argv[1] if len(sys.argv) > 1 else "22"
    codes = [run(f"rs_{c}", "rs", "--cochain", c, "--rsweep", "10:160", "--level", level)
             for c in ("deltax", "a1_b2", "zero_average")]
    sys.exit(max(codes))
