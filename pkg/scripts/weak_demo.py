"""Divergence of geometric-series cochains: growth exponents against log(x*phi)."""

import sys

from _common import run

if __name__ == "__main__":
    xs = sys.argv[1:] or ["7/10", "3/4", "4/5"]
    codes = [run(f"weakdemo_{x.replace('/', '_')}", "weakdemo", "--x", x) for x in xs]
    sys.exit(max(codes))
