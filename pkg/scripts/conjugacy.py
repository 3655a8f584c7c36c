"""Conjugacy verdicts for the bundled deformations: equal Fibonacci tile lengths
(bounded difference), lengths 1 and 2 on the (3/2, 1) tiling (unbounded), and
the identity."""

import sys

from _common import run

if __name__ == "__main__":
    codes = [run(f"conjugacy_{name}", "conjugacy", "--deformation", f"{name}_deformation")
             for name in ("equal_length", "a1_b2", "identity")]
    sys.exit(max(codes))
