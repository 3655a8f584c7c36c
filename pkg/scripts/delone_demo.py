"""Voronoi cells of a square lattice sample, a Delone check and the distance to
a shifted copy."""

import json
import sys
from fractions import Fraction

from _common import RUNS, run
from tilecohom.delone import lattice_sample

if __name__ == "__main__":
    RUNS.mkdir(parents=True, exist_ok=True)
    small, big = lattice_sample(6), lattice_sample(101)
    paths = {}
    for name, S in (("z2_small", small), ("z2", big), ("z2_shifted", big.translate(Fraction(1, 100), 0))):
        paths[name] = RUNS / f"{name}.json"
        paths[name].write_text(json.dumps(S.to_json()))
    codes = [
        run("voronoi_z2", "voronoi", "--points", str(paths["z2_small"]), "--r", "1", "--R", "3/4"),
        run("delone_check_z2", "delone-check", "--points", str(paths["z2_small"]), "--r", "1", "--R", "3/4"),
        run("delone_dist_shift", "delone-dist", "--points", str(paths["z2"]), "--other", str(paths["z2_shifted"]),
            "--eps-grid", "1/100:1/50:1/1000"),
    ]
    sys.exit(max(codes))
