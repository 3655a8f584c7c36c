"""Labeled Delone sets in the plane with exact rational geometry.

Windows are axis-aligned boxes; every check states its boundary margin and
ignores what the margin cannot see.  Also holds the 1D canonical-transversal
membership test.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .substitution import Tiling1D

Point = tuple[Fraction, Fraction]


def _frac(v) -> Fraction:
    if isinstance(v, float):
        return Fraction(repr(v))
    return Fraction(v)


@dataclass(frozen=True)
class Box:
    xmin: Fraction
    ymin: Fraction
    xmax: Fraction
    ymax: Fraction

    @classmethod
    def of(cls, values: Sequence) -> "Box":
        box = cls(*(_frac(v) for v in values))
        if box.xmin >= box.xmax or box.ymin >= box.ymax:
            raise ValueError("empty window")
        return box

    def shrink(self, m) -> "Box | None":
        m = _frac(m)
        b = (self.xmin + m, self.ymin + m, self.xmax - m, self.ymax - m)
        if b[0] >= b[2] or b[1] >= b[3]:
            return None
        return Box(*b)

    def contains(self, p: Point) -> bool:
        return self.xmin <= p[0] <= self.xmax and self.ymin <= p[1] <= self.ymax

    def polygon(self) -> list[Point]:
        return [(self.xmin, self.ymin), (self.xmax, self.ymin), (self.xmax, self.ymax), (self.xmin, self.ymax)]

    @property
    def area(self) -> Fraction:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)


@dataclass(frozen=True)
class LabeledDeloneSet:
    points: tuple  # of (Point, label)
    window: Box

    @classmethod
    def build(cls, points: Sequence, window: Sequence | Box, labels: Sequence | None = None) -> "LabeledDeloneSet":
        labels = labels if labels is not None else [""] * len(points)
        pts = tuple(((_frac(p[0]), _frac(p[1])), lab) for p, lab in zip(points, labels))
        win = window if isinstance(window, Box) else Box.of(window)
        return cls(pts, win)

    def __len__(self) -> int:
        return len(self.points)

    def position(self, i: int) -> Point:
        return self.points[i][0]

    def label(self, i: int):
        return self.points[i][1]

    @property
    def array(self) -> np.ndarray:
        return np.array([[float(x), float(y)] for (x, y), _ in self.points]).reshape(-1, 2)

    def translate(self, dx, dy) -> "LabeledDeloneSet":
        dx, dy = _frac(dx), _frac(dy)
        w = self.window
        return LabeledDeloneSet(tuple(((x + dx, y + dy), lab) for (x, y), lab in self.points),
                                Box(w.xmin + dx, w.ymin + dy, w.xmax + dx, w.ymax + dy))

    def to_json(self) -> dict:
        w = self.window
        return {
            "window": [str(w.xmin), str(w.ymin), str(w.xmax), str(w.ymax)],
            "points": [{"x": str(x), "y": str(y), "label": _label_json(lab)} for (x, y), lab in self.points],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "LabeledDeloneSet":
        pts = [(Fraction(str(p["x"])), Fraction(str(p["y"]))) for p in obj["points"]]
        labels = [_label_from_json(p.get("label", "")) for p in obj["points"]]
        return cls.build(pts, [Fraction(str(v)) for v in obj["window"]], labels)

    @classmethod
    def load(cls, path: str | Path) -> "LabeledDeloneSet":
        return cls.from_json(json.loads(Path(path).read_text()))


def _label_json(lab):
    if isinstance(lab, Fraction):
        return {"value": str(lab)}
    if isinstance(lab, (int, float)):
        return {"value": str(_frac(lab))}
    return lab


def _label_from_json(lab):
    if isinstance(lab, Mapping):
        return Fraction(str(lab["value"]))
    if isinstance(lab, (int, float)) and not isinstance(lab, bool):
        return _frac(lab)
    return lab


def label_distance(l1, l2) -> Fraction:
    """Discrete metric on names, absolute difference on numbers."""
    num = (int, Fraction)
    if isinstance(l1, num) and isinstance(l2, num):
        return abs(Fraction(l1) - Fraction(l2))
    if isinstance(l1, float) or isinstance(l2, float):
        return abs(_frac(l1) - _frac(l2))
    return Fraction(0) if l1 == l2 else Fraction(1)


def lattice_sample(n: int, labels=None, perturb: float = 0.0, seed: int = 0, scale: int = 1000) -> LabeledDeloneSet:
    """Points of Z^2 in [-n, n]^2, optionally moved by rational jitter of size ``perturb``."""
    rng = np.random.default_rng(seed)
    pts = []
    for i in range(-n, n + 1):
        for j in range(-n, n + 1):
            dx = Fraction(int(rng.integers(-scale, scale + 1)), scale) * _frac(perturb) if perturb else 0
            dy = Fraction(int(rng.integers(-scale, scale + 1)), scale) * _frac(perturb) if perturb else 0
            pts.append((Fraction(i) + dx, Fraction(j) + dy))
    return LabeledDeloneSet.build(pts, (-n, -n, n, n), labels)


# ---------------------------------------------------------------------------
# polygons


def _cross(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _dist2(p: Point, q: Point) -> Fraction:
    return (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2


def _integer_coords(*sets: "LabeledDeloneSet") -> tuple[list[np.ndarray], int]:
    """Coordinates scaled by a common denominator L to exact integers
    (int64 when squared distances cannot overflow, Python ints otherwise)."""
    L = 1
    for S in sets:
        for (x, y), _ in S.points:
            L = math.lcm(L, x.denominator, y.denominator)
    out = []
    big = 0
    for S in sets:
        xs = [x.numerator * (L // x.denominator) for (x, _), _ in S.points]
        ys = [y.numerator * (L // y.denominator) for (_, y), _ in S.points]
        big = max([big] + [abs(v) for v in xs + ys])
        out.append((xs, ys))
    dtype = np.int64 if big < 2 ** 30 else object
    return [np.array([xs, ys], dtype=dtype).T.reshape(-1, 2) for xs, ys in out], L


@dataclass(frozen=True)
class ConvexCell:
    vertices: tuple  # counterclockwise

    @property
    def area(self) -> Fraction:
        v = self.vertices
        s = sum((v[i][0] * v[(i + 1) % len(v)][1] - v[(i + 1) % len(v)][0] * v[i][1] for i in range(len(v))),
                Fraction(0))
        return s / 2

    @property
    def centroid(self) -> Point:
        v = self.vertices
        A = self.area
        if A <= 0:
            raise ValueError("degenerate cell")
        cx = cy = Fraction(0)
        for i in range(len(v)):
            (x0, y0), (x1, y1) = v[i], v[(i + 1) % len(v)]
            w = x0 * y1 - x1 * y0
            cx += (x0 + x1) * w
            cy += (y0 + y1) * w
        return cx / (6 * A), cy / (6 * A)

    def is_convex(self) -> bool:
        v = self.vertices
        n = len(v)
        return n >= 3 and all(_cross(v[i], v[(i + 1) % n], v[(i + 2) % n]) > 0 for i in range(n))

    def shape_key(self) -> tuple:
        """Vertices relative to the centroid, starting at the smallest one."""
        cx, cy = self.centroid
        rel = [(x - cx, y - cy) for x, y in self.vertices]
        k = rel.index(min(rel))
        return tuple(rel[k:] + rel[:k])


def _clip(poly: list[Point], p: Point, q: Point) -> list[Point]:
    """Keep the part of ``poly`` at least as close to p as to q."""
    a = 2 * (q[0] - p[0])
    b = 2 * (q[1] - p[1])
    c = q[0] ** 2 + q[1] ** 2 - p[0] ** 2 - p[1] ** 2

    def side(v):  # <= 0 means on p's side
        return a * v[0] + b * v[1] - c

    out = []
    n = len(poly)
    for i in range(n):
        u, w = poly[i], poly[(i + 1) % n]
        su, sw = side(u), side(w)
        if su <= 0:
            out.append(u)
        if (su < 0 < sw) or (sw < 0 < su):
            t = su / (su - sw)
            out.append((u[0] + t * (w[0] - u[0]), u[1] + t * (w[1] - u[1])))
    dedup = []
    for v in out:
        if not dedup or dedup[-1] != v:
            dedup.append(v)
    if len(dedup) > 1 and dedup[0] == dedup[-1]:
        dedup.pop()
    return dedup


def _cell(S: LabeledDeloneSet, tree: cKDTree, i: int, start: list[Point], radius: float | None = None
          ) -> list[Point]:
    """Voronoi cell of point i inside the convex polygon ``start``.

    With ``radius`` given, only neighbours within it are used; otherwise the
    search radius grows until the cell is provably complete.
    """
    p = S.position(i)
    coords = (float(p[0]), float(p[1]))
    rho = radius if radius is not None else 1.0
    while True:
        poly = list(start)
        for j in sorted(tree.query_ball_point(coords, rho * (1 + 1e-9))):
            if j == i:
                continue
            q = S.position(j)
            if q == p:
                continue
            poly = _clip(poly, p, q)
            if not poly:
                return []
        if radius is not None or not poly:
            return poly
        far = max(float(_dist2(p, v)) for v in poly) ** 0.5
        if 2 * far <= rho or rho > 4 * _diameter(S.window):
            return poly
        rho *= 2


def _diameter(w: Box) -> float:
    return float(((w.xmax - w.xmin) ** 2 + (w.ymax - w.ymin) ** 2)) ** 0.5


# ---------------------------------------------------------------------------
# Delone checks


@dataclass(frozen=True)
class DeloneVerdict:
    passed: bool
    reason: str = ""
    pair: tuple | None = None  # indices of a too-close pair
    empty_ball: tuple | None = None  # (center, squared distance to nearest point)
    min_distance2: Fraction | None = None
    covering_radius2: Fraction | None = None

    def to_json(self) -> dict:
        out = {"passed": self.passed, "reason": self.reason}
        if self.pair is not None:
            out["pair"] = list(self.pair)
        if self.empty_ball is not None:
            (x, y), d2 = self.empty_ball
            out["empty_ball"] = {"center": [str(x), str(y)], "distance": float(d2) ** 0.5}
        if self.min_distance2 is not None:
            out["min_distance"] = float(self.min_distance2) ** 0.5
        if self.covering_radius2 is not None:
            out["covering_radius"] = float(self.covering_radius2) ** 0.5
        return out


def min_distance2(S: LabeledDeloneSet) -> tuple[Fraction, tuple | None]:
    """Exact smallest squared distance between two points and a pair attaining it."""
    arr = S.array
    if len(arr) < 2:
        return Fraction(0), None
    tree = cKDTree(arr)
    dist, _ = tree.query(arr, k=2)
    cutoff = float(np.min(dist[:, 1])) * (1 + 1e-9) + 1e-12
    pairs = np.array(sorted(tree.query_pairs(cutoff)), dtype=np.int64).reshape(-1, 2)
    (P,), L = _integer_coords(S)
    d = P[pairs[:, 0]] - P[pairs[:, 1]]
    d2 = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]
    k = int(np.argmin(d2))
    return Fraction(int(d2[k]), L * L), (int(pairs[k, 0]), int(pairs[k, 1]))


def check_delone(S: LabeledDeloneSet, r, R) -> DeloneVerdict:
    """Pairwise distances >= r, and every radius-R ball centred in the window
    shrunk by R meets the set."""
    r, R = _frac(r), _frac(R)
    inner = S.window.shrink(R)
    if inner is None:
        raise ValueError("window margin smaller than R")
    d2, pair = min_distance2(S)
    if pair is not None and d2 < r * r:
        return DeloneVerdict(False, "points closer than r", pair, None, d2)
    tree = cKDTree(S.array)
    start = inner.polygon()
    worst, where = Fraction(0), None
    cx, cy = float((inner.xmin + inner.xmax) / 2), float((inner.ymin + inner.ymax) / 2)
    half = max(float(inner.xmax - inner.xmin), float(inner.ymax - inner.ymin)) / 2
    candidates = tree.query_ball_point((cx, cy), half * 1.5 + float(R) * 2 + 1)
    for i in sorted(candidates):
        poly = _cell(S, tree, i, start)
        for v in poly:
            dv = _dist2(S.position(i), v)
            if dv > worst:
                worst, where = dv, v
    if len(S) == 0:
        return DeloneVerdict(False, "empty set", None, (inner.polygon()[0], None))
    if worst > R * R:
        return DeloneVerdict(False, "ball of radius R misses the set", None, (where, worst), d2, worst)
    return DeloneVerdict(True, "", None, None, d2, worst)


# ---------------------------------------------------------------------------
# Voronoi cells and punctures


def voronoi(S: LabeledDeloneSet, r, R) -> dict[int, ConvexCell]:
    """Cells of the points farther than 2R from the window boundary."""
    verdict = check_delone(S, r, R)
    if not verdict.passed:
        raise ValueError(f"set is not Delone for the declared constants: {verdict.reason}")
    R = _frac(R)
    eligible = S.window.shrink(2 * R)
    if eligible is None:
        return {}
    tree = cKDTree(S.array)
    cells = {}
    for i in range(len(S)):
        p = S.position(i)
        if not (eligible.xmin < p[0] < eligible.xmax and eligible.ymin < p[1] < eligible.ymax):
            continue
        box = Box(p[0] - 2 * R, p[1] - 2 * R, p[0] + 2 * R, p[1] + 2 * R).polygon()
        cells[i] = ConvexCell(tuple(_cell(S, tree, i, box, float(2 * R))))
    return cells


def voronoi_partition(S: LabeledDeloneSet, box: Box) -> dict[int, ConvexCell]:
    """Voronoi cells clipped to ``box``; their areas sum to the box area
    whenever the box is far enough inside the window."""
    tree = cKDTree(S.array)
    out = {}
    for i in range(len(S)):
        poly = _cell(S, tree, i, box.polygon())
        if len(poly) >= 3:
            cell = ConvexCell(tuple(poly))
            if cell.area > 0:
                out[i] = cell
    return out


def punctures(cells: Mapping[int, ConvexCell], labels: Mapping[int, object] | None = None,
              window: Box | None = None) -> LabeledDeloneSet:
    """Centroid of each cell, labelled by (shape class, label)."""
    shapes: dict[tuple, str] = {}
    pts, labs = [], []
    for i in sorted(cells):
        cell = cells[i]
        if cell.area <= 0:
            raise ValueError(f"degenerate cell {i}")
        key = cell.shape_key()
        shape = shapes.setdefault(key, f"shape{len(shapes)}")
        pts.append(cell.centroid)
        labs.append((shape, labels.get(i, "") if labels else ""))
    if window is None:
        xs = [v[0] for c in cells.values() for v in c.vertices]
        ys = [v[1] for c in cells.values() for v in c.vertices]
        window = Box(min(xs), min(ys), max(xs), max(ys))
    return LabeledDeloneSet(tuple(zip(pts, labs)), window)


def cells_cover(cells: Mapping[int, ConvexCell]) -> bool:
    """Cells are convex, positive-area, and pairwise interior-disjoint."""
    from shapely.geometry import Polygon

    polys = {i: Polygon([(float(x), float(y)) for x, y in c.vertices]) for i, c in cells.items()}
    for c in cells.values():
        if not c.is_convex():
            return False
    items = sorted(polys.items())
    for a in range(len(items)):
        for b in range(a + 1, len(items)):
            pa, pb = items[a][1], items[b][1]
            if pa.distance(pb) == 0 and pa.intersection(pb).area > 1e-12:
                return False
    return True


# ---------------------------------------------------------------------------
# distance between labelled Delone sets


@dataclass(frozen=True)
class DistanceRow:
    eps: Fraction
    status: str  # "pass", "fail", "inconclusive"
    detail: str = ""


@dataclass(frozen=True)
class DistanceResult:
    distance: Fraction | None
    rows: tuple

    def to_json(self) -> dict:
        return {"distance": None if self.distance is None else str(self.distance),
                "distance_float": None if self.distance is None else float(self.distance),
                "rows": [{"eps": str(r.eps), "status": r.status, "detail": r.detail} for r in self.rows]}


class _Nearest:
    """Nearest partner in ``dst`` of every ``src`` point near the origin, with
    exact integer squared norms and displacements (common scale L)."""

    def __init__(self, src: LabeledDeloneSet, dst: LabeledDeloneSet, reach: Fraction):
        self.src, self.dst = src, dst
        arr, darr = src.array, dst.array
        near = np.nonzero(np.hypot(arr[:, 0], arr[:, 1]) <= float(reach) * (1 + 1e-9) + 1e-9)[0]
        self.idx = near
        self.partner = cKDTree(darr).query(arr[near], k=1)[1] if len(near) else np.zeros(0, dtype=np.int64)
        (P, Q), self.L = _integer_coords(src, dst)
        p, q = P[near], Q[self.partner]
        self.norm2 = p[:, 0] * p[:, 0] + p[:, 1] * p[:, 1]
        self.partner_norm2 = q[:, 0] * q[:, 0] + q[:, 1] * q[:, 1]
        d = p - q
        self.d2 = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]
        self.label = [label_distance(src.label(i), dst.label(j)) for i, j in zip(near, self.partner)]
        self.fcost = np.sqrt(self.d2.astype(float)) / self.L + np.array([float(v) for v in self.label])

    def restrict(self, inner2: Fraction, outer2: Fraction):
        """Map and near-maximal exact costs on the inner ball; (None, reason)
        if a partner leaves the outer ball."""
        L2 = self.L * self.L
        inner = inner2 * L2
        outer = outer2 * L2
        # object arrays keep the products exact for any size of numerator
        dom = (self.norm2.astype(object) * inner.denominator <= inner.numerator).astype(bool)
        ok = (self.partner_norm2.astype(object) * outer.denominator <= outer.numerator).astype(bool)
        bad = np.nonzero(dom & ~ok)[0]
        if len(bad):
            return None, f"nearest partner of point {int(self.idx[bad[0]])} leaves the outer ball"
        sel = np.nonzero(dom)[0]
        mapping = dict(zip(self.idx[sel].tolist(), self.partner[sel].tolist()))
        if not len(sel):
            return mapping, []
        top = float(np.max(self.fcost[sel]))
        worst = sel[self.fcost[sel] >= top - 1e-9 * (1 + top)]
        keys = {(int(self.d2[k]), self.label[k]) for k in worst}
        return mapping, sorted((Fraction(d2, L2), lab) for d2, lab in keys)


def _sum_below(a: Fraction, b: Fraction, c: Fraction, bound: Fraction) -> bool:
    """sqrt(a) + sqrt(b) + c < bound, decided exactly."""
    t = bound - c
    if t <= 0:
        return False
    lhs = t * t - a - b
    if lhs <= 0:
        return False
    return 4 * a * b < lhs * lhs


def _worst(costs):
    """Entries whose sqrt(d2) + label might be the maximum."""
    vals = [float(d2) ** 0.5 + float(lab) for d2, lab in costs]
    top = max(vals)
    return sorted({c for c, v in zip(costs, vals) if v >= top - 1e-9 * (1 + top)})


def delone_distance(s1: LabeledDeloneSet, s2: LabeledDeloneSet, eps_grid: Sequence) -> DistanceResult:
    """Smallest eps in the grid for which the nearest-neighbour matching
    satisfies the displacement-plus-label bound < 2 eps."""
    grid = sorted(_frac(e) for e in eps_grid)
    if not grid or grid[0] <= 0:
        raise ValueError("eps grid must be positive")
    need = 1 / grid[0]
    for s in (s1, s2):
        w = s.window
        if min(-w.xmin, -w.ymin, w.xmax, w.ymax) < need:
            raise ValueError(f"window does not contain B(0, {float(need):.6g})")
    sep2 = min(min_distance2(s1)[0], min_distance2(s2)[0])
    forward, backward = _Nearest(s1, s2, need), _Nearest(s2, s1, need)
    rows, best = [], None
    for eps in grid:
        inner2 = (1 / eps - eps) ** 2 if 1 / eps > eps else Fraction(0)
        outer2 = (1 / eps) ** 2
        unique = 16 * eps * eps <= sep2  # eps <= r/4: at most one candidate within 2 eps
        f, cf = forward.restrict(inner2, outer2)
        g, cg = backward.restrict(inner2, outer2)
        problem = ""
        if f is None or g is None:
            problem = cf if f is None else cg
        elif len(set(f.values())) < len(f) or len(set(g.values())) < len(g):
            problem = "nearest-neighbour map is not one-to-one"
        elif any(j in g and g[j] != i for i, j in f.items()) or any(i in f and f[i] != j for j, i in g.items()):
            problem = "maps are not mutually inverse"
        if problem:
            rows.append(DistanceRow(eps, "fail" if unique else "inconclusive", problem))
            continue
        ok = True
        if cf and cg:
            ok = all(_sum_below(a, b, la + lb, 2 * eps) for a, la in _worst(cf) for b, lb in _worst(cg))
        else:
            for costs in (cf, cg):
                if costs:
                    ok = ok and all(_sum_below(a, Fraction(0), la, 2 * eps) for a, la in _worst(costs))
        if ok:
            rows.append(DistanceRow(eps, "pass"))
            if best is None:
                best = eps
        else:
            rows.append(DistanceRow(eps, "fail" if unique else "inconclusive", "bound 2 eps exceeded"))
    return DistanceResult(best, tuple(rows))


# ---------------------------------------------------------------------------
# 1D transversal


def in_canonical_transversal(T: Tiling1D) -> bool:
    """True iff the origin is a vertex of T."""
    return T.origin_offset.sign() == 0
