"""Pattern-equivariant 1-cochains on 1D substitution tilings.

A cochain is a finite combination of supertile indicators ``iota(n, t)``
(value 1 on every tile inside a level-n supertile of type t), an optional
combination of collar-rule coboundaries ``delta s``, and an optional
geometric tail ``sum_{n >= start} coeff * x**n * iota(n, pattern)`` that makes
it weakly (not strongly) pattern-equivariant.

The integral of a cochain over a tile is its value on that tile; inside a
tile the integral is interpolated linearly.  Boundedness of integrals is
decided from the supertile-integral recursion ``I(m) = I(m-1) @ M``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .exactnum import ONE, ZERO, ExactMatrix, FieldScalar, eigen_projector
from .substitution import (
    AncestryError,
    SubstitutionRule,
    Tiling1D,
    legal_two_letter_words,
    supertile,
    supertile_counts,
)


def default_horizon() -> int:
    return int(os.environ.get("TILECOHOM_HORIZON", "30"))


# ---------------------------------------------------------------------------
# cochain types


@dataclass(frozen=True)
class ZeroCochain:
    """s(v) = value of the type of the level-n supertile containing the tile
    whose left endpoint is v."""

    level: int
    values: tuple[tuple[str, FieldScalar], ...]

    @classmethod
    def build(cls, level: int, values: Mapping[str, object]) -> "ZeroCochain":
        if level < 0:
            raise ValueError("level must be >= 0")
        return cls(level, tuple(sorted((t, FieldScalar.coerce(v)) for t, v in values.items())))

    def value(self, t: str) -> FieldScalar:
        for u, v in self.values:
            if u == t:
                return v
        return ZERO

    @property
    def sup(self) -> FieldScalar:
        return max((abs(v) for _, v in self.values), default=ZERO)


@dataclass(frozen=True)
class GeometricTail:
    """sum over n >= start of coeff * x**n * iota(n, pattern)."""

    x: Fraction
    start: int
    pattern: str
    coeff: FieldScalar = ONE

    def __post_init__(self):
        if not (-1 < self.x < 1):
            raise ValueError("tail ratio must satisfy |x| < 1")

    def coefficient(self, n: int) -> FieldScalar:
        return self.coeff * FieldScalar(self.x) ** n if n >= self.start else ZERO

    def sup_bound(self) -> FieldScalar:
        """Bound on the tail's value on any tile."""
        ax = abs(self.x)
        return abs(self.coeff) * FieldScalar(ax ** self.start / (1 - ax))


def _canonical_terms(items) -> tuple:
    acc: dict[tuple[int, str], FieldScalar] = {}
    for n, t, c in items:
        if n < 0:
            raise ValueError("levels must be >= 0")
        acc[(n, t)] = acc.get((n, t), ZERO) + FieldScalar.coerce(c)
    return tuple((n, t, c) for (n, t), c in sorted(acc.items()) if c)


def _canonical_cobs(items) -> tuple:
    acc: dict[ZeroCochain, FieldScalar] = {}
    for s, c in items:
        acc[s] = acc.get(s, ZERO) + FieldScalar.coerce(c)
    return tuple((s, c) for s, c in sorted(acc.items(), key=lambda p: (p[0].level, repr(p[0].values))) if c)


@dataclass(frozen=True)
class PECochain:
    terms: tuple = ()
    coboundaries: tuple = ()
    tail: GeometricTail | None = None

    def __post_init__(self):
        object.__setattr__(self, "terms", _canonical_terms(self.terms))
        object.__setattr__(self, "coboundaries", _canonical_cobs(self.coboundaries))

    @property
    def is_strong(self) -> bool:
        return self.tail is None

    @property
    def max_level(self) -> int:
        """Largest level among the explicit terms and coboundary parts."""
        levels = [n for n, _, _ in self.terms] + [s.level for s, _ in self.coboundaries]
        return max(levels, default=0)

    def coefficient(self, n: int, t: str) -> FieldScalar:
        out = ZERO
        for m, u, c in self.terms:
            if m == n and u == t:
                out = c
        if self.tail is not None and self.tail.pattern == t:
            out = out + self.tail.coefficient(n)
        return out

    def level_coefficients(self, n: int) -> dict[str, FieldScalar]:
        out: dict[str, FieldScalar] = {}
        for m, u, c in self.terms:
            if m == n:
                out[u] = out.get(u, ZERO) + c
        if self.tail is not None and n >= self.tail.start:
            u = self.tail.pattern
            out[u] = out.get(u, ZERO) + self.tail.coefficient(n)
        return out

    def types(self) -> set[str]:
        found = {t for _, t, _ in self.terms}
        for s, _ in self.coboundaries:
            found.update(t for t, _ in s.values)
        if self.tail is not None:
            found.add(self.tail.pattern)
        return found

    # -- linear structure ---------------------------------------------------------

    def scale(self, k) -> "PECochain":
        k = FieldScalar.coerce(k)
        tail = None
        if self.tail is not None and k:
            tail = GeometricTail(self.tail.x, self.tail.start, self.tail.pattern, self.tail.coeff * k)
        return PECochain(
            tuple((n, t, c * k) for n, t, c in self.terms),
            tuple((s, c * k) for s, c in self.coboundaries),
            tail,
        )

    def __mul__(self, k):
        return self.scale(k)

    __rmul__ = __mul__

    def __neg__(self):
        return self.scale(-1)

    def __add__(self, other: "PECochain") -> "PECochain":
        if not isinstance(other, PECochain):
            return NotImplemented
        terms = list(self.terms) + list(other.terms)
        tail = self.tail
        if other.tail is not None:
            if tail is None:
                tail = other.tail
            else:
                if tail.x != other.tail.x or tail.pattern != other.tail.pattern:
                    raise ValueError("cannot add geometric tails with different ratio or pattern")
                lo, hi = sorted([tail, other.tail], key=lambda q: q.start)
                # materialize the levels where only the earlier tail is active
                terms += [(n, lo.pattern, lo.coefficient(n)) for n in range(lo.start, hi.start)]
                coeff = lo.coeff + hi.coeff
                tail = GeometricTail(lo.x, hi.start, lo.pattern, coeff) if coeff else None
        return PECochain(tuple(terms), self.coboundaries + other.coboundaries, tail)

    def __sub__(self, other: "PECochain") -> "PECochain":
        return self + (-other)

    def truncation(self, N: int) -> "PECochain":
        """Strong cochain keeping every level <= N (tail levels included)."""
        terms = [term for term in self.terms if term[0] <= N]
        if self.tail is not None:
            terms += [(n, self.tail.pattern, self.tail.coefficient(n)) for n in range(self.tail.start, N + 1)]
        cobs = [(s, c) for s, c in self.coboundaries if s.level <= N]
        return PECochain(tuple(terms), tuple(cobs))

    def residual(self, N: int) -> "PECochain":
        """``self - self.truncation(N)``."""
        terms = [term for term in self.terms if term[0] > N]
        cobs = [(s, c) for s, c in self.coboundaries if s.level > N]
        tail = None
        if self.tail is not None:
            tail = GeometricTail(self.tail.x, max(self.tail.start, N + 1), self.tail.pattern, self.tail.coeff)
        return PECochain(tuple(terms), tuple(cobs), tail)

    def __str__(self):
        parts = [f"({c})*iota({n},{t})" for n, t, c in self.terms]
        parts += [f"({c})*delta s[level {s.level}]" for s, c in self.coboundaries]
        if self.tail is not None:
            q = self.tail
            parts.append(f"({q.coeff})*sum_{{n>={q.start}}} ({q.x})^n iota(n,{q.pattern})")
        return " + ".join(parts) or "0"

    # -- serialization ----------------------------------------------------------------

    def to_json(self) -> dict:
        out: dict = {"terms": [{"level": n, "type": t, "coeff": c.to_json()} for n, t, c in self.terms]}
        if self.coboundaries:
            out["coboundaries"] = [
                {"level": s.level, "values": {t: v.to_json() for t, v in s.values}, "coeff": c.to_json()}
                for s, c in self.coboundaries
            ]
        if self.tail is not None:
            out["tail"] = {"x": str(self.tail.x), "from": self.tail.start, "pattern": self.tail.pattern,
                           "coeff": self.tail.coeff.to_json()}
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "PECochain":
        if not isinstance(obj, Mapping):
            raise ValueError("cochain JSON must be an object")
        terms = [(int(d["level"]), str(d["type"]), FieldScalar.from_json(d.get("coeff", 1)))
                 for d in obj.get("terms", [])]
        cobs = [(ZeroCochain.build(int(d["level"]), {t: FieldScalar.from_json(v) for t, v in d["values"].items()}),
                 FieldScalar.from_json(d.get("coeff", 1))) for d in obj.get("coboundaries", [])]
        tail = None
        if obj.get("tail"):
            q = obj["tail"]
            tail = GeometricTail(Fraction(str(q["x"])), int(q["from"]), str(q["pattern"]),
                                 FieldScalar.from_json(q.get("coeff", 1)))
        return cls(tuple(terms), tuple(cobs), tail)


def delta_x(lengths: Mapping[str, object] | SubstitutionRule) -> PECochain:
    """Displacement cochain: each tile gets its own length."""
    if isinstance(lengths, SubstitutionRule):
        lengths = dict(zip(lengths.alphabet, lengths.lengths))
    terms = []
    for t, L in lengths.items():
        L = FieldScalar.coerce(L)
        if L.sign() <= 0:
            raise ValueError(f"length of {t!r} must be positive")
        terms.append((0, t, L))
    return PECochain(tuple(terms))


def indicator(n: int, t: str) -> PECochain:
    return PECochain(((n, t, ONE),))


def coboundary(s: ZeroCochain) -> PECochain:
    return PECochain((), ((s, ONE),))


# ---------------------------------------------------------------------------
# evaluation and integration on windows


class _Profile:
    """Tile values of a cochain on a window, grouped by local context."""

    def __init__(self, c: PECochain, T: Tiling1D):
        rule = T.rule
        term_levels = sorted({n for n, _, _ in c.terms})
        cob_levels = sorted({s.level for s, _ in c.coboundaries})
        need = max(term_levels + cob_levels, default=0)
        if need > T.depth:
            raise AncestryError(f"cochain needs level-{need} ancestors; window depth is {T.depth}")
        n = len(T)
        rows = [T.ancestry[lv].astype(np.int32) for lv in term_levels]
        for lv in cob_levels:
            rows.append(T.ancestry[lv].astype(np.int32))
            nxt = np.full(n, -1, dtype=np.int32)
            nxt[:-1] = T.ancestry[lv][1:]
            rows.append(nxt)
        if rows:
            keys, inverse = np.unique(np.vstack(rows), axis=1, return_inverse=True)
            inverse = np.asarray(inverse).reshape(-1)
        else:
            keys, inverse = np.zeros((0, 1), dtype=np.int32), np.zeros(n, dtype=np.int64)
        values: list[FieldScalar | None] = []
        for k in range(keys.shape[1]):
            col = keys[:, k]
            pos = 0
            val = ZERO
            anc = {}
            for lv in term_levels:
                anc[lv] = rule.alphabet[col[pos]]
                pos += 1
            for nn, t, coef in c.terms:
                if anc[nn] == t:
                    val = val + coef
            cob_here, cob_next = {}, {}
            for lv in cob_levels:
                cob_here[lv], cob_next[lv] = col[pos], col[pos + 1]
                pos += 2
            for s, coef in c.coboundaries:
                if cob_next[s.level] < 0:
                    val = None
                    break
                here = rule.alphabet[cob_here[s.level]]
                there = rule.alphabet[cob_next[s.level]]
                val = val + coef * (s.value(there) - s.value(here))
            values.append(val)
        self.T = T
        self.values = values
        self.key = inverse
        counts = np.zeros((len(values), n + 1), dtype=np.int64)
        if len(values):
            onehot = np.zeros((len(values), n), dtype=np.int64)
            onehot[inverse, np.arange(n)] = 1
            counts[:, 1:] = np.cumsum(onehot, axis=1)
        self.cum = counts
        self.unknown = [k for k, v in enumerate(values) if v is None]

    def value(self, i: int) -> FieldScalar:
        v = self.values[self.key[i]]
        if v is None:
            raise AncestryError(f"tile {i}: right neighbour outside the window")
        return v

    def vertex_integral(self, i: int) -> FieldScalar:
        """Integral from the left end of the window to vertex ``i``."""
        total = ZERO
        for k, v in enumerate(self.values):
            cnt = int(self.cum[k, i])
            if cnt:
                if v is None:
                    raise AncestryError("integration range reaches an undeterminable tile")
                total = total + v * cnt
        return total

    def primitive(self, x) -> FieldScalar:
        """Integral from the left end of the window to ``x``."""
        T = self.T
        x = FieldScalar.coerce(x)
        i = T.locate(x)
        frac = (x - T.lefts[i]) / T.lengths[i]
        base = self.vertex_integral(i)
        if frac:
            base = base + self.value(i) * frac
        return base

    def float_values(self) -> np.ndarray:
        lut = np.array([float(v) if v is not None else np.nan for v in self.values] or [0.0])
        return lut[self.key]


@lru_cache(maxsize=64)
def _profile(c: PECochain, T: Tiling1D) -> _Profile:
    return _Profile(c, T)


def evaluate(c: PECochain, T: Tiling1D, tile_index: int) -> FieldScalar:
    """Value of the explicit part of ``c`` on one tile (a tail is not evaluated;
    its contribution is bounded by ``c.tail.sup_bound()``)."""
    if not 0 <= tile_index < len(T):
        raise IndexError("tile index outside window")
    return _profile(c, T).value(tile_index)


def tile_values(c: PECochain, T: Tiling1D) -> list[FieldScalar | None]:
    prof = _profile(c, T)
    return [prof.values[k] for k in prof.key]


def integrate(c: PECochain, T: Tiling1D, x0, x1) -> FieldScalar:
    """F(x1) - F(x0) for the piecewise-linear primitive F of ``c``."""
    prof = _profile(c, T)
    return prof.primitive(x1) - prof.primitive(x0)


@dataclass(frozen=True)
class DynamicalCocycle:
    tiling: Tiling1D
    cochain: PECochain

    def __call__(self, x, v) -> FieldScalar:
        x = FieldScalar.coerce(x)
        return integrate(self.cochain, self.tiling, x, x + FieldScalar.coerce(v))

    def on_vertices(self, i: int, j: int) -> FieldScalar:
        """Restriction to the transversal: alpha between vertices i and j."""
        prof = _profile(self.cochain, self.tiling)
        return prof.vertex_integral(j) - prof.vertex_integral(i)


def to_dynamical_cocycle(c: PECochain, T: Tiling1D) -> DynamicalCocycle:
    return DynamicalCocycle(T, c)


# ---------------------------------------------------------------------------
# supertile integrals


def integral_vectors(c: PECochain, rule: SubstitutionRule, upto: int) -> list[list[FieldScalar]]:
    """Rows ``V[m][t]`` = integral of the iota part over a level-m supertile of
    type t, counting only levels <= m (all levels once m >= max_level)."""
    k = len(rule.alphabet)
    out = []
    vec = [ZERO] * k
    for m in range(upto + 1):
        if m:
            vec = [sum((vec[rule.index(u)] for u in w), ZERO) for w in rule.words]
        counts = supertile_counts(rule, m)
        for t, coef in c.level_coefficients(m).items():
            j = rule.index(t)
            vec[j] = vec[j] + coef * counts[j]
        out.append(list(vec))
    return out


def supertile_integral(c: PECochain, rule: SubstitutionRule, t: str, m: int, next_type: str | None = None
                       ) -> FieldScalar:
    """Exact integral of ``c`` over one level-m supertile of type t.

    Coboundary parts need the type of the following level-m supertile.
    Tail levels above ``m`` are not counted.
    """
    if m < c.max_level:
        raise ValueError(f"level {m} is below the cochain's max level {c.max_level}")
    value = integral_vectors(c, rule, m)[m][rule.index(t)]
    if c.coboundaries:
        if next_type is None:
            raise ValueError("coboundary parts need next_type")
        if t + next_type not in legal_two_letter_words(rule):
            raise ValueError(f"{t}{next_type} is not a legal pair")
        for s, coef in c.coboundaries:
            left = supertile(rule, t, m - s.level)[0]
            right = supertile(rule, next_type, m - s.level)[0]
            value = value + coef * (s.value(right) - s.value(left))
    return value


# ---------------------------------------------------------------------------
# boundedness


@dataclass(frozen=True)
class BoundedExact:
    """Integrals are bounded.  ``components`` lists, per eigenvalue, the largest
    entry of the projected level-N integral vector (zero for every eigenvalue
    of modulus >= 1)."""

    supertile_bound: FieldScalar | float
    integral_bound: FieldScalar | float
    components: tuple
    base_level: int
    kind: str = "BoundedExact"

    @property
    def bounded(self) -> bool:
        return True

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "supertile_bound": _num_json(self.supertile_bound),
            "integral_bound": _num_json(self.integral_bound),
            "base_level": self.base_level,
            "components": [{"eigenvalue": _num_json(lam), "max_component": _num_json(v)} for lam, v in self.components],
        }


@dataclass(frozen=True)
class UnboundedExact:
    growth_rate: FieldScalar
    components: tuple
    base_level: int
    kind: str = "UnboundedExact"

    @property
    def bounded(self) -> bool:
        return False

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "growth_rate": _num_json(self.growth_rate),
            "base_level": self.base_level,
            "components": [{"eigenvalue": _num_json(lam), "max_component": _num_json(v)} for lam, v in self.components],
        }


@dataclass(frozen=True)
class NumericEvidence:
    bounded: bool
    max_abs_integral: float
    growth_exponent: float
    levels: tuple[int, int]
    reason: str = ""
    kind: str = "NumericEvidence"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "bounded": self.bounded,
            "max_abs_integral": self.max_abs_integral,
            "growth_exponent": self.growth_exponent,
            "levels": list(self.levels),
            "reason": self.reason,
        }


def _num_json(v):
    if isinstance(v, FieldScalar):
        return {**v.to_json(), "float": float(v)}
    return float(v)


@dataclass(frozen=True)
class BoundednessConfig:
    horizon: int = field(default_factory=default_horizon)
    threshold: float = 1e-3


def fit_log_growth(levels: Sequence[int], values: Sequence[float]) -> float:
    """Least-squares slope of log(value) against level (positive values only)."""
    pts = [(n, math.log(v)) for n, v in zip(levels, values) if v > 0 and math.isfinite(v)]
    if len(pts) < 2:
        return -math.inf
    xs = np.array([p[0] for p in pts], dtype=float)
    ys = np.array([p[1] for p in pts])
    return float(np.polyfit(xs, ys, 1)[0])


def _coboundary_constant(c: PECochain) -> FieldScalar:
    total = ZERO
    for s, coef in c.coboundaries:
        total = total + 2 * abs(coef) * s.sup
    return total


def is_coboundary(c: PECochain, rule: SubstitutionRule, config: BoundednessConfig | None = None):
    """Decide whether the integrals of ``c`` are bounded."""
    config = config or BoundednessConfig()
    if not c.is_strong:
        return _evidence(c, rule, config, "weak cochain (geometric tail)")
    eig = rule.eigen
    if not eig.exact:
        return _evidence(c, rule, config, "inexact eigen-data")
    N = c.max_level
    v = integral_vectors(c, rule, N)[N]
    components = []
    growth = None
    undecided = None  # reason the exact test cannot settle a bounded answer
    defective = False
    contracting = []
    for es in eig.eigenspaces:
        lam = es.value
        modulus = abs(lam)
        if not es.semisimple:
            if modulus >= ONE:
                defective = True
                undecided = undecided or f"eigenvalue {lam} is not semisimple"
            else:
                contracting.append(es)
            continue
        comp = eigen_projector(es).rvecmul(list(v))
        size = max((abs(x) for x in comp), default=ZERO)
        components.append((lam, size))
        if modulus >= ONE and size:
            if modulus == ONE:
                undecided = undecided or f"nonzero component on modulus-1 eigenvalue {lam}"
            elif growth is None or modulus > growth:
                growth = modulus
        elif modulus < ONE:
            contracting.append((es, comp, size))
    # a nonzero component at modulus > 1 forces growth even when a modulus-1
    # part is undecided; a defective expanding block would make the rate unreliable
    if growth is not None and not defective:
        return UnboundedExact(growth, tuple(components), N)
    if undecided:
        return _evidence(c, rule, config, undecided)
    return _bounded_certificate(c, rule, v, contracting, components, N)


def _bounded_certificate(c, rule, v, contracting, components, N) -> BoundedExact:
    exact = all(isinstance(item, tuple) for item in contracting)
    if exact:
        sup_levels = sum((size for _, _, size in contracting), ZERO)
        geometric = sum((size / (1 - abs(es.value)) for es, _, size in contracting), ZERO)
    else:
        # defective contracting block: bound sup_k |w M^k| numerically
        w = np.array([float(x) for x in v])
        M = rule.matrix.to_float()
        sup_levels, geometric = 0.0, 0.0
        for _ in range(100000):
            norm = float(np.max(np.abs(w)))
            sup_levels = max(sup_levels, norm)
            geometric += norm
            if norm < 1e-15:
                break
            w = w @ M
        sup_levels *= 1 + 1e-9
        geometric = geometric * (1 + 1e-9) + 1e-12
    coef_bound = sum((abs(coef) for _, _, coef in c.terms), ZERO)
    widest = [max(supertile_counts(rule, j)) for j in range(N)]
    low = sum((coef_bound * w for w in widest), ZERO)
    sup_low = max((coef_bound * w for w in widest), default=ZERO)
    K = rule.max_word_length
    if exact:
        sup_all = sup_levels if sup_levels > sup_low else sup_low
        integral = 2 * (K - 1) * (low + geometric) + 2 * sup_all + _coboundary_constant(c)
    else:
        sup_all = max(float(sup_levels), float(sup_low))
        integral = 2 * (K - 1) * (float(low) + geometric) + 2 * sup_all + float(_coboundary_constant(c))
    return BoundedExact(sup_levels, integral, tuple(components), N)


def evidence_table(c: PECochain, rule: SubstitutionRule, horizon: int) -> list[tuple[int, float]]:
    start = max(c.max_level, 0)
    vecs = integral_vectors(c, rule, horizon)
    return [(m, max(abs(float(x)) for x in vecs[m])) for m in range(start, horizon + 1)]


def _evidence(c: PECochain, rule: SubstitutionRule, config: BoundednessConfig, reason: str) -> NumericEvidence:
    table = evidence_table(c, rule, config.horizon)
    half = table[len(table) // 2:] if len(table) >= 4 else table
    exponent = fit_log_growth([m for m, _ in half], [v for _, v in half])
    bounded = exponent < config.threshold
    biggest = max((v for _, v in table), default=0.0) + float(_coboundary_constant(c))
    return NumericEvidence(bounded, biggest, exponent, (table[0][0], table[-1][0]), reason)


def class_equal(c1: PECochain, c2: PECochain, rule: SubstitutionRule, config: BoundednessConfig | None = None):
    """(True/False, verdict) when decided exactly; (None, verdict) in evidence mode."""
    verdict = is_coboundary(c1 - c2, rule, config)
    if isinstance(verdict, NumericEvidence):
        return None, verdict
    return verdict.bounded, verdict
