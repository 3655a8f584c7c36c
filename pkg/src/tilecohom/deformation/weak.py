"""Weakly PE cochains built from geometric series of supertile indicators,
and the sibling-supertile test showing they are not strong-plus-bounded."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..cochain import BoundednessConfig, GeometricTail, NumericEvidence, PECochain, fit_log_growth
from ..exactnum import ZERO, FieldScalar
from ..substitution import SubstitutionRule, fibonacci, supertile_counts


def geometric_series_cochain(x, N: int, pattern: str = "a", rule: SubstitutionRule | None = None) -> PECochain:
    """sum_{n=1}^{N} x**n iota(n, pattern) with the remaining levels as a tail."""
    x = Fraction(str(x)) if isinstance(x, float) else Fraction(x)
    if not 0 < x < 1:
        raise ValueError("x must lie in (0, 1)")
    if N < 1:
        raise ValueError("N must be >= 1")
    rule = rule or fibonacci()
    rule.index(pattern)
    if float(x) * float(rule.eigen.perron_value) <= 1:
        warnings.warn(f"x*lambda = {float(x) * float(rule.eigen.perron_value):.4f} <= 1: "
                      "sibling discrepancies stay bounded", stacklevel=2)
    terms = tuple((n, pattern, FieldScalar(x ** n)) for n in range(1, N + 1))
    return PECochain(terms, (), GeometricTail(x, N + 1, pattern))


@dataclass(frozen=True)
class SiblingPair:
    """Inside a level-(n+1) supertile of type ``parent``, two level-(n-1)
    supertiles of type ``child`` whose level-n parents have types ``left`` and
    ``right``; ``positions`` locates them as (child index, grandchild index)."""

    parent: str
    child: str
    left: str
    right: str
    positions: tuple


def find_sibling_pair(rule: SubstitutionRule) -> SiblingPair:
    for P in rule.alphabet:
        kids = rule.sigma(P)
        for i, qi in enumerate(kids):
            for j in range(i + 1, len(kids)):
                qj = kids[j]
                if qi == qj:
                    continue
                for a, u in enumerate(rule.sigma(qi)):
                    b = rule.sigma(qj).find(u)
                    if b >= 0:
                        return SiblingPair(P, u, qi, qj, ((i, a), (j, b)))
    raise ValueError("no sibling pair with distinct parents")


def sibling_discrepancy(c: PECochain, rule: SubstitutionRule, n: int, pair: SiblingPair | None = None
                        ) -> tuple[FieldScalar, FieldScalar]:
    """Exact iota-part of (integral over first copy) - (integral over second
    copy), plus an allowance covering any coboundary parts."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pair = pair or find_sibling_pair(rule)
    w = supertile_counts(rule, n - 1)[rule.index(pair.child)]
    disc = (c.coefficient(n, pair.left) - c.coefficient(n, pair.right)) * w
    allowance = ZERO
    for s, coef in c.coboundaries:
        allowance = allowance + 4 * abs(coef) * s.sup
    return disc, allowance


@dataclass(frozen=True)
class GrowthFit:
    exponent: float
    table: tuple  # (n, discrepancy, allowance)
    pair: SiblingPair

    def to_json(self) -> dict:
        return {
            "exponent": self.exponent,
            "pair": {"parent": self.pair.parent, "child": self.pair.child,
                     "left": self.pair.left, "right": self.pair.right},
            "table": [{"n": n, "discrepancy": float(d), "allowance": float(a)} for n, d, a in self.table],
        }


def _fit(table) -> float:
    values = [abs(float(d)) + float(a) for _, d, a in table]
    if all(v == 0 for v in values):
        return -math.inf
    if max(values) == min(values):
        return 0.0
    return fit_log_growth([n for n, _, _ in table], values)


def unboundedness_growth(c: PECochain, rule: SubstitutionRule | None = None, levels: Sequence[int] = range(5, 26),
                         config: BoundednessConfig | None = None) -> GrowthFit:
    """Fit log|sibling discrepancy| against n; positive exponent means unbounded integrals."""
    rule = rule or fibonacci()
    config = config or BoundednessConfig()
    levels = list(levels)
    if max(levels) > config.horizon:
        raise ValueError(f"level {max(levels)} exceeds horizon {config.horizon}")
    pair = find_sibling_pair(rule)
    table = tuple((n, *sibling_discrepancy(c, rule, n, pair)) for n in levels)
    return GrowthFit(_fit(table), table, pair)


@dataclass(frozen=True)
class DefectTable:
    rows: tuple  # (N, NumericEvidence)
    applicable: bool
    note: str

    @property
    def all_unbounded(self) -> bool:
        return bool(self.rows) and all(not ev.bounded for _, ev in self.rows)

    def to_json(self) -> dict:
        return {"applicable": self.applicable, "note": self.note,
                "rows": [{"N": N, **ev.to_json()} for N, ev in self.rows]}


def strongly_pe_defect(c: PECochain, N_max: int, rule: SubstitutionRule | None = None,
                       levels: Sequence[int] = range(5, 26), config: BoundednessConfig | None = None) -> DefectTable:
    """For each N <= N_max, test whether c minus its level-N truncation still
    has growing sibling discrepancies (so no strong part absorbs it)."""
    rule = rule or fibonacci()
    config = config or BoundednessConfig()
    if c.is_strong:
        return DefectTable((), False, "strong cochain: nothing to absorb")
    lam = float(rule.eigen.perron_value)
    applicable = abs(float(c.tail.x)) * lam > 1
    rows = []
    for N in range(0, N_max + 1):
        res = c.residual(N)
        lv = [n for n in levels if n > N]
        fit = unboundedness_growth(res, rule, lv, config)
        biggest = max(abs(float(d)) + float(a) for _, d, a in fit.table)
        ev = NumericEvidence(not (fit.exponent >= config.threshold), biggest, fit.exponent, (lv[0], lv[-1]),
                             "sibling discrepancy of the residual")
        rows.append((N, ev))
    note = "" if applicable else f"x*lambda = {abs(float(c.tail.x)) * lam:.4f} <= 1: demonstration inapplicable"
    return DefectTable(tuple(rows), applicable, note)
