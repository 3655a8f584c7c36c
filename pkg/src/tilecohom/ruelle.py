"""Ruelle-Sullivan averages of 1-cochains in dimension one.

The average of a cochain is its integral per unit length, taken in the limit
over large patches.  For a substitution tiling it has a closed form: a level-n
supertile of type u occurs with density ``r_u / lambda**n`` per tile, where r
is the normalized Perron right eigenvector, and covers ``w_n(u)`` tiles.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cochain import PECochain, _profile, integral_vectors
from .exactnum import ONE, ZERO, FieldScalar, eigen_projector
from .substitution import SubstitutionRule, Tiling1D, perron_data, supertile_counts


@dataclass(frozen=True)
class Enclosure:
    """Floating estimate with a radius, used when eigen-data are inexact."""

    mid: float
    radius: float

    def contains_zero(self) -> bool:
        return abs(self.mid) <= self.radius


def _column_sums_decomposition(rule: SubstitutionRule):
    """Pairs (mu, a_mu) with w_n(p) = sum_mu a_mu[p] * mu**n for every n."""
    ones = [ONE] * len(rule.alphabet)
    out = []
    for es in rule.eigen.eigenspaces:
        if not es.semisimple:
            return None
        out.append((es.value, eigen_projector(es).rvecmul(ones)))
    return out


def _tail_average(c: PECochain, rule: SubstitutionRule, freqs, lam) -> FieldScalar:
    q = c.tail
    decomposition = _column_sums_decomposition(rule)
    if decomposition is None:
        raise ValueError("tail summation needs a diagonalizable substitution matrix")
    p = rule.index(q.pattern)
    x = FieldScalar(q.x)
    total = ZERO
    for mu, a in decomposition:
        if not a[p]:
            continue
        ratio = x * mu / lam
        total = total + a[p] * ratio ** q.start / (1 - ratio)
    return q.coeff * freqs[p] * total


def rs_exact(c: PECochain, rule: SubstitutionRule) -> FieldScalar | Enclosure:
    """Average of ``c`` per unit length under the unique invariant measure."""
    pd = perron_data(rule)
    if not pd.exact:
        return _rs_float(c, rule)
    freqs = [pd.letter_frequencies[t] for t in rule.alphabet]
    lam = pd.eigenvalue
    per_tile = ZERO
    for n, t, coef in c.terms:
        j = rule.index(t)
        per_tile = per_tile + coef * freqs[j] * supertile_counts(rule, n)[j] / lam ** n
    if c.tail is not None:
        per_tile = per_tile + _tail_average(c, rule, freqs, lam)
    value = per_tile / pd.mean_tile_length
    if c.is_strong:
        check = _rs_via_projection(c, rule)
        if check != value:
            raise ArithmeticError(f"average mismatch: {value} vs {check}")
    return value


def _rs_via_projection(c: PECochain, rule: SubstitutionRule) -> FieldScalar:
    """lim I(m,t)/|T_m(t)| = (V_N . r) / (lambda**N * (L . r))."""
    eig = rule.eigen
    N = c.max_level
    v = integral_vectors(c, rule, N)[N]
    r = eig.perron_right
    num = sum((a * b for a, b in zip(v, r)), ZERO)
    den = sum((a * b for a, b in zip(rule.lengths, r)), ZERO)
    return num / (eig.perron_value ** N * den)


def _rs_float(c: PECochain, rule: SubstitutionRule) -> Enclosure:
    eig = rule.eigen
    r = np.real(np.array(eig.perron_right, dtype=complex))
    lam = float(np.real(complex(eig.perron_value)))
    M = rule.matrix.to_float()
    lengths = np.array([float(L) for L in rule.lengths])
    mean = float(r @ lengths)
    per_tile = 0.0
    for n, t, coef in c.terms:
        j = rule.index(t)
        w = np.ones(len(r)) @ np.linalg.matrix_power(M, n)
        per_tile += float(coef) * r[j] * w[j] / lam ** n
    if c.tail is not None:
        q = c.tail
        j = rule.index(q.pattern)
        n = q.start
        w = np.ones(len(r)) @ np.linalg.matrix_power(M, n)
        term = 1.0
        while abs(term) > 1e-18 and n < q.start + 10000:
            term = float(q.coeff) * float(q.x) ** n * r[j] * w[j] / lam ** n
            per_tile += term
            w = w @ M
            n += 1
    width = max(eig.widths, default=0.0)
    value = per_tile / mean
    return Enclosure(value, abs(value) * 1e-12 + width * (1 + abs(value)) * 10)


def rs_limit_ratio(c: PECochain, rule: SubstitutionRule, m: int) -> dict[str, float]:
    """I(m,t) / |T_m(t)| for each type, a finite-level approximation of the average."""
    v = integral_vectors(c, rule, m)[m]
    lengths = integral_vectors(PECochain(tuple((0, t, L) for t, L in zip(rule.alphabet, rule.lengths))), rule, m)[m]
    return {t: float(a / b) for t, a, b in zip(rule.alphabet, v, lengths)}


# ---------------------------------------------------------------------------
# empirical averages


@dataclass(frozen=True)
class RSValue:
    exact: FieldScalar | Enclosure | None
    empirical: float
    error_bound: float
    r: FieldScalar
    samples: int

    def to_json(self) -> dict:
        ex = None
        if isinstance(self.exact, FieldScalar):
            ex = {**self.exact.to_json(), "float": float(self.exact)}
        elif isinstance(self.exact, Enclosure):
            ex = {"mid": self.exact.mid, "radius": self.exact.radius}
        # scalar average reported as a 1x1 matrix
        return {"exact": [[ex]], "empirical": [[self.empirical]], "error_bound": self.error_bound,
                "r": str(self.r), "samples": self.samples}


@dataclass
class ConvergenceTable:
    rows: list = field(default_factory=list)  # (r, center, average, deviation)

    def max_deviation(self, r) -> float:
        return max(d for rr, _, _, d in self.rows if rr == r)

    def radii(self) -> list:
        return sorted({rr for rr, _, _, _ in self.rows})

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "center", "average", "deviation"])
        for r, x, avg, dev in self.rows:
            w.writerow([str(r), repr(float(x)), repr(avg), repr(dev)])
        return buf.getvalue()


def default_centers(T: Tiling1D, margin, count: int = 32) -> list[FieldScalar]:
    """``count`` vertices spread evenly over the part of the window at least
    ``margin`` from either end (the last tile excluded)."""
    margin = FieldScalar.coerce(margin)
    lo, hi = T.window[0], T.lefts[-1]  # the last tile may lack a right neighbour
    verts = [i for i in range(len(T)) if T.lefts[i] - margin >= lo and T.lefts[i] + margin <= hi]
    if len(verts) < count:
        raise ValueError(f"window too small for {count} centers at margin {float(margin):.6g}")
    picks = np.linspace(0, len(verts) - 1, count).round().astype(int)
    return [T.lefts[verts[k]] for k in picks]


def rs_empirical(c: PECochain, T: Tiling1D, r, centers: Sequence | None = None,
                 exact: FieldScalar | None = None) -> tuple[RSValue, ConvergenceTable]:
    """Averages (1/r) * integral of c over [x - r/2, x + r/2] for each center x."""
    r = FieldScalar.coerce(r)
    if r.sign() <= 0:
        raise ValueError("radius must be positive")
    half = r / 2
    if centers is None:
        centers = default_centers(T, half)
    if exact is None:
        exact = rs_exact(c, T.rule)
    target = float(exact.mid) if isinstance(exact, Enclosure) else float(exact)
    lo, hi = T.window
    prof = _profile(c, T)
    table = ConvergenceTable()
    avgs = []
    for x in centers:
        x = FieldScalar.coerce(x)
        if x - half < lo or x + half > hi:
            raise ValueError("window too small for this radius and center")
        avg = float((prof.primitive(x + half) - prof.primitive(x - half)) / r)
        avgs.append(avg)
        table.rows.append((r, x, avg, abs(avg - target)))
    empirical = float(np.mean(avgs))
    bound = max(abs(a - target) for a in avgs)
    return RSValue(exact, empirical, bound, r, len(avgs)), table


def rs_sweep(c: PECochain, T: Tiling1D, radii: Sequence, count: int = 32) -> tuple[list[RSValue], ConvergenceTable]:
    """Empirical averages over a radius sweep with shared centers."""
    radii = [FieldScalar.coerce(r) for r in radii]
    centers = default_centers(T, max(radii) / 2, count)
    exact = rs_exact(c, T.rule)
    values, table = [], ConvergenceTable()
    for r in radii:
        val, tab = rs_empirical(c, T, r, centers, exact)
        values.append(val)
        table.rows.extend(tab.rows)
    return values, table


# ---------------------------------------------------------------------------
# invertibility


@dataclass(frozen=True)
class InvertibilityCertificate:
    value: FieldScalar | Enclosure
    sign: int | None
    exact: bool

    def to_json(self) -> dict:
        if isinstance(self.value, FieldScalar):
            val = {**self.value.to_json(), "float": float(self.value)}
        else:
            val = {"mid": self.value.mid, "radius": self.value.radius}
        return {"C_mu": val, "sign": self.sign, "exact": self.exact}


def rs_invertible(c: PECochain, rule: SubstitutionRule) -> tuple[bool | None, InvertibilityCertificate]:
    """In d=1 the average is invertible iff it is nonzero."""
    value = rs_exact(c, rule)
    if isinstance(value, FieldScalar):
        s = value.sign()
        return s != 0, InvertibilityCertificate(value, s, True)
    if value.contains_zero():
        return None, InvertibilityCertificate(value, None, False)
    return True, InvertibilityCertificate(value, 1 if value.mid > 0 else -1, False)
