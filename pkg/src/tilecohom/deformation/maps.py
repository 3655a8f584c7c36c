"""Shape deformations: new tile lengths read off a PE cochain, the induced
piecewise-linear orbit maps, and the conjugacy test by cohomology class."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..cochain import (
    BoundedExact,
    BoundednessConfig,
    NumericEvidence,
    PECochain,
    UnboundedExact,
    _profile,
    class_equal,
    delta_x,
    integral_vectors,
)
from ..exactnum import ONE, ZERO, FieldScalar
from ..substitution import (
    SubstitutionRule,
    Tiling1D,
    generate_window,
    legal_two_letter_words,
    supertile_counts,
    supertile_lengths,
)


class DeformationError(ValueError):
    pass


@dataclass(frozen=True)
class Deformation:
    """Tile lengths given by ``new_lengths``; ``contexts`` lists every
    (old length, new length) pair met while certifying positivity."""

    rule: SubstitutionRule
    new_lengths: PECochain
    min_length: FieldScalar
    contexts: tuple

    def inverse(self) -> "Deformation":
        """Swap old and new lengths (applied to a deformed tiling, gives the original back)."""
        back = delta_x(self.rule)
        pairs = tuple(sorted({(new, old) for old, new in self.contexts}, key=lambda p: (float(p[0]), float(p[1]))))
        return Deformation(self.rule, back, min(self.rule.lengths), pairs)


def _context_windows(rule: SubstitutionRule, level: int):
    for pair in sorted(legal_two_letter_words(rule)):
        yield pair, generate_window(rule, f"{pair[0]}|{pair[1]}", max(level, 1))


def make_deformation(rule: SubstitutionRule, new_lengths: PECochain) -> Deformation:
    """Certify that ``new_lengths`` is positive on every tile in every legal
    context up to its max level."""
    level = new_lengths.max_level
    slack = ZERO
    if new_lengths.tail is not None:
        q = new_lengths.tail
        if q.x < 0 or q.coeff.sign() < 0:
            slack = q.sup_bound()
    lowest, witness = None, None
    pairs = set()
    for pair, T in _context_windows(rule, level):
        prof = _profile(new_lengths, T)
        seen = set()
        for i in range(len(T) - 1):
            key = int(prof.key[i])
            if key in seen:
                continue
            seen.add(key)
            v = prof.value(i)
            pairs.add((T.lengths[i], v))
            if lowest is None or v < lowest:
                lowest = v
                witness = (pair, i, "".join(T.ancestor(k, i) for k in range(T.depth + 1)))
    bound = lowest - slack
    if bound.sign() <= 0:
        pair, i, chain = witness
        raise DeformationError(
            f"non-positive length {lowest} (tail allowance {slack}) on tile {i} of window {pair[0]}|{pair[1]}, "
            f"ancestor types by level {chain}")
    ordered = tuple(sorted(pairs, key=lambda p: (float(p[0]), float(p[1]))))
    return Deformation(rule, new_lengths, bound, ordered)


def deform_tiling(T: Tiling1D, d: Deformation) -> Tiling1D:
    """Same tile sequence, lengths from ``d``; the origin keeps its fraction
    of the way across its tile."""
    prof = _profile(d.new_lengths, T)
    lengths = [prof.value(i) for i in range(len(T))]
    o = T.origin_tile
    frac = T.origin_offset / T.lengths[o]
    lefts = [ZERO] * len(T)
    x = ZERO
    for i, L in enumerate(lengths):
        lefts[i] = x
        x = x + L
    shift = lefts[o] + frac * lengths[o]
    lefts = [p - shift for p in lefts]
    return Tiling1D(T.rule, T.types, lefts, lengths, T.ancestry)


@dataclass(frozen=True)
class OrbitMap:
    """h_T: linear on each tile of ``base``, onto the matching tile of ``image``."""

    base: Tiling1D
    image: Tiling1D

    def slope(self, i: int) -> FieldScalar:
        return self.image.lengths[i] / self.base.lengths[i]

    def slopes(self) -> set:
        return {self.slope(i) for i in range(len(self.base))}

    def __call__(self, x) -> FieldScalar:
        x = FieldScalar.coerce(x)
        i = self.base.locate(x)
        return self.image.lefts[i] + (x - self.base.lefts[i]) * self.slope(i)

    def cocycle(self, x, v) -> FieldScalar:
        x = FieldScalar.coerce(x)
        return self(x + FieldScalar.coerce(v)) - self(x)

    def at_float(self, xs: np.ndarray) -> np.ndarray:
        b = self.base._float_lefts
        i = np.clip(np.searchsorted(b, xs, side="right") - 1, 0, len(b) - 1)
        old = np.array([float(L) for L in self.base.lengths])
        new = np.array([float(L) for L in self.image.lengths])
        return self.image._float_lefts[i] + (xs - b[i]) * new[i] / old[i]


def orbit_map(T: Tiling1D, d: Deformation) -> OrbitMap:
    return OrbitMap(T, deform_tiling(T, d))


def lipschitz_constants(d: Deformation) -> tuple[FieldScalar, FieldScalar]:
    """(lam, C) with lam^-1 |x| - C <= |h_T(x)| <= lam |x| + C."""
    lam = ONE
    for old, new in d.contexts:
        for ratio in (new / old, old / new):
            if ratio > lam:
                lam = ratio
    C = max(old for old, _ in d.contexts) + max(new for _, new in d.contexts)
    return lam, C


def deformation_class(d: Deformation) -> PECochain:
    return d.new_lengths


def deformation_class_at_level(rule: SubstitutionRule, new_lengths: PECochain, n: int) -> PECochain:
    """Spread each level-n supertile's new length evenly over its tiles:
    sum_t |T'_n(t)| / w_n(t) * iota(n, t)."""
    if not new_lengths.is_strong or new_lengths.coboundaries:
        raise ValueError("level re-expression needs a strong cochain without coboundary parts")
    if n < new_lengths.max_level:
        raise ValueError(f"level {n} is below the cochain's max level")
    counts = supertile_counts(rule, n)
    vec = integral_vectors(new_lengths, rule, n)[n]
    return PECochain(tuple((n, t, vec[j] / counts[j]) for j, t in enumerate(rule.alphabet)))


# ---------------------------------------------------------------------------
# conjugacy


@dataclass(frozen=True)
class ConjugateToOriginal:
    certificate: BoundedExact
    sup_displacement: FieldScalar
    sampled: int
    length_differences: tuple  # (n, max_t |T_n(t)| - |T'_n(t)|) as floats
    decay_ratio: float
    verdict: str = "ConjugateToOriginal"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "certificate": self.certificate.to_json(),
            "sup_displacement": float(self.sup_displacement),
            "sampled_points": self.sampled,
            "length_differences": [{"n": n, "difference": d} for n, d in self.length_differences],
            "decay_ratio": self.decay_ratio,
        }


@dataclass(frozen=True)
class NotConjugate:
    growth: FieldScalar
    certificate: UnboundedExact
    verdict: str = "NotConjugate"

    def to_json(self) -> dict:
        g = self.growth
        return {"verdict": self.verdict, "growth": _growth_name(g), "growth_exact": g.to_json(),
                "growth_float": float(g), "certificate": self.certificate.to_json()}


@dataclass(frozen=True)
class Inconclusive:
    evidence: NumericEvidence
    verdict: str = "Inconclusive"

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "evidence": self.evidence.to_json()}


def _growth_name(g: FieldScalar) -> str:
    from ..exactnum import PHI

    return "phi" if g == PHI else str(g)


def length_differences(d: Deformation, levels: Sequence[int]) -> list[tuple[int, FieldScalar]]:
    """Exact max_t | |T_n(t)| - |T'_n(t)| | for each level n."""
    rule = d.rule
    out = []
    top = max(levels)
    new = integral_vectors(d.new_lengths, rule, top)
    for n in levels:
        if n < d.new_lengths.max_level:
            continue
        old = supertile_lengths(rule, n)
        diffs = [abs(old[t] - new[n][j]) for j, t in enumerate(rule.alphabet)]
        out.append((n, max(diffs)))
    return out


def fit_ratio(table: Sequence[tuple[int, float]]) -> float:
    pts = [(n, math.log(v)) for n, v in table if v > 0]
    if len(pts) < 2:
        return 0.0
    slope = np.polyfit([p[0] for p in pts], [p[1] for p in pts], 1)[0]
    return float(math.exp(slope))


def conjugacy_check(d: Deformation, samples: int = 2000, level: int = 12, seed: int = 0,
                    levels: Sequence[int] = tuple(range(2, 21)), config: BoundednessConfig | None = None):
    rule = d.rule
    same, verdict = class_equal(deformation_class(d), delta_x(rule), rule, config)
    if same is None:
        return Inconclusive(verdict)
    if not same:
        return NotConjugate(verdict.growth_rate, verdict)
    T = generate_window(rule, _first_seed(rule), level)
    h = orbit_map(T, d)
    rng = np.random.default_rng(seed)
    lo, hi = (float(v) for v in T.window)
    sup = ZERO
    for u in rng.uniform(lo, hi, samples):
        x = FieldScalar.coerce(str(round(u, 6)))
        if not (T.window[0] <= x <= T.window[1]):
            continue
        dev = abs(h(x) - x)
        if dev > sup:
            sup = dev
    for x in T.vertices:
        dev = abs(h(x) - x)
        if dev > sup:
            sup = dev
    diffs = [(n, float(v)) for n, v in length_differences(d, levels)]
    return ConjugateToOriginal(verdict, sup, samples + len(T) + 1, tuple(diffs), fit_ratio(diffs))


def _first_seed(rule: SubstitutionRule) -> str:
    pair = sorted(legal_two_letter_words(rule))[0]
    return f"{pair[0]}|{pair[1]}"
