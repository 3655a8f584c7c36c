"""Substitution rules, supertiles and finite tiling windows in dimension one.

Matrix orientation used throughout the package: ``M[u, t]`` is the number of
occurrences of letter ``u`` in ``sigma(t)``.  Columns index the substituted
letter.  With this convention letter frequencies form the Perron *right*
eigenvector and supertile lengths evolve as the row vector ``lengths @ M**n``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .exactnum import (
    ONE,
    ZERO,
    ExactMatrix,
    FieldScalar,
    NonPrimitiveError,
    PerronDecomposition,
    common_field,
    perron_decomposition,
    primitivity_exponent,
)


class RuleError(ValueError):
    """Invalid substitution rule or rule file."""


class AncestryError(ValueError):
    """The window does not determine a requested supertile ancestor."""


@dataclass(frozen=True)
class SubstitutionRule:
    alphabet: tuple[str, ...]
    words: tuple[str, ...]  # sigma(alphabet[i])
    lengths: tuple[FieldScalar, ...]

    @classmethod
    def build(cls, substitution: Mapping[str, str], lengths: Mapping[str, object] | None = None,
              alphabet: Sequence[str] | None = None) -> "SubstitutionRule":
        alphabet = tuple(alphabet) if alphabet is not None else tuple(substitution)
        if lengths is None:
            lengths = {t: 1 for t in alphabet}
        try:
            words = tuple(substitution[t] for t in alphabet)
            lens = tuple(FieldScalar.from_json(lengths[t]) for t in alphabet)
        except KeyError as exc:
            raise RuleError(f"missing entry for letter {exc}") from None
        return cls(alphabet, words, lens)

    def __post_init__(self):
        if len(set(self.alphabet)) != len(self.alphabet) or not self.alphabet:
            raise RuleError("alphabet must be non-empty with distinct letters")
        if any(len(t) != 1 for t in self.alphabet):
            raise RuleError("letters must be single characters")
        if len(self.words) != len(self.alphabet) or len(self.lengths) != len(self.alphabet):
            raise RuleError("one word and one length per letter required")
        for t, w in zip(self.alphabet, self.words):
            if not w:
                raise RuleError(f"empty substitution word for {t!r}")
            bad = set(w) - set(self.alphabet)
            if bad:
                raise RuleError(f"sigma({t}) uses unknown letters {sorted(bad)}")
        for t, L in zip(self.alphabet, self.lengths):
            if L.sign() <= 0:
                raise RuleError(f"length of {t!r} must be positive, got {L}")
        common_field(self.lengths)

    # -- lookups ---------------------------------------------------------------

    def index(self, t: str) -> int:
        try:
            return self._index[t]
        except KeyError:
            raise RuleError(f"unknown tile type {t!r}") from None

    @cached_property
    def _index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.alphabet)}

    def sigma(self, t: str) -> str:
        return self.words[self.index(t)]

    def length(self, t: str) -> FieldScalar:
        return self.lengths[self.index(t)]

    def with_lengths(self, lengths: Mapping[str, object]) -> "SubstitutionRule":
        return SubstitutionRule.build(dict(zip(self.alphabet, self.words)), lengths, self.alphabet)

    @cached_property
    def matrix(self) -> ExactMatrix:
        k = len(self.alphabet)
        rows = [[self.words[t].count(u) for t in range(k)] for u in self.alphabet]
        assert len(rows) == k
        return ExactMatrix(rows)

    @cached_property
    def int_matrix(self) -> np.ndarray:
        return np.array([[w.count(u) for w in self.words] for u in self.alphabet], dtype=object)

    @cached_property
    def max_word_length(self) -> int:
        return max(len(w) for w in self.words)

    @cached_property
    def _supertiles(self) -> dict:
        return {}

    @cached_property
    def eigen(self) -> PerronDecomposition:
        return perron_decomposition(self.matrix)

    # -- serialization -----------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "substitution": dict(zip(self.alphabet, self.words)),
            "lengths": {t: L.to_json() for t, L in zip(self.alphabet, self.lengths)},
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "SubstitutionRule":
        if not isinstance(obj, Mapping) or "substitution" not in obj:
            raise RuleError("rule JSON needs a 'substitution' object")
        sub = obj["substitution"]
        alphabet = obj.get("alphabet", list(sub))
        try:
            return cls.build(sub, obj.get("lengths"), alphabet)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, RuleError):
                raise
            raise RuleError(str(exc)) from None


DATA_DIR = Path(__file__).parent / "data"


def load_rule(ref: str | Path | Mapping) -> SubstitutionRule:
    """Load a rule from a JSON mapping, a file path, or a bundled name
    (``fibonacci``, ``fibonacci_rational``, ``thue_morse``)."""
    if isinstance(ref, Mapping):
        return SubstitutionRule.from_json(ref)
    path = Path(ref)
    if not path.exists():
        bundled = DATA_DIR / f"{path.stem}.json"
        if path.suffix in ("", ".json") and bundled.exists():
            path = bundled
        else:
            raise RuleError(f"rule file not found: {ref}")
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise RuleError(f"{path}: invalid JSON ({exc})") from None
    return SubstitutionRule.from_json(obj)


def fibonacci(lengths=None) -> SubstitutionRule:
    """a -> ab, b -> a with lengths (phi, 1) unless given."""
    if lengths is None:
        lengths = {"a": FieldScalar("1/2", "1/2", 5), "b": 1}
    return SubstitutionRule.build({"a": "ab", "b": "a"}, lengths, "ab")


# ---------------------------------------------------------------------------
# operations


@dataclass(frozen=True)
class ValidatedRule:
    rule: SubstitutionRule
    primitivity_exponent: int


def validate_rule(rule: SubstitutionRule) -> ValidatedRule:
    """Certify primitivity: the smallest k <= |alphabet|^2 with M^k > 0.
    Rules whose words all have length one never inflate and are rejected too."""
    k = primitivity_exponent(rule.matrix)
    if k is None:
        raise RuleError("substitution is not primitive")
    if rule.max_word_length < 2:
        raise RuleError("substitution is not expanding")
    return ValidatedRule(rule, k)


def supertile(rule: SubstitutionRule, t: str, n: int) -> str:
    """The word sigma^n(t)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    rule.index(t)
    memo = rule._supertiles
    key = (t, n)
    if key in memo:
        return memo[key]
    if n == 0:
        word = t
    else:
        prev = {u: supertile(rule, u, n - 1) for u in set(rule.sigma(t))}
        word = "".join(prev[u] for u in rule.sigma(t))
    memo[key] = word
    return word


def supertile_counts(rule: SubstitutionRule, n: int) -> list[int]:
    """Number of tiles in each level-n supertile, per type (exact integers)."""
    counts = [1] * len(rule.alphabet)
    for _ in range(n):
        counts = [sum(counts[rule.index(u)] for u in w) for w in rule.words]
    return counts


def supertile_lengths(rule: SubstitutionRule, n: int, lengths: Sequence[FieldScalar] | Mapping | None = None
                      ) -> dict[str, FieldScalar]:
    """|T_n(t)| for every type t: total length of sigma^n(t)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if lengths is None:
        vec = list(rule.lengths)
    elif isinstance(lengths, Mapping):
        vec = [FieldScalar.coerce(lengths[t]) for t in rule.alphabet]
    else:
        vec = [FieldScalar.coerce(v) for v in lengths]
    for _ in range(n):
        vec = [sum((vec[rule.index(u)] for u in w), ZERO) for w in rule.words]
    return dict(zip(rule.alphabet, vec))


def legal_two_letter_words(rule: SubstitutionRule) -> frozenset[str]:
    """All two-letter words occurring in some supertile."""
    found = set()
    for w in rule.words:
        found.update(w[i:i + 2] for i in range(len(w) - 1))
    frontier = set(found)
    while frontier:
        new = set()
        for uv in frontier:
            img = rule.sigma(uv[0]) + rule.sigma(uv[1])
            new.update(img[i:i + 2] for i in range(len(img) - 1))
        frontier = new - found
        found |= new
    return frozenset(found)


@dataclass(frozen=True)
class PerronData:
    eigenvalue: FieldScalar | float
    letter_frequencies: dict
    length_fractions: dict
    mean_tile_length: FieldScalar | float
    exact: bool = True


def perron_data(rule: SubstitutionRule) -> PerronData:
    """Letter frequencies (normalized Perron right eigenvector of M),
    length fractions and mean tile length."""
    validate_rule(rule)
    eig = rule.eigen
    freqs = list(eig.perron_right)
    if eig.exact:
        lens = list(rule.lengths)
        mean = sum((f * L for f, L in zip(freqs, lens)), ZERO)
    else:
        lens = [float(L) for L in rule.lengths]
        mean = sum(f * L for f, L in zip(freqs, lens))
    fracs = [f * L / mean for f, L in zip(freqs, lens)]
    return PerronData(
        eigenvalue=eig.perron_value,
        letter_frequencies=dict(zip(rule.alphabet, freqs)),
        length_fractions=dict(zip(rule.alphabet, fracs)),
        mean_tile_length=mean,
        exact=eig.exact,
    )


# ---------------------------------------------------------------------------
# tiling windows


@dataclass(eq=False)
class Tiling1D:
    """A finite window of a 1D tiling.

    ``lefts[i]`` is the left endpoint of tile ``i`` in coordinates where the
    origin sits at 0.  ``ancestry[k, i]`` is the alphabet index of the level-k
    supertile containing tile ``i`` (row 0 is the tile type itself), known for
    ``k <= depth``.
    """

    rule: SubstitutionRule
    types: str
    lefts: list[FieldScalar]
    lengths: list[FieldScalar]
    ancestry: np.ndarray
    _float_lefts: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self._float_lefts is None:
            self._float_lefts = np.array([float(x) for x in self.lefts])

    def __len__(self) -> int:
        return len(self.types)

    @property
    def depth(self) -> int:
        return self.ancestry.shape[0] - 1

    @property
    def window(self) -> tuple[FieldScalar, FieldScalar]:
        return self.lefts[0], self.lefts[-1] + self.lengths[-1]

    def right(self, i: int) -> FieldScalar:
        return self.lefts[i] + self.lengths[i]

    @property
    def vertices(self) -> list[FieldScalar]:
        return list(self.lefts) + [self.window[1]]

    def locate(self, x) -> int:
        """Index of the tile with ``left <= x < right`` (last tile for the right end)."""
        x = FieldScalar.coerce(x)
        lo, hi = self.window
        if x < lo or x > hi:
            raise ValueError(f"point {float(x):.6g} outside window [{float(lo):.6g}, {float(hi):.6g}]")
        i = int(np.searchsorted(self._float_lefts, float(x), side="right")) - 1
        i = min(max(i, 0), len(self) - 1)
        while i > 0 and x < self.lefts[i]:
            i -= 1
        while i + 1 < len(self) and x >= self.lefts[i + 1]:
            i += 1
        return i

    @property
    def origin_tile(self) -> int:
        return self.locate(ZERO)

    @property
    def origin_offset(self) -> FieldScalar:
        """Distance from the left end of the tile containing 0 to the origin."""
        return -self.lefts[self.origin_tile]

    def ancestor(self, level: int, i: int) -> str:
        if level > self.depth:
            raise AncestryError(f"level-{level} ancestor not determined by a depth-{self.depth} window")
        return self.rule.alphabet[int(self.ancestry[level, i])]

    def translate(self, s) -> "Tiling1D":
        """The tiling ``T - s``."""
        s = FieldScalar.coerce(s)
        return Tiling1D(self.rule, self.types, [x - s for x in self.lefts], list(self.lengths), self.ancestry,
                        self._float_lefts - float(s))

    def check_abutment(self) -> bool:
        return all(self.lefts[i] + self.lengths[i] == self.lefts[i + 1] for i in range(len(self) - 1))


def _expand(rule: SubstitutionRule, t: str, n: int) -> np.ndarray:
    """Ancestry rows (levels 0..n) for the tiles of sigma^n(t)."""
    codes = np.empty((n + 1, len(supertile(rule, t, n))), dtype=np.int16)
    for k in range(n + 1):
        parents = np.array([rule.index(u) for u in supertile(rule, t, n - k)], dtype=np.int16)
        sizes = np.array(supertile_counts(rule, k), dtype=np.int64)[parents]
        codes[k] = np.repeat(parents, sizes)
    return codes


def parse_seed(rule: SubstitutionRule, seed: str) -> tuple[str, str]:
    parts = seed.replace(" ", "").split("|")
    if len(parts) != 2 or any(len(p) != 1 for p in parts):
        raise RuleError(f"seed must look like 'a|b', got {seed!r}")
    left, right = parts
    rule.index(left), rule.index(right)
    if left + right not in legal_two_letter_words(rule):
        raise RuleError(f"seed {left}{right} is not a legal word")
    return left, right


def generate_window(rule: SubstitutionRule, seed: str, n: int) -> Tiling1D:
    """sigma^n(left) . sigma^n(right) with the origin at the junction."""
    if n < 1:
        raise ValueError("n must be >= 1")
    left, right = parse_seed(rule, seed)
    wl, wr = supertile(rule, left, n), supertile(rule, right, n)
    types = wl + wr
    ancestry = np.concatenate([_expand(rule, left, n), _expand(rule, right, n)], axis=1)
    lens_by_type = {t: rule.length(t) for t in rule.alphabet}
    lengths = [lens_by_type[c] for c in types]
    lefts = [ZERO] * len(types)
    x = ZERO
    for i in range(len(wl) - 1, -1, -1):
        x = x - lengths[i]
        lefts[i] = x
    x = ZERO
    for i in range(len(wl), len(types)):
        lefts[i] = x
        x = x + lengths[i]
    return Tiling1D(rule, types, lefts, lengths, ancestry)


def with_origin_fraction(T: Tiling1D, tile: int, fraction) -> Tiling1D:
    """Translate ``T`` so the origin sits ``fraction`` of the way across ``tile``."""
    f = FieldScalar.coerce(fraction)
    target = T.lefts[tile] + f * T.lengths[tile]
    return T.translate(target)
