from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tilecohom.exactnum import ONE, PHI, ZERO, FieldScalar
from tilecohom.substitution import (
    RuleError,
    SubstitutionRule,
    fibonacci,
    generate_window,
    legal_two_letter_words,
    load_rule,
    perron_data,
    supertile,
    supertile_lengths,
    validate_rule,
    with_origin_fraction,
)

EQUAL_LEN = (2 + PHI) / (1 + PHI)


def test_validate_examples(fib):
    assert validate_rule(fib).primitivity_exponent == 2
    assert validate_rule(load_rule("thue_morse")).primitivity_exponent == 1
    with pytest.raises(RuleError):
        validate_rule(SubstitutionRule.build({"a": "a"}))
    with pytest.raises(RuleError):
        validate_rule(SubstitutionRule.build({"a": "a", "b": "b"}))


def test_rejects_bad_rules():
    with pytest.raises(RuleError):
        SubstitutionRule.build({"a": "", "b": "a"})
    with pytest.raises(RuleError):
        SubstitutionRule.build({"a": "ab", "b": "a"}, {"a": 0, "b": 1})
    with pytest.raises(RuleError):
        SubstitutionRule.build({"a": "ab", "b": "a"}, {"a": -1, "b": 1})


def test_supertile_examples(fib):
    assert supertile(fib, "a", 3) == "abaab"
    assert supertile(fib, "b", 3) == "aba"
    assert supertile(fib, "b", 0) == "b"
    with pytest.raises(RuleError):
        supertile(fib, "c", 2)


def test_supertile_concatenation(fib):
    tm = load_rule("thue_morse")
    for rule in (fib, tm):
        for t in rule.alphabet:
            for n in range(12):
                expected = "".join(supertile(rule, u, n) for u in rule.sigma(t))
                assert supertile(rule, t, n + 1) == expected


def test_supertile_lengths_examples(fib):
    assert supertile_lengths(fib, 1)["a"] == PHI + 1
    c = FieldScalar("7/3")
    for n in range(6):
        got = supertile_lengths(fib, n, {"a": c, "b": c})
        for t in "ab":
            assert got[t] == c * len(supertile(fib, t, n))
    diff = supertile_lengths(fib, 10)["a"] - supertile_lengths(fib, 10, {"a": EQUAL_LEN, "b": EQUAL_LEN})["a"]
    assert abs(diff) < FieldScalar("1/50")


def test_supertile_lengths_matrix_recursion(fib):
    M = fib.matrix
    for n in range(1, 15):
        prev = supertile_lengths(fib, n - 1)
        cur = supertile_lengths(fib, n)
        for j, t in enumerate(fib.alphabet):
            rec = sum((M[i, j] * prev[u] for i, u in enumerate(fib.alphabet)), ZERO)
            assert cur[t] == rec


def test_perron_examples(fib):
    pd = perron_data(fib)
    assert pd.letter_frequencies == {"a": PHI - 1, "b": 2 - PHI}
    assert pd.mean_tile_length == 3 - PHI
    assert sum(pd.length_fractions.values(), ZERO) == ONE
    single = perron_data(SubstitutionRule.build({"a": "aa"}))
    assert single.letter_frequencies == {"a": ONE}
    assert single.mean_tile_length == ONE


def test_frequencies_match_counts(fib):
    tm = load_rule("thue_morse")
    for rule in (fib, tm):
        pd = perron_data(rule)
        for t0 in rule.alphabet:
            w = supertile(rule, t0, 25)
            counts = Counter(w)
            for t in rule.alphabet:
                exact = float(pd.letter_frequencies[t])
                assert abs(counts[t] / len(w) - exact) <= 1e-4 * exact


def test_window_examples(fib):
    T = generate_window(fib, "a|a", 2)
    assert T.types == "aba" + "aba"
    assert T.lefts[3] == ZERO
    assert T.origin_offset == ZERO
    T3 = generate_window(fib, "b|a", 3)
    assert len(T3) == 8
    L3 = supertile_lengths(fib, 3)
    assert T3.window[1] - T3.window[0] == L3["a"] + L3["b"]
    T1 = generate_window(fib, "a|a", 1)
    assert T1.window[1] - T1.window[0] == 2 * (PHI + 1)


def test_illegal_seed(fib):
    assert legal_two_letter_words(fib) == {"aa", "ab", "ba"}
    with pytest.raises(RuleError):
        generate_window(fib, "b|b", 3)


@given(st.sampled_from(["a|a", "a|b", "b|a"]), st.integers(1, 9))
def test_window_abutment(seed, n):
    T = generate_window(fibonacci(), seed, n)
    assert T.check_abutment()
    assert T.types == supertile(T.rule, seed[0], n) + supertile(T.rule, seed[2], n)
    for k in range(n + 1):
        for i in range(0, len(T), max(1, len(T) // 7)):
            assert T.ancestor(k, i) in "ab"


def test_ancestry_matches_supertiles(fib):
    T = generate_window(fib, "a|b", 6)
    # the right half is sigma^6(b); its level-k parents spell sigma^(6-k)(b)
    right = range(len(supertile(fib, "a", 6)), len(T))
    for k in range(7):
        seq = []
        i = right.start
        while i < len(T):
            t = T.ancestor(k, i)
            seq.append(t)
            i += len(supertile(fib, t, k))
        assert "".join(seq) == supertile(fib, "b", 6 - k)


def test_origin_fraction(fib):
    T = generate_window(fib, "a|a", 4)
    S = with_origin_fraction(T, T.origin_tile, Fraction(1, 3))
    assert S.origin_offset == T.lengths[T.origin_tile] / 3
    assert S.check_abutment()


def test_rule_json_roundtrip(fib, tmp_path):
    p = tmp_path / "r.json"
    import json
    p.write_text(json.dumps(fib.to_json()))
    assert load_rule(str(p)) == fib
    assert load_rule("fibonacci") == fib
    with pytest.raises(RuleError):
        load_rule(str(tmp_path / "missing.json"))
