from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from tilecohom.exactnum import (
    ONE,
    PHI,
    ExactMatrix,
    FieldMismatchError,
    FieldScalar,
    NonPrimitiveError,
    field_arithmetic,
    matrix_power,
    perron_decomposition,
)

SQ5 = sympy.sqrt(5)


def as_sympy(x: FieldScalar):
    return sympy.Rational(x.a.numerator, x.a.denominator) + sympy.Rational(x.b.numerator, x.b.denominator) * sympy.sqrt(x.D)


def same(x: FieldScalar, expr) -> bool:
    return sympy.simplify(as_sympy(x) - expr) == 0


phi_sym = (1 + SQ5) / 2


def test_phi_squared():
    assert PHI * PHI == PHI + 1
    assert same(PHI * PHI, phi_sym ** 2)


def test_phi_inverse():
    inv = field_arithmetic(ONE, PHI, "div")
    assert inv == PHI - 1
    assert same(inv, 1 / phi_sym)


def test_equal_length_identity():
    v = (2 + PHI) / (1 + PHI)
    assert v == 3 - PHI
    assert (3 - PHI) * (1 + PHI) == 2 + PHI
    assert same(v, (2 + phi_sym) / (1 + phi_sym))


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        field_arithmetic(ONE, FieldScalar(0), "div")


def test_field_mismatch():
    with pytest.raises(FieldMismatchError):
        FieldScalar(1, 1, 5) + FieldScalar(1, 1, 2)


def test_field_must_be_squarefree():
    with pytest.raises(ValueError):
        FieldScalar(0, 1, 20)
    with pytest.raises(ValueError):
        FieldScalar(1, 1, 0)
    assert FieldScalar(3, 0, 0).D == 0


def test_json_roundtrip():
    x = FieldScalar("1/2", "-3/7", 5)
    assert FieldScalar.from_json(x.to_json()) == x
    assert x.to_json() == {"a": "1/2", "b": "-3/7", "D": 5}


rationals = st.fractions(min_value=-50, max_value=50, max_denominator=50)
scalars = st.builds(lambda a, b: FieldScalar(a, b, 5), rationals, rationals)


@given(scalars)
def test_inverse_property(x):
    if not x:
        return
    assert field_arithmetic(field_arithmetic(ONE, x, "div"), x, "mul") == ONE


@given(scalars, scalars)
def test_sign_matches_sympy(x, y):
    d = x - y
    expected = sympy.sign(as_sympy(d))
    assert d.sign() == int(expected)
    assert (x < y) == (as_sympy(x) < as_sympy(y))


@given(scalars, scalars, scalars)
def test_ring_laws(x, y, z):
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)


def test_matrix_power_examples():
    M = ExactMatrix([[1, 1], [1, 0]])
    assert matrix_power(M, 0) == ExactMatrix.identity(2)
    assert matrix_power(M, 10) == ExactMatrix([[89, 55], [55, 34]])
    assert matrix_power(ExactMatrix([[2]]), 5) == ExactMatrix([[32]])


def primitive_matrices(k):
    return st.lists(st.lists(st.integers(1, 4), min_size=k, max_size=k), min_size=k, max_size=k)


@given(st.one_of(primitive_matrices(2), primitive_matrices(3)), st.integers(0, 6), st.integers(0, 6))
def test_matrix_power_additive(rows, m, n):
    M = ExactMatrix(rows)
    assert matrix_power(M, m + n) == matrix_power(M, m) @ matrix_power(M, n)
    # independent oracle
    assert matrix_power(M, m + n).tolist() == [[FieldScalar(int(v)) for v in row]
                                              for row in (sympy.Matrix(rows) ** (m + n)).tolist()]


def test_perron_fibonacci():
    pd = perron_decomposition(ExactMatrix([[1, 1], [1, 0]]))
    assert pd.exact
    assert pd.perron_value == PHI
    assert sorted(float(es.value) for es in pd.eigenspaces) == pytest.approx([1 - 1.618033988749895, 1.618033988749895])
    assert {es.value for es in pd.eigenspaces} == {PHI, 1 - PHI}
    assert sum(pd.perron_left, FieldScalar(0)) == ONE
    assert sum(pd.perron_right, FieldScalar(0)) == ONE


def test_perron_thue_morse():
    pd = perron_decomposition(ExactMatrix([[1, 1], [1, 1]]))
    assert {es.value for es in pd.eigenspaces} == {FieldScalar(2), FieldScalar(0)}
    assert pd.perron_value == 2


def test_identity_rejected():
    with pytest.raises(NonPrimitiveError):
        perron_decomposition(ExactMatrix.identity(2))


def test_eigenvector_equations():
    M = ExactMatrix([[2, 1, 0], [1, 1, 1], [0, 1, 2]])
    pd = perron_decomposition(M)
    for es in pd.eigenspaces:
        if not isinstance(es.value, FieldScalar):
            continue
        for v in es.right:
            assert M.vecmul(v) == [es.value * x for x in v]
        for w in es.left:
            assert M.rvecmul(w) == [es.value * x for x in w]


def test_inexact_fallback_flagged():
    # x^3 - x - 1 (plastic number) is irreducible over Q: no exact mode
    M = ExactMatrix([[0, 1, 0], [0, 0, 1], [1, 1, 0]])
    pd = perron_decomposition(M)
    assert not pd.exact
    assert float(pd.perron_value) == pytest.approx(1.324717957244746)
    assert pd.widths and max(pd.widths) < 1e-9
