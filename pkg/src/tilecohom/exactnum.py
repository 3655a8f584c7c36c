"""Exact arithmetic over Q and real quadratic fields Q(sqrt D).

Elements are ``FieldScalar(a, b, D)`` meaning ``a + b*sqrt(D)`` with rational
``a, b``.  ``D = 0`` is plain Q.  A rational element (``b == 0``) combines with
an element of any field; two irrational elements must share ``D``.

Matrices (``ExactMatrix``) are small dense matrices of FieldScalars.  The
Perron decomposition is exact whenever the characteristic polynomial splits
into linear and quadratic factors over Q that live in one common field;
otherwise it falls back to floating eigen-data with residual-based widths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key, lru_cache
from typing import Iterable, Sequence

import numpy as np


class FieldMismatchError(ValueError):
    """Operands live in different quadratic fields."""


class NonPrimitiveError(ValueError):
    """Matrix is not primitive (no strictly positive power)."""


@lru_cache(maxsize=None)
def _squarefree(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


def squarefree_part(n: int) -> tuple[int, int]:
    """Write ``n = s**2 * d`` with ``d`` square-free; return ``(s, d)``."""
    if n == 0:
        return 0, 0
    sign = -1 if n < 0 else 1
    n = abs(n)
    s, d, p = 1, 1, 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
            s *= p
        if n % p == 0:
            n //= p
            d *= p
        p += 1
    return s, sign * d * n


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, FieldScalar):
        if x.b != 0:
            raise TypeError(f"{x} is not rational")
        return x.a
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class FieldScalar:
    """Exact element ``a + b*sqrt(D)`` of Q(sqrt D)."""

    __slots__ = ("a", "b", "D")

    def __init__(self, a=0, b=0, D: int = 0):
        a, b, D = _q(a), _q(b), int(D)
        if D < 0:
            raise ValueError("D must be non-negative")
        if D == 1:
            a, b, D = a + b, Fraction(0), 0
        elif D == 0:
            if b != 0:
                raise ValueError("b must be 0 when D = 0")
        elif not _squarefree(D):
            raise ValueError(f"D={D} is not square-free")
        if b == 0:
            D = 0  # rationals carry no field tag, so equal values serialize alike
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "D", D)

    @classmethod
    def _make(cls, a: Fraction, b: Fraction, D: int) -> "FieldScalar":
        obj = object.__new__(cls)
        object.__setattr__(obj, "a", a)
        object.__setattr__(obj, "b", b)
        object.__setattr__(obj, "D", D if b else 0)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("FieldScalar is immutable")

    def __reduce__(self):
        return (FieldScalar, (self.a, self.b, self.D))

    # -- construction helpers -------------------------------------------------

    @classmethod
    def coerce(cls, x) -> "FieldScalar":
        if isinstance(x, FieldScalar):
            return x
        if isinstance(x, dict):
            return cls.from_json(x)
        return cls._make(_q(x), Fraction(0), 0)

    @classmethod
    def sqrt(cls, D: int) -> "FieldScalar":
        return cls(0, 1, D)

    @classmethod
    def from_json(cls, obj) -> "FieldScalar":
        if isinstance(obj, FieldScalar):
            return obj
        if isinstance(obj, dict):
            return cls(obj.get("a", 0), obj.get("b", 0), obj.get("D", 0))
        if isinstance(obj, bool):
            raise TypeError("boolean is not a field element")
        if isinstance(obj, float):
            # JSON numbers such as 1.5 are read through their decimal text
            return cls(Fraction(repr(obj)))
        return cls(obj)

    def to_json(self) -> dict:
        return {"a": str(self.a), "b": str(self.b), "D": self.D}

    # -- basic predicates -----------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def conjugate(self) -> "FieldScalar":
        return FieldScalar._make(self.a, -self.b, self.D)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.D

    def sign(self) -> int:
        """Exact sign of ``a + b*sqrt(D)``."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 D (never equal for square-free D > 1)
        return sa if self.a * self.a > self.b * self.b * self.D else sb

    def __bool__(self) -> bool:
        return self.a != 0 or self.b != 0

    # -- arithmetic -------------------------------------------------------------

    @staticmethod
    def _field(x: "FieldScalar", y: "FieldScalar") -> int:
        if x.D == y.D:
            return x.D
        if x.b == 0:
            return y.D
        if y.b == 0:
            return x.D
        raise FieldMismatchError(f"cannot combine elements of Q(sqrt {x.D}) and Q(sqrt {y.D})")

    def __add__(self, other):
        try:
            other = FieldScalar.coerce(other)
        except TypeError:
            return NotImplemented
        D = FieldScalar._field(self, other)
        return FieldScalar._make(self.a + other.a, self.b + other.b, D)

    __radd__ = __add__

    def __neg__(self):
        return FieldScalar._make(-self.a, -self.b, self.D)

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            other = FieldScalar.coerce(other)
        except TypeError:
            return NotImplemented
        D = FieldScalar._field(self, other)
        return FieldScalar._make(self.a - other.a, self.b - other.b, D)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        try:
            other = FieldScalar.coerce(other)
        except TypeError:
            return NotImplemented
        D = FieldScalar._field(self, other)
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        if b1 == 0 and b2 == 0:
            return FieldScalar._make(a1 * a2, Fraction(0), D)
        return FieldScalar._make(a1 * a2 + b1 * b2 * D, a1 * b2 + a2 * b1, D)

    __rmul__ = __mul__

    def inverse(self) -> "FieldScalar":
        if not self:
            raise ZeroDivisionError("division by zero in exact field")
        if self.b == 0:
            return FieldScalar._make(1 / self.a, Fraction(0), self.D)
        n = self.norm()
        return FieldScalar._make(self.a / n, -self.b / n, self.D)

    def __truediv__(self, other):
        try:
            other = FieldScalar.coerce(other)
        except TypeError:
            return NotImplemented
        FieldScalar._field(self, other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return FieldScalar.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = FieldScalar._make(Fraction(1), Fraction(0), self.D)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- comparison ---------------------------------------------------------------

    def _cmp(self, other) -> int:
        return (self - FieldScalar.coerce(other)).sign()

    def __eq__(self, other):
        try:
            other = FieldScalar.coerce(other)
        except TypeError:
            return NotImplemented
        if self.b == 0 and other.b == 0:
            return self.a == other.a
        return self.D == other.D and self.a == other.a and self.b == other.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.D))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    # -- conversion -----------------------------------------------------------------

    def __float__(self) -> float:
        if self.b == 0:
            return float(self.a)
        r = math.sqrt(self.D)
        if (self.a > 0) != (self.b > 0) and self.a != 0:
            # cancellation-free form: x = N(x) / (a - b sqrt D)
            return float(self.norm()) / (float(self.a) - float(self.b) * r)
        return float(self.a) + float(self.b) * r

    def __repr__(self) -> str:
        return f"FieldScalar({self})"

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*sqrt({self.D})"
        sign = "+" if self.b > 0 else "-"
        return f"{self.a} {sign} {abs(self.b)}*sqrt({self.D})"


ZERO = FieldScalar(0)
ONE = FieldScalar(1)
PHI = FieldScalar(Fraction(1, 2), Fraction(1, 2), 5)


def field_arithmetic(x, y, op: str) -> FieldScalar:
    """Apply ``op`` in {add, sub, mul, div} exactly."""
    x, y = FieldScalar.coerce(x), FieldScalar.coerce(y)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown operation {op!r}")


def common_field(values: Iterable[FieldScalar]) -> int:
    D = 0
    for v in values:
        if v.b != 0:
            if D and v.D != D:
                raise FieldMismatchError(f"entries from Q(sqrt {D}) and Q(sqrt {v.D})")
            D = v.D
    return D


# ---------------------------------------------------------------------------
# matrices


class ExactMatrix:
    """Dense matrix of FieldScalars (immutable)."""

    __slots__ = ("rows", "cols", "_e")

    def __init__(self, entries: Sequence[Sequence]):
        e = tuple(tuple(FieldScalar.coerce(v) for v in row) for row in entries)
        if not e or not e[0]:
            raise ValueError("matrix must have positive dimensions")
        if any(len(row) != len(e[0]) for row in e):
            raise ValueError("ragged matrix")
        common_field(v for row in e for v in row)
        self.rows, self.cols, self._e = len(e), len(e[0]), e

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def D(self) -> int:
        return common_field(v for row in self._e for v in row)

    def __getitem__(self, ij):
        i, j = ij
        return self._e[i][j]

    def row(self, i: int) -> tuple[FieldScalar, ...]:
        return self._e[i]

    def col(self, j: int) -> tuple[FieldScalar, ...]:
        return tuple(r[j] for r in self._e)

    def tolist(self) -> list[list[FieldScalar]]:
        return [list(r) for r in self._e]

    def to_float(self) -> np.ndarray:
        return np.array([[float(v) for v in r] for r in self._e])

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix([self.col(j) for j in range(self.cols)])

    @property
    def T(self) -> "ExactMatrix":
        return self.transpose()

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self._e == other._e

    def __hash__(self):
        return hash(self._e)

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        return ExactMatrix([[x + y for x, y in zip(r, s)] for r, s in zip(self._e, other._e)])

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return ExactMatrix([[x - y for x, y in zip(r, s)] for r, s in zip(self._e, other._e)])

    def scale(self, c) -> "ExactMatrix":
        c = FieldScalar.coerce(c)
        return ExactMatrix([[c * x for x in r] for r in self._e])

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        cols = [other.col(j) for j in range(other.cols)]
        out = []
        for r in self._e:
            out.append([_dot(r, c) for c in cols])
        return ExactMatrix(out)

    def vecmul(self, v: Sequence[FieldScalar]) -> list[FieldScalar]:
        """Matrix times column vector."""
        return [_dot(r, v) for r in self._e]

    def rvecmul(self, v: Sequence[FieldScalar]) -> list[FieldScalar]:
        """Row vector times matrix."""
        return [_dot(v, self.col(j)) for j in range(self.cols)]

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_positive(self) -> bool:
        return all(v.sign() > 0 for r in self._e for v in r)

    def is_nonnegative(self) -> bool:
        return all(v.sign() >= 0 for r in self._e for v in r)

    def nullspace(self) -> list[list[FieldScalar]]:
        """Basis of the right null space, by exact Gauss-Jordan elimination."""
        a = [list(r) for r in self._e]
        m, n = self.rows, self.cols
        pivots = []
        row = 0
        for col in range(n):
            piv = next((i for i in range(row, m) if a[i][col]), None)
            if piv is None:
                continue
            a[row], a[piv] = a[piv], a[row]
            inv = a[row][col].inverse()
            a[row] = [x * inv for x in a[row]]
            for i in range(m):
                if i != row and a[i][col]:
                    f = a[i][col]
                    a[i] = [x - f * y for x, y in zip(a[i], a[row])]
            pivots.append(col)
            row += 1
            if row == m:
                break
        free = [j for j in range(n) if j not in pivots]
        basis = []
        for fj in free:
            v = [ZERO] * n
            v[fj] = ONE
            for r, pc in enumerate(pivots):
                v[pc] = -a[r][fj]
            basis.append(v)
        return basis

    def inverse(self) -> "ExactMatrix":
        if not self.is_square():
            raise ValueError("not square")
        n = self.rows
        a = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(self._e)]
        for col in range(n):
            piv = next((i for i in range(col, n) if a[i][col]), None)
            if piv is None:
                raise ZeroDivisionError("singular matrix")
            a[col], a[piv] = a[piv], a[col]
            inv = a[col][col].inverse()
            a[col] = [x * inv for x in a[col]]
            for i in range(n):
                if i != col and a[i][col]:
                    f = a[i][col]
                    a[i] = [x - f * y for x, y in zip(a[i], a[col])]
        return ExactMatrix([r[n:] for r in a])

    def __repr__(self):
        return "ExactMatrix(" + "; ".join(", ".join(str(v) for v in r) for r in self._e) + ")"


def _dot(u: Sequence[FieldScalar], v: Sequence[FieldScalar]) -> FieldScalar:
    acc = ZERO
    for x, y in zip(u, v):
        if x and y:
            acc = acc + x * y
    return acc


def matrix_power(M: ExactMatrix, n: int) -> ExactMatrix:
    """Exact ``M**n`` by repeated squaring."""
    if not M.is_square():
        raise ValueError("matrix_power needs a square matrix")
    if n < 0:
        raise ValueError("n must be non-negative")
    result = ExactMatrix.identity(M.rows)
    base = M
    while n:
        if n & 1:
            result = result @ base
        base = base @ base
        n >>= 1
    return result


def primitivity_exponent(M: ExactMatrix) -> int | None:
    """Smallest ``k <= n**2`` with ``M**k > 0``, or None.  Requires ``M >= 0``."""
    if not M.is_square() or not M.is_nonnegative():
        return None
    n = M.rows
    pattern = M.to_float() > 0
    power = pattern.copy()
    for k in range(1, n * n + 1):
        if power.all():
            return k
        power = (power.astype(np.int64) @ pattern.astype(np.int64)) > 0
    return None


# ---------------------------------------------------------------------------
# eigen-data


@dataclass(frozen=True)
class Eigenspace:
    value: FieldScalar | complex
    algebraic: int
    right: tuple  # basis vectors (columns)
    left: tuple  # basis vectors (rows)

    @property
    def semisimple(self) -> bool:
        return len(self.right) == self.algebraic

    @property
    def modulus(self) -> float:
        return abs(complex(self.value)) if not isinstance(self.value, FieldScalar) else float(abs(self.value))


@dataclass(frozen=True)
class PerronDecomposition:
    """Eigen-data of a primitive matrix.

    ``perron_right`` and ``perron_left`` are each normalized to sum to 1.
    In inexact mode eigenvalues are complex floats and ``widths`` holds a
    residual-based enclosure radius for each.
    """

    exact: bool
    eigenspaces: tuple
    perron_value: FieldScalar | float
    perron_right: tuple
    perron_left: tuple
    D: int = 0
    widths: tuple = ()
    expanding_projector: ExactMatrix | None = None
    notes: tuple = field(default_factory=tuple)

    @property
    def eigenvalues(self) -> list:
        out = []
        for es in self.eigenspaces:
            out.extend([es.value] * es.algebraic)
        return out


def _charpoly_roots(M: ExactMatrix):
    """Exact roots with multiplicities, or None if not expressible in one Q(sqrt D)."""
    import sympy

    if any(not v.is_rational for r in M.tolist() for v in r):
        return None
    x = sympy.Symbol("x")
    sm = sympy.Matrix([[sympy.Rational(v.a.numerator, v.a.denominator) for v in r] for r in M.tolist()])
    _, factors = sympy.factor_list(sm.charpoly(x).as_expr(), x)
    roots: list[tuple[FieldScalar, int]] = []
    D = 0
    for f, mult in factors:
        coeffs = [Fraction(int(c.p), int(c.q)) for c in sympy.Poly(f, x).all_coeffs()]
        if len(coeffs) == 2:
            roots.append((FieldScalar(-coeffs[1] / coeffs[0]), mult))
        elif len(coeffs) == 3:
            a, b, c = coeffs
            disc = b * b - 4 * a * c
            num, den = disc.numerator * disc.denominator, disc.denominator
            if num < 0:
                return None
            s, d = squarefree_part(num)
            if d in (0, 1):
                return None  # sympy would have split it
            if D and d != D:
                return None
            D = d
            # sqrt(disc) = s*sqrt(d)/den
            sq = FieldScalar(0, Fraction(s, den), d)
            for sgn in (1, -1):
                roots.append(((FieldScalar(-b) + sq * sgn) / (2 * a), mult))
        elif len(coeffs) == 1:
            continue
        else:
            return None
    return roots, D


def _modulus_cmp(x: FieldScalar, y: FieldScalar) -> int:
    c = (abs(y) - abs(x)).sign()
    if c:
        return c
    return (y - x).sign()


def perron_decomposition(M: ExactMatrix) -> PerronDecomposition:
    """Eigenvalues sorted by modulus, eigenspaces, Perron vectors and the
    projector onto the sum of eigenspaces with modulus >= 1."""
    if primitivity_exponent(M) is None:
        raise NonPrimitiveError("matrix is not primitive")
    n = M.rows
    found = _charpoly_roots(M)
    if found is None:
        return _perron_float(M, note="characteristic polynomial does not split over a quadratic field")
    roots, D = found
    roots.sort(key=cmp_to_key(lambda p, q: _modulus_cmp(p[0], q[0])))
    spaces = []
    MT = M.transpose()
    for lam, mult in roots:
        shift = ExactMatrix.identity(n).scale(lam)
        right = (M - shift).nullspace()
        left = (MT - shift).nullspace()
        spaces.append(Eigenspace(lam, mult, tuple(tuple(v) for v in right), tuple(tuple(v) for v in left)))
    perron = spaces[0]
    if perron.algebraic != 1 or perron.value.sign() <= 0:
        raise NonPrimitiveError("Perron eigenvalue is not simple and positive")
    r = list(perron.right[0])
    ell = list(perron.left[0])
    r = [v / sum(r, ZERO) for v in r]
    ell = [v / sum(ell, ZERO) for v in ell]
    notes = []
    proj = ExactMatrix([[0] * n for _ in range(n)])
    for es in spaces:
        if abs(es.value) < ONE:
            continue
        if not es.semisimple:
            notes.append(f"eigenvalue {es.value} is not semisimple")
            proj = None
            break
        proj = proj + eigen_projector(es)
    return PerronDecomposition(
        exact=True,
        eigenspaces=tuple(spaces),
        perron_value=perron.value,
        perron_right=tuple(r),
        perron_left=tuple(ell),
        D=D,
        expanding_projector=proj,
        notes=tuple(notes),
    )


def eigen_projector(es: Eigenspace) -> ExactMatrix:
    """Spectral projector ``R (L^T R)^{-1} L^T`` of a semisimple eigenvalue."""
    R = ExactMatrix([list(c) for c in es.right]).transpose()  # n x k
    L = ExactMatrix([list(c) for c in es.left]).transpose()  # n x k
    G = L.transpose() @ R
    return R @ G.inverse() @ L.transpose()


def _perron_float(M: ExactMatrix, note: str) -> PerronDecomposition:
    A = M.to_float()
    w, V = np.linalg.eig(A)
    wl, U = np.linalg.eig(A.T)
    order = np.argsort(-np.abs(w), kind="stable")
    w, V = w[order], V[:, order]
    spaces, widths = [], []
    for k in range(len(w)):
        v = V[:, k]
        res = np.linalg.norm(A @ v - w[k] * v) / max(np.linalg.norm(v), 1e-300)
        # residual scaled by the eigenvector condition estimate
        j = int(np.argmin(np.abs(wl - w[k])))
        u = U[:, j]
        cond = np.linalg.norm(u) * np.linalg.norm(v) / max(abs(u @ v), 1e-300)
        widths.append(float(res * cond + 8 * np.finfo(float).eps * np.linalg.norm(A)))
        spaces.append(Eigenspace(complex(w[k]), 1, (tuple(v),), (tuple(u),)))
    r = np.real(V[:, 0])
    r = r / r.sum()
    j = int(np.argmin(np.abs(wl - w[0])))
    ell = np.real(U[:, j])
    ell = ell / ell.sum()
    return PerronDecomposition(
        exact=False,
        eigenspaces=tuple(spaces),
        perron_value=float(np.real(w[0])),
        perron_right=tuple(float(x) for x in r),
        perron_left=tuple(float(x) for x in ell),
        widths=tuple(widths),
        notes=(note,),
    )
