"""Exact rational arithmetic: scalars, univariate polynomials, polynomial
matrices and rational-function matrices.

Everything in this module is computed over arbitrary-precision rationals
(``fractions.Fraction``), so equality of polynomials and rational matrices is
a decision procedure rather than a tolerance question.  Conventions:

* polynomial coefficients are stored ascending in degree; the zero polynomial
  is the empty coefficient tuple and has degree ``-inf``;
* rational functions are kept in canonical form: coprime numerator and
  denominator, denominator monic, the zero function is ``0/1``;
* a rational matrix caches a common-denominator form ``H = common_num /
  common_den`` where ``common_den`` is the monic LCM of the entry
  denominators.

All values are immutable after construction and all operations are pure
functions, so they are safe to share across threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import DimensionMismatch

Rational = Fraction
RationalLike = Union[Fraction, int, str]

NEG_INFINITY = float("-inf")

_RATIONAL_RE = re.compile(r"^[+-]?\d+(?:/\d+)?$")


def parse_rational(text: str) -> Fraction:
    """Parse a rational literal ``"p"`` or ``"p/q"`` with decimal integers.

    The denominator must be a positive integer; ``"1/0"`` and anything that
    is not a plain integer fraction (floats, whitespace padding, exponents)
    raise ``ValueError``.
    """
    if not isinstance(text, str) or not _RATIONAL_RE.match(text):
        raise ValueError(f"invalid rational literal: {text!r}")
    num, _, den = text.partition("/")
    if den:
        if int(den) == 0:
            raise ValueError(f"zero denominator in rational literal: {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(num))


def format_rational(x: Fraction) -> str:
    """Inverse of :func:`parse_rational`: ``"p"`` for integers, else ``"p/q"``."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def as_rational(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


# ---------------------------------------------------------------------------
# Constant rational matrices (plain tuples of tuples of Fraction)
# ---------------------------------------------------------------------------

RationalMatrixData = tuple

def rational_matrix(rows: Sequence[Sequence[RationalLike]]) -> RationalMatrixData:
    """Convert nested sequences into a rectangular tuple-of-tuples of Fraction."""
    out = tuple(tuple(as_rational(x) for x in row) for row in rows)
    if not out or not out[0]:
        raise DimensionMismatch("matrix must have at least one row and one column")
    width = len(out[0])
    if any(len(row) != width for row in out):
        raise DimensionMismatch("ragged matrix rows")
    return out


def mat_identity(n: int) -> RationalMatrixData:
    one, zero = Fraction(1), Fraction(0)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def mat_zeros(rows: int, cols: int) -> RationalMatrixData:
    zero = Fraction(0)
    return tuple((zero,) * cols for _ in range(rows))


def mat_add(a: RationalMatrixData, b: RationalMatrixData) -> RationalMatrixData:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_sub(a: RationalMatrixData, b: RationalMatrixData) -> RationalMatrixData:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_neg(a: RationalMatrixData) -> RationalMatrixData:
    return tuple(tuple(-x for x in row) for row in a)


def mat_scale(c: RationalLike, a: RationalMatrixData) -> RationalMatrixData:
    c = as_rational(c)
    return tuple(tuple(c * x for x in row) for row in a)


def mat_mul(a: RationalMatrixData, b: RationalMatrixData) -> RationalMatrixData:
    if len(a[0]) != len(b):
        raise DimensionMismatch(
            f"cannot multiply {len(a)}x{len(a[0])} by {len(b)}x{len(b[0])}")
    bt = tuple(zip(*b))
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def mat_is_zero(a: RationalMatrixData) -> bool:
    return all(x == 0 for row in a for x in row)


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Poly:
    """Univariate polynomial over the rationals.

    ``coeffs[k]`` is the coefficient of ``z**k``.  Trailing zeros are stripped
    on construction, so the representation is canonical: the zero polynomial
    is the empty tuple, and otherwise the leading coefficient is nonzero.
    """

    coeffs: tuple = ()

    def __post_init__(self):
        cs = [as_rational(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "Poly":
        return cls(())

    @classmethod
    def one(cls) -> "Poly":
        return cls((1,))

    @classmethod
    def constant(cls, c: RationalLike) -> "Poly":
        return cls((c,))

    @classmethod
    def variable(cls) -> "Poly":
        """The polynomial ``z``."""
        return cls((0, 1))

    @classmethod
    def monomial(cls, k: int, c: RationalLike = 1) -> "Poly":
        return cls((0,) * k + (c,))

    # -- structure ---------------------------------------------------------

    @property
    def degree(self) -> Union[int, float]:
        """Degree, with ``-inf`` for the zero polynomial so that strict
        degree comparisons remain well-defined."""
        return len(self.coeffs) - 1 if self.coeffs else NEG_INFINITY

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading_coefficient(self) -> Fraction:
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def coefficient(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(out)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.is_zero or other.is_zero:
                return Poly.zero()
            out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if a == 0:
                    continue
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
            return Poly(out)
        c = as_rational(other)
        return Poly(tuple(c * x for x in self.coeffs))

    __rmul__ = __mul__

    def __divmod__(self, other: "Poly"):
        """Euclidean division: returns ``(q, r)`` with ``self = q*other + r``
        and ``deg r < deg other``.  Raises on division by the zero polynomial.
        """
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        db = len(other.coeffs) - 1
        lead = other.coeffs[-1]
        quot = [Fraction(0)] * max(len(rem) - db, 0)
        while len(rem) - 1 >= db and rem:
            factor = rem[-1] / lead
            shift = len(rem) - 1 - db
            quot[shift] = factor
            for i, c in enumerate(other.coeffs):
                rem[shift + i] -= factor * c
            while rem and rem[-1] == 0:
                rem.pop()
        return Poly(quot), Poly(rem)

    def __floordiv__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[1]

    def exact_div(self, other: "Poly") -> "Poly":
        """Division that must be exact; raises ``ValueError`` on a remainder."""
        q, r = divmod(self, other)
        if not r.is_zero:
            raise ValueError(f"{self} is not divisible by {other}")
        return q

    def monic(self) -> "Poly":
        if self.is_zero:
            raise ValueError("cannot normalize the zero polynomial to monic")
        lead = self.coeffs[-1]
        if lead == 1:
            return self
        return Poly(tuple(c / lead for c in self.coeffs))

    def evaluate(self, x):
        """Horner evaluation; works for Fraction, float and complex ``x``."""
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + (c if isinstance(x, Fraction) else
                             c.numerator / c.denominator)
        return acc

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            if k == 0:
                term = format_rational(c)
            else:
                zk = "z" if k == 1 else f"z^{k}"
                if c == 1:
                    term = zk
                elif c == -1:
                    term = f"-{zk}"
                else:
                    term = f"{format_rational(c)}*{zk}"
            parts.append(term)
        out = parts[0]
        for term in parts[1:]:
            out += f" - {term[1:]}" if term.startswith("-") else f" + {term}"
        return out


# -- gcd / lcm over the rationals, via a primitive pseudo-remainder sequence
#    on integer coefficient lists (keeps intermediate growth polynomial) -----

def _int_primitive(p: Poly) -> list:
    """Integer coefficient list of a nonzero poly, divided by its content."""
    den = 1
    for c in p.coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [c.numerator * (den // c.denominator) for c in p.coeffs]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    return [c // g for c in ints]


def _int_strip(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _int_pseudo_rem(a: list, b: list) -> list:
    """Pseudo-remainder of integer coefficient lists (ascending)."""
    a = list(a)
    db = len(b) - 1
    lb = b[-1]
    while len(a) - 1 >= db and a:
        la = a[-1]
        shift = len(a) - 1 - db
        a = [lb * c for c in a]
        for i, c in enumerate(b):
            a[shift + i] -= la * c
        _int_strip(a)
    return a


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic greatest common divisor.  Raises if both inputs are zero."""
    if a.is_zero and b.is_zero:
        raise ValueError("gcd of two zero polynomials is undefined")
    if a.is_zero:
        return b.monic()
    if b.is_zero:
        return a.monic()
    x, y = _int_primitive(a), _int_primitive(b)
    if len(x) < len(y):
        x, y = y, x
    while y:
        r = _int_pseudo_rem(x, y)
        if r:
            g = 0
            for c in r:
                g = math.gcd(g, c)
            r = [c // g for c in r]
        x, y = y, r
    return Poly(x).monic()


def poly_lcm(a: Poly, b: Poly) -> Poly:
    """Monic least common multiple; zero if either input is zero."""
    if a.is_zero or b.is_zero:
        return Poly.zero()
    return (a * b).exact_div(poly_gcd(a, b)).monic()


def poly_gcd_lcm(a: Poly, b: Poly) -> tuple:
    """Both ``(gcd, lcm)``, each monic, with ``gcd*lcm`` proportional to ``a*b``."""
    g = poly_gcd(a, b)
    return g, (a * b).exact_div(g).monic() if not (a.is_zero or b.is_zero) else Poly.zero()


# ---------------------------------------------------------------------------
# Polynomial matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolyMatrix:
    """Rectangular matrix of :class:`Poly`, stored row-major."""

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise DimensionMismatch("polynomial matrix must be at least 1x1")
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatch(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} "
                f"entries, got {len(self.entries)}")
        object.__setattr__(self, "entries", tuple(self.entries))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Poly]]) -> "PolyMatrix":
        flat = tuple(e for row in rows for e in row)
        return cls(len(rows), len(rows[0]), flat)

    @classmethod
    def from_scalar_matrix(cls, data: Sequence[Sequence[RationalLike]]) -> "PolyMatrix":
        """Embed a constant rational matrix as degree-0 polynomials."""
        m = rational_matrix(data)
        return cls.from_rows([[Poly.constant(x) for x in row] for row in m])

    @classmethod
    def identity(cls, n: int) -> "PolyMatrix":
        return cls.from_scalar_matrix(mat_identity(n))

    @classmethod
    def zero(cls, rows: int, cols: int) -> "PolyMatrix":
        return cls(rows, cols, (Poly.zero(),) * (rows * cols))

    def __getitem__(self, key) -> Poly:
        i, j = key
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    @property
    def is_zero(self) -> bool:
        return all(e.is_zero for e in self.entries)

    @property
    def degree(self) -> Union[int, float]:
        return max((e.degree for e in self.entries), default=NEG_INFINITY)

    def coefficient_matrix(self, k: int) -> RationalMatrixData:
        """The rational matrix of ``z**k`` coefficients, entrywise."""
        return tuple(
            tuple(self[i, j].coefficient(k) for j in range(self.cols))
            for i in range(self.rows))

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatch("matrix addition shape mismatch")
        return PolyMatrix(self.rows, self.cols,
                          tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatch("matrix subtraction shape mismatch")
        return PolyMatrix(self.rows, self.cols,
                          tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        out = []
        for i in range(self.rows):
            lhs_row = self.row(i)
            for j in range(other.cols):
                acc = Poly.zero()
                for k in range(self.cols):
                    acc = acc + lhs_row[k] * other[k, j]
                out.append(acc)
        return PolyMatrix(self.rows, other.cols, tuple(out))

    def scale(self, factor) -> "PolyMatrix":
        """Multiply every entry by a Poly or rational scalar."""
        if not isinstance(factor, Poly):
            factor = Poly.constant(factor)
        return PolyMatrix(self.rows, self.cols,
                          tuple(factor * e for e in self.entries))


# ---------------------------------------------------------------------------
# Resolvent numerator: adjugate of (z*I - A) plus characteristic polynomial
# ---------------------------------------------------------------------------

def resolvent_numerator(matrix: Sequence[Sequence[RationalLike]]):
    """Characteristic polynomial and adjugate of ``z*I - A``, exactly.

    Runs the Leverrier-Faddeev iteration, which produces the characteristic
    polynomial ``det(z*I - A)`` (monic, degree N) and the polynomial matrix
    ``adj(z*I - A)`` satisfying ``(z*I - A) @ adj == charpoly * I`` in one
    pass of matrix products and traces.  The divisions by the step index are
    exact over the rationals.

    To keep the iteration fast, the input is scaled to an integer matrix
    (every Faddeev intermediate is then a plain integer) and the resulting
    coefficients are rescaled by powers of the common denominator.

    Returns
    -------
    (adjugate, charpoly) : (PolyMatrix, Poly)
    """
    a = rational_matrix(matrix)
    n = len(a)
    if any(len(row) != n for row in a):
        raise DimensionMismatch("resolvent requires a square matrix")

    s = 1
    for row in a:
        for x in row:
            s = s * x.denominator // math.gcd(s, x.denominator)
    m = [[x.numerator * (s // x.denominator) for x in row] for row in a]

    ident = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    mk = ident
    step_mats = []          # M_1 .. M_n, integer matrices
    charpoly_ints = []      # c_1 .. c_n, integers
    for k in range(1, n + 1):
        step_mats.append(mk)
        am = [[sum(m[i][t] * mk[t][j] for t in range(n)) for j in range(n)]
              for i in range(n)]
        tr = sum(am[i][i] for i in range(n))
        ck, rem = divmod(-tr, k)
        if rem:
            raise ArithmeticError("Faddeev trace division was not exact")
        charpoly_ints.append(ck)
        mk = [[am[i][j] + (ck if i == j else 0) for j in range(n)]
              for i in range(n)]

    # charpoly(z) = z^n + sum_k c_k s^-k z^(n-k)
    char_coeffs = [Fraction(0)] * n + [Fraction(1)]
    for k in range(1, n + 1):
        char_coeffs[n - k] = Fraction(charpoly_ints[k - 1], s ** k)
    charpoly = Poly(char_coeffs)

    # adjugate coefficient of z^(n-k) is M_k / s^(k-1)
    adj_entries = []
    for i in range(n):
        for j in range(n):
            cs = [Fraction(0)] * n
            for k in range(1, n + 1):
                cs[n - k] = Fraction(step_mats[k - 1][i][j], s ** (k - 1))
            adj_entries.append(Poly(cs))
    return PolyMatrix(n, n, tuple(adj_entries)), charpoly


# ---------------------------------------------------------------------------
# Rational functions and rational matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalFunction:
    """Quotient of two polynomials in canonical form.

    Construction reduces to lowest terms and normalizes the denominator to
    monic, so equality of canonical forms is exact equality of functions.
    The zero function is stored as ``0/1``.
    """

    num: Poly
    den: Poly

    def __post_init__(self):
        num, den = self.num, self.den
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero:
            num, den = Poly.zero(), Poly.one()
        else:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num, den = num.exact_div(g), den.exact_div(g)
            lead = den.leading_coefficient
            if lead != 1:
                num = num * (Fraction(1) / lead)
                den = den.monic()
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def from_scalar(cls, c: RationalLike) -> "RationalFunction":
        return cls(Poly.constant(c), Poly.one())

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def strictly_proper(self) -> bool:
        return self.num.degree < self.den.degree

    def evaluate(self, x):
        return self.num.evaluate(x) / self.den.evaluate(x)

    def __str__(self) -> str:
        if self.den == Poly.one():
            return str(self.num)
        return f"({self.num}) / ({self.den})"


@dataclass(frozen=True)
class RationalMatrix:
    """Matrix of rational functions with a cached common-denominator form.

    ``common_den`` is the monic LCM of the entry denominators and
    ``common_num`` the polynomial matrix with ``H = common_num / common_den``
    entrywise (the division used to build it is exact).
    """

    rows: int
    cols: int
    entries: tuple
    common_den: Poly = field(init=False, compare=False)
    common_num: PolyMatrix = field(init=False, compare=False)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise DimensionMismatch("rational matrix must be at least 1x1")
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatch("entry count does not match dimensions")
        object.__setattr__(self, "entries", tuple(self.entries))
        den = Poly.one()
        for e in self.entries:
            den = poly_lcm(den, e.den)
        num = PolyMatrix(
            self.rows, self.cols,
            tuple(e.num * den.exact_div(e.den) for e in self.entries))
        object.__setattr__(self, "common_den", den)
        object.__setattr__(self, "common_num", num)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[RationalFunction]]) -> "RationalMatrix":
        flat = tuple(e for row in rows for e in row)
        return cls(len(rows), len(rows[0]), flat)

    def __getitem__(self, key) -> RationalFunction:
        i, j = key
        return self.entries[i * self.cols + j]

    @property
    def is_zero(self) -> bool:
        return all(e.is_zero for e in self.entries)

    @property
    def strictly_proper(self) -> bool:
        return all(e.strictly_proper for e in self.entries)

    def evaluate(self, x) -> list:
        """Entrywise evaluation at a float or complex point."""
        return [[self[i, j].evaluate(x) for j in range(self.cols)]
                for i in range(self.rows)]


TransferFunction = RationalMatrix


def ratmat_reduce(num: PolyMatrix, den: Poly) -> RationalMatrix:
    """Build the canonical rational matrix ``num / den`` (entrywise).

    Each entry is reduced to lowest terms with a monic denominator; the
    common-denominator cache is recomputed from the reduced entries.
    """
    if den.is_zero:
        raise ZeroDivisionError("rational matrix with zero denominator")
    entries = tuple(RationalFunction(e, den) for e in num.entries)
    return RationalMatrix(num.rows, num.cols, entries)


def ratmat_equal(h1: RationalMatrix, h2: RationalMatrix) -> bool:
    """Exact, deterministic equality of rational matrices (no sampling)."""
    return (h1.rows, h1.cols) == (h2.rows, h2.cols) and h1.entries == h2.entries
