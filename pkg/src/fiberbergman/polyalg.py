"""Exact homogeneous polynomials in X, Y, Z over the Gaussian rationals.

All algebra used for orders, cosets and filtrations happens here without
rounding.  Floating point only enters through :meth:`HomogPoly.eval` and
the :class:`NumPoly` companion type used by the quadrature code.

Monomials are exponent triples ``(a, b, c)`` for ``X^a Y^b Z^c``.  Within a
fixed degree, graded-lex order with ``X > Y > Z`` coincides with plain
tuple comparison, which is what ``max`` on the keys gives us.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import DivisionByZeroPoly, NotHomogeneous, ParseError

NVARS = 3
VARIABLES = ("X", "Y", "Z")

Monomial = tuple[int, int, int]


class GaussRational:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussRational):
            re, im = re.re, re.im + Fraction(im)
        elif isinstance(re, complex):
            re, im = Fraction(re.real), Fraction(re.imag) + Fraction(im)
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussRational is immutable")

    @staticmethod
    def coerce(x) -> "GaussRational":
        if isinstance(x, GaussRational):
            return x
        if isinstance(x, (int, Rational, float, complex)):
            return GaussRational(x)
        raise TypeError(f"cannot coerce {x!r} to GaussRational")

    def __add__(self, other):
        try:
            o = GaussRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = GaussRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussRational.coerce(other) - self

    def __mul__(self, other):
        try:
            o = GaussRational.coerce(other)
        except TypeError:
            return NotImplemented
        if not self.im and not o.im:
            return GaussRational(self.re * o.re)
        return GaussRational(self.re * o.re - self.im * o.im,
                             self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussRational.coerce(other)
        if not o:
            raise ZeroDivisionError("division by zero GaussRational")
        if not o.im:
            return GaussRational(self.re / o.re, self.im / o.re)
        den = o.re * o.re + o.im * o.im
        return GaussRational((self.re * o.re + self.im * o.im) / den,
                             (self.im * o.re - self.re * o.im) / den)

    def __rtruediv__(self, other):
        return GaussRational.coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return GaussRational(1) / self ** (-n)
        out = GaussRational(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self):
        return GaussRational(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = GaussRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussRational({self})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}*i"


ZERO = GaussRational(0)
ONE = GaussRational(1)


def monomials(degree: int) -> list[Monomial]:
    """All degree-``degree`` exponent triples, descending in graded-lex order."""
    if degree < 0:
        return []
    out = [(a, b, degree - a - b) for a in range(degree, -1, -1)
           for b in range(degree - a, -1, -1)]
    return out


def _divides(m: Monomial, n: Monomial) -> bool:
    return m[0] <= n[0] and m[1] <= n[1] and m[2] <= n[2]


class HomogPoly:
    """Homogeneous polynomial with exact Gaussian-rational coefficients.

    ``terms`` maps exponent triples to nonzero coefficients; the zero
    polynomial keeps its declared ``degree``.
    """

    __slots__ = ("degree", "_terms", "_hash")

    def __init__(self, degree: int, terms: Mapping[Monomial, object] | None = None):
        if degree < 0:
            raise NotHomogeneous(f"negative degree {degree}")
        clean: dict[Monomial, GaussRational] = {}
        for mono, c in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != NVARS or min(mono) < 0:
                raise NotHomogeneous(f"bad exponent triple {mono}")
            if sum(mono) != degree:
                raise NotHomogeneous(f"monomial {mono} has degree {sum(mono)}, expected {degree}")
            c = GaussRational.coerce(c)
            if c:
                clean[mono] = clean.get(mono, ZERO) + c
                if not clean[mono]:
                    del clean[mono]
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("HomogPoly is immutable")

    @property
    def terms(self) -> Mapping[Monomial, GaussRational]:
        return MappingProxyType(self._terms)

    @classmethod
    def monomial(cls, mono: Monomial, coeff=1) -> "HomogPoly":
        return cls(sum(mono), {tuple(mono): coeff})

    @classmethod
    def constant(cls, c=1) -> "HomogPoly":
        return cls(0, {(0, 0, 0): c})

    @classmethod
    def zero(cls, degree: int) -> "HomogPoly":
        return cls(degree, {})

    @classmethod
    def variable(cls, name: str) -> "HomogPoly":
        mono = [0, 0, 0]
        mono[VARIABLES.index(name)] = 1
        return cls(1, {tuple(mono): 1})

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, HomogPoly):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return self.degree == other.degree
        return self.degree == other.degree and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.degree, frozenset(self._terms.items()))))
        return self._hash

    # ------------------------------------------------------------------ ring ops
    def _check_same_degree(self, other: "HomogPoly"):
        if self.degree != other.degree:
            raise NotHomogeneous(f"cannot add degrees {self.degree} and {other.degree}")

    def __add__(self, other):
        if not isinstance(other, HomogPoly):
            return NotImplemented
        self._check_same_degree(other)
        out = dict(self._terms)
        for mono, c in other._terms.items():
            out[mono] = out.get(mono, ZERO) + c
        return HomogPoly(self.degree, out)

    def __neg__(self):
        return HomogPoly(self.degree, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, HomogPoly):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "HomogPoly":
        c = GaussRational.coerce(c)
        return HomogPoly(self.degree, {m: c * v for m, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, HomogPoly):
            return mul(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __pow__(self, n: int) -> "HomogPoly":
        out = HomogPoly.constant(1)
        for _ in range(n):
            out = mul(out, self)
        return out

    # ------------------------------------------------------------- inspection
    @property
    def leading_monomial(self) -> Monomial:
        if not self._terms:
            raise DivisionByZeroPoly("zero polynomial has no leading monomial")
        return max(self._terms)

    @property
    def leading_coefficient(self) -> GaussRational:
        return self._terms[self.leading_monomial]

    def coefficient(self, mono: Monomial) -> GaussRational:
        return self._terms.get(tuple(mono), ZERO)

    def sorted_terms(self) -> list[tuple[Monomial, GaussRational]]:
        return sorted(self._terms.items(), reverse=True)

    def is_real_rational(self) -> bool:
        return all(not c.im for c in self._terms.values())

    def diff(self, var: int) -> "HomogPoly":
        """Partial derivative with respect to variable index ``var``."""
        if self.degree == 0:
            return HomogPoly.zero(0)
        out = {}
        for mono, c in self._terms.items():
            e = mono[var]
            if e:
                new = list(mono)
                new[var] -= 1
                out[tuple(new)] = c * e
        return HomogPoly(self.degree - 1, out)

    def coefficient_vector(self, basis: Sequence[Monomial]) -> list[GaussRational]:
        return [self._terms.get(mono, ZERO) for mono in basis]

    # ------------------------------------------------------------ evaluation
    def eval(self, point) -> complex | np.ndarray:
        """Floating-point value at a point (or an ``(..., 3)`` array of points)."""
        return self.to_numeric().eval(point)

    def to_numeric(self) -> "NumPoly":
        return NumPoly.from_terms(self.degree, {m: complex(c) for m, c in self._terms.items()})

    # ------------------------------------------------------------ formatting
    def __str__(self):
        if not self._terms:
            return "0"
        pieces = []
        for mono, c in self.sorted_terms():
            body = "*".join(
                (v if e == 1 else f"{v}^{e}") for v, e in zip(VARIABLES, mono) if e)
            if c.im:
                coeff = f"({c})"
                neg = False
            else:
                neg = c.re < 0
                coeff = str(abs(c.re))
            if body:
                text = body if coeff == "1" else f"{coeff}*{body}"
            else:
                text = coeff
            pieces.append(("-" if neg else "+", text))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, text in pieces[1:]:
            out += f" {sign} {text}"
        return out

    def __repr__(self):
        return f"HomogPoly({self.degree}, {str(self)!r})"


# ---------------------------------------------------------------- operations
def mul(p: HomogPoly, q: HomogPoly) -> HomogPoly:
    out: dict[Monomial, GaussRational] = {}
    for m1, c1 in p._terms.items():
        for m2, c2 in q._terms.items():
            key = (m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2])
            out[key] = out.get(key, ZERO) + c1 * c2
    return HomogPoly(p.degree + q.degree, out)


def divide_exact(p: HomogPoly, g: HomogPoly) -> HomogPoly | None:
    """Return ``q`` with ``p == g*q``, or ``None`` if ``g`` does not divide ``p``."""
    if g.is_zero():
        raise DivisionByZeroPoly("division by the zero polynomial")
    if p.degree < g.degree:
        return None
    qdeg = p.degree - g.degree
    if p.is_zero():
        return HomogPoly.zero(qdeg)
    lm, lc = g.leading_monomial, g.leading_coefficient
    rest = [(mono, c) for mono, c in g._terms.items() if mono != lm]
    work = dict(p._terms)
    quot: dict[Monomial, GaussRational] = {}
    while work:
        mono = max(work)
        c = work.pop(mono)
        if not _divides(lm, mono):
            return None
        shift = (mono[0] - lm[0], mono[1] - lm[1], mono[2] - lm[2])
        factor = c / lc
        quot[shift] = factor
        for gm, gc in rest:
            key = (gm[0] + shift[0], gm[1] + shift[1], gm[2] + shift[2])
            val = work.get(key, ZERO) - factor * gc
            if val:
                work[key] = val
            else:
                work.pop(key, None)
    return HomogPoly(qdeg, quot)


def valuation(p: HomogPoly, g: HomogPoly) -> float | int:
    """Largest ``a`` with ``g**a | p``; ``math.inf`` for the zero polynomial."""
    if g.is_zero():
        raise DivisionByZeroPoly("valuation along the zero polynomial")
    if g.degree == 0:
        raise ValueError("valuation along a constant is undefined")
    if p.is_zero():
        return math.inf
    a = 0
    while True:
        q = divide_exact(p, g)
        if q is None:
            return a
        p = q
        a += 1


def normal_form(p: HomogPoly, f: HomogPoly) -> HomogPoly:
    """Reduce ``p`` modulo the principal ideal ``(f)`` inside degree ``deg p``.

    Any term divisible by the leading monomial of ``f`` is cancelled; the
    remainder has no such term.
    """
    if f.is_zero():
        raise DivisionByZeroPoly("normal form modulo the zero polynomial")
    if p.degree < f.degree or p.is_zero():
        return p
    lm, lc = f.leading_monomial, f.leading_coefficient
    rest = [(mono, c) for mono, c in f._terms.items() if mono != lm]
    work = dict(p._terms)
    rem: dict[Monomial, GaussRational] = {}
    while work:
        mono = max(work)
        c = work.pop(mono)
        if not _divides(lm, mono):
            rem[mono] = c
            continue
        shift = (mono[0] - lm[0], mono[1] - lm[1], mono[2] - lm[2])
        factor = c / lc
        for fm, fc in rest:
            key = (fm[0] + shift[0], fm[1] + shift[1], fm[2] + shift[2])
            val = work.get(key, ZERO) - factor * fc
            if val:
                work[key] = val
            else:
                work.pop(key, None)
    return HomogPoly(p.degree, rem)


def linear_combination(coeffs: Sequence, polys: Sequence[HomogPoly], degree: int) -> HomogPoly:
    out: dict[Monomial, GaussRational] = {}
    for c, p in zip(coeffs, polys):
        c = GaussRational.coerce(c)
        if not c:
            continue
        for mono, v in p._terms.items():
            out[mono] = out.get(mono, ZERO) + c * v
    return HomogPoly(degree, out)


# ------------------------------------------------------------------- parsing
def _parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {text!r}") from exc


def _parse_complex_literal(body: str) -> GaussRational:
    """Parse the inside of ``( ... )``: a signed sum of rationals and ``r*i`` parts."""
    body = body.replace(" ", "")
    if not body:
        raise ParseError("empty parenthesised coefficient")
    parts = re.findall(r"[+-]?[^+-]+", body)
    if "".join(parts) != body:
        raise ParseError(f"bad complex coefficient ({body})")
    total = GaussRational(0)
    for part in parts:
        sign = -1 if part.startswith("-") else 1
        part = part.lstrip("+-")
        if part.endswith("i"):
            mag = part[:-1].rstrip("*")
            value = _parse_rational(mag) if mag else Fraction(1)
            total = total + GaussRational(0, sign * value)
        else:
            total = total + GaussRational(sign * _parse_rational(part))
    return total


def parse(text: str, expected_degree: int | None = None) -> HomogPoly:
    """Parse polynomial text such as ``"Y^2 - X*Z"`` or ``"(1/2+i)*X*Y"``."""
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty polynomial text")
    src = text.strip()
    terms: list[tuple[GaussRational, list[int]]] = []
    pos = 0
    n = len(src)

    def skip_ws(k):
        while k < n and src[k].isspace():
            k += 1
        return k

    pos = skip_ws(pos)
    while pos < n:
        sign = 1
        seen_sign = False
        while pos < n and src[pos] in "+-":
            if src[pos] == "-":
                sign = -sign
            seen_sign = True
            pos = skip_ws(pos + 1)
        if terms and not seen_sign:
            raise ParseError(f"expected + or - at position {pos} in {text!r}")
        if pos >= n:
            raise ParseError(f"dangling sign in {text!r}")
        coeff = GaussRational(1)
        exps = [0, 0, 0]
        have_factor = False
        expect_factor = True
        while pos < n and src[pos] not in "+-":
            ch = src[pos]
            if ch == "*":
                if expect_factor:
                    raise ParseError(f"unexpected '*' at position {pos} in {text!r}")
                expect_factor = True
                pos = skip_ws(pos + 1)
                continue
            if ch == "(":
                close = src.find(")", pos)
                if close < 0:
                    raise ParseError(f"unbalanced parenthesis in {text!r}")
                coeff = coeff * _parse_complex_literal(src[pos + 1:close])
                pos = close + 1
            elif ch.isdigit():
                m = re.match(r"\d+(?:/\d+)?", src[pos:])
                coeff = coeff * _parse_rational(m.group(0))
                pos += m.end()
            elif ch == "i":
                coeff = coeff * GaussRational(0, 1)
                pos += 1
            elif ch in "XYZ":
                var = "XYZ".index(ch)
                pos = skip_ws(pos + 1)
                power = 1
                if pos < n and src[pos] == "^":
                    pos = skip_ws(pos + 1)
                    m = re.match(r"\d+", src[pos:])
                    if not m:
                        raise ParseError(f"missing exponent in {text!r}")
                    power = int(m.group(0))
                    pos += m.end()
                exps[var] += power
            else:
                raise ParseError(f"unexpected character {ch!r} in {text!r}")
            have_factor = True
            expect_factor = False
            pos = skip_ws(pos)
        if not have_factor or expect_factor:
            raise ParseError(f"incomplete term in {text!r}")
        terms.append((coeff * sign, exps))
    degrees = {sum(e) for c, e in terms if c} or {sum(terms[0][1])}
    if len(degrees) != 1:
        raise NotHomogeneous(f"{text!r} mixes degrees {sorted(degrees)}")
    degree = degrees.pop()
    if expected_degree is not None and degree != expected_degree:
        if not all(not c for c, _ in terms):
            raise NotHomogeneous(f"{text!r} has degree {degree}, expected {expected_degree}")
        degree = expected_degree
    out: dict[Monomial, GaussRational] = {}
    for c, e in terms:
        if c:
            key = tuple(e)
            out[key] = out.get(key, ZERO) + c
    return HomogPoly(degree, out)


# ------------------------------------------------------------ numeric polys
class NumPoly:
    """Homogeneous polynomial with complex-double coefficients."""

    __slots__ = ("degree", "exps", "coeffs")

    def __init__(self, degree: int, exps: np.ndarray, coeffs: np.ndarray):
        self.degree = int(degree)
        self.exps = np.asarray(exps, dtype=np.int64).reshape(-1, NVARS)
        self.coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(-1)

    @classmethod
    def from_terms(cls, degree: int, terms: Mapping[Monomial, complex]) -> "NumPoly":
        items = sorted(((m, c) for m, c in terms.items() if c != 0), reverse=True)
        if items:
            exps = np.array([m for m, _ in items], dtype=np.int64)
            coeffs = np.array([c for _, c in items], dtype=np.complex128)
        else:
            exps = np.zeros((0, NVARS), dtype=np.int64)
            coeffs = np.zeros(0, dtype=np.complex128)
        return cls(degree, exps, coeffs)

    def terms(self) -> dict[Monomial, complex]:
        return {tuple(int(e) for e in m): complex(c) for m, c in zip(self.exps, self.coeffs)}

    def __add__(self, other: "NumPoly") -> "NumPoly":
        if self.degree != other.degree:
            raise NotHomogeneous("degree mismatch")
        out = self.terms()
        for m, c in other.terms().items():
            out[m] = out.get(m, 0) + c
        return NumPoly.from_terms(self.degree, out)

    def scale(self, c: complex) -> "NumPoly":
        return NumPoly(self.degree, self.exps.copy(), self.coeffs * c)

    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    def coefficient(self, mono: Monomial) -> complex:
        hit = np.all(self.exps == np.asarray(mono), axis=1)
        return complex(self.coeffs[hit].sum()) if hit.any() else 0j

    def diff(self, var: int) -> "NumPoly":
        if self.degree == 0:
            return NumPoly.from_terms(0, {})
        keep = self.exps[:, var] > 0
        exps = self.exps[keep].copy()
        coeffs = self.coeffs[keep] * exps[:, var]
        exps[:, var] -= 1
        return NumPoly(self.degree - 1, exps, coeffs)

    def eval(self, point) -> complex | np.ndarray:
        pts = np.asarray(point, dtype=np.complex128)
        scalar = pts.ndim == 1
        pts = np.atleast_2d(pts)
        out = np.zeros(pts.shape[:-1], dtype=np.complex128)
        if len(self.coeffs):
            # power tables per variable, shared by all terms
            powers = []
            for v in range(NVARS):
                table = [np.ones(pts.shape[:-1], dtype=np.complex128)]
                for _ in range(int(self.exps[:, v].max())):
                    table.append(table[-1] * pts[..., v])
                powers.append(table)
            for (a, b, c), coef in zip(self.exps, self.coeffs):
                out += coef * (powers[0][a] * powers[1][b] * powers[2][c])
        return complex(out[0]) if scalar else out

    def compose_linear(self, matrix: np.ndarray) -> "NumPoly":
        """Polynomial ``w -> self(matrix @ w)``."""
        mat = np.asarray(matrix, dtype=np.complex128)
        linear = [{(1, 0, 0): mat[v, 0], (0, 1, 0): mat[v, 1], (0, 0, 1): mat[v, 2]}
                  for v in range(NVARS)]

        def pmul(p, q):
            out: dict = {}
            for m1, c1 in p.items():
                for m2, c2 in q.items():
                    key = (m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2])
                    out[key] = out.get(key, 0) + c1 * c2
            return out

        cache: dict[tuple[int, int], dict] = {}

        def power(v, e):
            if (v, e) not in cache:
                cache[(v, e)] = {(0, 0, 0): 1.0} if e == 0 else pmul(power(v, e - 1), linear[v])
            return cache[(v, e)]

        total: dict = {}
        for (a, b, c), coef in zip(self.exps, self.coeffs):
            term = pmul(pmul(power(0, int(a)), power(1, int(b))), power(2, int(c)))
            for m, val in term.items():
                total[m] = total.get(m, 0) + coef * val
        scale = max((abs(v) for v in total.values()), default=0.0)
        cleaned = {m: v for m, v in total.items() if abs(v) > 1e-15 * scale}
        return NumPoly.from_terms(self.degree, cleaned)

    def __repr__(self):
        return f"NumPoly(degree={self.degree}, terms={len(self.coeffs)})"


# ---------------------------------------------------------- exact linear algebra
def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[list[list[GaussRational]], list[int]]:
    """Reduced row echelon form over the Gaussian rationals."""
    mat = [[GaussRational.coerce(x) for x in row] for row in rows]
    if not mat:
        return [], []
    ncols = len(mat[0]) if ncols is None else ncols
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(mat)) if mat[i][col]), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = ONE / mat[r][col]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col]:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[GaussRational]]:
    """Basis of ``{x : A x = 0}``, one vector per free column, free entry 1."""
    if not rows:
        return [[ONE if i == j else ZERO for i in range(ncols)] for j in range(ncols)]
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        vec = [ZERO] * ncols
        vec[f] = ONE
        for row, pc in zip(red, pivots):
            vec[pc] = -row[f]
        basis.append(vec)
    return basis
