from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fiberbergman import polyalg
from fiberbergman.errors import DivisionByZeroPoly, NotHomogeneous, ParseError
from fiberbergman.polyalg import GaussRational, HomogPoly, parse

from conftest import homog_polys

X, Y, Z = (HomogPoly.variable(v) for v in "XYZ")


class TestGaussRational:
    def test_exact_field_ops(self):
        a = GaussRational(Fraction(1, 3), 2)
        b = GaussRational(-1, Fraction(1, 7))
        assert (a * b) / b == a
        assert a - a == 0
        assert (a + b) - b == a

    def test_complex_conversion(self):
        assert complex(GaussRational(1, -2)) == 1 - 2j
        assert GaussRational(0.5) == GaussRational(Fraction(1, 2))

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            GaussRational(1) / GaussRational(0)


class TestParse:
    def test_single_monomial(self):
        p = parse("Y^2")
        assert p.degree == 2
        assert dict(p.terms) == {(0, 2, 0): 1}

    def test_binomial(self):
        p = parse("Y^2 - X*Z")
        assert dict(p.terms) == {(0, 2, 0): 1, (1, 0, 1): -1}

    def test_mixed_degree(self):
        with pytest.raises(NotHomogeneous):
            parse("X + Y^2")

    def test_malformed(self):
        for bad in ("X +", "Y^", "2**X", "Q", ""):
            with pytest.raises(ParseError):
                parse(bad)

    def test_gaussian_and_rational_coefficients(self):
        p = parse("(1+2*i)*X - 3/4 Y")
        assert p.coefficient((1, 0, 0)) == GaussRational(1, 2)
        assert p.coefficient((0, 1, 0)) == GaussRational(Fraction(-3, 4))

    def test_expected_degree(self):
        with pytest.raises(NotHomogeneous):
            parse("X*Y", expected_degree=3)

    @given(homog_polys())
    def test_str_roundtrip(self, p):
        if p.is_zero():
            return
        assert parse(str(p)) == p


class TestArithmetic:
    def test_square(self):
        assert polyalg.mul(Y, Y) == parse("Y^2")

    def test_zero_absorbs(self):
        prod = polyalg.mul(parse("Y^2 - X*Z"), HomogPoly.zero(1))
        assert prod.is_zero() and prod.degree == 3

    def test_difference_of_squares(self):
        assert (X + Z) * (X - Z) == parse("X^2 - Z^2")

    def test_no_zero_terms_stored(self):
        p = (X + Y) - Y
        assert dict(p.terms) == {(1, 0, 0): 1}

    def test_degree_sum_invariant(self):
        p = parse("X^2*Y + 3*Z^3")
        assert all(sum(m) == p.degree for m in p.terms)


class TestDivision:
    def test_exact(self):
        assert polyalg.divide_exact(parse("X*Y^2"), Y) == parse("X*Y")

    def test_inexact(self):
        assert polyalg.divide_exact(parse("X^2 + Y*Z"), Y) is None

    def test_self(self):
        f = parse("Y^2 - X*Z")
        assert polyalg.divide_exact(f, f) == HomogPoly.constant(1)

    def test_by_zero(self):
        with pytest.raises(DivisionByZeroPoly):
            polyalg.divide_exact(X, HomogPoly.zero(1))
        with pytest.raises(DivisionByZeroPoly):
            polyalg.valuation(X, HomogPoly.zero(1))

    def test_valuations(self):
        assert polyalg.valuation(parse("X*Y^2"), Y) == 2
        assert polyalg.valuation(X + Z, Y) == 0
        assert polyalg.valuation(HomogPoly.zero(2), Y) == math.inf

    @given(homog_polys(max_degree=3), homog_polys(max_degree=2, nonzero=True))
    def test_divide_undoes_multiply(self, p, g):
        assert polyalg.divide_exact(p * g, g) == p

    @given(st.sampled_from(["X", "Y", "Z", "Y^2 - X*Z"]), st.integers(0, 3), homog_polys(max_degree=2, nonzero=True))
    def test_valuation_additive(self, gtext, a, h):
        g = parse(gtext)
        assert polyalg.valuation(g ** a * h, g) == a + polyalg.valuation(h, g)


class TestNormalForm:
    def test_self_reduces_to_zero(self):
        assert polyalg.normal_form(parse("Y^2"), parse("Y^2")).is_zero()

    def test_irreducible_term_kept(self):
        assert polyalg.normal_form(X * Y, parse("Y^2")) == X * Y

    def test_grlex_leading_term(self):
        # X > Y > Z graded-lex puts XZ ahead of Y^2, so XZ is the reducible term
        f = parse("Y^2 - X*Z")
        assert f.leading_monomial == (1, 0, 1)
        assert polyalg.normal_form(X * Z, f) == parse("Y^2")
        assert polyalg.normal_form(parse("Y^2"), f) == parse("Y^2")

    @settings(max_examples=60)
    @given(homog_polys(degree=3), homog_polys(degree=1), st.sampled_from(["Y^2 - X*Z", "X*Z", "Y^2 + X^2"]))
    def test_ideal_invariance(self, p, q, ftext):
        f = parse(ftext)
        assert polyalg.normal_form(p + f * q, f) == polyalg.normal_form(p, f)

    @settings(max_examples=40)
    @given(homog_polys(degree=3))
    def test_remainder_has_no_leading_multiple(self, p):
        f = parse("Y^2 - X*Z")
        r = polyalg.normal_form(p, f)
        lm = f.leading_monomial
        assert not any(all(a >= b for a, b in zip(m, lm)) for m in r.terms)


class TestEval:
    def test_values(self):
        assert parse("Y^2").eval((1, 2, 0)) == 4
        assert parse("Y^2 - X*Z").eval((1, 1, 1)) == 0
        assert parse("X + i*Y").eval((1, 1, 0)) == 1 + 1j

    @given(homog_polys(max_degree=3), homog_polys(max_degree=3),
           st.tuples(*[st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)] * 3))
    def test_multiplicative(self, p, q, x):
        lhs = (p * q).eval(x)
        rhs = p.eval(x) * q.eval(x)
        assert abs(lhs - rhs) <= 1e-10 * (1 + abs(rhs))

    def test_vectorised_matches_scalar(self, rng):
        p = parse("X^2*Y - 2*Y*Z^2 + (1+i)*Z^3")
        pts = rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3))
        vec = p.eval(pts)
        assert np.allclose(vec, [p.eval(tuple(x)) for x in pts])

    def test_numeric_compose_linear(self, rng):
        p = parse("X^2 - Y*Z").to_numeric()
        M = rng.normal(size=(3, 3))
        q = p.compose_linear(M)
        pts = rng.normal(size=(4, 3)) + 0j
        assert np.allclose(q.eval(pts), p.eval(pts @ M.T))


class TestLinearAlgebra:
    def test_rank_and_nullspace(self):
        one, zero = GaussRational(1), GaussRational(0)
        rows = [[one, one, zero], [zero, one, one], [one, 2 * one, one]]
        assert polyalg.rank(rows) == 2
        (v,) = polyalg.nullspace(rows, 3)
        for r in rows:
            assert sum((a * b for a, b in zip(r, v)), zero) == 0
