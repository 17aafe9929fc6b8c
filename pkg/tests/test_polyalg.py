from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cyclosigma.polyalg import (
    Cyclo,
    MPoly,
    NotAPerfectSquare,
    PolyalgError,
    exact_div,
    poly_exact_sqrt,
    poly_from_coeffs,
    poly_gcd,
    sylvester_resultant,
    zz_gcd,
)

x = MPoly.var("x")
y = MPoly.var("y")
mu4 = MPoly.var("mu4")
mu6 = MPoly.var("mu6")


def test_resultant_sign_convention():
    # raw Sylvester determinant with p's rows on top
    assert sylvester_resultant(x**2 - 2, x, "x") == MPoly.const(-2)


def test_resultant_common_root_is_zero():
    c = MPoly.var("c")
    assert sylvester_resultant(x - c, x - c, "x").is_zero()


def test_resultant_curve_example():
    f = y**2 - (x**3 + mu6)
    r = sylvester_resultant(f, 2 * y, "y")
    assert r == -4 * (x**3 + mu6)


def test_resultant_degree_zero_rejected():
    with pytest.raises(PolyalgError):
        sylvester_resultant(x**2 - 2, MPoly.const(3), "x")


def test_resultant_shared_factor_vanishes():
    p = (x - 1) * (x**2 + y)
    q = (x - 1) * (x + 3)
    assert sylvester_resultant(p, q, "x").is_zero()
    q2 = x + 3
    assert not sylvester_resultant(p, q2, "x").is_zero()


def test_gcd_basic():
    assert poly_gcd(x**2 - 1, x - 1) == x - 1
    p = 3 * x**2 + 6
    assert poly_gcd(p, MPoly.zero()) == x**2 + 2  # content-normalized
    assert poly_gcd(MPoly.zero(), MPoly.zero()).is_zero()


def test_gcd_with_moduli():
    assert poly_gcd(mu4**2 * x, mu4 * x**2) == mu4 * x


def test_zz_gcd_keeps_integer_content():
    assert zz_gcd(6 * x**2, 10 * x) == 2 * x
    assert zz_gcd(729 * mu6**4, -19683 * mu6**6) == 729 * mu6**4


def test_gcd_divides_arguments():
    p = (x + y) * (x**2 + 3)
    q = (x + y) * (y - 2)
    g = poly_gcd(p, q)
    assert g == x + y
    assert exact_div(p, g) is not None
    assert exact_div(q, g) is not None


def test_exact_sqrt():
    assert poly_exact_sqrt((x + 1) ** 2) == x + 1
    assert poly_exact_sqrt(4 * mu6**2) == 2 * mu6
    with pytest.raises(NotAPerfectSquare):
        poly_exact_sqrt(x**2 + 1)


def test_exact_sqrt_sign_normalized():
    assert poly_exact_sqrt((1 - x) ** 2) == x - 1


def test_subs_and_eval():
    p = y**2 - (x**3 + mu6)
    q = p.subs("y", x + 1)
    assert q == (x + 1) ** 2 - x**3 - mu6
    v = p.eval_complex({"x": 1.0, "y": 2.0, "mu6": 3.0})
    assert abs(v - 0.0) < 1e-14


def test_diff():
    p = x**3 * y + 2 * x
    assert p.diff("x") == 3 * x**2 * y + 2
    assert p.diff("mu17").is_zero()


small_coeff = st.integers(min_value=-4, max_value=4)


@st.composite
def small_poly(draw, vars=("x", "y")):
    n = draw(st.integers(min_value=1, max_value=4))
    p = MPoly.zero()
    for _ in range(n):
        e = tuple(draw(st.integers(min_value=0, max_value=3)) for _ in vars)
        p = p + MPoly(tuple(sorted(vars)), {e: Fraction(draw(small_coeff))})
    return p


@settings(max_examples=60, deadline=None)
@given(small_poly(), small_poly())
def test_resultant_zero_iff_common_factor(p, q):
    if p.degree("x") < 1 or q.degree("x") < 1:
        return
    r = sylvester_resultant(p, q, "x")
    g = poly_gcd(p, q)
    if g.degree("x") >= 1:
        assert r.is_zero()
    elif not r.is_zero():
        assert g.degree("x") == 0


@settings(max_examples=40, deadline=None)
@given(small_poly())
def test_sqrt_of_square_roundtrip(s):
    if s.is_zero():
        return
    r = poly_exact_sqrt(s * s)
    assert r == s or r == -s


@settings(max_examples=40, deadline=None)
@given(small_poly(), small_poly())
def test_gcd_divides(p, q):
    g = poly_gcd(p, q)
    if g.is_zero():
        assert p.is_zero() and q.is_zero()
        return
    assert exact_div(p, g) is not None
    assert exact_div(q, g) is not None


def test_cyclo_arith():
    z = Cyclo.zeta(5)
    acc = Cyclo.from_rational(5, 1)
    s = acc
    for _ in range(4):
        acc = acc * z
        s = s + acc
    assert not bool(s)  # 1 + z + z^2 + z^3 + z^4 = 0
    assert z * Cyclo.zeta(5, 4) == 1
    i = Cyclo.zeta(4)
    assert i * i == -1
    w = Cyclo.zeta(3)
    assert w * w * w == 1
    assert abs(complex(z) - complex(0.30901699437, 0.95105651629)) < 1e-9


def test_cyclo_in_mpoly():
    z = Cyclo.zeta(3)
    u = MPoly.var("u")
    v = MPoly.var("v")
    p = (u + v) * (u + z * v) * (u + z * z * v)
    want = u**3 + v**3
    diff = (p - want.to_cyclo(3)).rational_coeffs()
    assert diff.is_zero()


def test_rational_cube_identity():
    # (a+b+c)(a+zb+z^2 c)(a+z^2 b+zc) = a^3+b^3+c^3-3abc, checked exactly
    z = Cyclo.zeta(3)
    a, b, c = MPoly.var("a"), MPoly.var("b"), MPoly.var("c")
    lhs = (a + b + c) * (a + z * b + z * z * c) * (a + z * z * b + z * c)
    rhs = a**3 + b**3 + c**3 - 3 * a * b * c
    assert (lhs - rhs.to_cyclo(3)).rational_coeffs().is_zero()
    assert rhs.eval_complex({"a": 1, "b": 2, "c": 3}) == 18 + 0j


def test_poly_from_coeffs():
    p = poly_from_coeffs("x", [Fraction(1), 0, mu4])
    assert p == mu4 * x**2 + 1
