"""Curve families with cyclotomic automorphisms.

Two families from the hyperelliptic (2, a[m]) zoo are supported, written
here as AM (y^2 + mu_am*y = x^am + mu_2a x^{a(m-1)} + ... + mu_2am, for
a*m odd) and AM_PLUS_1 (y^2 = x^{am+1} + mu_2a x^{a(m-1)+1} + ... +
mu_2am*x, for a*m even), plus a plain genus-1 CUBIC family
(y^2 + mu3*y = x^3 + mu4*x + mu6) used by the verification harness as the
general-coefficient control case.
"""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from .polyalg import MPoly, poly_exact_sqrt, _resultant_any, zz_gcd


class CurveError(ValueError):
    pass


class ModulusNotInFamily(CurveError):
    pass


class FamilyParityMismatch(CurveError):
    pass


class UnsupportedGenus(CurveError):
    pass


class Family(str, Enum):
    AM = "2_am"
    AM_PLUS_1 = "2_am_plus_1"
    CUBIC = "cubic"


def _allowed_mu_indices(family: Family, a: int, m: int) -> set[int]:
    if family is Family.AM:
        return {a * m} | {2 * a * k for k in range(1, m + 1)}
    if family is Family.AM_PLUS_1:
        return {2 * a * k for k in range(1, m + 1)}
    return {3, 4, 6}


@dataclass(frozen=True)
class AffinePoint:
    x: complex
    y: complex


@dataclass(frozen=True)
class CurveSpec:
    """Immutable curve description; everything else is derived from it."""

    family: Family
    a: int
    m: int
    mu: Mapping[int, complex] = field(default_factory=dict)

    @property
    def genus(self) -> int:
        if self.family is Family.CUBIC:
            return 1
        am = self.a * self.m
        n = am if self.family is Family.AM else am + 1
        return (n - 1) // 2

    @property
    def automorphism_order(self) -> int:
        return 2 if self.family is Family.CUBIC else 2 * self.a

    def mu_val(self, j: int) -> complex:
        return complex(self.mu.get(j, 0.0))

    @property
    def analytic_supported(self) -> bool:
        return self.genus <= 2

    def label(self) -> str:
        if self.family is Family.CUBIC:
            return "cubic"
        if self.family is Family.AM:
            return f"(2,{self.a}[{self.m}])"
        return f"(2,{self.a}[{self.m}]+1)"


def build_curve(family: Family | str, a: int, m: int, mu: Mapping[int, complex]) -> CurveSpec:
    family = Family(family)
    if family is Family.CUBIC:
        if (a, m) != (3, 1):
            raise FamilyParityMismatch("cubic family is the genus-1 curve with a=3, m=1")
    else:
        if a < 2 or m < 1:
            raise CurveError("need a >= 2 and m >= 1")
        am = a * m
        if family is Family.AM and am % 2 == 0:
            raise FamilyParityMismatch(f"(2,a[m]) needs a*m odd, got {am}")
        if family is Family.AM_PLUS_1 and am % 2 == 1:
            raise FamilyParityMismatch(f"(2,a[m]+1) needs a*m even, got {am}")
    allowed = _allowed_mu_indices(family, a, m)
    clean: dict[int, complex] = {}
    for j, v in mu.items():
        j = int(j)
        if j not in allowed:
            raise ModulusNotInFamily(f"mu_{j} is not a modulus of {family.value} with a={a}, m={m}")
        v = complex(v)
        if v != 0:
            clean[j] = v
    return CurveSpec(family, a, m, clean)


# -- defining polynomial ----------------------------------------------------


def x_side_exponents(curve: CurveSpec) -> list[tuple[int, int]]:
    """Pairs (mu-index, x-exponent) for the modulus terms of f's x side."""
    a, m = curve.a, curve.m
    if curve.family is Family.AM:
        return [(2 * a * k, a * (m - k)) for k in range(1, m + 1)]
    if curve.family is Family.AM_PLUS_1:
        return [(2 * a * k, a * (m - k) + 1) for k in range(1, m + 1)]
    return [(4, 1), (6, 0)]


def leading_x_degree(curve: CurveSpec) -> int:
    if curve.family is Family.AM:
        return curve.a * curve.m
    if curve.family is Family.AM_PLUS_1:
        return curve.a * curve.m + 1
    return 3


def odd_y_modulus_index(curve: CurveSpec) -> int | None:
    """Index j of the mu_j*y term, or None when f has no linear y term."""
    if curve.family is Family.AM:
        return curve.a * curve.m
    if curve.family is Family.CUBIC:
        return 3
    return None


def evaluate_f(curve: CurveSpec, p: AffinePoint) -> complex:
    """Value of the defining polynomial f(x, y)."""
    xs = complex(p.x) ** leading_x_degree(curve)
    for j, e in x_side_exponents(curve):
        xs += curve.mu_val(j) * complex(p.x) ** e
    v = complex(p.y) ** 2 - xs
    jy = odd_y_modulus_index(curve)
    if jy is not None:
        v += curve.mu_val(jy) * complex(p.y)
    return v


def defining_poly(curve: CurveSpec) -> MPoly:
    """f(x, y) with the moduli left symbolic (variables mu<j>)."""
    x, y = MPoly.var("x"), MPoly.var("y")
    f = y**2 - x ** leading_x_degree(curve)
    for j, e in x_side_exponents(curve):
        f = f - MPoly.var(f"mu{j}") * x**e
    jy = odd_y_modulus_index(curve)
    if jy is not None:
        f = f + MPoly.var(f"mu{jy}") * y
    return f


def even_model_coeffs(curve: CurveSpec) -> list[complex]:
    """Monic coefficients [c0, c1, ..., 1] of phi with Y^2 = phi(x).

    For the AM and CUBIC families this completes the square in y
    (Y = y + mu_odd/2), which only shifts the constant coefficient.
    """
    n = leading_x_degree(curve)
    c = [0j] * (n + 1)
    c[n] = 1.0 + 0j
    for j, e in x_side_exponents(curve):
        c[e] += curve.mu_val(j)
    jy = odd_y_modulus_index(curve)
    if jy is not None:
        c[0] += curve.mu_val(jy) ** 2 / 4.0
    return c


def branch_y_shift(curve: CurveSpec) -> complex:
    """Y = y + shift puts the curve in even form."""
    jy = odd_y_modulus_index(curve)
    return curve.mu_val(jy) / 2.0 if jy is not None else 0.0


# -- weights ----------------------------------------------------------------


def u_weights(genus: int) -> tuple[int, ...]:
    return tuple(2 * (genus - i) + 1 for i in range(1, genus + 1))


def weight_of(symbol: str, genus: int) -> int:
    """Weight grading: mu_j -> -j, u_i -> 2(g-i)+1, x -> -2, y -> -(2g+1).

    wp symbols are written like "p1122"; Delta symbols "Delta", "Delta1",
    "Delta12", etc. (genus 2 only).
    """
    if symbol.startswith("mu"):
        return -int(symbol[2:])
    if symbol.startswith("u"):
        i = int(symbol[1:])
        if not 1 <= i <= genus:
            raise CurveError(f"unknown symbol {symbol}")
        return 2 * (genus - i) + 1
    if symbol == "x":
        return -2
    if symbol == "y":
        return -(2 * genus + 1)
    if symbol == "1":
        return 0
    if symbol.startswith("p"):
        idx = symbol[1:]
        if idx and all(ch.isdigit() and 1 <= int(ch) <= genus for ch in idx) and len(idx) >= 2:
            return -sum(2 * (genus - int(ch)) + 1 for ch in idx)
    if symbol.startswith("Delta"):
        if genus != 2:
            raise CurveError("Delta symbols are genus-2 only")
        idx = symbol[5:]
        if all(ch in "12" for ch in idx):
            return -8 - sum(2 * (2 - int(ch)) + 1 for ch in idx)
    raise CurveError(f"unknown symbol {symbol}")


# -- automorphisms ----------------------------------------------------------


def _zeta_power(order: int, num: int) -> complex:
    """exp(2*pi*i*num/order) from the exact reduced angle."""
    num %= order
    return cmath.exp(2j * cmath.pi * Fraction(num, order))


def automorphism_on_point(curve: CurveSpec, k: int, p: AffinePoint) -> AffinePoint:
    """k-th power of the distinguished generator of the automorphism group.

    AM family: (x, y) -> (zeta^2 x, -y - mu_am); AM_PLUS_1 family:
    (x, y) -> (zeta^2 x, zeta y) with zeta = exp(pi*i/a).  The cubic family
    only has the hyperelliptic involution.
    """
    n = curve.automorphism_order
    k %= n
    if curve.family is Family.CUBIC:
        if k == 0:
            return p
        return AffinePoint(p.x, -p.y - curve.mu_val(3))
    two_a = 2 * curve.a
    if curve.family is Family.AM:
        x = _zeta_power(two_a, 2 * k) * p.x
        if k % 2 == 0:
            return AffinePoint(x, p.y)
        return AffinePoint(x, -p.y - curve.mu_val(curve.a * curve.m))
    x = _zeta_power(two_a, 2 * k) * p.x
    y = _zeta_power(two_a, k) * p.y
    return AffinePoint(x, y)


def automorphism_u_factors(curve: CurveSpec, k: int) -> tuple[complex, ...]:
    """Induced diagonal action on u in C^g for the k-th generator power."""
    g = curve.genus
    if g > 2:
        raise UnsupportedGenus("u-action computed for genus <= 2 only")
    n = curve.automorphism_order
    k %= n
    if curve.family is Family.CUBIC:
        return tuple((-1.0) ** k for _ in range(g))
    two_a = 2 * curve.a
    if curve.family is Family.AM:
        # generator scales omega_i = x^{i-1} dx / (2Y) by -zeta^{2i}
        return tuple(
            (-1.0) ** k * _zeta_power(two_a, 2 * i * k) for i in range(1, g + 1)
        )
    return tuple(_zeta_power(two_a, (2 * i - 1) * k) for i in range(1, g + 1))


def automorphism_on_u(curve: CurveSpec, k: int, u: tuple[complex, ...]) -> tuple[complex, ...]:
    fac = automorphism_u_factors(curve, k)
    if len(u) != len(fac):
        raise CurveError("u has wrong length for this curve")
    return tuple(f * ui for f, ui in zip(fac, u))


def cm_weight(curve: CurveSpec) -> int:
    """The root-of-unity exponent w with sigma([-zeta]u) = (-zeta)^w sigma(u)."""
    am = curve.a * curve.m
    if curve.family is Family.AM:
        return ((am) ** 2 - 1) // 8
    if curve.family is Family.AM_PLUS_1:
        return ((am + 1) ** 2 - 1) // 8
    raise CurveError("cm weight needs a cyclotomic family")


def minus_zeta_u_factors(curve: CurveSpec) -> tuple[tuple[complex, ...], complex]:
    """Scaling factors of [-zeta] on u, and the expected sigma factor (-zeta)^w.

    [-zeta] acts coordinate-wise as u_i -> (-zeta)^{2(g-i)+1} u_i with
    zeta = exp(2*pi*i/(2a)); this lies in the group generated by
    automorphism_u_factors.
    """
    two_a = 2 * curve.a
    # -zeta = exp(2*pi*i*(a+1)/(2a))
    num = curve.a + 1
    facs = tuple(_zeta_power(two_a, num * w) for w in u_weights(curve.genus))
    sig = _zeta_power(two_a, num * cm_weight(curve))
    return facs, sig


def weight_twist_factors(curve: CurveSpec, num: int, den: int) -> tuple[complex, ...]:
    """Diagonal factors of [c] with c = exp(2*pi*i*num/den): u_i -> c^{w_i} u_i."""
    return tuple(_zeta_power(den, num * w) for w in u_weights(curve.genus))


# -- genus-1 Weierstrass invariants ------------------------------------------


def weierstrass_invariants(curve: CurveSpec) -> tuple[complex, complex]:
    """(g2, g3) of the even model Y^2 = x^3 + p*x + q: g2 = -4p, g3 = -4q.

    For the AM a=3 family q = mu6 + mu3^2/4, so g3 = -(4*mu6 + mu3^2).
    """
    if curve.genus != 1:
        raise CurveError("Weierstrass invariants are genus-1 data")
    c = even_model_coeffs(curve)
    return -4.0 * c[1], -4.0 * c[0]


# -- discriminant ------------------------------------------------------------


@lru_cache(maxsize=None)
def _discriminant_poly_cached(family: Family, a: int, m: int) -> MPoly:
    curve = CurveSpec(family, a, m, {})
    f = defining_poly(curve)
    fx = f.diff("x")
    fy = f.diff("y")
    r1 = _resultant_any(_resultant_any(f, fx, "y"), _resultant_any(f, fy, "y"), "x")
    r2 = _resultant_any(_resultant_any(f, fx, "x"), _resultant_any(f, fy, "x"), "y")
    r3 = zz_gcd(r1, r2)
    if not r3.is_zero():
        _, lead = r3.leading()
        if Fraction(lead) < 0:
            r3 = -r3
    return poly_exact_sqrt(r3).prune_vars()


def discriminant_poly(curve: CurveSpec) -> MPoly:
    """D as an exact polynomial in the family's moduli (D = sqrt(gcd(R1, R2)))."""
    return _discriminant_poly_cached(curve.family, curve.a, curve.m)


def discriminant(curve: CurveSpec) -> complex:
    """D evaluated at the curve's moduli; zero marks the curve singular."""
    poly = discriminant_poly(curve)
    env = {v: curve.mu_val(int(v[2:])) for v in poly.vars}
    return poly.eval_complex(env)


def is_singular(curve: CurveSpec, tol: float = 1e-12) -> bool:
    d = discriminant(curve)
    # weight-consistent scale: |mu_j|^(1/j) <= s means |D| = O(s^|w(D)|)
    s = max((abs(v) ** (1.0 / j) for j, v in curve.mu.items() if v != 0), default=1.0)
    s = max(s, 1e-6)
    return abs(d) <= tol * s ** abs(weight_of_discriminant(curve))


def weight_of_discriminant(curve: CurveSpec) -> int:
    poly = discriminant_poly(curve)
    if poly.is_zero():
        return 0
    e, _ = poly.leading()
    return -sum(int(v[2:]) * k for v, k in zip(poly.vars, e))


# -- JSON spec files ---------------------------------------------------------

_JSON_KEYS = {"family", "a", "m", "mu"}


def curve_to_json(curve: CurveSpec) -> dict:
    return {
        "family": curve.family.value,
        "a": curve.a,
        "m": curve.m,
        "mu": {str(j): [v.real, v.imag] for j, v in sorted(curve.mu.items())},
    }


def curve_from_json(obj: dict) -> CurveSpec:
    unknown = set(obj) - _JSON_KEYS
    if unknown:
        raise CurveError(f"unknown keys in curve spec: {sorted(unknown)}")
    try:
        family = Family(obj["family"])
    except (KeyError, ValueError) as e:
        raise CurveError(f"bad family: {obj.get('family')!r}") from e
    mu = {}
    for j, v in obj.get("mu", {}).items():
        if not (isinstance(v, (list, tuple)) and len(v) == 2):
            raise CurveError(f"mu values must be [re, im] pairs, got {v!r}")
        mu[int(j)] = complex(float(v[0]), float(v[1]))
    return build_curve(family, int(obj["a"]), int(obj["m"]), mu)


def load_curve(path: str) -> CurveSpec:
    with open(path) as fh:
        return curve_from_json(json.load(fh))


# -- named presets ------------------------------------------------------------


def equianharmonic(mu3: complex = 0.0, mu6: complex = 1.0) -> CurveSpec:
    return build_curve(Family.AM, 3, 1, {3: mu3, 6: mu6})


def lemniscatic(mu4: complex = -1.0) -> CurveSpec:
    return build_curve(Family.AM_PLUS_1, 2, 1, {4: mu4})


def burnside(mu4: complex = 0.0, mu8: complex = -1.0) -> CurveSpec:
    return build_curve(Family.AM_PLUS_1, 2, 2, {4: mu4, 8: mu8})


def equipentamic(mu5: complex = 0.0, mu10: complex = 1.0) -> CurveSpec:
    return build_curve(Family.AM, 5, 1, {5: mu5, 10: mu10})


def general_cubic(mu3: complex = 0.0, mu4: complex = 1.0, mu6: complex = 1.0) -> CurveSpec:
    return build_curve(Family.CUBIC, 3, 1, {3: mu3, 4: mu4, 6: mu6})


PRESETS = {
    "equianharmonic": equianharmonic,
    "lemniscate": lemniscatic,
    "burnside": burnside,
    "equipentamic": equipentamic,
    "cubic": general_cubic,
}
