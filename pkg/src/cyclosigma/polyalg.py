"""Exact multivariate polynomial arithmetic over the rationals.

Coefficients are ``fractions.Fraction`` by default; the same term
machinery also accepts :class:`Cyclo` coefficients (elements of a
cyclotomic field Q(zeta_n), n in {1, 3, 4, 5}) so that series code can
twist arguments by exact roots of unity.

Terms are kept in a dict keyed by exponent tuples against a sorted
variable tuple; zero coefficients are never stored, so equality is
structural.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping


class PolyalgError(ValueError):
    pass


class NotAPerfectSquare(PolyalgError):
    pass


# ---------------------------------------------------------------------------
# cyclotomic coefficients


_CYCLO_DEG = {1: 1, 3: 2, 4: 2, 5: 4}


class Cyclo:
    """Element of Q(zeta_n) for n in {1, 3, 4, 5}, reduced mod the n-th
    cyclotomic polynomial.  Coefficients are on the basis 1, z, ..., z^(d-1)."""

    __slots__ = ("n", "c")

    def __init__(self, n: int, coeffs: Iterable[Fraction]):
        if n not in _CYCLO_DEG:
            raise PolyalgError(f"unsupported cyclotomic order {n}")
        d = _CYCLO_DEG[n]
        c = [Fraction(x) for x in coeffs]
        if len(c) > d:
            c = self._reduce(n, c)
        c += [Fraction(0)] * (d - len(c))
        self.n = n
        self.c = tuple(c)

    @staticmethod
    def _reduce(n: int, c: list[Fraction]) -> list[Fraction]:
        d = _CYCLO_DEG[n]
        c = list(c)
        for k in range(len(c) - 1, d - 1, -1):
            a = c[k]
            if a == 0:
                continue
            c[k] = Fraction(0)
            if n == 3:  # z^2 = -1 - z
                c[k - 2] -= a
                c[k - 1] -= a
            elif n == 4:  # z^2 = -1
                c[k - 2] -= a
            elif n == 5:  # z^4 = -1 - z - z^2 - z^3
                for j in range(4):
                    c[k - 4 + j] -= a
        return c[:d]

    @classmethod
    def zeta(cls, n: int, power: int = 1) -> "Cyclo":
        power %= n
        coeffs = [Fraction(0)] * (power + 1)
        coeffs[power] = Fraction(1)
        return cls(n, coeffs)

    @classmethod
    def from_rational(cls, n: int, q) -> "Cyclo":
        return cls(n, [Fraction(q)])

    def _coerce(self, other) -> "Cyclo | None":
        if isinstance(other, Cyclo):
            if other.n != self.n:
                if other.n == 1:
                    return Cyclo(self.n, other.c)
                if self.n == 1:
                    return None  # handled by reflected op
                raise PolyalgError("mixed cyclotomic orders")
            return other
        if isinstance(other, (int, Fraction)):
            return Cyclo.from_rational(self.n, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Cyclo(self.n, [a + b for a, b in zip(self.c, o.c)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclo(self.n, [-a for a in self.c])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Cyclo(self.n, [a - b for a, b in zip(self.c, o.c)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = len(self.c)
        out = [Fraction(0)] * (2 * d - 1)
        for i, a in enumerate(self.c):
            if a == 0:
                continue
            for j, b in enumerate(o.c):
                if b == 0:
                    continue
                out[i + j] += a * b
        return Cyclo(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise PolyalgError("negative cyclotomic power")
        out = Cyclo.from_rational(self.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Cyclo.from_rational(self.n, other)
        if not isinstance(other, Cyclo):
            return NotImplemented
        o = self._coerce(other)
        return self.c == o.c

    def __hash__(self):
        return hash((self.n, self.c))

    def __bool__(self):
        return any(a != 0 for a in self.c)

    def rational_part(self) -> Fraction:
        return self.c[0]

    def is_rational(self) -> bool:
        return all(a == 0 for a in self.c[1:])

    def __complex__(self) -> complex:
        from cmath import exp, pi

        z = exp(2j * pi / self.n)
        acc = 0j
        for k in reversed(range(len(self.c))):
            acc = acc * z + complex(self.c[k])
        return acc

    def __repr__(self):
        return f"Cyclo({self.n}, {list(self.c)})"


def coef_is_zero(c) -> bool:
    if isinstance(c, Cyclo):
        return not bool(c)
    return c == 0


def coef_to_complex(c) -> complex:
    if isinstance(c, Cyclo):
        return complex(c)
    return complex(c)


# ---------------------------------------------------------------------------
# polynomials


def _fr_gcd(a: Fraction, b: Fraction) -> Fraction:
    return Fraction(
        math.gcd(a.numerator, b.numerator), math.lcm(a.denominator, b.denominator)
    )


class MPoly:
    """Sparse multivariate polynomial with exact coefficients.

    ``vars`` is a sorted tuple of variable names; ``terms`` maps exponent
    tuples (aligned with ``vars``) to nonzero coefficients.
    """

    __slots__ = ("vars", "terms")

    def __init__(self, vars: tuple[str, ...] = (), terms: Mapping | None = None):
        self.vars = tuple(vars)
        t = {}
        if terms:
            for e, c in terms.items():
                if not isinstance(c, Cyclo):
                    c = Fraction(c)
                if not coef_is_zero(c):
                    t[tuple(e)] = c
        self.terms = t

    # -- constructors

    @classmethod
    def const(cls, c) -> "MPoly":
        p = cls((), {(): c} if not coef_is_zero(Fraction(c) if not isinstance(c, Cyclo) else c) else {})
        return p

    @classmethod
    def var(cls, name: str) -> "MPoly":
        return cls((name,), {(1,): Fraction(1)})

    @classmethod
    def zero(cls) -> "MPoly":
        return cls((), {})

    # -- structure

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def copy_with(self, terms) -> "MPoly":
        return MPoly(self.vars, terms)

    def _aligned(self, other: "MPoly"):
        if self.vars == other.vars:
            return self.vars, self.terms, other.terms
        allv = tuple(sorted(set(self.vars) | set(other.vars)))
        return allv, _reindex(self, allv), _reindex(other, allv)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MPoly.const(other)
        if not isinstance(other, MPoly):
            return NotImplemented
        _, a, b = self._aligned(other)
        return a == b

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    # -- arithmetic

    def __add__(self, other):
        if isinstance(other, (int, Fraction, Cyclo)):
            other = MPoly.const(other)
        allv, a, b = self._aligned(other)
        out = dict(a)
        for e, c in b.items():
            s = out.get(e, 0) + c
            if coef_is_zero(s):
                out.pop(e, None)
            else:
                out[e] = s
        return MPoly(allv, out)

    __radd__ = __add__

    def __neg__(self):
        return MPoly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, Cyclo)):
            other = MPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Cyclo)):
            if coef_is_zero(other if isinstance(other, Cyclo) else Fraction(other)):
                return MPoly(self.vars, {})
            return MPoly(self.vars, {e: c * other for e, c in self.terms.items()})
        allv, a, b = self._aligned(other)
        out: dict = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if coef_is_zero(s):
                    out.pop(e, None)
                else:
                    out[e] = s
        return MPoly(allv, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise PolyalgError("negative power")
        result = MPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- queries

    def degree(self, var: str) -> int:
        """Degree in one variable; -1 for the zero polynomial."""
        if self.is_zero():
            return -1
        if var not in self.vars:
            return 0
        i = self.vars.index(var)
        return max(e[i] for e in self.terms)

    def total_degree(self) -> int:
        if self.is_zero():
            return -1
        return max(sum(e) for e in self.terms)

    def coeff_of(self, var: str, k: int) -> "MPoly":
        """Coefficient of var**k, as a polynomial in the remaining variables."""
        if var not in self.vars:
            return self if k == 0 else MPoly.zero()
        i = self.vars.index(var)
        rest = self.vars[:i] + self.vars[i + 1 :]
        out = {}
        for e, c in self.terms.items():
            if e[i] == k:
                out[e[:i] + e[i + 1 :]] = c
        return MPoly(rest, out)

    def diff(self, var: str) -> "MPoly":
        if var not in self.vars:
            return MPoly.zero()
        i = self.vars.index(var)
        out = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            e2 = e[:i] + (e[i] - 1,) + e[i + 1 :]
            out[e2] = out.get(e2, 0) + c * e[i]
        return MPoly(self.vars, {e: c for e, c in out.items() if not coef_is_zero(c)})

    def subs(self, var: str, value: "MPoly | Fraction | int") -> "MPoly":
        """Exact substitution of a polynomial or rational for one variable."""
        if var not in self.vars:
            return self
        if not isinstance(value, MPoly):
            value = MPoly.const(value)
        i = self.vars.index(var)
        rest = self.vars[:i] + self.vars[i + 1 :]
        by_deg: dict[int, dict] = {}
        for e, c in self.terms.items():
            by_deg.setdefault(e[i], {})[e[:i] + e[i + 1 :]] = c
        powers: dict[int, MPoly] = {0: MPoly.const(1)}
        for k in range(1, max(by_deg) + 1):
            powers[k] = powers[k - 1] * value
        acc = MPoly.zero()
        for k, terms in by_deg.items():
            acc = acc + MPoly(rest, terms) * powers[k]
        return acc

    def eval_complex(self, env: Mapping[str, complex]) -> complex:
        """Numeric evaluation; every variable must be supplied."""
        missing = [v for v in self.vars if v not in env]
        if missing:
            raise PolyalgError(f"missing values for {missing}")
        acc = 0j
        vals = [complex(env[v]) for v in self.vars]
        for e, c in self.terms.items():
            t = coef_to_complex(c)
            for x, k in zip(vals, e):
                if k:
                    t *= x**k
            acc += t
        return acc

    def leading(self) -> tuple[tuple[int, ...], object]:
        """Leading term under graded lexicographic order."""
        if self.is_zero():
            raise PolyalgError("zero polynomial has no leading term")
        key = max(self.terms, key=lambda e: (sum(e), e))
        return key, self.terms[key]

    def map_coeffs(self, f) -> "MPoly":
        return MPoly(self.vars, {e: f(c) for e, c in self.terms.items()})

    def prune_vars(self) -> "MPoly":
        """Drop variables that appear with exponent zero in every term."""
        if not self.vars:
            return self
        used = [i for i in range(len(self.vars)) if any(e[i] for e in self.terms)]
        if len(used) == len(self.vars):
            return self
        newv = tuple(self.vars[i] for i in used)
        return MPoly(newv, {tuple(e[i] for i in used): c for e, c in self.terms.items()})

    def to_cyclo(self, n: int) -> "MPoly":
        return self.map_coeffs(
            lambda c: c if isinstance(c, Cyclo) else Cyclo.from_rational(n, c)
        )

    def rational_coeffs(self) -> "MPoly":
        """Check all coefficients are rational and strip Cyclo wrappers."""

        def conv(c):
            if isinstance(c, Cyclo):
                if not c.is_rational():
                    raise PolyalgError("coefficient is not rational")
                return c.rational_part()
            return c

        return self.map_coeffs(conv)

    def content(self) -> Fraction:
        """Positive rational content (gcd of numerators / lcm of denominators)."""
        if self.is_zero():
            return Fraction(0)
        it = iter(self.terms.values())
        g = abs(Fraction(next(it)))
        for c in it:
            g = _fr_gcd(g, abs(Fraction(c)))
        return g

    def primitive_part(self) -> "MPoly":
        if self.is_zero():
            return self
        g = self.content()
        lead = self.leading()[1]
        sgn = 1 if Fraction(lead) > 0 else -1
        return self * Fraction(sgn, 1) * (1 / g)

    def __repr__(self):
        if self.is_zero():
            return "MPoly(0)"
        bits = []
        for e in sorted(self.terms, key=lambda e: (-sum(e), tuple(-x for x in e))):
            c = self.terms[e]
            mono = "*".join(
                f"{v}^{k}" if k > 1 else v for v, k in zip(self.vars, e) if k
            )
            bits.append(f"({c})" + ("*" + mono if mono else ""))
        return " + ".join(bits)


def _reindex(p: MPoly, allv: tuple[str, ...]) -> dict:
    pos = [allv.index(v) for v in p.vars]
    out = {}
    for e, c in p.terms.items():
        e2 = [0] * len(allv)
        for i, k in zip(pos, e):
            e2[i] = k
        out[tuple(e2)] = c
    return out


def poly_from_coeffs(var: str, coeffs) -> MPoly:
    """Univariate helper: coeffs[k] multiplies var**k (ints/Fractions/MPolys)."""
    x = MPoly.var(var)
    acc = MPoly.zero()
    for k, c in enumerate(coeffs):
        if isinstance(c, MPoly):
            acc = acc + c * x**k
        else:
            acc = acc + MPoly.const(c) * x**k
    return acc


# ---------------------------------------------------------------------------
# exact division


def exact_div(p: MPoly, q: MPoly) -> MPoly | None:
    """Quotient p/q when q divides p exactly, else None.

    Multivariate long division by leading terms (graded lex); only exact
    divisibility is supported, which is all the gcd/sqrt code needs.
    """
    if q.is_zero():
        raise PolyalgError("division by zero polynomial")
    if p.is_zero():
        return MPoly.zero()
    allv = tuple(sorted(set(p.vars) | set(q.vars)))
    rem = MPoly(allv, _reindex(p, allv))
    qq = MPoly(allv, _reindex(q, allv))
    qe, qc = qq.leading()
    quot: dict = {}
    while not rem.is_zero():
        re, rc = rem.leading()
        de = tuple(a - b for a, b in zip(re, qe))
        if any(d < 0 for d in de):
            return None
        if isinstance(rc, Cyclo) or isinstance(qc, Cyclo):
            raise PolyalgError("exact_div over cyclotomic coefficients unsupported")
        dc = Fraction(rc) / Fraction(qc)
        quot[de] = quot.get(de, 0) + dc
        rem = rem - MPoly(allv, {de: dc}) * qq
    return MPoly(allv, quot)


# ---------------------------------------------------------------------------
# resultants


def _sylvester_det(rows: list[list[MPoly]]) -> MPoly:
    """Fraction-free Bareiss determinant of a matrix of polynomials."""
    n = len(rows)
    m = [row[:] for row in rows]
    sign = 1
    prev = MPoly.const(1)
    for k in range(n - 1):
        if m[k][k].is_zero():
            for r in range(k + 1, n):
                if not m[r][k].is_zero():
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return MPoly.zero()
        piv = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[i][j] * piv - m[i][k] * m[k][j]
                d = exact_div(num, prev)
                if d is None:
                    raise PolyalgError("Bareiss division failed")
                m[i][j] = d
            m[i][k] = MPoly.zero()
        prev = piv
    det = m[n - 1][n - 1]
    return det if sign == 1 else -det


def _coeff_list(p: MPoly, var: str) -> list[MPoly]:
    d = p.degree(var)
    return [p.coeff_of(var, k) for k in range(d + 1)]


def sylvester_resultant(p: MPoly, q: MPoly, var: str) -> MPoly:
    """Determinant of the Sylvester matrix of p and q with respect to var.

    Sign convention: the raw determinant with p's coefficient rows on top,
    e.g. sylvester_resultant(x^2-2, x, 'x') == -2.
    Both arguments must have positive degree in var.
    """
    dp, dq = p.degree(var), q.degree(var)
    if dp < 1 or dq < 1:
        raise PolyalgError(f"not bivariate in {var}")
    return _resultant_any(p, q, var)


def _resultant_any(p: MPoly, q: MPoly, var: str) -> MPoly:
    """Resultant allowing degree-0 arguments: res(p, c) = c**deg(p).

    The degree-0 convention is what the nested discriminant construction
    needs when a partial derivative happens to be free of var.
    """
    dp, dq = p.degree(var), q.degree(var)
    if dp < 0 or dq < 0:
        raise PolyalgError("resultant of zero polynomial")
    if dp == 0 and dq == 0:
        return MPoly.const(1)
    if dq == 0:
        return q**dp
    if dp == 0:
        return p**dq
    pc = _coeff_list(p, var)[::-1]
    qc = _coeff_list(q, var)[::-1]
    n = dp + dq
    rows = []
    for i in range(dq):
        rows.append(
            [MPoly.zero()] * i + pc + [MPoly.zero()] * (n - dp - 1 - i)
        )
    for i in range(dp):
        rows.append(
            [MPoly.zero()] * i + qc + [MPoly.zero()] * (n - dq - 1 - i)
        )
    return _sylvester_det(rows)


# ---------------------------------------------------------------------------
# gcd


def _gcd_many(ps: list[MPoly]) -> MPoly:
    g = MPoly.zero()
    for p in ps:
        g = poly_gcd(g, p, _normalize=False)
    return g


def poly_gcd(p: MPoly, q: MPoly, *, _normalize: bool = True) -> MPoly:
    """gcd normalized to content 1 and positive leading coefficient.

    Computed on primitive parts with a subresultant pseudo-remainder
    sequence in the main variable; gcd(0, 0) = 0.
    """
    g = _gcd_impl(p, q)
    if _normalize and not g.is_zero():
        g = g.primitive_part()
    return g


def zz_gcd(p: MPoly, q: MPoly) -> MPoly:
    """gcd in Z[vars]: includes the integer content gcd of both arguments.

    Used by the discriminant pipeline, where the absolute normalization of
    R3 = gcd(R1, R2) matters for the sigma constant.
    """
    g = _gcd_impl(p, q)
    if g.is_zero():
        return g
    cont = _fr_gcd(p.content(), q.content()) if not (p.is_zero() or q.is_zero()) else (
        q.content() if p.is_zero() else p.content()
    )
    return g.primitive_part() * cont


def _gcd_impl(p: MPoly, q: MPoly) -> MPoly:
    if p.is_zero():
        return q
    if q.is_zero():
        return p
    pvars = [v for v in sorted(set(p.vars) | set(q.vars)) if p.degree(v) > 0 or q.degree(v) > 0]
    if not pvars:
        return MPoly.const(1)
    var = pvars[0]
    if p.degree(var) == 0 or q.degree(var) == 0:
        # one argument is constant in var: gcd of it with the other's coeffs
        if p.degree(var) == 0:
            const, poly = p, q
        else:
            const, poly = q, p
        return _gcd_impl(const, _gcd_many(_coeff_list(poly, var)))
    a_cont = _gcd_many(_coeff_list(p, var))
    b_cont = _gcd_many(_coeff_list(q, var))
    a = exact_div(p, a_cont)
    b = exact_div(q, b_cont)
    assert a is not None and b is not None
    prim = _subresultant_gcd(a, b, var)
    prim_cont = _gcd_many(_coeff_list(prim, var))
    prim = exact_div(prim, prim_cont)
    assert prim is not None
    return _gcd_impl(a_cont, b_cont) * prim


def _pseudo_rem(a: MPoly, b: MPoly, var: str) -> MPoly:
    """Pseudo-remainder of a by b in var: lc(b)^(da-db+1) * a mod b."""
    da, db = a.degree(var), b.degree(var)
    lb = b.coeff_of(var, db)
    x = MPoly.var(var)
    r = a * lb ** (da - db + 1)
    while not r.is_zero() and r.degree(var) >= db:
        dr = r.degree(var)
        lr = r.coeff_of(var, dr)
        t = exact_div(lr, lb)
        if t is None:
            # fall back to multiplying through once more
            r = r * lb
            continue
        r = r - t * x ** (dr - db) * b
    return r


def _subresultant_gcd(a: MPoly, b: MPoly, var: str) -> MPoly:
    if a.degree(var) < b.degree(var):
        a, b = b, a
    while True:
        r = _pseudo_rem(a, b, var)
        if r.is_zero():
            return b
        if r.degree(var) == 0:
            return MPoly.const(1)
        # keep coefficients small: divide by content in var
        r = exact_div(r, _gcd_many(_coeff_list(r, var)))
        a, b = b, r


# ---------------------------------------------------------------------------
# exact square root


def _fraction_sqrt(c: Fraction) -> Fraction | None:
    if c < 0:
        return None
    rn = math.isqrt(c.numerator)
    rd = math.isqrt(c.denominator)
    if rn * rn != c.numerator or rd * rd != c.denominator:
        return None
    return Fraction(rn, rd)


def poly_exact_sqrt(p: MPoly) -> MPoly:
    """Exact square root of a perfect-square polynomial.

    The root is normalized to a positive leading coefficient under graded
    lex order; raises NotAPerfectSquare otherwise.
    """
    if p.is_zero():
        return MPoly.zero()
    le, lc = p.leading()
    if any(k % 2 for k in le):
        raise NotAPerfectSquare(repr(p))
    rc = _fraction_sqrt(Fraction(lc))
    if rc is None:
        raise NotAPerfectSquare(repr(p))
    root_lead = MPoly(p.vars, {tuple(k // 2 for k in le): rc})
    s = root_lead
    guard = 4 * (len(p.terms) + 2) ** 2
    while True:
        r = p - s * s
        if r.is_zero():
            return s
        guard -= 1
        if guard <= 0:
            raise NotAPerfectSquare(repr(p))
        re, rcf = r.leading()
        de = tuple(a - k // 2 for a, k in zip(re, le))
        if any(d < 0 for d in de):
            raise NotAPerfectSquare(repr(p))
        s = s + MPoly(p.vars, {de: Fraction(rcf) / (2 * rc)})
