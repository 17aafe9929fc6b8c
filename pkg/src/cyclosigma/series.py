"""Exact weight-graded expansion of sigma at the origin.

Genus 1 is built from the classical Laurent recursion for wp forced by
wp'' = 6 wp^2 - g2/2 together with (wp')^2 = 4 wp^3 - g2 wp - g3; genus 2
(the x^5 + mu10 curve) is built by requiring the known 4-index and
quadratic 3-index wp relations to hold order by order in mu10.  The same
machinery expands the catalogued addition formulae and checks that their
residual series vanish identically.

Everything here is exact: coefficients are rationals, or elements of
Q(zeta_n) where an identity twists its arguments by roots of unity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .curves import CurveSpec, Family
from .polyalg import Cyclo, MPoly, PolyalgError, poly_from_coeffs

U1, U2 = "u1", "u2"


class SeriesError(ValueError):
    pass


# ---------------------------------------------------------------------------
# truncation helpers


def trunc_degree(p: MPoly, uvars: tuple[str, ...], cap: int) -> MPoly:
    """Drop terms whose total degree in uvars exceeds cap."""
    idx = [i for i, v in enumerate(p.vars) if v in uvars]
    out = {e: c for e, c in p.terms.items() if sum(e[i] for i in idx) <= cap}
    return MPoly(p.vars, out)


def trunc_var(p: MPoly, var: str, cap: int) -> MPoly:
    """Drop terms with more than cap powers of one variable (mu truncation)."""
    if var not in p.vars:
        return p
    i = p.vars.index(var)
    return MPoly(p.vars, {e: c for e, c in p.terms.items() if e[i] <= cap})


def mul_trunc(p: MPoly, q: MPoly, uvars: tuple[str, ...], cap: int) -> MPoly:
    return trunc_degree(p * q, uvars, cap)


def subs_linear(p: MPoly, mapping: dict[str, list[tuple[object, str]]]) -> MPoly:
    """Substitute u -> sum(c * newvar) for each u in mapping (c exact)."""
    out = p
    for var, combo in mapping.items():
        if var not in out.vars:
            continue
        repl = MPoly.zero()
        for c, nv in combo:
            repl = repl + MPoly.var(nv) * c
        out = out.subs(var, repl)
    return out


def swap_vars(p: MPoly, pairs: list[tuple[str, str]]) -> MPoly:
    """Exchange variable names (u <-> v swaps in symmetric identities)."""
    ren = {}
    for a, b in pairs:
        ren[a] = b
        ren[b] = a
    newv = tuple(ren.get(v, v) for v in p.vars)
    order = sorted(range(len(newv)), key=lambda i: newv[i])
    return MPoly(
        tuple(newv[i] for i in order),
        {tuple(e[i] for i in order): c for e, c in p.terms.items()},
    )


def weight_of_term(vars: tuple[str, ...], exps: tuple[int, ...], genus: int) -> int:
    from .curves import weight_of

    w = 0
    for v, k in zip(vars, exps):
        if k == 0:
            continue
        if v in ("u", "v", "w"):
            name = "u1"  # genus-1 argument variables
        elif v[0] in "uvw" and v[1:].isdigit():
            name = "u" + v[1:]
        elif v in ("g2", "g3"):
            w += k * (-2 * int(v[1]))
            continue
        else:
            name = v
        w += k * weight_of(name, genus)
    return w


def assert_weight_homogeneous(p: MPoly, genus: int, expected: int | None = None) -> int:
    """Every monomial must carry the same weight; returns it."""
    if p.is_zero():
        return expected if expected is not None else 0
    weights = {weight_of_term(p.vars, e, genus) for e in p.terms}
    if len(weights) != 1:
        raise SeriesError(f"series is not weight-homogeneous: weights {sorted(weights)}")
    w = weights.pop()
    if expected is not None and w != expected:
        raise SeriesError(f"series has weight {w}, expected {expected}")
    return w


# ---------------------------------------------------------------------------
# graded series container


@dataclass(frozen=True)
class GradedSeries:
    """Truncated sigma expansion: poly in u-variables and moduli."""

    poly: MPoly
    genus: int
    uvars: tuple[str, ...]
    leading_weight: int
    truncation_weight: int

    def eval(self, u: tuple[complex, ...], mu: dict[str, complex]) -> complex:
        env = dict(mu)
        for name, val in zip(self.uvars, u):
            env[name] = val
        env = {v: env.get(v, 0.0) for v in self.poly.vars}
        return self.poly.eval_complex(env)


# ---------------------------------------------------------------------------
# genus 1


@lru_cache(maxsize=None)
def _wp_laurent_coeffs(n_max: int) -> tuple[MPoly, ...]:
    """c_k with wp = u^-2 + sum c_k u^(2k-2), over Q[g2, g3]."""
    g2, g3 = MPoly.var("g2"), MPoly.var("g3")
    c: list[MPoly] = [MPoly.zero(), MPoly.zero(), g2 * Fraction(1, 20), g3 * Fraction(1, 28)]
    for k in range(4, n_max + 1):
        s = MPoly.zero()
        for m in range(2, k - 1):
            s = s + c[m] * c[k - m]
        c.append(s * Fraction(3, (2 * k + 1) * (k - 3)))
    return tuple(c)


@lru_cache(maxsize=None)
def _sigma1_poly(udeg: int) -> MPoly:
    """sigma(u) over Q[g2, g3] through u-degree udeg."""
    kmax = udeg // 2 + 1
    c = _wp_laurent_coeffs(kmax)
    u = MPoly.var("u")
    # log sigma = log u - sum c_k u^(2k) / (2k (2k-1))
    t = MPoly.zero()
    for k in range(2, kmax + 1):
        if 2 * k > udeg:
            break
        t = t - c[k] * u ** (2 * k) * Fraction(1, 2 * k * (2 * k - 1))
    expt = MPoly.const(1)
    term = MPoly.const(1)
    fact = 1
    for n in range(1, udeg // 4 + 2):
        fact *= n
        term = trunc_degree(term * t, ("u",), udeg)
        if term.is_zero():
            break
        expt = expt + term * Fraction(1, fact)
    return trunc_degree(u * expt, ("u",), udeg)


_G1_FAMILIES = {
    "weierstrass": None,
    "equianharmonic": Family.AM,
    "lemniscate": Family.AM_PLUS_1,
    "cubic": Family.CUBIC,
}


def genus1_invariant_polys(family: str) -> tuple[MPoly, MPoly]:
    """(g2, g3) as exact polynomials in the family's moduli."""
    mu3, mu4, mu6 = MPoly.var("mu3"), MPoly.var("mu4"), MPoly.var("mu6")
    if family == "weierstrass":
        return MPoly.var("g2"), MPoly.var("g3")
    if family == "equianharmonic":
        return MPoly.zero(), -(mu3**2 + 4 * mu6)
    if family == "lemniscate":
        return -4 * mu4, MPoly.zero()
    if family == "cubic":
        return -4 * mu4, -(mu3**2 + 4 * mu6)
    raise SeriesError(f"unknown genus-1 family {family!r}")


def sigma1_series(family: str, udeg: int) -> MPoly:
    p = _sigma1_poly(udeg)
    g2p, g3p = genus1_invariant_polys(family)
    if family != "weierstrass":
        p = p.subs("g2", g2p).subs("g3", g3p)
    return p.prune_vars()


# ---------------------------------------------------------------------------
# genus 2 equipentamic: sigma by constraint solving


def _monomials_of_uweight(w: int) -> list[tuple[int, int]]:
    """(a, b) with 3a + b = w (exponents of u1, u2)."""
    out = []
    for a in range(w // 3 + 1):
        b = w - 3 * a
        if b >= 0:
            out.append((a, b))
    return out


def _log_derivative_numerators(S: MPoly, orders: list[tuple[int, int]], mucap: int) -> dict:
    """N_alpha with d^alpha log S = N_alpha / S^|alpha| (exact recursion)."""
    tr = lambda p: trunc_var(p, "mu10", mucap)
    cache: dict[tuple[int, int], MPoly] = {}
    derivs: dict[tuple[int, int], MPoly] = {}

    def dS(a, b):
        key = (a, b)
        if key not in derivs:
            p = S
            for _ in range(a):
                p = p.diff(U1)
            for _ in range(b):
                p = p.diff(U2)
            derivs[key] = p
        return derivs[key]

    def N(alpha) -> MPoly:
        if alpha in cache:
            return cache[alpha]
        a, b = alpha
        k = a + b
        if k == 1:
            out = dS(a, b)
        else:
            if a > 0:
                prev, var = (a - 1, b), U1
            else:
                prev, var = (a, b - 1), U2
            npz = N(prev)
            out = tr(S * npz.diff(var) - (k - 1) * npz * dS(*(
                (1, 0) if var == U1 else (0, 1)
            )))
        cache[alpha] = out
        return out

    return {alpha: N(alpha) for alpha in orders}


_G2_ORDERS_4 = [
    (1, 0), (0, 1), (2, 0), (1, 1), (0, 2),
    (3, 0), (2, 1), (1, 2), (0, 3),
    (4, 0), (3, 1), (2, 2), (1, 3), (0, 4),
]


def _g2_relation_residuals(S: MPoly, mucap: int) -> list[MPoly]:
    """The defining wp relations of the x^5 + mu10 curve, polynomialized.

    With wp_alpha = -N_alpha / S^|alpha|, every relation below is multiplied
    through by the appropriate power of S, so each residual is an entire
    series that must vanish identically.
    """
    tr = lambda p: trunc_var(p, "mu10", mucap)
    N = _log_derivative_numerators(S, _G2_ORDERS_4, mucap)
    mu10 = MPoly.var("mu10")
    n11, n12, n22 = N[(2, 0)], N[(1, 1)], N[(0, 2)]
    n111, n112, n122, n222 = N[(3, 0)], N[(2, 1)], N[(1, 2)], N[(0, 3)]
    n1111, n1112, n1122, n1222, n2222 = (
        N[(4, 0)], N[(3, 1)], N[(2, 2)], N[(1, 3)], N[(0, 4)],
    )
    S2 = tr(S * S)
    S4 = tr(S2 * S2)
    rel = [
        # p2222 = 6 p22^2 + 4 p12
        tr(-n2222 - 6 * n22 * n22 + 4 * n12 * S2),
        # p1222 = 6 p22 p12 - 2 p11
        tr(-n1222 - 6 * n22 * n12 - 2 * n11 * S2),
        # p1122 = 4 p12^2 + 2 p11 p22
        tr(-n1122 - 4 * n12 * n12 - 2 * n11 * n22),
        # p1112 = 6 p12 p11 - 4 mu10
        tr(-n1112 - 6 * n12 * n11 + 4 * mu10 * S4),
        # p1111 = 6 p11^2 - 12 p22 mu10
        tr(-n1111 - 6 * n11 * n11 - 12 * mu10 * n22 * S2),
        # p222^2 = 4 p22^3 + 4 p11 + 4 p22 p12
        tr(n222 * n222 + 4 * n22 * n22 * n22 + 4 * n11 * S4 - 4 * tr(n22 * n12) * S2),
        # p122 p222 = -2 p22 p11 + 4 p22^2 p12 + 2 p12^2
        tr(n122 * n222 + 2 * tr(n22 * n11) * S2 + 4 * n22 * n22 * n12 - 2 * tr(n12 * n12) * S2),
    ]
    return rel


def schur_leading_g2() -> MPoly:
    u1, u2 = MPoly.var(U1), MPoly.var(U2)
    return u1 - u2**3 * Fraction(1, 3)


@lru_cache(maxsize=None)
def sigma2_equipentamic_series(mucap: int) -> MPoly:
    """sigma for y^2 = x^5 + mu10 through order mu10^mucap, exact.

    Layer k is the unique weight-homogeneous polynomial of u-weight 3 + 10k
    making the catalogued wp relations hold as series identities.
    """
    S = schur_leading_g2()
    mu10 = MPoly.var("mu10")
    for k in range(1, mucap + 1):
        monos = _monomials_of_uweight(3 + 10 * k)
        basis = [MPoly((U1, U2), {(a, b): Fraction(1)}) for a, b in monos]
        base_res = _g2_relation_residuals(S, k)
        cols = []
        for mono in basis:
            probe = S + mu10**k * mono
            res = _g2_relation_residuals(probe, k)
            cols.append([r - b for r, b in zip(res, base_res)])
        # collect the mu10^k layer of every relation into a linear system
        from .polyalg import _reindex

        allv = ("mu10", U1, U2)
        mu_i = 0

        def layer_terms(p: MPoly):
            for e, c in _reindex(p, allv).items():
                if e[mu_i] == k:
                    yield (e[1], e[2]), Fraction(c)

        rows: dict[tuple, list[Fraction]] = {}
        rhs: dict[tuple, Fraction] = {}
        for ri, r in enumerate(base_res):
            for key, c in layer_terms(r):
                rows.setdefault((ri, key), [Fraction(0)] * len(basis))
                rhs[(ri, key)] = rhs.get((ri, key), Fraction(0)) + c
        for ci, col in enumerate(cols):
            for ri, r in enumerate(col):
                for key, c in layer_terms(r):
                    rows.setdefault((ri, key), [Fraction(0)] * len(basis))
                    rows[(ri, key)][ci] += c
        keys = sorted(rows)
        A = [rows[key] for key in keys]
        b = [-rhs.get(key, Fraction(0)) for key in keys]
        sol = solve_rational_unique(A, b)
        if sol is None:
            raise SeriesError(f"genus-2 series layer {k}: no unique solution")
        S = S + mu10**k * sum(
            (m * c for m, c in zip(basis, sol)), start=MPoly.zero()
        )
        # consistency: all relations vanish through this layer
        for r in _g2_relation_residuals(S, k):
            if not trunc_var(r, "mu10", k).is_zero():
                raise SeriesError(f"genus-2 relations inconsistent at mu10^{k}")
    return S


def solve_rational_unique(A: list[list[Fraction]], b: list[Fraction]):
    """Solve Ax = b exactly; None unless the solution exists and is unique."""
    m = len(A)
    if m == 0:
        return None
    n = len(A[0])
    M = [row[:] + [bv] for row, bv in zip(A, b)]
    piv_cols = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pv = M[r][c]
        M[r] = [x / pv for x in M[r]]
        for i in range(m):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        piv_cols.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if M[i][n] != 0:
            return None  # inconsistent
    if len(piv_cols) < n:
        return None  # underdetermined
    x = [Fraction(0)] * n
    for i, c in enumerate(piv_cols):
        x[c] = M[i][n]
    return x


# ---------------------------------------------------------------------------
# public sigma_series


def sigma_series(family: str | CurveSpec, truncation_weight: int) -> GradedSeries:
    """Expansion of sigma at 0 for a named family, truncated by weight.

    A monomial u^alpha mu^beta is kept when (u-weight) - (mu-weight) is at
    most truncation_weight; for a weight-homogeneous series this is a cap
    on the u-degree.
    """
    if isinstance(family, CurveSpec):
        family = _family_key(family)
    if family in _G1_FAMILIES:
        udeg = (truncation_weight + 1) // 2
        if udeg < 1:
            raise SeriesError("truncation weight too small")
        poly = sigma1_series(family, udeg)
        return GradedSeries(poly, 1, ("u",), 1, truncation_weight)
    if family == "equipentamic":
        mucap = max(0, (truncation_weight - 3) // 20)
        poly = sigma2_equipentamic_series(mucap)
        return GradedSeries(poly, 2, (U1, U2), 3, truncation_weight)
    raise SeriesError(f"no symbolic series for family {family!r}")


def _family_key(curve: CurveSpec) -> str:
    if curve.family is Family.CUBIC:
        return "cubic"
    if curve.family is Family.AM and curve.a == 3:
        return "equianharmonic"
    if curve.family is Family.AM_PLUS_1 and (curve.a, curve.m) == (2, 1):
        return "lemniscate"
    if curve.family is Family.AM and curve.a == 5:
        return "equipentamic"
    raise SeriesError(f"no symbolic series for {curve.label()}")


# ---------------------------------------------------------------------------
# genus-1 identity residual series


def _abc_polys(family: str, udeg: int) -> tuple[MPoly, MPoly, MPoly]:
    """(sigma, A, B) with A = wp*sigma^2 and B = wp'*sigma^3, entire."""
    s = sigma1_series(family, udeg)
    s1 = s.diff("u")
    s2 = s1.diff("u")
    cap = ("u",)
    A = trunc_degree(s1 * s1 - s * s2, cap, udeg)
    B = trunc_degree(A.diff("u") * s - 2 * A * s1, cap, udeg)
    return s, A, B


def _compose1(p: MPoly, combo: list[tuple[object, str]]) -> MPoly:
    return subs_linear(p, {"u": combo})


def _g1_total_trunc(p: MPoly, uvars, udeg) -> MPoly:
    return trunc_degree(p, uvars, udeg)


def genus1_identity_residual(identity: str, udeg: int = 15) -> MPoly:
    """LHS - RHS of a genus-1 formula, denominators cleared, as a series.

    The residual is exact through total degree udeg in the arguments; a
    correct identity yields the zero polynomial.
    """
    uv2 = ("u", "v")
    uv3 = ("u", "v", "w")

    def T2(p):
        return _g1_total_trunc(p, uv2, udeg)

    def T3(p):
        return _g1_total_trunc(p, uv3, udeg)

    one = Fraction(1)
    if identity in ("A1", "FS"):
        fam = "cubic"
    elif identity.startswith("A1e"):
        fam = "equianharmonic"
    elif identity.startswith("Ai"):
        fam = "lemniscate"
    else:
        raise SeriesError(f"unknown identity {identity!r}")
    s, A, B = _abc_polys(fam, udeg)
    sU = _compose1(s, [(one, "u")])
    sV = _compose1(s, [(one, "v")])
    AU, AV = _compose1(A, [(one, "u")]), _compose1(A, [(one, "v")])

    if identity == "A1":
        lhs = -T2(_compose1(s, [(one, "u"), (one, "v")]) * _compose1(s, [(one, "u"), (-one, "v")]))
        rhs = T2(AU * T2(sV * sV)) - T2(AV * T2(sU * sU))
        return T2(lhs - rhs)

    if identity == "Ai1":
        # paper's printed sign is corrected here: the minus drops out after
        # sigma(iv)^2 = -sigma(v)^2
        i = Cyclo.zeta(4)
        lhs = T2(
            _compose1(s, [(one, "u"), (i, "v")]) * _compose1(s, [(one, "u"), (-i, "v")])
        )
        rhs = (T2(AU * T2(sV * sV)) + T2(AV * T2(sU * sU))).to_cyclo(4)
        return T2(lhs - rhs).rational_coeffs()

    if identity in ("A1e2_plus", "A1e2_minus"):
        z = Cyclo.zeta(3)
        sgn = one if identity.endswith("plus") else -one
        num = MPoly.const(1)
        for j in range(3):
            num = T2(num * _compose1(s, [(one, "u"), (sgn * z**j, "v")]))
        BU, BV = _compose1(B, [(one, "u")]), _compose1(B, [(one, "v")])
        sU3, sV3 = T2(sU * sU * sU), T2(sV * sV * sV)
        rhs = (BU * sV3 + sgn * BV * sU3) * (sgn * Fraction(1, 2))
        return T2(-num - T2(rhs).to_cyclo(3)).rational_coeffs()

    if identity == "A1e3":
        z = Cyclo.zeta(3)
        _, g3p = genus1_invariant_polys("equianharmonic")
        num = MPoly.const(1)
        for j in range(3):
            num = T3(
                num
                * _compose1(s, [(one, "u"), (z**j, "v"), (z ** (2 * j), "w")])
            )
        sW = _compose1(s, [(one, "w")])
        AW = _compose1(A, [(one, "w")])
        BU, BV, BW = (
            _compose1(B, [(one, "u")]),
            _compose1(B, [(one, "v")]),
            _compose1(B, [(one, "w")]),
        )
        sU3, sV3, sW3 = T3(sU * sU * sU), T3(sV * sV * sV), T3(sW * sW * sW)
        quarter = Fraction(1, 4)
        rhs = (
            (T3(BU * BV) * sW3 + T3(BU * BW) * sV3 + T3(BV * BW) * sU3) * quarter
            - 3 * T3(T3(AU * sU) * T3(AV * sV) * T3(AW * sW))
            + Fraction(3, 4) * g3p * T3(sU3 * T3(sV3 * sW3))
        )
        return T3(num - T3(rhs).to_cyclo(3)).rational_coeffs()

    if identity == "FS":
        sW = _compose1(s, [(one, "w")])
        AW = _compose1(A, [(one, "w")])
        BU, BV, BW = (
            _compose1(B, [(one, "u")]),
            _compose1(B, [(one, "v")]),
            _compose1(B, [(one, "w")]),
        )
        num = T3(
            T3(
                _compose1(s, [(one, "u"), (-one, "w")])
                * _compose1(s, [(one, "v"), (-one, "w")])
            )
            * T3(
                _compose1(s, [(one, "u"), (-one, "v")])
                * _compose1(s, [(one, "u"), (one, "v"), (one, "w")])
            )
        )
        sU3, sV3, sW3 = T3(sU * sU * sU), T3(sV * sV * sV), T3(sW * sW * sW)
        det = (
            T3(T3(AV * sV) * BW) - T3(T3(AW * sW) * BV)
        ) * sU3
        det = det - (T3(T3(AU * sU) * BW) - T3(T3(AW * sW) * BU)) * sV3
        det = det + (T3(T3(AU * sU) * BV) - T3(T3(AV * sV) * BU)) * sW3
        return T3(num + Fraction(1, 2) * T3(det))

    raise SeriesError(f"unknown identity {identity!r}")


def rational_cube_identity() -> bool:
    """(a+b+c)(a+zb+z^2c)(a+z^2b+zc) == a^3+b^3+c^3-3abc, exactly."""
    z = Cyclo.zeta(3)
    a, b, c = MPoly.var("a"), MPoly.var("b"), MPoly.var("c")
    lhs = (a + b + c) * (a + z * b + z * z * c) * (a + z * z * b + z * c)
    rhs = a**3 + b**3 + c**3 - 3 * a * b * c
    return (lhs - rhs.to_cyclo(3)).rational_coeffs().is_zero()


# ---------------------------------------------------------------------------
# genus-2 equipentamic addition formula: exact coefficient derivation


_P1_BASIS = (
    ("p122*p1112", "p122", "p1112", 0),
    ("p122*Delta22", "p122", "Delta22", 0),
    ("p1112*p22222", "p1112", "p22222", 0),
    ("p11111*1", "p11111", "1", 0),
    ("Delta22*p22222", "Delta22", "p22222", 0),
    ("mu10*p22222*1", "p22222", "1", 1),
    ("mu10*p122*1", "p122", "1", 1),
)

P1_PRINTED = {
    "p122*p1112": Fraction(5, 18),
    "p122*Delta22": Fraction(-5, 144),
    "p1112*p22222": Fraction(-1, 144),
    "p11111*1": Fraction(-1, 24),
    "Delta22*p22222": Fraction(-1, 576),
    "mu10*p22222*1": Fraction(1, 24),
    "mu10*p122*1": Fraction(0),
}


@lru_cache(maxsize=None)
def _g2_xi_polys(mucap: int) -> dict[str, MPoly]:
    """X * sigma^6 for the weight-compatible basis functions, entire."""
    S = sigma2_equipentamic_series(mucap)
    tr = lambda p: trunc_var(p, "mu10", mucap)
    orders = _G2_ORDERS_4 + [(5, 0), (0, 5), (1, 2), (3, 1)]
    N = _log_derivative_numerators(S, orders, mucap)
    S2 = tr(S * S)
    S3 = tr(S2 * S)
    out = {
        "1": tr(S3 * S3),
        "p122": tr(-N[(1, 2)] * S3),
        "p1112": tr(-N[(3, 1)] * S2),
        "p22222": tr(-N[(0, 5)] * S),
        "p11111": tr(-N[(5, 0)] * S),
    }
    # Delta22 * sigma^6 via quotient-rule numerators over S^4, S^5, S^6
    dnum = tr(N[(2, 0)] * N[(0, 2)] - N[(1, 1)] * N[(1, 1)])
    s2d = S.diff(U2)
    d2num = tr(dnum.diff(U2) * S - 4 * dnum * s2d)
    d22num = tr(d2num.diff(U2) * S - 5 * d2num * s2d)
    out["Delta22"] = d22num
    # pieces for the alternative right-hand side (eqi_p2)
    out["p22*p222"] = tr(tr(N[(0, 2)] * N[(0, 3)]) * S)
    out["p11*p111"] = tr(tr(N[(2, 0)] * N[(3, 0)]) * S)
    out["bracket_a"] = tr(
        -tr(N[(0, 2)] * N[(1, 1)] * N[(1, 1)])
        + tr(N[(2, 0)] * N[(0, 2)] * N[(0, 2)])
        - 4 * tr(N[(1, 1)] * N[(2, 0)]) * S2
    )
    out["bracket_b"] = tr(
        tr(N[(1, 1)] * N[(2, 0)]) * S2
        - tr(N[(0, 2)] * N[(1, 1)] * N[(1, 1)])
        + tr(N[(2, 0)] * N[(0, 2)] * N[(0, 2)])
    )
    return out


def _rename_to_v(p: MPoly) -> MPoly:
    return swap_vars(p, [(U1, "v1"), (U2, "v2")])


@lru_cache(maxsize=None)
def equipentamic_lhs_product(mucap: int) -> MPoly:
    """prod_j sigma(u + [zeta^j]v) * sigma(u) * sigma(v), exact in Q[mu10]."""
    S = sigma2_equipentamic_series(mucap)
    z = Cyclo.zeta(5)
    one = Fraction(1)
    prod = None
    for j in range(5):
        f = subs_linear(
            S.to_cyclo(5),
            {
                U1: [(Cyclo.from_rational(5, 1), U1), (z**j, "v1")],
                U2: [(Cyclo.from_rational(5, 1), U2), (z ** (2 * j), "v2")],
            },
        )
        prod = f if prod is None else trunc_var(prod * f, "mu10", mucap)
    prod = prod.rational_coeffs()
    SV = _rename_to_v(S)
    return trunc_var(trunc_var(prod * S, "mu10", mucap) * SV, "mu10", mucap)


def derive_p1_coefficients(mucap: int = 1) -> dict[str, Fraction]:
    """Re-derive the 5-sigma addition-formula coefficients by linear solve.

    The ansatz is every symmetrized pairing X(u)Y(v) + X(v)Y(u) of basis
    functions with combined weight -15 (mu10-weighted pairings included);
    balancing against the sigma product determines the coefficients
    uniquely.
    """
    lhs = equipentamic_lhs_product(mucap)
    xi = _g2_xi_polys(mucap)
    mu10 = MPoly.var("mu10")
    cols: list[MPoly] = []
    for _, xa, xb, mupow in _P1_BASIS:
        pa, pb = xi[xa], xi[xb]
        term = trunc_var(pa * _rename_to_v(pb), "mu10", mucap) + trunc_var(
            pb * _rename_to_v(pa), "mu10", mucap
        )
        if mupow:
            term = trunc_var(term * mu10**mupow, "mu10", mucap)
        cols.append(term)
    allv = tuple(sorted({v for p in cols + [lhs] for v in p.vars}))

    def terms_of(p: MPoly):
        from .polyalg import _reindex

        return _reindex(p, allv)

    keys = sorted(set().union(*(terms_of(c) for c in cols), terms_of(lhs)))
    A = []
    b = []
    for key in keys:
        A.append([Fraction(terms_of(c).get(key, 0)) for c in cols])
        b.append(Fraction(terms_of(lhs).get(key, 0)))
    sol = solve_rational_unique(A, b)
    if sol is None:
        raise SeriesError("equipentamic coefficient system is not uniquely solvable")
    return {name: c for (name, *_), c in zip(_P1_BASIS, sol)}


def equipentamic_p1_residual(mucap: int = 1, coeffs: dict[str, Fraction] | None = None) -> MPoly:
    """LHS - RHS of the 5-sigma formula with the derived coefficients.

    The coefficients are truncation-independent, so they may be derived at
    a cheaper truncation and the residual checked at a deeper one.
    """
    if coeffs is None:
        coeffs = derive_p1_coefficients(min(mucap, 1))
    lhs = equipentamic_lhs_product(mucap)
    xi = _g2_xi_polys(mucap)
    mu10 = MPoly.var("mu10")
    rhs = MPoly.zero()
    for name, xa, xb, mupow in _P1_BASIS:
        c = coeffs[name]
        if c == 0:
            continue
        pa, pb = xi[xa], xi[xb]
        term = trunc_var(pa * _rename_to_v(pb), "mu10", mucap) + trunc_var(
            pb * _rename_to_v(pa), "mu10", mucap
        )
        if mupow:
            term = trunc_var(term * mu10**mupow, "mu10", mucap)
        rhs = rhs + term * c
    return trunc_var(lhs - rhs, "mu10", mucap)


def equipentamic_p2_residual(mucap: int = 1) -> MPoly:
    """LHS - RHS of the alternative (eqi_p2) form, exact series check."""
    lhs = equipentamic_lhs_product(mucap)
    xi = _g2_xi_polys(mucap)
    mu10 = MPoly.var("mu10")
    tr = lambda p: trunc_var(p, "mu10", mucap)
    half = lambda u_part, v_part: tr(u_part * _rename_to_v(v_part))
    expr = (
        half(xi["p22*p222"], xi["bracket_a"]) * Fraction(1, 4)
        + half(xi["p122"], xi["bracket_b"]) * Fraction(1, 2)
        - half(xi["p11*p111"], xi["1"]) * Fraction(1, 2)
        + tr(half(xi["p22*p222"], xi["1"]) * mu10)
    )
    rhs = expr + swap_vars(expr, [(U1, "v1"), (U2, "v2")])
    return tr(lhs - rhs)
