"""Multi-index wp functions, Delta functions, and their defining relations.

wp with k indices is the k-th partial of -log sigma, evaluated by exact
termwise differentiation of the theta sum (never finite differences);
the reciprocal/Leibniz recursion below turns a bundle of sigma partials
into log-sigma partials.
"""

from __future__ import annotations

from itertools import combinations_with_replacement

import numpy as np

from .curves import CurveSpec, weierstrass_invariants
from .sigma import (
    OnThetaDivisor,
    SigmaContext,
    _le,
    _mi_binom,
    _multi_indices,
    _sub,
    sigma_derivatives,
)


def _alpha_of(indices: str | tuple, genus: int) -> tuple[int, ...]:
    if isinstance(indices, str):
        idx = [int(ch) for ch in indices]
    else:
        idx = [int(i) for i in indices]
    if not all(1 <= i <= genus for i in idx):
        raise ValueError(f"indices {indices!r} out of range for genus {genus}")
    return tuple(idx.count(i) for i in range(1, genus + 1))


def wp_name(indices) -> str:
    return "p" + "".join(str(i) for i in sorted(int(i) for i in indices))


def log_sigma_derivatives(ctx: SigmaContext, u, order: int):
    """Partials of log sigma up to total order (|alpha| >= 1)."""
    g = ctx.genus
    sd = sigma_derivatives(ctx, u, order)
    s0 = sd[(0,) * g]
    if abs(complex(s0)) < ctx.divisor_threshold():
        raise OnThetaDivisor(f"|sigma(u)| = {abs(complex(s0)):.2e} below threshold")
    # derivatives of 1/sigma
    recip = {(0,) * g: 1 / s0}
    for tot in range(1, order + 1):
        for alpha in _multi_indices(g, tot):
            if sum(alpha) != tot:
                continue
            acc = 0
            for beta in _multi_indices(g, tot):
                if beta == (0,) * g or not _le(beta, alpha):
                    continue
                acc = acc + _mi_binom(alpha, beta) * sd[beta] * recip[_sub(alpha, beta)]
            recip[alpha] = -acc / s0
    out = {}
    for tot in range(1, order + 1):
        for alpha in _multi_indices(g, tot):
            if sum(alpha) != tot:
                continue
            i = next(k for k, a in enumerate(alpha) if a > 0)
            ei = tuple(1 if k == i else 0 for k in range(g))
            rest = _sub(alpha, ei)
            acc = 0
            for beta in _multi_indices(g, sum(rest)):
                if not _le(beta, rest):
                    continue
                acc = acc + _mi_binom(rest, beta) * sd[
                    tuple(b + e for b, e in zip(beta, ei))
                ] * recip[_sub(rest, beta)]
            out[alpha] = acc
    return out


class WpEvaluator:
    """Caches the log-sigma partials at a point and serves wp values."""

    def __init__(self, ctx: SigmaContext, u, order: int = 5):
        self.ctx = ctx
        self.genus = ctx.genus
        self.order = order
        self._l = log_sigma_derivatives(ctx, u, order)

    def wp(self, indices) -> complex:
        alpha = _alpha_of(indices, self.genus)
        if sum(alpha) < 2:
            raise ValueError("wp needs at least two indices")
        return -self._l[alpha]

    def __getitem__(self, indices) -> complex:
        return self.wp(indices)

    # genus-2 Delta functions, by the product rule on Delta = det[wp_ij]

    def delta(self) -> complex:
        p = self.wp
        return p("11") * p("22") - p("12") ** 2

    def delta1(self) -> complex:
        p = self.wp
        return p("111") * p("22") + p("11") * p("122") - 2 * p("12") * p("112")

    def delta2(self) -> complex:
        p = self.wp
        return p("112") * p("22") + p("11") * p("222") - 2 * p("12") * p("122")

    def delta11(self) -> complex:
        p = self.wp
        return (
            p("1111") * p("22")
            + 2 * p("111") * p("122")
            + p("11") * p("1122")
            - 2 * p("112") ** 2
            - 2 * p("12") * p("1112")
        )

    def delta12(self) -> complex:
        p = self.wp
        return (
            p("1112") * p("22")
            + p("111") * p("222")
            + p("11") * p("1222")
            - p("112") * p("122")
            - 2 * p("12") * p("1122")
        )

    def delta22(self) -> complex:
        p = self.wp
        return (
            p("1122") * p("22")
            + 2 * p("112") * p("222")
            + p("11") * p("2222")
            - 2 * p("122") ** 2
            - 2 * p("12") * p("1222")
        )


def wp(ctx: SigmaContext, indices, u) -> complex:
    """A single wp value; use WpEvaluator for many values at one point."""
    alpha = _alpha_of(indices, ctx.genus)
    ev = WpEvaluator(ctx, u, order=sum(alpha))
    return ev.wp(indices)


GAMMA_BASIS_NAMES = {
    2: ["1", "p11", "p12", "p22"],
    3: ["1", "p11", "p12", "p22", "p111", "p112", "p122", "p222", "Delta"],
}
GAMMA_BASIS_NAMES[4] = GAMMA_BASIS_NAMES[3] + [
    "p1111", "p1112", "p1122", "p1222", "p2222", "Delta1", "Delta2",
]
GAMMA_BASIS_NAMES[5] = GAMMA_BASIS_NAMES[4] + [
    "p11111", "p11112", "p11122", "p11222", "p12222", "p22222",
    "Delta11", "Delta12", "Delta22",
]


def basis_gamma(ctx: SigmaContext, n: int):
    """Named evaluators for the basis of functions with poles of order at
    most n on the theta divisor (genus 2, n = 2..5)."""
    if ctx.genus != 2:
        raise ValueError("basis_gamma is genus-2 only")
    if n not in (2, 3, 4, 5):
        raise ValueError("n must be 2..5")
    names = GAMMA_BASIS_NAMES[n]

    def make(name):
        if name == "1":
            return lambda u: 1.0 + 0j
        if name.startswith("Delta"):
            suffix = name[5:]
            meth = "delta" + suffix
            return lambda u: getattr(WpEvaluator(ctx, u, order=5), meth)()
        return lambda u: WpEvaluator(ctx, u, order=len(name) - 1).wp(name[1:])

    return {name: make(name) for name in names}


def wp_ode_residual_genus1(ctx: SigmaContext, u) -> tuple[complex, float]:
    """(wp')^2 - 4 wp^3 + g2 wp + g3 and its magnitude scale."""
    if ctx.genus != 1:
        raise ValueError("genus-1 only")
    g2, g3 = weierstrass_invariants(ctx.curve)
    ev = WpEvaluator(ctx, u, order=3)
    p = complex(ev.wp("11"))
    dp = complex(ev.wp("111"))
    res = dp**2 - 4 * p**3 + g2 * p + g3
    scale = max(abs(dp) ** 2, 4 * abs(p) ** 3, abs(g2 * p), abs(g3), 1e-30)
    return res, scale


EQUIPENTAMIC_RELATIONS = {
    # name: (lhs wp, [(coeff, factors...)]) with mu10 written as "mu10"
    "p2222": [(1, "p2222"), (-6, "p22", "p22"), (-4, "p12")],
    "p1222": [(1, "p1222"), (-6, "p22", "p12"), (2, "p11")],
    "p1122": [(1, "p1122"), (-4, "p12", "p12"), (-2, "p11", "p22")],
    "p1112": [(1, "p1112"), (-6, "p12", "p11"), (4, "mu10")],
    "p1111": [(1, "p1111"), (-6, "p11", "p11"), (12, "p22", "mu10")],
    "p222^2": [
        (1, "p222", "p222"), (-4, "p22", "p22", "p22"), (-4, "p11"),
        (-4, "p22", "p12"),
    ],
    "p122*p222": [
        (1, "p122", "p222"), (2, "p22", "p11"), (-4, "p22", "p22", "p12"),
        (-2, "p12", "p12"),
    ],
}


def equipentamic_pde_residuals(ctx: SigmaContext, u) -> dict[str, tuple[complex, float]]:
    """Residual and scale for the seven 4-index / 3-index wp relations of
    the x^5 + mu10 curve; mu10 is the even-model constant term."""
    from .curves import even_model_coeffs

    mu10 = even_model_coeffs(ctx.curve)[0]
    ev = WpEvaluator(ctx, u, order=4)

    def val(name):
        if name == "mu10":
            return mu10
        return complex(ev.wp(name[1:]))

    out = {}
    for name, terms in EQUIPENTAMIC_RELATIONS.items():
        res = 0j
        scale = 1e-30
        for coeff, *factors in terms:
            t = complex(coeff)
            for f in factors:
                t *= val(f)
            res += t
            scale = max(scale, abs(t))
        out[name] = (res, scale)
    return out


def delta_funcs(ctx: SigmaContext, u):
    """(Delta, Delta1, Delta2, Delta11, Delta12, Delta22) at u."""
    if ctx.genus != 2:
        raise ValueError("genus-2 only")
    ev = WpEvaluator(ctx, u, order=5)
    return (
        ev.delta(), ev.delta1(), ev.delta2(),
        ev.delta11(), ev.delta12(), ev.delta22(),
    )
