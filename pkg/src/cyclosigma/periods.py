"""Branch points, period matrices, Abel map, and lattice reduction.

Cycles are realized as loops around consecutive pairs of the
deterministically ordered branch points, with the square-root branch fixed
by analytic continuation along each segment.  The symplectic combination
of those loops is selected by searching the handful of possible
intersection-sign patterns for the one whose tau is symmetric with
positive-definite imaginary part and whose full period matrix satisfies a
generalized Legendre relation M J M^T = kappa J.

Conventions: period matrices are g x g with rows indexed by the
differential and columns by the cycle, so the theta argument is
z = omega1^{-1} u with u a column vector, and the lattice is the column
span of [omega1 omega2].
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .curves import (
    AffinePoint,
    CurveSpec,
    UnsupportedGenus,
    branch_y_shift,
    discriminant,
    even_model_coeffs,
    is_singular,
    x_side_exponents,
)


class PeriodError(RuntimeError):
    pass


class IllConditionedPeriods(PeriodError):
    pass


class HomologyError(PeriodError):
    pass


class NearBranchPoint(PeriodError):
    pass


class SingularCurveError(PeriodError):
    pass


# ---------------------------------------------------------------------------
# branch points


def branch_points(curve: CurveSpec) -> list[complex]:
    """Finite roots of the even-form polynomial, sorted by (Re, Im)."""
    if curve.genus > 2:
        raise UnsupportedGenus(f"periods limited to genus <= 2, got {curve.genus}")
    if is_singular(curve):
        raise SingularCurveError(f"discriminant vanishes: D = {discriminant(curve)}")
    coeffs = even_model_coeffs(curve)
    r = np.roots(np.array(coeffs[::-1], dtype=complex))
    r = sorted(r, key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    n = len(r)
    scale = max(max(abs(z) for z in r), 1e-3)
    mindist = min(
        abs(r[i] - r[j]) for i in range(n) for j in range(i + 1, n)
    )
    if mindist < 1e-10 * scale:
        raise IllConditionedPeriods(f"branch points nearly collide (gap {mindist:.2e})")
    return [complex(z) for z in r]


# ---------------------------------------------------------------------------
# second-kind differential numerators


def eta_numerator_coeffs(curve: CurveSpec) -> list[list[complex]]:
    """Coefficient lists (ascending in x) of the eta_j numerators.

    eta_j = (1/2y) * sum_{k=j}^{2g-j} (k+1-j) mu_{4g-2k-2j} x^k dx with
    mu_0 = 1 and mu absent from the family treated as 0.
    """
    g = curve.genus
    mu_even: dict[int, complex] = {0: 1.0 + 0j}
    for j, e in x_side_exponents(curve):
        # x-side modulus mu_j multiplies x^e; translate to index by weight
        mu_even[j] = mu_even.get(j, 0.0) + curve.mu_val(j)
    out = []
    for j in range(1, g + 1):
        coeff = [0j] * (2 * g - j + 1)
        for k in range(j, 2 * g - j + 1):
            idx = 4 * g - 2 * k - 2 * j
            coeff[k] = (k + 1 - j) * mu_even.get(idx, 0.0)
        out.append(coeff)
    return out


# ---------------------------------------------------------------------------
# quadrature with branch tracking


def _polyval(coeffs, x):
    acc = np.zeros_like(x, dtype=complex) if isinstance(x, np.ndarray) else 0j
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _continued_sqrt(vals: np.ndarray, anchor: complex | None = None) -> np.ndarray:
    """Square roots of vals with signs chained for continuity."""
    s = np.sqrt(vals)
    if anchor is not None and abs(s[0] + anchor) < abs(s[0] - anchor):
        s[0] = -s[0]
    for k in range(1, len(s)):
        if abs(s[k] - s[k - 1]) > abs(s[k] + s[k - 1]):
            s[k] = -s[k]
    return s


def _loop_integrals(
    phi_roots: list[complex],
    pair: tuple[int, int],
    integrands: list[list[complex]],
    tol: float,
) -> list[complex]:
    """Loop integrals of f(x)dx/(2Y) around the cut joining two roots.

    Equals int_{-1}^{1} f(x(t)) / (g(t) sqrt(1-t^2)) dt with
    g(t)^2 = -prod(x(t) - other roots), evaluated by Gauss-Chebyshev with
    adaptive node doubling; the branch of g is fixed by a deterministic
    continuation chain anchored at the principal value at t = -1.
    """
    ia, ib = pair
    ea, eb = phi_roots[ia], phi_roots[ib]
    others = [r for k, r in enumerate(phi_roots) if k not in (ia, ib)]
    mid, half = (ea + eb) / 2.0, (eb - ea) / 2.0

    def psi(x):
        acc = np.ones_like(x, dtype=complex)
        for r in others:
            acc = acc * (x - r)
        return acc

    # reference branch chain on a fixed fine grid
    tchk = np.linspace(-1.0, 1.0, 513)
    chain = _continued_sqrt(-psi(mid + half * tchk))

    prev = None
    prev_err = None
    K = 32
    while K <= 8192:
        k = np.arange(1, K + 1)
        t = np.cos((2 * k - 1) * np.pi / (2 * K))
        x = mid + half * t
        graw = np.sqrt(-psi(x))
        idx = np.clip(((t + 1.0) * 256).round().astype(int), 0, 512)
        ref = chain[idx]
        flip = np.abs(graw - ref) > np.abs(graw + ref)
        graw[flip] = -graw[flip]
        vals = []
        for f in integrands:
            fv = _polyval(f, x)
            vals.append(complex((np.pi / K) * np.sum(fv / graw)))
        if prev is not None:
            err = max(
                abs(a - b) / max(1.0, abs(a)) for a, b in zip(vals, prev)
            )
            if err < tol:
                return vals
            # roundoff plateau: successive doublings stop improving well
            # below any tolerance the harness asserts at
            if prev_err is not None and err < 1e-11 and err > 0.2 * prev_err:
                return vals
            prev_err = err
        prev = vals
        K *= 2
    raise IllConditionedPeriods("loop quadrature did not converge")


# ---------------------------------------------------------------------------
# period matrices


@dataclass(frozen=True)
class PeriodData:
    """First and second kind period matrices over a symplectic basis.

    Matrices are tuples of row tuples, rows = differentials, columns =
    cycles; tau = omega1^{-1} omega2.
    """

    genus: int
    omega1: tuple
    omega2: tuple
    eta1: tuple
    eta2: tuple
    tau: tuple
    branch_points: tuple
    kappa: complex
    homology: str

    def omega1_np(self) -> np.ndarray:
        return np.array(self.omega1, dtype=complex)

    def omega2_np(self) -> np.ndarray:
        return np.array(self.omega2, dtype=complex)

    def eta1_np(self) -> np.ndarray:
        return np.array(self.eta1, dtype=complex)

    def eta2_np(self) -> np.ndarray:
        return np.array(self.eta2, dtype=complex)

    def tau_np(self) -> np.ndarray:
        return np.array(self.tau, dtype=complex)


def _to_tuple(m: np.ndarray) -> tuple:
    return tuple(tuple(complex(x) for x in row) for row in m)


def _tau_checks(tau: np.ndarray, tol: float = 1e-8) -> bool:
    if not np.all(np.isfinite(tau)):
        return False
    scale = max(1.0, float(np.max(np.abs(tau))))
    if np.max(np.abs(tau - tau.T)) > tol * scale:
        return False
    im = (tau.imag + tau.imag.T) / 2.0
    return bool(np.all(np.linalg.eigvalsh(im) > 1e-10))


def _legendre_kappa(w1, w2, e1, e2, tol: float = 1e-7):
    """kappa with M J M^T = kappa J for M = [[w1, w2], [e1, e2]], or None."""
    g = w1.shape[0]
    M = np.block([[w1, w2], [e1, e2]])
    J = np.block(
        [[np.zeros((g, g)), np.eye(g)], [-np.eye(g), np.zeros((g, g))]]
    )
    P = M @ J @ M.T
    top = P[:g, :g]
    mixed = P[:g, g:]
    kappa = np.trace(mixed) / g
    scale = max(abs(kappa), 1e-30)
    ok = (
        np.max(np.abs(top)) < tol * scale
        and np.max(np.abs(P[g:, g:])) < tol * scale
        and np.max(np.abs(mixed - kappa * np.eye(g))) < tol * scale
    )
    return complex(kappa) if ok else None


def period_matrices(curve: CurveSpec, tol: float = 1e-13) -> PeriodData:
    """Periods over a symplectic homology basis built from chain loops."""
    g = curve.genus
    if g not in (1, 2):
        raise UnsupportedGenus(f"periods need genus 1 or 2, got {g}")
    roots = branch_points(curve)
    scale = max(abs(r) for r in roots)
    for i in range(2 * g):
        others = [r for k, r in enumerate(roots) if k not in (i, i + 1)]
        gap = min(_dist_to_segment([roots[i], roots[i + 1]], s)[0] for s in others)
        if gap < 0.04 * scale:
            raise IllConditionedPeriods(
                f"cycle segment {i} passes within {gap:.2e} of another branch point"
            )
    omega_integrands = [[0j] * (j - 1) + [1.0 + 0j] for j in range(1, g + 1)]
    integrands = omega_integrands + eta_numerator_coeffs(curve)
    loops = []
    for i in range(2 * g):
        loops.append(_loop_integrals(roots, (i, i + 1), integrands, tol))
    L = np.array(loops, dtype=complex)  # [loop, integrand]

    def matrices_for(alpha_vecs, beta_vecs):
        w1 = np.empty((g, g), dtype=complex)
        w2 = np.empty((g, g), dtype=complex)
        h1 = np.empty((g, g), dtype=complex)
        h2 = np.empty((g, g), dtype=complex)
        for kcyc in range(g):
            a = alpha_vecs[kcyc] @ L
            b = beta_vecs[kcyc] @ L
            w1[:, kcyc], h1[:, kcyc] = a[:g], a[g:]
            w2[:, kcyc], h2[:, kcyc] = b[:g], b[g:]
        return w1, w2, h1, h2

    candidates = []
    if g == 1:
        for s1 in (1, -1):
            candidates.append(
                (np.array([[1.0, 0.0]]), np.array([[0.0, s1]]), f"beta={s1}*L1")
            )
    else:
        for s1, s2, s3 in product((1, -1), repeat=3):
            alpha = np.array([[1.0, 0, 0, 0], [0, 0, 1.0, 0]])
            beta = np.array(
                [[0, s1, 0, s1 * s2 * s3], [0, 0, 0, s3]], dtype=float
            )
            candidates.append((alpha, beta, f"signs=({s1},{s2},{s3})"))

    for alpha, beta, label in candidates:
        w1, w2, h1, h2 = matrices_for(alpha, beta)
        if abs(np.linalg.det(w1)) < 1e-14:
            continue
        tau = np.linalg.solve(w1, w2)
        if not _tau_checks(tau):
            continue
        kappa = _legendre_kappa(w1, w2, h1, h2)
        if kappa is None:
            continue
        tau = (tau + tau.T) / 2.0
        return PeriodData(
            genus=g,
            omega1=_to_tuple(w1),
            omega2=_to_tuple(w2),
            eta1=_to_tuple(h1),
            eta2=_to_tuple(h2),
            tau=_to_tuple(tau),
            branch_points=tuple(roots),
            kappa=kappa,
            homology=f"chain loops e_i..e_{{i+1}}, {label}",
        )
    raise HomologyError("no sign pattern yields a symplectic period basis")


# ---------------------------------------------------------------------------
# lattice reduction


@dataclass(frozen=True)
class LatticeVector:
    l1: tuple[int, ...]
    l2: tuple[int, ...]
    value: tuple[complex, ...]

    @classmethod
    def from_integers(cls, pd: PeriodData, l1, l2) -> "LatticeVector":
        v = pd.omega1_np() @ np.array(l1, dtype=complex) + pd.omega2_np() @ np.array(
            l2, dtype=complex
        )
        return cls(tuple(int(x) for x in l1), tuple(int(x) for x in l2), tuple(v))

    def is_zero(self) -> bool:
        return all(k == 0 for k in self.l1) and all(k == 0 for k in self.l2)


def real_lattice_coords(u, pd: PeriodData) -> tuple[np.ndarray, np.ndarray]:
    """Real (u', u'') with u = omega1 u' + omega2 u''."""
    g = pd.genus
    u = np.asarray(u, dtype=complex)
    A = np.hstack([pd.omega1_np(), pd.omega2_np()])
    Ar = np.vstack([A.real, A.imag])
    b = np.concatenate([u.real, u.imag])
    x = np.linalg.solve(Ar, b)
    return x[:g], x[g:]


def reduce_modulo_lattice(u, pd: PeriodData):
    """Split u = u_red + l with l in the lattice and fractional coords in
    [-1/2, 1/2); returns (u_red, l, u', u'')."""
    up, upp = real_lattice_coords(u, pd)
    l1 = np.floor(up + 0.5).astype(int)
    l2 = np.floor(upp + 0.5).astype(int)
    lat = LatticeVector.from_integers(pd, l1, l2)
    u_red = tuple(np.asarray(u, dtype=complex) - np.array(lat.value))
    return u_red, lat, up, upp


def lattice_invariance_matrix(pd: PeriodData, factors, tol: float = 1e-9):
    """Integer M with diag(factors) [omega1 omega2] = [omega1 omega2] M.

    Returns M when the scaled lattice equals the lattice (the 2g x 2g
    change of basis is integral within tol), else None.
    """
    g = pd.genus
    P = np.hstack([pd.omega1_np(), pd.omega2_np()])  # g x 2g
    D = np.diag(np.array(factors, dtype=complex))
    Q = D @ P
    Pr = np.vstack([P.real, P.imag])  # 2g x 2g
    Qr = np.vstack([Q.real, Q.imag])
    M = np.linalg.solve(Pr, Qr)
    Mi = np.rint(M)
    if np.max(np.abs(M - Mi)) > tol:
        return None
    return Mi.astype(int)


# ---------------------------------------------------------------------------
# Abel map


def _on_curve_Y(curve: CurveSpec, p: AffinePoint) -> complex:
    return complex(p.y) + branch_y_shift(curve)


def abel_map(
    curve: CurveSpec,
    pd: PeriodData,
    points: list[AffinePoint],
    tol: float = 1e-12,
    exclusion: float = 1e-3,
    waypoint: complex | None = None,
) -> tuple[complex, ...]:
    """u = sum_i int_infty^{P_i} omega, along deterministic w-plane paths.

    The local coordinate at infinity is w with x = w^{-2}; each path is the
    straight segment from w = 0 to w(P), bent around any nearby image of a
    branch point.  Defined modulo the period lattice.  Passing a waypoint
    forces an alternate routing through that w-plane point, which may only
    change the result by a lattice vector.
    """
    g = curve.genus
    if g not in (1, 2):
        raise UnsupportedGenus("abel map needs genus 1 or 2")
    total = np.zeros(g, dtype=complex)
    for p in points:
        total += np.array(_abel_single(curve, pd, p, tol, exclusion, waypoint))
    return tuple(total)


def _abel_single(curve, pd, p: AffinePoint, tol: float, exclusion: float,
                 waypoint: complex | None = None):
    g = curve.genus
    roots = pd.branch_points
    x0 = complex(p.x)
    Y0 = _on_curve_Y(curve, p)
    scale = max(max(abs(r) for r in roots), 1.0)
    if min(abs(x0 - r) for r in roots) < exclusion * scale:
        raise NearBranchPoint(f"point x={x0} too close to a branch point")
    phi = even_model_coeffs(curve)
    # h(w)^2 = 1 + c_{N-1} w^2 + ... + c_0 w^{2N}, h(0) = +1
    N = len(phi) - 1
    hsq = [0j] * (2 * N + 1)
    for k in range(N + 1):
        hsq[2 * (N - k)] = phi[k]
    w_end = complex(1.0 / np.sqrt(x0))  # principal branch; sheet fixed below
    sing = [complex(1.0 / np.sqrt(r)) for r in roots if r != 0]
    sing += [-s for s in sing]
    clearance = 0.08 * abs(w_end) + 0.05
    if sing:
        clearance = min(clearance, 0.45 * min(abs(w_end - s) for s in sing))
    if waypoint is not None:
        path = [0j, complex(waypoint), w_end]
    else:
        path = _bent_path(0j, w_end, sing, clearance)
    vals = np.zeros(g, dtype=complex)
    h_end = None
    anchor = 1.0 + 0j
    for a, b in zip(path[:-1], path[1:]):
        seg_vals, anchor = _abel_segment(hsq, g, a, b, anchor, tol)
        vals += seg_vals
        h_end = anchor
    # which sheet did we land on?  y = h / w^{2g+1}
    y_end = h_end / complex(w_end) ** (2 * g + 1)
    if abs(y_end - Y0) <= abs(y_end + Y0):
        mismatch = abs(y_end - Y0)
        sign = 1.0
    else:
        mismatch = abs(y_end + Y0)
        sign = -1.0
    if mismatch > 1e-6 * max(1.0, abs(Y0)):
        raise NearBranchPoint("could not identify the sheet of the endpoint")
    return tuple(sign * vals)


def _bent_path(w0, w1, sing, clearance):
    """Polyline from w0 to w1 avoiding given singular points."""
    seg = [w0, w1]
    for _ in range(8):
        worst, worst_d = None, clearance
        for s in sing:
            d, tpos = _dist_to_segment(seg, s)
            if d < worst_d:
                worst, worst_d, worst_t = s, d, tpos
        if worst is None:
            return seg
        # insert a detour waypoint perpendicular to the path near the hit
        a, b = seg[0], seg[-1]
        direction = (b - a) / abs(b - a)
        normal = direction * 1j
        base = a + worst_t * (b - a)
        side = normal if abs(base + clearance * normal - worst) > abs(
            base - clearance * normal - worst
        ) else -normal
        mid = base + 2.0 * clearance * side
        seg = [w0, mid, w1]
        sing = [s for s in sing if _dist_to_segment(seg, s)[0] < clearance]
        if not sing:
            return seg
    return seg


def _dist_to_segment(seg, s):
    best, best_t = float("inf"), 0.0
    for a, b in zip(seg[:-1], seg[1:]):
        d = b - a
        t = ((s - a) / d).real if d != 0 else 0.0
        t = min(max(t, 0.0), 1.0)
        dist = abs(a + t * d - s)
        if dist < best:
            best, best_t = dist, t
    return best, best_t


from functools import lru_cache


@lru_cache(maxsize=None)
def _leggauss(K: int):
    return np.polynomial.legendre.leggauss(K)


def _abel_segment(hsq, g, a, b, anchor, tol):
    """Integrals of -w^{2(g-j)}/h(w) dw over [a, b], j = 1..g.

    Returns the integral values and the continued branch value h(b), used
    to anchor the next segment and to identify the endpoint sheet.
    """
    prev = None
    prev_err = None
    K = 16
    while K <= 4096:
        nodes, weights = _leggauss(K)
        t = 0.5 * (nodes + 1.0)
        w = a + (b - a) * t
        h = _continued_sqrt(_polyval(hsq, w), anchor=anchor)
        vals = []
        for j in range(1, g + 1):
            f = -(w ** (2 * (g - j))) / h
            vals.append(complex(np.sum(weights * f) * 0.5 * (b - a)))
        if prev is not None:
            err = max(abs(x - y) / max(1.0, abs(x)) for x, y in zip(vals, prev))
            plateau = prev_err is not None and err < 1e-11 and err > 0.2 * prev_err
            if err <= tol or plateau:
                h_b = complex(np.sqrt(_polyval(hsq, np.array([b], dtype=complex)))[0])
                if abs(h_b - h[-1]) > abs(h_b + h[-1]):
                    h_b = -h_b
                return np.array(vals), h_b
            prev_err = err
        prev = vals
        K *= 2
    raise IllConditionedPeriods("abel-map quadrature did not converge")
