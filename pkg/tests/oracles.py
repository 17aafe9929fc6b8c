"""Independent oracles used by the test suite.

These deliberately avoid the package's own quadrature: complete elliptic
integrals via the arithmetic-geometric mean for genus-1 periods, and
central finite differences for derivative cross-checks.
"""

from __future__ import annotations

import cmath
import math

import numpy as np


def agm(a: float, b: float, tol: float = 1e-16) -> float:
    while abs(a - b) > tol * abs(a):
        a, b = (a + b) / 2.0, math.sqrt(a * b)
    return a


def weierstrass_half_periods_real(g2: float, g3: float) -> tuple[float, complex]:
    """(omega_real, omega_imag) half-periods of 4x^3 - g2 x - g3 with three
    real roots e1 > e2 > e3, by AGM."""
    roots = sorted(np.roots([4.0, 0.0, -g2, -g3]).real, reverse=True)
    e1, e2, e3 = roots
    if not (e1 > e2 > e3):
        raise ValueError("need three distinct real roots")
    w1 = math.pi / (2.0 * agm(math.sqrt(e1 - e3), math.sqrt(e1 - e2)))
    w3 = 1j * math.pi / (2.0 * agm(math.sqrt(e1 - e3), math.sqrt(e2 - e3)))
    return w1, w3


def lattice_match(P: np.ndarray, Q: np.ndarray, tol: float = 1e-9) -> bool:
    """Do the column spans of P and Q over Z agree (unimodular change)?"""
    Pr = np.vstack([P.real, P.imag])
    Qr = np.vstack([Q.real, Q.imag])
    M = np.linalg.solve(Pr, Qr)
    Mi = np.rint(M)
    if np.max(np.abs(M - Mi)) > tol:
        return False
    return abs(abs(round(float(np.linalg.det(Mi)))) - 1) == 0


def central_diff(f, x0: complex, h: float = 1e-5) -> complex:
    return (f(x0 + h) - f(x0 - h)) / (2.0 * h)


def theta_sum_oracle(z: complex, tau: complex, d1: float, d2: float, radius: int = 50) -> complex:
    """Brute-force genus-1 characteristic theta sum over |n| <= radius."""
    total = 0j
    for n in range(-radius, radius + 1):
        a = n + d1
        total += cmath.exp(2j * cmath.pi * (0.5 * a * a * tau + a * (z + d2)))
    return total
