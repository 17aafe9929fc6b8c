import cmath

import pytest

from cyclosigma.curves import (
    AffinePoint,
    CurveError,
    Family,
    FamilyParityMismatch,
    ModulusNotInFamily,
    automorphism_on_point,
    automorphism_on_u,
    automorphism_u_factors,
    build_curve,
    burnside,
    cm_weight,
    curve_from_json,
    curve_to_json,
    discriminant,
    discriminant_poly,
    equianharmonic,
    equipentamic,
    evaluate_f,
    even_model_coeffs,
    general_cubic,
    lemniscatic,
    minus_zeta_u_factors,
    weierstrass_invariants,
    weight_of,
)


def test_build_named_curves():
    c = equipentamic(mu5=0.5, mu10=1.0)
    assert c.genus == 2 and c.label() == "(2,5[1])"
    b = burnside(mu4=0.25, mu8=-1.0)
    assert b.genus == 2 and b.automorphism_order == 4
    e = equianharmonic(mu3=1.0, mu6=2.0)
    assert e.genus == 1
    assert lemniscatic().genus == 1


def test_build_rejects_bad_modulus_and_parity():
    with pytest.raises(ModulusNotInFamily):
        build_curve(Family.AM, 3, 1, {4: 1.0})
    with pytest.raises(FamilyParityMismatch):
        build_curve(Family.AM, 2, 1, {4: 1.0})
    with pytest.raises(FamilyParityMismatch):
        build_curve(Family.AM_PLUS_1, 3, 1, {6: 1.0})


def test_genus3_constructible_but_flagged():
    c = build_curve(Family.AM_PLUS_1, 3, 2, {6: 1.0, 12: 1.0})
    assert c.genus == 3
    assert not c.analytic_supported


def test_evaluate_f_examples():
    c = build_curve(Family.AM, 3, 1, {})
    assert evaluate_f(c, AffinePoint(1, 1)) == 0
    b = build_curve(Family.AM_PLUS_1, 2, 2, {})
    assert evaluate_f(b, AffinePoint(1, 1)) == 0
    q = equipentamic(mu5=0.0, mu10=1.0)
    assert evaluate_f(q, AffinePoint(0, 1)) == 0


def test_automorphisms_preserve_curve():
    for c in [
        equianharmonic(0.3 + 0.1j, 1.0),
        lemniscatic(-1.0 + 0.2j),
        burnside(0.3, -1.0 + 0.1j),
        equipentamic(0.2, 1.0 + 0.5j),
    ]:
        # find a point on the curve: pick x, solve the quadratic in y
        x = 0.7 + 0.3j
        coeffs = even_model_coeffs(c)
        phi = sum(coeffs[k] * x**k for k in range(len(coeffs)))
        from cyclosigma.curves import branch_y_shift

        y = cmath.sqrt(phi) - branch_y_shift(c)
        p = AffinePoint(x, y)
        assert abs(evaluate_f(c, p)) < 1e-12
        for k in range(c.automorphism_order):
            q = automorphism_on_point(c, k, p)
            assert abs(evaluate_f(c, q)) < 1e-10
        ident = automorphism_on_point(c, c.automorphism_order, p)
        assert abs(ident.x - p.x) + abs(ident.y - p.y) < 1e-12


def test_burnside_generator_matches_known_action():
    b = burnside(0.3, -1.0)
    p = AffinePoint(0.5 + 0.2j, 1.1 - 0.4j)
    q = automorphism_on_point(b, 1, p)
    assert abs(q.x - (-p.x)) < 1e-14
    assert abs(q.y - 1j * p.y) < 1e-14
    assert automorphism_u_factors(b, 1) == pytest.approx((1j, -1j))


def test_u_action_is_group_action():
    c = equipentamic(0.0, 1.0)
    u = (0.3 + 0.1j, -0.2 + 0.4j)
    for k1 in range(10):
        for k2 in range(10):
            lhs = automorphism_on_u(c, k1, automorphism_on_u(c, k2, u))
            rhs = automorphism_on_u(c, (k1 + k2) % 10, u)
            assert max(abs(a - b) for a, b in zip(lhs, rhs)) < 1e-14


def test_equipentamic_u_action_weight_pattern():
    # squares of the generator act as (zeta^j v1, zeta^{2j} v2), zeta = e^{2pi i/5}
    c = equipentamic(0.0, 1.0)
    z5 = cmath.exp(2j * cmath.pi / 5)
    f = automorphism_u_factors(c, 6)  # the element acting as [zeta]
    assert abs(f[0] - z5) < 1e-14 and abs(f[1] - z5**2) < 1e-14
    # every [zeta^j] twist (and its negative) arises as a generator power
    twists = {(round(a.real, 9), round(a.imag, 9), round(b.real, 9), round(b.imag, 9))
              for a, b in (automorphism_u_factors(c, k) for k in range(10))}
    for j in range(5):
        for s in (1, -1):
            a, b = s * z5**j, s * z5 ** (2 * j)
            assert (round(a.real, 9), round(a.imag, 9), round(b.real, 9), round(b.imag, 9)) in twists


def test_minus_zeta_factors():
    # Burnside: [-zeta] = [i]-action (i*u1, -i*u2) with sigma factor (-i)^3 = i
    facs, sig = minus_zeta_u_factors(burnside())
    assert abs(facs[0] - 1j) < 1e-14 and abs(facs[1] + 1j) < 1e-14
    assert abs(sig - 1j) < 1e-14
    assert cm_weight(build_curve(Family.AM, 3, 1, {})) == 1
    assert cm_weight(equipentamic()) == 3
    assert cm_weight(burnside()) == 3


def test_weights():
    assert weight_of("mu10", 2) == -10
    assert weight_of("p11", 2) == -6
    assert weight_of("Delta", 2) == -8
    assert weight_of("u1", 2) == 3
    assert weight_of("u1", 1) == 1
    assert weight_of("p22222", 2) == -5
    assert weight_of("Delta22", 2) == -10
    with pytest.raises(CurveError):
        weight_of("nope", 2)


def test_discriminant_exact_forms():
    # (2,3[1]): D = 27*(mu3^2 + 4*mu6)^2
    d = discriminant_poly(build_curve(Family.AM, 3, 1, {}))
    from cyclosigma.polyalg import MPoly

    mu3, mu6 = MPoly.var("mu3"), MPoly.var("mu6")
    assert d == 27 * (mu3**2 + 4 * mu6) ** 2
    # (2,2[1]+1): D = 64*mu4^3
    d2 = discriminant_poly(lemniscatic())
    mu4 = MPoly.var("mu4")
    assert d2 == 64 * mu4**3
    # equipentamic even form: D = 2^8 * 5^5 * (mu10 + mu5^2/4)^4-type
    d3 = discriminant_poly(equipentamic())
    mu5, mu10 = MPoly.var("mu5"), MPoly.var("mu10")
    assert d3 == 3125 * (mu5**2 + 4 * mu10) ** 4


def test_discriminant_values():
    assert abs(discriminant(build_curve(Family.AM_PLUS_1, 2, 1, {4: 0.0}))) == 0
    assert abs(discriminant(build_curve(Family.AM, 3, 1, {}))) == 0
    d = discriminant(build_curve(Family.AM, 3, 1, {6: 1.0}))
    assert d == pytest.approx(432.0)  # 27 * 16, matches |g2^3 - 27 g3^2|
    g2, g3 = weierstrass_invariants(build_curve(Family.AM, 3, 1, {6: 1.0}))
    assert abs(d) == pytest.approx(abs(g2**3 - 27 * g3**2))


def test_cubic_discriminant_tracks_classical():
    c = general_cubic(mu3=0.4, mu4=-1.2, mu6=0.7)
    g2, g3 = weierstrass_invariants(c)
    assert abs(discriminant(c)) == pytest.approx(abs(g2**3 - 27 * g3**2), rel=1e-12)


def test_weierstrass_invariants_complete_square():
    c = equianharmonic(mu3=0.5, mu6=2.0)
    g2, g3 = weierstrass_invariants(c)
    assert g2 == 0
    assert g3 == pytest.approx(-(4 * 2.0 + 0.25))


def test_json_roundtrip_and_rejects_unknown():
    c = burnside(0.25 + 0.5j, -1.0)
    obj = curve_to_json(c)
    c2 = curve_from_json(obj)
    assert c2 == c
    obj["extra"] = 1
    with pytest.raises(CurveError):
        curve_from_json(obj)
