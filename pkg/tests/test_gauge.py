from fractions import Fraction

import pytest

from conftest import random_poly
from dshierarchy.diffalg import DiffPoly
from dshierarchy.gauge import (GaugeFrame, GaugeHomomorphism,
                               NotGaugeInvariantError, _exp_ad_nilpotent,
                               canonical_form, gauge_invariance_check,
                               gauge_transform, invariants_as_coordinates,
                               to_invariant_coordinates)
from dshierarchy.kacmoody import LoopElement, build_algebra
from dshierarchy.resolvent import LaxOperator

q1, q2 = DiffPoly.var(1), DiffPoly.var(2)


@pytest.fixture(scope="module")
def ctx():
    real = build_algebra("a1_1", 0, depth_hint=10)
    lax = LaxOperator(real, "borel")
    frame = GaugeFrame(real)
    return real, lax, frame


def test_gauge_transform_identity(ctx):
    real, lax, frame = ctx
    s = frame.nilpotent_element([DiffPoly.zero()])
    assert gauge_transform(lax, s) == lax.q


def test_gauge_transform_keeps_lambda_part(ctx):
    real, lax, frame = ctx
    s = frame.nilpotent_element([q2])
    q = gauge_transform(lax, s)
    assert all(k == 0 for k in q.lambda_powers())


def test_gauge_transform_hand_expansion_sl2(ctx):
    # S = s f with s a fresh generator; ad S is nilpotent of order 2 on e
    real, lax, frame = ctx
    s_coeff = DiffPoly.var(3)
    s = frame.nilpotent_element([s_coeff])
    q = gauge_transform(lax, s)
    coords = real.borel_coords(q.vector_at(0))
    expect_f = q1 - s_coeff ** 2 + 2 * s_coeff * q2 - s_coeff.dx()
    expect_h = q2 - s_coeff
    assert coords[0] == expect_f
    assert coords[1] == expect_h


def test_gauge_transform_rejects_non_nilpotent(ctx):
    real, lax, frame = ctx
    bad = LoopElement.from_vector(real, 0, real.poly_vector(real.rho))
    with pytest.raises(ValueError):
        gauge_transform(lax, bad)


def test_canonical_form_sl2_oracle(ctx):
    # two-step recursion by hand: S = q2 f and u = q1 + q2^2 - q2'
    real, lax, frame = ctx
    cf = canonical_form(lax, frame)
    assert cf.s_coeffs[0] == q2
    assert cf.u_exprs[0] == q1 + q2 * q2 - q2.dx()
    assert cf.residual().is_zero()


def test_canonical_form_vacuum(ctx):
    real, lax, frame = ctx
    cf = canonical_form(lax, frame)
    zero_sub = lambda a, m: DiffPoly.zero()
    assert cf.s_can.map_coeffs(lambda p: p.substitute(zero_sub)).is_zero()
    assert cf.q_can.map_coeffs(lambda p: p.substitute(zero_sub)).is_zero()


def test_canonical_form_idempotent(ctx):
    real, lax, frame = ctx
    lax_can = LaxOperator(real, "canonical")
    cf = canonical_form(lax_can, frame)
    assert cf.s_can.is_zero()
    assert cf.q_can == lax_can.q
    assert cf.u_exprs[0] == DiffPoly.var(1)


def test_gauge_invariance_check(ctx):
    real, lax, frame = ctx
    cf = canonical_form(lax, frame)
    hom = GaugeHomomorphism(lax, frame)
    assert gauge_invariance_check(cf.u_exprs[0], hom)
    assert not gauge_invariance_check(q2, hom)
    assert gauge_invariance_check(DiffPoly.const(Fraction(5, 3)), hom)


def test_homomorphism_properties(ctx, rng):
    real, lax, frame = ctx
    hom = GaugeHomomorphism(lax, frame)
    for _ in range(8):
        p = random_poly(rng, arity=2, max_order=2, terms=3, degree=2)
        q = random_poly(rng, arity=2, max_order=2, terms=3, degree=2)
        assert hom.apply(p * q) == hom.apply(p) * hom.apply(q)
        assert hom.apply(p.dx()) == hom.apply(p).dx()


def test_f_of_resolvent_is_gauged_resolvent(ctx):
    real, lax, frame = ctx
    depth = 5
    r = lax.resolvent(1, depth)
    hom = GaugeHomomorphism(lax, frame)
    lhs = hom.apply_loop(r.element())
    rhs = _exp_ad_nilpotent(hom.s_generic, r.element())
    diff = lhs - rhs
    for d, sl in diff.pdeg_slices().items():
        if d >= r.m_a - depth:
            assert sl.is_zero()


def test_invariants_as_coordinates(ctx):
    real, lax, frame = ctx
    cf = canonical_form(lax, frame)
    us = invariants_as_coordinates(cf)
    assert to_invariant_coordinates(cf, us[0]) == DiffPoly.var(1)
    assert to_invariant_coordinates(cf, us[0].dx()) == DiffPoly.var(1, 1)
    with pytest.raises(NotGaugeInvariantError):
        to_invariant_coordinates(cf, q2)


def test_gauge_composition_closure(ctx):
    # gauging by a concrete S first does not change the canonical coordinates
    real, lax, frame = ctx
    cf = canonical_form(lax, frame)
    s0 = frame.nilpotent_element([q2 * q2 - DiffPoly.const(3)])
    q_new = gauge_transform(lax, s0)

    class _Gauged:
        def __init__(self):
            self.real = real
            self.q = q_new
            self.lam_plus_q = real.cyclic + q_new

    cf2 = canonical_form(_Gauged(), frame)
    assert cf2.u_exprs[0] == cf.u_exprs[0]


def test_splitting_dimensions(ctx):
    real, lax, frame = ctx
    ell, dim_n, dim_b = frame.splitting_dims
    assert ell + dim_n == dim_b == len(real.borel_vectors())
