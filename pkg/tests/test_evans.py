import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hillevans import (
    EvansContext,
    NonSimple,
    NotACharacteristicValue,
    ZeroCharacteristicValue,
    evans_d1,
    evans_d2,
    evans_d3,
    evans_hill,
    krein_signature,
    mu_prime,
    real_characteristic_values,
    wrap_angle,
)
from hillevans.evans import krein_batch
from hillevans.hill import phase_rate
from hillevans.oracles import finite_difference_mu_prime


@settings(max_examples=200)
@given(st.floats(-50, 50, allow_nan=False))
def test_wrap_angle_range(theta):
    w = wrap_angle(theta)
    assert 0.0 <= w < 2 * math.pi
    assert math.isclose(math.cos(w), math.cos(theta), abs_tol=1e-12)


def test_wrap_angle_edges():
    assert wrap_angle(2 * math.pi) == 0.0
    assert wrap_angle(-1e-300) == 0.0
    assert math.copysign(1.0, wrap_angle(-0.0)) == 1.0
    assert wrap_angle(-2 * math.pi) == 0.0


@pytest.mark.parametrize("key", ["b", "c"])
def test_evans_function_relations(profile, key, rng):
    p = profile(key)
    a = phase_rate(p)
    for _ in range(8):
        zeta = complex(rng.uniform(-2, 2), rng.uniform(-1, 1))
        ctx = EvansContext(p, rng.uniform(0, 2 * math.pi))
        d1, d2, d3 = evans_d1(ctx, zeta), evans_d2(ctx, zeta), evans_d3(ctx, zeta)
        assert abs(d1 + np.exp(1j * a * zeta - 1j * ctx.theta) * d2) < 1e-7 * (1 + abs(d1))
        assert abs(d3 + np.exp(-1j * a * zeta - 1j * ctx.theta) * d2) < 1e-7 * (1 + abs(d3))


def test_vectorised_and_scalar_agree(profile):
    ctx = EvansContext(profile("a"), 1.1)
    zeta = np.array([0.3, -0.7 + 0.2j, 1.5j])
    vec = evans_d2(ctx, zeta)
    assert np.allclose(vec, [evans_d2(ctx, z) for z in zeta], rtol=0, atol=1e-13)
    assert isinstance(evans_d2(ctx, 0.3), complex)


@pytest.mark.parametrize("key", ["a", "b", "c", "d", "4b"])
def test_zero_is_a_root_at_theta_zero(profile, key):
    ctx = EvansContext(profile(key), 0.0)
    assert abs(evans_d2(ctx, 0.0)) < 1e-8
    assert abs(evans_hill(profile(key), 0.0)) < 1e-8


def test_symmetries_of_d2(profile, rng):
    p = profile("c")
    for _ in range(5):
        zeta = complex(rng.uniform(-2, 2), rng.uniform(-1, 1))
        th = rng.uniform(0, 2 * math.pi)
        d = evans_d2(EvansContext(p, th), zeta)
        # (zeta, theta) -> (-zeta, -theta) leaves D2 fixed; conjugating zeta conjugates it
        assert abs(evans_d2(EvansContext(p, -th), -zeta) - d) < 1e-9 * (1 + abs(d))
        assert abs(evans_d2(EvansContext(p, th), np.conj(zeta)) - np.conj(d)) < 1e-9 * (1 + abs(d))


def test_krein_signs_match_finite_difference(phi4_fig6):
    ctx = EvansContext(phi4_fig6, 3.4)
    z = np.array([r.zeta for r in real_characteristic_values(ctx, (-1.5, 1.5))])
    mu, *_ = krein_batch(phi4_fig6, z, ctx.theta)
    fd = finite_difference_mu_prime(phi4_fig6, z, ctx.theta)
    assert np.all(np.sign(mu) == np.sign(fd))
    assert np.allclose(mu, fd, rtol=1e-5)


def test_krein_single_negative_among_positive(phi4_fig6):
    # on the positive axis one value of opposite signature sits among the others
    ctx = EvansContext(phi4_fig6, 3.4)
    roots = [r.zeta for r in real_characteristic_values(ctx, (0.05, 1.5))]
    kappas = [krein_signature(ctx, z).kappa for z in roots]
    assert kappas.count(-1) == 1 and kappas.count(1) >= 5


def test_krein_record_fields(sg_e6):
    ctx = EvansContext(sg_e6, 4.36)
    z = real_characteristic_values(ctx, (1.0, 2.5))[0].zeta
    k = krein_signature(ctx, z)
    assert k.kappa in (-1, 1)
    assert k.residual < 1e-8 and abs(k.trace) < 2
    assert mu_prime(ctx, z) == k.mu_prime


def test_krein_errors(sg_e6):
    ctx = EvansContext(sg_e6, 4.36)
    with pytest.raises(ZeroCharacteristicValue):
        krein_signature(ctx, 0.0)
    with pytest.raises(NotACharacteristicValue):
        krein_signature(ctx, 0.123)


def test_krein_rejects_band_edge(sg_e6):
    # at a band edge |tr| = 2 and D_Hill' vanishes; pick theta to make it a root
    from scipy.optimize import brentq

    from hillevans.evans import hill_trace_and_derivative

    def h(z):
        return abs(hill_trace_and_derivative(sg_e6, np.array([z]))[0][0].real) - 2

    edge = brentq(h, 1.3, 1.6, xtol=1e-15)
    tr = hill_trace_and_derivative(sg_e6, np.array([edge]))[0][0].real
    theta = math.acos(max(-1, min(1, tr / 2))) - phase_rate(sg_e6) * edge
    with pytest.raises(NonSimple):
        krein_signature(EvansContext(sg_e6, theta), edge)


def test_expanded_forms_match_direct_determinants(profile, rng):
    from hillevans.hill import hill_monodromies, linearised_monodromies, v_of

    p = profile("b")
    a = phase_rate(p)
    for _ in range(6):
        zeta = complex(rng.uniform(-1.5, 1.5), rng.uniform(-0.3, 0.3))
        ctx = EvansContext(p, rng.uniform(0, 2 * math.pi))
        F = linearised_monodromies(p, np.array([zeta]))[0]
        H = hill_monodromies(p, v_of(p, np.array([zeta])))[0]
        rho = np.exp(-1j * ctx.theta)
        eta = np.exp(-1j * a * zeta - 1j * ctx.theta)
        d1 = np.linalg.det(F - rho * np.eye(2))
        d3 = np.linalg.det(H - eta * np.eye(2))
        assert abs(evans_d1(ctx, zeta) - d1) < 1e-8 * (1 + abs(d1))
        assert abs(evans_d3(ctx, zeta) - d3) < 1e-8 * (1 + abs(d3))
