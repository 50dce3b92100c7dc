import math
import warnings

import numpy as np
import pytest
from scipy.spatial import cKDTree

from hillevans import (
    EmptyWindow,
    EvansContext,
    EventKind,
    evans_d2,
    real_characteristic_values,
    spectrum_scan,
    sweep_theta,
    theta_of_zeta,
)
from hillevans.hill import hill_trace, v_of


def test_theta_of_zero_is_zero(profile):
    for key in ("a", "c", "4b"):
        assert theta_of_zeta(profile(key), 0.0) == [0.0]


def test_theta_of_real_zeta_in_band(sg_e6):
    zeta = 0.9  # |tr| < 2 there
    tr = hill_trace(sg_e6, v_of(sg_e6, np.array([zeta])))[0].real
    assert abs(tr) < 2
    thetas = theta_of_zeta(sg_e6, zeta)
    assert len(thetas) == 2
    for th in thetas:
        assert 0 <= th < 2 * math.pi
        assert abs(evans_d2(EvansContext(sg_e6, th), zeta)) < 1e-8


def test_theta_of_zeta_far_from_spectrum_is_empty(sg_e6):
    zeta = 0.4 + 1.3j
    assert theta_of_zeta(sg_e6, zeta) == []
    # dense minimisation over theta confirms no root
    ths = np.linspace(0, 2 * math.pi, 2001)
    d = [abs(evans_d2(EvansContext(sg_e6, t), zeta)) for t in ths[::50]]
    assert min(d) > 1e-8


def test_real_roots_at_theta_zero_include_tangential_zero(sg_e6):
    roots = real_characteristic_values(EvansContext(sg_e6, 0.0), (-1.0, 1.0), 2001)
    zero = [r for r in roots if abs(r.zeta) < 1e-6]
    assert len(zero) == 1 and zero[0].tangential


def test_real_roots_mirror_under_theta_reflection(sg_e6):
    th = 1.234
    a = real_characteristic_values(EvansContext(sg_e6, th), (-3, 3))
    b = real_characteristic_values(EvansContext(sg_e6, 2 * math.pi - th), (-3, 3))
    za = np.array([r.zeta for r in a])
    zb = np.sort([-r.zeta for r in b])
    assert za.size == zb.size
    assert np.max(np.abs(za - zb)) < 1e-9


def test_root_count_drops_after_hopf_onset(sg_e6):
    # the narrower interval keeps a root entering near zeta = 3 out of the count
    before = real_characteristic_values(EvansContext(sg_e6, 4.36), (-2.5, 2.5))
    after = real_characteristic_values(EvansContext(sg_e6, 4.88), (-2.5, 2.5))
    assert len(before) - len(after) == 2


def test_real_roots_are_roots(phi4_fig6):
    ctx = EvansContext(phi4_fig6, 2.0)
    for r in real_characteristic_values(ctx, (-1.5, 1.5)):
        assert abs(evans_d2(ctx, r.zeta)) < 1e-8


def test_sweep_without_merges_has_no_events(sg_e6):
    res = sweep_theta(sg_e6, np.arange(2.5, 2.7, 0.01), (-3, 3))
    assert res.events == []
    assert res.ambiguities == []


def test_sweep_validation(sg_e6):
    with pytest.raises(ValueError):
        sweep_theta(sg_e6, [1.0, 1.5], (-1, 1))
    with pytest.raises(ValueError):
        sweep_theta(sg_e6, [1.0, 0.99], (-1, 1))


@pytest.fixture(scope="module")
def sg_sweep(sg_e6):
    return sweep_theta(sg_e6, np.arange(4.40, 4.65, 0.005), (-3, 3))


def test_sweep_event_brackets(sg_sweep):
    assert [e.kind for e in sg_sweep.events] == [EventKind.HOPF_ONSET]
    for e in sg_sweep.events:
        lo, hi = e.bracket
        assert lo < e.theta_star < hi and hi - lo < 1e-4


def test_signed_krein_count_changes_only_at_events(sg_sweep):
    totals = {}
    for tr in sg_sweep.tracks:
        for th, z, k in tr:
            if k == 0:  # collision points sit at the event itself
                continue
            totals[round(th, 9)] = totals.get(round(th, 9), 0) + k
    events = [e.theta_star for e in sg_sweep.events]
    thetas = sorted(totals)
    for t0, t1 in zip(thetas, thetas[1:]):
        if not any(t0 <= e <= t1 for e in events):
            assert totals[t0] == totals[t1]


def test_merging_tracks_have_opposite_signatures(sg_sweep, sg_e6):
    ev = sg_sweep.events[0]
    ctx = EvansContext(sg_e6, ev.theta_star - 0.05)
    roots = [r.zeta for r in real_characteristic_values(ctx, (-3, 3))]
    near = sorted(roots, key=lambda z: abs(z - ev.zeta_star))[:2]
    from hillevans import krein_signature
    assert {krein_signature(ctx, z).kappa for z in near} == {-1, 1}


def test_collision_marked_with_zero_signature(sg_sweep):
    ev = sg_sweep.events[0]
    ends = [tr[-1] for tr in sg_sweep.tracks if tr[-1][2] == 0]
    assert len(ends) == 2
    assert all(abs(t - ev.theta_star) < 1e-12 for t, _, _ in ends)


@pytest.fixture(scope="module")
def sg_scan(sg_e6):
    return spectrum_scan(sg_e6, (-3, 3, -0.5, 0.5), (128, 64))


def test_scan_points_are_accepted(sg_scan):
    assert sg_scan
    for p in sg_scan:
        assert p.residual < 1e-8
        assert p.lam == 1j * p.zeta
        assert 0 <= p.theta < 2 * math.pi


def test_scan_sorted_by_lambda(sg_scan):
    keys = [(p.lam.real, p.lam.imag) for p in sg_scan]
    assert keys == sorted(keys)


def test_scan_off_axis_in_upper_half_plane(sg_scan):
    assert any(abs(p.lam.real) > 1e-3 and p.lam.imag > 0 for p in sg_scan)


def test_scan_residuals_hold_at_tighter_tolerance(sg_e6, sg_scan):
    pts = sg_scan[:: max(1, len(sg_scan) // 40)]
    z = np.array([p.zeta for p in pts])
    th = np.array([p.theta for p in pts])
    tr = hill_trace(sg_e6, v_of(sg_e6, z), rtol=1e-12, atol=1e-14)
    a = sg_e6.c * sg_e6.T / (sg_e6.c**2 - 1)
    assert np.max(np.abs(tr - 2 * np.cos(a * z + th))) < 1e-8


def test_scan_translation_invariance(sg_e6):
    # shifting a window that contains the off-axis loops leaves them in place
    a = spectrum_scan(sg_e6, (1.0, 2.5, 0.02, 0.3), (96, 64))
    b = spectrum_scan(sg_e6, (1.1, 2.6, 0.01, 0.29), (96, 64))
    za = np.array([p.zeta for p in a])
    zb = np.array([p.zeta for p in b])
    da, _ = cKDTree(np.c_[zb.real, zb.imag]).query(np.c_[za.real, za.imag])
    db, _ = cKDTree(np.c_[za.real, za.imag]).query(np.c_[zb.real, zb.imag])
    step = 1.5 / 95
    assert max(da.max(), db.max()) < step


def test_empty_window_warns(profile):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        pts = spectrum_scan(profile("a"), (0.5, 1.0, 1.0, 1.5), (32, 32))
    assert pts == []
    assert any(issubclass(w.category, EmptyWindow) for w in caught)


def test_scan_validation(profile):
    with pytest.raises(ValueError):
        spectrum_scan(profile("a"), (1, 0, 0, 1), (32, 32))
    with pytest.raises(ValueError):
        spectrum_scan(profile("a"), (0, 1, 0, 1), (16, 32))


def test_rotational_branches_share_their_spectrum(rng):
    from hillevans import Branch, WaveParameters, sine_gordon, wave_profile

    plus = wave_profile(WaveParameters(6.0, 1.45, sine_gordon(), Branch.ROTATIONAL_PLUS))
    minus = wave_profile(WaveParameters(6.0, 1.45, sine_gordon(), Branch.ROTATIONAL_MINUS))
    for _ in range(5):
        zeta = complex(rng.uniform(-3, 3), rng.uniform(-0.5, 0.5))
        th = rng.uniform(0, 2 * math.pi)
        d_plus = evans_d2(EvansContext(plus, th), zeta)
        d_minus = evans_d2(EvansContext(minus, th), zeta)
        assert abs(d_plus - d_minus) < 1e-8 * (1 + abs(d_plus))
