"""Floquet spectrum location, real characteristic values, and theta sweeps.

A complex zeta lies in the spectrum when some real theta solves
``tr ℍ(T; zeta) = 2 cos(a zeta + theta)``.  Writing ``w = arccos(tr/2)`` the
candidates are ``theta = +-w - a zeta``, which are real exactly when

    g(zeta) = |Im w(zeta)| - |a| |Im zeta| = 0.

``g`` is continuous, so off the real axis the spectrum is its sign-change set.
On the real axis ``g = |Im w| >= 0`` and the spectrum is the band set
``|tr| <= 2``, handled separately.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment, minimize_scalar

from .errors import EmptyWindow, TrackingAmbiguity
from .evans import (
    GUARD_TOL,
    ROOT_TOL,
    EvansContext,
    krein_batch,
    principal_arccos,
    wrap_angle,
)
from .hill import hill_trace, phase_rate, v_of

IMAG_TOL = 1e-6
EVENT_TOL = 1e-4


def _trace(profile, zeta, **kw):
    return hill_trace(profile, v_of(profile, zeta), **kw)


@dataclass(frozen=True)
class SpectralPoint:
    zeta: complex
    theta: float
    residual: float

    @property
    def lam(self) -> complex:
        return 1j * self.zeta


def _theta_candidates(profile, zeta, tr):
    a = phase_rate(profile)
    w = principal_arccos(tr / 2.0)
    return w - a * zeta, -w - a * zeta


def _polish_theta(profile, zeta, theta, tr):
    """One Newton step in theta on D2; skipped where D2 already vanishes."""
    a = phase_rate(profile)
    d2 = tr - 2.0 * np.cos(a * zeta + theta)
    if abs(d2) < ROOT_TOL:
        return theta, abs(d2)
    deriv = 2.0 * np.sin(a * zeta + theta)
    if deriv != 0:
        theta = theta - (d2 / deriv).real
    return theta, abs(tr - 2.0 * np.cos(a * zeta + theta))


def theta_of_zeta(profile, zeta: complex, imag_tol: float = IMAG_TOL,
                  root_tol: float = ROOT_TOL, trace=None) -> list[float]:
    """Floquet exponents in [0, 2pi) for which ``zeta`` is a characteristic value."""
    zeta = complex(zeta)
    tr = complex(_trace(profile, np.array([zeta]))[0]) if trace is None else complex(trace)
    # the two branches meet where tr = +-2 (band edges, and zeta = 0): a double root
    a = phase_rate(profile)
    if abs(tr - 2.0) < root_tol:
        cands = [complex(-a * zeta)]
    elif abs(tr + 2.0) < root_tol:
        cands = [complex(math.pi - a * zeta)]
    else:
        cands = list(_theta_candidates(profile, zeta, tr))
    # near |tr| = 2 arccos has a square-root branch point, so a residual of
    # root_tol corresponds to an imaginary part of order sqrt(root_tol)
    limit = max(imag_tol, math.sqrt(root_tol))
    out = []
    for cand in cands:
        if abs(cand.imag) >= limit:
            continue
        theta, res = _polish_theta(profile, zeta, cand.real, tr)
        if res < root_tol:
            out.append(wrap_angle(theta))
    out = sorted(set(out))
    return out


def indicator(profile, zeta, tr=None):
    """The spectral indicator g; zero on the spectrum."""
    zeta = np.asarray(zeta, dtype=complex)
    if tr is None:
        tr = _trace(profile, zeta)
    w = principal_arccos(tr / 2.0)
    return np.abs(w.imag) - abs(phase_rate(profile)) * np.abs(zeta.imag)


def _bisect_edges(fun, za, zb, fa, n_bisect, n_polish):
    """Vectorised bisection then secant polish of sign changes of ``fun`` on [za, zb]."""
    za = za.copy()
    zb = zb.copy()
    fa = fa.copy()
    for _ in range(n_bisect):
        zm = 0.5 * (za + zb)
        fm = fun(zm)
        left = np.sign(fm) == np.sign(fa)
        za = np.where(left, zm, za)
        fa = np.where(left, fm, fa)
        zb = np.where(left, zb, zm)
    fb = fun(zb)
    for _ in range(n_polish):
        denom = fb - fa
        with np.errstate(divide="ignore", invalid="ignore"):
            zs = zb - fb * (zb - za) / denom
        inside = np.isfinite(zs) & (np.abs(zs - za) <= np.abs(zb - za)) & (np.abs(zs - zb) <= np.abs(zb - za))
        zs = np.where(inside, zs, 0.5 * (za + zb))
        fs = fun(zs)
        left = np.sign(fs) == np.sign(fa)
        za = np.where(left, zs, za)
        fa = np.where(left, fs, fa)
        zb = np.where(left, zb, zs)
        fb = np.where(left, fb, fs)
    pick_a = np.abs(fa) <= np.abs(fb)
    return np.where(pick_a, za, zb)


def spectrum_scan(profile, window, grid=(256, 256), imag_tol: float = IMAG_TOL,
                  root_tol: float = ROOT_TOL) -> list[SpectralPoint]:
    """Points of the Floquet spectrum inside a rectangle of the zeta-plane.

    ``window`` is ``(re_lo, re_hi, im_lo, im_hi)``.  Off-axis points come from
    sign changes of the indicator along grid edges, refined to
    ``diag / 2**14`` by bisection and then polished by secant steps until the
    residual test can be met.  Real-axis points are the band samples plus
    refined band edges.  Output is sorted by (Re lambda, Im lambda).
    """
    re_lo, re_hi, im_lo, im_hi = map(float, window)
    nx, ny = grid
    if not (re_hi > re_lo and im_hi > im_lo):
        raise ValueError("degenerate scan window")
    if nx < 32 or ny < 32:
        raise ValueError("scan grid must be at least 32x32")
    xs = np.linspace(re_lo, re_hi, nx)
    ys = np.linspace(im_lo, im_hi, ny)
    Z = xs[:, None] + 1j * ys[None, :]
    tr = _grid_traces(profile, Z)
    G = indicator(profile, Z, tr)
    diag = math.hypot(re_hi - re_lo, im_hi - im_lo)
    points: list[SpectralPoint] = []

    za_list, zb_list, fa_list = [], [], []
    offaxis = Z.imag != 0.0
    for axis in (0, 1):
        sl_a = [slice(None)] * 2
        sl_b = [slice(None)] * 2
        sl_a[axis] = slice(0, -1)
        sl_b[axis] = slice(1, None)
        ga, gb = G[tuple(sl_a)], G[tuple(sl_b)]
        za_, zb_ = Z[tuple(sl_a)], Z[tuple(sl_b)]
        same_side = np.sign(za_.imag) == np.sign(zb_.imag)
        mask = (np.sign(ga) * np.sign(gb) < 0) & offaxis[tuple(sl_a)] & offaxis[tuple(sl_b)] & same_side
        za_list.append(za_[mask])
        zb_list.append(zb_[mask])
        fa_list.append(ga[mask])
    za = np.concatenate(za_list)
    zb = np.concatenate(zb_list)
    fa = np.concatenate(fa_list)
    if za.size:
        cell = max(np.max(np.abs(zb - za)), 1e-300)
        n_bisect = max(0, int(math.ceil(math.log2(cell / (diag / 2**14)))))
        roots = _bisect_edges(lambda z: indicator(profile, z), za, zb, fa, n_bisect, 8)
        rtr = _trace(profile, roots)
        for z, t in zip(roots, rtr):
            for theta in theta_of_zeta(profile, z, imag_tol=max(imag_tol, 1e-3),
                                       root_tol=root_tol, trace=t):
                res = abs(t - 2.0 * np.cos(phase_rate(profile) * z + theta))
                points.append(SpectralPoint(complex(z), theta, float(res)))

    if im_lo <= 0.0 <= im_hi:
        points.extend(_real_axis_points(profile, xs, root_tol))

    if not points:
        warnings.warn("no spectrum found in the scan window", EmptyWindow, stacklevel=2)
    points.sort(key=lambda p: (-p.zeta.imag, p.zeta.real, p.theta))
    return points


def _grid_traces(profile, Z):
    """Traces on a grid, integrating each distinct v once.

    v depends on zeta^2 and conjugation commutes with the (real) equation, so
    symmetric windows share most of their work.
    """
    v = v_of(profile, Z.ravel())
    canon = np.where(v.imag < 0, np.conj(v), v)
    uniq, inverse = np.unique(canon, return_inverse=True)
    tr_u = hill_trace(profile, uniq)
    tr = tr_u[inverse.ravel()]
    tr = np.where(v.imag < 0, np.conj(tr), tr)
    return tr.reshape(Z.shape)


def _real_axis_points(profile, xs, root_tol):
    tr = _grid_traces(profile, xs.astype(complex)).real
    pts = []
    inband = np.abs(tr) <= 2.0
    for z, t, ok in zip(xs, tr, inband):
        if ok:
            for theta in theta_of_zeta(profile, z, trace=t, root_tol=root_tol):
                pts.append(SpectralPoint(complex(z), theta, _res(profile, z, theta, t)))
    h = np.abs(tr) - 2.0
    idx = np.nonzero(np.sign(h[:-1]) * np.sign(h[1:]) < 0)[0]
    for i in idx:
        def f(z):
            return abs(float(_trace(profile, np.array([z])).real[0])) - 2.0
        z = brentq(f, xs[i], xs[i + 1], xtol=1e-14)
        t = float(_trace(profile, np.array([z])).real[0])
        for theta in theta_of_zeta(profile, z, trace=t, root_tol=root_tol):
            pts.append(SpectralPoint(complex(z), theta, _res(profile, z, theta, t)))
    return pts


def _res(profile, z, theta, t):
    return float(abs(t - 2.0 * math.cos(phase_rate(profile) * z + theta)))


# ---------------------------------------------------------------- real roots

@dataclass(frozen=True)
class RealRoot:
    zeta: float
    tangential: bool = False  # found as a touching zero: suspected non-simple


def _d2_real(profile, theta, z):
    z = np.atleast_1d(np.asarray(z, dtype=float))
    tr = _trace(profile, z).real
    return tr - 2.0 * np.cos(phase_rate(profile) * z + theta)


def _refine_roots(profile, theta, z, d, width, tangential_tol=0.05):
    """Roots of D2(.; theta) given samples ``d`` on the grid ``z``."""
    f = lambda x: float(_d2_real(profile, theta, x)[0])  # noqa: E731
    xtol = max(width * 1e-12, 1e-15)
    roots: list[RealRoot] = []
    n = z.size
    zero = np.abs(d) < ROOT_TOL
    sgn = np.where(zero, 0.0, np.sign(d))
    for i in range(n - 1):
        if sgn[i] * sgn[i + 1] < 0:
            roots.append(RealRoot(brentq(f, z[i], z[i + 1], xtol=xtol, rtol=1e-15)))
    for i in np.nonzero(zero)[0]:
        lft = sgn[i - 1] if i > 0 else 0.0
        rgt = sgn[i + 1] if i < n - 1 else 0.0
        roots.append(RealRoot(float(z[i]), tangential=bool(lft * rgt > 0)))
    # touching or closely paired zeros hidden inside one cell
    for i in range(1, n - 1):
        if zero[i] or sgn[i - 1] != sgn[i] or sgn[i + 1] != sgn[i]:
            continue
        if not (abs(d[i]) <= abs(d[i - 1]) and abs(d[i]) <= abs(d[i + 1])):
            continue
        if abs(d[i]) > tangential_tol:
            continue
        s = sgn[i]
        opt = minimize_scalar(lambda x: s * f(x), bounds=(z[i - 1], z[i + 1]),
                              method="bounded", options={"xatol": xtol})
        zm, fm = float(opt.x), s * float(opt.fun)
        if abs(fm) < ROOT_TOL:
            roots.append(RealRoot(zm, tangential=True))
        elif np.sign(fm) != s:
            roots.append(RealRoot(brentq(f, z[i - 1], zm, xtol=xtol, rtol=1e-15)))
            roots.append(RealRoot(brentq(f, zm, z[i + 1], xtol=xtol, rtol=1e-15)))
    roots.sort(key=lambda r: r.zeta)
    return roots


def real_characteristic_values(ctx: EvansContext, interval, n_seed: int = 2001,
                               _grid=None) -> list[RealRoot]:
    """All real zeros of D2(.; theta) in ``interval``, sorted."""
    lo, hi = map(float, interval)
    if not hi > lo:
        raise ValueError("degenerate interval")
    if _grid is None:
        z = np.linspace(lo, hi, n_seed)
        tr = _grid_traces(ctx.profile, z.astype(complex)).real
    else:
        z, tr = _grid
    d = tr - 2.0 * np.cos(ctx.a * z + ctx.theta)
    return _refine_roots(ctx.profile, ctx.theta, z, d, hi - lo)


# ---------------------------------------------------------------- theta sweep

class EventKind(enum.Enum):
    HOPF_ONSET = "HopfOnset"
    HOPF_OFFSET = "HopfOffset"
    PASS_THROUGH = "PassThrough"


@dataclass(frozen=True)
class SweepEvent:
    kind: EventKind
    theta_star: float
    zeta_star: float
    bracket: tuple[float, float]

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "theta_star": self.theta_star,
                "zeta_star": self.zeta_star, "bracket": list(self.bracket)}


@dataclass
class SweepResult:
    tracks: list  # each a list of (theta, zeta0, kappa)
    events: list[SweepEvent]
    ambiguities: list = field(default_factory=list)  # (theta_lo, theta_hi, zeta)


@dataclass
class _Slice:
    theta: float
    zeta: np.ndarray
    kappa: np.ndarray
    velocity: np.ndarray  # d zeta / d theta along the root curve


def _slice_data(profile, theta, roots):
    z = np.array([r.zeta for r in roots if not r.tangential], dtype=float)
    if z.size == 0:
        return _Slice(theta, z, np.zeros(0, int), z.copy())
    mu, tr, dhill, residual = krein_batch(profile, z, theta)
    sn = np.sin(phase_rate(profile) * z + theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        vel = -2.0 * sn / (dhill + 2.0 * phase_rate(profile) * sn)
    simple = (np.abs(tr) < 2.0 - GUARD_TOL) & (residual < ROOT_TOL) & np.isfinite(mu)
    kappa = np.where(simple, np.sign(np.nan_to_num(mu)), 0).astype(int)
    return _Slice(theta, z, kappa, np.nan_to_num(vel))


def _local_extremum(profile, theta, lo, hi, sign, n=48):
    """Extremum of ``sign * D2`` on [lo, hi]: (location, value)."""
    z = np.linspace(lo, hi, n)
    d = sign * _d2_real(profile, theta, z)
    i = int(np.argmin(d))
    a, b = z[max(i - 1, 0)], z[min(i + 1, n - 1)]
    if b <= a:
        return float(z[i]), float(d[i])
    opt = minimize_scalar(lambda x: sign * float(_d2_real(profile, theta, x)[0]),
                          bounds=(a, b), method="bounded", options={"xatol": 1e-13})
    if opt.fun < d[i]:
        return float(opt.x), float(opt.fun)
    return float(z[i]), float(d[i])


def _refine_pair_event(profile, th_exist, th_gone, lo, hi):
    """Bisect on the existence of a root pair in [lo, hi]; returns (theta*, zeta*)."""
    sign = float(np.sign(_d2_real(profile, th_exist, [lo])[0]))
    for _ in range(60):
        if abs(th_gone - th_exist) < EVENT_TOL / 2:
            break
        mid = 0.5 * (th_exist + th_gone)
        _, val = _local_extremum(profile, mid, lo, hi, sign)
        if val < 0:
            th_exist = mid
        else:
            th_gone = mid
    theta_star = 0.5 * (th_exist + th_gone)
    zeta_star, _ = _local_extremum(profile, theta_star, lo, hi, sign)
    return theta_star, zeta_star, (min(th_exist, th_gone), max(th_exist, th_gone))


def _pair_velocity(profile, theta, lo, hi):
    """The two roots nearest the middle of [lo, hi] and their velocities."""
    roots = real_characteristic_values(EvansContext(profile, theta), (lo, hi), 65)
    roots = [r for r in roots if not r.tangential]
    if len(roots) < 2:
        return None, None
    mid = 0.5 * (lo + hi)
    k = min(range(len(roots) - 1),
            key=lambda i: abs(0.5 * (roots[i].zeta + roots[i + 1].zeta) - mid))
    sl = _slice_data(profile, theta, roots[k:k + 2])
    if sl.zeta.size != 2:
        return None, None
    return sl.zeta, sl.velocity


def _refine_crossing(profile, th_lo, th_hi, lo, hi):
    """Locate where two root curves cross between ``th_lo`` and ``th_hi``.

    Distinct curves can only meet where |tr| = 2 with a flat trace (a closed
    gap), so the crossing sits at the extremum of |tr| and its exponent is read
    off the curve there.  If that fails, bisect on whether the roots approach.
    """
    def neg_abs_tr(x):
        return -abs(float(_trace(profile, np.array([x])).real[0]))

    zs = np.linspace(lo, hi, 48)
    tz = np.abs(_trace(profile, zs).real)
    i = int(np.argmax(tz))
    opt = minimize_scalar(neg_abs_tr, bounds=(zs[max(i - 1, 0)], zs[min(i + 1, zs.size - 1)]),
                          method="bounded", options={"xatol": 1e-13})
    zc = float(opt.x)
    trc = float(_trace(profile, np.array([zc])).real[0])
    w = math.acos(max(-1.0, min(1.0, trc / 2.0)))
    a = phase_rate(profile)
    for cand in (w - a * zc, -w - a * zc):
        tc = th_lo + wrap_angle(cand - th_lo)
        if th_lo <= tc <= th_hi:
            half = EVENT_TOL / 4
            return tc, zc, (max(th_lo, tc - half), min(th_hi, tc + half))

    for _ in range(60):
        if th_hi - th_lo < EVENT_TOL / 2:
            break
        mid = 0.5 * (th_lo + th_hi)
        z, vel = _pair_velocity(profile, mid, lo, hi)
        if z is None:
            break
        if vel[0] > vel[1]:  # still approaching
            th_lo = mid
        else:
            th_hi = mid
    theta_star = 0.5 * (th_lo + th_hi)
    z, _ = _pair_velocity(profile, theta_star, lo, hi)
    zeta_star = float(np.mean(z)) if z is not None else 0.5 * (lo + hi)
    return theta_star, zeta_star, (th_lo, th_hi)


@dataclass
class _Step:
    rows: list
    cols: list
    crossings: list  # (old_i, old_j, new_i, new_j)
    onsets: list  # adjacent pairs of vanished old roots
    offsets: list  # adjacent pairs of new roots
    exits: list
    entries: list
    leftovers: list  # (slice, index)

    @property
    def clean(self) -> bool:
        return not self.leftovers


class _Sweeper:
    def __init__(self, profile, interval, n_seed):
        self.profile = profile
        self.lo, self.hi = map(float, interval)
        z = np.linspace(self.lo, self.hi, n_seed)
        self.grid = (z, _grid_traces(profile, z.astype(complex)).real)
        self.edge_pad = 2.0 * (self.hi - self.lo) / (n_seed - 1)
        self.result = SweepResult([], [])

    def slice(self, theta):
        roots = real_characteristic_values(EvansContext(self.profile, theta),
                                           (self.lo, self.hi), _grid=self.grid)
        return _slice_data(self.profile, theta, roots)

    def _near_edge(self, z):
        return z <= self.lo + self.edge_pad or z >= self.hi - self.edge_pad

    def classify(self, old: _Slice, new: _Slice) -> _Step:
        dth = new.theta - old.theta
        rows, cols = _match(old, new, dth)
        step = _Step(rows, cols, [], [], [], [], [], [])
        order = np.argsort(old.zeta[rows], kind="stable") if rows else []
        mo = np.asarray(rows, dtype=int)[order]
        mn = np.asarray(cols, dtype=int)[order]
        for p in range(len(mo) - 1):
            if new.zeta[mn[p]] > new.zeta[mn[p + 1]]:
                step.crossings.append((mo[p], mo[p + 1], mn[p], mn[p + 1]))
        gone = sorted(set(range(old.zeta.size)) - set(rows), key=lambda i: old.zeta[i])
        born = sorted(set(range(new.zeta.size)) - set(cols), key=lambda j: new.zeta[j])
        inner_gone = []
        for i in gone:
            if self._near_edge(old.zeta[i] + old.velocity[i] * dth) or self._near_edge(old.zeta[i]):
                step.exits.append(i)
            else:
                inner_gone.append(i)
        inner_born = []
        for j in born:
            if self._near_edge(new.zeta[j] - new.velocity[j] * dth) or self._near_edge(new.zeta[j]):
                step.entries.append(j)
            else:
                inner_born.append(j)
        pairs, left = _pairs(old.zeta, inner_gone)
        step.onsets = pairs
        step.leftovers += [(old, i) for i in left]
        pairs, left = _pairs(new.zeta, inner_born)
        step.offsets = pairs
        step.leftovers += [(new, j) for j in left]
        return step

    def advance(self, old: _Slice, new: _Slice, ids: list) -> list:
        """Carry track ids from ``old`` to ``new``, bisecting unclear steps."""
        step = self.classify(old, new)
        if not step.clean and new.theta - old.theta > EVENT_TOL:
            mid = self.slice(0.5 * (old.theta + new.theta))
            return self.advance(mid, new, self.advance(old, mid, ids))
        return self.apply(old, new, step, ids)

    def _pair_window(self, zeta, i1, i2):
        """Window around an adjacent root pair that stops short of other roots."""
        za, zb = sorted((zeta[i1], zeta[i2]))
        pad = max(zb - za, self.edge_pad)
        below = zeta[zeta < za]
        above = zeta[zeta > zb]
        lo = max(za - pad, self.lo, 0.5 * (za + below.max()) if below.size else -np.inf)
        hi = min(zb + pad, self.hi, 0.5 * (zb + above.min()) if above.size else np.inf)
        return lo, hi

    def _new_track(self, points):
        self.result.tracks.append(points)
        return len(self.result.tracks) - 1

    def apply(self, old, new, step: _Step, ids):
        res = self.result
        th0, th1 = old.theta, new.theta
        new_ids = [-1] * new.zeta.size
        for i, j in zip(step.rows, step.cols):
            new_ids[j] = ids[i]
            res.tracks[ids[i]].append((th1, float(new.zeta[j]), int(new.kappa[j])))
        for i1, i2, j1, j2 in step.crossings:
            zs = [old.zeta[i1], old.zeta[i2], new.zeta[j1], new.zeta[j2]]
            pad = max(max(zs) - min(zs), self.edge_pad)
            ts, zstar, br = _refine_crossing(self.profile, th0, th1, min(zs) - pad, max(zs) + pad)
            res.events.append(SweepEvent(EventKind.PASS_THROUGH, ts, zstar, br))
        for i1, i2 in step.onsets:
            wlo, whi = self._pair_window(old.zeta, i1, i2)
            ts, zstar, br = _refine_pair_event(self.profile, th0, th1, wlo, whi)
            res.events.append(SweepEvent(EventKind.HOPF_ONSET, ts, zstar, br))
            for i in (i1, i2):
                res.tracks[ids[i]].append((ts, zstar, 0))
        for j1, j2 in step.offsets:
            wlo, whi = self._pair_window(new.zeta, j1, j2)
            ts, zstar, br = _refine_pair_event(self.profile, th1, th0, wlo, whi)
            res.events.append(SweepEvent(EventKind.HOPF_OFFSET, ts, zstar, br))
            for j in (j1, j2):
                new_ids[j] = self._new_track([(ts, zstar, 0), (th1, float(new.zeta[j]), int(new.kappa[j]))])
        for sl, i in step.leftovers:
            zeta = float(sl.zeta[i])
            res.ambiguities.append((th0, th1, zeta))
            warnings.warn(f"TrackingAmbiguity near zeta={zeta:.6g} for theta in [{th0:.6g}, {th1:.6g}]",
                          TrackingAmbiguity, stacklevel=3)
        for j in range(new.zeta.size):
            if new_ids[j] < 0:
                new_ids[j] = self._new_track([(th1, float(new.zeta[j]), int(new.kappa[j]))])
        return new_ids


def sweep_theta(profile, theta_grid, interval, n_seed: int = 2001) -> SweepResult:
    """Track real characteristic values across a theta grid and detect events.

    Roots are matched between consecutive exponents by predicting each root
    forward with its velocity ``d zeta/d theta = -D2_theta / D2_zeta`` and
    solving the assignment problem on predicted distances.  A matched pair
    whose order flips is a PassThrough; an adjacent pair of unmatched roots
    that vanishes (appears) is a HopfOnset (HopfOffset).  Steps that cannot be
    explained this way are bisected down to the event tolerance before being
    reported as a tracking ambiguity.
    """
    thetas = np.asarray(theta_grid, dtype=float)
    if thetas.ndim != 1 or thetas.size < 2 or np.any(np.diff(thetas) <= 0):
        raise ValueError("theta_grid must be strictly increasing")
    if np.max(np.diff(thetas)) > 0.02 + 1e-12:
        raise ValueError("theta step must not exceed 0.02")
    sw = _Sweeper(profile, interval, n_seed)
    prev = sw.slice(float(thetas[0]))
    ids = [sw._new_track([(float(thetas[0]), float(z), int(k))]) for z, k in zip(prev.zeta, prev.kappa)]
    for th in thetas[1:]:
        cur = sw.slice(float(th))
        ids = sw.advance(prev, cur, ids)
        prev = cur
    sw.result.events.sort(key=lambda e: (e.theta_star, e.zeta_star))
    return sw.result


def _pairs(zeta, idx):
    """Group unmatched roots into pairs that are neighbours in ``zeta``."""
    pairs, left = [], []
    i = 0
    while i < len(idx):
        if i + 1 < len(idx) and _adjacent(zeta, idx[i], idx[i + 1]):
            pairs.append((idx[i], idx[i + 1]))
            i += 2
        else:
            left.append(idx[i])
            i += 1
    return pairs, left


def _adjacent(zeta, i, j):
    lo, hi = sorted((zeta[i], zeta[j]))
    return not np.any((zeta > lo) & (zeta < hi))


def _match(old: _Slice, new: _Slice, dth: float):
    if old.zeta.size == 0 or new.zeta.size == 0:
        return [], []
    guard = 5.0 * max(_spacing(old.zeta), _spacing(new.zeta))
    pred = old.zeta + np.clip(old.velocity * dth, -guard, guard)
    cost = np.abs(pred[:, None] - new.zeta[None, :])
    big = 1e6 * (1.0 + cost.max())
    cost_g = np.where(cost < guard, cost, big)
    rows, cols = linear_sum_assignment(cost_g)
    keep = cost_g[rows, cols] < big
    return [int(r) for r in rows[keep]], [int(c) for c in cols[keep]]


def _spacing(z):
    """Typical distance between neighbouring roots of one slice."""
    z = np.unique(z)
    if z.size < 2:
        return 1.0
    return float(np.median(np.diff(z)))
