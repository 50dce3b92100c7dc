"""Closed-form reference values used by the self-test and the test suite.

Each oracle is computed independently of the shooting machinery: periods
from complete elliptic integrals, Hill traces on constant backgrounds from
the harmonic solution.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ellipk

from .evans import EvansContext, evans_d1, evans_d2
from .hill import hill_monodromies_variational, hill_trace, phase_rate, v_of
from .waves import equilibrium_profile, sine_gordon


def sine_gordon_period(E: float, c: float) -> float:
    """Period of the sine-Gordon wavetrain with energy E and speed c.

    With V = 1 - cos u the pendulum reduction gives complete elliptic
    integrals of the first kind (parameter convention m = k^2).
    """
    s = c * c - 1.0
    if s < 0:
        if E < 0:
            return 4.0 * math.sqrt(-s) / math.sqrt(-2.0 * E) * ellipk(2.0 / E)
        if E < 2:
            return 4.0 * math.sqrt(-s) * ellipk((2.0 - E) / 2.0)
    else:
        if E > 2:
            return 4.0 * math.sqrt(s) / math.sqrt(2.0 * E) * ellipk(2.0 / E)
        if E > 0:
            return 4.0 * math.sqrt(s) * ellipk(E / 2.0)
    raise ValueError("no periodic orbit for these parameters")


def harmonic_period(c: float) -> float:
    """Small-amplitude limit of the subluminal librational period."""
    return 2.0 * math.pi * math.sqrt(1.0 - c * c)


def constant_hill(v, T: float, c: float):
    """Trace of ℍ and its v-derivative on the background U = 0 of sine-Gordon.

    There V''(0) = 1 so q'' + omega^2 q = 0 with omega^2 = v + 1/(c^2 - 1).
    """
    omega = np.sqrt(np.asarray(v, dtype=complex) + 1.0 / (c * c - 1.0))
    tr = 2.0 * np.cos(omega * T)
    dtr = -T * np.sin(omega * T) / omega
    return tr, dtr


def check_constant_hill(n: int = 50, seed: int = 0, tol: float = 1e-7):
    """Largest deviation of the shooting traces from the closed forms.

    Deviations are measured against ``max(1, |reference|)`` because traces grow
    exponentially once omega leaves the real axis.
    """
    rng = np.random.default_rng(seed)
    sg = sine_gordon()
    worst = 0.0
    for _ in range(n):
        T = rng.uniform(0.5, 8.0)
        c = rng.choice([rng.uniform(0.2, 0.9), rng.uniform(1.1, 2.5)])
        v = complex(rng.uniform(-3, 3), rng.uniform(-1, 1))
        prof = equilibrium_profile(sg, c, 0.0, T)
        H, dH = hill_monodromies_variational(prof, np.array([v]))
        tr = H[0, 0, 0] + H[0, 1, 1]
        dtr = dH[0, 0, 0] + dH[0, 1, 1]
        tr_ref, dtr_ref = constant_hill(v, T, c)
        worst = max(worst, abs(tr - tr_ref) / max(1.0, abs(tr_ref)),
                    abs(dtr - dtr_ref) / max(1.0, abs(dtr_ref)))
    return worst, worst < tol


def check_evans_relation(profile, n: int = 20, seed: int = 0, tol: float = 1e-7):
    """Largest scaled violation of D1 = -exp(i a zeta - i theta) D2."""
    rng = np.random.default_rng(seed)
    a = phase_rate(profile)
    worst = 0.0
    for _ in range(n):
        zeta = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        if abs(zeta) > 3:
            zeta *= 3 / abs(zeta)
        theta = rng.uniform(0, 2 * math.pi)
        ctx = EvansContext(profile, theta)
        d1 = evans_d1(ctx, zeta)
        d2 = evans_d2(ctx, zeta)
        err = abs(d1 + np.exp(1j * a * zeta - 1j * ctx.theta) * d2) / (1 + abs(d1))
        worst = max(worst, err)
    return worst, worst < tol


def finite_difference_mu_prime(profile, zeta0, theta, h: float = 1e-5, iters: int = 30):
    """Eigenvalue-branch slope by shifting mu and re-solving for the root.

    For each real characteristic value zeta0 of D2(.; theta), solve
    ``tr ℍ(v(zeta) - mu) = 2 cos(a zeta + theta)`` for mu = +h and -h by
    batched secant iteration started at zeta0, and return
    ``2 h / (zeta(+h) - zeta(-h))``.  Entries that fail to converge are NaN.
    """
    z0 = np.asarray(zeta0, dtype=float)
    th = np.broadcast_to(np.asarray(theta, dtype=float), z0.shape)
    a = phase_rate(profile)
    roots = []
    for mu in (h, -h):
        def f(z):
            tr = hill_trace(profile, v_of(profile, z, mu)).real
            return tr - 2.0 * np.cos(a * z + th)

        x0 = z0.copy()
        x1 = z0 + 1e-7 * np.maximum(1.0, np.abs(z0))
        f0, f1 = f(x0), f(x1)
        for _ in range(iters):
            denom = f1 - f0
            with np.errstate(divide="ignore", invalid="ignore"):
                x2 = np.where(denom != 0, x1 - f1 * (x1 - x0) / denom, x1)
            if np.all(np.abs(x2 - x1) <= 1e-15 * np.maximum(1.0, np.abs(x1))):
                x1 = x2
                break
            x0, f0 = x1, f1
            x1, f1 = x2, f(x2)
        ok = np.abs(f(x1)) < 1e-9
        roots.append(np.where(ok, x1, np.nan))
    return 2.0 * h / (roots[0] - roots[1])
