"""Evans functions built from Hill's monodromy, and Krein signatures.

With ``a = c T / (c^2 - 1)``::

    D2(zeta; theta)   = tr ℍ(T; zeta) - 2 cos(a zeta + theta)
    D1(zeta; theta)   = det(𝔽(T; zeta) - exp(-i theta) I)
    D3(zeta; theta)   = det(ℍ(T; zeta) - exp(-i a zeta - i theta) I)
    D_Hill(zeta)      = tr ℍ(T; zeta) - 2

The Krein signature of a simple real characteristic value is the sign of the
eigenvalue-branch derivative

    mu'(zeta0) = 2 zeta0/(c^2-1)^2
                 + 4 c zeta0 T/(c^2-1)^3 * sin(a zeta0 + theta) / D_Hill'(zeta0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonSimple, NotACharacteristicValue, ZeroCharacteristicValue
from .hill import (
    hill_monodromies,
    hill_monodromies_variational,
    linearised_monodromies,
    phase_rate,
    v_of,
)

TWO_PI = 2.0 * math.pi
GUARD_TOL = 1e-6
ROOT_TOL = 1e-8


def wrap_angle(theta):
    """Reduce angles into [0, 2pi); the one place this reduction happens."""
    t = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    t = np.where(t >= TWO_PI, 0.0, t)
    t = t + 0.0  # turn -0.0 into 0.0
    return float(t) if t.ndim == 0 else t


def principal_arccos(x):
    """Principal complex arccos, real part in [0, pi]."""
    return np.arccos(np.asarray(x, dtype=complex))


@dataclass(frozen=True, eq=False)
class EvansContext:
    profile: object
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def a(self) -> float:
        return phase_rate(self.profile)


def _trace(profile, zeta):
    m = hill_monodromies(profile, v_of(profile, zeta))
    return m[..., 0, 0] + m[..., 1, 1]


def _scalar(x, like):
    return complex(x) if np.ndim(like) == 0 else x


def evans_d2(ctx: EvansContext, zeta):
    tr = _trace(ctx.profile, zeta)
    z = np.asarray(zeta, dtype=complex)
    return _scalar(tr - 2.0 * np.cos(ctx.a * z + ctx.theta), zeta)


def d2_from_trace(profile, zeta, theta, trace):
    return trace - 2.0 * np.cos(phase_rate(profile) * np.asarray(zeta, dtype=complex) + theta)


def shifted_det(M, lam, det):
    """``det(M - lam I)`` as ``det - lam tr M + lam^2`` for a known ``det M``.

    Forming the determinant from the entries loses about eps |M|^2 to
    cancellation, which swamps the result once the monodromy grows; the
    characteristic polynomial with the exact Abel determinant does not.
    """
    tr = M[..., 0, 0] + M[..., 1, 1]
    return det - lam * tr + lam * lam


def evans_d1(ctx: EvansContext, zeta):
    """``det(F(T; zeta) - exp(-i theta) I)`` with ``det F = exp(2 i a zeta)``."""
    z = np.asarray(zeta, dtype=complex)
    F = linearised_monodromies(ctx.profile, z)
    val = shifted_det(F, np.exp(-1j * ctx.theta), np.exp(2j * ctx.a * z))
    return _scalar(val, zeta)


def evans_d3(ctx: EvansContext, zeta):
    """``det(H(T; zeta) - exp(-i a zeta - i theta) I)`` with ``det H = 1``."""
    z = np.asarray(zeta, dtype=complex)
    H = hill_monodromies(ctx.profile, v_of(ctx.profile, z))
    val = shifted_det(H, np.exp(-1j * ctx.a * z - 1j * ctx.theta), 1.0)
    return _scalar(val, zeta)


def evans_hill(profile, zeta):
    return _scalar(_trace(profile, zeta) - 2.0, zeta)


def hill_trace_and_derivative(profile, zeta):
    """``tr ℍ`` and ``D_Hill'(zeta) = 2 zeta/(c^2-1)^2 * tr ∂ℍ/∂v`` from the variational system."""
    z = np.asarray(zeta, dtype=complex)
    H, dH = hill_monodromies_variational(profile, v_of(profile, z))
    s = profile.c**2 - 1.0
    tr = H[..., 0, 0] + H[..., 1, 1]
    dtr_dv = dH[..., 0, 0] + dH[..., 1, 1]
    return tr, 2.0 * z / s**2 * dtr_dv, dtr_dv


@dataclass(frozen=True)
class KreinResult:
    zeta0: float
    mu_prime: float
    kappa: int
    trace: float  # tr ℍ(T; zeta0); simple values need |trace| < 2 - GUARD_TOL
    d_hill: float  # D_Hill'(zeta0)
    residual: float  # |D2(zeta0; theta)|


def krein_batch(profile, zeta0, theta):
    """Vectorised ``mu'`` for real ``zeta0`` / ``theta`` arrays, without raising.

    Returns ``(mu_prime, trace, d_hill, residual)``; ``mu_prime`` is NaN where
    zeta0 == 0 or where D_Hill' vanishes exactly.
    """
    z = np.asarray(zeta0, dtype=float)
    th = np.broadcast_to(np.asarray(theta, dtype=float), z.shape)
    tr, dhill, _ = hill_trace_and_derivative(profile, z)
    tr, dhill = tr.real, dhill.real
    s = profile.c**2 - 1.0
    a = phase_rate(profile)
    phase = a * z + th
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = 2.0 * z / s**2 + 4.0 * profile.c * z * profile.T / s**3 * np.sin(phase) / dhill
    mu = np.where((z == 0.0) | (dhill == 0.0), np.nan, mu)
    residual = np.abs(tr - 2.0 * np.cos(phase))
    return mu, tr, dhill, residual


def _check(zeta0, trace, residual, guard_tol, root_tol):
    if zeta0 == 0.0:
        raise ZeroCharacteristicValue("zeta0 = 0 is never a simple characteristic value")
    if residual >= root_tol:
        raise NotACharacteristicValue(f"|D2({zeta0})| = {residual:.3g} exceeds {root_tol:g}")
    if abs(trace) >= 2.0 - guard_tol:
        raise NonSimple(f"|tr ℍ| = {abs(trace):.12g} at zeta0={zeta0}: D_Hill' vanishes there")


def mu_prime(ctx: EvansContext, zeta0: float, *, guard_tol=GUARD_TOL, root_tol=ROOT_TOL) -> float:
    return krein_signature(ctx, zeta0, guard_tol=guard_tol, root_tol=root_tol).mu_prime


def krein_signature(ctx: EvansContext, zeta0: float, *, guard_tol=GUARD_TOL,
                    root_tol=ROOT_TOL) -> KreinResult:
    zeta0 = float(zeta0)
    if zeta0 == 0.0:
        raise ZeroCharacteristicValue("zeta0 = 0 is never a simple characteristic value")
    mu, tr, dhill, res = krein_batch(ctx.profile, np.array([zeta0]), ctx.theta)
    _check(zeta0, tr[0], res[0], guard_tol, root_tol)
    m = float(mu[0])
    return KreinResult(zeta0, m, int(np.sign(m)), float(tr[0]), float(dhill[0]), float(res[0]))
