"""Monodromy matrices of Hill's equation and of the linearised wave equation.

Hill's equation about a wave U with speed c reads

    q'' + (v + V''(U(z)) / (c^2 - 1)) q = 0,    v = zeta^2 / (c^2 - 1)^2 - mu,

and the linearised travelling-wave equation is

    p'' - 2 i k p' + (-zeta^2/(c^2-1) - mu + V''(U)/(c^2-1)) p = 0,   k = c zeta/(c^2-1).

All batch functions accept arrays and return stacked 2x2 matrices.
"""

from __future__ import annotations

import enum
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _ode
from .errors import IntegrationFailure

CHUNK = 2048
WORKERS_ENV = "HILLEVANS_WORKERS"


def n_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def v_of(profile, zeta, mu=0.0):
    """Hill spectral parameter ``zeta^2/(c^2-1)^2 - mu``."""
    s = profile.c**2 - 1.0
    return np.asarray(zeta, dtype=complex) ** 2 / s**2 - mu


def phase_rate(profile) -> float:
    """``c T / (c^2 - 1)``: the zeta-coefficient of the exponential transform over a period."""
    return profile.c * profile.T / (profile.c**2 - 1.0)


def _run(profile, mode, vs=None, zetas=None, mu=0.0, rtol=_ode.RTOL, atol=_ode.ATOL):
    arr = vs if vs is not None else zetas
    arr = np.asarray(arr, dtype=complex)
    shape = arr.shape
    flat = arr.ravel()
    chunks = [flat[i:i + CHUNK] for i in range(0, flat.size, CHUNK)] or [flat]

    def work(chunk):
        kw = {"vs": chunk} if vs is not None else {"zetas": chunk}
        return _ode.run(profile.potential, mode, profile.u0, profile.du0, profile.c,
                        profile.T, mu=mu, rtol=rtol, atol=atol, **kw)

    workers = n_workers()
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(ch) for ch in chunks]
    out = np.concatenate([r[0] for r in results]) if results else np.empty((0, 6), complex)
    status = np.concatenate([r[1] for r in results]) if results else np.empty(0, int)
    if np.any(status < 0):
        bad = flat[np.argmax(status < 0)]
        raise IntegrationFailure(f"monodromy integration failed at parameter {bad}")
    return out, shape


def _matrices(out, cols, shape):
    a, b, c, d = (out[:, i] for i in cols)
    m = np.empty((out.shape[0], 2, 2), dtype=complex)
    m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1] = a, c, b, d
    return m.reshape(shape + (2, 2))


def hill_monodromies(profile, v, *, rtol=_ode.RTOL, atol=_ode.ATOL):
    """ℍ(T; v) for every entry of ``v``; columns are (q1, q1') and (q2, q2')."""
    out, shape = _run(profile, _ode.HILL, vs=v, rtol=rtol, atol=atol)
    return _matrices(out, (2, 3, 4, 5), shape)


def hill_monodromies_variational(profile, v, *, rtol=_ode.RTOL, atol=_ode.ATOL):
    """ℍ(T; v) together with ∂ℍ/∂v from the variational system y'' + (v+W) y = -q."""
    out, shape = _run(profile, _ode.VARIATIONAL, vs=v, rtol=rtol, atol=atol)
    return _matrices(out, (2, 3, 4, 5), shape), _matrices(out, (6, 7, 8, 9), shape)


def hill_trace(profile, v, **kw):
    m = hill_monodromies(profile, v, **kw)
    return m[..., 0, 0] + m[..., 1, 1]


def linearised_monodromies(profile, zeta, mu=0.0, *, rtol=_ode.RTOL, atol=_ode.ATOL):
    """𝔽(T; zeta, mu) by direct integration of the linearised equation."""
    out, shape = _run(profile, _ode.LINEARISED, zetas=zeta, mu=mu, rtol=rtol, atol=atol)
    return _matrices(out, (2, 3, 4, 5), shape)


def linearised_from_hill(profile, zeta, H):
    """Rebuild 𝔽(T; zeta) from ℍ(T; zeta) via p = exp(i k z) q and the basis change."""
    k = profile.c * np.asarray(zeta, dtype=complex) / (profile.c**2 - 1.0)
    S = np.zeros(np.shape(k) + (2, 2), dtype=complex)
    S_inv = np.zeros_like(S)
    S[..., 0, 0] = S[..., 1, 1] = 1.0
    S_inv[..., 0, 0] = S_inv[..., 1, 1] = 1.0
    S[..., 1, 0] = 1j * k
    S_inv[..., 1, 0] = -1j * k
    phase = np.exp(1j * k * profile.T)[..., None, None]
    return phase * (S @ H @ S_inv)


class Kind(enum.Enum):
    HILL = "hill"
    LINEARISED = "linearised"


@dataclass(frozen=True, eq=False)
class MonodromyMatrix:
    entries: np.ndarray
    kind: Kind
    zeta: complex
    mu: float
    T: float
    c: float

    @property
    def trace(self) -> complex:
        return complex(self.entries[0, 0] + self.entries[1, 1])

    @property
    def det(self) -> complex:
        m = self.entries
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    def expected_det(self) -> complex:
        if self.kind is Kind.HILL:
            return 1.0 + 0j
        s = self.c**2 - 1.0
        return complex(np.exp(2j * self.c * self.T * self.zeta / s))

    def det_error(self) -> float:
        """Absolute deviation from Abel's identity, relative to |expected| for 𝔽."""
        expected = self.expected_det()
        return abs(self.det - expected) / abs(expected)

    def det_defect(self) -> float:
        """Deviation from Abel's identity scaled by the size of ad and bc."""
        return float(abel_defect(self.entries, self.expected_det()))

    def to_json(self) -> str:
        m = self.entries
        keys = {"a": m[0, 0], "b": m[0, 1], "c": m[1, 0], "d": m[1, 1]}
        return json.dumps({k: [float(z.real), float(z.imag)] for k, z in keys.items()})


def abel_defect(entries, expected):
    """``|det M - expected|`` relative to ``max(|expected|, |ad| + |bc|)``.

    Forming ad - bc in floating point loses about eps (|ad| + |bc|), so this is
    the scale on which a determinant identity can be checked once the
    monodromy entries grow large.
    """
    m = np.asarray(entries)
    ad = m[..., 0, 0] * m[..., 1, 1]
    bc = m[..., 0, 1] * m[..., 1, 0]
    scale = np.maximum(np.abs(expected), np.abs(ad) + np.abs(bc))
    return np.abs(ad - bc - expected) / scale


def _zeta_from_v(profile, v, mu):
    s = profile.c**2 - 1.0
    return complex(np.sqrt(complex((v + mu) * s * s)))


def integrate_hill(profile, v: complex) -> MonodromyMatrix:
    m = hill_monodromies(profile, np.array([v]))[0]
    return MonodromyMatrix(m, Kind.HILL, _zeta_from_v(profile, v, 0.0), 0.0, profile.T, profile.c)


def integrate_hill_variational(profile, v: complex):
    m, dm = hill_monodromies_variational(profile, np.array([v]))
    mono = MonodromyMatrix(m[0], Kind.HILL, _zeta_from_v(profile, v, 0.0), 0.0, profile.T,
                           profile.c)
    return mono, dm[0]


def integrate_linearised(profile, zeta: complex, mu: float = 0.0) -> MonodromyMatrix:
    m = linearised_monodromies(profile, np.array([zeta]), mu)[0]
    return MonodromyMatrix(m, Kind.LINEARISED, complex(zeta), float(mu), profile.T, profile.c)


def floquet_multipliers(M) -> tuple[complex, complex]:
    """Eigenvalues ordered by modulus, ties broken by argument in [0, 2pi)."""
    m = M.entries if isinstance(M, MonodromyMatrix) else np.asarray(M)
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = np.sqrt(complex(tr * tr - 4 * det))
    # avoid cancellation: take the larger-magnitude root first
    r1 = (tr + disc) / 2 if abs(tr + disc) >= abs(tr - disc) else (tr - disc) / 2
    r2 = det / r1 if r1 != 0 else (tr - r1)
    roots = [complex(r1), complex(r2)]

    def key(z):
        return (round(abs(z), 12), float(np.angle(z)) % (2 * np.pi))

    roots.sort(key=key)
    return roots[0], roots[1]
