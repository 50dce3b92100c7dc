"""Per-trajectory Dormand-Prince 8(5,3) kernels, compiled with numba.

Every column of a batch is integrated with its own step-size sequence, so a
result depends only on its own inputs and never on what else is in the batch.
The background wave is carried along in the first two state slots and re-derived
from its own ODE, which keeps stored profile samples out of the monodromy.
"""

from __future__ import annotations

import threading

import numba
import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _dop

RTOL = 1e-10
ATOL = 1e-12
MAX_STEPS = 500_000

HILL = 0
VARIATIONAL = 1
LINEARISED = 2
_SIZES = {HILL: 6, VARIATIONAL: 10, LINEARISED: 6}

# Dormand-Prince 8(5,3) tableau as published with scipy
_NS = _dop.N_STAGES
_A = np.ascontiguousarray(_dop.A[:_NS, :_NS])
_B = np.ascontiguousarray(_dop.B)
_E3 = np.ascontiguousarray(_dop.E3)
_E5 = np.ascontiguousarray(_dop.E5)

_kernel_cache: dict = {}
_kernel_lock = threading.Lock()


def _build(dV, d2V):
    dV = numba.njit(dV) if not isinstance(dV, numba.core.registry.CPUDispatcher) else dV
    d2V = numba.njit(d2V) if not isinstance(d2V, numba.core.registry.CPUDispatcher) else d2V

    @numba.njit(nogil=True)
    def rhs(mode, y, dy, inv_s, v, zeta, mu, kk):
        u = y[0].real
        w = d2V(u) * inv_s
        dy[0] = y[1]
        dy[1] = -dV(u) * inv_s
        if mode == 2:
            # p'' = 2 i k p' + (zeta^2/(c^2-1) + mu - W) p,  k = c zeta/(c^2-1)
            coef = zeta * zeta * inv_s + mu - w
            dy[2] = y[3]
            dy[3] = 2j * kk * y[3] + coef * y[2]
            dy[4] = y[5]
            dy[5] = 2j * kk * y[5] + coef * y[4]
        else:
            coef = v + w
            dy[2] = y[3]
            dy[3] = -coef * y[2]
            dy[4] = y[5]
            dy[5] = -coef * y[4]
            if mode == 1:
                dy[6] = y[7]
                dy[7] = -coef * y[6] - y[2]
                dy[8] = y[9]
                dy[9] = -coef * y[8] - y[4]

    @numba.njit(nogil=True)
    def solve_one(mode, n, y, inv_s, v, zeta, mu, kk, t_end, rtol, atol, max_steps):
        K = np.empty((_NS + 1, n), np.complex128)
        yt = np.empty(n, np.complex128)
        yn = np.empty(n, np.complex128)
        rhs(mode, y, K[0], inv_s, v, zeta, mu, kk)
        # initial step: standard order-based estimate
        d0 = 0.0
        d1 = 0.0
        for i in range(n):
            sc = atol + rtol * abs(y[i])
            d0 = max(d0, abs(y[i]) / sc)
            d1 = max(d1, abs(K[0, i]) / sc)
        if d0 < 1e-5 or d1 < 1e-5:
            h = 1e-6
        else:
            h = 0.01 * d0 / d1
        h = min(h, t_end)
        t = 0.0
        steps = 0
        while t_end - t > 1e-14 * t_end:
            if steps >= max_steps:
                return -1
            steps += 1
            if h >= t_end - t:
                h = t_end - t
            for s in range(1, _NS):
                for i in range(n):
                    acc = 0j
                    for j in range(s):
                        acc += _A[s, j] * K[j, i]
                    yt[i] = y[i] + h * acc
                rhs(mode, yt, K[s], inv_s, v, zeta, mu, kk)
            for i in range(n):
                acc = 0j
                for j in range(_NS):
                    acc += _B[j] * K[j, i]
                yn[i] = y[i] + h * acc
            rhs(mode, yn, K[_NS], inv_s, v, zeta, mu, kk)
            e5 = 0.0
            e3 = 0.0
            for i in range(n):
                a5 = 0j
                a3 = 0j
                for j in range(_NS + 1):
                    a5 += _E5[j] * K[j, i]
                    a3 += _E3[j] * K[j, i]
                sc = atol + rtol * max(abs(y[i]), abs(yn[i]))
                e5 = max(e5, abs(h * a5) / sc)
                e3 = max(e3, abs(h * a3) / sc)
            # blended 5th/3rd order estimate, as in Hairer's DOP853
            den = e5 * e5 + 0.01 * e3 * e3
            err = e5 * e5 / np.sqrt(den) if den > 0.0 else 0.0
            if not np.isfinite(err):
                return -2
            if err <= 1.0:
                t += h
                for i in range(n):
                    y[i] = yn[i]
                    K[0, i] = K[_NS, i]
                if err == 0.0:
                    fac = 10.0
                else:
                    fac = min(10.0, 0.9 * err ** -0.125)
            else:
                fac = max(0.2, 0.9 * err ** -0.125)
            h *= fac
            if h < 1e-14 * max(1.0, t):
                return -3
        return steps

    @numba.njit(nogil=True)
    def batch(mode, u0, du0, inv_s, c, t_end, vs, zetas, mu, rtol, atol, max_steps, out, status):
        n = 10 if mode == 1 else 6
        y = np.empty(n, np.complex128)
        for j in range(vs.shape[0]):
            y[:] = 0.0
            y[0] = u0
            y[1] = du0
            y[2] = 1.0
            y[5] = 1.0
            zeta = zetas[j]
            kk = c * zeta * inv_s
            status[j] = solve_one(mode, n, y, inv_s, vs[j], zeta, mu, kk,
                                  t_end, rtol, atol, max_steps)
            for i in range(n):
                out[j, i] = y[i]

    return batch


def kernel_for(potential):
    """Compiled batch kernel for a potential, built once and memoised."""
    key = id(potential)
    with _kernel_lock:
        entry = _kernel_cache.get(key)
        if entry is None or entry[0] is not potential:
            entry = (potential, _build(potential.dV, potential.d2V))
            _kernel_cache[key] = entry
        return entry[1]


def run(potential, mode, u0, du0, c, t_end, vs=None, zetas=None, mu=0.0,
        rtol=RTOL, atol=ATOL, max_steps=MAX_STEPS):
    """Integrate a batch and return the raw final states, shape ``(N, n)``.

    ``status`` entries are the accepted step counts, negative on failure.
    """
    if vs is None and zetas is None:
        raise ValueError("need vs or zetas")
    if vs is None:
        vs = np.zeros_like(np.asarray(zetas, dtype=complex))
    if zetas is None:
        zetas = np.zeros_like(np.asarray(vs, dtype=complex))
    vs = np.ascontiguousarray(np.asarray(vs, dtype=complex).ravel())
    zetas = np.ascontiguousarray(np.asarray(zetas, dtype=complex).ravel())
    n = _SIZES[mode]
    out = np.empty((vs.shape[0], n), np.complex128)
    status = np.empty(vs.shape[0], np.int64)
    s = c * c - 1.0
    kernel = kernel_for(potential)
    kernel(mode, float(u0), float(du0), 1.0 / s, float(c), float(t_end), vs, zetas,
           complex(mu), rtol, atol, max_steps, out, status)
    return out, status
