"""Periodic travelling-wave profiles of (c^2 - 1) U'' + V'(U) = 0.

The first integral is ``0.5 (c^2 - 1) U'^2 + V(U) = E``.  A branch names which
orbit of the phase plane at that energy is meant; wells are located from the
critical points of the effective potential ``sign(c^2 - 1) V``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .errors import IntegrationFailure, NoOrbit, RotationalUnavailable, SeparatrixDivergence

SEPARATRIX_TOL = 1e-10
PERIOD_TOL = 1e-13
QUAD_ACCEPT = 1e-10


@dataclass(frozen=True, eq=False)
class Potential:
    """A C^2 potential with its first two derivatives.

    The callables must accept both floats and numpy arrays.  ``search_range``
    bounds the critical-point search for non-periodic potentials.
    """

    V: Callable
    dV: Callable
    d2V: Callable
    periodic: bool = False
    u_period: float | None = None
    name: str = "custom"
    search_range: float = 10.0

    def __post_init__(self):
        if self.periodic and not (self.u_period and self.u_period > 0):
            raise ValueError("periodic potential needs a positive u_period")

    def critical_points(self) -> np.ndarray:
        """Zeros of V' in one period (periodic) or in ``[-search_range, search_range]``."""
        if self.periodic:
            off = 0.0123456789 * self.u_period
            lo, hi = -off, self.u_period - off
            n = 4001
        else:
            lo, hi = -self.search_range - 0.0123456789, self.search_range
            n = 8001
        grid = np.linspace(lo, hi, n)
        d = np.asarray(self.dV(grid), dtype=float)
        roots = []
        for i in range(n - 1):
            if d[i] == 0.0:
                roots.append(grid[i])
            elif d[i] * d[i + 1] < 0:
                roots.append(brentq(self.dV, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15))
        return np.array(roots)


def _sg_V(u):
    return 1.0 - np.cos(u)


def _sg_dV(u):
    return np.sin(u)


def _sg_d2V(u):
    return np.cos(u)


def _phi4_V(u):
    return 0.25 * u**4 - 0.5 * u**2


def _phi4_dV(u):
    return u**3 - u


def _phi4_d2V(u):
    return 3.0 * u**2 - 1.0


def sine_gordon() -> Potential:
    return SINE_GORDON


def phi4() -> Potential:
    return PHI4


SINE_GORDON = Potential(_sg_V, _sg_dV, _sg_d2V, periodic=True, u_period=2 * math.pi,
                        name="sine-gordon")
PHI4 = Potential(_phi4_V, _phi4_dV, _phi4_d2V, periodic=False, name="phi4")

_EXPR_NAMES = {name: getattr(np, name) for name in
               ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "arctan", "pi")}


def potential_from_expressions(V: str, dV: str, d2V: str, periodic: bool = False,
                               u_period: float | None = None) -> Potential:
    """Build a potential from three numpy expressions in the variable ``u``."""
    funcs = []
    for expr in (V, dV, d2V):
        src = f"def f(u):\n    return 0.0 * u + ({expr})\n"
        scope = dict(_EXPR_NAMES)
        try:
            exec(compile(src, "<potential>", "exec"), scope)
        except SyntaxError as exc:
            raise ValueError(f"bad potential expression {expr!r}: {exc}") from None
        funcs.append(scope["f"])
    try:
        for f in funcs:
            float(f(0.3))
    except Exception as exc:
        raise ValueError(f"potential expression does not evaluate: {exc}") from None
    return Potential(funcs[0], funcs[1], funcs[2], periodic=periodic, u_period=u_period,
                     name="expression")


class Branch(enum.Enum):
    LEFT_WELL = "left"
    RIGHT_WELL = "right"
    ROTATIONAL_PLUS = "rot+"
    ROTATIONAL_MINUS = "rot-"
    OUTER_ORBIT = "outer"

    @property
    def rotational(self) -> bool:
        return self in (Branch.ROTATIONAL_PLUS, Branch.ROTATIONAL_MINUS)


class Regime(enum.Enum):
    SUBLUMINAL_LIBRATIONAL = "subluminal-librational"
    SUBLUMINAL_ROTATIONAL = "subluminal-rotational"
    SUPERLUMINAL_LIBRATIONAL = "superluminal-librational"
    SUPERLUMINAL_ROTATIONAL = "superluminal-rotational"


@dataclass(frozen=True)
class WaveParameters:
    E: float
    c: float
    potential: Potential
    branch: Branch

    def __post_init__(self):
        if not (math.isfinite(self.E) and math.isfinite(self.c)):
            raise ValueError("E and c must be finite")
        if abs(self.c * self.c - 1.0) < 1e-14:
            raise ValueError("wave speed must satisfy c^2 != 1")
        if not isinstance(self.branch, Branch):
            object.__setattr__(self, "branch", Branch(self.branch))

    @property
    def s(self) -> float:
        """c^2 - 1."""
        return self.c * self.c - 1.0

    @property
    def sign(self) -> float:
        return 1.0 if self.s > 0 else -1.0

    def admissible(self, u):
        """``sign(c^2-1) (E - V(u))``; positive where the orbit can live."""
        return self.sign * (self.E - self.potential.V(u))


def _centres_and_saddles(params: WaveParameters):
    pot = params.potential
    crit = pot.critical_points()
    curv = params.sign * np.asarray(pot.d2V(crit), dtype=float) if crit.size else crit
    return np.sort(crit[curv > 0]), np.sort(crit[curv < 0])


def _check_separatrix(params: WaveParameters) -> None:
    _, saddles = _centres_and_saddles(params)
    for u in saddles:
        if abs(params.E - float(params.potential.V(u))) < SEPARATRIX_TOL:
            raise SeparatrixDivergence(
                f"E={params.E} lies on the separatrix through u={u:.6g}")


def _march(params: WaveParameters, start: float, direction: float, limit: float):
    """First zero of the admissibility function walking away from ``start``."""
    f = params.admissible
    step = limit / 4000.0
    a = start
    while abs(a - start) < limit:
        b = a + direction * step
        fb = f(b)
        if fb <= 0.0:
            if fb == 0.0:
                return b
            lo, hi = (a, b) if a < b else (b, a)
            return brentq(f, lo, hi, xtol=1e-15, rtol=1e-15)
        a = b
    return None


def _well_component(params: WaveParameters, centre: float):
    if params.admissible(centre) <= 0.0:
        return None
    pot = params.potential
    limit = pot.u_period if pot.periodic else pot.search_range + abs(centre)
    lo = _march(params, centre, -1.0, limit)
    hi = _march(params, centre, +1.0, limit)
    if lo is None or hi is None:
        return None
    return lo, hi


def classify_regime(params: WaveParameters) -> Regime:
    """Regime tag from the sign of c^2 - 1 and the branch's admissibility."""
    sub = params.s < 0
    if params.branch.rotational:
        _require_rotational(params)
        return Regime.SUBLUMINAL_ROTATIONAL if sub else Regime.SUPERLUMINAL_ROTATIONAL
    return Regime.SUBLUMINAL_LIBRATIONAL if sub else Regime.SUPERLUMINAL_LIBRATIONAL


def _require_rotational(params: WaveParameters) -> None:
    pot = params.potential
    if not pot.periodic:
        raise RotationalUnavailable(f"potential {pot.name!r} is not periodic")
    grid = np.linspace(0.0, pot.u_period, 4001)
    crit = pot.critical_points()
    pts = np.concatenate([grid, crit]) if crit.size else grid
    if np.min(params.admissible(pts)) <= 0.0:
        raise RotationalUnavailable(
            f"U' vanishes on the orbit at E={params.E}, c={params.c}; no rotational wave")


def turning_points(params: WaveParameters) -> tuple[float, float]:
    """Turning points ``(u_min, u_max)`` bounding a librational orbit."""
    if params.branch.rotational:
        raise NoOrbit("rotational branches have no turning points")
    centres, _ = _centres_and_saddles(params)
    if centres.size == 0:
        raise NoOrbit("potential has no wells for this wave speed")
    comps = []
    for u_c in centres:
        comp = _well_component(params, u_c)
        if comp is not None:
            inside = int(np.sum((centres > comp[0]) & (centres < comp[1])))
            comps.append((u_c, comp, inside))
    branch = params.branch
    if branch is Branch.OUTER_ORBIT:
        for _, comp, inside in comps:
            if inside >= 2:
                return comp
        raise NoOrbit(f"no orbit enclosing several wells at E={params.E}")
    target = centres[0] if branch is Branch.LEFT_WELL else centres[-1]
    for u_c, comp, inside in comps:
        if u_c == target and inside == 1:
            return comp
    raise NoOrbit(f"no {branch.value} well orbit at E={params.E}, c={params.c}")


def _quad(f, a, b):
    """Adaptive quadrature that accepts a result once its error estimate is small.

    QUADPACK flags roundoff long before the answer is unusable, so only an
    error estimate above QUAD_ACCEPT (relative) counts as divergence.
    """
    out = quad(f, a, b, epsabs=0.0, epsrel=PERIOD_TOL, limit=500, full_output=1)
    val, err = out[0], out[1]
    if len(out) > 3 and not err <= QUAD_ACCEPT * abs(val):
        msg = str(out[3]).strip().splitlines()[0]
        raise SeparatrixDivergence(f"period quadrature did not converge: {msg}")
    return val


def compute_period(params: WaveParameters) -> float:
    """Fundamental period in z of the selected orbit."""
    _check_separatrix(params)
    classify_regime(params)
    E, s, V = params.E, params.s, params.potential.V
    if params.branch.rotational:
        def speed_inv(u):
            return 1.0 / math.sqrt(2.0 * (E - V(u)) / s)

        T = _quad(speed_inv, 0.0, params.potential.u_period)
    else:
        dV = params.potential.dV
        u_lo, u_hi = turning_points(params)
        u_hi = _matched_turning_point(dV, u_lo, u_hi)
        width = u_hi - u_lo

        # u = u_lo + width sin^2(t) removes both inverse-sqrt endpoint singularities;
        # the energy gap is measured from the nearer turning point
        def integrand(t):
            st, ct = math.sin(t), math.cos(t)
            if st < ct:
                g = 2.0 * _energy_gap(dV, u_lo, width * st * st) / s
            else:
                g = 2.0 * _energy_gap(dV, u_hi, -width * ct * ct) / s
            if g <= 0.0:
                g = _endpoint_limit(params, u_lo, u_hi, st, ct)
                return 2.0 * width * st * ct / math.sqrt(g) if g > 0 else 0.0
            return 2.0 * width * st * ct / math.sqrt(g)

        T = 2.0 * _quad(integrand, 0.0, math.pi / 2)
    if not (T > 0 and math.isfinite(T)):
        raise SeparatrixDivergence("period is not finite")
    return T


_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def _energy_gap(dV, u_lo, d):
    """``E - V(u_lo + d)`` on a librational orbit, as minus the integral of V'.

    Subtracting V(u) from E directly loses all relative accuracy for small
    amplitudes; the integral form keeps it.  A negative ``d`` measures back
    from the upper turning point passed as ``u_lo``.
    """
    half = 0.5 * d
    x = u_lo + half * (_GL_X + 1.0)
    return -half * float(np.dot(_GL_W, dV(x)))


def _matched_turning_point(dV, u_lo, u_hi):
    """Upper turning point consistent with the integral form of the energy gap."""
    width = u_hi - u_lo
    lo, hi = u_lo + 0.5 * width, u_hi + 0.01 * width
    g_lo, g_hi = _energy_gap(dV, u_lo, lo - u_lo), _energy_gap(dV, u_lo, hi - u_lo)
    if g_lo * g_hi < 0.0:
        return brentq(lambda u: _energy_gap(dV, u_lo, u - u_lo), lo, hi, xtol=1e-15, rtol=1e-15)
    return u_hi


def _endpoint_limit(params, u_lo, u_hi, st, ct):
    # roundoff made E - V non-positive next to a turning point; use the linear term
    dV = params.potential.dV
    width = u_hi - u_lo
    if st < ct:
        return 2.0 * (-float(dV(u_lo))) * width * st * st / params.s
    return 2.0 * float(dV(u_hi)) * width * ct * ct / params.s


@dataclass(frozen=True, eq=False)
class WaveProfile:
    params: WaveParameters
    T: float
    u0: float
    du0: float
    regime: Regime
    samples: np.ndarray = field(repr=False)

    @property
    def c(self) -> float:
        return self.params.c

    @property
    def E(self) -> float:
        return self.params.E

    @property
    def potential(self) -> Potential:
        return self.params.potential

    @property
    def shift(self) -> float:
        """``U(T) - U(0)``: zero for librational waves, +-u_period for rotational."""
        b = self.params.branch
        if b is Branch.ROTATIONAL_PLUS:
            return self.potential.u_period
        if b is Branch.ROTATIONAL_MINUS:
            return -self.potential.u_period
        return 0.0

    def energy_residual(self) -> float:
        z, u, du = self.samples.T
        return float(np.max(np.abs(0.5 * self.params.s * du**2 + self.potential.V(u) - self.E)))


def wave_profile(params: WaveParameters, n_samples: int = 256) -> WaveProfile:
    """Integrate one period of the wave from its canonical initial point."""
    if n_samples < 16:
        raise ValueError("n_samples must be at least 16")
    T = compute_period(params)
    regime = classify_regime(params)
    s = params.s
    pot = params.potential
    if params.branch.rotational:
        u0 = 0.0
        du0 = math.sqrt(2.0 * (params.E - float(pot.V(u0))) / s)
        if params.branch is Branch.ROTATIONAL_MINUS:
            du0 = -du0
    else:
        u0, _ = turning_points(params)
        du0 = 0.0

    def rhs(z, y):
        return [y[1], -pot.dV(y[0]) / s]

    z = np.linspace(0.0, T, n_samples)
    sol = solve_ivp(rhs, (0.0, T), [u0, du0], method="DOP853", t_eval=z,
                    rtol=1e-13, atol=1e-13)
    if not sol.success:
        raise IntegrationFailure(f"profile integration failed: {sol.message}")
    samples = np.column_stack([sol.t, sol.y[0], sol.y[1]])
    prof = WaveProfile(params, T, u0, du0, regime, samples)
    tol = 1e-8 * max(1.0, abs(params.E))
    if prof.energy_residual() > tol:
        raise IntegrationFailure("profile energy drift exceeds tolerance")
    if abs(samples[-1, 1] - samples[0, 1] - prof.shift) > 1e-8:
        raise IntegrationFailure("profile does not close after one period")
    return prof


def equilibrium_profile(potential: Potential, c: float, u_eq: float, T: float) -> WaveProfile:
    """A constant state U = u_eq dressed as a profile of nominal period ``T``.

    Used as a constant-coefficient background for Hill's equation; ``u_eq``
    should be a critical point of the potential.
    """
    E = float(potential.V(u_eq))
    params = WaveParameters(E, c, potential, Branch.LEFT_WELL)
    sub = c * c < 1
    regime = Regime.SUBLUMINAL_LIBRATIONAL if sub else Regime.SUPERLUMINAL_LIBRATIONAL
    z = np.linspace(0.0, T, 16)
    samples = np.column_stack([z, np.full_like(z, u_eq), np.zeros_like(z)])
    return WaveProfile(params, float(T), float(u_eq), 0.0, regime, samples)


@dataclass(frozen=True)
class PhasePortrait:
    levels: dict  # E -> (n, 2) array of (u, u') grid points on the level set
    separatrices: dict  # E_sep -> (n, 2) array


def _level_points(H, U, P, E):
    D = H - E
    spread = np.zeros_like(D)
    for axis in (0, 1):
        diff = np.abs(np.diff(H, axis=axis))
        lo = [slice(None)] * 2
        hi = [slice(None)] * 2
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        spread[tuple(lo)] = np.maximum(spread[tuple(lo)], diff)
        spread[tuple(hi)] = np.maximum(spread[tuple(hi)], diff)
    mask = np.abs(D) <= spread
    return np.column_stack([U[mask], P[mask]])


def phase_portrait(energies: Sequence[float], potential: Potential, c: float,
                   window: tuple[float, float, float, float],
                   resolution: int | tuple[int, int] = 401) -> PhasePortrait:
    """Grid points on the level sets ``0.5 (c^2-1) u'^2 + V(u) = E``.

    ``window`` is ``(u_lo, u_hi, du_lo, du_hi)``.  A point belongs to a level
    set when E lies within the energy spread to its grid neighbours, so every
    cell the curve crosses contributes.
    """
    u_lo, u_hi, p_lo, p_hi = window
    if not (u_hi > u_lo and p_hi > p_lo):
        raise ValueError("degenerate phase-portrait window")
    nu, npp = (resolution, resolution) if np.isscalar(resolution) else resolution
    U, P = np.meshgrid(np.linspace(u_lo, u_hi, nu), np.linspace(p_lo, p_hi, npp), indexing="ij")
    s = c * c - 1.0
    H = 0.5 * s * P**2 + potential.V(U)
    levels = {float(E): _level_points(H, U, P, E) for E in energies}
    seps = {}
    params = WaveParameters(0.0, c, potential, Branch.LEFT_WELL)
    _, saddles = _centres_and_saddles(params)
    if potential.periodic and saddles.size:
        period = potential.u_period
        shifted = []
        for u in saddles:
            k0 = math.floor((u_lo - u) / period)
            k1 = math.ceil((u_hi - u) / period)
            shifted.extend(u + k * period for k in range(k0, k1 + 1))
        saddles = np.array(shifted)
    for u in saddles:
        if u_lo <= u <= u_hi and p_lo <= 0.0 <= p_hi:
            E_sep = float(potential.V(u))
            if E_sep not in seps:
                seps[E_sep] = _level_points(H, U, P, E_sep)
    return PhasePortrait(levels, seps)
