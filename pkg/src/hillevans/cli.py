"""Command-line front end.

Each subcommand computes one kind of figure data and writes it as CSV (or
JSON) to a file or to standard output.  Exit status is 0 on success, 2 when
the input is invalid and 3 when a numerical step fails; diagnostics go to
standard error only.
"""

from __future__ import annotations

import argparse
import configparser
import io
import json
import math
import os
import sys
import tempfile
import warnings

import numpy as np

from . import oracles
from .errors import (
    HillEvansError,
    NoOrbit,
    RotationalUnavailable,
)
from .evans import EvansContext, krein_batch
from .spectrum import real_characteristic_values, spectrum_scan, sweep_theta
from .waves import (
    Branch,
    WaveParameters,
    compute_period,
    phase_portrait,
    phi4,
    potential_from_expressions,
    sine_gordon,
    wave_profile,
)

COMMANDS = ("wave", "portrait", "spectrum", "krein", "sweep")
VALIDATION_ERRORS = (ValueError, NoOrbit, RotationalUnavailable)

# option name -> (parser for config-file strings, default)
OPTIONS = {
    "potential": (str, "sine-gordon"),
    "u_period": (float, 2.0 * math.pi),
    "E": (float, None),
    "c": (float, None),
    "branch": (str, None),
    "theta": (str, "0"),
    "window": (str, None),
    "grid": (str, "256x256"),
    "interval": (str, "-3:3"),
    "energies": (str, None),
    "samples": (int, 256),
    "n_seed": (int, 2001),
    "output": (str, "-"),
    "format": (str, "csv"),
    "events": (str, None),
}


class ValidationError(ValueError):
    pass


def fmt(x) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(x) + 0.0, ".17g")  # no negative zero


# ---------------------------------------------------------------- parsing

def parse_floats(text: str, n: int, what: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) != n:
        raise ValidationError(f"{what} needs {n} colon-separated numbers, got {text!r}")
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise ValidationError(f"{what}: not a number in {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise ValidationError(f"{what} must be finite")
    return vals


def parse_theta(text: str) -> np.ndarray:
    """A single exponent or an inclusive ``start:stop:step`` range."""
    if ":" not in text:
        (t,) = parse_floats(text, 1, "theta")
        return np.array([t])
    start, stop, step = parse_floats(text, 3, "theta range")
    if step <= 0 or stop <= start:
        raise ValidationError("theta range needs start < stop and step > 0")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def parse_window(text: str) -> tuple[float, float, float, float]:
    w = parse_floats(text, 4, "window")
    if not (w[1] > w[0] and w[3] > w[2]):
        raise ValidationError("window must satisfy lo < hi on both axes")
    return w


def parse_grid(text: str) -> tuple[int, int]:
    try:
        nx, ny = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise ValidationError(f"grid must look like 256x256, got {text!r}") from None
    if nx < 2 or ny < 2:
        raise ValidationError("grid dimensions must be at least 2")
    return nx, ny


def parse_interval(text: str) -> tuple[float, float]:
    lo, hi = parse_floats(text, 2, "interval")
    if not hi > lo:
        raise ValidationError("interval must satisfy lo < hi")
    return lo, hi


def make_potential(text: str, u_period: float):
    name = text.strip().lower()
    if name in ("sine-gordon", "sg"):
        return sine_gordon()
    if name == "phi4":
        return phi4()
    if text.startswith("expr:"):
        parts = text[5:].split(";")
        if len(parts) != 3:
            raise ValidationError("expression potential must be 'expr:V;dV;d2V'")
        periodic = u_period > 0
        return potential_from_expressions(*parts, periodic=periodic,
                                          u_period=u_period if periodic else 0.0)
    raise ValidationError(f"unknown potential {text!r}")


def make_params(opts):
    if opts["E"] is None or opts["c"] is None:
        raise ValidationError("both -E and -c are required")
    if not (math.isfinite(opts["E"]) and math.isfinite(opts["c"])):
        raise ValidationError("E and c must be finite")
    pot = make_potential(opts["potential"], opts["u_period"])
    if opts["branch"] is not None:
        try:
            branch = Branch(opts["branch"])
        except ValueError:
            raise ValidationError(f"unknown branch {opts['branch']!r}") from None
        return WaveParameters(opts["E"], opts["c"], pot, branch)
    # first branch that carries an orbit
    last = None
    for branch in (Branch.LEFT_WELL, Branch.ROTATIONAL_PLUS, Branch.OUTER_ORBIT):
        params = WaveParameters(opts["E"], opts["c"], pot, branch)
        try:
            compute_period(params)
            return params
        except (NoOrbit, RotationalUnavailable) as exc:
            last = exc
    raise last


# ---------------------------------------------------------------- commands

def cmd_wave(opts):
    prof = wave_profile(make_params(opts), n_samples=opts["samples"])
    if opts["format"] == "json":
        doc = {"E": prof.E, "c": prof.c, "T": prof.T, "regime": prof.regime.value,
               "z": prof.samples[:, 0].tolist(), "u": prof.samples[:, 1].tolist(),
               "du": prof.samples[:, 2].tolist()}
        return json.dumps(doc, indent=1) + "\n", None
    rows = (",".join(fmt(x) for x in r) for r in prof.samples)
    return "z,u,du\n" + "".join(r + "\n" for r in rows), None


def cmd_portrait(opts):
    pot = make_potential(opts["potential"], opts["u_period"])
    if opts["c"] is None:
        raise ValidationError("-c is required")
    if opts["energies"] is None:
        raise ValidationError("--energies is required (comma separated)")
    try:
        energies = [float(e) for e in opts["energies"].split(",")]
    except ValueError:
        raise ValidationError("--energies must be comma separated numbers") from None
    window = parse_window(opts["window"] or "-7:7:-4:4")
    nx, ny = parse_grid(opts["grid"])
    port = phase_portrait(energies, pot, opts["c"], window=window, resolution=(nx, ny))
    if opts["format"] == "json":
        doc = {"levels": {fmt(E): pts.tolist() for E, pts in port.levels.items()},
               "separatrices": {fmt(E): pts.tolist() for E, pts in port.separatrices.items()}}
        return json.dumps(doc, indent=1) + "\n", None
    out = io.StringIO()
    out.write("u,du,E\n")
    for group in (port.levels, port.separatrices):
        for E, pts in group.items():
            for u, du in pts:
                out.write(f"{fmt(u)},{fmt(du)},{fmt(E)}\n")
    return out.getvalue(), None


def cmd_spectrum(opts):
    prof = wave_profile(make_params(opts))
    window = parse_window(opts["window"] or "-2:2:-2:2")
    grid = parse_grid(opts["grid"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        pts = spectrum_scan(prof, window, grid)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if opts["format"] == "json":
        doc = [{"re_lambda": p.lam.real, "im_lambda": p.lam.imag, "theta": p.theta,
                "residual": p.residual} for p in pts]
        return json.dumps(doc, indent=1) + "\n", None
    out = io.StringIO()
    out.write("re_lambda,im_lambda,theta,residual\n")
    for p in pts:
        lam = p.lam
        out.write(f"{fmt(lam.real)},{fmt(lam.imag)},{fmt(p.theta)},{fmt(p.residual)}\n")
    return out.getvalue(), None


def cmd_krein(opts):
    prof = wave_profile(make_params(opts))
    interval = parse_interval(opts["interval"])
    rows = []
    for theta in parse_theta(opts["theta"]):
        ctx = EvansContext(prof, theta)
        roots = real_characteristic_values(ctx, interval, opts["n_seed"])
        z = np.array([r.zeta for r in roots])
        if z.size == 0:
            continue
        mu, tr, _, res = krein_batch(prof, z, ctx.theta)
        for r, m, t, e in zip(roots, mu, tr, res):
            simple = (not r.tangential and r.zeta != 0.0 and abs(t) < 2.0 - 1e-6
                      and e < 1e-8 and math.isfinite(m))
            kappa = int(np.sign(m)) if simple else 0
            rows.append((r.zeta, kappa, m if simple else float("nan"), ctx.theta))
    if opts["format"] == "json":
        doc = [{"zeta0": z, "kappa": k, "mu_prime": None if math.isnan(m) else m, "theta": t}
               for z, k, m, t in rows]
        return json.dumps(doc, indent=1) + "\n", None
    out = io.StringIO()
    out.write("zeta0,kappa,mu_prime,theta\n")
    for z, k, m, t in rows:
        out.write(f"{fmt(z)},{k},{fmt(m)},{fmt(t)}\n")
    return out.getvalue(), None


def cmd_sweep(opts):
    prof = wave_profile(make_params(opts))
    thetas = parse_theta(opts["theta"])
    if thetas.size < 2:
        raise ValidationError("sweep needs a theta range start:stop:step")
    interval = parse_interval(opts["interval"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = sweep_theta(prof, thetas, interval, n_seed=opts["n_seed"])
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    events = [e.to_dict() for e in res.events]
    if opts["format"] == "json":
        doc = {"events": events,
               "tracks": [[list(p) for p in tr] for tr in res.tracks]}
        return json.dumps(doc, indent=1) + "\n", None
    out = io.StringIO()
    out.write("track,theta,zeta0,kappa\n")
    for k, tr in enumerate(res.tracks):
        for th, z, kap in tr:
            out.write(f"{k},{fmt(th)},{fmt(z)},{kap}\n")
    return out.getvalue(), json.dumps(events, indent=1) + "\n"


HANDLERS = {"wave": cmd_wave, "portrait": cmd_portrait, "spectrum": cmd_spectrum,
            "krein": cmd_krein, "sweep": cmd_sweep}


# ---------------------------------------------------------------- output

def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(opts, data: str, events: str | None) -> None:
    target = opts["output"]
    events_path = opts["events"]
    if events is not None and events_path is None and target != "-":
        events_path = target + ".events.json"
    if target == "-":
        sys.stdout.write(data)
        if events is not None and events_path is None:
            sys.stdout.write(events)
    else:
        write_atomic(target, data)
    if events is not None and events_path is not None:
        if events_path == "-":
            sys.stdout.write(events)
        else:
            write_atomic(events_path, events)


# ---------------------------------------------------------------- self-test

def selftest() -> int:
    results = []
    worst, ok = oracles.check_constant_hill()
    results.append(("constant-coefficient Hill trace", worst, ok))
    sg = sine_gordon()
    worst = 0.0
    cases = ((-0.5, 0.5, Branch.ROTATIONAL_PLUS), (0.5, 0.5, Branch.LEFT_WELL),
             (6.0, 1.45, Branch.ROTATIONAL_PLUS), (1.5, 2.0, Branch.LEFT_WELL))
    for E, c, b in cases:
        T = compute_period(WaveParameters(E, c, sg, b))
        worst = max(worst, abs(T / oracles.sine_gordon_period(E, c) - 1.0))
    results.append(("pendulum period", worst, worst < 1e-8))
    prof = wave_profile(WaveParameters(-0.5, 0.5, sg, Branch.ROTATIONAL_PLUS))
    worst, ok = oracles.check_evans_relation(prof, n=10)
    results.append(("D1/D2 relation", worst, ok))
    for name, val, ok in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  (max deviation {val:.3e})")
    return 0 if all(r[2] for r in results) else 1


# ---------------------------------------------------------------- entry

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hillevans",
        description="Floquet spectra, Krein signatures and Hamiltonian-Hopf events "
                    "for periodic sine-Gordon and Klein-Gordon wavetrains.")
    parser.add_argument("--selftest", action="store_true",
                        help="run the closed-form oracle checks and exit")
    parser.add_argument("--config", help="INI file with option defaults ([run] section)")
    parser.add_argument("command", nargs="?", choices=COMMANDS)
    g = parser.add_argument_group("wave")
    g.add_argument("--potential", help="sine-gordon, phi4, or 'expr:V;dV;d2V' in u")
    g.add_argument("--u-period", dest="u_period", type=float,
                   help="period in u of an expression potential (0 for none)")
    g.add_argument("-E", dest="E", type=float, help="wave energy")
    g.add_argument("-c", dest="c", type=float, help="wave speed")
    g.add_argument("--branch", help="left, right, rot+, rot- or outer")
    g.add_argument("--samples", type=int, help="profile samples over one period")
    g = parser.add_argument_group("spectrum")
    g.add_argument("--theta", help="Floquet exponent or start:stop:step")
    g.add_argument("--window", help="re_lo:re_hi:im_lo:im_hi (u_lo:u_hi:du_lo:du_hi for portrait)")
    g.add_argument("--grid", help="NXxNY")
    g.add_argument("--interval", help="real zeta interval lo:hi for krein and sweep")
    g.add_argument("--n-seed", dest="n_seed", type=int, help="seed grid size for real roots")
    g.add_argument("--energies", help="comma separated energies for portrait")
    g = parser.add_argument_group("output")
    g.add_argument("--output", "-o", help="output path, '-' for standard output")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--events", help="event log path for sweep ('-' for standard output)")
    return parser


def resolve(args, parser) -> dict:
    """Merge flags over config-file values over defaults."""
    conf = {}
    if args.config:
        cp = configparser.ConfigParser()
        if not cp.read(args.config):
            raise ValidationError(f"cannot read config file {args.config!r}")
        for section in cp.sections():
            if section in ("run", args.command):
                conf.update({k.replace("-", "_"): v for k, v in cp[section].items()})
    opts = {}
    for key, (typ, default) in OPTIONS.items():
        val = getattr(args, key, None)
        name = key.lower()  # ConfigParser folds keys to lower case
        if val is None and name in conf:
            try:
                val = typ(conf[name])
            except ValueError:
                raise ValidationError(f"config value for {key!r} is invalid") from None
        opts[key] = default if val is None else val
    if opts["format"] not in ("csv", "json"):
        raise ValidationError("format must be csv or json")
    command = args.command or conf.get("command")
    if command not in COMMANDS:
        parser.error("a command is required: " + ", ".join(COMMANDS))
    opts["command"] = command
    return opts


RANGE_OPTIONS = ("--window", "--interval", "--theta", "--energies")


def glue_ranges(argv):
    """Attach values such as ``-2:2:-2:2`` to their option.

    argparse would otherwise read a leading minus as the start of a new flag.
    """
    out = []
    it = iter(argv)
    for tok in it:
        if tok in RANGE_OPTIONS:
            val = next(it, None)
            out.append(tok if val is None else f"{tok}={val}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(glue_ranges(sys.argv[1:] if argv is None else list(argv)))
    if args.selftest:
        return selftest()
    try:
        opts = resolve(args, parser)
        data, events = HANDLERS[opts["command"]](opts)
        emit(opts, data, events)
    except VALIDATION_ERRORS as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return 2
    except HillEvansError as exc:
        print(f"error: {opts['command']}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
