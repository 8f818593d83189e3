"""Command-line front end producing the data tables behind each diagnostic.

Every command writes one table, either CSV with a ``#``-prefixed metadata
header or JSON holding the same records. The header embeds the package
version and the fully resolved configuration, so an output file is enough to
rerun it. Sweep points run on a process pool capped by ``PTWALK_THREADS`` and
are written back in sweep order, which keeps output byte-identical between
runs.

Exit status is 0 on success, 2 for a configuration error and 3 for a numerical
failure such as a momentum sitting on the exceptional point.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .evolution import PRESETS, Formalism, coin_state, trace_series
from .measures import blp_series, entanglement_series, purity_series, rhp_series, trace_distance_series
from .numerics import NumericsError
from .walk import (
    ExceptionalPoint,
    KGrid,
    NoTransition,
    WalkParams,
    a_coefficient,
    exceptional_point,
    regime,
)

__all__ = ["ConfigError", "ComputeError", "ExperimentConfig", "parse_angle", "parse_range", "build_config", "run", "validate", "main"]

COMMANDS = ("ep-grid", "trace", "tracedist", "blp", "blp-scan", "rhp", "entanglement", "purity", "validate")
COLLISION_TOL = 1e-8
MAX_POINTS = 100_000

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 2, 3


class ConfigError(ValueError):
    """Malformed flags, ranges or states."""


class ComputeError(RuntimeError):
    """A numerical failure at one sweep point, carrying its provenance."""

    def __init__(self, msg, gamma=None, k=None):
        super().__init__(msg)
        self.gamma = gamma
        self.k = k


# -- parsing -----------------------------------------------------------------

_PI_RE = re.compile(r"^([+-]?)(\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi(?:\s*/\s*(\d+(?:\.\d*)?))?$")


def parse_angle(text: str) -> float:
    """Parse a plain float or a ``pi`` literal such as ``pi/4``, ``-pi/7`` or ``3*pi/4``."""
    s = str(text).strip().lower()
    m = _PI_RE.match(s)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(3)) if m.group(3) else 1.0
        if den == 0:
            raise ConfigError(f"zero denominator in {text!r}")
        return sign * num * math.pi / den
    try:
        val = float(s)
    except ValueError:
        raise ConfigError(f"cannot parse {text!r} as a number or pi literal") from None
    if not math.isfinite(val):
        raise ConfigError(f"{text!r} is not finite")
    return val


def parse_range(text: str) -> list[float]:
    """Expand ``a:b:step`` into the arithmetic progression ``a, a+step, ... <= b``."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"range {text!r} must have the form a:b:step")
    a, b, step = (parse_angle(x) for x in parts)
    if step <= 0:
        raise ConfigError(f"range step must be positive, got {step}")
    if b < a:
        raise ConfigError(f"range end {b} is below its start {a}")
    n = int(math.floor((b - a) / step + 1e-9)) + 1
    if n > MAX_POINTS:
        raise ConfigError(f"range {text!r} has {n} points (limit {MAX_POINTS})")
    return [a + i * step for i in range(n)]


def _parse_interval(text: str) -> tuple[float, float]:
    parts = str(text).split(":")
    if len(parts) != 2:
        raise ConfigError(f"interval {text!r} must have the form lo:hi")
    lo, hi = (parse_angle(x) for x in parts)
    if not hi > lo:
        raise ConfigError(f"interval {text!r} is empty")
    return lo, hi


def parse_state(text: str):
    """A preset name or explicit entries ``a,b;c,d`` (complex literals allowed)."""
    s = str(text).strip()
    if s in PRESETS:
        return s
    rows = [r for r in s.split(";")]
    try:
        entries = [[complex(x.strip().replace(" ", "")) for x in r.split(",")] for r in rows]
    except ValueError:
        raise ConfigError(f"state {text!r} is neither a preset {sorted(PRESETS)} nor 'a,b;c,d' entries") from None
    if len(entries) != 2 or any(len(r) != 2 for r in entries):
        raise ConfigError(f"state {text!r} must have 2x2 entries")
    try:
        coin_state(np.array(entries))
    except ValueError as exc:
        raise ConfigError(f"state {text!r}: {exc}") from None
    return entries


# -- configuration -----------------------------------------------------------


@dataclass
class ExperimentConfig:
    command: str
    theta1: float = math.pi / 4
    theta2: float = -math.pi / 7
    gammas: list[float] = field(default_factory=lambda: [0.0])
    T: int = 50
    grid_n: int = 512
    grid_shifted: bool = True
    formalism: str = "metric"
    state: object = "up"
    state2: object = "plus"
    out: str | None = None
    format: str = "csv"
    theta1_range: tuple[float, float] = (0.0, math.pi)
    theta2_range: tuple[float, float] = (-math.pi, 0.0)
    resolution: int | None = None

    @property
    def grid(self) -> KGrid:
        return KGrid(self.grid_n, self.grid_shifted)

    def params(self, gamma: float) -> WalkParams:
        return WalkParams(self.theta1, self.theta2, gamma)

    def resolved(self) -> dict:
        d = asdict(self)
        d["version"] = __version__
        d["theta1_range"] = list(self.theta1_range)
        d["theta2_range"] = list(self.theta2_range)
        return d


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # report bad flags as ConfigError instead of exiting from inside argparse
    def error(self, message):
        raise _ArgError(message)


def _parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ptwalk", description="PT-symmetric quantum walk diagnostics.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--theta1", default="pi/4")
    ap.add_argument("--theta2", default="-pi/7")
    g = ap.add_mutually_exclusive_group()
    g.add_argument("--gamma", default=None, help="single gain/loss strength")
    g.add_argument("--gamma-range", default=None, help="a:b:step progression of gamma")
    g.add_argument("--exp-gamma-range", default=None, help="a:b:step progression of e^gamma")
    ap.add_argument("--steps", "--T", dest="steps", type=int, default=50)
    ap.add_argument("--grid", type=int, default=512)
    ap.add_argument("--unshifted", action="store_true", help="include k = 0 in the momentum grid")
    ap.add_argument("--formalism", choices=("normalised", "metric"), default="metric")
    ap.add_argument("--state", default="up")
    ap.add_argument("--state2", default="plus")
    ap.add_argument("--out", default=None, help="output path (default: stdout)")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--theta1-range", default="0:pi", help="ep-grid interval lo:hi")
    ap.add_argument("--theta2-range", default="-pi:0", help="ep-grid interval lo:hi")
    ap.add_argument("--resolution", type=int, default=None, help="ep-grid cells per axis")
    return ap


_VALUE_FLAGS = {
    "--theta1", "--theta2", "--gamma", "--gamma-range", "--exp-gamma-range",
    "--theta1-range", "--theta2-range", "--state", "--state2",
}


def _glue_values(argv):
    # argparse takes "-pi/7" for an option; bind such values to their flag
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def build_config(argv: list[str]) -> ExperimentConfig:
    """Parse and check command-line arguments; raises :class:`ConfigError`."""
    try:
        ns = _parser().parse_args(_glue_values(list(argv)))
    except _ArgError as exc:
        raise ConfigError(str(exc)) from None

    if ns.gamma_range is not None:
        gammas = parse_range(ns.gamma_range)
    elif ns.exp_gamma_range is not None:
        eg = parse_range(ns.exp_gamma_range)
        if min(eg) <= 0:
            raise ConfigError("e^gamma values must be positive")
        gammas = [math.log(x) for x in eg]
    elif ns.gamma is not None:
        gammas = [parse_angle(ns.gamma)]
    else:
        gammas = [0.0]
    if any(g < 0 for g in gammas):
        raise ConfigError("gamma must be non-negative")
    if ns.grid < 16:
        raise ConfigError(f"grid must have at least 16 points, got {ns.grid}")
    min_T = 1 if ns.command == "rhp" else 0
    if ns.steps < min_T:
        raise ConfigError(f"{ns.command} needs at least {min_T} step(s), got {ns.steps}")
    if ns.resolution is not None and ns.resolution < 1:
        raise ConfigError("resolution must be positive")

    return ExperimentConfig(
        command=ns.command,
        theta1=parse_angle(ns.theta1),
        theta2=parse_angle(ns.theta2),
        gammas=gammas,
        T=ns.steps,
        grid_n=ns.grid,
        grid_shifted=not ns.unshifted,
        formalism=ns.formalism,
        state=parse_state(ns.state),
        state2=parse_state(ns.state2),
        out=ns.out,
        format=ns.format,
        theta1_range=_parse_interval(ns.theta1_range),
        theta2_range=_parse_interval(ns.theta2_range),
        resolution=ns.resolution,
    )


# -- per-point workers -------------------------------------------------------


def _state(spec):
    return spec if isinstance(spec, str) else np.array(spec, dtype=complex)


def _series_rows(cfg: ExperimentConfig, gamma: float) -> list[dict]:
    p = cfg.params(gamma)
    grid = cfg.grid
    rho0, sigma0 = _state(cfg.state), _state(cfg.state2)
    cmd = cfg.command
    if cmd == "trace":
        s = trace_series(p, rho0, cfg.T, grid, cfg.formalism)
        return [{"gamma": gamma, "t": int(t), "trace": float(v)} for t, v in zip(s.times, s.values)]
    if cmd == "tracedist":
        s = trace_distance_series(p, rho0, sigma0, cfg.T, grid, cfg.formalism)
        return [{"gamma": gamma, "t": int(t), "trace_distance": float(v)} for t, v in zip(s.times, s.values)]
    if cmd == "blp":
        s = blp_series(p, rho0, sigma0, cfg.T, grid, cfg.formalism)
        D = s.extra["trace_distance"]
        return [
            {"gamma": gamma, "t": int(t), "blp": float(v), "trace_distance": float(d)}
            for t, v, d in zip(s.times, s.values, D)
        ]
    if cmd == "blp-scan":
        s = blp_series(p, rho0, sigma0, cfg.T, grid, cfg.formalism)
        return [{"gamma": gamma, "exp_gamma": math.exp(gamma), "regime": regime(p), "blp": float(s.values[-1])}]
    if cmd == "rhp":
        s = rhp_series(p, cfg.T, grid, cfg.formalism)
        e = s.extra
        return [
            {
                "gamma": gamma,
                "t": int(t),
                "g": float(e["g"][i]),
                "rhp": float(s.values[i]),
                "choi_trace": float(e["choi_trace"][i]),
                "choi_trace_x2": 2.0 * float(e["choi_trace"][i]),
                "tp_deviation": float(e["tp_deviation"][i]),
                "precision_bits": int(e["precision_bits"][i]),
                "flag": s.flags[i],
            }
            for i, t in enumerate(s.times)
        ]
    if cmd == "entanglement":
        s = entanglement_series(p, rho0, cfg.T, grid, cfg.formalism)
        return [
            {"gamma": gamma, "t": int(t), "entropy": float(v), "flag": f}
            for t, v, f in zip(s.times, s.values, s.flags)
        ]
    if cmd == "purity":
        s = purity_series(p, rho0, cfg.T, grid, cfg.formalism)
        return [{"gamma": gamma, "t": int(t), "purity": float(v)} for t, v in zip(s.times, s.values)]
    raise ConfigError(f"unknown command {cmd!r}")


def _worker(args):
    cfg, gamma = args
    try:
        return "ok", _series_rows(cfg, gamma)
    except ExceptionalPoint as exc:
        return "compute", (str(exc), exc.gamma, exc.k)
    except NumericsError as exc:
        return "compute", (f"{exc} (gamma={gamma:.12g})", gamma, None)
    except ValueError as exc:
        return "config", str(exc)


def _workers(n_points: int) -> int:
    env = os.environ.get("PTWALK_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ConfigError(f"PTWALK_THREADS must be an integer, got {env!r}") from None
        if cap < 1:
            raise ConfigError("PTWALK_THREADS must be at least 1")
    return max(1, min(cap, n_points))


def _ep_grid_rows(cfg: ExperimentConfig) -> list[dict]:
    if cfg.resolution is None:
        t1s, t2s = [cfg.theta1], [cfg.theta2]
    else:
        # cell midpoints keep the open intervals' endpoints (sin = 0) out of the grid
        def mids(lo, hi):
            h = (hi - lo) / cfg.resolution
            return [lo + (i + 0.5) * h for i in range(cfg.resolution)]

        t1s, t2s = mids(*cfg.theta1_range), mids(*cfg.theta2_range)
    rows = []
    for a in t1s:
        for b in t2s:
            try:
                g = exceptional_point(a, b)
            except NoTransition:
                g = float("nan")
            rows.append({"theta1": a, "theta2": b, "gamma_pt": g, "exp_gamma_pt": math.exp(g)})
    return rows


def validate(cfg: ExperimentConfig) -> tuple[list[dict], list[str]]:
    """Per-point regime labels and grid collisions with the exceptional point.

    Returns the table rows and a list of warning messages. A collision is a
    grid momentum with ``||a(k)| - 1| < 1e-8`` while ``gamma > 0``.
    """
    ks = cfg.grid.points
    shifted_ks = KGrid(cfg.grid_n, True).points
    try:
        gamma_pt = exceptional_point(cfg.theta1, cfg.theta2)
    except NoTransition:
        gamma_pt = float("nan")
    rows, warnings = [], []
    for gamma in cfg.gammas:
        p = cfg.params(gamma)
        dev = np.abs(np.abs(a_coefficient(p, ks)) - 1)
        hit = gamma > 0 and bool(np.any(dev < COLLISION_TOL))
        suggestion = ""
        if hit:
            k_hit = float(ks[np.argmin(dev)])
            clean_shifted = not np.any(np.abs(np.abs(a_coefficient(p, shifted_ks)) - 1) < COLLISION_TOL)
            if not cfg.grid_shifted and clean_shifted:
                suggestion = "use the half-step shifted grid (drop --unshifted)"
            else:
                suggestion = "change the grid size or nudge gamma"
            warnings.append(f"gamma={gamma:.12g}: grid momentum k={k_hit:.12g} sits on the exceptional point; {suggestion}")
        rows.append(
            {
                "gamma": gamma,
                "exp_gamma": math.exp(gamma),
                "gamma_pt": gamma_pt,
                "regime": regime(p),
                "min_abs_a_dev": float(dev.min()),
                "collision": int(hit),
                "suggestion": suggestion,
            }
        )
    return rows, warnings


def run(cfg: ExperimentConfig) -> list[dict]:
    """Compute the table for ``cfg``; raises :class:`ConfigError` or :class:`ComputeError`."""
    if cfg.command == "ep-grid":
        return _ep_grid_rows(cfg)
    if cfg.command == "validate":
        return validate(cfg)[0]
    jobs = [(cfg, g) for g in cfg.gammas]
    n = _workers(len(jobs))
    if n == 1:
        results = [_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_worker, jobs))
    rows = []
    for status, payload in results:
        if status == "compute":
            msg, gamma, k = payload
            raise ComputeError(msg, gamma, k)
        if status == "config":
            raise ConfigError(payload)
        rows.extend(payload)
    return rows


# -- output ------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(cfg: ExperimentConfig, rows: list[dict]) -> str:
    columns = list(rows[0]) if rows else []
    meta = cfg.resolved()
    if cfg.format == "json":
        doc = {"version": __version__, "config": meta, "columns": columns, "records": rows}
        return json.dumps(doc, indent=1, allow_nan=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# ptwalk {__version__}\n")
    buf.write(f"# config: {json.dumps(meta, allow_nan=True)}\n")
    buf.write(f"# columns: {', '.join(columns)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = build_config(argv)
        if cfg.command == "validate":
            rows, warns = validate(cfg)
            for w in warns:
                print(f"warning: {w}", file=sys.stderr)
        else:
            rows = run(cfg)
    except ConfigError as exc:
        print(f"ptwalk: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ComputeError as exc:
        print(f"ptwalk: compute error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    text = render(cfg, rows)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
