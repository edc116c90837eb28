"""Command-line front end.

Subcommands ``simulate``, ``decay``, ``support``, ``oracle`` and
``bound-check``.  Settings come from an optional flat ``key = value`` file
(``--config``) overridden by command-line flags.

Exit codes: 0 success, 1 bound violated (``bound-check`` only), 2 config
error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .even_field import (
    TWO_PI,
    CircleGrid,
    EvenFourier,
    Problem,
    StatePair,
    rho_profiles,
    to_traveling_wave,
)
from .experiments import (
    DEFAULT_BANDLIMIT,
    DEFAULT_DECAY_RATE,
    decay,
    gen_initial,
    half_life_horizon,
    initial_with_rho,
)
from .friction_solver import horizon_steps, sample_steps, trajectory_rho
from .galerkin_oracle import OracleBlowUp, compare_with_exact, integrate_feedback, project_state
from .general_control_sim import (
    DEFAULT_ENVELOPE,
    ControlError,
    Envelope,
    PiecewiseControl,
    adversarial_controls,
    bound_check,
    simulate_open_loop,
)
from .records import TrajectoryRecord, summary_csv, write_atomic
from .support_geometry import Momentum, support_D, support_Omega

EXIT_OK = 0
EXIT_BOUND_VIOLATED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

MODES = ("simulate", "decay", "support", "oracle", "bound-check")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class ExperimentConfig:
    mode: str
    grid: int = 4096
    horizon: float | None = None
    problem: Problem = Problem.STOP
    f0: dict[int, float] = field(default_factory=dict)
    f1: dict[int, float] = field(default_factory=dict)
    seed: int | None = None
    amplitude: float = 1.0
    rho0: float | None = None
    decay_rate: float = DEFAULT_DECAY_RATE
    bandlimit: int = DEFAULT_BANDLIMIT
    psi: dict[int, float] = field(default_factory=dict)
    phi: dict[int, float] = field(default_factory=dict)
    N: int = 64
    dt: float = 1e-4
    eps: float = 1e-3
    controls: int = 100
    control_file: str | None = None
    per_period: int = 8
    c1: float = DEFAULT_ENVELOPE.c1
    c2: float = DEFAULT_ENVELOPE.c2
    out: str | None = None
    summary: str | None = None

    @property
    def explicit_initial(self) -> bool:
        return bool(self.f0 or self.f1)


def parse_terms(text: str, key: str) -> dict[int, float]:
    """``"0=50, 3=-1.5"`` -> ``{0: 50.0, 3: -1.5}``."""
    terms: dict[int, float] = {}
    for chunk in filter(None, (c.strip() for c in text.replace(";", ",").split(","))):
        n, sep, v = chunk.partition("=")
        try:
            if not sep:
                raise ValueError
            idx, val = int(n), float(v)
        except ValueError:
            raise ConfigError(key, f"expected n=value terms, got {chunk!r}") from None
        if idx < 0:
            raise ConfigError(key, f"index must be non-negative, got {idx}")
        if not math.isfinite(val):
            raise ConfigError(key, f"coefficient must be finite, got {v!r}")
        terms[idx] = terms.get(idx, 0.0) + val
    return terms


def parse_number(text: str) -> float:
    """A float, optionally written as a multiple of pi (``80pi``, ``2*pi``)."""
    t = str(text).strip().lower()
    if t.endswith("pi"):
        head = t[:-2].strip().rstrip("*").strip()
        return (float(head) if head else 1.0) * math.pi
    return float(t)


def parse_horizon(text: str) -> float | str:
    """A number, a multiple of pi, or ``half``."""
    if str(text).strip().lower() == "half":
        return "half"
    try:
        return parse_number(text)
    except ValueError:
        raise ConfigError("horizon", f"not a number: {text!r}") from None


def read_config_file(path: str) -> dict[str, str]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    raw: dict[str, str] = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError("config", f"{path}:{lineno}: expected key = value")
        raw[key.strip().replace("-", "_")] = value.strip()
    return raw


_INT_KEYS = {"grid", "seed", "bandlimit", "N", "controls", "per_period"}
_FLOAT_KEYS = {"amplitude", "rho0", "decay_rate", "dt", "eps", "c1", "c2"}
_TERM_KEYS = {"f0", "f1", "psi", "phi"}
_STR_KEYS = {"out", "summary", "control_file"}


def build_config(mode: str, raw: dict[str, str | float | int | dict]) -> ExperimentConfig:
    """Typed, validated config from string settings.  Raises ConfigError."""
    if mode not in MODES:
        raise ConfigError("mode", f"unknown mode {mode!r}")
    known = {f.name for f in fields(ExperimentConfig)}
    cfg = ExperimentConfig(mode=mode)
    for key, value in raw.items():
        if key == "mode":
            continue
        if key not in known:
            raise ConfigError(key, "unknown key")
        try:
            if key in _INT_KEYS:
                parsed = int(value)
            elif key in _FLOAT_KEYS:
                parsed = parse_number(value)
            elif key in _TERM_KEYS:
                parsed = value if isinstance(value, dict) else parse_terms(str(value), key)
            elif key == "horizon":
                parsed = parse_horizon(str(value))
            elif key == "problem":
                parsed = Problem(str(value).strip().lower())
            else:
                parsed = str(value)
        except ConfigError:
            raise
        except ValueError:
            raise ConfigError(key, f"invalid value {value!r}") from None
        setattr(cfg, key, parsed)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.grid < 2 or cfg.grid % 2:
        raise ConfigError("grid", f"must be even and >= 2, got {cfg.grid}")
    if isinstance(cfg.horizon, float) and not (cfg.horizon >= 0 and math.isfinite(cfg.horizon)):
        raise ConfigError("horizon", f"must be finite and non-negative, got {cfg.horizon}")
    if cfg.amplitude < 0:
        raise ConfigError("amplitude", f"must be non-negative, got {cfg.amplitude}")
    if cfg.rho0 is not None and cfg.rho0 < 0:
        raise ConfigError("rho0", f"must be non-negative, got {cfg.rho0}")
    if cfg.decay_rate <= 0:
        raise ConfigError("decay_rate", f"must be positive, got {cfg.decay_rate}")
    if cfg.bandlimit < 0:
        raise ConfigError("bandlimit", f"must be non-negative, got {cfg.bandlimit}")
    if cfg.per_period < 0:
        raise ConfigError("per_period", f"must be non-negative, got {cfg.per_period}")
    if cfg.mode in ("simulate", "decay", "oracle", "bound-check"):
        band = (max(list(cfg.f0) + list(cfg.f1) + [0]) if cfg.explicit_initial
                else cfg.bandlimit)
        if cfg.grid < 2 * band + 2:
            raise ConfigError("grid", f"{cfg.grid} too coarse for bandlimit {band}; "
                                      f"need >= {2 * band + 2}")
        if not cfg.explicit_initial and cfg.seed is None:
            raise ConfigError("initial", "give f0/f1 coefficients or a seed")
    if cfg.mode in ("simulate", "decay", "bound-check") and cfg.horizon is None:
        raise ConfigError("horizon", "required for this mode")
    if cfg.mode == "oracle":
        if cfg.N < 1:
            raise ConfigError("N", f"must be >= 1, got {cfg.N}")
        if cfg.dt <= 0:
            raise ConfigError("dt", f"must be positive, got {cfg.dt}")
        if cfg.eps <= 0:
            raise ConfigError("eps", f"must be positive, got {cfg.eps}")
        if cfg.grid < 2 * cfg.N + 2:
            raise ConfigError("grid", f"{cfg.grid} too coarse for N={cfg.N}")
    if cfg.mode == "support" and cfg.horizon == "half":
        raise ConfigError("horizon", "'half' is only meaningful for evolution modes")
    if cfg.mode == "bound-check" and cfg.controls < 0:
        raise ConfigError("controls", f"must be non-negative, got {cfg.controls}")


def load_control_file(path: str) -> PiecewiseControl:
    """CSV with header ``t,u``: each row starts a constant piece; the last
    row's ``t`` ends the domain and its ``u`` may be blank."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("control_file", f"cannot read {path}: {exc.strerror}") from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["t", "u"]:
        raise ConfigError("control_file", "expected header t,u")
    try:
        ts = [float(r[0]) for r in rows[1:] if r]
        us = [float(r[1]) for r in rows[1:-1] if r]
        last = rows[-1][1].strip() if len(rows[-1]) > 1 else ""
        if last:
            us_last = float(last)
            if abs(us_last) > 1:
                raise ConfigError("control_file", f"|u| must be <= 1, got {us_last}")
    except (ValueError, IndexError):
        raise ConfigError("control_file", "malformed row") from None
    bad = [u for u in us if not abs(u) <= 1.0]
    if bad:
        raise ConfigError("control_file", f"|u| must be <= 1, got {bad[0]}")
    try:
        return PiecewiseControl(np.array(ts), np.array(us))
    except ControlError as exc:
        raise ConfigError("control_file", str(exc)) from None


def initial_state(cfg: ExperimentConfig) -> tuple[StatePair, CircleGrid]:
    if cfg.explicit_initial:
        f = StatePair(EvenFourier.from_dict(cfg.f0), EvenFourier.from_dict(cfg.f1))
        return f, to_traveling_wave(f, cfg.grid)
    if cfg.rho0 is not None:
        return initial_with_rho(cfg.seed, cfg.rho0, cfg.grid, cfg.decay_rate,
                                cfg.bandlimit, cfg.problem)
    f = gen_initial(cfg.seed, cfg.amplitude, cfg.decay_rate, cfg.bandlimit)
    return f, to_traveling_wave(f, cfg.grid)


def resolve_horizon(cfg: ExperimentConfig, G: CircleGrid) -> float:
    if cfg.horizon == "half":
        return half_life_horizon(G)
    return float(cfg.horizon if cfg.horizon is not None else TWO_PI)


def _emit(cfg: ExperimentConfig, text: str, out: str | None = None) -> None:
    target = out if out is not None else cfg.out
    if target:
        write_atomic(target, text)
    else:
        sys.stdout.write(text)


def _summary_path(cfg: ExperimentConfig) -> str | None:
    if cfg.summary:
        return cfg.summary
    if cfg.out:
        p = Path(cfg.out)
        return str(p.with_name(p.stem + ".summary.csv"))
    return None


def _run_simulate(cfg: ExperimentConfig) -> int:
    _, G = initial_state(cfg)
    T = resolve_horizon(cfg, G)
    sample_at = sample_steps(horizon_steps(T, G.m), G.m, cfg.per_period)
    if cfg.control_file:
        u = load_control_file(cfg.control_file)
        try:
            rec = simulate_open_loop(G, u, T, cfg.problem, sample_at)
        except ControlError as exc:
            raise ConfigError("control_file", str(exc)) from None
    else:
        rec = trajectory_rho(G, T, cfg.problem, sample_at)
    _emit(cfg, rec.to_csv())
    return EXIT_OK


def _run_decay(cfg: ExperimentConfig) -> int:
    _, G = initial_state(cfg)
    T = resolve_horizon(cfg, G)
    rec, s = decay(G, T, cfg.problem, cfg.per_period)
    _emit(cfg, rec.to_csv())
    text = summary_csv(s.rho0, s.rhoT, s.T)
    path = _summary_path(cfg)
    if path:
        write_atomic(path, text)
    sys.stdout.write(text if cfg.out else "\n" + text)
    return EXIT_OK


def _run_support(cfg: ExperimentConfig) -> int:
    xi = Momentum.from_dicts(phi=cfg.phi, psi=cfg.psi)
    T = float(cfg.horizon) if cfg.horizon is not None else TWO_PI
    hd = support_D(xi, T)
    lines = [f"H_D(T)={hd!r}", f"T={T!r}"]
    if xi.phi[0] != 0.0:
        lines.append("H_Omega=undefined (phi_0 != 0)")
    else:
        ho = support_Omega(xi)
        ratio = hd / (T * ho) if T > 0 and ho > 0 else float("nan")
        lines += [f"H_Omega={ho!r}", f"ratio={ratio!r}"]
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


def _run_oracle(cfg: ExperimentConfig) -> int:
    f, G = initial_state(cfg)
    T = resolve_horizon(cfg, G)
    steps = horizon_steps(T, G.m)
    sample_at = sample_steps(steps, G.m, cfg.per_period)
    times = sample_at * G.step
    rk_steps = np.rint(times / cfg.dt).astype(int)
    traj = integrate_feedback(project_state(f, cfg.N), T, cfg.dt, cfg.eps,
                              snapshot_steps=rk_steps)
    profiles = np.array([traj.snapshots[k].traveling_wave(G.m).values for k in rk_steps])
    rec = TrajectoryRecord(
        times=rk_steps * cfg.dt,
        rho_stop=rho_profiles(profiles, Problem.STOP),
        rho_damp=rho_profiles(profiles, Problem.DAMP),
        u=traj.u[rk_steps],
        phi0=traj.load_velocity[rk_steps],
        problem=cfg.problem,
    )
    _emit(cfg, rec.to_csv())
    cmp = compare_with_exact(f, T, cfg.N, cfg.dt, cfg.eps)
    msg = (f"oracle N={cfg.N} dt={cfg.dt} eps={cfg.eps}: sup|ft(0,t) - phi(t)| = "
           f"{cmp.sup_diff:.6g} over {100 * cmp.window_fraction:.1f}% of [0, T]\n")
    # stdout carries the CSV when no --out is given
    (sys.stdout if cfg.out else sys.stderr).write(msg)
    return EXIT_OK


def _run_bound_check(cfg: ExperimentConfig) -> int:
    _, G = initial_state(cfg)
    T = resolve_horizon(cfg, G)
    if T <= 0:
        raise ConfigError("horizon", "must be positive for a rate")
    seed = cfg.seed if cfg.seed is not None else 0
    controls = adversarial_controls(G, T, cfg.controls, seed)
    report = bound_check(G, controls, T, Envelope(cfg.c1, cfg.c2), cfg.problem)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "rate", "M"])
    w.writerow(["dry-friction", repr(report.dry_rate), repr(report.dry_M)])
    for kind, rate, M in zip(report.kinds, report.rates, report.minima):
        w.writerow([kind, repr(rate), repr(M)])
    if cfg.out:
        write_atomic(cfg.out, buf.getvalue())
    sys.stdout.write(
        f"rho0={report.rho0!r} T={T!r} dry_rate={report.dry_rate!r} "
        f"max_rate={report.max_rate!r} worst={report.worst} "
        f"bound={1 + report.tol!r} passed={str(report.passed).lower()}\n")
    return EXIT_OK if report.passed else EXIT_BOUND_VIOLATED


_RUNNERS = {
    "simulate": _run_simulate,
    "decay": _run_decay,
    "support": _run_support,
    "oracle": _run_oracle,
    "bound-check": _run_bound_check,
}


def run(cfg: ExperimentConfig) -> int:
    """Dispatch ``cfg.mode``; numeric blow-ups become exit code 3."""
    try:
        return _RUNNERS[cfg.mode](cfg)
    except OracleBlowUp as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return EXIT_NUMERIC
    except FloatingPointError as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return EXIT_NUMERIC


class _TermAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        acc = dict(getattr(namespace, self.dest) or {})
        for idx, val in parse_terms(values, self.dest).items():
            acc[idx] = acc.get(idx, 0.0) + val
        setattr(namespace, self.dest, acc)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="string-damping",
        description="Dry-friction damping of a closed string: exact solver and checks.")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="flat key = value settings file")
        p.add_argument("--grid", type=str, help="grid size m (even)")
        p.add_argument("--horizon", type=str, help="T: number, '<k>pi', or 'half'")
        p.add_argument("--problem", type=str, choices=["stop", "damp"])
        p.add_argument("--seed", type=str)
        p.add_argument("--out", type=str, help="output CSV path (stdout if omitted)")
        if mode == "support":
            p.add_argument("--psi", action=_TermAction, metavar="n=v",
                           help="xi1 cosine coefficient, repeatable")
            p.add_argument("--phi", action=_TermAction, metavar="n=v",
                           help="xi0 cosine coefficient, repeatable")
            continue
        p.add_argument("--f0", action=_TermAction, metavar="n=v",
                       help="displacement cosine coefficient, repeatable")
        p.add_argument("--f1", action=_TermAction, metavar="n=v",
                       help="velocity cosine coefficient, repeatable")
        p.add_argument("--amplitude", type=str)
        p.add_argument("--rho0", type=str, help="rescale the seeded profile to this rho(0)")
        p.add_argument("--decay-rate", dest="decay_rate", type=str)
        p.add_argument("--bandlimit", type=str)
        p.add_argument("--per-period", dest="per_period", type=str,
                       help="interior samples per period")
        if mode == "simulate":
            p.add_argument("--control-file", dest="control_file", type=str,
                           help="open-loop load as CSV t,u (default: dry friction)")
        if mode == "decay":
            p.add_argument("--summary", type=str, help="summary CSV path")
        if mode == "oracle":
            p.add_argument("--N", dest="N", type=str)
            p.add_argument("--dt", type=str)
            p.add_argument("--eps", type=str)
        if mode == "bound-check":
            p.add_argument("--controls", type=str, help="number of adversarial controls")
            p.add_argument("--c1", type=str)
            p.add_argument("--c2", type=str)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw: dict = read_config_file(args.config) if args.config else {}
        cli_mode = args.mode
        for key, value in vars(args).items():
            if key in ("mode", "config") or value is None:
                continue
            raw[key] = value
        cfg = build_config(cli_mode, raw)
        return run(cfg)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
