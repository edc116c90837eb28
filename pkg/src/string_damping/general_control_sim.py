"""Open-loop simulation for arbitrary admissible loads.

Same characteristics bookkeeping as the friction solver, but every
crossing adds a prescribed ``u(t)`` instead of solving an inclusion.
Used to probe the claim that no admissible control decreases ``rho``
faster than dry friction does.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .even_field import TWO_PI, CircleGrid, Problem
from .friction_solver import (
    horizon_steps,
    profile_from_history,
    record_from_history,
    solve_phi,
    trajectory_rho,
)
from .records import TrajectoryRecord


class ControlError(ValueError):
    """Control violates admissibility or does not cover the horizon."""


@dataclass(frozen=True)
class PiecewiseControl:
    """Load constant on ``[breakpoints[i], breakpoints[i+1])``.

    ``breakpoints`` has one more entry than ``values``; the last entry is
    the end of the control's domain, where the last value still applies.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.array(self.breakpoints, dtype=float)
        u = np.array(self.values, dtype=float)
        if b.ndim != 1 or u.ndim != 1 or b.size != u.size + 1 or u.size == 0:
            raise ControlError("need len(breakpoints) == len(values) + 1 >= 2")
        if b[0] != 0.0:
            raise ControlError("breakpoints must start at 0")
        if np.any(np.diff(b) <= 0):
            raise ControlError("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(u)) or np.any(np.abs(u) > 1.0):
            raise ControlError("control values must satisfy |u| <= 1")
        b.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", u)

    @property
    def end(self) -> float:
        return float(self.breakpoints[-1])

    def __call__(self, t):
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        return self.values[np.clip(idx, 0, self.values.size - 1)]

    @classmethod
    def constant(cls, value: float, T: float) -> "PiecewiseControl":
        return cls(np.array([0.0, max(T, 1e-12)]), np.array([value]))

    @classmethod
    def from_samples(cls, values, step: float) -> "PiecewiseControl":
        """One value per lattice step ``[n*step, (n+1)*step)``."""
        values = np.asarray(values, dtype=float)
        return cls(np.arange(values.size + 1) * step, values)


def lattice_samples(u: PiecewiseControl, steps: int, m: int) -> np.ndarray:
    """Control at lattice times ``n * 2*pi/m``, ``n = 0..steps``."""
    return np.asarray(u(np.arange(steps + 1) * (TWO_PI / m)), dtype=float)


def incoming_history(G: CircleGrid, u_n: np.ndarray, steps: int) -> np.ndarray:
    """Per-characteristic values before each crossing under loads ``u_n``.

    Slots past the horizon are NaN; they are never read by the profile
    assembly for times inside ``[0, steps]``.
    """
    m = G.m
    periods = steps // m + 1
    padded = np.full(periods * m, np.nan)
    padded[: steps + 1] = u_n[: steps + 1]
    kicks = padded.reshape(periods, m)
    incoming = np.empty((periods + 1, m))
    incoming[0] = G.values
    for p in range(periods):
        incoming[p + 1] = incoming[p] + kicks[p]
    return incoming


def simulate_open_loop(G: CircleGrid, u: PiecewiseControl, T: float,
                       problem: Problem = Problem.STOP,
                       sample_at: np.ndarray | None = None,
                       keep_profiles: bool = False) -> TrajectoryRecord:
    """Transport ``G`` and add ``u(t_k)`` at every crossing of the load."""
    steps = horizon_steps(T, G.m)
    if u.end < steps * G.step - 1e-12:
        raise ControlError(f"control ends at {u.end}, before horizon {T}")
    u_n = lattice_samples(u, steps, G.m)
    incoming = incoming_history(G, u_n, steps)
    return record_from_history(incoming, u_n, steps, Problem(problem),
                               sample_at, keep_profiles)


def open_loop_profile(G: CircleGrid, u: PiecewiseControl, T: float, t: float,
                      at_load: str = "mean") -> CircleGrid:
    """Profile ``g(., t)`` under ``u``, with the load-point conventions of
    :func:`friction_solver.profile`."""
    steps = horizon_steps(T, G.m)
    nt = int(np.rint(t / G.step))
    if nt < 0 or nt > steps:
        raise ValueError(f"t={t} outside [0, {T}]")
    u_n = lattice_samples(u, steps, G.m)
    incoming = incoming_history(G, u_n, steps)
    p, c = divmod(nt, G.m)
    if at_load == "mean":
        load = incoming[p, c] + 0.5 * u_n[nt]
    elif at_load == "incoming":
        load = incoming[p, c]
    else:
        raise ValueError(f"at_load must be 'mean' or 'incoming', got {at_load!r}")
    return CircleGrid(profile_from_history(incoming, nt, load))


def simulate_feedback(G: CircleGrid, policy, T: float) -> PiecewiseControl:
    """Realize a feedback ``policy(current, c) -> u`` as an open-loop control.

    ``current`` holds each characteristic's value before its next crossing
    and ``c`` is the characteristic crossing now.
    """
    m = G.m
    steps = horizon_steps(T, m)
    current = G.values.copy()
    u_n = np.empty(steps + 1)
    for n in range(steps + 1):
        c = n % m
        u_n[n] = float(np.clip(policy(current, c), -1.0, 1.0))
        current[c] += u_n[n]
    return PiecewiseControl.from_samples(u_n, G.step)


def sup_chasing_policy(current: np.ndarray, c: int) -> float:
    """Push against the sign of the largest excursion anywhere."""
    return -float(np.sign(current[np.argmax(np.abs(current))]))


def random_bang_bang(rng: np.random.Generator, T: float, mean_dwell: float) -> PiecewiseControl:
    """``+-1`` with exponentially distributed switching intervals."""
    times = [0.0]
    while times[-1] < T:
        times.append(times[-1] + rng.exponential(mean_dwell))
    values = np.where(rng.random(len(times) - 1) < 0.5, -1.0, 1.0)
    return PiecewiseControl(np.array(times), values)


def random_levels(rng: np.random.Generator, T: float, mean_dwell: float) -> PiecewiseControl:
    times = [0.0]
    while times[-1] < T:
        times.append(times[-1] + rng.exponential(mean_dwell))
    return PiecewiseControl(np.array(times), rng.uniform(-1.0, 1.0, len(times) - 1))


def replayed_friction(G: CircleGrid, T: float, shift: int = 0) -> PiecewiseControl:
    """Dry-friction load computed for ``G`` and applied ``shift`` lattice
    steps late (the first ``shift`` steps carry no load)."""
    sig = solve_phi(G, T)
    u = -sig.v_t
    if shift:
        u = np.concatenate([np.zeros(shift), u[:-shift]])
    return PiecewiseControl.from_samples(u, G.step)


def adversarial_controls(G: CircleGrid, T: float, count: int,
                         seed: int) -> list[tuple[str, PiecewiseControl]]:
    """Structured adversaries followed by seeded random ones.

    Structured: constant ``-1, 0, +1`` and greedy sup-chasing feedback.
    Then, cycling: dry friction replayed from a noisy copy of ``G``, dry
    friction delayed by a few lattice steps, random bang-bang and random
    levels with dwell times spread over three decades.
    """
    rng = np.random.default_rng(seed)
    out: list[tuple[str, PiecewiseControl]] = [
        ("const-1", PiecewiseControl.constant(-1.0, T)),
        ("const0", PiecewiseControl.constant(0.0, T)),
        ("const+1", PiecewiseControl.constant(1.0, T)),
        ("sup-chasing", simulate_feedback(G, sup_chasing_policy, T)),
    ]
    i = 0
    while len(out) < count:
        kind = i % 4
        if kind == 0:
            noise = float(10.0 ** rng.uniform(-2.0, 0.5))
            shaken = CircleGrid(G.values + noise * rng.standard_normal(G.m))
            out.append((f"noisy-friction(sigma={noise:.3g})", replayed_friction(shaken, T)))
        elif kind == 1:
            shift = int(rng.integers(1, max(2, G.m // 8)))
            out.append((f"late-friction(shift={shift})", replayed_friction(G, T, shift)))
        else:
            dwell = float(10.0 ** rng.uniform(-2.0, 1.0))
            if kind == 2:
                out.append((f"bang-bang(dwell={dwell:.3g})", random_bang_bang(rng, T, dwell)))
            else:
                out.append((f"levels(dwell={dwell:.3g})", random_levels(rng, T, dwell)))
        i += 1
    return out[:count]


@dataclass(frozen=True)
class Envelope:
    """Finite-horizon slack ``C1/T + C2/M`` around the optimal rate 1."""

    c1: float
    c2: float

    def tol(self, T: float, M: float) -> float:
        return self.c1 / T + (self.c2 / M if M > 0 else np.inf)

    @classmethod
    def calibrate(cls, rates, horizons, minima) -> "Envelope":
        """Smallest common ``C = C1 = C2`` covering the observed
        ``|rate - 1|`` of reference runs."""
        rates, horizons, minima = map(np.asarray, (rates, horizons, minima))
        scale = 1.0 / horizons + 1.0 / minima
        c = float(np.max(np.abs(rates - 1.0) / scale))
        return cls(c, c)


# calibrated on experiments.decay_suite() at m=4096 (C = 1.5768), rounded up
DEFAULT_ENVELOPE = Envelope(1.58, 1.58)


@dataclass
class BoundReport:
    problem: Problem
    T: float
    rho0: float
    dry_rate: float
    dry_M: float
    tol: float
    kinds: list[str] = field(default_factory=list)
    rates: list[float] = field(default_factory=list)
    minima: list[float] = field(default_factory=list)

    @property
    def max_rate(self) -> float:
        return max(self.rates) if self.rates else float("-inf")

    @property
    def worst(self) -> str:
        return self.kinds[int(np.argmax(self.rates))] if self.rates else ""

    @property
    def excess_over_dry(self) -> float:
        return self.max_rate - self.dry_rate

    @property
    def passed(self) -> bool:
        return all(r <= 1.0 + self.tol for r in self.rates)


def bound_check(G: CircleGrid, controls, T: float, envelope: Envelope,
                problem: Problem = Problem.STOP) -> BoundReport:
    """Rates ``(rho(0) - rho(T)) / T`` of each control against ``1 + tol``.

    ``controls`` is a list of ``PiecewiseControl`` or ``(kind, control)``
    pairs.  The dry-friction run on the same data is included as the
    reference; ``tol`` uses its ``M = min(rho(0), rho(T))``.
    """
    problem = Problem(problem)
    steps = horizon_steps(T, G.m)
    ends = np.array([0, steps])
    dry = trajectory_rho(G, T, problem, sample_at=ends)
    dry_M = float(min(dry.rho[0], dry.rho[-1]))
    report = BoundReport(problem, T, float(dry.rho[0]), dry.rate(), dry_M,
                         envelope.tol(T, dry_M))
    for i, item in enumerate(controls):
        kind, u = item if isinstance(item, tuple) else (f"control{i}", item)
        rec = simulate_open_loop(G, u, T, problem, sample_at=ends)
        report.kinds.append(kind)
        report.rates.append(rec.rate())
        report.minima.append(float(min(rec.rho[0], rec.rho[-1])))
    return report
