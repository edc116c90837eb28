"""Seeded initial data and the standard decay experiment."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .even_field import TWO_PI, CircleGrid, EvenFourier, Problem, StatePair, sup_norm, to_traveling_wave
from .friction_solver import horizon_steps, sample_steps, trajectory_rho
from .records import TrajectoryRecord

DEFAULT_DECAY_RATE = 2.0
DEFAULT_BANDLIMIT = 16


def gen_initial(seed: int, amplitude: float, decay_rate: float = DEFAULT_DECAY_RATE,
                bandlimit: int = DEFAULT_BANDLIMIT) -> StatePair:
    """Random cosine coefficients with ``|c_n| <= amplitude * max(n, 1)**-decay_rate``.

    Draws come from numpy's PCG64 generator seeded with ``seed``: first
    ``bandlimit + 1`` uniforms on ``[-1, 1)`` for ``f0``, then as many for
    ``f1``.
    """
    if amplitude < 0:
        raise ValueError(f"amplitude must be non-negative, got {amplitude}")
    if decay_rate <= 0:
        raise ValueError(f"decay_rate must be positive, got {decay_rate}")
    if bandlimit < 0:
        raise ValueError(f"bandlimit must be non-negative, got {bandlimit}")
    rng = np.random.Generator(np.random.PCG64(seed))
    envelope = amplitude * np.maximum(np.arange(bandlimit + 1), 1.0) ** (-decay_rate)
    c0 = envelope * rng.uniform(-1.0, 1.0, bandlimit + 1)
    c1 = envelope * rng.uniform(-1.0, 1.0, bandlimit + 1)
    return StatePair(EvenFourier(c0), EvenFourier(c1))


def initial_with_rho(seed: int, rho0: float, m: int, decay_rate: float = DEFAULT_DECAY_RATE,
                     bandlimit: int = DEFAULT_BANDLIMIT,
                     problem: Problem = Problem.STOP) -> tuple[StatePair, CircleGrid]:
    """Seeded state rescaled so that its sampled ``rho`` equals ``rho0``."""
    f = gen_initial(seed, 1.0, decay_rate, bandlimit)
    g = to_traveling_wave(f, m)
    base = TWO_PI * sup_norm(g, problem)
    if base == 0.0:
        raise ValueError("seeded profile is identically zero")
    scale = rho0 / base
    f = StatePair(f.f0 * scale, f.f1 * scale)
    return f, to_traveling_wave(f, m)


def half_life_horizon(G: CircleGrid) -> float:
    """Mid-period horizon at which dry friction roughly halves ``rho``.

    ``sup |g|`` drops by one per period, so ``K = round(sup|G| / 2)``
    periods halve it; the extra half period keeps the finite-horizon
    correction away from zero.
    """
    K = int(round(sup_norm(G, Problem.STOP) / 2.0))
    return TWO_PI * (K + 0.5)


@dataclass(frozen=True)
class DecaySummary:
    rho0: float
    rhoT: float
    T: float
    rate: float
    degenerate: bool


def decay(G: CircleGrid, T: float, problem: Problem = Problem.STOP,
          per_period: int | None = None) -> tuple[TrajectoryRecord, DecaySummary]:
    """Dry-friction run plus the rate ``(rho(0) - rho(T)) / T``.

    A zero horizon or an identically zero trajectory is reported as
    ``rate = 0`` with ``degenerate = True``.
    """
    steps = horizon_steps(T, G.m)
    sample_at = None if per_period is None else sample_steps(steps, G.m, per_period)
    rec = trajectory_rho(G, T, problem, sample_at=sample_at)
    r = rec.rho
    span = float(rec.times[-1])
    degenerate = span <= 0 or (r[0] == 0.0 and r[-1] == 0.0)
    rate = 0.0 if degenerate else float((r[0] - r[-1]) / span)
    return rec, DecaySummary(float(r[0]), float(r[-1]), span, rate, degenerate)


def decay_suite(count: int = 20, seed: int = 2024, rho_lo: float = 100 * np.pi,
                rho_hi: float = 400 * np.pi) -> list[tuple[int, float]]:
    """Reference set of ``(profile seed, rho0)`` pairs for rate studies.

    Profile seeds are ``0..count-1``; targets are uniform on
    ``[rho_lo, rho_hi]`` from a generator seeded with ``seed``.
    """
    rng = np.random.default_rng(seed)
    return [(k, float(rng.uniform(rho_lo, rho_hi))) for k in range(count)]
