"""Truncated cosine-mode model of the string, used as an independent check.

Modes ``n = 0..N`` obey ``q_n' = p_n``, ``p_n' = -n^2 q_n + b_n u`` where
``b_n`` are the cosine coefficients of the point load.  The feedback
``u = -sign(sum_n p_n)`` is regularized by a linear ramp of width ``eps``
and integrated with fixed-step RK4.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .even_field import (
    TWO_PI,
    CircleGrid,
    EvenFourier,
    StatePair,
    cosine_coefficients,
    split_even_odd,
    to_traveling_wave,
)
from .friction_solver import solve_phi
from .support_geometry import pairing_weights


class OracleBlowUp(RuntimeError):
    """Non-finite modal state."""


def delta_coefficients(N: int) -> np.ndarray:
    """Cosine coefficients of the Dirac mass at 0 on the circle."""
    b = np.full(N + 1, 1.0 / np.pi)
    b[0] = 1.0 / TWO_PI
    return b


@dataclass(frozen=True)
class ModalState:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        p = np.array(self.p, dtype=float)
        if q.shape != p.shape or q.ndim != 1:
            raise ValueError("q and p must be 1-D of equal length")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def N(self) -> int:
        return self.q.size - 1

    @classmethod
    def zeros(cls, N: int) -> "ModalState":
        return cls(np.zeros(N + 1), np.zeros(N + 1))

    def load_velocity(self) -> float:
        """``f_t(0) = sum_n p_n``."""
        return float(np.sum(self.p))

    def energy(self) -> float:
        n = np.arange(self.N + 1)
        w = pairing_weights(self.N)
        return float(0.5 * np.sum(w * (self.p**2 + n**2 * self.q**2)))

    def traveling_wave(self, m: int) -> CircleGrid:
        return to_traveling_wave(self.as_state_pair(), m)

    def as_state_pair(self) -> StatePair:
        return StatePair(EvenFourier(self.q), EvenFourier(self.p))


def modal_rhs(s: ModalState, u: float) -> ModalState:
    if abs(u) > 1.0:
        raise ValueError(f"|u| must be <= 1, got {u}")
    n2 = np.arange(s.N + 1, dtype=float) ** 2
    return ModalState(s.p.copy(), -n2 * s.q + u * delta_coefficients(s.N))


def project_state(f: StatePair | CircleGrid, N: int) -> ModalState:
    """Cosine coefficients of ``(f0, f1)`` up to order ``N``.

    A :class:`CircleGrid` is read as the traveling wave ``g``: its even part
    is ``f1`` and its odd part is ``f0'``; ``f0`` is fixed by ``f0(0) = 0``.
    Higher modes are dropped.
    """
    if isinstance(f, StatePair):
        size = max(N, f.degree)
        return ModalState(f.f0.padded(size)[: N + 1], f.f1.padded(size)[: N + 1])
    even, odd = split_even_odd(f)
    p = cosine_coefficients(even, N)
    sine = -2.0 * np.fft.rfft(odd.values).imag[: N + 1] / f.m
    n = np.arange(1, N + 1)
    q = np.zeros(N + 1)
    q[1:] = -sine[1:] / n
    q[0] = -np.sum(q[1:])
    return ModalState(q, p)


def saturated_sign(x: float, eps: float) -> float:
    return float(np.clip(x / eps, -1.0, 1.0))


@dataclass(frozen=True)
class ModalTrajectory:
    times: np.ndarray
    load_velocity: np.ndarray
    u: np.ndarray
    energy: np.ndarray
    final: ModalState
    snapshots: dict[int, ModalState]


def integrate_feedback(s0: ModalState, T: float, dt: float, eps: float,
                       feedback: bool = True,
                       snapshot_steps=()) -> ModalTrajectory:
    """RK4 with ``u = -sat(sum p / eps)`` recomputed at every stage.

    With ``feedback=False`` the string runs free (``u = 0``).  Scalars are
    sampled at every step ``t_k = k * dt``; full modal states only at
    ``snapshot_steps``.
    """
    if dt <= 0 or eps <= 0:
        raise ValueError("dt and eps must be positive")
    if s0.N < 1:
        raise ValueError("need at least one oscillating mode")
    N = s0.N
    n2 = np.arange(N + 1, dtype=float) ** 2
    b = delta_coefficients(N)
    w = pairing_weights(N)
    steps = int(round(T / dt))

    def control(p):
        return -saturated_sign(p.sum(), eps) if feedback else 0.0

    def rhs(q, p):
        u = control(p)
        return p, -n2 * q + u * b

    q, p = s0.q.copy(), s0.p.copy()
    times = np.arange(steps + 1) * dt
    vel = np.empty(steps + 1)
    us = np.empty(steps + 1)
    energy = np.empty(steps + 1)
    wanted = set(int(k) for k in snapshot_steps)
    snaps: dict[int, ModalState] = {}
    for k in range(steps + 1):
        if k in wanted:
            snaps[k] = ModalState(q, p)
        vel[k] = p.sum()
        us[k] = control(p)
        with np.errstate(over="ignore", invalid="ignore"):
            energy[k] = 0.5 * np.dot(w, p * p + n2 * q * q)
        if not np.isfinite(energy[k]):
            raise OracleBlowUp(f"non-finite modal state at step {k}, t={times[k]:.6g}, "
                               f"N={N}, dt={dt}, eps={eps}")
        if k == steps:
            break
        k1q, k1p = rhs(q, p)
        k2q, k2p = rhs(q + 0.5 * dt * k1q, p + 0.5 * dt * k1p)
        k3q, k3p = rhs(q + 0.5 * dt * k2q, p + 0.5 * dt * k2p)
        k4q, k4p = rhs(q + dt * k3q, p + dt * k3p)
        q = q + (dt / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        p = p + (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    return ModalTrajectory(times, vel, us, energy, ModalState(q, p), snaps)


@dataclass(frozen=True)
class OracleComparison:
    N: int
    sup_diff: float
    window_fraction: float
    times: np.ndarray
    modal: np.ndarray
    exact: np.ndarray


def compare_with_exact(f: StatePair, T: float, N: int = 64, dt: float = 1e-4,
                       eps: float = 1e-3, threshold: float = 0.2,
                       edge: float = 0.2,
                       m_exact: int = 1 << 16) -> OracleComparison:
    """Sup-distance between modal ``f_t(0, t)`` and the exact load trace.

    Only times where the exact ``|phi(t)| >= threshold`` count; near the
    switching surface the regularized modal feedback is not trusted.
    Times within ``edge`` of a multiple of ``2*pi`` are skipped as well:
    the exact trace jumps there (the load switches on at ``t = 0`` and the
    first kicked characteristic returns at ``2*pi``) and a truncated
    series only converges like ``1/(N * distance)`` next to a jump.  The
    exact trace is read at the lattice time nearest each RK step.
    """
    G = to_traveling_wave(f, m_exact)
    sig = solve_phi(G, T)
    traj = integrate_feedback(project_state(f, N), T, dt, eps)
    idx = np.minimum(np.rint(traj.times / sig.step).astype(int), sig.steps)
    exact = sig.phi_t[idx]
    phase = np.mod(traj.times, TWO_PI)
    away = np.minimum(phase, TWO_PI - phase) >= edge
    mask = (np.abs(exact) >= threshold) & away
    diff = np.abs(traj.load_velocity - exact)[mask]
    return OracleComparison(N, float(diff.max()) if diff.size else 0.0,
                            float(mask.mean()), traj.times, traj.load_velocity, exact)
