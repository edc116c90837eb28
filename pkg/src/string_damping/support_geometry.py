"""Support functions of reachable sets and the dry-friction feedback.

A momentum ``xi = (xi0, xi1)`` is a pair of cosine series with
coefficients ``phi_n`` and ``psi_n``.  Everything here is driven by the
scalar switching function

    zeta(t) = psi_0 + phi_0 t + sum_{n>=1} (psi_n cos nt + phi_n / n sin nt),

whose absolute value integrates to the support function of the set
reachable from rest in time ``T``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .even_field import (
    TWO_PI,
    CircleGrid,
    EvenFourier,
    GridState,
    Problem,
    StatePair,
    cosine_coefficients,
    cumulative_trapezoid,
    split_even_odd,
)

ROOT_TOL = 1e-12
SAMPLES_PER_PERIOD = 32


class DegenerateMomentumError(ValueError):
    """The switching function vanishes identically."""


@dataclass(frozen=True)
class Momentum:
    xi0: EvenFourier
    xi1: EvenFourier

    @classmethod
    def from_dicts(cls, phi: dict[int, float] | None = None,
                   psi: dict[int, float] | None = None) -> "Momentum":
        return cls(EvenFourier.from_dict(phi or {}), EvenFourier.from_dict(psi or {}))

    @property
    def degree(self) -> int:
        return max(self.xi0.degree, self.xi1.degree)

    @property
    def phi(self) -> np.ndarray:
        return self.xi0.padded(self.degree)

    @property
    def psi(self) -> np.ndarray:
        return self.xi1.padded(self.degree)

    def orthogonal_to(self, problem: Problem) -> bool:
        """Whether ``xi`` annihilates the terminal manifold of ``problem``."""
        if self.phi[0] != 0.0:
            return False
        return Problem(problem) is Problem.STOP or self.psi[0] == 0.0

    def __add__(self, other: "Momentum") -> "Momentum":
        return Momentum(self.xi0 + other.xi0, self.xi1 + other.xi1)

    def __mul__(self, scale: float) -> "Momentum":
        return Momentum(self.xi0 * scale, self.xi1 * scale)

    __rmul__ = __mul__


def _modes(xi: Momentum):
    n = np.arange(xi.degree + 1, dtype=float)
    return n[1:], xi.phi, xi.psi


def zeta(xi: Momentum, t):
    """Switching function at time(s) ``t``, in closed form."""
    t = np.asarray(t, dtype=float)
    n, phi, psi = _modes(xi)
    nt = np.multiply.outer(t, n)
    osc = np.cos(nt) @ psi[1:] + np.sin(nt) @ (phi[1:] / n)
    return psi[0] + phi[0] * t + osc


def zeta_primitive(xi: Momentum, t):
    """An antiderivative of :func:`zeta`."""
    t = np.asarray(t, dtype=float)
    n, phi, psi = _modes(xi)
    nt = np.multiply.outer(t, n)
    osc = np.sin(nt) @ (psi[1:] / n) - np.cos(nt) @ (phi[1:] / n**2)
    return psi[0] * t + 0.5 * phi[0] * t * t + osc


def zeta_roots(xi: Momentum, T: float) -> np.ndarray:
    """Sign changes of ``zeta`` on ``[0, T]``, bisected to ``ROOT_TOL``.

    Sign changes are bracketed on a uniform scan with
    ``SAMPLES_PER_PERIOD`` points per period of the highest harmonic.
    Samples that are exactly zero are returned as roots.
    """
    if T <= 0:
        return np.empty(0)
    h = TWO_PI / (SAMPLES_PER_PERIOD * max(xi.degree, 1))
    n_int = max(int(np.ceil(T / h)), 1)
    ts = np.linspace(0.0, T, n_int + 1)
    zs = zeta(xi, ts)
    exact = ts[zs == 0.0]
    lo_idx = np.flatnonzero(zs[:-1] * zs[1:] < 0.0)
    a, b = ts[lo_idx].copy(), ts[lo_idx + 1].copy()
    za = zs[lo_idx].copy()
    while a.size and np.max(b - a) > ROOT_TOL:
        mid = 0.5 * (a + b)
        zm = zeta(xi, mid)
        left = za * zm <= 0.0
        b = np.where(left, mid, b)
        a = np.where(left, a, mid)
        za = np.where(left, za, zm)
    return np.sort(np.concatenate([exact, 0.5 * (a + b)]))


def support_D(xi: Momentum, T: float) -> float:
    """Support function of the reachable set at horizon ``T``.

    Integrates ``|zeta|`` exactly between consecutive sign changes using
    the closed-form primitive, so the only error is the root location.
    """
    if T < 0:
        raise ValueError(f"horizon must be non-negative, got {T}")
    if T == 0:
        return 0.0
    knots = np.concatenate([[0.0], zeta_roots(xi, T), [float(T)]])
    prim = zeta_primitive(xi, knots)
    return float(np.sum(np.abs(np.diff(prim))))


def support_Omega(xi: Momentum) -> float:
    """Period average of ``|zeta|``, the support function of the limit set."""
    if xi.phi[0] != 0.0:
        raise ValueError("phi_0 must vanish: zeta is not periodic otherwise")
    return support_D(xi, TWO_PI) / TWO_PI


def steepest_state(xi: Momentum, T: float, m: int) -> GridState:
    """State on the boundary of the scaled limit set selected by ``xi``.

    ``f1 = T * even(sign zeta)`` and ``f0 = -T * int_0^x odd(sign zeta)``,
    sampled on ``m`` points.  Isolated zeros of ``zeta`` get sign 0.
    """
    if xi.phi[0] != 0.0:
        raise ValueError("phi_0 must vanish: zeta is not periodic otherwise")
    if not (np.any(xi.phi) or np.any(xi.psi)):
        raise DegenerateMomentumError("zeta vanishes identically")
    if T < 0:
        raise ValueError(f"horizon must be non-negative, got {T}")
    z = zeta(xi, TWO_PI * np.arange(m) / m)
    # round-off at a node sitting on a root must not pick a side
    floor = 1e-12 * float(np.sum(np.abs(xi.phi)) + np.sum(np.abs(xi.psi)))
    s = CircleGrid(np.where(np.abs(z) <= floor, 0.0, np.sign(z)))
    even, odd = split_even_odd(s)
    f0 = -T * cumulative_trapezoid(odd.values, s.step)
    return GridState(CircleGrid(f0), CircleGrid(T * even.values))


def pairing_weights(n_max: int) -> np.ndarray:
    """Weights of the normalized pairing ``(1/2pi) int (a b)`` on cosines."""
    w = np.full(n_max + 1, 0.5)
    w[0] = 1.0
    return w


def pairing(xi: Momentum, f: StatePair | GridState) -> float:
    """``sum_n w_n (phi_n a_n + psi_n b_n)`` with ``a, b`` the cosine
    coefficients of ``f0, f1``."""
    n_max = xi.degree
    if isinstance(f, GridState):
        a = cosine_coefficients(f.f0, n_max)
        b = cosine_coefficients(f.f1, n_max)
    else:
        a = f.f0.padded(max(n_max, f.degree))[: n_max + 1]
        b = f.f1.padded(max(n_max, f.degree))[: n_max + 1]
    w = pairing_weights(n_max)
    return float(np.sum(w * (xi.phi * a + xi.psi * b)))


def dry_friction_control(g: CircleGrid) -> float:
    """``-sign g(0)``; zero on the switching surface.

    ``g(0) = f1(0)`` since ``f0'`` is odd.  The value inside ``[-1, 1]``
    used while sliding is chosen by the friction solver, not here.
    """
    return -float(np.sign(g.values[0]))
