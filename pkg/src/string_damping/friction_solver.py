"""Exact motion of the string under dry-friction feedback.

Along each characteristic ``x + t = const`` the traveling wave ``g`` is
constant except when the characteristic sweeps through the load point,
once per period.  The feedback ``u = -sign g(0, t)`` then reduces to one
scalar inclusion per crossing,

    phi + v / 2 = G,    v in sign(phi),

and the next crossing of the same characteristic sees ``G - v``.  No
time stepping is involved: a grid of ``m`` characteristics is advanced
one period at a time with array arithmetic.

Time is discretized on the same lattice as space, ``t_n = n * 2*pi/m``.
Flat index ``n = p*m + c`` is the ``p``-th crossing of the
characteristic that started at grid point ``c``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .even_field import TWO_PI, CircleGrid, Problem, rho_profiles
from .records import TrajectoryRecord

INTRA_PERIOD_SAMPLES = 8


class HorizonError(ValueError):
    """Requested time lies beyond the computed horizon."""


def solve_scalar_inclusion(Gval):
    """Solve ``phi + v/2 = G`` with ``v`` in the multivalued sign of ``phi``.

    ``|G| > 1/2`` gives ``phi = G -+ 1/2`` and ``v = +-1``; otherwise the
    point slides: ``phi = 0`` and ``v = 2G``.  Works elementwise on arrays.
    """
    G = np.asarray(Gval, dtype=float)
    up = G > 0.5
    down = G < -0.5
    phi = np.where(up, G - 0.5, np.where(down, G + 0.5, 0.0))
    v = np.where(up, 1.0, np.where(down, -1.0, 2.0 * G))
    if phi.ndim == 0:
        return float(phi), float(v)
    return phi, v


class CharacteristicHistory(NamedTuple):
    phi: np.ndarray
    v: np.ndarray
    G: np.ndarray


def evolve_characteristic(G0: float, k: int) -> CharacteristicHistory:
    """Crossings ``0..k`` of one characteristic entering with value ``G0``."""
    if k < 0:
        raise ValueError(f"period count must be non-negative, got {k}")
    G = np.empty(k + 1)
    phi = np.empty(k + 1)
    v = np.empty(k + 1)
    G[0] = G0
    for j in range(k + 1):
        phi[j], v[j] = solve_scalar_inclusion(G[j])
        if j < k:
            G[j + 1] = G[j] - v[j]
    return CharacteristicHistory(phi, v, G)


def horizon_steps(T: float, m: int) -> int:
    """Number of lattice steps in ``[0, T]``, tolerant to round-off."""
    if T < 0:
        raise ValueError(f"horizon must be non-negative, got {T}")
    return int(np.floor(T * m / TWO_PI + 1e-9))


@dataclass(frozen=True)
class SlidingSignal:
    """Load-point trace ``phi``, sign selection ``v`` and incoming values.

    ``incoming[p, c]`` is the value characteristic ``c`` carries into its
    ``p``-th crossing; row ``p`` of ``phi`` and ``v`` solves the inclusion
    for it.  ``incoming`` has one more row than ``phi``: the values after
    the last solved crossing.
    """

    phi: np.ndarray
    v: np.ndarray
    incoming: np.ndarray
    steps: int

    @property
    def m(self) -> int:
        return self.phi.shape[1]

    @property
    def periods(self) -> int:
        return self.phi.shape[0]

    @property
    def step(self) -> float:
        return TWO_PI / self.m

    @property
    def horizon(self) -> float:
        return self.steps * self.step

    @property
    def rhs(self) -> np.ndarray:
        return self.incoming[:-1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.step

    @property
    def phi_t(self) -> np.ndarray:
        return self.phi.ravel()[: self.steps + 1]

    @property
    def v_t(self) -> np.ndarray:
        return self.v.ravel()[: self.steps + 1]


def solve_phi(G: CircleGrid, T: float) -> SlidingSignal:
    """Run the crossing recursion for every grid characteristic up to ``T``.

    Characteristics are independent; each period is one vectorized
    inclusion solve over all of them.
    """
    m = G.m
    steps = horizon_steps(T, m)
    periods = steps // m + 1
    incoming = np.empty((periods + 1, m))
    phi = np.empty((periods, m))
    v = np.empty((periods, m))
    incoming[0] = G.values
    for p in range(periods):
        phi[p], v[p] = solve_scalar_inclusion(incoming[p])
        incoming[p + 1] = incoming[p] - v[p]
    return SlidingSignal(phi, v, incoming, steps)


def _snap(value: float, step: float) -> int:
    return int(np.rint(value / step))


def profile_from_history(incoming: np.ndarray, nt: int, at_load: float) -> np.ndarray:
    """Profile ``g(x_i, t_nt)`` from per-characteristic incoming values.

    The point ``x_i`` at time ``t_nt`` lies on characteristic
    ``c = (i + nt) mod m`` which has completed ``(i + nt) // m`` crossings
    strictly before ``t_nt``.  Grid point 0 sits on the load itself; its
    value is supplied by the caller as ``at_load``.
    """
    m = incoming.shape[1]
    w = np.arange(m) + nt
    out = incoming[w // m, w % m]
    out[0] = at_load
    return out


def profile(sig: SlidingSignal, t: float, at_load: str = "mean") -> CircleGrid:
    """Full profile ``g(., t)``; ``t`` is snapped to the time lattice.

    At the load point the profile jumps by ``-v``.  ``at_load="mean"``
    stores the midpoint ``phi(t)``; ``"incoming"`` stores the value on
    the arriving side, which is the right datum to restart the solver
    from time ``t``.
    """
    nt = _snap(t, sig.step)
    if nt < 0 or nt > sig.steps:
        raise HorizonError(f"t={t} outside [0, {sig.horizon}]")
    p, c = divmod(nt, sig.m)
    if at_load == "mean":
        load = sig.incoming[p, c] - 0.5 * sig.v[p, c]
    elif at_load == "incoming":
        load = sig.incoming[p, c]
    else:
        raise ValueError(f"at_load must be 'mean' or 'incoming', got {at_load!r}")
    return CircleGrid(profile_from_history(sig.incoming, nt, load))


def field_at(G: CircleGrid, sig: SlidingSignal, z: float, t: float) -> float:
    """``g(z, t) = G(z + t) - sum of v over past crossings``.

    ``z`` and ``t`` are snapped to the nearest lattice points.  A crossing
    at the current instant (``z = 0``) counts with weight 1/2, so
    ``field_at(G, sig, 0, t) == phi(t)``; a crossing at time 0 with
    ``t > 0`` counts fully.
    """
    if G.m != sig.m:
        raise ValueError("grid and signal sizes differ")
    h = sig.step
    nt = _snap(t, h)
    if nt < 0 or nt > sig.steps:
        raise HorizonError(f"t={t} outside [0, {sig.horizon}]")
    iz = _snap(z % TWO_PI, h) % sig.m
    w = iz + nt
    k, c = divmod(w, sig.m)
    if iz == 0:
        return float(sig.incoming[k, c] - 0.5 * sig.v[k, c])
    return float(sig.incoming[k, c])


def sample_steps(steps: int, m: int, per_period: int = INTRA_PERIOD_SAMPLES) -> np.ndarray:
    """Lattice steps at period boundaries plus ``per_period`` interior
    samples, always including the final step."""
    offsets = np.unique(np.rint(np.arange(per_period + 1) * m / (per_period + 1)).astype(int))
    base = np.arange(steps // m + 1)[:, None] * m
    s = (base + offsets[None, :]).ravel()
    s = s[s <= steps]
    return np.unique(np.append(s, steps))


def record_from_history(incoming: np.ndarray, load_control: np.ndarray, steps: int,
                        problem: Problem, sample_at: np.ndarray | None = None,
                        keep_profiles: bool = False) -> TrajectoryRecord:
    """Assemble a :class:`TrajectoryRecord` for any applied control.

    ``load_control`` is the flat control sequence ``u_n`` at lattice times.
    Profiles for ``rho`` carry the incoming value at the load point (a
    single point does not affect a sup norm over the circle, and this is
    the value a restart would use); ``phi0`` is the midpoint value
    ``incoming + u/2``.
    """
    m = incoming.shape[1]
    if sample_at is None:
        sample_at = sample_steps(steps, m)
    sample_at = np.asarray(sample_at, dtype=int)
    profiles = np.empty((sample_at.size, m))
    phi0 = np.empty(sample_at.size)
    for row, nt in enumerate(sample_at):
        p, c = divmod(int(nt), m)
        profiles[row] = profile_from_history(incoming, int(nt), incoming[p, c])
        phi0[row] = incoming[p, c] + 0.5 * load_control[nt]
    return TrajectoryRecord(
        times=sample_at * (TWO_PI / m),
        rho_stop=rho_profiles(profiles, Problem.STOP),
        rho_damp=rho_profiles(profiles, Problem.DAMP),
        u=load_control[sample_at],
        phi0=phi0,
        problem=problem,
        profiles=profiles if keep_profiles else None,
    )


def trajectory_rho(G: CircleGrid, T: float, problem: Problem = Problem.STOP,
                   sample_at: np.ndarray | None = None,
                   keep_profiles: bool = False) -> TrajectoryRecord:
    """Evolve under dry friction and record ``rho`` and the realized load.

    The realized control is ``u = -v``.
    """
    sig = solve_phi(G, T)
    u = 0.0 - sig.v.ravel()
    return record_from_history(sig.incoming, u, sig.steps, Problem(problem),
                               sample_at, keep_profiles)
