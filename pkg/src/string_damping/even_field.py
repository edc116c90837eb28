"""Even fields on the circle and the traveling-wave reduction.

The string state is a pair ``(f0, f1)`` of even functions on the torus
``[0, 2*pi)``.  Everything downstream works with the single function
``g = f0' + f1``, which the free wave equation transports rigidly.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


class Problem(str, enum.Enum):
    """Terminal manifold: constants with zero velocity, or all constants."""

    STOP = "stop"
    DAMP = "damp"


class ResolutionError(ValueError):
    """Grid too coarse to sample a cosine series without aliasing."""


def _frozen(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class EvenFourier:
    """Finite cosine series ``x -> sum_n coeffs[n] * cos(n x)``."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen(self.coeffs, "coeffs"))
        if self.coeffs.size == 0:
            object.__setattr__(self, "coeffs", _frozen([0.0], "coeffs"))

    @classmethod
    def zero(cls) -> "EvenFourier":
        return cls(np.zeros(1))

    @classmethod
    def from_dict(cls, terms: dict[int, float]) -> "EvenFourier":
        if not terms:
            return cls.zero()
        if min(terms) < 0:
            raise ValueError("cosine indices must be non-negative")
        coeffs = np.zeros(max(terms) + 1)
        for n, c in terms.items():
            coeffs[n] = c
        return cls(coeffs)

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.coeffs)
        return int(nz[-1]) if nz.size else 0

    def padded(self, n: int) -> np.ndarray:
        """Coefficients zero-padded (or checked) to length ``n + 1``."""
        if self.degree > n:
            raise ValueError(f"series degree {self.degree} exceeds {n}")
        out = np.zeros(n + 1)
        k = min(n + 1, self.coeffs.size)
        out[:k] = self.coeffs[:k]
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        n = np.arange(self.coeffs.size)
        return np.cos(np.multiply.outer(x, n)) @ self.coeffs

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        n = np.arange(self.coeffs.size)
        return np.sin(np.multiply.outer(x, n)) @ (-n * self.coeffs)

    def __add__(self, other: "EvenFourier") -> "EvenFourier":
        size = max(self.coeffs.size, other.coeffs.size)
        a = np.zeros(size)
        a[: self.coeffs.size] += self.coeffs
        a[: other.coeffs.size] += other.coeffs
        return EvenFourier(a)

    def __mul__(self, scale: float) -> "EvenFourier":
        return EvenFourier(self.coeffs * float(scale))

    __rmul__ = __mul__


@dataclass(frozen=True)
class StatePair:
    """Displacement ``f0`` and velocity ``f1`` as cosine series."""

    f0: EvenFourier
    f1: EvenFourier

    @property
    def degree(self) -> int:
        return max(self.f0.degree, self.f1.degree)


@dataclass(frozen=True)
class CircleGrid:
    """Samples ``values[j]`` at ``x_j = 2*pi*j/m`` with ``m`` even."""

    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values, "values")
        if vals.size < 2 or vals.size % 2:
            raise ValueError(f"grid size must be even and >= 2, got {vals.size}")
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return int(self.values.size)

    @property
    def step(self) -> float:
        return TWO_PI / self.m

    @property
    def x(self) -> np.ndarray:
        return TWO_PI * np.arange(self.m) / self.m

    @classmethod
    def sample(cls, func, m: int) -> "CircleGrid":
        return cls(func(TWO_PI * np.arange(m) / m))

    @classmethod
    def constant(cls, c: float, m: int) -> "CircleGrid":
        return cls(np.full(m, float(c)))

    def reflected(self) -> "CircleGrid":
        """Samples of ``x -> g(-x)``."""
        return CircleGrid(np.roll(self.values[::-1], 1))


@dataclass(frozen=True)
class GridState:
    """A state ``(f0, f1)`` sampled on a circle grid."""

    f0: CircleGrid
    f1: CircleGrid

    def traveling_wave(self) -> CircleGrid:
        """``g = f0' + f1`` with a periodic central difference for ``f0'``.

        Second-order accurate, so a trapezoid-built ``f0`` round-trips
        to ``O(m**-2)``.
        """
        f0 = self.f0.values
        df0 = (np.roll(f0, -1) - np.roll(f0, 1)) / (2.0 * self.f0.step)
        return CircleGrid(df0 + self.f1.values)


def to_traveling_wave(f: StatePair, m: int) -> CircleGrid:
    """Sample ``g = f0' + f1`` on an ``m``-point grid.

    The series are finite, so the samples are exact to round-off.  ``m``
    must leave a Nyquist margin: ``m >= 2 * degree + 2``.
    """
    if m < 2 or m % 2:
        raise ValueError(f"grid size must be even and >= 2, got {m}")
    if m < 2 * f.degree + 2:
        raise ResolutionError(
            f"grid size {m} too coarse for series degree {f.degree}; "
            f"need m >= {2 * f.degree + 2}"
        )
    x = TWO_PI * np.arange(m) / m
    return CircleGrid(f.f0.derivative(x) + f.f1(x))


def split_even_odd(g: CircleGrid) -> tuple[CircleGrid, CircleGrid]:
    mirrored = np.roll(g.values[::-1], 1)
    even = 0.5 * (g.values + mirrored)
    odd = g.values - even
    return CircleGrid(even), CircleGrid(odd)


def cumulative_trapezoid(values: np.ndarray, step: float) -> np.ndarray:
    """Running trapezoid integral starting at zero, same length as input."""
    out = np.empty_like(values, dtype=float)
    out[0] = 0.0
    out[1:] = np.cumsum(0.5 * step * (values[1:] + values[:-1]))
    return out


def reconstruct_state(g: CircleGrid) -> GridState:
    """Recover ``(f0, f1)`` from ``g`` with ``f0(0) = 0``."""
    even, odd = split_even_odd(g)
    f0 = cumulative_trapezoid(odd.values, g.step)
    return GridState(CircleGrid(f0), even)


def sup_norm(g: CircleGrid, problem: Problem = Problem.STOP) -> float:
    """Unnormalized ``sup |g + c|``, with ``c`` optimal for ``DAMP``."""
    problem = Problem(problem)
    v = g.values
    if problem is Problem.STOP:
        return float(np.max(np.abs(v)))
    return float(0.5 * (np.max(v) - np.min(v)))


def rho(g: CircleGrid, problem: Problem = Problem.STOP) -> float:
    """Distance functional ``2*pi * sup |g + c|``.

    For ``STOP`` the shift ``c`` is zero; for ``DAMP`` it is the midrange
    shift ``-(max + min) / 2``, which minimizes the sup norm.
    """
    return TWO_PI * sup_norm(g, problem)


def rho_profiles(values: np.ndarray, problem: Problem) -> np.ndarray:
    """Row-wise ``rho`` for a stack of profiles of shape ``(k, m)``."""
    problem = Problem(problem)
    if problem is Problem.STOP:
        return TWO_PI * np.max(np.abs(values), axis=-1)
    return TWO_PI * (0.5 * (np.max(values, axis=-1) - np.min(values, axis=-1)))


def cosine_coefficients(g: CircleGrid, n_max: int) -> np.ndarray:
    """Cosine coefficients ``c_0..c_n_max`` of the even part of ``g``.

    Discrete analysis on the grid; exact for cosine series of degree
    below ``m / 2``.
    """
    if n_max >= g.m // 2:
        raise ResolutionError(f"n_max={n_max} needs a grid of more than {2 * n_max} points")
    spectrum = np.fft.rfft(g.values).real / g.m
    out = 2.0 * spectrum[: n_max + 1]
    out[0] = spectrum[0]
    return out
