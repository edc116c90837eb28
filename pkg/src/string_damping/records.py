"""Trajectory records and their CSV form."""
from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .even_field import Problem

CSV_HEADER = ("t", "rho_stop", "rho_damp", "u", "phi0")
SUMMARY_HEADER = ("rho0", "rhoT", "T", "rate", "degenerate")


@dataclass(frozen=True)
class TrajectoryRecord:
    """Sampled evolution of the distance functional and the applied load."""

    times: np.ndarray
    rho_stop: np.ndarray
    rho_damp: np.ndarray
    u: np.ndarray
    phi0: np.ndarray
    problem: Problem = Problem.STOP
    profiles: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        n = np.asarray(self.times).size
        for name in ("times", "rho_stop", "rho_damp", "u", "phi0"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({n},)")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "problem", Problem(self.problem))

    def __len__(self) -> int:
        return self.times.size

    @property
    def rho(self) -> np.ndarray:
        return self.rho_stop if self.problem is Problem.STOP else self.rho_damp

    def rate(self, problem: Problem | None = None) -> float:
        """``(rho(0) - rho(T)) / T`` between the first and last samples.

        Returns 0 for a zero horizon.
        """
        r = self.rho if problem is None else (
            self.rho_stop if Problem(problem) is Problem.STOP else self.rho_damp)
        span = self.times[-1] - self.times[0]
        if span <= 0:
            return 0.0
        return float((r[0] - r[-1]) / span)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in zip(self.times, self.rho_stop, self.rho_damp, self.u, self.phi0):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, problem: Problem = Problem.STOP) -> "TrajectoryRecord":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(rows[0]) != CSV_HEADER:
            raise ValueError(f"expected header {','.join(CSV_HEADER)}")
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, 5)
        return cls(*data.T, problem=problem)


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` via a temp file in the same directory and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def summary_csv(rho0: float, rhoT: float, T: float) -> str:
    degenerate = T <= 0 or (rho0 == 0.0 and rhoT == 0.0)
    rate = 0.0 if degenerate else (rho0 - rhoT) / T
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    w.writerow([repr(float(rho0)), repr(float(rhoT)), repr(float(T)), repr(float(rate)),
                "true" if degenerate else "false"])
    return buf.getvalue()
