"""Regular time grid and projection of event sequences onto it."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DataError

# Relative slack absorbing float noise in t/delta ratios (e.g. 0.235/0.01).
_REL_EPS = 1e-9


@dataclass(frozen=True)
class DiscreteGrid:
    """Grid of stepsize delta covering [0, T] with G = T/delta intervals.

    T must be an integer multiple of delta (within 1e-9 relative tolerance).
    L = floor(W / delta) is the number of lag points on the kernel support;
    the grid refuses configurations with L = 0.
    """

    delta: float
    T: float
    W: float

    def __post_init__(self):
        if self.delta <= 0.0 or self.T <= 0.0 or self.W <= 0.0:
            raise ConfigurationError(
                f"delta, T, W must be positive (got {self.delta}, {self.T}, {self.W})"
            )
        G = round(self.T / self.delta)
        if G < 1 or abs(G * self.delta - self.T) > _REL_EPS * max(self.T, 1.0):
            raise ConfigurationError(
                f"T={self.T} is not an integer multiple of delta={self.delta}"
            )
        if self.L < 1:
            raise ConfigurationError(
                f"support W={self.W} shorter than one grid step delta={self.delta}"
            )

    @property
    def G(self) -> int:
        return int(round(self.T / self.delta))

    @property
    def L(self) -> int:
        return int(np.floor(self.W / self.delta + _REL_EPS))

    @property
    def horizon(self) -> float:
        """G * delta; used in loss formulas so both loss routes agree exactly."""
        return self.G * self.delta


@dataclass
class DiscretizedCounts:
    """Per-process event counts on the grid, stored sparsely.

    ``bin_index[i]`` holds the sorted occupied bin indices of process i and
    ``bin_count[i]`` the (positive) number of events projected onto each.
    ``to_dense()`` materializes the full (p, G+1) integer array z.
    """

    G: int
    bin_index: list = field(default_factory=list)   # list of int64 arrays
    bin_count: list = field(default_factory=list)   # list of int64 arrays

    @property
    def p(self) -> int:
        return len(self.bin_index)

    @property
    def n_events(self) -> np.ndarray:
        return np.array([int(c.sum()) for c in self.bin_count], dtype=np.int64)

    @property
    def n_total(self) -> int:
        return int(self.n_events.sum())

    def to_dense(self) -> np.ndarray:
        z = np.zeros((self.p, self.G + 1), dtype=np.int64)
        for i, (idx, cnt) in enumerate(zip(self.bin_index, self.bin_count)):
            z[i, idx] = cnt
        return z

    @classmethod
    def from_dense(cls, z: np.ndarray) -> "DiscretizedCounts":
        z = np.asarray(z)
        if z.ndim != 2:
            raise ConfigurationError("dense counts must be a (p, G+1) array")
        if np.any(z < 0):
            raise DataError("counts must be nonnegative")
        obj = cls(G=z.shape[1] - 1)
        for row in z:
            idx = np.flatnonzero(row)
            obj.bin_index.append(idx.astype(np.int64))
            obj.bin_count.append(row[idx].astype(np.int64))
        return obj


def project_times(timestamps: np.ndarray, grid: DiscreteGrid) -> np.ndarray:
    """Map timestamps to their nearest grid index; exact half-ties round up."""
    t = np.asarray(timestamps, dtype=float)
    tol = _REL_EPS * max(grid.T, 1.0)
    if t.size and (t.min() < -tol or t.max() > grid.T + tol):
        raise DataError(
            f"timestamps must lie in [0, T={grid.T}] "
            f"(got range [{t.min()}, {t.max()}])"
        )
    r = t / grid.delta
    s = np.floor(r + 0.5)
    # r + 0.5 can land a hair under the next integer when t/delta is an exact
    # decimal half; nudge those onto the round-half-up side.
    bump = (s + 0.5 - r) <= _REL_EPS * np.maximum(1.0, np.abs(r))
    s = np.where(bump, s + 1.0, s)
    return np.clip(s.astype(np.int64), 0, grid.G)


def project(events, grid: DiscreteGrid) -> DiscretizedCounts:
    """Aggregate each process's events into per-bin counts on the grid."""
    counts = DiscretizedCounts(G=grid.G)
    for times in events.events:
        s = project_times(times, grid)
        idx, cnt = np.unique(s, return_counts=True)
        counts.bin_index.append(idx.astype(np.int64))
        counts.bin_count.append(cnt.astype(np.int64))
    return counts


def dump_counts_csv(counts: DiscretizedCounts, path) -> None:
    """Debug dump of the nonzero count entries as (process, s, count) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["process", "s", "count"])
        for i in range(counts.p):
            for s, c in zip(counts.bin_index[i], counts.bin_count[i]):
                writer.writerow([i, int(s), int(c)])
