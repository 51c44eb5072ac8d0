"""Finite classical statistical systems with two outcome partitions and a permutation flow.

A configuration space ``{0, ..., N-1}`` carries a probability vector.  Two
labelings of the points play the role of the first (X) and second (Y)
measurement: the cell ``X_n`` collects all points whose X label is the n-th
smallest distinct value.  Time evolution is a piecewise-constant map from
``t >= 0`` to permutations of the points and is the identity at ``t = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroConditioningEvent

ZERO_EVENT = 1e-15


def _as_permutation(perm, n):
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise ValueError(f"not a permutation of {n} points: {perm.tolist()}")
    return perm


@dataclass(frozen=True)
class ClassicalSystem:
    distribution: np.ndarray
    partition_x: np.ndarray
    partition_y: np.ndarray
    # ((t_start, permutation), ...) with t_start ascending and the first entry at 0
    flow_pieces: tuple = ()

    def __post_init__(self):
        p = np.asarray(self.distribution, dtype=float)
        n = p.size
        if p.ndim != 1 or n == 0:
            raise ValueError("distribution must be a non-empty vector")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("distribution must be non-negative and sum to 1")
        px = np.asarray(self.partition_x, dtype=float)
        py = np.asarray(self.partition_y, dtype=float)
        if px.shape != (n,) or py.shape != (n,):
            raise ValueError("every point needs an X label and a Y label")
        pieces = [(0.0, np.arange(n))]
        for t0, perm in self.flow_pieces:
            if t0 < 0:
                raise ValueError("flow breakpoints must be non-negative")
            perm = _as_permutation(perm, n)
            if t0 == 0:
                if not np.array_equal(perm, np.arange(n)):
                    raise ValueError("the flow must be the identity at t = 0")
                continue
            pieces.append((float(t0), perm))
        pieces.sort(key=lambda piece: piece[0])
        if len({t0 for t0, _ in pieces}) != len(pieces):
            raise ValueError("duplicate flow breakpoints")
        object.__setattr__(self, "distribution", p)
        object.__setattr__(self, "partition_x", px)
        object.__setattr__(self, "partition_y", py)
        object.__setattr__(self, "flow_pieces", tuple(pieces))

    @property
    def size(self) -> int:
        return self.distribution.size

    @property
    def x_labels(self) -> np.ndarray:
        return np.unique(self.partition_x)

    @property
    def y_labels(self) -> np.ndarray:
        return np.unique(self.partition_y)

    def x_cells(self):
        return [self.partition_x == v for v in self.x_labels]

    def y_cells(self):
        return [self.partition_y == v for v in self.y_labels]

    def flow(self, t: float) -> np.ndarray:
        """Permutation active at time ``t``; point ``i`` is carried to ``flow(t)[i]``."""
        if t < 0:
            raise ValueError("flow is defined for t >= 0")
        perm = self.flow_pieces[0][1]
        for t0, p in self.flow_pieces:
            if t0 <= t:
                perm = p
        return perm

    def evolve_set(self, cell, t: float) -> np.ndarray:
        """Image of a boolean point set under the flow at time ``t``."""
        cell = np.asarray(cell, dtype=bool)
        out = np.zeros_like(cell)
        out[self.flow(t)[cell]] = True
        return out

    def prob(self, cell) -> float:
        return float(self.distribution[np.asarray(cell, dtype=bool)].sum())


def _mask(sys, points):
    points = np.asarray(points)
    if points.dtype == bool:
        if points.shape != (sys.size,):
            raise ValueError("boolean point set must cover the whole space")
        return points
    mask = np.zeros(sys.size, dtype=bool)
    mask[points.astype(np.int64)] = True
    return mask


def conditional_probability(sys: ClassicalSystem, A, B) -> float:
    """``P(A | B) = P(A and B) / P(B)``; point sets are index lists or boolean masks."""
    a, b = _mask(sys, A), _mask(sys, B)
    pb = sys.prob(b)
    if pb <= ZERO_EVENT:
        raise ZeroConditioningEvent("conditioning event has zero probability")
    return sys.prob(a & b) / pb


def _require_positive_cells(sys, cells, name):
    for v, cell in zip(getattr(sys, f"{name}_labels"), cells):
        if sys.prob(cell) <= ZERO_EVENT:
            raise ZeroConditioningEvent(f"{name.upper()} cell with label {v:g} has zero probability")


def conditional_matrix(sys: ClassicalSystem, t: float) -> np.ndarray:
    """``M[n, m] = P(X_m | X_n^(t))`` with ``X_n^(t)`` the evolved n-th X cell."""
    cells = sys.x_cells()
    d = len(cells)
    out = np.empty((d, d))
    for n, cell in enumerate(cells):
        moved = sys.evolve_set(cell, t)
        for m, target in enumerate(cells):
            out[n, m] = conditional_probability(sys, target, moved)
    return out


@dataclass(frozen=True)
class ClassicalCMOTable:
    t_grid: np.ndarray
    matrices: np.ndarray
    at_zero: np.ndarray


def classical_cmo_check(sys: ClassicalSystem, t_grid=()) -> ClassicalCMOTable:
    """Repeat-measurement conditionals along ``t_grid`` plus the ``t = 0`` matrix.

    With the identity flow at ``t = 0`` the zero-delay matrix is exactly the
    identity; a flow that stays the identity below a threshold keeps it there.
    """
    _require_positive_cells(sys, sys.x_cells(), "x")
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0) or np.any(np.diff(t) >= 0):
        raise ValueError("t_grid must be strictly positive and strictly descending")
    mats = np.array([conditional_matrix(sys, tk) for tk in t]).reshape(t.size, *(2 * [len(sys.x_labels)]))
    return ClassicalCMOTable(t, mats, conditional_matrix(sys, 0.0))


def _conditional_y(sys):
    xcells = sys.x_cells()
    _require_positive_cells(sys, xcells, "x")
    px = np.array([sys.prob(c) for c in xcells])
    cond = np.array([[conditional_probability(sys, yc, xc) for yc in sys.y_cells()] for xc in xcells])
    return px, cond


def total_probability_check(sys: ClassicalSystem) -> np.ndarray:
    """Residual ``P(Y_m) - sum_n P(X_n) P(Y_m | X_n)`` for every Y label."""
    px, cond = _conditional_y(sys)
    py = np.array([sys.prob(c) for c in sys.y_cells()])
    return py - px @ cond


@dataclass(frozen=True)
class VarianceDecomposition:
    lhs: float
    rhs: float
    residual: float


def total_variance_check(sys: ClassicalSystem) -> VarianceDecomposition:
    """Compare ``V[Y]`` with ``E_X[V[Y|X]] + V_X[E[Y|X]]``."""
    px, cond = _conditional_y(sys)
    y = sys.y_labels
    py = np.array([sys.prob(c) for c in sys.y_cells()])
    mean = py @ y
    lhs = float(py @ (y - mean) ** 2)
    cmean = cond @ y
    cvar = cond @ y**2 - cmean**2
    mean_of_cmean = px @ cmean
    rhs = float(px @ cvar + px @ (cmean - mean_of_cmean) ** 2)
    return VarianceDecomposition(lhs, rhs, lhs - rhs)


def random_system(rng, size: int, n_x: int | None = None, n_y: int | None = None) -> ClassicalSystem:
    """Random system with strictly positive weights and every label used at least once."""
    n_x = n_x or int(rng.integers(1, min(size, 6) + 1))
    n_y = n_y or int(rng.integers(1, min(size, 6) + 1))
    p = rng.random(size) + 0.05
    p /= p.sum()

    def labels(k):
        idx = np.concatenate([np.arange(k), rng.integers(0, k, size - k)])
        rng.shuffle(idx)
        return np.sort(rng.normal(size=k))[idx]

    return ClassicalSystem(p, labels(n_x), labels(n_y))
