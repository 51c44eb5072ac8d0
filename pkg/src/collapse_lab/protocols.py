"""Sequential two-measurement protocols and seeded measurement-record sampling."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import EmptyGrid
from .quantum import (
    DensityMatrix,
    Observable,
    OutcomeDistribution,
    _check_index,
    born_distribution,
    check_dims,
    evolve,
)

NOISE_FLOOR = 1e-14
DEFAULT_T_GRID = np.geomspace(1e-1, 1e-4, 16)


def overlap_matrix(X: Observable, Y: Observable) -> np.ndarray:
    """``T[n, m] = |<y_m|x_n>|^2``; row ``n`` is the distribution of Y after outcome x_n."""
    check_dims(X, Y)
    return np.abs(X.basis.conj().T @ Y.basis) ** 2


def conditional_second_distribution(X: Observable, Y: Observable, n: int) -> OutcomeDistribution:
    check_dims(X, Y)
    _check_index(n, X.dim)
    return OutcomeDistribution(Y.labels, overlap_matrix(X, Y)[n])


def post_measurement_distribution(rho: DensityMatrix, X: Observable, Y: Observable):
    """Distribution of Y after a prior X measurement, ``sum_n P(x_n) P'(y_m|x_n)``."""
    check_dims(rho, X, Y)
    px = born_distribution(rho, X).probs
    return OutcomeDistribution(Y.labels, px @ overlap_matrix(X, Y))


def direct_distribution(rho: DensityMatrix, Y: Observable) -> OutcomeDistribution:
    return born_distribution(rho, Y)


def total_probability_residual(rho: DensityMatrix, X: Observable, Y: Observable) -> np.ndarray:
    """``P(y_m) - P'(y_m)``: vanishes classically, not for coherent quantum states."""
    return direct_distribution(rho, Y).probs - post_measurement_distribution(rho, X, Y).probs


@dataclass(frozen=True)
class CMOProbe:
    """Repeat-measurement conditionals ``P^(t)(x_m|x_n)`` along a time grid.

    ``matrices[k, n, m]`` is the probability of outcome ``m`` at the second
    measurement given ``n`` at the first, after waiting ``t_grid[k]``.
    ``exponents[n, m]`` is the log-log slope fitted to each off-diagonal entry
    (NaN on the diagonal and where fewer than two points clear the noise floor).
    """

    t_grid: np.ndarray
    matrices: np.ndarray
    exponents: np.ndarray
    first_distribution: OutcomeDistribution


def fit_power_law(t, values, floor=NOISE_FLOOR) -> float:
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values >= floor
    if keep.sum() < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(t[keep]), np.log(values[keep]), 1)
    return float(slope)


def cmo_limit_probe(rho: DensityMatrix, X: Observable, hamiltonian, t_grid=None) -> CMOProbe:
    t = DEFAULT_T_GRID if t_grid is None else np.asarray(t_grid, dtype=float)
    if t.size == 0:
        raise EmptyGrid("t_grid is empty")
    if np.any(t <= 0) or np.any(np.diff(t) >= 0):
        raise ValueError("t_grid must be strictly positive and strictly descending")
    h = linalg.check_hermitian(hamiltonian, "hamiltonian")
    check_dims(rho, X, h)
    spectral = linalg.eigh(h)
    v = X.basis
    mats = np.empty((t.size, X.dim, X.dim))
    for k, tk in enumerate(t):
        u = linalg.unitary_exp(h, tk, spectral)
        # amplitude <x_m| U |x_n> stored at [n, m]
        mats[k] = np.abs(v.conj().T @ u @ v).T ** 2
    exps = np.full((X.dim, X.dim), np.nan)
    for n in range(X.dim):
        for m in range(X.dim):
            if n != m:
                exps[n, m] = fit_power_law(t, mats[:, n, m])
    return CMOProbe(t, mats, exps, born_distribution(rho, X))


# --- Monte Carlo measurement records -------------------------------------------------


@dataclass(frozen=True)
class MeasurementStep:
    observable: Observable
    wait_before: float = 0.0
    hamiltonian: np.ndarray | None = None

    def __post_init__(self):
        if self.wait_before < 0 or not np.isfinite(self.wait_before):
            raise ValueError("wait_before must be a finite non-negative time")
        if (self.wait_before > 0) != (self.hamiltonian is not None):
            raise ValueError("a hamiltonian is required exactly when wait_before > 0")
        if self.hamiltonian is not None:
            h = linalg.check_hermitian(self.hamiltonian, "hamiltonian")
            check_dims(self.observable, h)
            object.__setattr__(self, "hamiltonian", h)


@dataclass
class MeasurementRecord:
    """Sampled outcomes of a measurement sequence.

    ``outcomes[i, k]`` is the outcome index of shot ``i`` at step ``k``;
    ``labels[k]`` maps indices to outcome values for step ``k``.
    """

    outcomes: np.ndarray
    labels: list
    shots: int
    empirical_joint: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.empirical_joint:
            keys, counts = np.unique(self.outcomes, axis=0, return_counts=True)
            self.empirical_joint = {
                tuple(float(self.labels[k][j]) for k, j in enumerate(key)): int(c)
                for key, c in zip(keys, counts)
            }

    def marginal(self, step: int) -> np.ndarray:
        """Empirical outcome frequencies of one step, indexed like its observable's labels."""
        d = len(self.labels[step])
        return np.bincount(self.outcomes[:, step], minlength=d) / self.shots

    def pairs(self, step_a: int = 0, step_b: int = 1):
        """Outcome labels of two steps as ``(label_a, label_b)`` tuples, one per shot."""
        la, lb = self.labels[step_a], self.labels[step_b]
        return list(zip(la[self.outcomes[:, step_a]], lb[self.outcomes[:, step_b]]))


def _transition_tables(rho, steps):
    first = rho
    if steps[0].wait_before > 0:
        first = evolve(rho, steps[0].hamiltonian, steps[0].wait_before)
    initial = born_distribution(first, steps[0].observable).probs
    tables = []
    for prev, step in zip(steps, steps[1:]):
        basis = prev.observable.basis
        if step.wait_before > 0:
            basis = linalg.unitary_exp(step.hamiltonian, step.wait_before) @ basis
        # collapsed state n, evolved, measured on step.observable
        tables.append(np.abs(basis.conj().T @ step.observable.basis) ** 2)
    return initial, tables


def _cdf(p):
    c = np.cumsum(p, axis=-1)
    c = c / c[..., -1:]
    c[..., -1] = 1.0
    return c


def _uniforms(seed: int, start: int, stop: int, n_steps: int) -> np.ndarray:
    # shot i owns Philox counter blocks [i*B, (i+1)*B), four raw words per block
    blocks = -(-n_steps // 4)
    bitgen = np.random.Philox(key=seed)
    bitgen.advance(int(start) * blocks)
    raw = bitgen.random_raw((stop - start) * blocks * 4).reshape(stop - start, blocks * 4)
    return (raw[:, :n_steps] >> np.uint64(11)) * (1.0 / 2**53)


def _simulate(seed, start, stop, initial_cdf, table_cdfs):
    u = _uniforms(seed, start, stop, 1 + len(table_cdfs))
    out = np.empty(u.shape, dtype=np.int64)
    d0 = initial_cdf.size
    out[:, 0] = np.minimum(np.searchsorted(initial_cdf, u[:, 0], side="right"), d0 - 1)
    for k, cdf in enumerate(table_cdfs, start=1):
        rows = cdf[out[:, k - 1]]
        out[:, k] = np.minimum((rows <= u[:, k : k + 1]).sum(axis=1), cdf.shape[1] - 1)
    return out


def default_workers() -> int:
    env = os.environ.get("COLLAPSE_LAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sample_records(
    rho: DensityMatrix,
    steps,
    seed: int,
    shots: int,
    workers: int | None = None,
) -> MeasurementRecord:
    """Simulate ``shots`` runs of a measurement sequence.

    Each shot evolves for ``wait_before`` under the step's Hamiltonian, draws
    an outcome from the Born distribution by inverse CDF, collapses onto the
    corresponding eigenvector and moves to the next step.  Because the state
    after a collapse is one of finitely many projectors, the per-step outcome
    distributions are tabulated once and shots are simulated in bulk.

    Shot ``i`` draws its uniforms from its own Philox counter range keyed by
    ``seed``, so the record does not depend on how shots are sharded across
    ``workers`` threads.
    """
    steps = list(steps)
    if not steps:
        raise ValueError("steps must be non-empty")
    if shots < 1:
        raise ValueError("shots must be positive")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    check_dims(rho, *(s.observable for s in steps))
    initial, tables = _transition_tables(rho, steps)
    initial_cdf = _cdf(initial)
    table_cdfs = [_cdf(t) for t in tables]

    workers = default_workers() if workers is None else max(1, int(workers))
    workers = min(workers, max(1, shots // 10_000))
    bounds = np.linspace(0, shots, workers + 1).astype(int)
    if workers == 1:
        outcomes = _simulate(seed, 0, shots, initial_cdf, table_cdfs)
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = pool.map(
                lambda ab: _simulate(seed, ab[0], ab[1], initial_cdf, table_cdfs),
                zip(bounds[:-1], bounds[1:]),
            )
            outcomes = np.concatenate(list(parts))
    labels = [s.observable.labels for s in steps]
    return MeasurementRecord(outcomes, labels, shots)
