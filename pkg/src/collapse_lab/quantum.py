"""Quantum states, observables and projective measurement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DegenerateObservable,
    DimMismatch,
    IndexOutOfRange,
    InvalidDistribution,
    InvalidState,
)

TAU_TR = 1e-10
TAU_PSD = 1e-10
PROB_FLOOR = 1e-12
PROB_SUM_TOL = 1e-10


class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace operator.

    Validation happens once, here; every operation downstream trusts the
    invariants.  Slightly negative eigenvalues (down to ``-TAU_PSD``) are
    accepted as floating-point noise and left untouched.
    """

    __slots__ = ("matrix", "_eigenvalues")

    def __init__(self, matrix, *, name="state"):
        try:
            m = linalg.check_hermitian(matrix, name)
        except ValueError as exc:
            raise InvalidState(str(exc)) from exc
        tr = np.trace(m).real
        if abs(tr - 1.0) > TAU_TR:
            raise InvalidState(f"{name} has trace {tr:.12g}, expected 1")
        w = np.linalg.eigvalsh(m)
        if w[0] < -TAU_PSD:
            raise InvalidState(f"{name} is not positive semidefinite (min eigenvalue {w[0]:.3e})")
        m.setflags(write=False)
        self.matrix = m
        self._eigenvalues = w

    @classmethod
    def from_vector(cls, psi):
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, d: int):
        return cls(np.eye(d) / d)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._eigenvalues

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def expectation(self, op) -> float:
        return float(np.real(np.trace(self.matrix @ np.asarray(op))))

    def in_basis(self, basis: np.ndarray) -> np.ndarray:
        """Matrix elements ``<b_k| rho |b_l>`` for the columns of ``basis``."""
        return basis.conj().T @ self.matrix @ basis

    def __array__(self, dtype=None, copy=None):
        return np.array(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


class Observable:
    """Non-degenerate Hermitian observable together with its spectral decomposition.

    Outcome ``n`` is the n-th eigenvalue in ascending order; its eigenvector is
    ``basis[:, n]``.
    """

    __slots__ = ("matrix", "spectral")

    def __init__(self, matrix, *, name="observable"):
        spectral = linalg.eigh(matrix)
        if spectral.degenerate:
            raise DegenerateObservable(
                f"degenerate observable {name} (min eigenvalue gap {spectral.min_gap():.3e})"
            )
        m = linalg.check_hermitian(matrix, name)
        m.setflags(write=False)
        self.matrix = m
        self.spectral = spectral

    @classmethod
    def from_basis(cls, basis, labels):
        """Build ``sum_n labels[n] |b_n><b_n|`` from orthonormal columns ``basis``."""
        basis = np.asarray(basis, dtype=complex)
        labels = np.asarray(labels, dtype=float)
        return cls((basis * labels) @ basis.conj().T)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def labels(self) -> np.ndarray:
        return self.spectral.eigenvalues

    @property
    def basis(self) -> np.ndarray:
        return self.spectral.eigenvectors

    def projector(self, n: int) -> np.ndarray:
        _check_index(n, self.dim)
        v = self.basis[:, n]
        return np.outer(v, v.conj())

    def __repr__(self):
        return f"Observable(labels={np.array2string(self.labels, precision=6)})"


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probability vector over the outcome labels of an observable."""

    labels: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if labels.shape != probs.shape or probs.ndim != 1:
            raise InvalidDistribution("labels and probs must be 1-d vectors of equal length")
        if np.any(probs < -PROB_FLOOR):
            raise InvalidDistribution(f"negative probability {probs.min():.3e}")
        if np.any(probs < 0):
            probs = np.clip(probs, 0.0, None)
            probs = probs / probs.sum()
        if abs(probs.sum() - 1.0) > PROB_SUM_TOL:
            raise InvalidDistribution(f"probabilities sum to {probs.sum():.12g}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)

    def mean(self) -> float:
        return float(self.probs @ self.labels)

    def variance(self) -> float:
        mu = self.mean()
        return float(self.probs @ (self.labels - mu) ** 2)

    def as_dict(self) -> dict:
        return {float(k): float(v) for k, v in zip(self.labels, self.probs)}


def _check_index(n, d):
    if not 0 <= n < d:
        raise IndexOutOfRange(f"outcome index {n} outside [0, {d})")


def check_dims(*objs):
    dims = {o.dim if hasattr(o, "dim") else np.shape(o)[0] for o in objs}
    if len(dims) != 1:
        raise DimMismatch(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def born_probabilities(rho: DensityMatrix, basis: np.ndarray) -> np.ndarray:
    """Diagonal ``<b_n|rho|b_n>`` for the columns of ``basis``; imaginary noise dropped."""
    return np.real(np.einsum("in,ij,jn->n", basis.conj(), rho.matrix, basis))


def born_distribution(rho: DensityMatrix, X: Observable) -> OutcomeDistribution:
    check_dims(rho, X)
    return OutcomeDistribution(X.labels, born_probabilities(rho, X.basis))


def collapse(X: Observable, n: int) -> DensityMatrix:
    """Post-measurement state ``|x_n><x_n|`` for outcome index ``n``."""
    return DensityMatrix(X.projector(n))


def dephase(rho: DensityMatrix, X: Observable) -> DensityMatrix:
    """Incoherent ensemble of collapsed states, ``sum_n P(x_n) |x_n><x_n|``."""
    check_dims(rho, X)
    v = X.basis
    p = born_probabilities(rho, v)
    return DensityMatrix((v * p) @ v.conj().T)


def evolve(rho: DensityMatrix, hamiltonian, t: float) -> DensityMatrix:
    """Unitary evolution ``U rho U^dagger`` with ``U = exp(-i H t)``."""
    h = linalg.check_hermitian(hamiltonian, "hamiltonian")
    check_dims(rho, h)
    if not np.isfinite(t):
        raise ValueError("evolution time must be finite")
    if t == 0:
        return rho
    u = linalg.unitary_exp(h, t)
    return DensityMatrix(u @ rho.matrix @ u.conj().T)


@dataclass(frozen=True)
class CollapseCheck:
    diag_deficit: float
    max_offdiag: float
    trace_dist_to_projector: float
    passes_bound: bool


def verify_cmo_implies_collapse(
    rho_prime: DensityMatrix, X: Observable, n: int, delta: float, atol: float = 1e-12
) -> CollapseCheck:
    """Check that near-certain repetition of outcome ``n`` forces a near-projector state.

    For a PSD matrix, ``|rho_nk|^2 <= rho_nn * rho_kk``.  If the deficit
    ``1 - rho_nn`` is at most ``delta`` then every off-diagonal element in row
    ``n`` is bounded by ``sqrt(delta)`` and the trace-norm distance to
    ``|x_n><x_n|`` by ``2 sqrt(delta) + delta``.  ``passes_bound`` reports
    whether all three conditions hold, each with absolute slack ``atol`` for
    rounding noise.

    Rank-one states saturate the off-diagonal bound, and ``1 - rho_nn`` is
    only known to a few ulps, so the square roots are taken of ``delta``
    plus that rounding allowance rather than of ``delta`` alone.
    """
    check_dims(rho_prime, X)
    _check_index(n, X.dim)
    if delta < 0:
        raise ValueError("delta must be non-negative")
    r = rho_prime.in_basis(X.basis)
    deficit = float(1.0 - r[n, n].real)
    row = np.delete(np.abs(r[n]), n)
    max_off = float(row.max()) if row.size else 0.0
    dist = linalg.trace_norm(rho_prime.matrix - X.projector(n))
    root = np.sqrt(delta + 16 * X.dim * np.finfo(float).eps)
    passes = (
        deficit <= delta + atol
        and max_off <= root + atol
        and dist <= 2 * root + delta + atol
    )
    return CollapseCheck(deficit, max_off, dist, bool(passes))
