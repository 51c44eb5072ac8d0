"""Certifying and quantifying coherence through the statistics of a prior measurement.

A first measurement of X replaces ``rho`` by its dephased ensemble ``sigma``.
Any second observable Y then sees ``sigma`` instead of ``rho``; the
differences in its outcome probabilities and its variance are what a
classical system can never show.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import linalg
from .errors import InvalidParams, UnsupportedDimension
from .protocols import overlap_matrix, total_probability_residual
from .quantum import DensityMatrix, Observable, born_distribution, check_dims, dephase

GAP_THRESHOLD = 1e-8
DEFAULT_GRID = (181, 91)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# --- qubit parametrisation ------------------------------------------------------------


@dataclass(frozen=True)
class QubitParams:
    """Qubit state of populations ``(1-p, p)`` with coherence ``gamma``, and a second
    observable tilted by ``theta`` from the first and rotated by ``phi`` about it."""

    p: float
    gamma: complex = 0.0
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InvalidParams(f"p = {self.p} outside [0, 1]")
        if abs(self.gamma) > 1.0 + 1e-12:
            raise InvalidParams(f"|gamma| = {abs(self.gamma)} exceeds 1")
        if not (np.isfinite(self.theta) and np.isfinite(self.phi)):
            raise InvalidParams("angles must be finite")
        object.__setattr__(self, "gamma", complex(self.gamma))


def qubit_state(p: float, gamma: complex = 0.0) -> DensityMatrix:
    QubitParams(p, gamma)
    c = math.sqrt(p * (1.0 - p)) * complex(gamma)
    return DensityMatrix([[1.0 - p, c], [c.conjugate(), p]])


def qubit_x() -> Observable:
    return Observable(np.diag([-1.0, 1.0]))


def qubit_y_matrix(theta: float, phi: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[-c, s * np.exp(-1j * phi)], [s * np.exp(1j * phi), c]])


def qubit_y(theta: float, phi: float) -> Observable:
    return Observable(qubit_y_matrix(theta, phi))


@dataclass(frozen=True)
class QubitOracle:
    """Closed-form qubit predictions; outcome pairs are ordered ``(y = -1, y = +1)``."""

    P_direct: tuple
    P_post: tuple
    residual: float
    trace_distance: float
    variance_gap_at_optimum: float


def qubit_oracle(params: QubitParams) -> QubitOracle:
    p, g, th, ph = params.p, params.gamma, params.theta, params.phi
    post_plus = (1.0 + (2.0 * p - 1.0) * math.cos(th)) / 2.0
    interference = (g * np.exp(1j * ph)).real * math.sqrt(p * (1.0 - p)) * math.sin(th)
    return QubitOracle(
        P_direct=(1.0 - post_plus - interference, post_plus + interference),
        P_post=(1.0 - post_plus, post_plus),
        residual=interference,
        trace_distance=2.0 * abs(g) * math.sqrt(p * (1.0 - p)),
        variance_gap_at_optimum=4.0 * abs(g) ** 2 * p * (1.0 - p),
    )


# --- general-d quantities -------------------------------------------------------------


@dataclass(frozen=True)
class VarianceGap:
    """``lhs`` is the collapse-side variance built from the conditional decomposition,
    ``rhs`` the variance of Y on the undisturbed state, ``gap = lhs - rhs``."""

    lhs: float
    rhs: float
    gap: float


def _quantum_variance(rho: DensityMatrix, Y: Observable) -> float:
    y = Y.matrix
    mean = rho.expectation(y)
    return rho.expectation(y @ y) - mean**2


def variance_gap(rho: DensityMatrix, X: Observable, Y: Observable) -> VarianceGap:
    check_dims(rho, X, Y)
    px = born_distribution(rho, X).probs
    cond = overlap_matrix(X, Y)
    y = Y.labels
    cmean = cond @ y
    cvar = cond @ y**2 - cmean**2
    lhs = float(px @ cvar + px @ (cmean - px @ cmean) ** 2)
    bridge = _quantum_variance(dephase(rho, X), Y)
    scale = max(1.0, float(np.max(y**2)))
    if abs(lhs - bridge) > 1e-10 * scale:
        raise ArithmeticError(
            f"conditional variance decomposition {lhs!r} disagrees with dephased variance {bridge!r}"
        )
    rhs = _quantum_variance(rho, Y)
    return VarianceGap(lhs, rhs, lhs - rhs)


def trace_distance_to_dephased(rho: DensityMatrix, X: Observable) -> float:
    return linalg.trace_norm(rho.matrix - dephase(rho, X).matrix)


def offdiagonal_magnitude(rho: DensityMatrix, X: Observable) -> float:
    check_dims(rho, X)
    r = np.abs(rho.in_basis(X.basis))
    np.fill_diagonal(r, 0.0)
    return float(r.max())


def is_incoherent(rho: DensityMatrix, X: Observable, tol: float = 1e-12) -> bool:
    return offdiagonal_magnitude(rho, X) <= tol


def witness_observable(rho: DensityMatrix, X: Observable) -> Observable:
    """Second observable whose outcome statistics change most under a prior X measurement.

    Measuring in the eigenbasis of ``rho - sigma`` turns each probability
    difference into an eigenvalue of ``rho - sigma``, so the summed absolute
    violation of the law of total probability equals the trace distance.
    Outcome labels are ``-(d-1), -(d-3), ..., d-1``, i.e. ``-1, +1`` for a qubit.
    """
    delta = linalg.eigh(rho.matrix - dephase(rho, X).matrix)
    labels = 2.0 * np.arange(X.dim) - (X.dim - 1)
    return Observable.from_basis(delta.eigenvectors, labels)


# --- variational search over qubit observables ---------------------------------------


@dataclass(frozen=True)
class VariationalResult:
    value: float
    phi: float
    theta: float

    @property
    def argmax(self):
        return self.phi, self.theta


def _violation_fn(rho: DensityMatrix, X: Observable):
    # Y(theta, phi) written in the eigenbasis of X has eigenvalues +-1 and spectral
    # projectors (1 +- Y)/2, so P(y = +-1) = (1 +- <Y>)/2 for either state.
    r = rho.in_basis(X.basis)
    s = dephase(rho, X).in_basis(X.basis)

    def expect(m, phi, theta):
        c, sn = np.cos(theta), np.sin(theta)
        off = sn * np.exp(-1j * np.asarray(phi))
        return np.real(-c * m[0, 0] + c * m[1, 1] + m[0, 1] * off.conjugate() + m[1, 0] * off)

    def f(phi, theta):
        er, es = expect(r, phi, theta), expect(s, phi, theta)
        plus = np.abs((1.0 + er) / 2.0 - (1.0 + es) / 2.0)
        minus = np.abs((1.0 - er) / 2.0 - (1.0 - es) / 2.0)
        return plus + minus

    return f


def _golden_max(f, lo, hi, tol):
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    x = 0.5 * (a + b)
    return x, f(x)


def variational_trace_distance(
    rho: DensityMatrix, X: Observable, grid=DEFAULT_GRID, tol: float = 1e-6
) -> VariationalResult:
    """Maximise the summed total-probability violation over all qubit observables.

    Grid search over ``phi in [0, 2 pi)`` and ``theta in [0, pi]`` (ties go to
    the lexicographically smallest ``(theta, phi)``), then one golden-section
    pass on ``phi`` and one on ``theta`` within a grid cell of the best point.
    """
    check_dims(rho, X)
    if X.dim != 2:
        raise UnsupportedDimension(f"variational search needs a qubit, got d = {X.dim}")
    n_phi, n_theta = grid
    phis = np.arange(n_phi) * (2.0 * np.pi / n_phi)
    thetas = np.linspace(0.0, np.pi, n_theta)
    f = _violation_fn(rho, X)
    values = f(phis[None, :], thetas[:, None])
    best = values.max()
    # row-major argmax over (theta, phi) is the lexicographic tie-break
    i, j = np.unravel_index(np.argmax(values >= best * (1.0 - 1e-14)), values.shape)
    phi0, theta0 = phis[j], thetas[i]
    if best > 0:
        dphi = 2.0 * np.pi / n_phi
        dtheta = np.pi / (n_theta - 1)
        phi1, _ = _golden_max(lambda x: f(x, theta0), phi0 - dphi, phi0 + dphi, tol)
        theta1, _ = _golden_max(
            lambda x: f(phi1, x), max(0.0, theta0 - dtheta), min(np.pi, theta0 + dtheta), tol
        )
        refined = float(f(phi1, theta1))
        if refined > best:
            best, phi0, theta0 = refined, phi1 % (2.0 * np.pi), theta1
    return VariationalResult(float(best), float(phi0), float(theta0))


# --- reports --------------------------------------------------------------------------


@dataclass(frozen=True)
class CoherenceReport:
    variance_lhs: float
    variance_rhs: float
    variance_gap: float
    trace_distance: float
    max_total_prob_violation: float
    max_offdiagonal: float
    incoherent: bool
    tolerance_used: float

    def as_dict(self) -> dict:
        return asdict(self)


def coherence_report(
    rho: DensityMatrix, X: Observable, Y: Observable | None = None, tol: float = GAP_THRESHOLD
) -> CoherenceReport:
    """Audit ``rho`` against the classical laws for the pair (X, Y).

    Without Y the witness observable is used, which maximises the
    total-probability violation.  The verdict ``incoherent`` requires every
    measured deviation to stay within ``tol``.
    """
    if Y is None:
        Y = witness_observable(rho, X)
    vg = variance_gap(rho, X, Y)
    td = trace_distance_to_dephased(rho, X)
    violation = float(np.max(np.abs(total_probability_residual(rho, X, Y))))
    off = offdiagonal_magnitude(rho, X)
    incoherent = off <= tol and td <= tol and abs(vg.gap) <= tol and violation <= tol
    return CoherenceReport(vg.lhs, vg.rhs, vg.gap, td, violation, off, bool(incoherent), tol)


def certify_total_probability_violation(rho: DensityMatrix, X: Observable):
    """Return ``(Y, residual)`` for the second observable with the largest violation.

    Qubits use the variational optimum; higher dimensions use the witness
    observable.  The residual is recomputed through the general pipeline.
    """
    if X.dim == 2:
        res = variational_trace_distance(rho, X)
        yb = qubit_y_matrix(res.theta, res.phi)
        Y = Observable(X.basis @ yb @ X.basis.conj().T)
    else:
        Y = witness_observable(rho, X)
    return Y, total_probability_residual(rho, X, Y)
