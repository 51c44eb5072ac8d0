"""Small dense Hermitian linear algebra.

Everything here works on plain ``numpy`` complex arrays.  The eigensolver is a
cyclic Jacobi iteration, which is deterministic and more than fast enough for
the matrix sizes used in measurement simulations (d <= 16).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotHermitian

TAU_HERM = 1e-10
TAU_UNIT = 1e-10
TAU_REC = 1e-9
TAU_DEG = 1e-8

# relative magnitude window inside which two vector components count as tied
_PHASE_TIE = 1e-12


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues with eigenvectors stored as the columns of ``eigenvectors``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degenerate: bool = False

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def min_gap(self) -> float:
        if self.dim < 2:
            return np.inf
        return float(np.min(np.diff(self.eigenvalues)))


def as_complex_matrix(m, name="matrix") -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def hermiticity_error(m: np.ndarray) -> float:
    """Largest entry of ``|M - M^dagger|`` relative to ``max(1, max|M_ij|)``.

    The unit floor keeps rounding noise in near-zero matrices (differences of
    nearly equal states, say) from reading as a large relative asymmetry.
    """
    scale = max(1.0, float(np.max(np.abs(m))))
    return float(np.max(np.abs(m - m.conj().T)) / scale)


def check_hermitian(m, name="matrix", tol=TAU_HERM) -> np.ndarray:
    """Validate and return the symmetrised complex matrix ``(M + M^dagger) / 2``."""
    a = as_complex_matrix(m, name)
    err = hermiticity_error(a)
    if err > tol:
        raise NotHermitian(f"{name} is not Hermitian (relative asymmetry {err:.3e} > {tol:g})")
    return 0.5 * (a + a.conj().T)


def _fix_phases(v: np.ndarray) -> np.ndarray:
    # make the largest component of every column real and positive;
    # near-ties go to the lowest row index
    mags = np.abs(v)
    out = v.copy()
    for j in range(v.shape[1]):
        col = mags[:, j]
        k = int(np.flatnonzero(col >= col.max() * (1.0 - _PHASE_TIE))[0])
        out[:, j] *= np.conj(v[k, j]) / mags[k, j]
        out[k, j] = out[k, j].real
    return out


def _jacobi_sweeps(a: np.ndarray, max_sweeps: int):
    d = a.shape[0]
    v = np.eye(d, dtype=complex)
    scale = np.linalg.norm(a)
    if scale == 0.0 or d == 1:
        return a, v
    eps = np.finfo(float).eps
    offmask = ~np.eye(d, dtype=bool)
    for _ in range(max_sweeps):
        if np.linalg.norm(a[offmask]) <= eps * scale:
            return a, v
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                r = abs(apq)
                if r <= eps * 1e-3 * scale:
                    continue
                # phase rotation makes a_pq real, then a real Jacobi rotation zeroes it
                phase = apq / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ g
    raise NoConvergence(f"Jacobi iteration did not converge within {max_sweeps} sweeps")


def eigh(m, max_sweeps=None) -> SpectralDecomposition:
    """Hermitian eigendecomposition by cyclic Jacobi rotations.

    Eigenvalues are returned in ascending order.  Each eigenvector column is
    normalised so that its largest-magnitude component is real and positive,
    which makes the output reproducible.  Eigenvalues closer than
    ``TAU_DEG`` times the spectral scale (the larger of spectral range and
    spectral radius) set the ``degenerate`` flag.
    """
    a = check_hermitian(m)
    d = a.shape[0]
    if max_sweeps is None:
        max_sweeps = 100 * d * d
    diag, v = _jacobi_sweeps(a.copy(), max_sweeps)
    w = np.real(np.diag(diag))
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = _fix_phases(v[:, order])
    degenerate = False
    if d > 1:
        scale = max(w[-1] - w[0], np.max(np.abs(w)))
        degenerate = bool(np.min(np.diff(w)) <= TAU_DEG * scale)
    return SpectralDecomposition(w, v, degenerate)


def unitary_exp(h, t: float, spectral: SpectralDecomposition | None = None) -> np.ndarray:
    """Return ``exp(-i H t)`` built from the eigendecomposition of ``H``."""
    if spectral is None:
        spectral = eigh(h)
    v = spectral.eigenvectors
    return (v * np.exp(-1j * spectral.eigenvalues * t)) @ v.conj().T


def trace_norm(m) -> float:
    """Sum of the absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(eigh(m).eigenvalues)))
