"""Eigendecompositions, unitary propagators and the trace norm.

Everything else in the package sits on three small linear-algebra routines.
This script shows what they return on matrices simple enough to check by eye.
"""

import numpy as np

from collapse_lab import eigh, trace_norm, unitary_exp

sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]])

# Eigenvectors come back with a fixed phase: the largest component of each
# column is real and positive, so results are reproducible bit for bit.
dec = eigh(sigma_x)
print("eigenvalues of sigma_x:", dec.eigenvalues)
print("eigenvectors (columns):\n", np.round(dec.eigenvectors, 6))
print("degenerate spectrum?", dec.degenerate)

# exp(-iHt) built from the decomposition; at t = pi a diagonal H gives -I.
u = unitary_exp(np.diag([-1.0, 1.0]), np.pi)
print("exp(-i diag(-1,1) pi) =\n", np.round(u, 12))

# The trace norm is the sum of absolute eigenvalues.
c = 0.5 * np.exp(0.7j)
print("trace norm of [[0, c], [c*, 0]] with |c| = 0.5:", trace_norm([[0, c], [np.conj(c), 0]]))
