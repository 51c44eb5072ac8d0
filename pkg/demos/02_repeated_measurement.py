"""Measuring the same observable twice, with and without a pause in between.

Immediately repeating a projective measurement reproduces the first outcome in
every shot.  If the system is allowed to evolve for a short time t first, the
chance of a different outcome grows like t^2, which the probe below measures.
"""

import numpy as np

from collapse_lab import DensityMatrix, MeasurementStep, Observable, cmo_limit_probe, sample_records

rng = np.random.default_rng(1)
g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
rho = DensityMatrix(g @ g.conj().T / np.trace(g @ g.conj().T).real)
X = Observable(np.diag([-1.0, 0.0, 1.0]))

record = sample_records(rho, [MeasurementStep(X), MeasurementStep(X)], seed=7, shots=100_000)
agree = np.mean(record.outcomes[:, 0] == record.outcomes[:, 1])
print(f"zero-delay repetition: outcomes agree in {agree:.0%} of {record.shots} shots")
print("first-measurement frequencies:", np.round(record.marginal(0), 4))

# Now wait between the two measurements under a Hamiltonian that does not commute with X.
h = np.array([[0, 1, 0], [1, 0.3, 1], [0, 1, -0.2]], dtype=complex)
probe = cmo_limit_probe(rho, X, h, np.geomspace(1e-1, 1e-3, 9))
print("\nP(x_m | x_n) after t = 1e-3 (rows n, columns m):")
print(np.round(probe.matrices[-1], 8))
print("fitted exponents of the off-diagonal entries (2 means quadratic onset):")
print(np.round(probe.exponents, 3))

noisy = sample_records(
    rho, [MeasurementStep(X), MeasurementStep(X, wait_before=0.3, hamiltonian=h)], seed=7, shots=100_000
)
flips = np.mean(noisy.outcomes[:, 0] != noisy.outcomes[:, 1])
print(f"\nwith a wait of t = 0.3 the outcome changes in {flips:.2%} of shots")
