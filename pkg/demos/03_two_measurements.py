"""How a first measurement changes the statistics of a second one.

Take the state (|0> + |1>)/sqrt(2) and an observable Y whose eigenbasis is
rotated a quarter turn away from X.  Measured directly, Y gives +1 every time.
If X is measured first, Y becomes a fair coin.  A classical system could
never show that difference.
"""

import numpy as np

from collapse_lab import (
    MeasurementStep,
    direct_distribution,
    post_measurement_distribution,
    qubit_state,
    qubit_x,
    qubit_y,
    sample_records,
    total_probability_residual,
)

rho = qubit_state(0.5, 1.0)
X, Y = qubit_x(), qubit_y(np.pi / 2, 0.0)

print("labels of Y:          ", Y.labels)
print("P(y) measured directly:", np.round(direct_distribution(rho, Y).probs, 12))
print("P'(y) after measuring X:", np.round(post_measurement_distribution(rho, X, Y).probs, 12))
print("residual P - P':       ", np.round(total_probability_residual(rho, X, Y), 12))

# The same numbers estimated from sampled measurement records.
direct = sample_records(rho, [MeasurementStep(Y)], seed=3, shots=50_000)
after = sample_records(rho, [MeasurementStep(X), MeasurementStep(Y)], seed=4, shots=50_000)
print("\nsampled P(y): ", direct.marginal(0))
print("sampled P'(y):", after.marginal(1))
print("joint counts of (x, y):", {(round(x), round(y)): c for (x, y), c in after.empirical_joint.items()})
