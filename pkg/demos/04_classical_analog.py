"""The classical picture: a probability distribution over finitely many configurations.

Measuring X only reveals which cell of a partition the configuration lies in,
so conditioning on the outcome changes nothing about the configuration itself.
The laws of total probability and total variance therefore always hold, and
repeating a measurement at once reproduces its outcome.
"""

import numpy as np

from collapse_lab import ClassicalSystem, classical_cmo_check, total_probability_check, total_variance_check

# Six points, X splits them into three pairs, Y into "low" and "high" values.
# From t = 1 on, the dynamics shifts every point one step along the cycle.
system = ClassicalSystem(
    distribution=[0.1, 0.2, 0.1, 0.25, 0.15, 0.2],
    partition_x=[0, 0, 1, 1, 2, 2],
    partition_y=[-1.0, 1.0, 1.0, -1.0, 1.0, 1.0],
    flow_pieces=((1.0, [1, 2, 3, 4, 5, 0]),),
)

print("total probability residual per y:", total_probability_check(system))
tv = total_variance_check(system)
print(f"variance of Y {tv.lhs:.6f}  vs  mean conditional variance + variance of means {tv.rhs:.6f}")

check = classical_cmo_check(system, [2.0, 0.5])
print("\nrepeat-measurement matrix at t = 0:\n", check.at_zero)
print("at t = 2 (after the shift):\n", np.round(check.matrices[0], 4))
print("at t = 0.5 (before the shift):\n", check.matrices[1])
