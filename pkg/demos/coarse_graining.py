"""
Coarse-graining with partial bipartition tables
===============================================

A qutrit viewed through a qubit, a weather record viewed through
clothing, and two spins viewed through their total angular momentum.
"""

import numpy as np

from irrepscatter import (
    probability_distortion,
    pull_back,
    push_forward,
    skl_from_partial_bpt,
    trace_out_partial,
)
from irrepscatter.fixtures import (
    PAULI_X,
    WEATHER_PROBS,
    qutrit_pbpt,
    singlet_triplet_pbpt,
    two_spin_total,
    weather_clothing,
    weather_rectangular,
)

######################################################################
# Qutrit to qubit.  The amplitude on |-1> is folded into the qubit's |1>.

psi = np.array([0.6, 0.48, 0.64])
rho = np.outer(psi, psi)
basis = skl_from_partial_bpt(qutrit_pbpt())
print("reduced qubit state:\n", np.round(trace_out_partial(rho, qutrit_pbpt()).matrix.real, 4))
x = push_forward(PAULI_X, basis)
for d in probability_distortion(x, basis, rho):
    print(f"  X = {d.eigenvalue:+.0f}: ambient {d.ambient:.4f}, reduced {d.reduced:.4f}")

######################################################################
# Weather marginals, first with a product table, then a ragged one.

rho = np.diag(WEATHER_PROBS)
print("sunny/rainy:", np.diag(trace_out_partial(rho, weather_rectangular()).matrix).real)
print("warm/cold:  ", np.diag(trace_out_partial(rho, weather_rectangular(), "A").matrix).real)
print("shirt/jacket/coat:", np.diag(trace_out_partial(rho, weather_clothing()).matrix).real)
print("no hat/hat:       ", np.diag(trace_out_partial(rho, weather_clothing(), "A").matrix).real)

######################################################################
# Total spin components lie in the operator system; Jx^2 does not.

basis = skl_from_partial_bpt(singlet_triplet_pbpt())
jx, jy, jz = two_spin_total()
for name, op in (("Jx", jx), ("Jy", jy), ("Jz", jz), ("Jx^2", jx @ jx)):
    print(f"{name:5} pull-back residual {pull_back(op, basis)[1]:.3e}")
