"""
Block-diagonalizing a three-qubit Hamiltonian
=============================================

The Hamiltonian H(eps) = H_int + eps * Z_1 couples the first two qubits
through a projector and shifts the first qubit in a field.  Scattering the
spectral projections of the two terms finds a basis where H(eps) splits
into two 1x1 blocks and one 2x2 block, each repeated twice.
"""

import numpy as np

from irrepscatter import decompose, reduce_hamiltonian
from irrepscatter.fixtures import three_qubit_generators, three_qubit_hamiltonian

######################################################################
# Decompose the algebra generated by the two terms.

h_int, h_z1 = three_qubit_generators()
dec = decompose([h_int, h_z1])
print("block shapes (rows x cols):", dec.bpt.shapes)
print("scatterings:", dec.diagnostics["scatter_count"])

######################################################################
# Every trace of the scattering is kept on the network.

for event in dec.network.trace:
    print("  scattered", event["edge"], "lambda =", np.round(event["lambdas"], 6))

######################################################################
# Reduce H(eps) and compare with the full spectrum.

for eps in (0.25, 1.0):
    red = reduce_hamiltonian(three_qubit_hamiltonian(eps), dec.wedderburn)
    print(f"eps={eps}:")
    for b, n in zip(red.blocks, red.mult_dims):
        print(f"  {n} copies of", np.round(b.real, 6).tolist())
    full = np.linalg.eigvalsh(three_qubit_hamiltonian(eps))
    print("  max spectrum difference:", np.max(np.abs(red.spectrum() - full)))
