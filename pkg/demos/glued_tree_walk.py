"""
A quantum walk on glued binary trees
====================================

The 10-vertex glued-tree graph is symmetric under two reflections of the
trees.  The group algebra of these permutations splits the walk into a
5-dimensional, a 3-dimensional and a 2-dimensional sector, and the
Hamiltonian factorizes into a symmetric part and a part inside the
group algebra.
"""

import numpy as np

from irrepscatter import FiniteGroupRep, decompose, factorize, split_symmetry
from irrepscatter.fixtures import glued_tree_generators, glued_tree_hamiltonian
from irrepscatter.reduction import unitary_evolution

gens = glued_tree_generators()
group = FiniteGroupRep.generate(gens)
dec = decompose(gens)
print("group order:", group.order)
print("block shapes:", dec.bpt.shapes)

######################################################################
# H_nu is the group average of H; the remainder H_mu lies in the algebra.

h = glued_tree_hamiltonian()
split = split_symmetry(h, group, dec.bpt)
print("commutator residual of H_nu:", split.commutator_residual)
print("membership residual of H_mu:", split.membership_residual)

######################################################################
# The evolution operator factorizes block by block.

fh = factorize(split.H_nu, split.H_mu, dec.wedderburn)
for t in (0.1, 1.0, 10.0):
    err = np.linalg.norm(dec.wedderburn.to_layout(unitary_evolution(h, t)) - fh.evolution(t))
    print(f"t={t:5}: factorization error {err:.2e}")

######################################################################
# Probability of reaching the exit vertex, starting from the entrance.

start = np.zeros(10)
start[0] = 1
for t in np.linspace(0, 6, 7):
    psi = unitary_evolution(h, t) @ start
    print(f"t={t:.1f}  P(exit)={abs(psi[9]) ** 2:.4f}")
