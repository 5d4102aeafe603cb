"""
If some group of agents never hears from outside and cannot pin the
solution on its own, part of the error never decays.  The analysis finds
that group and an initial error that the iteration leaves untouched.
"""

import numpy as np

from projconsensus import (DiGraph, PeriodicSequence, Problem, is_d_connected,
                           stability_report, unit_eigenvalue_witness, simulate)

blocks = [np.array([[1.0, 0.0, 0.0]]),
          np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
          np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])]
x_true = np.array([2.0, 1.0, -1.0])
problem = Problem.from_blocks(blocks, [B @ x_true for B in blocks])

# agent 1 only talks, never listens
G = DiGraph(3, [(1, 2), (1, 3)], add_self_arcs=True)
print("unique solution:", problem.unique, " D-connected:", is_d_connected(problem.oracle, G))
rep = stability_report(problem, G)
print("spectral radius of the error map:", round(rep.spectral_radius, 12))
for comp, has_in, dim in rep.scc_certificate:
    print(f"   component {sorted(comp)} receives from outside: {has_in}, "
          f"kernel intersection dim {dim}")

w = unit_eigenvalue_witness([G], problem)
print("stuck group:", sorted(w.subset), " direction:", np.round(w.direction, 3))
trace = simulate(problem, PeriodicSequence([G]), 200,
                 initial_states=problem.particular_solution + w.vector)
print("error at t=1 and t=200:", trace.max_error[0], trace.max_error[-1])
