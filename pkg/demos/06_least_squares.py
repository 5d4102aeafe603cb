"""
An overdetermined, inconsistent system has no exact solution.  Handing the
agents slices of the normal equations instead makes every agent converge to
the least-squares solution.
"""

import numpy as np

from projconsensus import DiGraph, PeriodicSequence, Problem, simulate, to_least_squares

rng = np.random.default_rng(2)
A = rng.standard_normal((7, 3))
b = rng.standard_normal(7)
original = Problem.from_rows(A, b, m=3)
print("original consistent:", original.consistent)

ls = to_least_squares(original)
# the augmented problem mixes slowly, so give it plenty of rounds
trace = simulate(ls, PeriodicSequence([DiGraph.complete(3)]), 20000)
print("agent states:\n", np.round(trace.final_states, 8))
print("pseudo-inverse solution:", np.round(np.linalg.pinv(A) @ b, 8))

# the two-agent toy case: x = 0 and x = 2 average to 1
toy = to_least_squares(Problem.from_blocks([np.ones((1, 1))] * 2,
                                           [np.zeros(1), 2 * np.ones(1)]))
print("toy answer:", toy.particular_solution)
