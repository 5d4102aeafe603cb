"""
With a nontrivial kernel the agents can still agree on one exact solution,
provided the graph is D-connected and rooted.  The error splits into a part
living on the complement of the common kernel, which behaves like a
unique-solution problem, and a part in the kernel, which is plain averaging.
"""

import numpy as np

from projconsensus import (DiGraph, PeriodicSequence,
                           quotient_decompose, simulate)
from projconsensus.generators import problem_from_blocks, well_conditioned_blocks

rng = np.random.default_rng(4)
problem = problem_from_blocks(rng, well_conditioned_blocks(rng, 4, 4, kernel_dim=2))
print(problem)

Q, Pbar = quotient_decompose(problem)
print("reduced space dimension:", Q.shape[0])
print("max |Q P_i - Pbar_i Q|:",
      max(np.abs(Q @ P - Pb @ Q).max() for P, Pb in zip(problem.projectors, Pbar)))

ring = DiGraph(4, [(1, 2), (2, 3), (3, 4), (4, 1)], add_self_arcs=True)
trace = simulate(problem, PeriodicSequence([ring]), 300, "random-kernel", rng)
x = trace.final_states.mean(axis=0)
print("final disagreement:", trace.disagreement[-1])
print("residual of the agreed point:", problem.stacked_residual(x))

# two groups that never talk each settle on a different solution
split = DiGraph(4, [(1, 2), (2, 1), (3, 4), (4, 3)], add_self_arcs=True)
trace = simulate(problem, PeriodicSequence([split]), 300, "random-kernel", rng)
print("two isolated pairs, final disagreement:", round(trace.disagreement[-1], 4))
