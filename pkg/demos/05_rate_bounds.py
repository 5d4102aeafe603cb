"""
Certified convergence rates for sequences drawn from a finite graph set,
compared with what a simulation actually does.
"""

import numpy as np

from projconsensus import (corollary_lambda, rate_bound_corollary,
                           rate_bound_strong_sequences, simulate)
from projconsensus.generators import (problem_from_blocks, random_strongly_connected,
                                      well_conditioned_blocks)

print("lambda(m=2, tau=1, rho=0.5) =", corollary_lambda(2, 1, 0.5))

rng = np.random.default_rng(11)
problem = problem_from_blocks(rng, well_conditioned_blocks(rng, 3, 3))
graphs = [random_strongly_connected(rng, 3, 0.2) for _ in range(3)]

rb = rate_bound_corollary(problem, graphs)
print(f"D-connected bound: lambda={rb.lam:.5f} (tau={rb.tau}, rho={rb.rho:.4f})")
sb = rate_bound_strong_sequences(problem, graphs)
print(f"strong-sequence bound: lambda={sb.lam:.5f} over {sb.details['products']} products")

picks = rng.integers(len(graphs), size=150)
trace = simulate(problem, [graphs[k] for k in picks], 150, "random-kernel", rng)
e = trace.max_error
observed = np.exp(np.polyfit(np.arange(20, 100), np.log(e[20:100]), 1)[0])
print(f"observed per-round decay factor ~ {observed:.4f}")
