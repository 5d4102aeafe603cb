"""
Which groups of agents can pin down the solution set on their own?

Four agents each hold one row of a rank-2 matrix.  Rows 1 and 3 are
parallel, as are rows 2 and 4, so those pairs see the same kernel.
"""

import numpy as np

from projconsensus import DiGraph, PopulationOracle, is_d_connected, is_rooted, \
    is_strongly_connected, search_witness

A = np.array([[1, 2, 3, 4], [5, 6, 7, 8], [3, 6, 9, 12], [10, 12, 14, 16]], float)
oracle = PopulationOracle.from_blocks([A[[i]] for i in range(4)])

print("kernel intersection of all agents has dimension", oracle.global_intersection.dim)
print("subsets that cannot pin the solution set alone:")
for E in oracle.partially_populated_subsets():
    print("   ", sorted(E), "-> kernel intersection dim", oracle.intersection(E).dim)

# {1,2} already covers the row space, so D-connectivity is weaker than
# strong connectivity for this problem.  Search for small graphs that show it.
D = lambda G: is_d_connected(oracle, G)
cases = {
    "D-connected but not strongly connected": lambda G: D(G) and not is_strongly_connected(G),
    "D-connected but not rooted": lambda G: D(G) and not is_rooted(G),
    "rooted but not D-connected": lambda G: is_rooted(G) and not D(G),
}
for label, pred in cases.items():
    G = search_witness(4, pred)
    print(f"{label:40s} arcs: {', '.join(G.to_text())}")

print("complete graph D-connected:", D(DiGraph.complete(4)))
print("isolated agents D-connected:", D(DiGraph.self_arcs_only(4)))
