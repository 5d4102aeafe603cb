"""Seeded random instances for tests, demos and acceptance runs."""

import numpy as np

from . import digraph as dg
from .solver import Problem


def random_blocks(rng, m, n, kernel_dim=0, dup_prob=0.3, max_rows=None):
    """
    Random row blocks whose stacked kernel has dimension ``kernel_dim``.

    With probability ``dup_prob`` an agent's block is a scaled copy of an
    earlier agent's, which makes their kernels coincide.  Resamples until the
    stacked rank is exactly ``n - kernel_dim``.
    """
    if not 0 <= kernel_dim < n:
        raise ValueError("kernel_dim must be in [0, n)")
    r = n - kernel_dim
    if max_rows is None:
        max_rows = max(1, r - 1) if m > 1 else r
    while True:
        W = np.linalg.qr(rng.standard_normal((n, r)))[0]
        blocks = []
        for i in range(m):
            if i and rng.random() < dup_prob:
                j = rng.integers(i)
                blocks.append(rng.choice([-2.0, 0.5, 3.0]) * blocks[j])
            else:
                k = int(rng.integers(1, max_rows + 1))
                blocks.append(rng.standard_normal((k, r)) @ W.T)
        if np.linalg.matrix_rank(np.vstack(blocks)) == r:
            return blocks


def well_conditioned_blocks(rng, m, n, kernel_dim=0, noise=0.25, min_ratio=0.5,
                            frame=None):
    """
    Row blocks built from a random orthonormal frame of the row space.

    Each frame row goes to a random agent (agents left empty get a random
    frame row) and every row is perturbed by ``noise`` inside the row space.
    Draws are rejected until the nonzero singular values of the stacked
    matrix satisfy ``smin / smax >= min_ratio``.  Passing ``frame`` (``r x n``
    orthonormal rows) fixes the row space, so separately drawn groups of
    agents share one solution set.
    """
    if not 0 <= kernel_dim < n:
        raise ValueError("kernel_dim must be in [0, n)")
    r = n - kernel_dim
    while True:
        R = (np.linalg.qr(rng.standard_normal((n, r)))[0].T if frame is None
             else np.asarray(frame, dtype=float))
        owned = [[] for _ in range(m)]
        for k in range(r):
            owned[rng.integers(m)].append(k)
        blocks = []
        for rows in owned:
            if not rows:
                rows = [int(rng.integers(r))]
            B = R[rows]
            blocks.append(B + noise * rng.standard_normal((len(rows), r)) @ R)
        s = np.linalg.svd(np.vstack(blocks), compute_uv=False)[:r]
        if s[-1] >= min_ratio * s[0]:
            return blocks


def problem_from_blocks(rng, A_blocks):
    """Consistent problem ``b_i = A_i x_true`` for a random ``x_true``."""
    x = rng.standard_normal(A_blocks[0].shape[1])
    return Problem.from_blocks(A_blocks, [A @ x for A in A_blocks])


def random_problem(rng, m, n, kernel_dim=0, dup_prob=0.3, max_rows=None):
    """Consistent random problem with ``b = A x_true``."""
    A_blocks = random_blocks(rng, m, n, kernel_dim, dup_prob, max_rows)
    x = rng.standard_normal(n)
    return Problem.from_blocks(A_blocks, [A @ x for A in A_blocks])


def random_graph(rng, m, p):
    return dg.DiGraph.random(m, p, rng)


def split_arcs(G, parts, rng):
    """Scatter the non-self arcs of ``G`` over ``parts`` graphs with self-arcs."""
    adj = [np.eye(G.m, dtype=bool) for _ in range(parts)]
    for u, v in sorted(G.arcs):
        if u != v:
            adj[rng.integers(parts)][u - 1, v - 1] = True
    return [dg.DiGraph.from_adjacency(a) for a in adj]


def random_strongly_connected(rng, m, extra_p=0.2):
    """A random Hamiltonian cycle plus random extra arcs."""
    perm = rng.permutation(m)
    adj = rng.random((m, m)) < extra_p
    np.fill_diagonal(adj, True)
    for k in range(m):
        adj[perm[k], perm[(k + 1) % m]] = True
    return dg.DiGraph.from_adjacency(adj)
