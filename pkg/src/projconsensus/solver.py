"""
The projection-consensus iteration for ``Ax = b``.

Agent ``i`` holds a row block ``(A_i, b_i)`` and keeps a state ``x_i`` on its
own affine solution set.  Each round it moves toward the average of its
in-neighbors' states, but only along ``ker A_i``:

    x_i <- x_i - P_i (x_i - mean_{j in N_i} x_j)

States are stored as an ``(m, n)`` array, one row per agent.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from . import digraph as dg
from .connectivity import PopulationOracle
from .errors import (InconsistentEquationError, InvalidInputError,
                     NotApplicableError)
from .linalg import (DEFAULT_REL_TOL, Subspace, blocks_to_matrix, intersect,
                     kernel_basis, orthogonal_complement, projector_onto)

REPROJECT_EVERY = 1000


@dataclass(frozen=True, eq=False)
class AgentData:
    """One agent's row block ``(A_i, b_i)`` and its kernel projector."""

    A: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    kernel: Subspace
    P: np.ndarray = field(repr=False)
    pinv: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, A, b, rel_tol=DEFAULT_REL_TOL):
        A = np.array(A, dtype=float)
        if A.ndim == 1:
            A = A.reshape(1, -1)
        b = np.array(b, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[0] != b.shape[0]:
            raise InvalidInputError(
                f"A_i has {A.shape[0]} rows but b_i has {b.shape[0]} entries")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise InvalidInputError("agent data has non-finite entries")
        K = kernel_basis(A, rel_tol)
        pinv = (np.linalg.pinv(A, rcond=rel_tol * max(A.shape))
                if A.shape[0] else np.zeros((A.shape[1], 0)))
        for a in (A, b, pinv):
            a.setflags(write=False)
        return cls(A, b, K, projector_onto(K), pinv)

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def rows(self):
        return self.A.shape[0]

    def least_norm_solution(self):
        return self.pinv @ self.b

    def residual(self, x):
        return float(np.linalg.norm(self.A @ x - self.b))

    @property
    def consistent(self):
        x = self.least_norm_solution()
        return self.residual(x) <= 1e-8 * (1.0 + np.linalg.norm(self.b))


class Problem:
    """A partitioned linear equation ``A x = b`` over ``m`` agents."""

    def __init__(self, agents, rel_tol=DEFAULT_REL_TOL):
        self.agents = tuple(agents)
        if not self.agents:
            raise InvalidInputError("a problem needs at least one agent")
        self.n = self.agents[0].n
        for i, ag in enumerate(self.agents, 1):
            if ag.n != self.n:
                raise InvalidInputError(
                    f"agent {i}: A_i has {ag.n} columns, expected {self.n}")
        self.rel_tol = rel_tol
        self.A = np.vstack([ag.A for ag in self.agents])
        self.b = np.concatenate([ag.b for ag in self.agents])
        self.kernel_intersection = intersect([ag.kernel for ag in self.agents], rel_tol)
        self.projectors = np.array([ag.P for ag in self.agents])
        if self.A.shape[0]:
            x, *_ = np.linalg.lstsq(self.A, self.b, rcond=None)
        else:
            x = np.zeros(self.n)
        tol = 1e-7 * (1.0 + np.linalg.norm(self.b))
        self.consistent = bool(np.linalg.norm(self.A @ x - self.b) <= tol)
        self.particular_solution = x if self.consistent else None
        self._oracle = None

    @classmethod
    def from_blocks(cls, A_blocks, b_blocks, rel_tol=DEFAULT_REL_TOL):
        if len(A_blocks) != len(b_blocks):
            raise InvalidInputError("need one b_i per A_i")
        return cls([AgentData.build(A, b, rel_tol) for A, b in zip(A_blocks, b_blocks)],
                   rel_tol)

    @classmethod
    def from_rows(cls, A, b, m=None, partition=None, rel_tol=DEFAULT_REL_TOL):
        """
        Split the rows of ``[A | b]`` among agents.

        ``partition`` lists the row count per agent; otherwise ``m`` contiguous
        blocks of near-equal size are used.
        """
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float).reshape(-1)
        if partition is None:
            if m is None:
                m = A.shape[0]
            idx = np.array_split(np.arange(A.shape[0]), m)
        else:
            if sum(partition) != A.shape[0]:
                raise InvalidInputError("partition does not cover the rows of A")
            idx = np.split(np.arange(A.shape[0]), np.cumsum(partition)[:-1])
        return cls.from_blocks([A[i] for i in idx], [b[i] for i in idx], rel_tol)

    @property
    def m(self):
        return len(self.agents)

    @property
    def unique(self):
        return self.kernel_intersection.dim == 0

    @property
    def is_zero(self):
        return not np.any(self.A)

    @property
    def oracle(self):
        if self._oracle is None:
            self._oracle = PopulationOracle([ag.kernel for ag in self.agents], self.rel_tol)
        return self._oracle

    def require_consistent(self):
        for i, ag in enumerate(self.agents, 1):
            if not ag.consistent:
                raise InconsistentEquationError(f"agent {i}: A_i x = b_i has no solution",
                                                agent=i)
        if not self.consistent:
            raise InconsistentEquationError("A x = b has no solution")

    def stacked_residual(self, x):
        return float(np.linalg.norm(self.A @ x - self.b))

    def project_onto_solutions(self, x):
        """Closest point to ``x`` in the solution set (consistent problems)."""
        self.require_consistent()
        if not self.A.shape[0]:
            return np.array(x, dtype=float)
        r = self.A @ x - self.b
        dx, *_ = np.linalg.lstsq(self.A, r, rcond=None)
        return x - dx

    def agent_residuals(self, X):
        return np.array([ag.residual(x) for ag, x in zip(self.agents, X)])

    def __repr__(self):
        return (f"Problem(m={self.m}, n={self.n}, rows={self.A.shape[0]}, "
                f"kernel_dim={self.kernel_intersection.dim}, consistent={self.consistent})")


def init_states(problem, policy="least-norm", rng=None):
    """
    Starting states, each solving its own ``A_i x = b_i``.

    ``policy`` is ``"least-norm"`` or ``"random-kernel"``; the latter adds a
    standard-normal vector from ``ker A_i`` drawn from ``rng``.
    """
    for i, ag in enumerate(problem.agents, 1):
        if not ag.consistent:
            raise InconsistentEquationError(f"agent {i}: A_i x = b_i has no solution",
                                            agent=i)
    X = np.array([ag.least_norm_solution() for ag in problem.agents])
    if policy == "least-norm":
        return X
    if policy == "random-kernel":
        if rng is None:
            rng = np.random.default_rng(0)
        for i, ag in enumerate(problem.agents):
            K = ag.kernel.basis
            X[i] += K @ rng.standard_normal(K.shape[1])
        return X
    raise InvalidInputError(f"unknown init policy {policy!r}")


def _check_states(problem, X):
    X = np.asarray(X, dtype=float)
    if X.shape != (problem.m, problem.n):
        raise InvalidInputError(f"states must have shape {(problem.m, problem.n)}, got {X.shape}")
    return X


def step(problem, X, G):
    """One synchronous round of the projection-consensus update over ``G``."""
    X = _check_states(problem, X)
    if G.m != problem.m:
        raise InvalidInputError(f"graph has {G.m} vertices, problem has {problem.m} agents")
    F = dg.flocking_matrix(G)
    D = X - F @ X
    return X - np.einsum("ijk,ik->ij", problem.projectors, D)


def error_step(projectors, Y, G):
    """``y_i <- (1/m_i) P_i sum_{j in N_i} P_j y_j`` for arbitrary projectors."""
    F = dg.flocking_matrix(G)
    PY = np.einsum("ijk,ik->ij", projectors, Y)
    return np.einsum("ijk,ik->ij", projectors, F @ PY)


def reproject(problem, X):
    """Pull each state back onto its affine constraint set."""
    out = np.array(X, dtype=float)
    for i, ag in enumerate(problem.agents):
        if ag.rows:
            out[i] -= ag.pinv @ (ag.A @ out[i] - ag.b)
    return out


class StackedOperator:
    """The ``mn x mn`` error map ``P (F kron I) P`` of one round over a graph."""

    def __init__(self, blocks, source_graph=None):
        self.blocks = np.asarray(blocks, dtype=float)
        self.m, _, self.n, _ = self.blocks.shape
        self.source_graph = source_graph

    @property
    def matrix(self):
        return blocks_to_matrix(self.blocks)

    def apply(self, Y):
        """Apply to stacked errors given as an ``(m, n)`` array."""
        return np.einsum("ijkl,jl->ik", self.blocks, np.asarray(Y, dtype=float))

    def __matmul__(self, other):
        prod = np.einsum("ijkl,jplq->ipkq", self.blocks, other.blocks)
        return StackedOperator(prod)

    @classmethod
    def identity(cls, m, n):
        blocks = np.zeros((m, m, n, n))
        blocks[np.arange(m), np.arange(m)] = np.eye(n)
        return cls(blocks)


def stacked_blocks(projectors, F):
    """Blocks ``F[i, j] P_i P_j``."""
    PP = np.einsum("ikl,jlq->ijkq", projectors, projectors)
    return F[:, :, None, None] * PP


def build_stacked(problem, G, projectors=None):
    if projectors is None:
        projectors = problem.projectors
    F = dg.flocking_matrix(G)
    return StackedOperator(stacked_blocks(np.asarray(projectors), F), G)


def transition(problem, graphs, projectors=None):
    """Product ``P(F_q kron I)P ... P(F_1 kron I)P`` over ``G_1..G_q``."""
    if projectors is None:
        projectors = problem.projectors
    graphs = list(graphs)
    m, n = len(projectors), np.asarray(projectors).shape[1]
    out = StackedOperator.identity(m, n)
    for G in graphs:
        out = build_stacked(problem, G, projectors) @ out
    out.source_graph = None
    return out


def disagreement(X):
    """Largest pairwise distance between agent states."""
    X = np.asarray(X)
    diff = X[:, None, :] - X[None, :, :]
    return float(np.max(np.linalg.norm(diff, axis=2)))


@dataclass
class SimulationTrace:
    """Per-round record of a run; round ``k`` of the arrays is time ``t = k + 1``."""

    states: np.ndarray
    reference: np.ndarray
    errors: np.ndarray
    disagreement: np.ndarray
    residual: np.ndarray

    @property
    def T(self):
        return self.states.shape[0]

    @property
    def m(self):
        return self.states.shape[1]

    @property
    def final_states(self):
        return self.states[-1]

    @property
    def max_error(self):
        return self.errors.max(axis=1)

    def write_csv(self, fh):
        """Columns ``t, agent, error, disagreement, residual``; 17 significant digits."""
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "agent", "error", "disagreement", "residual"])
        for k in range(self.T):
            dis = f"{self.disagreement[k]:.17g}"
            res = f"{self.residual[k]:.17g}"
            for i in range(self.m):
                w.writerow([k + 1, i + 1, f"{self.errors[k, i]:.17g}", dis, res])


def simulate(problem, seq, T, policy="least-norm", rng=None, initial_states=None,
             reference=None):
    """
    Run the iteration for ``T`` rounds (``T - 1`` updates after initialization).

    ``seq`` is a ``GraphSequence`` or anything indexable by ``t = 1, 2, ...``.
    The error reference defaults to the unique solution, or otherwise to the
    solution closest to the final average state.
    """
    if T < 1:
        raise InvalidInputError("T must be >= 1")
    problem.require_consistent()
    if initial_states is None:
        X = init_states(problem, policy, rng)
    else:
        X = _check_states(problem, initial_states).copy()
    graph_at = seq.graph if hasattr(seq, "graph") else (lambda t: seq[t - 1])
    states = np.empty((T, problem.m, problem.n))
    states[0] = X
    for t in range(1, T):
        X = step(problem, X, graph_at(t))
        if t % REPROJECT_EVERY == 0:
            X = reproject(problem, X)
        states[t] = X
    if reference is None:
        if problem.unique:
            reference = problem.particular_solution
        else:
            reference = problem.project_onto_solutions(states[-1].mean(axis=0))
    reference = np.asarray(reference, dtype=float)
    errors = np.linalg.norm(states - reference, axis=2)
    diff = states[:, :, None, :] - states[:, None, :, :]
    dis = np.linalg.norm(diff, axis=3).max(axis=(1, 2))
    res = np.array([problem.agent_residuals(s).max() for s in states])
    return SimulationTrace(states, reference, errors, dis, res)


def quotient_decompose(problem):
    """
    Reduce the non-unique case onto the complement of the kernel intersection.

    Returns ``(Q, Pbar)``: ``Q`` has orthonormal rows spanning the orthogonal
    complement of the kernel intersection, and ``Pbar[i] = Q P_i Q'``.
    """
    if problem.unique:
        raise NotApplicableError("problem has a unique solution; nothing to quotient")
    if problem.is_zero:
        raise NotApplicableError("A = 0: the quotient space is trivial")
    Q = orthogonal_complement(problem.kernel_intersection, problem.rel_tol).basis.T
    Pbar = np.einsum("ak,ikl,bl->iab", Q, problem.projectors, Q)
    return Q, Pbar


def split_errors(Q, Y):
    """``(Ybar, Z)`` with ``ybar_i = Q y_i`` and ``z_i = y_i - Q' ybar_i``."""
    Y = np.asarray(Y, dtype=float)
    Ybar = Y @ Q.T
    return Ybar, Y - Ybar @ Q


def consensus_subsystem_step(Z, G, subspace=None, tol=1e-8):
    """Plain neighborhood averaging of states in the kernel intersection."""
    Z = np.asarray(Z, dtype=float)
    if subspace is not None:
        for i, z in enumerate(Z, 1):
            if not subspace.contains(z, tol):
                raise InvalidInputError(f"state {i} is not in the kernel intersection")
    return dg.flocking_matrix(G) @ Z


def to_least_squares(problem, m=None):
    """
    Equivalent consistent problem whose solutions solve ``A'A x = A'b``.

    The rows of ``[A'A | A'b]`` are split into ``m`` (default: the original
    agent count) contiguous blocks of near-equal size.
    """
    if m is None:
        m = problem.m
    AtA = problem.A.T @ problem.A
    Atb = problem.A.T @ problem.b
    return Problem.from_rows(AtA, Atb, m=m, rel_tol=problem.rel_tol)
