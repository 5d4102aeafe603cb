"""
Dense linear algebra kernel.

Nullspaces, orthogonal projectors, subspace intersection and the block
("mixed") matrix norm used to measure contraction of stacked agent errors.
All functions are pure; arrays handed out are read-only copies.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, InvalidInputError

DEFAULT_REL_TOL = 1e-10
EIG_SIZE_CAP = 512


def _as_matrix(A, name="A"):
    A = np.array(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise InvalidInputError(f"{name} must be a 2-d array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return A


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of R^ambient_dim held as an orthonormal column basis."""

    ambient_dim: int
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float).reshape(self.ambient_dim, -1)
        object.__setattr__(self, "basis", _frozen(B))

    @property
    def dim(self):
        return self.basis.shape[1]

    @property
    def is_zero(self):
        return self.dim == 0

    @classmethod
    def zero(cls, n):
        return cls(n, np.zeros((n, 0)))

    @classmethod
    def full(cls, n):
        return cls(n, np.eye(n))

    @classmethod
    def span(cls, vectors, rel_tol=DEFAULT_REL_TOL):
        """Subspace spanned by the columns of ``vectors``."""
        V = _as_matrix(vectors, "vectors")
        n = V.shape[0]
        if V.shape[1] == 0:
            return cls.zero(n)
        U, s, _ = np.linalg.svd(V, full_matrices=False)
        r = _numerical_rank(s, V.shape, rel_tol)
        return cls(n, U[:, :r])

    def projector(self):
        return projector_onto(self)

    def contains(self, x, tol=1e-8):
        x = np.asarray(x, dtype=float)
        r = x - self.basis @ (self.basis.T @ x)
        return np.linalg.norm(r) <= tol * (1.0 + np.linalg.norm(x))

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


def _numerical_rank(s, shape, rel_tol):
    if s.size == 0 or s[0] == 0.0:
        return 0
    thresh = rel_tol * s[0] * max(shape)
    return int(np.sum(s > thresh))


def kernel_basis(A, rel_tol=DEFAULT_REL_TOL):
    """
    Orthonormal basis of ker A.

    Singular values at or below ``rel_tol * s_max * max(rows, cols)`` count as
    zero. ``A`` may have zero rows, in which case the kernel is all of R^n.
    """
    if rel_tol <= 0:
        raise InvalidInputError("rel_tol must be positive")
    A = np.array(A, dtype=float)
    if A.ndim != 2:
        raise InvalidInputError(f"A must be a 2-d array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("A has non-finite entries")
    rows, n = A.shape
    if n < 1:
        raise InvalidInputError("A must have at least one column")
    if rows == 0:
        return Subspace.full(n)
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    r = _numerical_rank(s, A.shape, rel_tol)
    return Subspace(n, Vt[r:].T)


def orthogonal_complement(S, rel_tol=DEFAULT_REL_TOL):
    if S.dim == 0:
        return Subspace.full(S.ambient_dim)
    return kernel_basis(S.basis.T, rel_tol)


def projector_onto(S):
    """Orthogonal projector B B' onto the subspace with orthonormal basis B."""
    return _frozen(S.basis @ S.basis.T)


def intersect(subspaces, rel_tol=DEFAULT_REL_TOL):
    """Intersection of subspaces: the common kernel of the stacked I - P_S."""
    subspaces = list(subspaces)
    if not subspaces:
        raise InvalidInputError("intersect needs at least one subspace")
    n = subspaces[0].ambient_dim
    if any(S.ambient_dim != n for S in subspaces):
        raise InvalidInputError("subspaces have mismatched ambient dimensions")
    if len(subspaces) == 1:
        return subspaces[0]
    if any(S.dim == 0 for S in subspaces):
        return Subspace.zero(n)
    eye = np.eye(n)
    stacked = np.vstack([eye - projector_onto(S) for S in subspaces])
    return kernel_basis(stacked, rel_tol)


def subspace_equal(S1, S2, tol=1e-8):
    if S1.ambient_dim != S2.ambient_dim:
        raise InvalidInputError("subspaces have mismatched ambient dimensions")
    if S1.dim != S2.dim:
        return False
    diff = projector_onto(S1) - projector_onto(S2)
    return induced_two_norm(diff) <= tol


def induced_two_norm(M):
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def is_projector(M, sym_tol=1e-10, idem_tol=1e-9):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    return bool(np.max(np.abs(M - M.T), initial=0.0) <= sym_tol
                and np.max(np.abs(M @ M - M), initial=0.0) <= idem_tol)


def as_blocks(Q, block_size=None):
    """
    View ``Q`` as an (m, m, n, n) array of blocks.

    ``Q`` is either already 4-d, a nested list of m x m blocks, or a square
    2-d array to be cut into ``block_size`` x ``block_size`` blocks.
    """
    if isinstance(Q, (list, tuple)):
        rows = [list(r) for r in Q]
        m = len(rows)
        if m == 0 or any(len(r) != m for r in rows):
            raise InvalidInputError("block matrix must be m x m blocks")
        shapes = {np.shape(b) for r in rows for b in r}
        if len(shapes) != 1:
            raise InvalidInputError(f"ragged block structure: {sorted(shapes)}")
        (shape,) = shapes
        if len(shape) != 2 or shape[0] != shape[1]:
            raise InvalidInputError("blocks must be square")
        return np.array(rows, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if Q.ndim == 4:
        m, m2, n, n2 = Q.shape
        if m != m2 or n != n2:
            raise InvalidInputError(f"bad block array shape {Q.shape}")
        return Q
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise InvalidInputError("block matrix must be square")
    if block_size is None or block_size < 1 or Q.shape[0] % block_size:
        raise InvalidInputError(
            f"size {Q.shape[0]} is not a multiple of block size {block_size}")
    n = block_size
    m = Q.shape[0] // n
    return Q.reshape(m, n, m, n).swapaxes(1, 2)


def blocks_to_matrix(blocks):
    blocks = np.asarray(blocks, dtype=float)
    m, _, n, _ = blocks.shape
    return blocks.swapaxes(1, 2).reshape(m * n, m * n)


def block_norm_matrix(Q, block_size=None):
    """The m x m matrix of blockwise induced two-norms."""
    B = as_blocks(Q, block_size)
    if B.shape[2] == 0:
        return np.zeros(B.shape[:2])
    return np.linalg.norm(B, ord=2, axis=(2, 3))


def mixed_matrix_norm(Q, block_size=None):
    """Induced infinity norm (max row sum) of the matrix of block two-norms."""
    N = block_norm_matrix(Q, block_size)
    return float(np.max(N.sum(axis=1)))


def spectral_radius(M, max_dim=EIG_SIZE_CAP):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError("spectral_radius needs a square matrix")
    if M.shape[0] > max_dim:
        raise CapacityError(
            f"dense eigensolve of size {M.shape[0]} exceeds cap {max_dim}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError("matrix has non-finite entries")
    if M.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))
