"""
Connectivity relative to the agents' kernels.

A nonempty vertex set E is *fully populated* when the kernels of the agents
in E already intersect down to the kernel intersection of all agents, and
*partially populated* otherwise.  A graph is D-connected when every
partially populated set has an in-neighbor outside itself.
"""

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import digraph as dg
from .errors import CapacityError, InvalidInputError
from .linalg import (DEFAULT_REL_TOL, intersect, kernel_basis, projector_onto,
                     subspace_equal)

BRUTEFORCE_MAX_M = 16


class SubsetClass(enum.Enum):
    FULLY_POPULATED = "fully-populated"
    PARTIALLY_POPULATED = "partially-populated"


class PopulationOracle:
    """
    Answers populated-subset queries for a fixed family of kernels.

    Intersections are memoized per subset; the object is otherwise immutable.
    """

    def __init__(self, subspaces, rel_tol=DEFAULT_REL_TOL, eq_tol=1e-8):
        self.subspaces = tuple(subspaces)
        if not self.subspaces:
            raise InvalidInputError("oracle needs at least one subspace")
        self.n = self.subspaces[0].ambient_dim
        if any(S.ambient_dim != self.n for S in self.subspaces):
            raise InvalidInputError("kernels have mismatched ambient dimensions")
        self.rel_tol = rel_tol
        self.eq_tol = eq_tol
        self._cache = {}
        self.global_intersection = self.intersection(range(1, self.m + 1))
        self.projectors = tuple(projector_onto(S) for S in self.subspaces)

    @classmethod
    def from_blocks(cls, A_blocks, **kw):
        return cls([kernel_basis(np.atleast_2d(np.asarray(A, float)))
                    for A in A_blocks], **kw)

    @property
    def m(self):
        return len(self.subspaces)

    @property
    def is_unique(self):
        return self.global_intersection.dim == 0

    def _key(self, E):
        key = frozenset(E)
        if not key:
            raise InvalidInputError("subset must be nonempty")
        if not all(1 <= i <= self.m for i in key):
            raise InvalidInputError(f"subset {sorted(key)} not within 1..{self.m}")
        return key

    def intersection(self, E):
        key = self._key(E)
        if key not in self._cache:
            self._cache[key] = intersect([self.subspaces[i - 1] for i in sorted(key)],
                                         self.rel_tol)
        return self._cache[key]

    def classify(self, E):
        S = self.intersection(E)
        G = self.global_intersection
        if S.dim == G.dim and subspace_equal(S, G, self.eq_tol):
            return SubsetClass.FULLY_POPULATED
        return SubsetClass.PARTIALLY_POPULATED

    def is_fully_populated(self, E):
        return self.classify(E) is SubsetClass.FULLY_POPULATED

    def partially_populated_subsets(self):
        """Every partially populated subset, by size then lexicographically."""
        _check_bruteforce_cap(self.m)
        out = []
        for k in range(1, self.m):
            for E in itertools.combinations(range(1, self.m + 1), k):
                if not self.is_fully_populated(E):
                    out.append(frozenset(E))
        return out


def classify_subset(oracle, E):
    return oracle.classify(E)


def _check_bruteforce_cap(m, cap=BRUTEFORCE_MAX_M):
    if m > cap:
        raise CapacityError(
            f"subset enumeration over m={m} vertices exceeds cap {cap}; "
            "use is_d_connected instead")


def _check_graph(oracle, G):
    if G.m != oracle.m:
        raise InvalidInputError(f"graph has {G.m} vertices, oracle has {oracle.m} agents")


def d_connectivity_failures(oracle, G, cap=BRUTEFORCE_MAX_M):
    """Partially populated subsets with no neighbor outside themselves."""
    _check_graph(oracle, G)
    _check_bruteforce_cap(oracle.m, cap)
    return [E for E in oracle.partially_populated_subsets()
            if dg.neighbor_set(G, E) <= E]


def is_d_connected_bruteforce(oracle, G, cap=BRUTEFORCE_MAX_M):
    """D-connectivity by enumerating every subset of the vertex set."""
    return not d_connectivity_failures(oracle, G, cap)


def is_d_connected(oracle, G):
    """
    D-connectivity in m intersections.

    G is D-connected iff for every vertex v the set of vertices that can
    reach v is fully populated.  Such a set is closed under taking
    neighbors, and any closed partially populated set contains one of them.
    """
    _check_graph(oracle, G)
    return all(oracle.is_fully_populated(dg.sunk_vertex_set(G, v))
               for v in range(1, G.m + 1))


def is_jointly(graphs, predicate):
    """Apply ``predicate`` to the composition ``G_q o ... o G_1``."""
    return predicate(dg.compose_sequence(graphs))


def is_jointly_d_connected(oracle, graphs):
    return is_jointly(graphs, lambda G: is_d_connected(oracle, G))


def is_jointly_rooted(graphs):
    return is_jointly(graphs, dg.is_rooted)


def is_jointly_strongly_connected(graphs):
    return is_jointly(graphs, dg.is_strongly_connected)


@dataclass
class WindowReport:
    """Result of a horizon-bounded repeated-joint-connectivity check."""

    ok: bool
    l: int
    tau0: int
    horizon: int
    failing_windows: list = field(default_factory=list)

    @property
    def verified_up_to(self):
        """Last time index covered by the check."""
        return self.tau0 + self.horizon * self.l - 1

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {"ok": self.ok, "l": self.l, "tau0": self.tau0,
                "horizon_windows": self.horizon,
                "verified_up_to": self.verified_up_to,
                "failing_windows": list(self.failing_windows)}


def is_repeatedly_jointly(seq, l, tau0, horizon, predicate):
    """
    Check that every window ``N(tau0+kl), ..., N(tau0+(k+1)l-1)`` for
    ``k = 0..horizon-1`` is jointly ``predicate``.

    The property is asymptotic; only ``horizon`` windows are verified.
    """
    if l < 1 or tau0 < 1 or horizon < 1:
        raise InvalidInputError("l, tau0 and horizon must all be >= 1")
    last = tau0 + horizon * l - 1
    if seq.length is not None and last > seq.length:
        raise InvalidInputError(
            f"horizon needs graphs up to t={last}, sequence has {seq.length}")
    failing = [k for k in range(horizon)
               if not is_jointly(seq.window(tau0 + k * l, l), predicate)]
    return WindowReport(not failing, l, tau0, horizon, failing)


def check_strong_equivalence(oracle, cap=BRUTEFORCE_MAX_M):
    """True iff every nonempty proper subset is partially populated."""
    _check_bruteforce_cap(oracle.m, cap)
    m = oracle.m
    return all(not oracle.is_fully_populated(E)
               for k in range(1, m)
               for E in itertools.combinations(range(1, m + 1), k))


def search_witness(m, predicate):
    """Smallest-arc-count graph in G_sa on ``m`` vertices satisfying ``predicate``."""
    if m > 5:
        raise CapacityError(f"exhaustive graph search over m={m} vertices is too large")
    for G in dg.all_graphs_with_self_arcs(m):
        if predicate(G):
            return G
    return None


def connectivity_report(oracle, G, bruteforce=None):
    """Machine-readable summary of D-connectivity of ``G``."""
    if bruteforce is None:
        bruteforce = oracle.m <= BRUTEFORCE_MAX_M
    sunk = []
    for v in range(1, G.m + 1):
        V = dg.sunk_vertex_set(G, v)
        sunk.append({"vertex": v, "sunk_set": sorted(V),
                     "intersection_dim": oracle.intersection(V).dim,
                     "fully_populated": oracle.is_fully_populated(V)})
    report = {
        "m": oracle.m,
        "global_intersection_dim": oracle.global_intersection.dim,
        "d_connected": is_d_connected(oracle, G),
        "strongly_connected": dg.is_strongly_connected(G),
        "rooted": dg.is_rooted(G),
        "sunk_sets": sunk,
    }
    if bruteforce:
        fails = d_connectivity_failures(oracle, G)
        report["failing_subsets"] = [sorted(E) for E in fails]
        report["partially_populated_subsets"] = [
            sorted(E) for E in oracle.partially_populated_subsets()]
    return report
