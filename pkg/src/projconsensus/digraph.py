"""
Directed neighbor graphs on vertices 1..m.

Arc convention: the pair ``(j, i)`` means information flows from ``j`` to
``i``, i.e. ``j`` is a neighbor of ``i``.  The boolean adjacency array is
indexed 0-based with ``adj[j-1, i-1]`` set for arc ``(j, i)``; the flocking
matrix is then ``D^-1 adj'`` and ``graph_of_matrix`` inverts it exactly.
"""

import itertools
from collections import deque

import numpy as np

from .errors import InvalidInputError


class DiGraph:
    """Immutable directed graph on vertices ``1..m``."""

    __slots__ = ("_m", "_adj", "_arcs", "_hash")

    def __init__(self, m, arcs=(), add_self_arcs=False):
        m = int(m)
        if m < 1:
            raise InvalidInputError("a graph needs at least one vertex")
        adj = np.zeros((m, m), dtype=bool)
        for arc in arcs:
            try:
                u, v = (int(a) for a in arc)
            except (TypeError, ValueError):
                raise InvalidInputError(f"arc {arc!r} is not a vertex pair") from None
            if not (1 <= u <= m and 1 <= v <= m):
                raise InvalidInputError(f"arc {(u, v)} has an endpoint outside 1..{m}")
            adj[u - 1, v - 1] = True
        if add_self_arcs:
            np.fill_diagonal(adj, True)
        self._set(adj)

    def _set(self, adj):
        adj = np.array(adj, dtype=bool)
        adj.setflags(write=False)
        self._m = adj.shape[0]
        self._adj = adj
        self._arcs = None
        self._hash = None

    @classmethod
    def from_adjacency(cls, adj):
        adj = np.asarray(adj)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1] or adj.shape[0] < 1:
            raise InvalidInputError("adjacency must be a nonempty square array")
        g = cls.__new__(cls)
        g._set(adj != 0)
        return g

    @classmethod
    def complete(cls, m):
        return cls.from_adjacency(np.ones((m, m), dtype=bool))

    @classmethod
    def self_arcs_only(cls, m):
        return cls.from_adjacency(np.eye(m, dtype=bool))

    @classmethod
    def random(cls, m, p, rng):
        """Each ordered pair is an arc with probability ``p``; self-arcs forced."""
        adj = rng.random((m, m)) < p
        np.fill_diagonal(adj, True)
        return cls.from_adjacency(adj)

    @property
    def m(self):
        return self._m

    @property
    def adjacency(self):
        return self._adj

    @property
    def arcs(self):
        if self._arcs is None:
            us, vs = np.nonzero(self._adj)
            self._arcs = frozenset((int(u) + 1, int(v) + 1) for u, v in zip(us, vs))
        return self._arcs

    @property
    def has_all_self_arcs(self):
        return bool(np.all(np.diag(self._adj)))

    def in_neighbors(self, i):
        """Neighbors of ``i`` (vertices with an arc into ``i``), self included."""
        _check_vertex(self, i)
        return frozenset(int(j) + 1 for j in np.nonzero(self._adj[:, i - 1])[0])

    def in_degrees(self):
        return self._adj.sum(axis=0)

    def num_arcs(self, include_self_arcs=True):
        k = int(self._adj.sum())
        return k if include_self_arcs else k - int(np.trace(self._adj))

    def __eq__(self, other):
        if not isinstance(other, DiGraph):
            return NotImplemented
        return self._m == other._m and np.array_equal(self._adj, other._adj)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._m, self._adj.tobytes()))
        return self._hash

    def __repr__(self):
        arcs = sorted(a for a in self.arcs if a[0] != a[1])
        body = ", ".join(f"{u}->{v}" for u, v in arcs)
        return f"DiGraph(m={self._m}, [{body}])"

    def to_text(self, include_self_arcs=False):
        return [f"{u}->{v}" for u, v in sorted(self.arcs)
                if include_self_arcs or u != v]


def _check_vertex(G, v):
    if not (isinstance(v, (int, np.integer)) and 1 <= v <= G.m):
        raise InvalidInputError(f"vertex {v!r} outside 1..{G.m}")


def _check_same_size(*graphs):
    ms = {g.m for g in graphs}
    if len(ms) != 1:
        raise InvalidInputError(f"graphs have different vertex counts {sorted(ms)}")


def parse_arcs(m, items):
    """
    Build a graph from text arcs like ``"1->2"``.

    Returns ``(graph, self_arcs_added)``; missing self-arcs are filled in and
    reported through the flag.
    """
    arcs = []
    for item in items:
        if isinstance(item, str):
            parts = item.split("->")
            if len(parts) != 2:
                raise InvalidInputError(f"arc {item!r} is not of the form 'from->to'")
            try:
                arcs.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise InvalidInputError(f"arc {item!r} has non-integer endpoints") from None
        else:
            arcs.append(tuple(item))
    G = DiGraph(m, arcs)
    if G.has_all_self_arcs:
        return G, False
    return DiGraph(m, arcs, add_self_arcs=True), True


def graph_of_matrix(M):
    """Graph of a nonnegative matrix: arc (i, j) iff M[j, i] > 0."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError("graph_of_matrix needs a square matrix")
    if np.any(M < 0):
        raise InvalidInputError("graph_of_matrix needs a nonnegative matrix")
    return DiGraph.from_adjacency(M.T > 0)


def flocking_matrix(G):
    """Row-stochastic neighborhood-averaging matrix ``D^-1 A'`` of ``G``."""
    if not G.has_all_self_arcs:
        raise InvalidInputError("flocking matrix needs self-arcs at every vertex")
    At = G.adjacency.T.astype(float)
    return At / At.sum(axis=1, keepdims=True)


def compose(Gq, Gp):
    """
    Composition ``Gq o Gp``: arc (i, j) iff (i, k) in Gp and (k, j) in Gq.

    Matches ``graph_of_matrix(Mq @ Mp) == compose(graph_of_matrix(Mq),
    graph_of_matrix(Mp))`` for nonnegative matrices.
    """
    _check_same_size(Gq, Gp)
    prod = Gp.adjacency.astype(np.int64) @ Gq.adjacency.astype(np.int64)
    return DiGraph.from_adjacency(prod > 0)


def compose_sequence(graphs):
    """``G_q o ... o G_1`` for the sequence ``G_1, ..., G_q``."""
    graphs = list(graphs)
    if not graphs:
        raise InvalidInputError("cannot compose an empty sequence")
    _check_same_size(*graphs)
    adj = graphs[0].adjacency.astype(np.int64)
    for g in graphs[1:]:
        adj = ((adj @ g.adjacency.astype(np.int64)) > 0).astype(np.int64)
    return DiGraph.from_adjacency(adj > 0)


def neighbor_set(G, S):
    """All vertices ``j`` with an arc ``(j, i)`` for some ``i`` in ``S``."""
    S = frozenset(S)
    for v in S:
        _check_vertex(G, v)
    if not S:
        return frozenset()
    cols = np.array(sorted(S)) - 1
    hit = G.adjacency[:, cols].any(axis=1)
    return frozenset(int(j) + 1 for j in np.nonzero(hit)[0])


def reachability(G):
    """Boolean ``R`` with ``R[u, v]`` true iff ``v`` is reachable from ``u`` (0-based)."""
    R = G.adjacency.copy() | np.eye(G.m, dtype=bool)
    while True:
        nxt = (R.astype(np.int64) @ R.astype(np.int64)) > 0
        if np.array_equal(nxt, R):
            return R
        R = nxt


def sunk_vertex_set(G, v):
    """Vertices from which ``v`` is reachable (``v`` included)."""
    _check_vertex(G, v)
    seen = {v}
    frontier = deque([v])
    adj = G.adjacency
    while frontier:
        i = frontier.popleft()
        for j in np.nonzero(adj[:, i - 1])[0]:
            j = int(j) + 1
            if j not in seen:
                seen.add(j)
                frontier.append(j)
    return frozenset(seen)


def is_sunk_at(G, v):
    return len(sunk_vertex_set(G, v)) == G.m


def is_strongly_sunk_at(G, v):
    _check_vertex(G, v)
    col = G.adjacency[:, v - 1].copy()
    col[v - 1] = True
    return bool(col.all())


def is_strongly_connected(G):
    return bool(reachability(G).all())


def is_rooted(G):
    """True iff some vertex reaches every vertex (a directed spanning tree exists)."""
    return bool(reachability(G).all(axis=1).any())


def scc_decomposition(G):
    """
    Strongly connected components, ordered by smallest member.

    Returns a list of ``(component, has_external_in_arc)`` pairs, where the
    flag is true iff some arc enters the component from outside it.
    """
    R = reachability(G)
    mutual = R & R.T
    seen = np.zeros(G.m, dtype=bool)
    out = []
    adj = G.adjacency
    for i in range(G.m):
        if seen[i]:
            continue
        members = np.nonzero(mutual[i])[0]
        seen[members] = True
        inside = np.zeros(G.m, dtype=bool)
        inside[members] = True
        external = bool(adj[np.ix_(~inside, inside)].any())
        out.append((frozenset(int(k) + 1 for k in members), external))
    return out


def find_route(graphs, start, end):
    """
    A route ``start = i_0, ..., i_q = end`` with ``(i_{k-1}, i_k)`` an arc of
    the k-th graph, or ``None`` if none exists.
    """
    graphs = list(graphs)
    if not graphs:
        raise InvalidInputError("route search needs at least one graph")
    _check_same_size(*graphs)
    _check_vertex(graphs[0], start)
    _check_vertex(graphs[0], end)
    m = graphs[0].m
    # parents[k][v] = predecessor of v at layer k+1
    layer = np.zeros(m, dtype=bool)
    layer[start - 1] = True
    parents = []
    for g in graphs:
        adj = g.adjacency
        nxt = (layer[:, None] & adj).any(axis=0)
        par = np.full(m, -1)
        for v in np.nonzero(nxt)[0]:
            par[v] = int(np.nonzero(layer & adj[:, v])[0][0])
        parents.append(par)
        layer = nxt
    if not layer[end - 1]:
        return None
    route = [end - 1]
    for par in reversed(parents):
        route.append(int(par[route[-1]]))
    return [v + 1 for v in reversed(route)]


def all_graphs_with_self_arcs(m):
    """Every graph in G_sa on ``m`` vertices, fewest arcs first (2^(m(m-1)) graphs)."""
    pairs = [(i, j) for i in range(m) for j in range(m) if i != j]
    for k in range(len(pairs) + 1):
        for chosen in itertools.combinations(pairs, k):
            adj = np.eye(m, dtype=bool)
            for i, j in chosen:
                adj[i, j] = True
            yield DiGraph.from_adjacency(adj)


class GraphSequence:
    """
    Source of neighbor graphs ``N(1), N(2), ...`` (time is 1-based).

    ``length`` is ``None`` for unbounded sequences.
    """

    m = None
    length = None

    def graph(self, t):
        raise NotImplementedError

    def window(self, start, l):
        return [self.graph(t) for t in range(start, start + l)]

    def __getitem__(self, t):
        return self.graph(t)

    def _check_t(self, t):
        if t < 1:
            raise InvalidInputError(f"time index must be >= 1, got {t}")
        if self.length is not None and t > self.length:
            raise InvalidInputError(
                f"time {t} is past the end of an explicit sequence of length {self.length}")


class ExplicitSequence(GraphSequence):
    def __init__(self, graphs):
        self.graphs = tuple(graphs)
        if not self.graphs:
            raise InvalidInputError("explicit sequence is empty")
        _check_same_size(*self.graphs)
        self.m = self.graphs[0].m
        self.length = len(self.graphs)

    def graph(self, t):
        self._check_t(t)
        return self.graphs[t - 1]

    def to_dict(self):
        return {"kind": "explicit", "graphs": [g.to_text() for g in self.graphs]}


class PeriodicSequence(GraphSequence):
    def __init__(self, period):
        self.period = tuple(period)
        if not self.period:
            raise InvalidInputError("periodic sequence needs a nonempty period")
        _check_same_size(*self.period)
        self.m = self.period[0].m

    def graph(self, t):
        self._check_t(t)
        return self.period[(t - 1) % len(self.period)]

    def to_dict(self):
        return {"kind": "periodic", "graphs": [g.to_text() for g in self.period]}


class RandomSequence(GraphSequence):
    """
    Seeded Erdos-Renyi graphs with forced self-arcs.

    Each ``N(t)`` is drawn from its own generator keyed by ``(seed, t)``, so
    graphs can be requested in any order with identical results.
    """

    def __init__(self, m, p, seed):
        if not 0.0 <= p <= 1.0:
            raise InvalidInputError(f"arc probability {p} outside [0, 1]")
        self.m = int(m)
        self.p = float(p)
        self.seed = int(seed)

    def graph(self, t):
        self._check_t(t)
        rng = np.random.default_rng([self.seed, int(t)])
        return DiGraph.random(self.m, self.p, rng)

    def to_dict(self):
        return {"kind": "random", "p": self.p, "seed": self.seed}
