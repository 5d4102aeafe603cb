"""
Stability and convergence-rate analysis of the stacked error dynamics.

Everything here works on the error recursion ``y <- P (F kron I) P y`` and
products of its one-round maps over finite graph sequences.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import digraph as dg
from .connectivity import is_d_connected
from .errors import CapacityError, InvalidInputError, NotApplicableError
from .linalg import (EIG_SIZE_CAP, Subspace, induced_two_norm, mixed_matrix_norm,
                     spectral_radius)
from .solver import StackedOperator, build_stacked, transition

TOL_EIG = 1e-7
ROUTE_STATE_CAP = 1 << 20
WORD_CAP = 10 ** 6
STRONG_PRODUCT_CAP = 10 ** 5


@dataclass
class StabilityReport:
    spectral_radius: float = None
    is_stable: bool = None
    scc_certificate: list = None
    bruteforce_agreement: bool = None

    def to_dict(self):
        cert = None
        if self.scc_certificate is not None:
            cert = [{"component": sorted(c), "has_external_in_arc": ext,
                     "intersection_dim": dim} for c, ext, dim in self.scc_certificate]
        return {"spectral_radius": self.spectral_radius, "is_stable": self.is_stable,
                "scc_certificate": cert, "bruteforce_agreement": self.bruteforce_agreement}


def stability_spectral(op, max_dim=EIG_SIZE_CAP, tol=TOL_EIG):
    """Spectral radius of a one-round operator; stable iff it is below ``1 - tol``."""
    M = op.matrix if isinstance(op, StackedOperator) else np.asarray(op, float)
    r = spectral_radius(M, max_dim)
    return StabilityReport(spectral_radius=r, is_stable=r < 1.0 - tol)


def stability_scc(problem, G):
    """
    Graph-side stability test for a constant graph.

    Stable iff every strongly connected component without in-arcs from
    outside has a zero kernel intersection.
    """
    oracle = problem.oracle
    cert = []
    stable = True
    for comp, external in dg.scc_decomposition(G):
        dim = oracle.intersection(comp).dim
        cert.append((comp, external, dim))
        if not external and dim > 0:
            stable = False
    return StabilityReport(is_stable=stable, scc_certificate=cert)


def stability_report(problem, G, max_dim=EIG_SIZE_CAP):
    """Both tests, with ``bruteforce_agreement`` recording whether they agree."""
    spec = stability_spectral(build_stacked(problem, G), max_dim)
    scc = stability_scc(problem, G)
    return StabilityReport(spec.spectral_radius, spec.is_stable, scc.scc_certificate,
                           spec.is_stable == scc.is_stable)


@dataclass
class UnitEigenvalueWitness:
    """
    Fixed vector of a non-contracting product.

    ``vector`` is ``(m, n)``: the common direction ``z`` on every agent of
    ``subset``, completed on the other agents so that ``product @ v = v``.
    ``block_residual`` checks the subset block alone.
    """

    subset: frozenset
    direction: np.ndarray
    vector: np.ndarray
    residual: float
    block_residual: float

    @property
    def valid(self):
        return self.residual <= 1e-8

    def to_dict(self):
        return {"subset": sorted(self.subset), "direction": self.direction.tolist(),
                "vector": self.vector.tolist(), "residual": self.residual,
                "block_residual": self.block_residual}


def _closed_partially_populated(oracle, G):
    """Smallest set of vertices that can reach some v and is partially populated."""
    best = None
    for v in range(1, G.m + 1):
        V = dg.sunk_vertex_set(G, v)
        if not oracle.is_fully_populated(V):
            if best is None or (len(V), sorted(V)) < (len(best), sorted(best)):
                best = V
    return best


def unit_eigenvalue_witness(graphs, problem):
    """
    Eigenvector at 1 of the product over ``graphs`` when the sequence is not
    jointly D-connected; ``None`` when it is.
    """
    graphs = list(graphs)
    oracle = problem.oracle
    E = _closed_partially_populated(oracle, dg.compose_sequence(graphs))
    if E is None:
        return None
    S = oracle.intersection(E)
    Gi = oracle.global_intersection
    # a direction in the subset's kernel intersection orthogonal to the global one
    B = S.basis - Gi.basis @ (Gi.basis.T @ S.basis)
    z = Subspace.span(B).basis[:, 0]
    m, n = problem.m, problem.n
    M = transition(problem, graphs).matrix
    inE = np.zeros(m, dtype=bool)
    inE[[i - 1 for i in E]] = True
    rows_E = np.repeat(inE, n)
    zbar = np.tile(z, int(inE.sum()))
    v = np.zeros(m * n)
    v[rows_E] = zbar
    block_res = float(np.max(np.abs(M[np.ix_(rows_E, rows_E)] @ zbar - zbar)))
    if (~inE).any():
        C = M[np.ix_(~rows_E, ~rows_E)]
        Bm = M[np.ix_(~rows_E, rows_E)]
        w, *_ = np.linalg.lstsq(np.eye(C.shape[0]) - C, Bm @ zbar, rcond=None)
        v[~rows_E] = w
    res = float(np.max(np.abs(M @ v - v)))
    return UnitEigenvalueWitness(frozenset(E), z, v.reshape(m, n), res, block_res)


@dataclass
class ContractionCertificate:
    """
    Per-vertex routes showing the product over ``tau`` graphs contracts.

    ``routes[v]`` ends at ``v`` and visits a fully populated vertex set.
    """

    tau: int
    routes: dict
    covered: dict
    mixed_norm: float

    @property
    def complete(self):
        return self.mixed_norm < 1.0

    def to_dict(self):
        return {"tau": self.tau, "mixed_norm": self.mixed_norm,
                "routes": {str(v): r for v, r in sorted(self.routes.items())},
                "covered": {str(v): sorted(c) for v, c in sorted(self.covered.items())}}


def _covering_route(graphs, v, oracle, full_cache, state_cap):
    """
    Search backward from ``v`` for a route over ``graphs`` ending at ``v``
    whose visited set is fully populated.  States are (vertex, visited set).
    """
    m = oracle.m
    q = len(graphs)
    if m * (1 << m) > state_cap:
        raise CapacityError(f"route search state space m*2^m = {m * (1 << m)} exceeds cap")

    def full(mask):
        if mask not in full_cache:
            full_cache[mask] = oracle.is_fully_populated(
                [i + 1 for i in range(m) if mask >> i & 1])
        return full_cache[mask]

    start = (v - 1, 1 << (v - 1))
    layer = {start: None}
    parents = []
    hit = start if full(start[1]) else None
    k = q
    while hit is None and k > 0:
        adj = graphs[k - 1].adjacency
        nxt = {}
        for (i, mask) in layer:
            for u in np.nonzero(adj[:, i])[0]:
                u = int(u)
                st = (u, mask | (1 << u))
                if st not in nxt:
                    nxt[st] = (i, mask)
                    if hit is None and full(st[1]):
                        hit = st
        parents.append(nxt)
        layer = nxt
        k -= 1
    if hit is None:
        return None
    # walk forward from the hit state back to v, then pad the start with self-arcs
    tail = [hit]
    for par in reversed(parents):
        tail.append(par[tail[-1]])
    route = [s[0] + 1 for s in tail]
    route = [route[0]] * (q + 1 - len(route)) + route
    covered = frozenset(i + 1 for i in range(m) if hit[1] >> i & 1)
    return route, covered


def contraction_certificate(graphs, oracle, state_cap=ROUTE_STATE_CAP):
    """
    Certificate that the product over ``graphs`` contracts in the mixed norm,
    or ``None`` when some vertex has no covering route.
    """
    graphs = list(graphs)
    if not graphs:
        raise InvalidInputError("need at least one graph")
    if not oracle.is_unique:
        raise NotApplicableError("contraction certificates need a unique-solution oracle")
    if any(not g.has_all_self_arcs for g in graphs):
        raise InvalidInputError("every graph needs self-arcs at all vertices")
    full_cache = {}
    routes, covered = {}, {}
    for v in range(1, oracle.m + 1):
        found = _covering_route(graphs, v, oracle, full_cache, state_cap)
        if found is None:
            return None
        routes[v], covered[v] = found
    projectors = np.array(oracle.projectors)
    prod = transition(None, graphs, projectors)
    return ContractionCertificate(len(graphs), routes, covered,
                                  mixed_matrix_norm(prod.blocks))


@dataclass
class RateBound:
    lam: float
    formula_used: str
    tau: int = None
    rho: float = None
    omega: int = None
    l: int = None
    certified: bool = True
    tau_certified: int = None
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {"lambda": self.lam, "formula_used": self.formula_used, "tau": self.tau,
                "rho": self.rho, "omega": self.omega, "l": self.l,
                "certified": self.certified, "tau_certified": self.tau_certified,
                **self.details}


def corollary_lambda(m, tau, rho):
    """``(1 - (m-1)(1-rho)/m^tau)^(1/tau)``."""
    return (1.0 - (m - 1) * (1.0 - rho) / m ** tau) ** (1.0 / tau)


def smallest_contraction_length(graphs, oracle, word_cap=WORD_CAP, max_tau=None):
    """
    Smallest ``tau`` such that every length-``tau`` word over ``graphs`` has a
    contraction certificate.
    """
    graphs = list(graphs)
    if max_tau is None:
        max_tau = oracle.m * oracle.m * 4
    for tau in range(1, max_tau + 1):
        if len(graphs) ** tau > word_cap:
            raise CapacityError(
                f"{len(graphs)}^{tau} graph words exceed the enumeration cap {word_cap}")
        if all(contraction_certificate(w, oracle) is not None
               for w in itertools.product(graphs, repeat=tau)):
            return tau
    raise CapacityError(f"no certified contraction length up to {max_tau}")


def covering_product_norm(projectors, length, word_cap=WORD_CAP):
    """Max two-norm of ``P_{j1} ... P_{j_length}`` over words using every index."""
    P = np.asarray(projectors)
    m = len(P)
    if length < m:
        raise InvalidInputError(f"words of length {length} cannot cover {m} indices")
    if m ** length > word_cap:
        raise CapacityError(f"{m}^{length} projector words exceed the cap {word_cap}")
    best = 0.0
    full = (1 << m) - 1
    # depth-first over words, sharing prefix products
    stack = [((), np.eye(P.shape[1]), 0)]
    while stack:
        word, prod, mask = stack.pop()
        if len(word) == length:
            if mask == full:
                best = max(best, induced_two_norm(prod))
            continue
        missing = m - bin(mask).count("1")
        if missing > length - len(word):
            continue
        for j in range(m):
            stack.append((word + (j,), prod @ P[j], mask | (1 << j)))
    return best


def rate_bound_corollary(problem, graphs, word_cap=WORD_CAP):
    """
    Convergence-rate bound for sequences drawn from a finite set of
    D-connected graphs, via the smallest certified contraction length.
    """
    graphs = list(dict.fromkeys(graphs))
    oracle = problem.oracle
    if not problem.unique:
        raise NotApplicableError("rate bound needs a unique-solution problem")
    bad = [i for i, g in enumerate(graphs) if not is_d_connected(oracle, g)]
    if bad:
        raise InvalidInputError(f"graphs {bad} are not D-connected")
    m = problem.m
    tau_cert = smallest_contraction_length(graphs, oracle, word_cap)
    # any longer length is also certified; words of length tau+1 must cover all m indices
    tau = max(tau_cert, m - 1)
    rho = covering_product_norm(problem.projectors, tau + 1, word_cap)
    lam = corollary_lambda(m, tau, rho)
    return RateBound(lam, "corollary", tau=tau, rho=rho, certified=lam < 1.0,
                     tau_certified=tau_cert)


def _window_operators(problem, graphs, l):
    """Distinct length-``l`` windows whose composition is strongly connected."""
    ops = []
    for w in itertools.product(graphs, repeat=l):
        if dg.is_strongly_connected(dg.compose_sequence(w)):
            ops.append(transition(problem, w).blocks)
    return ops


def _mixed_norms(blocks):
    """Mixed norm of each (…, m, m, n, n) block array along the leading axis."""
    N = np.linalg.norm(blocks, ord=2, axis=(-2, -1))
    return N.sum(axis=-1).max(axis=-1)


def rate_bound_strong_sequences(problem, graphs, l=1, cap=STRONG_PRODUCT_CAP,
                                samples=2000, seed=0):
    """
    Rate bound for sequences that are repeatedly jointly strongly connected
    by windows of length ``l`` drawn from a finite graph set.

    Takes the worst mixed norm over all products of ``omega = m(m-1)/2``
    admissible windows.  When there are more than ``cap`` such products a
    seeded sample is used instead and the bound is flagged uncertified.
    """
    if not problem.unique:
        raise NotApplicableError("rate bound needs a unique-solution problem")
    graphs = list(dict.fromkeys(graphs))
    m = problem.m
    omega = m * (m - 1) // 2
    ops = _window_operators(problem, graphs, l)
    if not ops:
        raise InvalidInputError("no window of length l is jointly strongly connected")
    W = np.array(ops)
    count = len(ops) ** omega
    if count <= cap:
        prods = W
        for _ in range(omega - 2):
            prods = np.einsum("aijkl,bjplq->abipkq", prods, W).reshape(-1, *W.shape[1:])
        sup = 0.0
        if omega == 1:
            sup = float(_mixed_norms(W).max())
        else:
            # last factor applied chunkwise to bound memory
            for start in range(0, len(prods), 256):
                chunk = np.einsum("aijkl,bjplq->abipkq", prods[start:start + 256], W)
                sup = max(sup, float(_mixed_norms(chunk).max()))
        certified = True
    else:
        rng = np.random.default_rng(seed)
        sup = 0.0
        for _ in range(samples):
            idx = rng.integers(len(ops), size=omega)
            prod = W[idx[0]]
            for k in idx[1:]:
                prod = np.einsum("ijkl,jplq->ipkq", W[k], prod)
            sup = max(sup, float(_mixed_norms(prod[None])[0]))
        certified = False
    lam = sup ** (1.0 / (omega * l))
    return RateBound(lam, "strong-sequence-theorem", omega=omega, l=l,
                     certified=certified and lam < 1.0,
                     details={"windows": len(ops), "products": count, "sup_norm": sup})


@dataclass
class PConvergableReport:
    ok: bool
    failing: list
    cross_check: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {"ok": self.ok, "failing_graphs": self.failing, **self.cross_check}


def p_convergable_check(problem, graphs, cross_check=False, steps=None, seed=0):
    """
    Every graph in the set D-connected <=> all products from the set go to 0.

    With ``cross_check`` the verdict is confirmed numerically: a random
    product is driven below 1e-6 in mixed norm, or a unit-eigenvalue witness
    is produced for a constant sequence of a failing graph.
    """
    if not problem.unique:
        raise NotApplicableError("P-convergability is defined for unique-solution problems")
    graphs = list(graphs)
    failing = [i for i, g in enumerate(graphs) if not is_d_connected(problem.oracle, g)]
    report = PConvergableReport(not failing, failing)
    if not cross_check:
        return report
    if failing:
        wit = unit_eigenvalue_witness([graphs[failing[0]]], problem)
        report.cross_check = {"witness_graph": failing[0],
                              "witness_residual": wit.residual}
    else:
        rng = np.random.default_rng(seed)
        if steps is None:
            steps = max(1000, 100 * smallest_contraction_length(graphs, problem.oracle))
        prod = StackedOperator.identity(problem.m, problem.n)
        norm = 1.0
        t = 0
        while norm >= 1e-6 and t < steps:
            prod = build_stacked(problem, graphs[rng.integers(len(graphs))]) @ prod
            norm = mixed_matrix_norm(prod.blocks)
            t += 1
        report.cross_check = {"steps": t, "final_mixed_norm": norm,
                              "reached_tolerance": norm < 1e-6}
    return report
