import io
import itertools

import numpy as np
import pytest

from projconsensus import digraph as dg
from projconsensus import solver as sv
from projconsensus.connectivity import is_d_connected
from projconsensus.errors import (InconsistentEquationError, InvalidInputError,
                                  NotApplicableError)
from projconsensus.generators import random_graph, random_problem
from projconsensus.linalg import Subspace, intersect, is_projector, kernel_basis
from projconsensus.solver import Problem

C = dg.DiGraph


def test_agent_data():
    ag = sv.AgentData.build([[1.0, 2.0, 3.0, 4.0]], [10.0])
    assert ag.kernel.dim == 3
    assert np.max(np.abs(ag.A @ ag.kernel.basis)) <= 1e-8
    assert ag.consistent and ag.residual(ag.least_norm_solution()) <= 1e-8


def test_problem_flags(paper_problem):
    assert paper_problem.m == 4 and paper_problem.consistent
    assert paper_problem.kernel_intersection.dim == 2 and not paper_problem.unique
    x = paper_problem.particular_solution
    assert paper_problem.stacked_residual(x) <= 1e-7 * (1 + np.linalg.norm(paper_problem.b))


def test_problem_column_mismatch_names_agent():
    with pytest.raises(InvalidInputError, match="agent 2"):
        Problem.from_blocks([np.eye(2), np.ones((1, 3))], [np.zeros(2), np.zeros(1)])


def test_inconsistent_agent_detected():
    p = Problem.from_blocks([np.array([[1.0], [1.0]]), np.eye(1)],
                            [np.array([0.0, 1.0]), np.zeros(1)])
    with pytest.raises(InconsistentEquationError) as exc:
        sv.init_states(p)
    assert exc.value.agent == 1


def test_init_examples():
    p = Problem.from_blocks([np.eye(2), np.eye(2)], [np.array([3.0, -1.0])] * 2)
    assert np.array_equal(sv.init_states(p), [[3.0, -1.0], [3.0, -1.0]])
    z = Problem.from_blocks([np.zeros((1, 3))], [np.zeros(1)])
    assert np.array_equal(sv.init_states(z), np.zeros((1, 3)))
    r1 = sv.init_states(z, "random-kernel", np.random.default_rng(3))
    r2 = sv.init_states(z, "random-kernel", np.random.default_rng(3))
    assert np.array_equal(r1, r2) and np.linalg.norm(r1) > 0
    q = Problem.from_blocks([np.array([[1.0, 1.0]])], [np.array([2.0])])
    assert np.allclose(sv.init_states(q), [[1.0, 1.0]])
    with pytest.raises(InvalidInputError):
        sv.init_states(q, "bogus")


def test_step_examples(rng):
    p = Problem.from_blocks([np.eye(3)] * 3, [np.ones(3)] * 3)
    X = sv.init_states(p)
    assert np.allclose(sv.step(p, X, C.complete(3)), X)
    q = random_problem(rng, 3, 3, kernel_dim=1)
    Y = rng.standard_normal((3, 3))
    assert np.array_equal(sv.step(q, Y, C.self_arcs_only(3)), Y)
    with pytest.raises(InvalidInputError):
        sv.step(q, Y, C(3, [(1, 2)]))


def test_zero_problem_is_averaging(rng):
    p = Problem.from_blocks([np.zeros((1, 2))] * 4, [np.zeros(1)] * 4)
    assert p.is_zero
    for _ in range(20):
        G = random_graph(rng, 4, 0.4)
        X = rng.standard_normal((4, 2))
        expected = np.array([X[sorted(j - 1 for j in G.in_neighbors(i))].mean(axis=0)
                             for i in range(1, 5)])
        assert np.allclose(sv.step(p, X, G), expected)


def test_stacked_operator_matches_kron(rng):
    for _ in range(30):
        p = random_problem(rng, int(rng.integers(2, 5)), int(rng.integers(2, 5)),
                           kernel_dim=0)
        G = random_graph(rng, p.m, 0.5)
        P = np.zeros((p.m * p.n,) * 2)
        for i in range(p.m):
            P[i * p.n:(i + 1) * p.n, i * p.n:(i + 1) * p.n] = p.projectors[i]
        expected = P @ np.kron(dg.flocking_matrix(G), np.eye(p.n)) @ P
        assert np.allclose(sv.build_stacked(p, G).matrix, expected, atol=1e-12)


def test_stacked_examples():
    z = Problem.from_blocks([np.zeros((1, 2))] * 3, [np.zeros(1)] * 3)
    G = C(3, [(1, 2), (3, 1)], add_self_arcs=True)
    assert np.allclose(sv.build_stacked(z, G).matrix,
                       np.kron(dg.flocking_matrix(G), np.eye(2)))
    p = Problem.from_blocks([np.array([[0.0, 1.0]])] * 2, [np.zeros(1)] * 2)
    blocks = sv.build_stacked(p, C.complete(2)).blocks
    for i, j in itertools.product(range(2), repeat=2):
        assert np.allclose(blocks[i, j], 0.5 * np.diag([1.0, 0.0]))


def test_error_dynamics_follow_stacked_operator(rng):
    for _ in range(20):
        p = random_problem(rng, 4, 3, kernel_dim=0)
        X = sv.init_states(p, "random-kernel", rng)
        xs = p.particular_solution
        for _ in range(10):
            G = random_graph(rng, 4, 0.4)
            X2 = sv.step(p, X, G)
            Y2 = sv.build_stacked(p, G).apply(X - xs)
            assert np.max(np.abs((X2 - xs) - Y2)) <= 1e-10
            assert np.allclose(sv.error_step(p.projectors, X - xs, G), Y2, atol=1e-10)
            X = X2


def test_transition_is_product(rng):
    p = random_problem(rng, 3, 3)
    graphs = [random_graph(rng, 3, 0.4) for _ in range(4)]
    M = np.eye(9)
    for G in graphs:
        M = sv.build_stacked(p, G).matrix @ M
    assert np.allclose(sv.transition(p, graphs).matrix, M)


def test_simulate_unique_converges(rng):
    p = random_problem(rng, 4, 3, kernel_dim=0)
    tr = sv.simulate(p, dg.PeriodicSequence([C.complete(4)]), 600)
    assert tr.max_error[-1] < 1e-8 and tr.disagreement[-1] < 1e-8
    slope = np.polyfit(np.arange(30), np.log(tr.max_error[:30] + 1e-15), 1)[0]
    assert slope < 0
    tol = 1e-7 * (1 + np.linalg.norm(p.b))
    assert np.all(tr.residual <= tol)


def test_simulate_self_arcs_constant(rng):
    p = random_problem(rng, 3, 3, kernel_dim=1)
    tr = sv.simulate(p, dg.PeriodicSequence([C.self_arcs_only(3)]), 20,
                     "random-kernel", rng)
    assert np.all(tr.states == tr.states[0])


def test_simulate_non_unique_agrees(rng):
    p = random_problem(rng, 4, 4, kernel_dim=1)
    cyc = C(4, [(1, 2), (2, 3), (3, 4), (4, 1)], add_self_arcs=True)
    assert is_d_connected(p.oracle, cyc) and dg.is_rooted(cyc)
    tr = sv.simulate(p, dg.PeriodicSequence([cyc]), 400, "random-kernel", rng)
    x = tr.final_states.mean(axis=0)
    assert tr.disagreement[-1] < 1e-8 and p.stacked_residual(x) < 1e-7


def test_trace_csv():
    p = Problem.from_blocks([np.eye(1)] * 2, [np.ones(1)] * 2)
    tr = sv.simulate(p, dg.PeriodicSequence([C.complete(2)]), 2)
    buf = io.StringIO()
    tr.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,agent,error,disagreement,residual"
    rows = [ln.split(",") for ln in lines[1:]]
    assert [r[:2] for r in rows] == [["1", "1"], ["1", "2"], ["2", "1"], ["2", "2"]]
    assert all(abs(float(v)) < 1e-15 for r in rows for v in r[2:])


def _quotient_props(p, Q, Pbar):
    n = p.n
    Pint = p.kernel_intersection.projector()
    assert np.allclose(Q @ Q.T, np.eye(Q.shape[0]), atol=1e-9)
    assert np.allclose(Q.T @ Q + Pint, np.eye(n), atol=1e-9)
    for P, Pb in zip(p.projectors, Pbar):
        assert is_projector(Pb, sym_tol=1e-9)
        assert np.max(np.abs(Q @ P - Pb @ Q)) <= 1e-9


def test_quotient_properties(rng):
    for _ in range(50):
        n = int(rng.integers(2, 6))
        p = random_problem(rng, int(rng.integers(2, 6)), n,
                           kernel_dim=int(rng.integers(1, n)), dup_prob=0.4)
        Q, Pbar = sv.quotient_decompose(p)
        _quotient_props(p, Q, Pbar)
        subs = [kernel_basis(np.eye(len(Pb)) - Pb) for Pb in Pbar]
        assert intersect(subs).dim == 0


def test_quotient_errors_and_equal_rows(rng):
    with pytest.raises(NotApplicableError):
        sv.quotient_decompose(random_problem(rng, 3, 3, kernel_dim=0))
    with pytest.raises(NotApplicableError):
        sv.quotient_decompose(Problem.from_blocks([np.zeros((1, 3))] * 2, [np.zeros(1)] * 2))
    A = rng.standard_normal((2, 5))
    p = Problem.from_blocks([A, 2 * A], [np.zeros(2)] * 2)
    Q, Pbar = sv.quotient_decompose(p)
    assert Q.shape == (2, 5) and np.allclose(Pbar, 0, atol=1e-12)


def test_consensus_subsystem(rng):
    G = random_graph(rng, 4, 0.5)
    Z = np.tile(rng.standard_normal(3), (4, 1))
    assert np.allclose(sv.consensus_subsystem_step(Z, G), Z)
    Z = rng.standard_normal((4, 3))
    out = sv.consensus_subsystem_step(Z, C.complete(4))
    assert np.allclose(out, Z.mean(axis=0))
    with pytest.raises(InvalidInputError):
        sv.consensus_subsystem_step(Z, G, subspace=Subspace.zero(3))


def test_decomposition_matches_direct_simulation(rng):
    for _ in range(10):
        p = random_problem(rng, 4, 4, kernel_dim=2)
        Q, Pbar = sv.quotient_decompose(p)
        Y = rng.standard_normal((4, 4))
        Y = np.einsum("ijk,ik->ij", p.projectors, Y)
        Ybar, Z = sv.split_errors(Q, Y)
        for _ in range(20):
            G = random_graph(rng, 4, 0.4)
            Y = sv.error_step(p.projectors, Y, G)
            Ybar = sv.error_step(Pbar, Ybar, G)
            Z = sv.consensus_subsystem_step(Z, G, p.kernel_intersection)
            assert np.allclose(Ybar @ Q + Z, Y, atol=1e-8)


def test_least_squares_examples(rng):
    p = random_problem(rng, 3, 3, kernel_dim=0)
    ls = sv.to_least_squares(p)
    assert ls.unique and np.allclose(ls.particular_solution, p.particular_solution)
    bad = Problem.from_blocks([np.ones((1, 1))] * 2, [np.zeros(1), 2 * np.ones(1)])
    assert not bad.consistent
    ls = sv.to_least_squares(bad)
    assert ls.consistent and np.allclose(ls.particular_solution, [1.0])
    for _ in range(20):
        A = rng.standard_normal((8, 4))
        b = rng.standard_normal(8)
        ls = sv.to_least_squares(Problem.from_rows(A, b, m=3))
        assert np.allclose(ls.particular_solution, np.linalg.pinv(A) @ b, atol=1e-6)


def test_reproject_keeps_constraints(rng):
    p = random_problem(rng, 3, 4, kernel_dim=1)
    X = rng.standard_normal((3, 4))
    assert np.max(p.agent_residuals(sv.reproject(p, X))) <= 1e-9
