"""
Scenario files, runs and reports.

A scenario is a JSON document::

    {
      "n": 2,
      "agents": [{"A": [[1, 0]], "b": [1]}, {"A": [[0, 1]], "b": [2]}],
      "sequence": {"kind": "periodic", "graphs": [["1->2"], ["2->1"]]},
      "steps": 200,
      "seed": 0,
      "init": "least-norm",
      "mode": "exact",
      "analyses": ["stability", "connectivity", "rate", "certificate", "witness"]
    }

``sequence.kind`` is ``explicit``, ``periodic`` (graphs repeat) or ``random``
(``{"kind": "random", "p": 0.3, "seed": 1}``).  Arcs are ``"from->to"`` with
1-based vertices; missing self-arcs are added and flagged.
"""

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis as an
from . import connectivity as cn
from . import digraph as dg
from .errors import (CapacityError, InconsistentEquationError, InvalidInputError,
                     NotApplicableError, ScenarioParseError)
from .solver import Problem, simulate, to_least_squares

ERROR_FLOOR = 1e-15
ALL_ANALYSES = ("stability", "connectivity", "rate", "certificate", "witness")
SEQUENCE_KINDS = ("explicit", "periodic", "random")


@dataclass
class Scenario:
    n: int
    A_blocks: list
    b_blocks: list
    sequence: dg.GraphSequence
    steps: int = 200
    seed: int = 0
    init: str = "least-norm"
    mode: str = "exact"
    analyses: tuple = ALL_ANALYSES
    window: int = None
    tau0: int = 1
    horizon: int = 10
    self_arcs_added: bool = False

    @property
    def m(self):
        return len(self.A_blocks)

    def problem(self):
        p = Problem.from_blocks(self.A_blocks, self.b_blocks)
        return to_least_squares(p) if self.mode == "least-squares" else p

    @property
    def window_length(self):
        if self.window is not None:
            return self.window
        if isinstance(self.sequence, dg.PeriodicSequence):
            return len(self.sequence.period)
        return 1


def _line_of(text, key):
    """Line number of the first occurrence of ``"key"`` in ``text``, for messages."""
    idx = text.find(f'"{key}"')
    return None if idx < 0 else text.count("\n", 0, idx) + 1


def _loc(text, path, key):
    line = _line_of(text, key)
    return f"{path} ({key}, line {line})" if line else f"{path} ({key})"


def _parse_graphs(raw, m, where):
    graphs, added = [], False
    if not isinstance(raw, list) or not raw:
        raise ScenarioParseError("expected a nonempty list of graphs", where)
    for k, arcs in enumerate(raw):
        if not isinstance(arcs, list):
            raise ScenarioParseError(f"graph {k} must be a list of 'from->to' arcs", where)
        try:
            G, flag = dg.parse_arcs(m, arcs)
        except InvalidInputError as exc:
            raise ScenarioParseError(f"graph {k}: {exc}", where) from None
        graphs.append(G)
        added |= flag
    return graphs, added


def scenario_from_dict(data, text="", path="<scenario>"):
    """Validate a decoded scenario document."""
    if not isinstance(data, dict):
        raise ScenarioParseError("top level must be an object", path)
    for key in ("n", "agents", "sequence"):
        if key not in data:
            raise ScenarioParseError(f"missing required key {key!r}", path)
    n = data["n"]
    if not isinstance(n, int) or n < 1:
        raise ScenarioParseError("n must be a positive integer", _loc(text, path, "n"))
    agents = data["agents"]
    if not isinstance(agents, list) or not agents:
        raise ScenarioParseError("agents must be a nonempty list", _loc(text, path, "agents"))
    A_blocks, b_blocks = [], []
    for i, ag in enumerate(agents, 1):
        where = _loc(text, path, "agents")
        if not isinstance(ag, dict) or "A" not in ag or "b" not in ag:
            raise ScenarioParseError(f"agent {i}: needs 'A' and 'b'", where)
        try:
            A = np.array(ag["A"], dtype=float)
            b = np.array(ag["b"], dtype=float).reshape(-1)
        except (TypeError, ValueError):
            raise ScenarioParseError(f"agent {i}: A and b must be numeric arrays", where) from None
        if A.ndim == 1 and A.size == 0:
            A = A.reshape(0, n)
        if A.ndim != 2:
            raise ScenarioParseError(f"agent {i}: A must be a list of rows", where)
        if A.shape[1] != n:
            raise ScenarioParseError(
                f"agent {i}: A_i has {A.shape[1]} columns, expected n = {n}", where)
        if A.shape[0] != b.shape[0]:
            raise ScenarioParseError(
                f"agent {i}: A_i has {A.shape[0]} rows but b_i has {b.shape[0]} entries",
                where)
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ScenarioParseError(f"agent {i}: non-finite entries", where)
        A_blocks.append(A)
        b_blocks.append(b)
    m = len(A_blocks)

    spec = data["sequence"]
    where = _loc(text, path, "sequence")
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ScenarioParseError("sequence must be an object with a 'kind'", where)
    kind = spec["kind"]
    added = False
    if kind == "random":
        for key in ("p", "seed"):
            if key not in spec:
                raise ScenarioParseError(f"random sequence needs {key!r}", where)
        try:
            seq = dg.RandomSequence(m, float(spec["p"]), int(spec["seed"]))
        except (InvalidInputError, TypeError, ValueError) as exc:
            raise ScenarioParseError(str(exc), where) from None
    elif kind in ("explicit", "periodic"):
        graphs, added = _parse_graphs(spec.get("graphs"), m, where)
        seq = (dg.ExplicitSequence(graphs) if kind == "explicit"
               else dg.PeriodicSequence(graphs))
    else:
        raise ScenarioParseError(
            f"unknown sequence kind {kind!r}; expected one of {SEQUENCE_KINDS}", where)

    mode = data.get("mode", "exact")
    if mode not in ("exact", "least-squares"):
        raise ScenarioParseError(f"unknown mode {mode!r}", _loc(text, path, "mode"))
    init = data.get("init", "least-norm")
    if init not in ("least-norm", "random-kernel"):
        raise ScenarioParseError(f"unknown init policy {init!r}", _loc(text, path, "init"))
    analyses = tuple(data.get("analyses", ALL_ANALYSES))
    unknown = set(analyses) - set(ALL_ANALYSES)
    if unknown:
        raise ScenarioParseError(f"unknown analyses {sorted(unknown)}",
                                 _loc(text, path, "analyses"))
    ints = {}
    for key, default, lo in (("steps", 200, 1), ("seed", 0, 0), ("tau0", 1, 1),
                             ("horizon", 10, 1), ("window", None, 1)):
        val = data.get(key, default)
        if val is not None and (not isinstance(val, int) or val < lo):
            raise ScenarioParseError(f"{key} must be an integer >= {lo}",
                                     _loc(text, path, key))
        ints[key] = val
    return Scenario(n, A_blocks, b_blocks, seq, mode=mode, init=init,
                    analyses=analyses, self_arcs_added=added, **ints)


def parse_scenario(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read file: {exc}", str(path)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None
    return scenario_from_dict(data, text, str(path))


def gen_sequence(seq, t):
    """Graph ``N(t)`` of a sequence (``t`` is 1-based)."""
    return seq.graph(t)


def fitted_rate(signal, floor=ERROR_FLOOR):
    """
    Slope of a least-squares line through ``log(signal + floor)`` against ``t``
    over the last half of the run.

    Samples already at the floor carry no rate information, so the fit uses
    the last half of the samples that are still above ``1000 * floor``.
    """
    y = np.log(np.asarray(signal, dtype=float) + floor)
    t = np.arange(1, len(y) + 1, dtype=float)
    above = np.nonzero(y > np.log(1000 * floor))[0]
    if len(above) >= 4:
        end = above[-1] + 1
        start = end // 2
    else:
        start, end = len(y) // 2, len(y)
    if end - start < 2:
        return 0.0
    return float(np.polyfit(t[start:end], y[start:end], 1)[0])


@dataclass
class RunReport:
    final_error: float
    final_disagreement: float
    final_residual: float
    fitted_rate: float
    analyses: dict = field(default_factory=dict)
    wall_time: float = 0.0
    info: dict = field(default_factory=dict)

    def to_dict(self, include_wall_time=False):
        d = {"final_error": self.final_error,
             "final_disagreement": self.final_disagreement,
             "final_residual": self.final_residual,
             "fitted_rate": self.fitted_rate,
             **self.info,
             "analyses": self.analyses}
        if include_wall_time:
            d["wall_time"] = self.wall_time
        return d


def _analysis_graphs(sc):
    """Distinct graphs the run sees in its analysed windows."""
    seq = sc.sequence
    if isinstance(seq, dg.PeriodicSequence):
        return list(dict.fromkeys(seq.period))
    if isinstance(seq, dg.ExplicitSequence):
        return list(dict.fromkeys(seq.graphs))
    last = sc.tau0 + sc.horizon * sc.window_length - 1
    return list(dict.fromkeys(seq.window(1, last)))


def _effective_horizon(sc):
    l = sc.window_length
    if sc.sequence.length is None:
        return sc.horizon
    return max(1, min(sc.horizon, (sc.sequence.length - sc.tau0 + 1) // l))


def analyze_connectivity(sc, problem):
    oracle = problem.oracle
    l, h = sc.window_length, _effective_horizon(sc)
    first = sc.sequence.window(sc.tau0, l)
    out = {"window": l, "tau0": sc.tau0,
           "first_window": cn.connectivity_report(oracle, dg.compose_sequence(first))}
    for name, pred in (("d_connected", lambda G: cn.is_d_connected(oracle, G)),
                       ("rooted", dg.is_rooted),
                       ("strongly_connected", dg.is_strongly_connected)):
        out["repeatedly_jointly_" + name] = cn.is_repeatedly_jointly(
            sc.sequence, l, sc.tau0, h, pred).to_dict()
    out["strong_equivalence"] = (cn.check_strong_equivalence(oracle)
                                 if oracle.m <= cn.BRUTEFORCE_MAX_M else None)
    return out


def analyze_stability(sc, problem):
    return [{"graph": G.to_text(), **an.stability_report(problem, G).to_dict()}
            for G in _analysis_graphs(sc)]


def analyze_witness(sc, problem):
    first = sc.sequence.window(sc.tau0, sc.window_length)
    wit = an.unit_eigenvalue_witness(first, problem)
    return None if wit is None else wit.to_dict()


def analyze_certificate(sc, problem):
    """Smallest number of consecutive windows whose product is certified."""
    if not problem.unique:
        raise NotApplicableError("certificates need a unique-solution problem")
    l, h = sc.window_length, _effective_horizon(sc)
    for k in range(1, h + 1):
        cert = an.contraction_certificate(sc.sequence.window(sc.tau0, k * l),
                                          problem.oracle)
        if cert is not None:
            return {"windows": k, **cert.to_dict()}
    return None


def analyze_rate(sc, problem):
    graphs = _analysis_graphs(sc)
    oracle = problem.oracle
    if all(cn.is_d_connected(oracle, G) for G in graphs):
        return an.rate_bound_corollary(problem, graphs).to_dict()
    return an.rate_bound_strong_sequences(problem, graphs, sc.window_length).to_dict()


_ANALYSES = {"connectivity": analyze_connectivity, "stability": analyze_stability,
             "witness": analyze_witness, "certificate": analyze_certificate,
             "rate": analyze_rate}


def run_analyses(sc, problem, names=None, strict=False):
    """
    Run the named analyses.  Inapplicable ones are reported as
    ``{"error": ...}`` unless ``strict`` is set.
    """
    out = {}
    for name in names if names is not None else sc.analyses:
        try:
            out[name] = _ANALYSES[name](sc, problem)
        except (NotApplicableError, InvalidInputError, CapacityError) as exc:
            if strict:
                raise
            out[name] = {"error": f"{type(exc).__name__}: {exc}"}
    return out


def run(sc, out_dir=None, steps=None, analyses=None):
    """
    Simulate a scenario and run its analyses.

    Writes ``trace.csv`` and ``report.json`` into ``out_dir`` when given.
    Output files depend only on the scenario, so reruns are byte-identical.
    """
    t0 = time.perf_counter()
    problem = sc.problem()
    T = steps if steps is not None else sc.steps
    rng = np.random.default_rng(sc.seed)
    trace = simulate(problem, sc.sequence, T, policy=sc.init, rng=rng)
    signal = trace.disagreement + trace.max_error
    report = RunReport(
        final_error=float(trace.max_error[-1]),
        final_disagreement=float(trace.disagreement[-1]),
        final_residual=float(trace.residual[-1]),
        fitted_rate=fitted_rate(signal),
        analyses=run_analyses(sc, problem, analyses),
        info={"m": problem.m, "n": problem.n, "steps": T, "mode": sc.mode,
              "unique": problem.unique, "self_arcs_added": sc.self_arcs_added,
              "final_consensus": trace.final_states.mean(axis=0).tolist(),
              "reference": trace.reference.tolist()},
    )
    report.wall_time = time.perf_counter() - t0
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "trace.csv", "w", newline="") as fh:
            trace.write_csv(fh)
        write_json(out / "report.json", report.to_dict())
    return report, trace


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


EXIT_OK, EXIT_PARSE, EXIT_INCONSISTENT, EXIT_CAPACITY, EXIT_INTERNAL = 0, 2, 3, 4, 5


def exit_code_for(exc):
    if isinstance(exc, ScenarioParseError):
        return EXIT_PARSE
    if isinstance(exc, InconsistentEquationError):
        return EXIT_INCONSISTENT
    if isinstance(exc, CapacityError):
        return EXIT_CAPACITY
    return EXIT_INTERNAL
