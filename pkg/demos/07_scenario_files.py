"""
Scenario files drive the command line tool.  This script runs one
programmatically and shows the equivalent shell commands.
"""

import json
import tempfile
from pathlib import Path

from projconsensus import harness

scenario = {
    "n": 2,
    "agents": [{"A": [[1, 0]], "b": [1]}, {"A": [[1, 1]], "b": [3]}],
    "sequence": {"kind": "random", "p": 0.5, "seed": 3},
    "steps": 100,
    "analyses": ["connectivity", "stability", "rate"],
}
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "two_agents.json"
    path.write_text(json.dumps(scenario, indent=2))
    sc = harness.parse_scenario(path)
    report, trace = harness.run(sc, Path(tmp) / "out")
    print("final error:", report.final_error, " fitted rate:", round(report.fitted_rate, 4))
    print("outputs:", sorted(p.name for p in (Path(tmp) / "out").iterdir()))
    print("rate bound:", report.analyses["rate"].get("lambda"))
print()
print("same thing from a shell:")
print("  projconsensus simulate --scenario two_agents.json --out-dir out")
print("  projconsensus check-connectivity --scenario two_agents.json --horizon 20")
