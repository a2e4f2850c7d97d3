"""Pin the even-n rotating-wave cooling threshold from a dense-oracle run.

Writes tests/golden/even_rwa_n4.json.  The threshold is the oracle's
conditional infidelity scaled up by SAFETY and subtracted from 1, rounded
down to four decimals, so the acceptance test tolerates integrator settings
but still fails if the rotating-wave behaviour is lost.
"""
import json
import math
import sys
from pathlib import Path

from nwise.dynamics import PropagatorOptions
from nwise.protocols import CoolingScenario, cooling_oracle, run_cooling
from nwise.io import parse_scenario

SAFETY = 100
ROOT = Path(__file__).resolve().parents[1]


def main():
    scenario = parse_scenario(ROOT / "scenarios" / "cooling_even_n4.yaml").protocol
    opts = PropagatorOptions()
    oracle = cooling_oracle(scenario, opts)
    engine = run_cooling(scenario, opts)
    infidelity = 1.0 - oracle["conditional_fidelity"]
    threshold = math.floor((1.0 - SAFETY * infidelity) * 1e4) / 1e4
    golden = {
        "scenario": "scenarios/cooling_even_n4.yaml",
        "provenance": "dense density-matrix oracle, midpoint-exponential, 256 steps per period",
        "oracle_conditional_fidelity": oracle["conditional_fidelity"],
        "oracle_success_probability": oracle["success_probability"],
        "engine_conditional_fidelity": engine.conditional_fidelity,
        "provisional_threshold": 0.95,
        "safety_factor": SAFETY,
        "pinned_threshold": threshold,
    }
    out = ROOT / "tests" / "golden" / "even_rwa_n4.json"
    out.write_text(json.dumps(golden, indent=2, sort_keys=True) + "\n")
    json.dump(golden, sys.stdout, indent=2, sort_keys=True)
    print()


if __name__ == "__main__":
    main()
