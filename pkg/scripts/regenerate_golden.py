"""Rebuild the pinned files under tests/golden/.

    python scripts/regenerate_golden.py

Writes the verify report of the bundled config, the constants fitted on that
report, and the two-seed theorem fit over tests/golden/theorem_grid.json.
Review the diff before committing: these files are regression oracles.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

from convexmetrics.harness import emit, fitted_constants, load_config, load_default_config, run_suite

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"
THEOREM_SEEDS = (11, 29)


def theorem_fit(seed: int) -> dict[str, float]:
    cfg = load_config(GOLDEN / "theorem_grid.json").with_overrides(seed=seed, constants={})
    return fitted_constants(run_suite(cfg))


def main() -> int:
    t0 = time.perf_counter()
    rows = run_suite(load_default_config())
    emit(rows, "csv", GOLDEN / "default_report.csv")
    print(f"default report: {len(rows)} rows in {time.perf_counter() - t0:.1f}s", file=sys.stderr)

    blob = {"kind": "derived", "source": "verify on the bundled config", "constants": fitted_constants(rows)}
    (GOLDEN / "default_constants.json").write_text(json.dumps(blob, indent=1, sort_keys=True) + "\n")

    fits = {str(seed): theorem_fit(seed) for seed in THEOREM_SEEDS}
    first = fits[str(THEOREM_SEEDS[0])]
    blob = {
        "kind": "derived",
        "source": "minimal constants over theorem_grid.json, fitted at two seeds",
        "seeds": list(THEOREM_SEEDS),
        "constants": first,
        "per_seed": fits,
    }
    (GOLDEN / "theorem_constants.json").write_text(json.dumps(blob, indent=1, sort_keys=True) + "\n")
    print(json.dumps(first, indent=1, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
