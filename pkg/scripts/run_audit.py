#!/usr/bin/env python3
"""Run the five built-in pitfall scenarios on the default 20-phantom set.

Equivalent to `refmet audit --scenario all --out audit_out`, kept as a
script so the full experiment is one command from a fresh checkout:

    python scripts/run_audit.py [out_dir]
"""

import sys
import time
from pathlib import Path

from refmet.harness import (HarnessConfig, builtin_scenario, generate_phantoms,
                            run_scenario)
from refmet.report import Report, write_report


def main() -> int:
    out_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "audit_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    config = HarnessConfig()
    t0 = time.time()
    phantoms = generate_phantoms(config)
    print(f"generated {len(phantoms)} phantoms "
          f"({config.phantom_params.dims[0]}x{config.phantom_params.dims[1]}) "
          f"in {time.time() - t0:.1f}s")
    full = Report()
    for scenario_id in config.scenarios:
        t0 = time.time()
        part = run_scenario(builtin_scenario(scenario_id), phantoms, config)
        full.extend(part)
        print(f"{scenario_id}: {len(part.rows)} rows, {len(part.lints)} lints "
              f"({time.time() - t0:.1f}s)")
    write_report(full, out_dir / "report.csv", "csv")
    write_report(full, out_dir / "report.md", "markdown")
    print(f"wrote {out_dir}/report.csv and {out_dir}/report.md")
    return 0


if __name__ == "__main__":
    sys.exit(main())
