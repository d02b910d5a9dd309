#!/usr/bin/env python3
"""Desk-scale coverage sweep over the budget-factor grid.

Mirrors the full experimental grid (gamma in {1, 2.5, 5, 7.5, 10, inf})
at small host counts.  Writes RunRecord CSV plus a coverage table.
"""

import argparse
import json
from pathlib import Path

from netmit.harness import (
    GAMMA_DEFAULTS, ExperimentConfig, coverage_table, run_sweep, write_csv,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--hosts", type=int, nargs="+", default=[40, 80, 120])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--time-limit", type=float, default=60.0)
    ap.add_argument("--mem-limit-mib", type=float, default=512.0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("desk_sweep.csv"))
    args = ap.parse_args()

    config = ExperimentConfig(
        host_counts=tuple(args.hosts),
        gamma_m=GAMMA_DEFAULTS,
        gamma_a=(2.5,),
        seeds=tuple(range(args.seeds)),
        time_limit=args.time_limit,
        memory_limit=int(args.mem_limit_mib * 1024 * 1024),
        workers=args.workers,
        gen_overrides={"lambda_vulns": 6.0, "port_fraction": 0.8},
    )
    records = run_sweep(config, progress=lambda r: print(
        "%s gm=%g ga=%g %s %.1fs" % (r.instance, r.gamma_m, r.gamma_a,
                                     "ok" if r.solved else "fail", r.wall_time)))
    write_csv(records, args.out, config)
    print(json.dumps({"%g,%g" % k: v for k, v in
                      coverage_table(records).items()}, indent=2))
    print("records written to %s" % args.out)


if __name__ == "__main__":
    main()
