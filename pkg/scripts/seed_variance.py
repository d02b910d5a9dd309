#!/usr/bin/env python3
"""Multi-seed variance report: distribution of solver effort per host count.

Emits the raw per-seed values next to min/max, quartiles, median and mean so
the aggregates can be recomputed or plotted downstream.
"""

import argparse
import json
from pathlib import Path

from netmit.harness import ExperimentConfig, variance_report, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--hosts", type=int, nargs="+", default=[40, 80])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--gamma-m", type=float, default=2.5)
    ap.add_argument("--gamma-a", type=float, default=2.5)
    ap.add_argument("--time-limit", type=float, default=60.0)
    ap.add_argument("--out", type=Path, default=Path("seed_variance.csv"))
    args = ap.parse_args()

    config = ExperimentConfig(
        host_counts=tuple(args.hosts),
        gamma_m=(args.gamma_m,),
        gamma_a=(args.gamma_a,),
        seeds=tuple(range(args.seeds)),
        time_limit=args.time_limit,
        gen_overrides={"lambda_vulns": 6.0, "port_fraction": 0.8},
    )
    report, records = variance_report(config)
    write_csv(records, args.out, config)
    print(json.dumps(report, indent=2))
    print("records written to %s" % args.out)


if __name__ == "__main__":
    main()
