#!/usr/bin/env python3
"""Paired ablation runs: effect of each pruning mechanism on solver effort.

For each seeded instance, runs the frontier search once with everything on
and once per mechanism disabled, and reports nodes expanded / planner calls.
"""

import argparse
import json

from netmit.harness import run_cell

TOGGLES = ("use_sss", "use_sleep_sets", "use_ofix", "use_oatt", "use_c0")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--hosts", type=int, default=40)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--time-limit", type=float, default=60.0)
    args = ap.parse_args()

    overrides = {"lambda_vulns": 6.0, "port_fraction": 0.8}
    rows = []
    for seed in range(args.seeds):
        row = {"seed": seed}
        base = run_cell(args.hosts, seed, 2.5, 2.5, args.time_limit,
                        512 * 1024 * 1024, gen_overrides=overrides)
        row["all_on"] = base.nodes_expanded
        for toggle in TOGGLES:
            rec = run_cell(args.hosts, seed, 2.5, 2.5, args.time_limit,
                           512 * 1024 * 1024, gen_overrides=overrides,
                           options={toggle: False})
            row["no_" + toggle.removeprefix("use_")] = rec.nodes_expanded
        rows.append(row)
        print(json.dumps(row))
    print(json.dumps({"instances": rows}, indent=2))


if __name__ == "__main__":
    main()
