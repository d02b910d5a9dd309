import json
import math

import pytest

from netmit.planner import AttackPlanner
from netmit.scengen import (
    GenParams, catalog_ports, generate_files, generate_task,
    generate_topology, sample_configurations, sample_fixes,
)


def test_params_validation():
    with pytest.raises(ValueError):
        GenParams(n_hosts=2)
    with pytest.raises(ValueError):
        GenParams(alpha_hosts=0.0)
    with pytest.raises(ValueError):
        GenParams(lambda_vulns=-1.0)


def test_zone_quotas():
    p80 = GenParams(n_hosts=80)
    topo = generate_topology(p80, p80.rng())
    assert len(topo["subnets"]["dmz"]) == 2
    assert len(topo["subnets"]["sensitive"]) == 2
    assert len(topo["subnets"]["internet"]) == 1
    user = sum(len(h) for z, h in topo["subnets"].items()
               if z.startswith("user"))
    assert user == 75

    p40 = GenParams(n_hosts=40)
    topo = generate_topology(p40, p40.rng())
    assert len(topo["subnets"]["dmz"]) == 1
    assert len(topo["subnets"]["sensitive"]) == 1


def test_small_host_count_keeps_zone_floor():
    p = GenParams(n_hosts=5)
    topo = generate_topology(p, p.rng())
    assert len(topo["subnets"]["dmz"]) == 1
    assert len(topo["subnets"]["sensitive"]) == 1


def test_user_tree_capacity():
    p = GenParams(n_hosts=80, subnet_capacity=10)
    topo = generate_topology(p, p.rng())
    user_sizes = [len(h) for z, h in topo["subnets"].items()
                  if z.startswith("user")]
    assert all(s <= 10 for s in user_sizes)
    assert sum(user_sizes) == 75


def test_internet_connects_only_to_dmz():
    p = GenParams(n_hosts=40)
    topo = generate_topology(p, p.rng())
    partners = {c["dst"] for c in topo["connections"]
                if c["src"] == "internet" and c["dst"] != "internet"}
    assert partners <= {"dmz"}
    assert partners  # at least one port forced open


def test_determinism(tmp_path):
    p = GenParams(n_hosts=20, seed=42)
    d1 = generate_files(p, tmp_path / "a")
    d2 = generate_files(GenParams(n_hosts=20, seed=42), tmp_path / "b")
    for name in ("topology.json", "vulns.json", "fixes.json", "actions.json"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


def test_seed_sensitivity(tmp_path):
    differs = 0
    for seed in range(20):
        a = generate_files(GenParams(n_hosts=15, seed=seed), tmp_path / ("a%d" % seed))
        b = generate_files(GenParams(n_hosts=15, seed=seed + 1), tmp_path / ("b%d" % seed))
        if (a / "vulns.json").read_bytes() != (b / "vulns.json").read_bytes():
            differs += 1
    assert differs >= 18


def test_single_host_config_is_fresh():
    p = GenParams(n_hosts=3)
    assignment, configs = sample_configurations(p, p.rng())
    assert assignment[0] == 0
    assert len(configs) >= 1


def test_config_cves_deduplicated():
    p = GenParams(n_hosts=30, lambda_vulns=10.0, alpha_vulns=0.5)
    _, configs = sample_configurations(p, p.rng())
    for c in configs:
        assert len(c) == len(set(c))


def test_patch_fixes_close_config_vulns(tmp_path):
    p = GenParams(n_hosts=25, seed=9, lambda_patches=3.0)
    out = generate_files(p, tmp_path)
    fixes = json.loads((out / "fixes.json").read_text())
    vulns = json.loads((out / "vulns.json").read_text())
    present = {v["cve"] for v in vulns}
    for schema in fixes:
        if schema["kind"] != "patch":
            continue
        assert schema["cve"], "patch schema with empty cve list"
        assert set(schema["cve"]) <= present


def test_lambda_patches_zero_means_no_patch_schemas(tmp_path):
    p = GenParams(n_hosts=25, seed=3, lambda_patches=0.0)
    out = generate_files(p, tmp_path)
    fixes = json.loads((out / "fixes.json").read_text())
    kinds = {f["kind"] for f in fixes}
    assert "patch" not in kinds
    assert "firewall-subnet" in kinds


def test_protected_ports_subset(tmp_path):
    full = GenParams(n_hosts=20, seed=5, protected_fraction=0.0)
    none = GenParams(n_hosts=20, seed=5, protected_fraction=1.0)
    rng_full, rng_none = full.rng(), none.rng()
    topo = generate_topology(full, rng_full)
    generate_topology(none, rng_none)  # keep RNG streams aligned
    _, configs = sample_configurations(full, rng_full)
    _, _ = sample_configurations(none, rng_none)
    fw_full = [s for s in sample_fixes(full, rng_full, topo, configs)
               if s["kind"] == "firewall-subnet"]
    fw_none = [s for s in sample_fixes(none, rng_none, topo, configs)
               if s["kind"] == "firewall-subnet"]
    dmz_full = [s for s in fw_full if s["dst"] in ("dmz", "sensitive")]
    dmz_none = [s for s in fw_none if s["dst"] in ("dmz", "sensitive")]
    assert dmz_full and not dmz_none
    user_full = [s for s in fw_full if s["dst"] not in ("dmz", "sensitive")]
    user_none = [s for s in fw_none if s["dst"] not in ("dmz", "sensitive")]
    assert len(user_full) == len(user_none)


def test_generated_task_roundtrip(tmp_path):
    task = generate_task(GenParams(n_hosts=12, seed=1), tmp_path)
    p = AttackPlanner(task.pentest).p_star(task.initial_network)
    assert 0.0 <= p <= 1.0
    task2 = generate_task(GenParams(n_hosts=12, seed=1), tmp_path / "again")
    assert [a.id for a in task.pentest.actions] == \
        [a.id for a in task2.pentest.actions]
    assert [f.id for f in task.fixes] == [f.id for f in task2.fixes]


def test_catalog_ports_skip_local():
    p = GenParams()
    assert (0, "tcp") not in catalog_ports(p)


def test_crp_fresh_draw_rate_high_alpha():
    hits = total = 0
    for seed in range(50):
        p = GenParams(n_hosts=50, seed=seed, alpha_hosts=1e6)
        assignment, configs = sample_configurations(p, p.rng())
        hits += len(configs)
        total += p.n_hosts
    assert hits / total >= 0.99
