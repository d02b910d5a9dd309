import json
from pathlib import Path

import pytest

from netmit.mitigation import pareto_frontier
from netmit.model import INF
from netmit.modelio import CVSS_PROBABILITY, ModelLoadError, load_model
from netmit.planner import AttackPlanner

EXAMPLE = Path(__file__).parent.parent / "models" / "running_example"


def load_example(**kw):
    return load_model(EXAMPLE / "topology.json", EXAMPLE / "vulns.json",
                      EXAMPLE / "fixes.json", EXAMPLE / "actions.json", **kw)


BASE_TOPO = {
    "subnets": {"internet": ["I"], "dmz": ["W"], "sensitive": ["D"]},
    "connections": [
        {"src": "internet", "dst": "dmz", "port": 443, "proto": "tcp"},
        {"src": "dmz", "dst": "sensitive", "port": 443, "proto": "tcp"},
    ],
    "controlled": ["internet"],
    "targets": [{"zone": "sensitive", "type": "confidentiality"}],
}


def vuln(cve, host, complexity="medium", vector="network", port=443,
         impact="confidentiality"):
    return {"cve": cve, "host": host, "port": port, "proto": "tcp",
            "impact_type": impact, "access_vector": vector,
            "access_complexity": complexity}


def test_running_example_shape():
    task = load_example()
    v = task.pentest.vocab
    for z, h in (("internet", "I"), ("dmz", "W"), ("dmz", "A"),
                 ("user", "S"), ("sensitive", "D")):
        assert task.initial_network.holds(v.lookup("subnet", z, h))
    assert task.initial_network.holds(v.lookup("haclz", "internet", "dmz",
                                               "443", "tcp"))
    assert task.pentest.initial_attacker.holds(
        v.lookup("compromised", "I", "integrity"))


def test_running_example_probability():
    task = load_example()
    plan = AttackPlanner(task.pentest).critical_attack_path(task.initial_network)
    assert plan is not None
    # enter via W (medium, 0.5), then the database (high, 0.8)
    assert plan.success_probability == pytest.approx(0.4)


def test_cvss_probability_mapping():
    vulns = [vuln("c_low", "D", "low"), vuln("c_med", "D", "medium"),
             vuln("c_high", "D", "high")]
    task = load_model(BASE_TOPO, vulns)
    by_p = {}
    for a in task.pentest.actions:
        if a.artificial or len(a.outcomes) == 1:
            continue
        cve = a.id.split(":")[1]
        by_p[cve] = a.outcomes[0].probability
    assert by_p["c_low"] == 0.2
    assert by_p["c_med"] == 0.5
    assert by_p["c_high"] == 0.8
    assert CVSS_PROBABILITY == {"low": 0.2, "medium": 0.5, "high": 0.8}


def test_cvss_override():
    vulns = [vuln("c_low", "D", "low")]
    refinements = {"cvss_probability": {"low": 0.9}, "refinements": []}
    task = load_model(BASE_TOPO, vulns, None, refinements)
    a = next(a for a in task.pentest.actions if not a.artificial)
    assert a.outcomes[0].probability == 0.9


def test_refinement_overrides_cost_and_probability():
    vulns = [vuln("c1", "D")]
    refinements = [{"cve": "c1", "cost": 3.0, "probability": 0.25}]
    task = load_model(BASE_TOPO, vulns, None, refinements)
    a = next(a for a in task.pentest.actions if not a.artificial)
    assert a.cost == 3.0
    assert a.outcomes[0].probability == 0.25


def test_local_vector_generates_no_attack():
    vulns = [vuln("c1", "D", vector="local")]
    task = load_model(BASE_TOPO, vulns)
    assert all(a.artificial for a in task.pentest.actions)


def test_adjacent_vector_restricted_to_same_subnet():
    topo = dict(BASE_TOPO)
    topo["connections"] = BASE_TOPO["connections"] + [
        {"src": "dmz", "dst": "dmz", "port": 443, "proto": "tcp"}]
    topo["subnets"] = {"internet": ["I"], "dmz": ["W", "A"],
                       "sensitive": ["D"]}
    vulns = [vuln("c1", "W", vector="adjacent", impact="integrity")]
    task = load_model(topo, vulns)
    exploits = [a for a in task.pentest.actions if not a.artificial]
    # only hosts inside the dmz can use it (A -> W and W -> W)
    assert {a.id.split(":")[2].split("->")[0] for a in exploits} == {"A", "W"}


def test_missing_targets_rejected():
    topo = dict(BASE_TOPO)
    topo["targets"] = []
    with pytest.raises(ModelLoadError):
        load_model(topo, [])


def test_unknown_host_rejected():
    with pytest.raises(ModelLoadError, match="unknown host"):
        load_model(BASE_TOPO, [vuln("c1", "nosuch")])


def test_schema_violation_rejected():
    with pytest.raises(ModelLoadError):
        load_model({"subnets": {}, "targets": "oops"}, [])
    with pytest.raises(ModelLoadError):
        load_model(BASE_TOPO, [{"cve": "c1"}])


def test_connectivity_fallback_fully_connected():
    topo = {k: v for k, v in BASE_TOPO.items() if k != "connections"}
    task = load_model(topo, [vuln("c1", "D")])
    v = task.pentest.vocab
    for z1 in ("internet", "dmz", "sensitive"):
        for z2 in ("internet", "dmz", "sensitive"):
            assert task.initial_network.holds(
                v.lookup("haclz", z1, z2, "443", "tcp"))


def test_duplicate_vuln_records_collapse():
    task = load_model(BASE_TOPO, [vuln("c1", "D"), vuln("c1", "D")])
    exploits = [a for a in task.pentest.actions if not a.artificial]
    assert len({a.id for a in exploits}) == len(exploits)


def test_setup_gate_cost_ordering():
    fixes = [{"kind": "firewall-subnet", "src": "internet", "dst": "dmz",
              "port": 443, "proto": "tcp",
              "initial_cost": 100.0, "subsequent_cost": 10.0}]
    task = load_model(BASE_TOPO, [vuln("c1", "W", impact="integrity")], fixes)
    setup = task.fix_by_id("fix0:setup")
    rule = task.fix_by_id("fix0:fw:internet->dmz:443/tcp")
    assert setup.cost == 100.0 and rule.cost == 10.0
    # rule requires the gate the setup fix provides
    from netmit.model import NetworkState, fix_applicable, apply_fix
    net = task.initial_network
    assert fix_applicable(net, setup)
    assert not fix_applicable(net, rule)
    assert fix_applicable(apply_fix(net, setup), rule)


def test_firewall_wildcard_src_skips_self_links():
    topo = dict(BASE_TOPO)
    topo["connections"] = BASE_TOPO["connections"] + [
        {"src": "dmz", "dst": "dmz", "port": 443, "proto": "tcp"}]
    fixes = [{"kind": "firewall-subnet", "src": "*", "dst": "dmz",
              "port": "*", "proto": "*",
              "initial_cost": 10.0, "subsequent_cost": 1.0}]
    task = load_model(topo, [vuln("c1", "W")], fixes)
    rule_ids = [f.id for f in task.fixes if ":fw:" in f.id]
    assert rule_ids == ["fix0:fw:internet->dmz:443/tcp"]


def test_patch_full_close_removes_vuln():
    fixes = [{"kind": "patch", "cve": "c1", "host": "*",
              "initial_cost": 5.0, "subsequent_cost": 1.0}]
    task = load_model(BASE_TOPO, [vuln("c1", "W", impact="integrity")], fixes)
    rule = task.fix_by_id("fix0:patch:c1:W")
    v = task.pentest.vocab
    vul = v.lookup("vul_exists", "c1", "W", "443", "tcp", "integrity")
    assert rule.del_mask & vul.mask


def test_patch_partial_close_adds_mitigated_duplicates():
    fixes = [{"kind": "patch", "cve": "c1", "host": "*",
              "new_probability": 0.2,
              "initial_cost": 5.0, "subsequent_cost": 1.0}]
    task = load_model(BASE_TOPO, [vuln("c1", "W", "high", impact="integrity")],
                      fixes)
    originals = [a for a in task.pentest.actions
                 if not a.artificial and "~mit" not in a.id]
    duplicates = [a for a in task.pentest.actions if "~mit" in a.id]
    assert duplicates and len(duplicates) == len(originals)
    v = task.pentest.vocab
    m = v.lookup("mitigated", "c1", "W", "443", "tcp", "schema0")
    assert m is not None
    for a in originals:
        assert a.pre_net_neg & m.mask
    for a in duplicates:
        assert a.pre_net_pos & m.mask
        assert a.outcomes[0].probability == 0.2


DMZ_TARGET_TOPO = dict(BASE_TOPO, targets=[{"zone": "dmz",
                                            "type": "confidentiality"}])


def test_patch_partial_close_end_to_end():
    fixes = [{"kind": "patch", "cve": "c1", "host": "*",
              "new_probability": 0.2,
              "initial_cost": 5.0, "subsequent_cost": 1.0}]
    task = load_model(DMZ_TARGET_TOPO, [vuln("c1", "W", "high")], fixes)
    res = pareto_frontier(task)
    pts = sorted((e.cost, e.residual_probability) for e in res.entries)
    assert pts[0] == (0.0, pytest.approx(0.8))
    assert pts[1] == (6.0, pytest.approx(0.2))


def test_firewall_host_blocks_matched_triples():
    fixes = [{"kind": "firewall-host", "host": "W", "port": "*", "proto": "*",
              "initial_cost": 4.0, "subsequent_cost": 1.0}]
    task = load_model(DMZ_TARGET_TOPO, [vuln("c1", "W", "high")], fixes)
    res = pareto_frontier(task)
    pts = sorted((e.cost, e.residual_probability) for e in res.entries)
    assert pts == [(0.0, pytest.approx(0.8)), (5.0, pytest.approx(0.0))]


def test_unmatched_fix_schema_warns_and_emits_nothing():
    fixes = [{"kind": "patch", "cve": "nosuch", "host": "*",
              "initial_cost": 5.0, "subsequent_cost": 1.0}]
    task = load_model(BASE_TOPO, [vuln("c1", "W")], fixes)
    assert task.fixes == []
    assert task.load_warnings


def test_budgets_passed_through():
    task = load_example(attacker_budget=5.0, mitigation_budget=50.0)
    assert task.pentest.attacker_budget == 5.0
    assert task.pentest.initial_attacker.remaining_budget == 5.0
    assert task.mitigation_budget == 50.0


def test_file_and_parsed_inputs_agree(tmp_path):
    topo_path = tmp_path / "topology.json"
    vulns_path = tmp_path / "vulns.json"
    topo_path.write_text(json.dumps(BASE_TOPO))
    vulns_path.write_text(json.dumps([vuln("c1", "D")]))
    t1 = load_model(topo_path, vulns_path)
    t2 = load_model(BASE_TOPO, [vuln("c1", "D")])
    assert [a.id for a in t1.pentest.actions] == [a.id for a in t2.pentest.actions]
    assert t1.initial_network.mask == t2.initial_network.mask
