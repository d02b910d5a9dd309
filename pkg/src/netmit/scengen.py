"""Synthetic scenario generator.

Produces the four declarative model files for a randomized network of H
hosts.  Topology: a single internet host (attacker controlled), DMZ and
sensitive zones with floor(H/40) hosts each (at least 1), and the remaining
hosts in a tree of user subnets.  Host configurations are drawn from a
nested Dirichlet process realized by Chinese-restaurant sampling: hosts
share configurations, configurations share vulnerabilities.  Patch counts
per configuration and vulnerability counts per fresh configuration are
Poisson.  All randomness flows from one counter-based generator (Philox),
so identical parameters give byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .model import INF
from .modelio import load_model


def _bundled(name):
    from importlib import resources
    return json.loads((resources.files("netmit") / "data" / name).read_text())


def default_vuln_catalog():
    return _bundled("vuln_catalog.json")


def default_patch_catalog():
    return _bundled("patch_catalog.json")


@dataclass
class GenParams:
    """Knobs of the generator; catalog defaults ship with the package."""

    n_hosts: int = 40
    alpha_hosts: float = 10.0       # DP concentration over host configs
    alpha_vulns: float = 5.0        # inner DP concentration over cves
    lambda_vulns: float = 3.0       # Poisson mean vulns per fresh config
    lambda_patches: float = 2.0     # Poisson mean patches per config
    seed: int = 0
    branching: int = 2              # user subnet tree fan-out
    subnet_capacity: int = 10       # hosts per user subnet
    port_fraction: float = 0.5      # open share of catalog ports per inter-zone link
    protected_fraction: float = 0.5  # DMZ/sensitive ports never firewalled
    fw_initial_cost: float = 100.0
    fw_subsequent_cost: float = 5.0
    patch_initial_cost: float = 20.0
    patch_subsequent_cost: float = 2.0
    vuln_catalog: list = field(default_factory=default_vuln_catalog)
    patch_catalog: list = field(default_factory=default_patch_catalog)

    def __post_init__(self):
        if self.n_hosts < 3:
            raise ValueError("need at least 3 hosts")
        for name in ("alpha_hosts", "alpha_vulns"):
            if getattr(self, name) <= 0:
                raise ValueError("%s must be positive" % name)
        for name in ("lambda_vulns", "lambda_patches"):
            if getattr(self, name) < 0:
                raise ValueError("%s must be non-negative" % name)
        if not self.vuln_catalog:
            raise ValueError("empty vulnerability catalog")
        if not self.patch_catalog:
            raise ValueError("empty patch catalog")

    def rng(self):
        return np.random.Generator(np.random.Philox(self.seed))


def catalog_ports(params):
    """Distinct (port, proto) pairs of remotely reachable catalog entries."""
    return sorted({(int(v["port"]), v["proto"]) for v in params.vuln_catalog
                   if v.get("access_vector", "network") != "local"})


def generate_topology(params, rng):
    """Zoned subnet layout with seeded port-restricted inter-zone links."""
    quota = max(1, params.n_hosts // 40)
    n_user = params.n_hosts - 1 - 2 * quota
    if n_user < 0:
        raise ValueError("n_hosts too small for zone quotas")

    subnets = {
        "internet": ["inet0"],
        "dmz": ["dmz%d" % i for i in range(quota)],
        "sensitive": ["sens%d" % i for i in range(quota)],
    }
    # breadth-first filled tree of user subnets
    user_subnets = []
    remaining = n_user
    i = 0
    while remaining > 0:
        take = min(params.subnet_capacity, remaining)
        subnets["user%d" % i] = ["u%d_%d" % (i, j) for j in range(take)]
        user_subnets.append("user%d" % i)
        remaining -= take
        i += 1

    ports = catalog_ports(params)
    links = [("internet", "dmz")]
    for i, z in enumerate(user_subnets):
        if i == 0:
            links.append((z, "dmz"))
        else:
            links.append((z, user_subnets[(i - 1) // params.branching]))
        links.append((z, "sensitive"))

    connections = []

    def add(z1, z2, port, proto):
        connections.append({"src": z1, "dst": z2, "port": port, "proto": proto})

    for z in subnets:
        for port, proto in ports:
            add(z, z, port, proto)
    for z1, z2 in links:
        intra_user = z1 in user_subnets and z2 in user_subnets
        if intra_user:
            chosen = ports
        else:
            keep = rng.random(len(ports)) < params.port_fraction
            chosen = [p for p, k in zip(ports, keep) if k]
            if not chosen:
                chosen = [ports[rng.integers(len(ports))]]
        for port, proto in chosen:
            add(z1, z2, port, proto)
            add(z2, z1, port, proto)

    return {
        "subnets": subnets,
        "connections": connections,
        "controlled": ["internet"],
        "targets": [{"zone": "sensitive", "type": "confidentiality"}],
    }


def _inner_crp_draw(rng, table, catalog):
    """One draw from the shared cve distribution V ~ DP(alpha, U(catalog))."""
    alpha, draws = table
    i = len(draws)
    if i == 0 or rng.random() < alpha / (alpha + i):
        cve = catalog[rng.integers(len(catalog))]["cve"]
    else:
        cve = draws[rng.integers(i)]
    draws.append(cve)
    return cve


def sample_configurations(params, rng, trace=None):
    """CRP over host configurations; returns (assignment, configs).

    assignment[i] is the config index of host i (hosts in a fixed order),
    configs[k] is a sorted cve list.  ``trace``, when given, collects the
    raw Poisson vulnerability counts of fresh configurations.
    """
    configs = []
    assignment = []
    inner = (params.alpha_vulns, [])  # shared across fresh configs
    for i in range(params.n_hosts):
        if i == 0 or rng.random() < params.alpha_hosts / (params.alpha_hosts + i):
            n = rng.poisson(params.lambda_vulns)
            if trace is not None:
                trace.append(int(n))
            cves = {_inner_crp_draw(rng, inner, params.vuln_catalog)
                    for _ in range(n)}
            configs.append(sorted(cves))
            assignment.append(len(configs) - 1)
        else:
            assignment.append(assignment[rng.integers(i)])
    return assignment, configs


def sample_fixes(params, rng, topology, configs, trace=None):
    """Firewall schemas per subnet x open port, patch schemas per config.

    ``trace`` collects the raw Poisson patch counts, one per configuration.
    """
    ports = catalog_ports(params)
    inbound = {}
    for c in topology["connections"]:
        if c["src"] != c["dst"]:
            inbound.setdefault(c["dst"], set()).add((c["port"], c["proto"]))

    schemas = []
    for z in sorted(topology["subnets"]):
        open_ports = sorted(inbound.get(z, ()))
        if not open_ports:
            continue
        if z in ("dmz", "sensitive"):
            # business-critical ports stay reachable regardless of fixes
            protected = rng.random(len(open_ports)) < params.protected_fraction
            open_ports = [p for p, prot in zip(open_ports, protected) if not prot]
        for port, proto in open_ports:
            schemas.append({
                "kind": "firewall-subnet", "src": "*", "dst": z,
                "port": port, "proto": proto,
                "initial_cost": params.fw_initial_cost,
                "subsequent_cost": params.fw_subsequent_cost,
            })

    by_patch = {p["patch"]: p for p in params.patch_catalog}
    drawn = {}  # patch id -> set of closable cves across drawing configs
    for cves in configs:
        cveset = set(cves)
        candidates = [p for p in params.patch_catalog
                      if cveset & set(p["closes"])]
        n = rng.poisson(params.lambda_patches)
        if trace is not None:
            trace.append(int(n))
        if not candidates or n == 0:
            continue
        for _ in range(n):
            pid = candidates[rng.integers(len(candidates))]["patch"]
            drawn.setdefault(pid, set()).update(
                cveset & set(by_patch[pid]["closes"]))
    for pid in sorted(drawn):
        schemas.append({
            "kind": "patch", "cve": sorted(drawn[pid]), "host": "*",
            "initial_cost": params.patch_initial_cost,
            "subsequent_cost": params.patch_subsequent_cost,
        })
    return schemas


def generate_files(params, out_dir):
    """Write topology/vulns/fixes/actions JSON plus a provenance record."""
    rng = params.rng()
    topology = generate_topology(params, rng)
    assignment, configs = sample_configurations(params, rng)

    hosts = []
    for z in sorted(topology["subnets"]):
        hosts.extend(topology["subnets"][z])
    by_cve = {v["cve"]: v for v in params.vuln_catalog}
    vulns = []
    for h, k in zip(hosts, assignment):
        for cve in configs[k]:
            rec = by_cve[cve]
            vulns.append({
                "cve": cve, "host": h,
                "port": int(rec["port"]), "proto": rec["proto"],
                "impact_type": rec["impact_type"],
                "access_vector": rec.get("access_vector", "network"),
                "access_complexity": rec.get("access_complexity", "medium"),
            })

    fixes = sample_fixes(params, rng, topology, configs)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    docs = {
        "topology.json": topology,
        "vulns.json": vulns,
        "fixes.json": fixes,
        "actions.json": [],
    }
    for name, doc in docs.items():
        with open(out / name, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    prov = {k: v for k, v in asdict(params).items()
            if k not in ("vuln_catalog", "patch_catalog")}
    prov["configs"] = configs
    prov["assignment"] = assignment
    with open(out / "provenance.json", "w") as fh:
        json.dump(prov, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def generate_task(params, out_dir, attacker_budget=INF, mitigation_budget=INF):
    """Generate the model files and load them into a MitigationTask."""
    out = generate_files(params, out_dir)
    return load_model(out / "topology.json", out / "vulns.json",
                      out / "fixes.json", out / "actions.json",
                      attacker_budget=attacker_budget,
                      mitigation_budget=mitigation_budget)
