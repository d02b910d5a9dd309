"""Declarative model ingestion.

Four JSON inputs describe a scenario (JSON schemas live in
``netmit/schemas/``):

* ``topology.json`` -- subnets with member hosts, zone connectivity rules,
  attacker-controlled subnets, and the target list.  If the ``connections``
  key is missing, all subnets are assumed interconnected over every
  port/protocol observed in the vulnerability file.
* ``vulns.json``    -- array of per-host vulnerability records (a bundled
  sample catalog stands in for an NVD/Nessus feed).
* ``fixes.json``    -- array of fix schemas (patch, firewall-subnet,
  firewall-host) with ``*`` wildcards, expanded into concrete fix-actions.
* ``actions.json``  -- optional refinements overriding exploit cost or
  success probability, plus an optional override of the access-complexity
  probability table.

Every fix schema gets a fresh setup proposition: one setup fix (buy the
firewall / develop the patch) at ``initial_cost``, and one fix per match at
``subsequent_cost`` gated on the setup proposition.
"""

from __future__ import annotations

import json
from pathlib import Path

from .model import (
    COMPROMISE_TYPES, INF, AttackerAction, AttackerState, FixAction,
    MitigationTask, NetworkState, Outcome, PenTestTask, Vocabulary, neg, pos,
)

#: literal complexity -> success probability mapping ("low, medium, high")
CVSS_PROBABILITY = {"low": 0.2, "medium": 0.5, "high": 0.8}

ACCESS_VECTORS = ("network", "adjacent", "local")


class ModelLoadError(ValueError):
    """Schema violation or dangling reference in the model files."""


def _read(source, name):
    if source is None:
        return None
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            with open(path) as fh:
                return json.load(fh)
        except FileNotFoundError:
            raise ModelLoadError("%s: file not found: %s" % (name, path))
        except json.JSONDecodeError as exc:
            raise ModelLoadError("%s: invalid JSON (%s)" % (name, exc))
    return source


def _validate(doc, schema_name, label):
    import jsonschema
    from importlib import resources

    schema_text = (resources.files("netmit") / "schemas" / schema_name).read_text()
    try:
        jsonschema.validate(doc, json.loads(schema_text))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise ModelLoadError("%s: %s (at %s)" % (label, exc.message, path))


def _match(selector, value):
    if isinstance(selector, list):
        return str(value) in [str(s) for s in selector]
    return selector == "*" or str(selector) == str(value)


class VulnInstance:
    """One vulnerability on one host, normalized from a vulns.json record."""

    __slots__ = ("cve", "host", "port", "proto", "impact_type",
                 "access_vector", "access_complexity")

    def __init__(self, rec):
        self.cve = rec["cve"]
        self.host = rec["host"]
        self.port = int(rec["port"])
        self.proto = rec["proto"]
        self.impact_type = rec["impact_type"]
        self.access_vector = rec.get("access_vector", "network")
        self.access_complexity = rec.get("access_complexity", "medium")
        if not (0 <= self.port <= 65535):
            raise ModelLoadError("vuln %s: port %d out of range" % (self.cve, self.port))
        if self.impact_type not in COMPROMISE_TYPES:
            raise ModelLoadError("vuln %s: unknown impact type %r"
                                 % (self.cve, self.impact_type))
        if self.access_vector not in ACCESS_VECTORS:
            raise ModelLoadError("vuln %s: unknown access vector %r"
                                 % (self.cve, self.access_vector))

    @property
    def key(self):
        return (self.cve, self.host, self.port, self.proto, self.impact_type)


def load_model(topology, vulns, fixes=None, refinements=None,
               attacker_budget=INF, mitigation_budget=INF):
    """Instantiate a MitigationTask from the four declarative inputs.

    Arguments may be file paths or already-parsed JSON values.
    """
    topo = _read(topology, "topology")
    vuln_doc = _read(vulns, "vulns") or []
    fix_doc = _read(fixes, "fixes") or []
    refine_doc = _read(refinements, "refinements")
    if topo is None:
        raise ModelLoadError("topology: required (subnets, controlled, targets)")
    _validate(topo, "topology.schema.json", "topology")
    _validate(vuln_doc, "vulns.schema.json", "vulns")
    _validate(fix_doc, "fixes.schema.json", "fixes")
    if refine_doc is not None:
        _validate(refine_doc, "actions.schema.json", "refinements")

    builder = _Builder(topo, vuln_doc, fix_doc, refine_doc)
    return builder.build(attacker_budget, mitigation_budget)


class _Builder:
    def __init__(self, topo, vuln_doc, fix_doc, refine_doc):
        self.vocab = Vocabulary()
        self.subnets = {z: list(hosts) for z, hosts in topo["subnets"].items()}
        self.host_zone = {}
        for z, hosts in self.subnets.items():
            for h in hosts:
                if h in self.host_zone:
                    raise ModelLoadError(
                        "topology: host %s in both %s and %s"
                        % (h, self.host_zone[h], z))
                self.host_zone[h] = z
        self.controlled = list(topo.get("controlled", []))
        self.targets = [(t["zone"], t["type"]) for t in topo.get("targets", [])]
        if not self.targets:
            raise ModelLoadError("topology: at least one target is required")
        for z, t in self.targets:
            if z not in self.subnets:
                raise ModelLoadError("topology: target zone %r not defined" % z)
            if t not in COMPROMISE_TYPES:
                raise ModelLoadError("topology: unknown target type %r" % t)
        for z in self.controlled:
            if z not in self.subnets:
                raise ModelLoadError("topology: controlled zone %r not defined" % z)

        seen = set()
        self.vulns = []
        for rec in vuln_doc:
            v = VulnInstance(rec)
            if v.host not in self.host_zone:
                raise ModelLoadError("vulns: unknown host %r (cve %s)"
                                     % (v.host, v.cve))
            if v.key in seen:
                continue
            seen.add(v.key)
            self.vulns.append(v)

        self.connections = self._connections(topo)
        self.fix_schemas = list(fix_doc)
        self.cvss_probability = dict(CVSS_PROBABILITY)
        self.refinements = []
        if isinstance(refine_doc, dict):
            self.cvss_probability.update(refine_doc.get("cvss_probability", {}))
            self.refinements = list(refine_doc.get("refinements", []))
        elif isinstance(refine_doc, list):
            self.refinements = list(refine_doc)

    def _connections(self, topo):
        """(src, dst, port, proto) tuples; fully connected fallback."""
        if "connections" in topo:
            out = []
            for c in topo["connections"]:
                if c["src"] not in self.subnets or c["dst"] not in self.subnets:
                    raise ModelLoadError("topology: connection references unknown "
                                         "subnet %s->%s" % (c["src"], c["dst"]))
                out.append((c["src"], c["dst"], int(c["port"]), c["proto"]))
            return out
        ports = sorted({(v.port, v.proto) for v in self.vulns})
        zones = sorted(self.subnets)
        return [(z1, z2, port, proto)
                for z1 in zones for z2 in zones for port, proto in ports]

    # -- proposition helpers ---------------------------------------------

    def p_subnet(self, z, h):
        return self.vocab.prop("subnet", z, h)

    def p_haclz(self, z1, z2, port, proto):
        return self.vocab.prop("haclz", z1, z2, port, proto)

    def p_vul(self, v):
        return self.vocab.prop("vul_exists", v.cve, v.host, v.port, v.proto,
                               v.impact_type)

    def p_compromised(self, h, ctype):
        return self.vocab.prop("compromised", h, ctype)

    def p_zcompromised(self, z, ctype):
        return self.vocab.prop("zcompromised", z, ctype)

    # -- build -------------------------------------------------------------

    def build(self, attacker_budget, mitigation_budget):
        init_net_props = []
        for z in sorted(self.subnets):
            for h in self.subnets[z]:
                init_net_props.append(self.p_subnet(z, h))
        for z1, z2, port, proto in self.connections:
            init_net_props.append(self.p_haclz(z1, z2, port, proto))
        for v in self.vulns:
            init_net_props.append(self.p_vul(v))

        specs = self._attack_specs()
        self._apply_refinements(specs)
        fixes, warnings = self._expand_fixes(specs)
        actions = self._emit_actions(specs)
        actions.extend(self._derivation_actions())

        init_att = []
        for z in self.controlled:
            for h in self.subnets[z]:
                init_att.append(self.p_compromised(h, "integrity"))
        goal = [pos(self.p_zcompromised(z, t)) for z, t in self.targets]

        pentest = PenTestTask(
            vocab=self.vocab,
            actions=actions,
            initial_attacker=AttackerState.of(init_att, attacker_budget),
            goal=goal,
            attacker_budget=attacker_budget,
        )
        task = MitigationTask(
            pentest=pentest,
            initial_network=NetworkState.of(init_net_props),
            fixes=fixes,
            mitigation_budget=mitigation_budget,
        )
        task.load_warnings = warnings
        return task

    def _attack_specs(self):
        """Mutable exploit-action specs, one per (vuln, source host)."""
        specs = []
        zones = sorted(self.subnets)
        conn = set(self.connections)
        for v in self.vulns:
            if v.access_vector == "local":
                continue
            z2 = self.host_zone[v.host]
            for z1 in zones:
                if v.access_vector == "adjacent" and z1 != z2:
                    continue
                if (z1, z2, v.port, v.proto) not in conn:
                    continue
                for h1 in self.subnets[z1]:
                    specs.append({
                        "vuln": v,
                        "src_zone": z1,
                        "src_host": h1,
                        "cost": 1.0,
                        "probability": self.cvss_probability[v.access_complexity],
                        "extra_pre": [],
                    })
        return specs

    def _apply_refinements(self, specs):
        for ref in self.refinements:
            for s in specs:
                v = s["vuln"]
                if (_match(ref.get("cve", "*"), v.cve)
                        and _match(ref.get("host", "*"), v.host)
                        and _match(ref.get("port", "*"), v.port)
                        and _match(ref.get("proto", "*"), v.proto)):
                    if "cost" in ref:
                        s["cost"] = float(ref["cost"])
                    if "probability" in ref:
                        s["probability"] = float(ref["probability"])

    def _emit_actions(self, specs):
        actions = []
        for s in specs:
            v = s["vuln"]
            suffix = s.get("id_suffix", "")
            aid = "exploit:%s:%s->%s:%d/%s%s" % (
                v.cve, s["src_host"], v.host, v.port, v.proto, suffix)
            pre_net = [
                pos(self.p_subnet(s["src_zone"], s["src_host"])),
                pos(self.p_subnet(self.host_zone[v.host], v.host)),
                pos(self.p_haclz(s["src_zone"], self.host_zone[v.host],
                                 v.port, v.proto)),
                pos(self.p_vul(v)),
            ] + s["extra_pre"]
            pre_att = [pos(self.p_compromised(s["src_host"], "integrity"))]
            p = s["probability"]
            post = [pos(self.p_compromised(v.host, v.impact_type))]
            if p >= 1.0:
                outcomes = [Outcome(1.0, post)]
            else:
                outcomes = [Outcome(p, post), Outcome(1.0 - p, ())]
            actions.append(AttackerAction(aid, pre_net, pre_att, s["cost"], outcomes))
        return actions

    def _derivation_actions(self):
        """Cost-0 bookkeeping actions deriving zone compromise."""
        actions = []
        for z, ctype in self.targets:
            for h in self.subnets[z]:
                actions.append(AttackerAction(
                    "derive:%s:%s:%s" % (z, ctype, h),
                    pre_net=[pos(self.p_subnet(z, h))],
                    pre_att=[pos(self.p_compromised(h, ctype))],
                    cost=0.0,
                    outcomes=[Outcome(1.0, [pos(self.p_zcompromised(z, ctype))])],
                    artificial=True,
                ))
        return actions

    def _expand_fixes(self, specs):
        fixes = []
        warnings = []
        for k, schema in enumerate(self.fix_schemas):
            kind = schema["kind"]
            if kind == "patch":
                emitted = self._expand_patch(k, schema, specs)
            elif kind == "firewall-subnet":
                emitted = self._expand_firewall_subnet(k, schema)
            elif kind == "firewall-host":
                emitted = self._expand_firewall_host(k, schema, specs)
            else:
                raise ModelLoadError("fixes[%d]: unknown kind %r" % (k, kind))
            if not emitted:
                warnings.append("fixes[%d] (%s): no matching model elements, "
                                "no fix-actions generated" % (k, kind))
            fixes.extend(emitted)
        return fixes, warnings

    def _gate(self, k, schema, emitted, name):
        """Setup fix plus the setup-gated per-match fixes."""
        gate = self.vocab.prop(name, "schema%d" % k)
        out = [FixAction("fix%d:setup" % k, [neg(gate)], [pos(gate)],
                         float(schema["initial_cost"]))]
        for fid, pre, post in emitted:
            out.append(FixAction(fid, [pos(gate)] + pre, post,
                                 float(schema["subsequent_cost"])))
        return out

    def _expand_patch(self, k, schema, specs):
        matches = [v for v in self.vulns
                   if _match(schema.get("cve", "*"), v.cve)
                   and _match(schema.get("host", "*"), v.host)
                   and _match(schema.get("port", "*"), v.port)
                   and _match(schema.get("proto", "*"), v.proto)]
        if not matches:
            return []
        new_p = float(schema.get("new_probability", 0.0))
        emitted = []
        for v in matches:
            fid = "fix%d:patch:%s:%s" % (k, v.cve, v.host)
            if new_p <= 0.0:
                emitted.append((fid, [pos(self.p_vul(v))], [neg(self.p_vul(v))]))
            else:
                # counter-measures that lower but do not remove the success
                # probability: a mitigated marker gates duplicate exploit
                # actions carrying the new probability
                m = self.vocab.prop("mitigated", v.cve, v.host, v.port,
                                    v.proto, "schema%d" % k)
                emitted.append((fid, [pos(self.p_vul(v)), neg(m)], [pos(m)]))
                dups = []
                for s in specs:
                    if s["vuln"] is v and not s.get("id_suffix"):
                        s["extra_pre"].append(neg(m))
                        dup = dict(s, probability=new_p,
                                   extra_pre=[p for p in s["extra_pre"]
                                              if p != neg(m)] + [pos(m)],
                                   id_suffix="~mit%d" % k)
                        dups.append(dup)
                specs.extend(dups)
        return self._gate(k, schema, emitted, "fixsetup")

    def _expand_firewall_subnet(self, k, schema):
        src = schema.get("src", "*")
        matches = [c for c in self.connections
                   if _match(src, c[0]) and _match(schema.get("dst", "*"), c[1])
                   and _match(schema.get("port", "*"), c[2])
                   and _match(schema.get("proto", "*"), c[3])
                   # wildcard sources govern inter-subnet links only
                   and not (src == "*" and c[0] == c[1])]
        if not matches:
            return []
        emitted = []
        for z1, z2, port, proto in matches:
            h = self.p_haclz(z1, z2, port, proto)
            fid = "fix%d:fw:%s->%s:%d/%s" % (k, z1, z2, port, proto)
            emitted.append((fid, [pos(h)], [neg(h)]))
        return self._gate(k, schema, emitted, "fwapplied")

    def _expand_firewall_host(self, k, schema, specs):
        triples = sorted({(v.host, v.port, v.proto) for v in self.vulns
                          if _match(schema.get("host", "*"), v.host)
                          and _match(schema.get("port", "*"), v.port)
                          and _match(schema.get("proto", "*"), v.proto)})
        if not triples:
            return []
        emitted = []
        for h, port, proto in triples:
            blocked = self.vocab.prop("hostfw_blocked", h, port, proto)
            for s in specs:
                v = s["vuln"]
                if ((v.host, v.port, v.proto) == (h, port, proto)
                        and neg(blocked) not in s["extra_pre"]):
                    s["extra_pre"].append(neg(blocked))
            fid = "fix%d:hostfw:%s:%d/%s" % (k, h, port, proto)
            emitted.append((fid, [neg(blocked)], [pos(blocked)]))
        return self._gate(k, schema, emitted, "hostfwsetup")
