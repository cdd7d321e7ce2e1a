"""Joint power/communication network: substations, entity registry, rules.

The network couples three entity layers: power entities (buses, batteries),
communication entities (substation equipment, SONET-ring and DWDM-ring
nodes and links), and bridge entities (power-supply links, RTUs, PMUs).
Rule sets give each dependent entity's operational level as an expression
over other entities; availability rules are side expressions, evaluated at
a cascade fixpoint, that decide whether a substation's SCADA/PMU data still
reaches a control center.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from jointgrid import entities as ent
from jointgrid.entities import EntityId
from jointgrid.grid import Grid
from jointgrid.idr import IIM, MIIM, IdrRule, free_entities

ROLE_PLAIN = "plain"
ROLE_GENERATING = "generating"
ROLE_PRIMARY_CC = "primary_cc"
ROLE_BACKUP_CC = "backup_cc"

CASES = (1, 2)
MODELS = (MIIM, IIM)


@dataclass
class Substation:
    """A group of buses plus its communication equipment flags."""

    id: int
    buses: List[int]
    has_pmu: bool = False
    role: str = ROLE_PLAIN

    @property
    def is_control_center(self) -> bool:
        return self.role in (ROLE_PRIMARY_CC, ROLE_BACKUP_CC)


@dataclass(frozen=True)
class EntityMeta:
    """Registry metadata: owning substation and link endpoints, if any."""

    substation: Optional[int] = None
    endpoints: Optional[Tuple[str, str]] = None


@dataclass
class Ring:
    """An ordered optical ring: node ids, host substations, cycle edges."""

    kind: str  # "sadm" or "oadm"
    hosts: List[int]  # substation of node i+1 at position i (node ids 1-based)
    edges: List[Tuple[int, int]]  # ring-link node id pairs, lo < hi

    @property
    def node_count(self) -> int:
        return len(self.hosts)

    def host_of(self, node: int) -> int:
        return self.hosts[node - 1]

    def node_at(self, substation: int) -> Optional[int]:
        for i, host in enumerate(self.hosts):
            if host == substation:
                return i + 1
        return None

    def neighbors(self, node: int) -> List[int]:
        found = sorted(other for a, b in self.edges for other in (a, b) if node in (a, b) and other != node)
        return [n for i, n in enumerate(found) if i == 0 or n != found[i - 1]]


@dataclass
class AvailabilityRules:
    """Per-substation data-path expressions evaluated at a fixpoint."""

    scada: IdrRule
    pmu: Optional[IdrRule] = None


@dataclass
class RuleSet:
    """Cascade rules plus availability rules for one (model, case) pair."""

    model: str
    case: int
    rules: List[IdrRule]
    availability: Dict[int, AvailabilityRules]

    def by_target(self) -> Dict[EntityId, IdrRule]:
        return {rule.target: rule for rule in self.rules}


@dataclass
class JointNetwork:
    grid: Grid
    substations: List[Substation]
    registry: Dict[EntityId, EntityMeta]
    sadm_ring: Ring
    oadm_ring: Ring
    sadm_homing: Dict[int, int]  # non-CC substation -> SADM node id
    oadm_homing: Dict[int, int]  # non-CC substation -> OADM node id
    rtus: Dict[int, List[int]]  # substation -> RTU ids
    pmus: Dict[int, List[int]]  # substation -> PMU ids
    rule_sets: Dict[Tuple[str, int], RuleSet] = field(default_factory=dict)

    @property
    def primary_cc(self) -> int:
        return next(s.id for s in self.substations if s.role == ROLE_PRIMARY_CC)

    @property
    def backup_cc(self) -> int:
        return next(s.id for s in self.substations if s.role == ROLE_BACKUP_CC)

    @property
    def control_centers(self) -> Tuple[int, int]:
        return (self.primary_cc, self.backup_cc)

    def substation(self, sub_id: int) -> Substation:
        for sub in self.substations:
            if sub.id == sub_id:
                return sub
        raise KeyError(f"unknown substation: {sub_id}")

    def substation_of_bus(self, bus_id: int) -> int:
        for sub in self.substations:
            if bus_id in sub.buses:
                return sub.id
        raise KeyError(f"bus {bus_id} belongs to no substation")

    def rule_set(self, model: str, case: int) -> RuleSet:
        return self.rule_sets[(model, case)]

    def entity_ids(self) -> List[EntityId]:
        return sorted(self.registry)


def validate(network: JointNetwork) -> List[str]:
    """Check structural invariants; each violation is a human-readable line."""
    problems: List[str] = []
    grid_buses = set(network.grid.bus_ids)

    owner: Dict[int, List[int]] = {}
    for sub in network.substations:
        if not sub.buses:
            problems.append(f"substation {sub.id}: empty bus list")
        for bus_id in sub.buses:
            owner.setdefault(bus_id, []).append(sub.id)
            if bus_id not in grid_buses:
                problems.append(f"substation {sub.id}: unknown bus {bus_id}")
    for bus_id in sorted(grid_buses):
        subs = owner.get(bus_id, [])
        if len(subs) != 1:
            problems.append(
                f"bus {bus_id}: must belong to exactly one substation, found {sorted(subs)}"
            )

    primaries = [s.id for s in network.substations if s.role == ROLE_PRIMARY_CC]
    backups = [s.id for s in network.substations if s.role == ROLE_BACKUP_CC]
    if len(primaries) != 1 or len(backups) != 1:
        problems.append(
            "control-center cardinality: expected exactly one primary and one backup, "
            f"found primaries={primaries} backups={backups}"
        )

    for sub in network.substations:
        for builder, label in (
            (ent.server, "server"),
            (ent.gateway, "gateway"),
            (ent.lan, "LAN link"),
            (ent.battery, "battery"),
        ):
            if builder(sub.id) not in network.registry:
                problems.append(f"substation {sub.id}: missing {label}")
        if not network.rtus.get(sub.id):
            problems.append(f"substation {sub.id}: no RTU")
        pmu_count = len(network.pmus.get(sub.id, []))
        if sub.has_pmu and pmu_count == 0:
            problems.append(f"substation {sub.id}: flagged for PMU but none registered")
        if not sub.has_pmu and pmu_count > 0:
            problems.append(f"substation {sub.id}: PMUs registered without placement flag")

    for ring in (network.sadm_ring, network.oadm_ring):
        nodes = set(range(1, ring.node_count + 1))
        degree = {n: 0 for n in nodes}
        for a, b in ring.edges:
            if a not in nodes or b not in nodes:
                problems.append(f"{ring.kind} ring: link ({a},{b}) references unknown node")
                continue
            degree[a] += 1
            degree[b] += 1
        if ring.node_count >= 3:
            if any(d != 2 for d in degree.values()) or len(ring.edges) != ring.node_count:
                problems.append(f"{ring.kind} ring: links do not form a single cycle")
            elif not _is_single_cycle(nodes, ring.edges):
                problems.append(f"{ring.kind} ring: links split into multiple cycles")

    for (model, case), rule_set in sorted(network.rule_sets.items()):
        targets = set()
        for rule in rule_set.rules:
            if rule.target in targets:
                problems.append(f"{model}/case{case}: duplicate rule for {rule.target}")
            targets.add(rule.target)
            if rule.target not in network.registry:
                problems.append(f"{model}/case{case}: rule target {rule.target} not registered")
            for entity in sorted(free_entities(rule)):
                if entity not in network.registry:
                    problems.append(
                        f"{model}/case{case}: rule for {rule.target} references "
                        f"unknown entity {entity}"
                    )
        for sub_id, avail in sorted(rule_set.availability.items()):
            exprs = [avail.scada] + ([avail.pmu] if avail.pmu else [])
            for rule in exprs:
                for entity in sorted(free_entities(rule)):
                    if entity not in network.registry:
                        problems.append(
                            f"{model}/case{case}: availability rule for substation "
                            f"{sub_id} references unknown entity {entity}"
                        )
    return problems


def _is_single_cycle(nodes, edges) -> bool:
    adjacency: Dict[int, List[int]] = {n: [] for n in nodes}
    for a, b in edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    start = next(iter(nodes))
    seen = {start}
    frontier = [start]
    while frontier:
        current = frontier.pop()
        for nxt in adjacency[current]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen == set(nodes)
