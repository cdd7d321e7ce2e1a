"""Builds the communication overlay and its dependency-rule sets from a grid.

Pipeline: group buses into substations, compute inter-substation distances
(Floyd-Warshall over branch lengths), pick primary/backup control centers,
place SONET-ring nodes (SADMs) near control centers and generating
substations and DWDM-ring nodes (OADMs) near control centers and
PMU-equipped substations, home every other gateway onto its nearest ring
nodes, then emit the full rule sets for both the ternary and binary models
and both channel policies.

Channel policy case 1 keeps RTU traffic strictly on the SONET path; case 2
lets the high-bandwidth DWDM path carry RTU traffic when the SONET path is
down.  The two cases share cascade rules and differ only in the SCADA
availability expressions.

Explicit placement inputs (substation map, control centers, per-substation
homing) override the distance-derived choices; they exist because real
fiber layouts follow geography that branch lengths cannot always recover.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from jointgrid import entities as ent
from jointgrid.entities import EntityId
from jointgrid.grid import Grid, SynthesisConfig
from jointgrid.idr import (
    IIM,
    MIIM,
    IdrExpr,
    IdrRule,
    Literal,
    Op,
    OP_MAX_OR,
    OP_MIN_AND,
    OP_NEW_XOR,
    translate_to_iim,
)
from jointgrid.network import (
    AvailabilityRules,
    EntityMeta,
    JointNetwork,
    Ring,
    RuleSet,
    Substation,
    ROLE_BACKUP_CC,
    ROLE_GENERATING,
    ROLE_PRIMARY_CC,
)


class SynthesisError(ValueError):
    """Synthesis inputs are inconsistent with the grid."""


# --- Substation grouping -----------------------------------------------------


def group_substations(grid: Grid, config: Optional[SynthesisConfig] = None) -> List[Substation]:
    """Group buses into substations.

    An explicit bus-to-substation map wins; otherwise buses joined by
    transformer branches merge and every other bus stands alone, with
    substation ids assigned in ascending order of each group's lowest bus.
    """
    config = config or grid.config
    if config.substation_map is not None:
        groups: Dict[int, List[int]] = {}
        for bus_id in sorted(config.substation_map):
            if bus_id not in set(grid.bus_ids):
                raise SynthesisError(f"substation map references unknown bus {bus_id}")
            groups.setdefault(config.substation_map[bus_id], []).append(bus_id)
        subs = [Substation(sub_id, buses) for sub_id, buses in sorted(groups.items())]
    else:
        parent = {b: b for b in grid.bus_ids}

        def find(b):
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            return b

        for branch in grid.branches:
            if branch.transformer:
                ra, rb = find(branch.from_bus), find(branch.to_bus)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        groups = {}
        for b in grid.bus_ids:
            groups.setdefault(find(b), []).append(b)
        subs = [
            Substation(i, buses)
            for i, (_, buses) in enumerate(sorted(groups.items()), start=1)
        ]

    generators = set(grid.generator_buses())
    pmu_subs = set(config.pmu_substations)
    sub_ids = {s.id for s in subs}
    unknown = pmu_subs - sub_ids
    if unknown:
        raise SynthesisError(f"pmu_substations reference unknown substations: {sorted(unknown)}")
    for sub in subs:
        sub.buses.sort()
        if any(b in generators for b in sub.buses):
            sub.role = ROLE_GENERATING
        sub.has_pmu = sub.id in pmu_subs
    return subs


# --- Distances ----------------------------------------------------------------


@dataclass
class DistanceMatrix:
    """All-pairs shortest distances (km) between substations."""

    sub_ids: List[int]
    matrix: np.ndarray

    def __post_init__(self):
        self._index = {sub: i for i, sub in enumerate(self.sub_ids)}

    def dist(self, a: int, b: int) -> float:
        return float(self.matrix[self._index[a], self._index[b]])


def substation_adjacency(grid: Grid, substations: Sequence[Substation]) -> Dict[int, Dict[int, float]]:
    """Substation graph: minimum connecting-branch length between each pair."""
    sub_of = {}
    for sub in substations:
        for bus_id in sub.buses:
            sub_of[bus_id] = sub.id
    adjacency: Dict[int, Dict[int, float]] = {sub.id: {} for sub in substations}
    for branch in grid.branches:
        sa, sb = sub_of[branch.from_bus], sub_of[branch.to_bus]
        if sa == sb:
            continue
        best = adjacency[sa].get(sb)
        if best is None or branch.length < best:
            adjacency[sa][sb] = branch.length
            adjacency[sb][sa] = branch.length
    return adjacency


def all_pairs_shortest(grid: Grid, substations: Sequence[Substation]) -> DistanceMatrix:
    """Floyd-Warshall over the substation graph; rejects disconnected graphs."""
    sub_ids = sorted(s.id for s in substations)
    index = {sub: i for i, sub in enumerate(sub_ids)}
    n = len(sub_ids)
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for a, row in substation_adjacency(grid, substations).items():
        for b, w in row.items():
            d[index[a], index[b]] = min(d[index[a], index[b]], w)
    for k in range(n):
        d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
    if np.isinf(d).any():
        pairs = [
            (sub_ids[i], sub_ids[j])
            for i in range(n)
            for j in range(i + 1, n)
            if np.isinf(d[i, j])
        ]
        raise SynthesisError(f"substation graph is disconnected; unreachable pairs: {pairs}")
    return DistanceMatrix(sub_ids, d)


def select_control_centers(
    dist: DistanceMatrix,
    substations: Sequence[Substation],
    adjacency: Optional[Dict[int, Dict[int, float]]] = None,
    override: Optional[Tuple[int, int]] = None,
) -> Tuple[int, int]:
    """Pick (primary, backup) control centers.

    Ranking: smallest total shortest-path distance first, ties broken by
    higher substation-graph degree, then lower id.  An explicit override
    wins outright.
    """
    sub_ids = {s.id for s in substations}
    if override is not None:
        primary, backup = override
        missing = {primary, backup} - sub_ids
        if missing:
            raise SynthesisError(f"control-center override references unknown substations: {sorted(missing)}")
        return (primary, backup)
    if len(sub_ids) < 2:
        raise SynthesisError("need at least two substations to place control centers")
    degree = {sub: len((adjacency or {}).get(sub, {})) for sub in sub_ids}
    totals = {sub: sum(dist.dist(sub, other) for other in dist.sub_ids) for sub in sub_ids}
    ranked = sorted(sub_ids, key=lambda sub: (totals[sub], -degree[sub], sub))
    return (ranked[0], ranked[1])


# --- Ring placement and homing -------------------------------------------------

SADM = "sadm"
OADM = "oadm"


def ring_hosts(substations: Sequence[Substation], kind: str) -> List[int]:
    """Substations that receive a ring node, ascending by id."""
    hosts = set()
    for sub in substations:
        if sub.is_control_center:
            hosts.add(sub.id)
        elif kind == SADM and sub.role == ROLE_GENERATING:
            hosts.add(sub.id)
        elif kind == OADM and sub.has_pmu:
            hosts.add(sub.id)
    return sorted(hosts)


def place_ring_nodes(
    substations: Sequence[Substation], kind: str, dist: DistanceMatrix, primary_cc: int
) -> Ring:
    """Order ring hosts into a cycle via a nearest-neighbor tour from the
    primary control center; node ids follow ascending host substation id."""
    hosts = ring_hosts(substations, kind)
    if len(hosts) < 3:
        raise SynthesisError(
            f"degenerate {kind} ring: {len(hosts)} hosts (need at least 3)"
        )
    node_of = {host: i + 1 for i, host in enumerate(hosts)}
    tour = [primary_cc]
    remaining = [h for h in hosts if h != primary_cc]
    while remaining:
        current = tour[-1]
        nxt = min(remaining, key=lambda h: (dist.dist(current, h), h))
        tour.append(nxt)
        remaining.remove(nxt)
    edges = []
    for i, host in enumerate(tour):
        other = tour[(i + 1) % len(tour)]
        a, b = sorted((node_of[host], node_of[other]))
        edges.append((a, b))
    return Ring(kind, hosts, sorted(set(edges)))


def home_gateways(
    substations: Sequence[Substation],
    ring: Ring,
    dist: DistanceMatrix,
    override: Optional[Dict[int, int]] = None,
) -> Dict[int, int]:
    """Map each non-control-center substation to a ring node.

    Default choice is the nearest host (ties to the lowest node id); the
    override maps substation id to host substation id.  Control-center
    gateways connect to every node and are absent from the map.
    """
    override = override or {}
    homing: Dict[int, int] = {}
    host_set = set(ring.hosts)
    for sub in substations:
        if sub.is_control_center:
            continue
        if sub.id in override:
            host = override[sub.id]
            if host not in host_set:
                raise SynthesisError(
                    f"homing override for substation {sub.id}: {host} hosts no {ring.kind} node"
                )
            homing[sub.id] = ring.node_at(host)
        else:
            node = min(
                range(1, ring.node_count + 1),
                key=lambda n: (dist.dist(sub.id, ring.host_of(n)), n),
            )
            homing[sub.id] = node
    return homing


# --- Rule generation ------------------------------------------------------------


def _lit(entity: EntityId) -> Literal:
    return Literal(entity)


def _node(op: str, children: Sequence[IdrExpr]) -> IdrExpr:
    """Operator node that collapses to its only child."""
    children = list(children)
    if len(children) == 1:
        return children[0]
    return Op(op, tuple(children))


def _min_and(*children: IdrExpr) -> IdrExpr:
    return _node(OP_MIN_AND, children)


def _max_or(children: Sequence[IdrExpr]) -> IdrExpr:
    return _node(OP_MAX_OR, children)


def _new_xor(children: Sequence[IdrExpr]) -> IdrExpr:
    return _node(OP_NEW_XOR, children)


class _Overlay:
    """Structural facts shared by registry construction and rule emission."""

    def __init__(self, network: JointNetwork):
        self.net = network
        self.ccs = network.control_centers
        self.sadm_sources = {
            node: self._sources(network.sadm_ring, network.sadm_homing, node)
            for node in range(1, network.sadm_ring.node_count + 1)
        }
        self.oadm_sources = {
            node: self._sources(network.oadm_ring, network.oadm_homing, node)
            for node in range(1, network.oadm_ring.node_count + 1)
        }
        self.sadm_feeds = self._feeds(network.sadm_ring, self.sadm_sources)
        self.oadm_feeds = self._feeds(network.oadm_ring, self.oadm_sources)

    def _sources(self, ring: Ring, homing: Dict[int, int], node: int) -> List[int]:
        """Substations whose gateways feed data into a ring node."""
        host = ring.host_of(node)
        subs = {sub for sub, homed in homing.items() if homed == node}
        subs |= {cc for cc in self.ccs if cc != host}
        return sorted(subs)

    def _feeds(self, ring: Ring, sources: Dict[int, List[int]]) -> Dict[int, List[Tuple[int, int]]]:
        """Per node: (bus, link index) power feeds, host buses first, then
        source substations' buses ascending by substation; link indices are
        assigned globally across nodes in node order."""
        feeds: Dict[int, List[Tuple[int, int]]] = {}
        counter = 1
        for node in range(1, ring.node_count + 1):
            host = ring.host_of(node)
            sub_order = [host] + [s for s in sources[node] if s != host]
            buses: List[int] = []
            for sub_id in sub_order:
                for bus_id in self.net.substation(sub_id).buses:
                    if bus_id not in buses:
                        buses.append(bus_id)
            feeds[node] = [(bus_id, counter + i) for i, bus_id in enumerate(buses)]
            counter += len(buses)
        return feeds

    def channel_subs(self, ring: Ring, homing: Dict[int, int], node: int) -> List[int]:
        """Substations with a channel into this node: homed plus all CCs."""
        subs = {sub for sub, homed in homing.items() if homed == node}
        subs |= set(self.ccs)
        return sorted(subs)


def build_registry(network: JointNetwork) -> Dict[EntityId, EntityMeta]:
    """Register every modeled entity with its owning substation/endpoints."""
    overlay = _Overlay(network)
    registry: Dict[EntityId, EntityMeta] = {}

    for sub in network.substations:
        for bus_id in sub.buses:
            registry[ent.bus(bus_id)] = EntityMeta(substation=sub.id)
        registry[ent.battery(sub.id)] = EntityMeta(substation=sub.id)
        registry[ent.server(sub.id)] = EntityMeta(substation=sub.id)
        registry[ent.gateway(sub.id)] = EntityMeta(substation=sub.id)
        registry[ent.lan(sub.id)] = EntityMeta(substation=sub.id)
        for bus_id in sub.buses:
            registry[ent.link(1, bus_id)] = EntityMeta(
                substation=sub.id, endpoints=(f"P({bus_id})", f"C(1,1,{sub.id},{sub.id})")
            )
            registry[ent.link(2, bus_id)] = EntityMeta(
                substation=sub.id, endpoints=(f"P({bus_id})", f"C(1,2,{sub.id},{sub.id})")
            )
        registry[ent.link(5, sub.id)] = EntityMeta(
            substation=sub.id, endpoints=(f"PB({sub.id})", f"C(1,1,{sub.id},{sub.id})")
        )
        registry[ent.link(6, sub.id)] = EntityMeta(
            substation=sub.id, endpoints=(f"PB({sub.id})", f"C(1,2,{sub.id},{sub.id})")
        )
        for rtu_id in network.rtus[sub.id]:
            registry[ent.rtu(rtu_id)] = EntityMeta(substation=sub.id)
            registry[ent.rtu_channel(rtu_id, sub.id)] = EntityMeta(substation=sub.id)
        for pmu_id in network.pmus.get(sub.id, []):
            registry[ent.pmu(pmu_id)] = EntityMeta(substation=sub.id)
            registry[ent.pmu_channel(pmu_id, sub.id)] = EntityMeta(substation=sub.id)

    for ring, node_builder, link_builder, channel_builder, homing in (
        (network.sadm_ring, ent.sadm, ent.sonet_ring_link, ent.sonet_channel, network.sadm_homing),
        (network.oadm_ring, ent.oadm, ent.dwdm_ring_link, ent.dwdm_channel, network.oadm_homing),
    ):
        for node in range(1, ring.node_count + 1):
            registry[node_builder(node)] = EntityMeta(substation=ring.host_of(node))
        for a, b in ring.edges:
            registry[link_builder(a, b)] = EntityMeta(
                endpoints=(str(node_builder(a)), str(node_builder(b)))
            )
        for node in range(1, ring.node_count + 1):
            for sub_id in overlay.channel_subs(ring, homing, node):
                registry[channel_builder(node, sub_id)] = EntityMeta(
                    substation=sub_id,
                    endpoints=(str(ent.gateway(sub_id)), str(node_builder(node))),
                )

    for ring, family, feeds, node_builder in (
        (network.sadm_ring, 3, overlay.sadm_feeds, ent.sadm),
        (network.oadm_ring, 4, overlay.oadm_feeds, ent.oadm),
    ):
        for node, node_feeds in feeds.items():
            for bus_id, link_index in node_feeds:
                registry[ent.link(family, link_index)] = EntityMeta(
                    endpoints=(f"P({bus_id})", str(node_builder(node)))
                )
    return registry


def _gateway_power(sub: Substation) -> IdrExpr:
    terms = [_min_and(_lit(ent.bus(b)), _lit(ent.link(2, b))) for b in sub.buses]
    terms.append(_min_and(_lit(ent.battery(sub.id)), _lit(ent.link(6, sub.id))))
    return _max_or(terms)


def _server_power(sub: Substation) -> IdrExpr:
    terms = [_min_and(_lit(ent.bus(b)), _lit(ent.link(1, b))) for b in sub.buses]
    terms.append(_min_and(_lit(ent.battery(sub.id)), _lit(ent.link(5, sub.id))))
    return _max_or(terms)


def _scada_ingest(network: JointNetwork, sub: Substation) -> IdrExpr:
    terms = [
        _min_and(_lit(ent.rtu(i)), _lit(ent.rtu_channel(i, sub.id)))
        for i in network.rtus[sub.id]
    ]
    return _new_xor(terms)


def _pmu_ingest(network: JointNetwork, sub: Substation) -> IdrExpr:
    terms = [
        _min_and(_lit(ent.pmu(j)), _lit(ent.pmu_channel(j, sub.id)))
        for j in network.pmus[sub.id]
    ]
    return _new_xor(terms)


def _ring_connect(
    network: JointNetwork, sub: Substation, ring: Ring, homing: Dict[int, int],
    node_builder, channel_builder,
) -> IdrExpr:
    """Gateway-to-ring reachability term: the homed node for an ordinary
    substation, any node for a control center."""
    if sub.is_control_center:
        terms = [
            _min_and(_lit(node_builder(node)), _lit(channel_builder(node, sub.id)))
            for node in range(1, ring.node_count + 1)
        ]
        return _max_or(terms)
    node = homing[sub.id]
    return _min_and(_lit(node_builder(node)), _lit(channel_builder(node, sub.id)))


def _ring_node_rule(
    network: JointNetwork, overlay: _Overlay, ring: Ring, node: int,
    node_builder, link_builder, channel_builder, family: int,
) -> IdrRule:
    """Operational rule for a ring node: survivable ring/control-center
    reachability, unanimous data feed from its source gateways' channels,
    and at least one live power feed."""
    reach_terms: List[IdrExpr] = []
    for neighbor in ring.neighbors(node):
        link = link_builder(node, neighbor)
        reach_terms.append(_min_and(_lit(node_builder(neighbor)), _lit(link)))
    for cc in overlay.ccs:
        reach_terms.append(
            _min_and(_lit(ent.gateway(cc)), _lit(channel_builder(node, cc)))
        )
    sources = overlay.sadm_sources[node] if ring.kind == SADM else overlay.oadm_sources[node]
    data_terms = [_lit(channel_builder(node, sub_id)) for sub_id in sources]
    feeds = overlay.sadm_feeds[node] if ring.kind == SADM else overlay.oadm_feeds[node]
    power_terms = [
        _min_and(_lit(ent.bus(bus_id)), _lit(ent.link(family, link_index)))
        for bus_id, link_index in feeds
    ]
    body = _min_and(_max_or(reach_terms), _new_xor(data_terms), _max_or(power_terms))
    return IdrRule(node_builder(node), body, MIIM)


def generate_cascade_rules(network: JointNetwork) -> List[IdrRule]:
    """Ternary-model cascade rules, one per dependent entity.

    Buses, batteries, intra-substation cabling, ring links, and power-supply
    links carry no rules: they fail only when attacked directly.  Ring-node
    reachability is deliberately absent from gateway rules; whether data
    still reaches a control center is the availability layer's question and
    does not feed back into equipment failure.
    """
    overlay = _Overlay(network)
    rules: List[IdrRule] = []

    for sub in sorted(network.substations, key=lambda s: s.id):
        server_body = _min_and(
            _min_and(_lit(ent.gateway(sub.id)), _lit(ent.lan(sub.id))),
            _server_power(sub),
        )
        rules.append(IdrRule(ent.server(sub.id), server_body, MIIM))

        head = _min_and(_lit(ent.server(sub.id)), _lit(ent.lan(sub.id)))
        scada_core = _min_and(head, _scada_ingest(network, sub), _gateway_power(sub))
        if network.pmus.get(sub.id):
            pmu_core = _min_and(head, _pmu_ingest(network, sub), _gateway_power(sub))
            gateway_body: IdrExpr = _new_xor([scada_core, pmu_core])
        else:
            gateway_body = scada_core
        rules.append(IdrRule(ent.gateway(sub.id), gateway_body, MIIM))

        for rtu_id in network.rtus[sub.id]:
            rules.append(IdrRule(ent.rtu(rtu_id), _device_power(sub), MIIM))
        for pmu_id in network.pmus.get(sub.id, []):
            rules.append(IdrRule(ent.pmu(pmu_id), _device_power(sub), MIIM))

    for ring, node_builder, link_builder, channel_builder, homing, family in (
        (network.sadm_ring, ent.sadm, ent.sonet_ring_link, ent.sonet_channel, network.sadm_homing, 3),
        (network.oadm_ring, ent.oadm, ent.dwdm_ring_link, ent.dwdm_channel, network.oadm_homing, 4),
    ):
        for node in range(1, ring.node_count + 1):
            rules.append(
                _ring_node_rule(
                    network, overlay, ring, node,
                    node_builder, link_builder, channel_builder, family,
                )
            )
        for node in range(1, ring.node_count + 1):
            for sub_id in overlay.channel_subs(ring, homing, node):
                rules.append(
                    IdrRule(
                        channel_builder(node, sub_id),
                        _lit(ent.gateway(sub_id)),
                        MIIM,
                    )
                )

    rules.sort(key=lambda rule: rule.target.sort_key)
    return rules


def _device_power(sub: Substation) -> IdrExpr:
    terms: List[IdrExpr] = [_lit(ent.bus(b)) for b in sub.buses]
    terms.append(_lit(ent.battery(sub.id)))
    return _max_or(terms)


def generate_availability_rules(network: JointNetwork, case: int) -> Dict[int, AvailabilityRules]:
    """Data-path expressions deciding SCADA/PMU delivery per substation.

    SCADA follows the SONET path; under case 2 the DWDM path backs it up.
    The expressions mirror the gateway's full operating conditions (server
    and LAN, device ingest, ring reachability, power) and are evaluated
    against a cascade fixpoint rather than iterated.
    """
    availability: Dict[int, AvailabilityRules] = {}
    for sub in sorted(network.substations, key=lambda s: s.id):
        head = _min_and(_lit(ent.server(sub.id)), _lit(ent.lan(sub.id)))
        sadm_connect = _ring_connect(
            network, sub, network.sadm_ring, network.sadm_homing, ent.sadm, ent.sonet_channel
        )
        oadm_connect = _ring_connect(
            network, sub, network.oadm_ring, network.oadm_homing, ent.oadm, ent.dwdm_channel
        )
        if case == 1:
            scada_reach = sadm_connect
        else:
            scada_reach = Op(OP_MAX_OR, (sadm_connect, oadm_connect))
        scada_body = _min_and(
            head,
            _min_and(_scada_ingest(network, sub), scada_reach),
            _gateway_power(sub),
        )
        scada_rule = IdrRule(ent.gw_scada(sub.id), scada_body, MIIM)
        pmu_rule = None
        if network.pmus.get(sub.id):
            pmu_body = _min_and(
                head,
                _min_and(_pmu_ingest(network, sub), oadm_connect),
                _gateway_power(sub),
            )
            pmu_rule = IdrRule(ent.gw_pmu(sub.id), pmu_body, MIIM)
        availability[sub.id] = AvailabilityRules(scada_rule, pmu_rule)
    return availability


def generate_idrs(network: JointNetwork, model: str, case: int) -> RuleSet:
    """Complete rule set for one (model, case) pair."""
    if case not in (1, 2):
        raise SynthesisError(f"unknown case: {case}")
    rules = generate_cascade_rules(network)
    availability = generate_availability_rules(network, case)
    if model == IIM:
        rules = [translate_to_iim(rule) for rule in rules]
        availability = {
            sub_id: AvailabilityRules(
                translate_to_iim(avail.scada),
                translate_to_iim(avail.pmu) if avail.pmu else None,
            )
            for sub_id, avail in availability.items()
        }
    elif model != MIIM:
        raise SynthesisError(f"unknown model: {model}")
    return RuleSet(model, case, rules, availability)


# --- Orchestration ----------------------------------------------------------------


def build_joint_network(grid: Grid, config: Optional[SynthesisConfig] = None) -> JointNetwork:
    """Run the full synthesis pipeline and return a validated-ready network."""
    config = config or grid.config
    substations = group_substations(grid, config)
    dist = all_pairs_shortest(grid, substations)
    adjacency = substation_adjacency(grid, substations)
    primary, backup = select_control_centers(
        dist, substations, adjacency, override=config.control_centers
    )
    for sub in substations:
        if sub.id == primary:
            sub.role = ROLE_PRIMARY_CC
        elif sub.id == backup:
            sub.role = ROLE_BACKUP_CC

    sadm_ring = place_ring_nodes(substations, SADM, dist, primary)
    oadm_ring = place_ring_nodes(substations, OADM, dist, primary)
    sadm_homing = home_gateways(substations, sadm_ring, dist, config.sadm_homing)
    oadm_homing = home_gateways(substations, oadm_ring, dist, config.oadm_homing)

    rtus: Dict[int, List[int]] = {}
    for sub in sorted(substations, key=lambda s: s.id):
        rtus[sub.id] = [sub.id]
    pmus: Dict[int, List[int]] = {sub.id: [] for sub in substations}
    next_pmu = 1
    for sub in sorted(substations, key=lambda s: s.id):
        if sub.has_pmu:
            pmus[sub.id] = [next_pmu]
            next_pmu += 1

    network = JointNetwork(
        grid=grid,
        substations=sorted(substations, key=lambda s: s.id),
        registry={},
        sadm_ring=sadm_ring,
        oadm_ring=oadm_ring,
        sadm_homing=sadm_homing,
        oadm_homing=oadm_homing,
        rtus=rtus,
        pmus=pmus,
    )
    network.registry = build_registry(network)
    for model in (MIIM, IIM):
        for case in (1, 2):
            network.rule_sets[(model, case)] = generate_idrs(network, model, case)
    return network
