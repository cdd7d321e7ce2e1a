import heapq
import random

import pytest

from jointgrid import entities as ent
from jointgrid.entities import parse_entity_id
from jointgrid.grid import Branch, Bus, Grid, SynthesisConfig
from jointgrid.idr import (
    IIM,
    MIIM,
    evaluate,
    format_idr,
    format_idr_file,
    free_entities,
    parse_idr_file,
)
from jointgrid.network import validate
from jointgrid.synthesis import (
    SynthesisError,
    all_pairs_shortest,
    build_joint_network,
    generate_idrs,
    group_substations,
    home_gateways,
    place_ring_nodes,
    ring_hosts,
    select_control_centers,
    substation_adjacency,
)

GOLDEN_SADM1 = (
    "C(2,1,1,0) <- "
    "((C(2,1,2,0) & C(2,2,1,2)) | (C(2,1,6,0) & C(2,2,1,6)) | "
    "(C(1,2,2,2) & C(1,4,1,2)) | (C(1,2,1,1) & C(1,4,1,1))) & "
    "(C(1,4,1,2) ^ C(1,4,1,6) ^ C(1,4,1,7) ^ C(1,4,1,8) ^ C(1,4,1,9) ^ C(1,4,1,11)) & "
    "((P(4) & L(3,1)) | (P(7) & L(3,2)) | (P(9) & L(3,3)) | (P(5) & L(3,4)) | "
    "(P(6) & L(3,5)) | (P(12) & L(3,6)) | (P(13) & L(3,7)) | (P(14) & L(3,8)) | "
    "(P(11) & L(3,9)) | (P(10) & L(3,10)))"
)


def simple_grid(buses, branches):
    return Grid(
        "test",
        [Bus(b, generator=False) for b in buses],
        [Branch(f, t, 0.01, 0.1, 0.0, length, transformer) for f, t, length, transformer in branches],
    )


# --- grouping ----------------------------------------------------------------


def test_fixture_substation_map(ieee14):
    by_id = {s.id: s.buses for s in ieee14.substations}
    assert by_id[1] == [4, 7, 9]
    assert by_id[2] == [5, 6]
    assert by_id[6] == [12]
    assert len(ieee14.substations) == 11


def test_heuristic_no_transformers_gives_singletons():
    grid = simple_grid([1, 2, 3], [(1, 2, 5.0, False), (2, 3, 5.0, False)])
    subs = group_substations(grid, SynthesisConfig())
    assert [(s.id, s.buses) for s in subs] == [(1, [1]), (2, [2]), (3, [3])]


def test_heuristic_transformer_merges():
    grid = simple_grid([1, 2], [(1, 2, 1.0, True)])
    subs = group_substations(grid, SynthesisConfig())
    assert [(s.id, s.buses) for s in subs] == [(1, [1, 2])]


def test_heuristic_matches_14_bus_fixture_grouping(ieee14_grid):
    # The explicit fixture map renumbers but must group identically to the
    # transformer heuristic.
    subs = group_substations(ieee14_grid, SynthesisConfig(substation_map=None))
    heuristic_groups = sorted(tuple(s.buses) for s in subs)
    fixture_groups = sorted(
        tuple(buses)
        for buses in (
            [4, 7, 9], [5, 6], [1], [2], [3], [12], [13], [14], [11], [8], [10],
        )
    )
    assert heuristic_groups == fixture_groups


def test_unknown_bus_in_map_rejected(ieee14_grid):
    config = SynthesisConfig(substation_map={99: 1})
    with pytest.raises(SynthesisError, match="unknown bus 99"):
        group_substations(ieee14_grid, config)


def test_generating_role_from_generator_buses(ieee14):
    roles = {s.id: s.role for s in ieee14.substations}
    assert roles[3] == "generating"
    assert roles[10] == "generating"
    assert roles[6] == "plain"
    assert roles[1] == "backup_cc"
    assert roles[2] == "primary_cc"


# --- distances ----------------------------------------------------------------


def dijkstra_all_pairs(adjacency, nodes):
    dist = {}
    for source in nodes:
        best = {source: 0.0}
        heap = [(0.0, source)]
        while heap:
            d, node = heapq.heappop(heap)
            if d > best.get(node, float("inf")):
                continue
            for other, w in adjacency.get(node, {}).items():
                nd = d + w
                if nd < best.get(other, float("inf")):
                    best[other] = nd
                    heapq.heappush(heap, (nd, other))
        for target in nodes:
            dist[(source, target)] = best.get(target, float("inf"))
    return dist


def test_single_edge_distance():
    grid = simple_grid([1, 2], [(1, 2, 5.0, False)])
    subs = group_substations(grid, SynthesisConfig())
    dm = all_pairs_shortest(grid, subs)
    assert dm.dist(1, 2) == 5.0
    assert dm.dist(1, 1) == 0.0


def test_triangle_relaxation():
    grid = simple_grid([1, 2, 3], [(1, 2, 1.0, False), (2, 3, 1.0, False), (1, 3, 3.0, False)])
    subs = group_substations(grid, SynthesisConfig())
    dm = all_pairs_shortest(grid, subs)
    assert dm.dist(1, 3) == 2.0


def test_parallel_branches_use_minimum_length():
    grid = simple_grid([1, 2], [(1, 2, 9.0, False), (1, 2, 4.0, False)])
    subs = group_substations(grid, SynthesisConfig())
    dm = all_pairs_shortest(grid, subs)
    assert dm.dist(1, 2) == 4.0


def test_disconnected_graph_lists_pairs():
    grid = simple_grid([1, 2, 3, 4], [(1, 2, 1.0, False), (3, 4, 1.0, False)])
    subs = group_substations(grid, SynthesisConfig())
    with pytest.raises(SynthesisError, match="unreachable pairs"):
        all_pairs_shortest(grid, subs)


def random_connected_grid(rng, n_nodes):
    branches = []
    for node in range(2, n_nodes + 1):
        other = rng.randint(1, node - 1)
        branches.append((other, node, rng.randint(1, 40) / 4.0, False))
    extra = rng.randint(0, n_nodes)
    for _ in range(extra):
        a, b = rng.sample(range(1, n_nodes + 1), 2)
        branches.append((a, b, rng.randint(1, 40) / 4.0, False))
    return simple_grid(list(range(1, n_nodes + 1)), branches)


def test_distance_matrix_symmetric_with_triangle_inequality(ieee14_grid, ieee14):
    dm = all_pairs_shortest(ieee14_grid, ieee14.substations)
    ids = dm.sub_ids
    for a in ids:
        assert dm.dist(a, a) == 0.0
        for b in ids:
            assert dm.dist(a, b) == dm.dist(b, a)
            for c in ids:
                assert dm.dist(a, c) <= dm.dist(a, b) + dm.dist(b, c) + 1e-9


def test_floyd_warshall_matches_dijkstra_20_nodes():
    rng = random.Random(7)
    for _ in range(10):
        grid = random_connected_grid(rng, 20)
        subs = group_substations(grid, SynthesisConfig())
        adjacency = substation_adjacency(grid, subs)
        dm = all_pairs_shortest(grid, subs)
        oracle = dijkstra_all_pairs(adjacency, [s.id for s in subs])
        for a in dm.sub_ids:
            for b in dm.sub_ids:
                assert dm.dist(a, b) == oracle[(a, b)]


# --- control centers -------------------------------------------------------------


def test_fixture_control_centers(ieee14):
    assert ieee14.control_centers == (2, 1)


def test_two_node_tie_break():
    grid = simple_grid([1, 2], [(1, 2, 5.0, False)])
    subs = group_substations(grid, SynthesisConfig())
    dm = all_pairs_shortest(grid, subs)
    adjacency = substation_adjacency(grid, subs)
    assert select_control_centers(dm, subs, adjacency) == (1, 2)


def test_star_hub_is_primary():
    grid = simple_grid(
        [1, 2, 3, 4, 5],
        [(3, 1, 2.0, False), (3, 2, 2.0, False), (3, 4, 2.0, False), (3, 5, 2.0, False)],
    )
    subs = group_substations(grid, SynthesisConfig())
    dm = all_pairs_shortest(grid, subs)
    adjacency = substation_adjacency(grid, subs)
    primary, backup = select_control_centers(dm, subs, adjacency)
    assert primary == 3


def test_too_few_substations():
    grid = simple_grid([1, 2], [(1, 2, 1.0, True)])
    subs = group_substations(grid, SynthesisConfig())
    dm = all_pairs_shortest(grid, subs)
    with pytest.raises(SynthesisError, match="at least two"):
        select_control_centers(dm, subs, None)


def test_override_wins():
    grid = simple_grid([1, 2, 3], [(1, 2, 1.0, False), (2, 3, 1.0, False)])
    subs = group_substations(grid, SynthesisConfig())
    dm = all_pairs_shortest(grid, subs)
    assert select_control_centers(dm, subs, None, override=(3, 1)) == (3, 1)
    with pytest.raises(SynthesisError, match="unknown substations"):
        select_control_centers(dm, subs, None, override=(9, 1))


# --- ring placement -----------------------------------------------------------


def test_fixture_ring_placements(ieee14):
    assert ieee14.sadm_ring.hosts == [1, 2, 3, 4, 5, 10]
    assert ieee14.oadm_ring.hosts == [1, 2, 4, 7, 11]
    assert (1, 2) in ieee14.sadm_ring.edges
    assert (1, 6) in ieee14.sadm_ring.edges
    assert ieee14.sadm_ring.neighbors(1) == [2, 6]


def test_all_generating_places_sadm_everywhere():
    grid = Grid(
        "gen",
        [Bus(i, generator=True) for i in range(1, 5)],
        [Branch(i, i + 1, 0.01, 0.1, 0.0, 1.0, False) for i in range(1, 4)],
    )
    subs = group_substations(grid, SynthesisConfig())
    dm = all_pairs_shortest(grid, subs)
    primary, backup = select_control_centers(dm, subs, substation_adjacency(grid, subs))
    for sub in subs:
        if sub.id == primary:
            sub.role = "primary_cc"
        elif sub.id == backup:
            sub.role = "backup_cc"
    assert ring_hosts(subs, "sadm") == [1, 2, 3, 4]


def test_degenerate_ring_rejected():
    grid = simple_grid([1, 2, 3], [(1, 2, 1.0, False), (2, 3, 1.0, False)])
    subs = group_substations(grid, SynthesisConfig())
    dm = all_pairs_shortest(grid, subs)
    subs[0].role = "primary_cc"
    subs[1].role = "backup_cc"
    with pytest.raises(SynthesisError, match="degenerate"):
        place_ring_nodes(subs, "sadm", dm, 1)


def test_ring_edges_form_cycle(ieee14):
    for ring in (ieee14.sadm_ring, ieee14.oadm_ring):
        degree = {}
        for a, b in ring.edges:
            degree[a] = degree.get(a, 0) + 1
            degree[b] = degree.get(b, 0) + 1
        assert all(d == 2 for d in degree.values())
        assert len(ring.edges) == ring.node_count


# --- homing --------------------------------------------------------------------


def test_fixture_sadm_homing(ieee14):
    homed_to_1 = sorted(s for s, n in ieee14.sadm_homing.items() if n == 1)
    assert homed_to_1 == [6, 7, 8, 9, 11]
    assert ieee14.sadm_homing[3] == 3
    assert ieee14.sadm_homing[10] == 6
    assert 1 not in ieee14.sadm_homing and 2 not in ieee14.sadm_homing


def test_fixture_sadm1_sources_match_narrative(ieee14):
    # Data sources of the first SONET node: homed gateways plus the primary
    # control center's gateway.
    rule = ieee14.rule_set(MIIM, 1).by_target()[ent.sadm(1)]
    data_feed = rule.body.children[1]
    channels = sorted(e.indices[3] for e in free_entities(data_feed))
    assert channels == [2, 6, 7, 8, 9, 11]


def test_equidistant_tie_prefers_lower_node():
    grid = simple_grid(
        [1, 2, 3],
        [(1, 3, 5.0, False), (2, 3, 5.0, False), (1, 2, 20.0, False)],
    )
    subs = group_substations(grid, SynthesisConfig())
    dm = all_pairs_shortest(grid, subs)
    from jointgrid.network import Ring

    ring = Ring("sadm", [1, 2], [(1, 2)])
    homing = home_gateways(subs, ring, dm)
    assert homing[3] == 1


def test_homing_override_validated():
    from jointgrid.network import Ring

    grid = simple_grid([1, 2, 3], [(1, 2, 1.0, False), (2, 3, 1.0, False)])
    subs = group_substations(grid, SynthesisConfig())
    dm = all_pairs_shortest(grid, subs)
    ring = Ring("oadm", [1, 2], [(1, 2)])
    with pytest.raises(SynthesisError, match="hosts no oadm node"):
        home_gateways(subs, ring, dm, override={3: 3})


def test_co_located_gateway_homes_to_own_node(ieee14):
    # Substations hosting a SONET node keep their own gateway on it.
    for sub_id in (3, 4, 5):
        node = ieee14.sadm_homing[sub_id]
        assert ieee14.sadm_ring.host_of(node) == sub_id


# --- rule generation -------------------------------------------------------------


def test_golden_sadm1_rule(ieee14):
    rule = ieee14.rule_set(MIIM, 1).by_target()[ent.sadm(1)]
    assert format_idr(rule) == GOLDEN_SADM1


def test_rule_targets_cover_dependent_entities(ieee14):
    targets = {rule.target for rule in ieee14.rule_set(MIIM, 1).rules}
    for sub in ieee14.substations:
        assert ent.server(sub.id) in targets
        assert ent.gateway(sub.id) in targets
    assert ent.sadm(1) in targets and ent.oadm(5) in targets
    assert parse_entity_id("C(1,4,1,6)") in targets
    assert parse_entity_id("C(1,5,1,6)") in targets
    for bus in ieee14.grid.bus_ids:
        assert ent.bus(bus) not in targets
    assert ent.battery(1) not in targets
    assert ent.lan(1) not in targets


def test_rule_count_matches_structure(ieee14):
    rule_set = ieee14.rule_set(MIIM, 1)
    n_subs = len(ieee14.substations)
    n_channels = sum(
        1 for e in ieee14.registry if e.kind == "comm" and e.indices[:2] in ((1, 4), (1, 5))
    )
    n_rtus = sum(len(v) for v in ieee14.rtus.values())
    n_pmus = sum(len(v) for v in ieee14.pmus.values())
    n_ring_nodes = ieee14.sadm_ring.node_count + ieee14.oadm_ring.node_count
    expected = 2 * n_subs + n_channels + n_rtus + n_pmus + n_ring_nodes
    assert len(rule_set.rules) == expected


def test_all_operational_fixpoint(ieee14):
    full_state = {e: 2 for e in ieee14.registry}
    for rule in ieee14.rule_set(MIIM, 1).rules:
        assert evaluate(rule.body, full_state) == 2, format_idr(rule)
    on_state = {e: 1 for e in ieee14.registry}
    for rule in ieee14.rule_set(IIM, 1).rules:
        assert evaluate(rule.body, on_state) == 1, format_idr(rule)


def test_cases_share_cascade_rules_and_differ_in_scada_availability(ieee14):
    for model in (MIIM, IIM):
        case1 = ieee14.rule_set(model, 1)
        case2 = ieee14.rule_set(model, 2)
        assert case1.rules == case2.rules
        for sub in ieee14.substations:
            a1, a2 = case1.availability[sub.id], case2.availability[sub.id]
            assert a1.scada != a2.scada
            assert a1.pmu == a2.pmu


def test_case2_adds_exactly_one_fallback_branch(ieee14):
    from jointgrid.idr import Op, OP_MAX_OR

    case1 = ieee14.rule_set(MIIM, 1).availability[6].scada
    case2 = ieee14.rule_set(MIIM, 2).availability[6].scada
    reach1 = case1.body.children[1].children[1]
    reach2 = case2.body.children[1].children[1]
    assert isinstance(reach2, Op) and reach2.op == OP_MAX_OR
    assert reach2.children[0] == reach1
    # The extra branch is the DWDM-path term; the rest of the rule is identical.
    assert case1.body.children[0] == case2.body.children[0]
    assert case1.body.children[2] == case2.body.children[2]


def test_iim_rules_are_translations(ieee14):
    from jointgrid.idr import translate_to_iim

    miim_rules = ieee14.rule_set(MIIM, 1).rules
    iim_rules = ieee14.rule_set(IIM, 1).rules
    assert [translate_to_iim(r) for r in miim_rules] == iim_rules


def test_registry_closure(ieee14):
    for rule_set in ieee14.rule_sets.values():
        for rule in rule_set.rules:
            assert free_entities(rule) <= set(ieee14.registry)
        for avail in rule_set.availability.values():
            assert free_entities(avail.scada) <= set(ieee14.registry)
            if avail.pmu:
                assert free_entities(avail.pmu) <= set(ieee14.registry)


def test_generated_network_validates(ieee14):
    assert validate(ieee14) == []


def test_determinism(ieee14_grid):
    first = build_joint_network(ieee14_grid)
    second = build_joint_network(ieee14_grid)
    for key in first.rule_sets:
        a = format_idr_file(first.rule_sets[key].rules)
        b = format_idr_file(second.rule_sets[key].rules)
        assert a == b
    assert first.sadm_ring == second.sadm_ring
    assert first.oadm_homing == second.oadm_homing


def test_rule_files_reparse(ieee14):
    for (model, case), rule_set in ieee14.rule_sets.items():
        text = format_idr_file(rule_set.rules)
        assert parse_idr_file(text) == rule_set.rules


def test_118_bus_rules_round_trip_and_hold_at_full_operation(ieee118):
    rule_set = ieee118.rule_set(MIIM, 1)
    assert parse_idr_file(format_idr_file(rule_set.rules)) == rule_set.rules
    full_state = {e: 2 for e in ieee118.registry}
    for rule in rule_set.rules:
        assert evaluate(rule.body, full_state) == 2
    on_state = {e: 1 for e in ieee118.registry}
    for rule in ieee118.rule_set(IIM, 2).rules:
        assert evaluate(rule.body, on_state) == 1


def test_evaluation_monotone_on_generated_bodies(ieee14):
    rng = random.Random(11)
    rules = ieee14.rule_set(MIIM, 1).rules
    for _ in range(300):
        rule = rng.choice(rules)
        entities = sorted(free_entities(rule))
        state = {e: rng.choice([0, 1, 2]) for e in entities}
        before = evaluate(rule.body, state)
        victim = rng.choice(entities)
        lowered = dict(state)
        lowered[victim] = rng.choice([v for v in (0, 1, 2) if v <= state[victim]])
        after = evaluate(rule.body, lowered)
        assert after <= before


def test_random_grids_synthesize_validated_networks():
    from jointgrid.cascade import FailureScenario, run_cascade, verify_fixpoint
    from jointgrid.network import validate as validate_network

    rng = random.Random(2718)
    built = 0
    attempts = 0
    while built < 20 and attempts < 60:
        attempts += 1
        n = rng.randint(6, 24)
        branches = []
        for node in range(2, n + 1):
            other = rng.randint(1, node - 1)
            transformer = rng.random() < 0.15
            branches.append(
                Branch(other, node, 0.01, 0.1, 0.0, rng.randint(2, 60) / 2.0, transformer)
            )
        for _ in range(rng.randint(0, n // 2)):
            a, b = rng.sample(range(1, n + 1), 2)
            branches.append(Branch(a, b, 0.01, 0.1, 0.0, rng.randint(2, 60) / 2.0, False))
        gens = rng.sample(range(1, n + 1), max(3, n // 4))
        grid = Grid(
            "rand",
            [Bus(i, generator=i in gens) for i in range(1, n + 1)],
            branches,
        )
        probe_subs = group_substations(grid, SynthesisConfig())
        pmu_candidates = [s.id for s in probe_subs]
        grid.config.pmu_substations = rng.sample(
            pmu_candidates, min(3, len(pmu_candidates))
        )
        try:
            network = build_joint_network(grid)
        except SynthesisError:
            continue  # degenerate ring draw (all hosts collapse into the CCs)
        built += 1
        assert validate_network(network) == []

        full = {e: 2 for e in network.registry}
        for rule in network.rule_set(MIIM, 2).rules:
            assert evaluate(rule.body, full) == 2
        on = {e: 1 for e in network.registry}
        for rule in network.rule_set(IIM, 1).rules:
            assert evaluate(rule.body, on) == 1

        entities = network.entity_ids()
        rule_set = network.rule_set(MIIM, 1)
        for _ in range(5):
            killed = rng.sample(entities, rng.randint(1, 4))
            trace = run_cascade(network, rule_set, FailureScenario.of(killed))
            assert trace.converged_at <= 2 * len(entities)
            assert verify_fixpoint(network, rule_set, trace)
    assert built == 20


def test_multi_rtu_substation_aggregates_with_xor(ieee14):
    import copy

    from jointgrid.synthesis import generate_idrs

    network = copy.deepcopy(ieee14)
    network.rtus[6] = [6, 20]
    network.registry[ent.rtu(20)] = network.registry[ent.rtu(6)]
    network.registry[ent.rtu_channel(20, 6)] = network.registry[ent.rtu_channel(6, 6)]
    rule_set = generate_idrs(network, MIIM, 1)
    gateway_rule = rule_set.by_target()[ent.gateway(6)]
    ingest = gateway_rule.body.children[1]
    assert ingest.op == "new_xor"
    assert len(ingest.children) == 2
