import random

import pytest

from jointgrid.cascade import (
    AvailabilityMask,
    FailureScenario,
    ScenarioError,
    data_availability,
    footprint_diff,
    run_cascade,
    verify_fixpoint,
)
from jointgrid.entities import parse_entity_id
from jointgrid.idr import IIM, MIIM
from jointgrid.network import RuleSet

ATTACK = [parse_entity_id(t) for t in ["P(12)", "C(1,1,6,6)", "C(1,2,6,6)"]]


def changed_strs(trace):
    return [{str(k): v for k, v in step.items()} for step in trace.changed]


@pytest.fixture(scope="module")
def attack():
    return FailureScenario.of(ATTACK, "substation-6 attack")


def test_ternary_trace_matches_reference_table(ieee14, attack):
    for case in (1, 2):
        trace = run_cascade(ieee14, ieee14.rule_set(MIIM, case), attack)
        assert trace.converged_at == 3
        assert changed_strs(trace) == [
            {"P(12)": 0, "C(1,1,6,6)": 0, "C(1,2,6,6)": 0},
            {"C(1,4,1,6)": 0, "C(1,5,1,6)": 0},
            {"C(2,1,1,0)": 1, "C(3,1,1,0)": 1},
        ]


def test_binary_trace_matches_reference_table(ieee14, attack):
    for case in (1, 2):
        trace = run_cascade(ieee14, ieee14.rule_set(IIM, case), attack)
        assert trace.converged_at == 3
        assert changed_strs(trace) == [
            {"P(12)": 0, "C(1,1,6,6)": 0, "C(1,2,6,6)": 0},
            {"C(1,4,1,6)": 0, "C(1,5,1,6)": 0},
            {"C(2,1,1,0)": 0, "C(3,1,1,0)": 0},
        ]


def test_scada_unavailability_after_attack(ieee14, attack):
    attacked_buses = {12}
    trace1 = run_cascade(ieee14, ieee14.rule_set(IIM, 1), attack)
    mask1 = data_availability(trace1.final_state(), ieee14, ieee14.rule_set(IIM, 1))
    assert mask1.scada_lost() == attacked_buses | {10, 11, 13, 14}

    trace2 = run_cascade(ieee14, ieee14.rule_set(IIM, 2), attack)
    mask2 = data_availability(trace2.final_state(), ieee14, ieee14.rule_set(IIM, 2))
    assert mask2.scada_lost() == attacked_buses | {11, 14}

    for case in (1, 2):
        trace = run_cascade(ieee14, ieee14.rule_set(MIIM, case), attack)
        mask = data_availability(trace.final_state(), ieee14, ieee14.rule_set(MIIM, case))
        assert mask.scada_lost() == attacked_buses
        assert mask.pmu_lost() == set()


def test_empty_kill_set_single_snapshot(ieee14):
    scenario = FailureScenario.of([], "nothing")
    trace = run_cascade(ieee14, ieee14.rule_set(MIIM, 1), scenario)
    assert trace.converged_at == 1
    assert len(trace.arrays) == 1
    assert set(trace.final_state().values()) == {2}


def test_all_operational_availability(ieee14):
    scenario = FailureScenario.of([], "nothing")
    for model in (MIIM, IIM):
        rule_set = ieee14.rule_set(model, 1)
        trace = run_cascade(ieee14, rule_set, scenario)
        mask = data_availability(trace.final_state(), ieee14, rule_set)
        assert mask.scada_lost() == set()
        assert mask.pmu_lost() == set()
        assert mask.pmu_equipped == {2, 13, 10}


def test_unknown_killed_entity_rejected(ieee14):
    scenario = FailureScenario.of([parse_entity_id("P(99)")])
    with pytest.raises(ScenarioError, match=r"P\(99\)"):
        run_cascade(ieee14, ieee14.rule_set(MIIM, 1), scenario)


def test_monotone_descent_and_stability_random_kills(ieee14):
    rng = random.Random(3)
    entities = ieee14.entity_ids()
    rule_set = ieee14.rule_set(MIIM, 1)
    for _ in range(50):
        killed = rng.sample(entities, rng.randint(1, 5))
        trace = run_cascade(ieee14, rule_set, FailureScenario.of(killed))
        for slot in range(len(entities)):
            values = [array[slot] for array in trace.arrays]
            assert all(a >= b for a, b in zip(values, values[1:]))
        assert trace.converged_at <= 2 * len(entities)
        assert verify_fixpoint(ieee14, rule_set, trace)


def test_rule_order_independence(ieee14, attack):
    rule_set = ieee14.rule_set(MIIM, 1)
    baseline = run_cascade(ieee14, rule_set, attack)
    rng = random.Random(5)
    shuffled_rules = list(rule_set.rules)
    rng.shuffle(shuffled_rules)
    shuffled = RuleSet(rule_set.model, rule_set.case, shuffled_rules, rule_set.availability)
    other = run_cascade(ieee14, shuffled, attack)
    assert other.changed == baseline.changed
    assert other.arrays == baseline.arrays


def test_battery_carries_substation_through_bus_loss(ieee14):
    scenario = FailureScenario.of(
        [parse_entity_id("P(5)"), parse_entity_id("P(6)")], "bus loss only"
    )
    trace = run_cascade(ieee14, ieee14.rule_set(MIIM, 1), scenario)
    assert trace.converged_at == 1
    assert len(trace.changed) == 1


def test_powerless_control_center_diverges_across_models(ieee14):
    # With buses and battery gone, the primary control center's equipment
    # dies, its channels follow, and every ring node it fed degrades.  The
    # ternary model contains the loss to the dark substation; the binary
    # model zeroes the rings and predicts a system-wide SCADA blackout.
    scenario = FailureScenario.of(
        [parse_entity_id(t) for t in ("P(5)", "P(6)", "PB(2)")], "powerless CC"
    )
    miim_rs = ieee14.rule_set(MIIM, 1)
    miim_trace = run_cascade(ieee14, miim_rs, scenario)
    assert miim_trace.converged_at == 4
    assert {str(k) for k in miim_trace.changed[1]} == {"C(1,1,2,2)", "C(1,2,2,2)", "R(2)"}
    assert all(e.indices[:2] in ((1, 4), (1, 5)) for e in miim_trace.changed[2])
    assert set(miim_trace.changed[3].values()) == {1}
    miim_mask = data_availability(miim_trace.final_state(), ieee14, miim_rs)
    assert miim_mask.scada_lost() == {5, 6}
    assert miim_mask.pmu_lost() == set()

    iim_rs = ieee14.rule_set(IIM, 1)
    iim_trace = run_cascade(ieee14, iim_rs, scenario)
    assert iim_trace.converged_at == 4
    assert set(iim_trace.changed[3].values()) == {0}
    iim_mask = data_availability(iim_trace.final_state(), ieee14, iim_rs)
    assert iim_mask.scada_lost() == set(ieee14.grid.bus_ids) - {4, 7, 9}
    assert iim_mask.pmu_lost() == {2, 10, 13}


def test_binary_footprint_contains_ternary_footprint(ieee14, attack):
    for case in (1, 2):
        miim_rs = ieee14.rule_set(MIIM, case)
        iim_rs = ieee14.rule_set(IIM, case)
        miim_mask = data_availability(
            run_cascade(ieee14, miim_rs, attack).final_state(), ieee14, miim_rs
        )
        iim_mask = data_availability(
            run_cascade(ieee14, iim_rs, attack).final_state(), ieee14, iim_rs
        )
        assert miim_mask.scada_lost() <= iim_mask.scada_lost()
        assert miim_mask.pmu_lost() <= iim_mask.pmu_lost()


def test_footprint_diff_reference_sets(ieee14, attack):
    masks = {}
    for model in (MIIM, IIM):
        for case in (1, 2):
            rule_set = ieee14.rule_set(model, case)
            trace = run_cascade(ieee14, rule_set, attack)
            masks[(model, case)] = data_availability(trace.final_state(), ieee14, rule_set)

    diff = footprint_diff(masks[(MIIM, 1)], masks[(IIM, 1)])
    assert diff.scada_only_b == {10, 11, 13, 14}
    assert diff.scada_only_a == set()

    case_diff = footprint_diff(masks[(IIM, 2)], masks[(IIM, 1)])
    assert case_diff.scada_only_b == {10, 13}
    assert case_diff.scada_only_a == set()

    same = footprint_diff(masks[(MIIM, 1)], masks[(MIIM, 2)])
    assert same.empty()


def test_footprint_diff_bus_set_mismatch():
    mask_a = AvailabilityMask({1: True}, {1: False})
    mask_b = AvailabilityMask({2: True}, {2: False})
    with pytest.raises(ValueError, match="different bus sets"):
        footprint_diff(mask_a, mask_b)


def test_value_history(ieee14, attack):
    trace = run_cascade(ieee14, ieee14.rule_set(MIIM, 1), attack)
    assert trace.value_history(parse_entity_id("C(2,1,1,0)")) == [2, 2, 1]
    assert trace.value_history(parse_entity_id("P(12)")) == [0, 0, 0]
