"""Synchronous fixpoint cascade over a rule set.

Every entity starts at full operation; attacked entities are clamped to 0
for the whole run.  Each time step re-evaluates every dependent entity's
rule against the previous step's state simultaneously; a snapshot is
recorded whenever anything changes, and the run stops at the first step
that changes nothing.  Operator monotonicity makes values non-increasing,
which guarantees convergence well inside 2x the entity count.

After a run, availability rules turn the fixpoint into a per-bus mask of
which buses still deliver SCADA and PMU measurements to a control center.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Set

from jointgrid.entities import EntityId
from jointgrid.idr import (
    MIIM,
    compile_expr,
    compiled_globals,
    evaluate,
    free_entities,
)
from jointgrid.network import JointNetwork, RuleSet


class CascadeError(RuntimeError):
    pass


class ConvergenceError(CascadeError):
    """Iteration exceeded the step bound; a rule set must be non-monotone."""


class MonotonicityError(CascadeError):
    """An entity's value increased between steps."""


class ScenarioError(ValueError):
    """Scenario references entities outside the registry."""


@dataclass(frozen=True)
class FailureScenario:
    killed: FrozenSet[EntityId]
    label: str = ""

    @staticmethod
    def of(killed: Iterable[EntityId], label: str = "") -> "FailureScenario":
        return FailureScenario(frozenset(killed), label)


@dataclass
class CascadeTrace:
    """Distinct per-step snapshots T1..Tn; Tn is the fixpoint."""

    entities: List[EntityId]
    arrays: List[List[int]]
    changed: List[Dict[EntityId, int]]
    converged_at: int

    @cached_property
    def steps(self) -> List[Dict[EntityId, int]]:
        return [
            {entity: array[i] for i, entity in enumerate(self.entities)}
            for array in self.arrays
        ]

    def final_state(self) -> Dict[EntityId, int]:
        return self.steps[-1]

    def value_history(self, entity: EntityId) -> List[int]:
        slot = self.entities.index(entity)
        return [array[slot] for array in self.arrays]


class _CompiledRules:
    """Rules compiled to code objects over a slot-indexed state array."""

    def __init__(self, rule_set: RuleSet, entities: List[EntityId]):
        self.slots = {entity: i for i, entity in enumerate(entities)}
        self.targets: List[int] = []
        self.codes = []
        self.rdeps: Dict[int, List[int]] = {}
        missing = [r.target for r in rule_set.rules if r.target not in self.slots]
        if missing:
            raise ScenarioError(f"rules target unregistered entities: {missing[:5]}")
        for rule_index, rule in enumerate(rule_set.rules):
            self.targets.append(self.slots[rule.target])
            self.codes.append(compile_expr(rule.body, self.slots))
            for entity in free_entities(rule):
                self.rdeps.setdefault(self.slots[entity], []).append(rule_index)
        self.globals = compiled_globals()


def _compiled(rule_set: RuleSet, entities: List[EntityId]) -> _CompiledRules:
    cache = getattr(rule_set, "_compiled", None)
    if cache is None or cache.slots.keys() != set(entities):
        cache = _CompiledRules(rule_set, entities)
        rule_set._compiled = cache
    return cache


def run_cascade(
    network: JointNetwork,
    rule_set: RuleSet,
    scenario: FailureScenario,
) -> CascadeTrace:
    """Run the synchronous cascade to its fixpoint."""
    entities = network.entity_ids()
    top = 2 if rule_set.model == MIIM else 1
    compiled = _compiled(rule_set, entities)
    slots = compiled.slots

    unknown = [e for e in sorted(scenario.killed) if e not in slots]
    if unknown:
        raise ScenarioError(f"killed entities not in registry: {[str(e) for e in unknown]}")

    state = [top] * len(entities)
    killed_slots = {slots[e] for e in scenario.killed}
    for slot in killed_slots:
        state[slot] = 0

    arrays = [list(state)]
    changed_per_step: List[Dict[EntityId, int]] = [
        {entity: 0 for entity in sorted(scenario.killed)}
    ]

    frontier: Set[int] = set(killed_slots)
    max_steps = 2 * len(entities) + 2
    local_globals = compiled.globals
    codes = compiled.codes
    targets = compiled.targets

    while frontier:
        if len(arrays) > max_steps:
            raise ConvergenceError(
                f"no fixpoint within {max_steps} steps; rule set is not monotone"
            )
        candidates: Set[int] = set()
        for slot in frontier:
            candidates.update(compiled.rdeps.get(slot, ()))
        env = {"a": state}
        updates: Dict[int, int] = {}
        for rule_index in sorted(candidates):
            target_slot = targets[rule_index]
            if target_slot in killed_slots:
                continue
            value = eval(codes[rule_index], local_globals, env)
            old = state[target_slot]
            if value > old:
                entity = entities[target_slot]
                raise MonotonicityError(
                    f"{entity} rose from {old} to {value}; rules must be monotone"
                )
            if value < old:
                updates[target_slot] = value
        if not updates:
            break
        for slot, value in updates.items():
            state[slot] = value
        arrays.append(list(state))
        changed_per_step.append(
            {entities[slot]: value for slot, value in sorted(updates.items())}
        )
        frontier = set(updates)

    return CascadeTrace(
        entities=entities,
        arrays=arrays,
        changed=changed_per_step,
        converged_at=len(arrays),
    )


def verify_fixpoint(network: JointNetwork, rule_set: RuleSet, trace: CascadeTrace) -> bool:
    """Dense re-evaluation of every rule at the final state changes nothing.

    Clamped (attacked) targets are exempt: they hold 0 regardless of what
    their rules would compute.
    """
    compiled = _compiled(rule_set, network.entity_ids())
    state = trace.arrays[-1]
    killed_slots = {compiled.slots[e] for e in trace.changed[0]}
    env = {"a": state}
    for rule_index, code in enumerate(compiled.codes):
        target_slot = compiled.targets[rule_index]
        if target_slot in killed_slots:
            continue
        if eval(code, compiled.globals, env) != state[target_slot]:
            return False
    return True


@dataclass
class AvailabilityMask:
    """Per-bus SCADA/PMU delivery flags at a cascade fixpoint.

    ``pmu`` is false both for undelivered PMU data and for buses whose
    substation has no PMU at all; ``pmu_equipped`` separates the two.
    """

    scada: Dict[int, bool]
    pmu: Dict[int, bool]
    pmu_equipped: FrozenSet[int] = frozenset()

    def scada_lost(self) -> Set[int]:
        return {bus for bus, ok in self.scada.items() if not ok}

    def pmu_lost(self) -> Set[int]:
        """Buses in PMU-equipped substations whose PMU data is not delivered."""
        return {bus for bus in self.pmu_equipped if not self.pmu[bus]}

    def bus_ids(self) -> Set[int]:
        return set(self.scada)


def data_availability(
    final_state: Dict[EntityId, int],
    network: JointNetwork,
    rule_set: RuleSet,
) -> AvailabilityMask:
    """Evaluate the availability rules at a fixpoint.

    A substation's buses deliver SCADA (or PMU) data when the matching
    data-path expression evaluates to at least reduced operation.  Buses in
    substations without PMUs never deliver PMU data.
    """
    scada: Dict[int, bool] = {}
    pmu: Dict[int, bool] = {}
    equipped: Set[int] = set()
    for sub in network.substations:
        avail = rule_set.availability[sub.id]
        scada_ok = evaluate(avail.scada.body, final_state) >= 1
        pmu_ok = bool(avail.pmu) and evaluate(avail.pmu.body, final_state) >= 1
        for bus in sub.buses:
            scada[bus] = scada_ok
            pmu[bus] = pmu_ok if sub.has_pmu else False
            if sub.has_pmu:
                equipped.add(bus)
    return AvailabilityMask(scada, pmu, frozenset(equipped))


@dataclass
class FootprintDiff:
    """Per-kind buses lost under one mask but not the other."""

    scada_only_a: Set[int] = field(default_factory=set)
    scada_only_b: Set[int] = field(default_factory=set)
    pmu_only_a: Set[int] = field(default_factory=set)
    pmu_only_b: Set[int] = field(default_factory=set)

    def empty(self) -> bool:
        return not (self.scada_only_a or self.scada_only_b or self.pmu_only_a or self.pmu_only_b)


def footprint_diff(mask_a: AvailabilityMask, mask_b: AvailabilityMask) -> FootprintDiff:
    """Which buses lose measurements under exactly one of two masks."""
    if mask_a.bus_ids() != mask_b.bus_ids():
        raise ValueError("availability masks cover different bus sets")
    lost_a, lost_b = mask_a.scada_lost(), mask_b.scada_lost()
    pmu_a, pmu_b = mask_a.pmu_lost(), mask_b.pmu_lost()
    return FootprintDiff(
        scada_only_a=lost_a - lost_b,
        scada_only_b=lost_b - lost_a,
        pmu_only_a=pmu_a - pmu_b,
        pmu_only_b=pmu_b - pmu_a,
    )
