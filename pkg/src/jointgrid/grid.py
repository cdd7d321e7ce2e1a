"""Transmission grid model and its JSON file format (schema v1).

A grid file carries buses, branches, and the optional synthesis inputs used
to build the communication overlay:

    {
      "version": 1,
      "name": "ieee14",
      "buses": [{"id": 1, "generator": true}, ...],
      "branches": [{"from": 1, "to": 2, "r": 0.01938, "x": 0.05917,
                    "b": 0.0528, "length": 18.0, "transformer": false}, ...],
      "substation_map": {"4": 1, "7": 1, ...},          # bus -> substation
      "pmu_substations": [4, 7, 11],
      "control_centers": [2, 1],                         # primary, backup
      "sadm_homing": {"6": 1, ...},                      # substation -> host
      "oadm_homing": {"6": 1, ...}
    }

Branch ``length`` (km) may be omitted; a stand-in proportional to the
series reactance is synthesized so that placement stays deterministic.
Electrical parameters are per-unit; only the estimation stage reads them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

SCHEMA_VERSION = 1

# km of synthesized line length per unit of per-unit reactance
LENGTH_PER_REACTANCE = 400.0


class GridError(ValueError):
    """Grid file violates the schema; message carries a JSON pointer."""


@dataclass(frozen=True)
class Bus:
    id: int
    generator: bool = False


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    r: float
    x: float
    b_sh: float = 0.0
    length: float = 0.0
    transformer: bool = False

    @property
    def key(self) -> Tuple[int, int]:
        return (self.from_bus, self.to_bus)


@dataclass
class SynthesisConfig:
    """Optional explicit placement inputs for the overlay synthesis."""

    substation_map: Optional[Dict[int, int]] = None
    pmu_substations: List[int] = field(default_factory=list)
    control_centers: Optional[Tuple[int, int]] = None
    sadm_homing: Dict[int, int] = field(default_factory=dict)
    oadm_homing: Dict[int, int] = field(default_factory=dict)


@dataclass
class Grid:
    name: str
    buses: List[Bus]
    branches: List[Branch]
    config: SynthesisConfig = field(default_factory=SynthesisConfig)

    @property
    def bus_ids(self) -> List[int]:
        return sorted(b.id for b in self.buses)

    def bus(self, bus_id: int) -> Bus:
        for b in self.buses:
            if b.id == bus_id:
                return b
        raise GridError(f"unknown bus: {bus_id}")

    def generator_buses(self) -> List[int]:
        return sorted(b.id for b in self.buses if b.generator)

    def branches_at(self, bus_id: int) -> List[Branch]:
        return [br for br in self.branches if bus_id in (br.from_bus, br.to_bus)]


def _expect(condition: bool, pointer: str, message: str):
    if not condition:
        raise GridError(f"{pointer}: {message}")


def _as_int(value, pointer: str) -> int:
    _expect(isinstance(value, int) and not isinstance(value, bool), pointer, "expected an integer")
    return value


def _as_number(value, pointer: str) -> float:
    _expect(
        isinstance(value, (int, float)) and not isinstance(value, bool),
        pointer,
        "expected a number",
    )
    return float(value)


def _as_bool(value, pointer: str) -> bool:
    _expect(isinstance(value, bool), pointer, "expected a boolean")
    return value


def grid_from_dict(data: dict, name: str = "grid") -> Grid:
    """Validate and build a Grid from parsed JSON."""
    _expect(isinstance(data, dict), "", "expected an object")
    version = data.get("version")
    if version != SCHEMA_VERSION:
        raise GridError(f"/version: unknown schema version {version!r} (expected {SCHEMA_VERSION})")

    raw_buses = data.get("buses")
    _expect(isinstance(raw_buses, list) and raw_buses, "/buses", "expected a non-empty array")
    buses: List[Bus] = []
    seen = set()
    for i, entry in enumerate(raw_buses):
        pointer = f"/buses/{i}"
        _expect(isinstance(entry, dict), pointer, "expected an object")
        bus_id = _as_int(entry.get("id"), f"{pointer}/id")
        _expect(bus_id not in seen, f"{pointer}/id", f"duplicate bus id {bus_id}")
        seen.add(bus_id)
        generator = _as_bool(entry.get("generator", False), f"{pointer}/generator")
        buses.append(Bus(bus_id, generator))

    raw_branches = data.get("branches")
    _expect(isinstance(raw_branches, list) and raw_branches, "/branches", "expected a non-empty array")
    branches: List[Branch] = []
    for i, entry in enumerate(raw_branches):
        pointer = f"/branches/{i}"
        _expect(isinstance(entry, dict), pointer, "expected an object")
        f = _as_int(entry.get("from"), f"{pointer}/from")
        t = _as_int(entry.get("to"), f"{pointer}/to")
        _expect(f in seen, f"{pointer}/from", f"unknown bus {f}")
        _expect(t in seen, f"{pointer}/to", f"unknown bus {t}")
        _expect(f != t, pointer, "branch endpoints must differ")
        r = _as_number(entry.get("r", 0.0), f"{pointer}/r")
        _expect(r >= 0.0, f"{pointer}/r", "resistance must be non-negative")
        x = _as_number(entry.get("x"), f"{pointer}/x")
        _expect(x != 0.0, f"{pointer}/x", "reactance must be non-zero")
        b_sh = _as_number(entry.get("b", 0.0), f"{pointer}/b")
        transformer = _as_bool(entry.get("transformer", False), f"{pointer}/transformer")
        if "length" in entry:
            length = _as_number(entry.get("length"), f"{pointer}/length")
        else:
            length = round(abs(x) * LENGTH_PER_REACTANCE, 6)
        _expect(
            transformer or length > 0.0,
            f"{pointer}/length",
            "line length must be positive",
        )
        branches.append(Branch(f, t, r, x, b_sh, length, transformer))

    config = SynthesisConfig()
    raw_map = data.get("substation_map")
    if raw_map is not None:
        _expect(isinstance(raw_map, dict), "/substation_map", "expected an object")
        mapping: Dict[int, int] = {}
        for key, value in raw_map.items():
            pointer = f"/substation_map/{key}"
            try:
                bus_id = int(key)
            except ValueError:
                raise GridError(f"{pointer}: key must be a bus id") from None
            _expect(bus_id in seen, pointer, f"unknown bus {bus_id}")
            mapping[bus_id] = _as_int(value, pointer)
        missing = sorted(seen - mapping.keys())
        _expect(not missing, "/substation_map", f"buses without a substation: {missing}")
        config.substation_map = mapping

    raw_pmu = data.get("pmu_substations", [])
    _expect(isinstance(raw_pmu, list), "/pmu_substations", "expected an array")
    config.pmu_substations = [
        _as_int(v, f"/pmu_substations/{i}") for i, v in enumerate(raw_pmu)
    ]

    raw_cc = data.get("control_centers")
    if raw_cc is not None:
        _expect(
            isinstance(raw_cc, list) and len(raw_cc) == 2,
            "/control_centers",
            "expected [primary, backup]",
        )
        primary = _as_int(raw_cc[0], "/control_centers/0")
        backup = _as_int(raw_cc[1], "/control_centers/1")
        _expect(primary != backup, "/control_centers", "control centers must differ")
        config.control_centers = (primary, backup)

    for field_name in ("sadm_homing", "oadm_homing"):
        raw = data.get(field_name, {})
        _expect(isinstance(raw, dict), f"/{field_name}", "expected an object")
        homing: Dict[int, int] = {}
        for key, value in raw.items():
            pointer = f"/{field_name}/{key}"
            try:
                sub = int(key)
            except ValueError:
                raise GridError(f"{pointer}: key must be a substation id") from None
            homing[sub] = _as_int(value, pointer)
        setattr(config, field_name, homing)

    return Grid(str(data.get("name", name)), buses, branches, config)


def load_grid(path) -> Grid:
    """Load and validate a grid file."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise GridError(f"not valid JSON: {exc}") from exc
    return grid_from_dict(data, name=str(path))
