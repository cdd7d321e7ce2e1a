"""Entity identifiers for the joint power/communication network.

Every entity is named by a short prefix plus integer indices:

    P(4)         bus 4
    PB(1)        battery backup of substation 1
    BR(1,2)      branch between buses 1 and 2
    C(t,s,y,z)   communication entity (type, subtype, and two indices)
    L(f,i)       power supply link, family f, index i
    R(1)         RTU 1
    U(2)         PMU 2
    GS(1)/GP(1)  SCADA/PMU data-path pseudo entities of a substation gateway

Communication entity types: 1 = substation equipment, 2 = SONET-ring,
3 = DWDM-ring.  Type-1 subtypes: 1 server, 2 gateway, 3 LAN, 4 SONEToE
cable, 5 EoDWDM cable, 6 RTU channel, 7 PMU channel.  Type-2/3 subtypes:
1 ring node (SADM/OADM), 2 ring link.

Link families: L(1,b)/L(2,b) feed the server/gateway from bus b,
L(3,k)/L(4,k) are the k-th SADM/OADM power feed, L(5,s)/L(6,s) feed the
server/gateway of substation s from its battery.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Tuple

KIND_BUS = "bus"
KIND_BATTERY = "battery"
KIND_BRANCH = "branch"
KIND_COMM = "comm"
KIND_LINK = "link"
KIND_RTU = "rtu"
KIND_PMU = "pmu"
KIND_GW_SCADA = "gw_scada"
KIND_GW_PMU = "gw_pmu"

_PREFIX_TO_KIND = {
    "P": (KIND_BUS, 1),
    "PB": (KIND_BATTERY, 1),
    "BR": (KIND_BRANCH, 2),
    "C": (KIND_COMM, 4),
    "L": (KIND_LINK, 2),
    "R": (KIND_RTU, 1),
    "U": (KIND_PMU, 1),
    "GS": (KIND_GW_SCADA, 1),
    "GP": (KIND_GW_PMU, 1),
}

_KIND_TO_PREFIX = {kind: prefix for prefix, (kind, _) in _PREFIX_TO_KIND.items()}

# Canonical ordering of kinds for reports and rule files.
_KIND_RANK = {
    KIND_BUS: 0,
    KIND_BATTERY: 1,
    KIND_BRANCH: 2,
    KIND_COMM: 3,
    KIND_LINK: 4,
    KIND_RTU: 5,
    KIND_PMU: 6,
    KIND_GW_SCADA: 7,
    KIND_GW_PMU: 8,
}

_ENTITY_RE = re.compile(r"^([A-Z]+)\((\s*\d+\s*(?:,\s*\d+\s*)*)\)$")


class EntityError(ValueError):
    """Malformed entity identifier."""


@dataclass(frozen=True, order=False)
class EntityId:
    """Structured entity identifier: a kind plus its integer indices."""

    kind: str
    indices: Tuple[int, ...]

    def __post_init__(self):
        if self.kind not in _KIND_TO_PREFIX:
            raise EntityError(f"unknown entity kind: {self.kind!r}")
        expected = _PREFIX_TO_KIND[_KIND_TO_PREFIX[self.kind]][1]
        if len(self.indices) != expected:
            raise EntityError(
                f"{self.kind} entity takes {expected} indices, got {len(self.indices)}"
            )
        if self.kind == KIND_COMM:
            ctype, subtype = self.indices[0], self.indices[1]
            if ctype not in (1, 2, 3):
                raise EntityError(f"communication entity type must be 1, 2, or 3: {ctype}")
            if ctype == 1 and subtype not in range(1, 8):
                raise EntityError(f"type-1 subtype must be 1..7: {subtype}")
            if ctype in (2, 3) and subtype not in (1, 2):
                raise EntityError(f"type-{ctype} subtype must be 1 or 2: {subtype}")
        if self.kind == KIND_LINK and self.indices[0] not in range(1, 7):
            raise EntityError(f"link family must be 1..6: {self.indices[0]}")

    @property
    def sort_key(self):
        return (_KIND_RANK[self.kind], self.indices)

    def __lt__(self, other: "EntityId"):
        return self.sort_key < other.sort_key

    def __str__(self):
        prefix = _KIND_TO_PREFIX[self.kind]
        return f"{prefix}({','.join(str(i) for i in self.indices)})"

    def __repr__(self):
        return f"EntityId.parse({str(self)!r})"

    @staticmethod
    def parse(text: str) -> "EntityId":
        return parse_entity_id(text)


def parse_entity_id(text: str) -> EntityId:
    """Parse an entity identifier such as ``C(1,2,6,6)`` or ``PB(1)``."""
    match = _ENTITY_RE.match(text.strip())
    if not match:
        raise EntityError(f"malformed entity identifier: {text!r}")
    prefix, body = match.groups()
    if prefix not in _PREFIX_TO_KIND:
        raise EntityError(f"unknown entity prefix: {prefix!r}")
    kind, _ = _PREFIX_TO_KIND[prefix]
    indices = tuple(int(part) for part in body.split(","))
    return EntityId(kind, indices)


def bus(b: int) -> EntityId:
    return EntityId(KIND_BUS, (b,))


def battery(substation: int) -> EntityId:
    return EntityId(KIND_BATTERY, (substation,))


def comm(ctype: int, subtype: int, y: int, z: int) -> EntityId:
    return EntityId(KIND_COMM, (ctype, subtype, y, z))


def server(substation: int) -> EntityId:
    return comm(1, 1, substation, substation)


def gateway(substation: int) -> EntityId:
    return comm(1, 2, substation, substation)


def lan(substation: int) -> EntityId:
    return comm(1, 3, substation, substation)


def sonet_channel(sadm: int, substation: int) -> EntityId:
    return comm(1, 4, sadm, substation)


def dwdm_channel(oadm: int, substation: int) -> EntityId:
    return comm(1, 5, oadm, substation)


def rtu_channel(rtu: int, substation: int) -> EntityId:
    return comm(1, 6, rtu, substation)


def pmu_channel(pmu: int, substation: int) -> EntityId:
    return comm(1, 7, pmu, substation)


def sadm(node: int) -> EntityId:
    return comm(2, 1, node, 0)


def oadm(node: int) -> EntityId:
    return comm(3, 1, node, 0)


def sonet_ring_link(a: int, b: int) -> EntityId:
    lo, hi = sorted((a, b))
    return comm(2, 2, lo, hi)


def dwdm_ring_link(a: int, b: int) -> EntityId:
    lo, hi = sorted((a, b))
    return comm(3, 2, lo, hi)


def link(family: int, index: int) -> EntityId:
    return EntityId(KIND_LINK, (family, index))


def rtu(index: int) -> EntityId:
    return EntityId(KIND_RTU, (index,))


def pmu(index: int) -> EntityId:
    return EntityId(KIND_PMU, (index,))


def gw_scada(substation: int) -> EntityId:
    return EntityId(KIND_GW_SCADA, (substation,))


def gw_pmu(substation: int) -> EntityId:
    return EntityId(KIND_GW_PMU, (substation,))
