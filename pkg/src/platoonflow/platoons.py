"""Platoon bookkeeping: grouping labeled vehicles and wiring strategy combos.

A platoon is a leader (LV1 or LV2) plus the run of PVs behind it.
Membership is fixed at initialization; the dynamics never regroup.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .controllers import H_FOLLOWER, H_LEADER, Strategy
from .fleet import VehicleClass


@dataclass(frozen=True)
class StrategyCombo:
    combo_id: int
    lv: Strategy  # spacing policy of platoon leaders
    pv: Strategy  # spacing policy of in-platoon followers


COMBOS: dict[int, StrategyCombo] = {c.combo_id: c for c in (
    StrategyCombo(1, Strategy.CTG, Strategy.CTG),
    StrategyCombo(2, Strategy.VTG1, Strategy.VTG1),
    StrategyCombo(3, Strategy.VTG2, Strategy.VTG2),
    StrategyCombo(4, Strategy.BS, Strategy.BS),
    StrategyCombo(5, Strategy.CTG, Strategy.CS),
    StrategyCombo(6, Strategy.VTG1, Strategy.CTG),
    StrategyCombo(7, Strategy.VTG1, Strategy.CS),
    StrategyCombo(8, Strategy.VTG2, Strategy.CTG),
    StrategyCombo(9, Strategy.VTG2, Strategy.CS),
    StrategyCombo(10, Strategy.BS, Strategy.CS),
)}


@dataclass(frozen=True)
class Platoon:
    leader: int          # ring index of the LV
    members: tuple[int, ...]  # ring indices in following order, leader first

    @property
    def tail(self) -> int:
        return self.members[-1]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class Assignment:
    """Per-vehicle control wiring resolved once at setup."""

    strategy: Strategy
    h: float | None = None          # CTG time gap, s
    leader: int | None = None       # platoon leader ring index (CS followers)
    hops: int | None = None         # gaps between leader and self (CS followers)
    rear_source: int | None = None  # whose rear gap feeds the bidirectional term


def form_platoons(labels: Sequence[VehicleClass], s_max: int = 4) -> list[Platoon]:
    """Group a labeled ring into platoons.

    Every LV1/LV2 starts one; the PVs that follow it (circularly) join
    it. A PV that has no leader anywhere upstream of it is a labeling
    bug and raises.
    """
    n = len(labels)
    if n == 0:
        raise ValueError("empty sequence")
    leader_idx = [i for i in range(n) if labels[i] in (VehicleClass.LV1, VehicleClass.LV2)]
    pv_total = sum(1 for c in labels if c is VehicleClass.PV)
    if not leader_idx:
        if pv_total:
            raise ValueError("PV present but no platoon leader in the sequence")
        return []
    platoons = []
    claimed = 0
    for lead in leader_idx:
        members = [lead]
        i = (lead + 1) % n
        while labels[i] is VehicleClass.PV and len(members) < n:
            members.append(i)
            i = (i + 1) % n
        claimed += len(members) - 1
        if len(members) > s_max:
            raise ValueError(f"platoon at {lead} has {len(members)} members, cap is {s_max}")
        platoons.append(Platoon(lead, tuple(members)))
    if claimed != pv_total:
        orphans = pv_total - claimed
        raise ValueError(f"{orphans} PV(s) not preceded by any platoon leader")
    return platoons


def rear_gap_source(platoon: Platoon, index: int, pv_strategy: Strategy) -> int:
    """Which vehicle's rear gap a bidirectional leader reads.

    With CS followers the platoon moves as one extended vehicle, so the
    leader senses the gap behind the tail; otherwise every bidirectional
    vehicle uses its own follower. A single-vehicle platoon is its own
    tail, which collapses the two cases.
    """
    if pv_strategy is Strategy.CS:
        return platoon.tail
    return index


def assign_strategies(labels: Sequence[VehicleClass], platoons: Sequence[Platoon],
                      combo: StrategyCombo) -> list[Assignment]:
    """Resolve the control wiring of every vehicle under one combo."""
    n = len(labels)
    assignments: list[Assignment | None] = [None] * n
    for i, cls in enumerate(labels):
        if cls is VehicleClass.HV:
            assignments[i] = Assignment(Strategy.HV)
    for plat in platoons:
        for pos, idx in enumerate(plat.members):
            role_strategy = combo.lv if pos == 0 else combo.pv
            h = None
            if role_strategy is Strategy.CTG:
                h = H_LEADER if pos == 0 else H_FOLLOWER
            leader = hops = rear = None
            if role_strategy is Strategy.CS:
                leader = plat.leader
                hops = pos
            if role_strategy is Strategy.BS:
                rear = rear_gap_source(plat, idx, combo.pv)
            assignments[idx] = Assignment(role_strategy, h=h, leader=leader,
                                          hops=hops, rear_source=rear)
    missing = [i for i, a in enumerate(assignments) if a is None]
    if missing:
        raise ValueError(f"vehicles {missing} are in no platoon and not HV")
    return assignments  # type: ignore[return-value]
