"""Fleet composition for a mixed CAV / human-driven ring.

A two-state Markov walk (human-driven vs automated) generates the order
of vehicle types around the ring; automated vehicles are then labeled by
the role they play in a platoon. The closed-form class probabilities
below describe the stationary behaviour of that walk, with a separate
branch for full platoon intensity where all CAVs sit in one block.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Sequence


class VehicleClass(Enum):
    HV = "HV"    # human-driven
    LV1 = "LV1"  # platoon leader directly behind an HV
    LV2 = "LV2"  # platoon leader created by the size cap
    PV = "PV"    # in-platoon follower

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FleetSpec:
    n_vehicles: int
    p: float           # CAV penetration rate, 0..1
    intensity: float   # platoon intensity O, 0..1
    s_max: int = 4     # platoon size cap

    def __post_init__(self) -> None:
        if self.n_vehicles < 1:
            raise ValueError(f"need at least one vehicle, got {self.n_vehicles}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"penetration p must be in [0, 1], got {self.p}")
        if not 0.0 <= self.intensity <= 1.0:
            raise ValueError(f"intensity must be in [0, 1], got {self.intensity}")
        if self.s_max < 1:
            raise ValueError(f"platoon size cap must be >= 1, got {self.s_max}")


@dataclass(frozen=True)
class TransitionProbs:
    """One-step transitions of the vehicle-type walk (H = human, A = automated)."""

    t_hh: float
    t_ha: float
    t_ah: float
    t_aa: float


@dataclass(frozen=True)
class ClassProbabilities:
    """Probability that a vehicle drawn from the ring belongs to each class."""

    p_lv1: float
    p_lv2: float
    p_pv: float
    p_hv: float = 0.0

    def total(self) -> float:
        # sums to the CAV penetration p
        return self.p_lv1 + self.p_lv2 + self.p_pv


@dataclass(frozen=True)
class GoodnessOfFit:
    r2: float
    rmse: float
    note: str | None = None


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def transition_probs(p: float, intensity: float) -> TransitionProbs:
    """Transition probabilities as functions of penetration and intensity."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"penetration p must be in [0, 1], got {p}")
    if not 0.0 <= intensity <= 1.0:
        raise ValueError(f"intensity must be in [0, 1], got {intensity}")
    t_ah = (1.0 - intensity) * (1.0 - p)
    t_ha = (1.0 - intensity) * p
    return TransitionProbs(t_hh=1.0 - t_ha, t_ha=t_ha, t_ah=t_ah, t_aa=1.0 - t_ah)


def class_probabilities(p: float, intensity: float, s_max: int) -> ClassProbabilities:
    """Closed-form LV1 / LV2 / PV probabilities.

    At full intensity (or p = 1) the walk never leaves the automated
    state, so the geometric-run formulas degenerate; that branch uses
    the block-chunking result instead: no LV1, one leader per s_max.
    """
    if s_max < 1:
        raise ValueError(f"platoon size cap must be >= 1, got {s_max}")
    t = transition_probs(p, intensity)
    if t.t_ah == 0.0:
        # intensity 1 or p 1: a single contiguous CAV block
        if intensity != 1.0:
            logging.getLogger(__name__).debug(
                "t_AA = 1 at p=%g, O=%g: geometric-run branch degenerate, "
                "using the block-chunking form", p, intensity)
        return ClassProbabilities(0.0, p / s_max, (s_max - 1) * p / s_max, 1.0 - p)
    # log1p/expm1 keep 1 - t_aa^S accurate when t_ah is tiny (intensity -> 1)
    log_taa = math.log1p(-t.t_ah)
    taa_s = math.exp(s_max * log_taa)
    one_minus_taa_s = -math.expm1(s_max * log_taa)
    one_minus_taa_sm1 = -math.expm1((s_max - 1) * log_taa)
    p_lv1 = (1.0 - p) * t.t_ha
    p_lv2 = taa_s * p_lv1 / one_minus_taa_s
    p_pv = t.t_aa * one_minus_taa_sm1 * p_lv1 / (t.t_ah * one_minus_taa_s)
    return ClassProbabilities(p_lv1, p_lv2, p_pv, 1.0 - p)


def label_roles(is_cav: Sequence[bool], s_max: int = 4) -> list[VehicleClass]:
    """Label a circular CAV/HV pattern with platoon roles.

    Each maximal circular run of CAVs is chunked: the run head is LV1
    (it sits behind an HV), every offset that is a multiple of s_max
    starts a fresh platoon as LV2, everything else is PV. A ring with
    no HV at all has no run head, so chunk starts are all LV2.
    """
    n = len(is_cav)
    if n == 0:
        raise ValueError("empty sequence")
    if s_max < 1:
        raise ValueError(f"platoon size cap must be >= 1, got {s_max}")
    if not any(is_cav):
        return [VehicleClass.HV] * n
    if all(is_cav):
        return [VehicleClass.LV2 if i % s_max == 0 else VehicleClass.PV
                for i in range(n)]
    roles = [VehicleClass.HV] * n
    starts = [i for i in range(n) if is_cav[i] and not is_cav[i - 1]]
    for start in starts:
        offset = 0
        i = start
        while is_cav[i]:
            if offset == 0:
                roles[i] = VehicleClass.LV1
            elif offset % s_max == 0:
                roles[i] = VehicleClass.LV2
            else:
                roles[i] = VehicleClass.PV
            offset += 1
            i = (i + 1) % n
    return roles


def generate_sequence(spec: FleetSpec, seed: int | None = None) -> list[VehicleClass]:
    """Draw one labeled ring sequence.

    Full intensity is deterministic: round_half_up(p * n) CAVs in one
    block after the HVs. Below full intensity the types come from a
    linear Markov walk whose first vehicle is automated with
    probability p (the walk's stationary law); the wrap transition is
    not constrained, but labeling is still circular.
    """
    if spec.intensity == 1.0:
        n_cav = round_half_up(spec.p * spec.n_vehicles)
        flags = [False] * (spec.n_vehicles - n_cav) + [True] * n_cav
        return label_roles(flags, spec.s_max)
    rng = random.Random(seed)
    t = transition_probs(spec.p, spec.intensity)
    cur = rng.random() < spec.p
    flags = [cur]
    for _ in range(spec.n_vehicles - 1):
        cur = rng.random() < (t.t_aa if cur else t.t_ha)
        flags.append(cur)
    return label_roles(flags, spec.s_max)


def empirical_distribution(sequences: Sequence[Sequence[VehicleClass]]) -> ClassProbabilities:
    """Class frequencies over all vehicles of all given sequences."""
    total = sum(len(s) for s in sequences)
    if total == 0:
        raise ValueError("no vehicles to count")
    counts = {cls: 0 for cls in VehicleClass}
    for seq in sequences:
        for cls in seq:
            counts[cls] += 1
    return ClassProbabilities(
        counts[VehicleClass.LV1] / total,
        counts[VehicleClass.LV2] / total,
        counts[VehicleClass.PV] / total,
        counts[VehicleClass.HV] / total,
    )


def goodness_of_fit(empirical: Sequence[float], theoretical: Sequence[float]) -> GoodnessOfFit:
    """R^2 and RMSE of a theoretical curve against empirical points."""
    if len(empirical) != len(theoretical):
        raise ValueError(f"curve lengths differ: {len(empirical)} vs {len(theoretical)}")
    if len(empirical) == 0:
        raise ValueError("empty curves")
    n = len(empirical)
    ss_res = sum((e - t) ** 2 for e, t in zip(empirical, theoretical))
    mean_emp = sum(empirical) / n
    ss_tot = sum((e - mean_emp) ** 2 for e in empirical)
    rmse = math.sqrt(ss_res / n)
    # a curve that is constant to rounding error has no variance to explain
    scale = max(1.0, max(abs(e) for e in empirical))
    if ss_tot <= n * (1e-12 * scale) ** 2:
        return GoodnessOfFit(math.nan, rmse, note="degenerate: empirical curve is constant")
    return GoodnessOfFit(1.0 - ss_res / ss_tot, rmse)
