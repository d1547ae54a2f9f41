"""Single-lane ring-road engine.

The update is synchronous: every controller reads the state left by the
previous step, then positions and speeds advance together under a
clamped Euler rule. Controller evaluation is vectorized per strategy
group but calls the exact functions from the controllers module, so the
engine cannot drift from the unit-tested formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controllers import (VEHICLE_LENGTH, ControlContext, Strategy, bdbm_accel,
                          cs_accel, ctg_accel, hv_accel, vtg1_accel, vtg2_accel)
from .fleet import FleetSpec, VehicleClass, generate_sequence, round_half_up
from .platoons import COMBOS, Assignment, Platoon, assign_strategies, form_platoons

GAP_FLOOR = 0.01  # m, controller-input floor once vehicles overlap


class SimulationError(RuntimeError):
    """Raised when the state stops being numerically meaningful."""


@dataclass(frozen=True)
class SimConfig:
    density: float | None = None   # veh/km; may be None when a state is built by hand
    p: float = 1.0                 # CAV penetration
    combo_id: int = 1
    intensity: float = 1.0         # platoon intensity of the initial layout
    s_max: int = 4
    ring_length: float = 1000.0    # m
    dt: float = 0.1                # s
    duration: float = 3600.0       # s
    warmup: float = 1800.0         # s discarded before sampling
    v_max: float = 33.3            # m/s
    a_max: float = 1.0             # m/s^2
    a_min: float = -5.0            # m/s^2
    seed: int = 0
    record_every: int = 10         # steps between samples

    def __post_init__(self) -> None:
        if self.density is not None and self.density <= 0:
            raise ValueError(f"density must be positive, got {self.density}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"penetration must be in [0, 1], got {self.p}")
        if self.combo_id not in COMBOS:
            raise ValueError(f"unknown strategy combo {self.combo_id}")
        if not 0.0 <= self.intensity <= 1.0:
            raise ValueError(f"intensity must be in [0, 1], got {self.intensity}")
        if self.ring_length <= 0 or self.dt <= 0:
            raise ValueError("ring length and time step must be positive")
        if not 0.0 <= self.warmup <= self.duration:
            raise ValueError(f"warmup {self.warmup} outside [0, duration {self.duration}]")
        if self.v_max <= 0 or self.a_max <= 0 or self.a_min >= 0:
            raise ValueError("need v_max > 0, a_max > 0, a_min < 0")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")


@dataclass
class RingState:
    x: np.ndarray  # position along the ring, m
    v: np.ndarray  # speed, m/s
    a: np.ndarray  # realized acceleration of the last step, m/s^2
    labels: list[VehicleClass]
    platoons: list[Platoon]
    assignments: list[Assignment]

    @property
    def n(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class Violation:
    t: float
    vehicle: int  # follower index
    gap: float    # negative clear distance observed, m


@dataclass(frozen=True)
class SafetySummary:
    count: int
    first_t: float | None
    min_gap: float | None


@dataclass
class TrajectoryLog:
    config: SimConfig
    times: np.ndarray  # (m,)
    x: np.ndarray      # (m, n)
    v: np.ndarray      # (m, n)
    a: np.ndarray      # (m, n)
    violations: list[Violation]
    labels: list[VehicleClass]
    platoons: list[Platoon]
    assignments: list[Assignment]


@dataclass
class _Groups:
    """Index arrays resolved once per run, one per strategy family."""

    hv: np.ndarray
    ctg: np.ndarray
    ctg_h: np.ndarray
    vtg1: np.ndarray
    vtg2: np.ndarray
    cs: np.ndarray
    cs_leader: np.ndarray
    cs_hops: np.ndarray
    bs: np.ndarray
    bs_rear_follower: np.ndarray  # index whose front gap is the rear gap read


def _build_groups(assignments: list[Assignment], n: int) -> _Groups:
    by = {s: [] for s in Strategy}
    for i, asg in enumerate(assignments):
        by[asg.strategy].append(i)
    idx = lambda name: np.array(by[name], dtype=np.intp)
    ctg = idx(Strategy.CTG)
    cs = idx(Strategy.CS)
    bs = idx(Strategy.BS)
    return _Groups(
        hv=idx(Strategy.HV),
        ctg=ctg,
        ctg_h=np.array([assignments[i].h for i in ctg], dtype=float),
        vtg1=idx(Strategy.VTG1),
        vtg2=idx(Strategy.VTG2),
        cs=cs,
        cs_leader=np.array([assignments[i].leader for i in cs], dtype=np.intp),
        cs_hops=np.array([assignments[i].hops for i in cs], dtype=float),
        bs=bs,
        bs_rear_follower=np.array([(assignments[i].rear_source + 1) % n for i in bs],
                                  dtype=np.intp),
    )


def init_state(config: SimConfig) -> RingState:
    """Evenly spaced standstill start with the full-intensity fleet layout."""
    if config.density is None:
        raise ValueError("config.density is required to build an initial state")
    n = round_half_up(config.density * config.ring_length / 1000.0)
    if n < 1:
        raise ValueError(f"density {config.density} puts no vehicle on the ring")
    spacing = config.ring_length / n
    if spacing < VEHICLE_LENGTH:
        raise ValueError(f"density {config.density} needs spacing {spacing:.2f} m "
                         f"< vehicle length {VEHICLE_LENGTH} m")
    x = (-spacing * np.arange(n, dtype=float)) % config.ring_length
    labels = generate_sequence(
        FleetSpec(n, config.p, config.intensity, config.s_max), config.seed)
    if config.p == 0.0:
        platoons: list[Platoon] = []
        assignments = [Assignment(Strategy.HV)] * n
    else:
        platoons = form_platoons(labels, config.s_max)
        assignments = assign_strategies(labels, platoons, COMBOS[config.combo_id])
    return RingState(x=x, v=np.zeros(n), a=np.zeros(n), labels=labels,
                     platoons=platoons, assignments=assignments)


def _advance(x: np.ndarray, v: np.ndarray, a: np.ndarray, config: SimConfig,
             groups: _Groups):
    """One synchronous step; returns new arrays plus observed violations."""
    n = x.size
    ring = config.ring_length
    x_pred = np.roll(x, 1)
    v_pred = np.roll(v, 1)
    a_pred = np.roll(a, 1)
    dx = (x_pred - x) % ring
    if n == 1:
        dx[:] = ring
    gap = dx - VEHICLE_LENGTH
    viol = np.flatnonzero(gap < 0.0)
    gap_c = np.maximum(gap, GAP_FLOOR)

    u = np.zeros(n)
    g = groups
    if g.hv.size:
        u[g.hv] = hv_accel(ControlContext(
            v=v[g.hv], gap=gap_c[g.hv], v_pred=v_pred[g.hv], a_pred=a_pred[g.hv]))
    if g.ctg.size:
        u[g.ctg] = ctg_accel(ControlContext(
            v=v[g.ctg], gap=gap_c[g.ctg], v_pred=v_pred[g.ctg],
            a_pred=a_pred[g.ctg]), h=g.ctg_h)
    if g.vtg1.size:
        u[g.vtg1] = vtg1_accel(ControlContext(
            v=v[g.vtg1], gap=gap_c[g.vtg1], v_pred=v_pred[g.vtg1],
            a_pred=a_pred[g.vtg1]))
    if g.vtg2.size:
        u[g.vtg2] = vtg2_accel(ControlContext(
            v=v[g.vtg2], gap=gap_c[g.vtg2], v_pred=v_pred[g.vtg2],
            a_pred=a_pred[g.vtg2]))
    if g.cs.size:
        u[g.cs] = cs_accel(ControlContext(
            v=v[g.cs], gap=gap_c[g.cs], v_pred=v_pred[g.cs], a_pred=a_pred[g.cs],
            leader_dx=(x[g.cs_leader] - x[g.cs]) % ring,
            v_leader=v[g.cs_leader], a_leader=a[g.cs_leader],
            leader_hops=g.cs_hops))
    if g.bs.size:
        u[g.bs] = bdbm_accel(ControlContext(
            v=v[g.bs], gap=gap_c[g.bs], v_pred=v_pred[g.bs], a_pred=a_pred[g.bs],
            follower_gap=gap_c[g.bs_rear_follower]))

    bad = np.flatnonzero(~np.isfinite(u))
    if bad.size:
        i = int(bad[0])
        raise SimulationError(
            f"non-finite desired acceleration for vehicle {i}: "
            f"v={v[i]!r} gap={gap_c[i]!r} v_pred={v_pred[i]!r} a_pred={a_pred[i]!r}")

    a_cmd = np.clip(u, config.a_min, config.a_max)
    v_new = np.clip(v + a_cmd * config.dt, 0.0, config.v_max)
    x_new = (x + 0.5 * (v + v_new) * config.dt) % ring
    a_eff = (v_new - v) / config.dt
    return x_new, v_new, a_eff, viol, gap[viol]


def step(state: RingState, config: SimConfig) -> tuple[RingState, list[Violation]]:
    """Advance one step; mainly for tests, run_state drives the same kernel."""
    groups = _build_groups(state.assignments, state.n)
    x, v, a, vi, vg = _advance(state.x, state.v, state.a, config, groups)
    new = RingState(x=x, v=v, a=a, labels=state.labels, platoons=state.platoons,
                    assignments=state.assignments)
    return new, [Violation(0.0, int(i), float(g)) for i, g in zip(vi, vg)]


def run_state(state: RingState, config: SimConfig) -> TrajectoryLog:
    """Integrate a prepared state and record post-warmup samples."""
    steps = round(config.duration / config.dt)
    warmup_steps = round(config.warmup / config.dt)
    sample_steps = range(warmup_steps, steps, config.record_every)
    m = len(sample_steps)
    n = state.n
    times = np.empty(m)
    xs = np.empty((m, n))
    vs = np.empty((m, n))
    accs = np.empty((m, n))
    violations: list[Violation] = []

    groups = _build_groups(state.assignments, n)
    x, v, a = state.x.copy(), state.v.copy(), state.a.copy()
    row = 0
    for k in range(steps):
        if k >= warmup_steps and (k - warmup_steps) % config.record_every == 0:
            times[row] = k * config.dt
            xs[row] = x
            vs[row] = v
            accs[row] = a
            row += 1
        x, v, a, vi, vg = _advance(x, v, a, config, groups)
        if vi.size:
            t = k * config.dt
            violations.extend(Violation(t, int(i), float(gp))
                              for i, gp in zip(vi, vg))
    assert row == m
    return TrajectoryLog(config=config, times=times, x=xs, v=vs, a=accs,
                         violations=violations, labels=state.labels,
                         platoons=state.platoons, assignments=state.assignments)


def run(config: SimConfig) -> TrajectoryLog:
    return run_state(init_state(config), config)


def safety_scan(log: TrajectoryLog) -> SafetySummary:
    if not log.violations:
        return SafetySummary(0, None, None)
    return SafetySummary(len(log.violations),
                         min(v.t for v in log.violations),
                         min(v.gap for v in log.violations))
