"""Round loop: decisions, movement, trace update, exit removal, bookkeeping.

Randomness discipline: every random draw comes from a stream derived from
(master seed, round, entity, purpose), so the agent-parallel decision phase
is order-independent and a run is exactly reproducible from its seed. One
round models one second; one cell edge is 0.4 m.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import math

import numpy as np

from .decision import (
    Agent,
    SimulationError,
    WorldView,
    choose_destination,
    choose_exit,
    crowd_counts,
)
from .dynamic_field import DynamicField
from .movement import execute_round
from .scenario import Grid, ScenarioSpec, SimConfig
from .static_field import (
    StaticField,
    WallDistanceField,
    compute_static_field,
    compute_wall_distance,
)

CELL_SIZE_M = 0.4
ROUND_SECONDS = 1.0

# purpose tags for derive_stream
PURPOSE_EXIT = 0
PURPOSE_DESTINATION = 1
PURPOSE_MOVEMENT = 2
PURPOSE_FIELD = 3
PURPOSE_CELL = 4


def derive_stream(
    master_seed: int, round_idx: int, entity: int, purpose: int
) -> np.random.Generator:
    """Independent deterministic substream for one (round, entity, purpose)."""
    return np.random.default_rng(
        np.random.SeedSequence([master_seed, round_idx, entity, purpose])
    )


@dataclass
class SimState:
    """Everything a run mutates round to round."""

    grid: Grid
    config: SimConfig
    agents: list[Agent]
    static_fields: dict[int, StaticField]
    wall_field: WallDistanceField
    dyn_field: DynamicField
    occupancy: np.ndarray
    counts: np.ndarray
    t: int = 0
    trajectory: list[tuple[int, int, int, int]] = field(default_factory=list)
    density: np.ndarray | None = None
    step_log: list[tuple[int, int, int, int, int, int, int]] = field(default_factory=list)
    alive_counts: list[int] = field(default_factory=list)
    exit_rounds: dict[int, int] = field(default_factory=dict)

    def alive_agents(self) -> list[Agent]:
        return [a for a in self.agents if a.alive]


@dataclass
class SimResult:
    """Observables of one finished run."""

    evacuation_rounds: int | None
    agents_total: int
    seed: int
    alive_counts: list[int]
    exit_rounds: dict[int, int]
    trajectory: list[tuple[int, int, int, int]]
    density: np.ndarray
    step_log: list[tuple[int, int, int, int, int, int, int]]
    grid: Grid

    @property
    def evacuation_seconds(self) -> float | None:
        if self.evacuation_rounds is None:
            return None
        return self.evacuation_rounds * ROUND_SECONDS


def init_state(spec: ScenarioSpec, config: SimConfig) -> SimState:
    """Precompute fields, spawn agents, and validate exit reachability."""
    grid = spec.grid
    static_fields = {
        eid: compute_static_field(grid, eid) for eid in range(grid.n_exits)
    }
    wall_field = compute_wall_distance(grid, config.w_max)

    agents: list[Agent] = []
    for i, spawn in enumerate(spec.spawns):
        p = spec.profiles[spawn.profile]
        allowed = (
            frozenset(range(grid.n_exits))
            if p.allowed_exits is None
            else frozenset(p.allowed_exits)
        )
        agents.append(
            Agent(
                id=i,
                pos=(spawn.x, spawn.y),
                v_max=p.v_max,
                k_s=p.k_s,
                k_d=p.k_d,
                k_i=p.k_i,
                k_w=p.k_w,
                k_p=p.k_p,
                k_e=p.k_e,
                allowed_exits=allowed,
            )
        )
    for a in agents:
        x, y = a.pos
        if not any(
            math.isfinite(static_fields[e].dist[y, x]) for e in a.allowed_exits
        ):
            raise SimulationError(
                f"agent {a.id} at ({x}, {y}) cannot reach any of its allowed exits"
            )

    occupancy = np.zeros((grid.height, grid.width), dtype=bool)
    for a in agents:
        occupancy[a.pos[1], a.pos[0]] = True

    state = SimState(
        grid=grid,
        config=config,
        agents=agents,
        static_fields=static_fields,
        wall_field=wall_field,
        dyn_field=DynamicField(grid),
        occupancy=occupancy,
        counts=crowd_counts(occupancy),
        density=np.zeros((grid.height, grid.width), dtype=np.int64),
    )
    for a in agents:
        state.trajectory.append((0, a.id, a.pos[0], a.pos[1]))
        state.density[a.pos[1], a.pos[0]] += 1
    state.alive_counts.append(len(agents))
    return state


def run_round(state: SimState) -> None:
    """Advance one round; see the module docstring for the phase order."""
    cfg = state.config
    seed = cfg.seed
    t = state.t
    alive = state.alive_agents()

    for a in alive:
        choose_exit(a, state.static_fields, derive_stream(seed, t, a.id, PURPOSE_EXIT))

    world = WorldView(
        grid=state.grid,
        static_fields=state.static_fields,
        wall_field=state.wall_field,
        dyn_field=state.dyn_field,
        counts=state.counts,
        occupancy=state.occupancy,
        w_max=cfg.w_max,
    )
    destinations = {
        a.id: choose_destination(a, world, derive_stream(seed, t, a.id, PURPOSE_DESTINATION))
        for a in alive
    }

    starts = {a.id: a.pos for a in alive}
    execution = execute_round(alive, destinations, state.grid, derive_stream(seed, t, 0, PURPOSE_MOVEMENT))

    state.dyn_field.record_moves(execution.net_moves)
    state.dyn_field.decay_and_diffuse(cfg.delta, cfg.alpha, derive_stream(seed, t, 0, PURPOSE_FIELD))

    round_no = t + 1
    for i, (aid, fx, fy, tx, ty) in enumerate(execution.steps):
        state.step_log.append((round_no, i, aid, fx, fy, tx, ty))
    for a in alive:
        sx, sy = starts[a.id]
        a.last_disp = (a.pos[0] - sx, a.pos[1] - sy)
        state.trajectory.append((round_no, a.id, a.pos[0], a.pos[1]))
        state.density[a.pos[1], a.pos[0]] += 1

    for a in alive:
        if a.alive and state.grid.is_exit(a.pos[0], a.pos[1]):
            a.alive = False
            state.exit_rounds[a.id] = round_no

    state.occupancy = np.zeros_like(state.occupancy)
    remaining = state.alive_agents()
    positions = {a.pos for a in remaining}
    assert len(positions) == len(remaining), "two agents on one cell at round end"
    for a in remaining:
        state.occupancy[a.pos[1], a.pos[0]] = True
    state.counts = crowd_counts(state.occupancy)
    state.alive_counts.append(len(remaining))
    state.t = round_no


def run_simulation(spec: ScenarioSpec, config: SimConfig) -> SimResult:
    """Run rounds until everyone evacuated or max_rounds is hit."""
    state = init_state(spec, config)
    while state.alive_agents() and state.t < config.max_rounds:
        run_round(state)
    evacuated = not state.alive_agents()
    return SimResult(
        evacuation_rounds=state.t if evacuated else None,
        agents_total=len(state.agents),
        seed=config.seed,
        alive_counts=state.alive_counts,
        exit_rounds=state.exit_rounds,
        trajectory=state.trajectory,
        density=state.density,
        step_log=state.step_log,
        grid=state.grid,
    )
