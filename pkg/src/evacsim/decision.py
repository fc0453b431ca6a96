"""Probabilistic decision levels: per-round exit choice and destination choice.

Destination probabilities combine five influences (distance to exit, trace
field, inertia, wall clearance, neighbor crowding) as a product of
exponential factors. All factors are evaluated in log space and normalized
with max-subtraction before exponentiation, so large couplings or trace
values cannot overflow; the normalization constant cancels exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamic_field import DynamicField
from .scenario import WALL, Grid, neighborhood
from .static_field import StaticField, WallDistanceField


class SimulationError(RuntimeError):
    """Raised when a run reaches a state the scenario validation should exclude."""


@dataclass
class Agent:
    """One simulated pedestrian. Position and choice state mutate during a run."""

    id: int
    pos: tuple[int, int]
    v_max: int
    k_s: float
    k_d: float
    k_i: float
    k_w: float
    k_p: float
    k_e: float
    allowed_exits: frozenset[int]
    chosen_exit: int | None = None
    last_disp: tuple[int, int] = (0, 0)
    alive: bool = True


@dataclass(frozen=True)
class WorldView:
    """Frozen start-of-round snapshot read by the decision phase."""

    grid: Grid
    static_fields: dict[int, StaticField]
    wall_field: WallDistanceField
    dyn_field: DynamicField
    counts: np.ndarray
    occupancy: np.ndarray
    w_max: float


@dataclass
class DestinationDistribution:
    """Candidate cells (m, 2) with their normalized probabilities (m,)."""

    cells: np.ndarray
    probs: np.ndarray


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Draw an index from a normalized probability vector by inverse CDF."""
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    return min(idx, len(probs) - 1)


def softmax_from_log(logw: np.ndarray) -> np.ndarray:
    """exp-normalize log weights; invariant under adding any constant."""
    top = np.max(logw)
    w = np.exp(logw - top)
    return w / w.sum()


def exit_weights(agent: Agent, static_fields: dict[int, StaticField]) -> tuple[list[int], np.ndarray]:
    """Unnormalized exit-choice weights (1 + persistence bonus) / distance^2.

    The distance is clamped below at one cell; unreachable exits weigh zero.
    """
    ids = sorted(agent.allowed_exits)
    x, y = agent.pos
    weights = np.zeros(len(ids))
    for i, eid in enumerate(ids):
        s = static_fields[eid].dist[y, x]
        if not math.isfinite(s):
            continue
        bonus = agent.k_e if eid == agent.chosen_exit else 0.0
        weights[i] = (1.0 + bonus) / max(s, 1.0) ** 2
    return ids, weights


def choose_exit(agent: Agent, static_fields: dict[int, StaticField], rng: np.random.Generator) -> int:
    """Sample this round's exit and store it on the agent."""
    ids, weights = exit_weights(agent, static_fields)
    total = weights.sum()
    if total <= 0.0:
        raise SimulationError(f"agent {agent.id} cannot reach any allowed exit from {agent.pos}")
    chosen = ids[sample_index(weights / total, rng)]
    agent.chosen_exit = chosen
    return chosen


def crowd_counts(occupancy: np.ndarray) -> np.ndarray:
    """Occupied-cell count over each cell's 8 Moore neighbors (center excluded)."""
    p = np.pad(occupancy.astype(np.int32), 1)
    return (
        p[:-2, :-2] + p[:-2, 1:-1] + p[:-2, 2:]
        + p[1:-1, :-2] + p[1:-1, 2:]
        + p[2:, :-2] + p[2:, 1:-1] + p[2:, 2:]
    )


def candidate_cells(agent: Agent, grid: Grid, occupancy: np.ndarray) -> np.ndarray:
    """Reachable-this-round cells minus those occupied by other agents.

    The agent's own cell is always a candidate (standing still is legal).
    Returns an (m, 2) array of (x, y) positions.
    """
    cells = neighborhood(agent.pos, agent.v_max, grid)
    occupied = occupancy[cells[:, 1], cells[:, 0]]
    own = (cells[:, 0] == agent.pos[0]) & (cells[:, 1] == agent.pos[1])
    return cells[~occupied | own]


def logw_static(agent: Agent, cell: tuple[int, int], sf: StaticField) -> float:
    """-k_S * S at the candidate cell."""
    return -agent.k_s * sf.dist[cell[1], cell[0]]


def logw_dynamic(agent: Agent, cell: tuple[int, int], df: DynamicField) -> float:
    """k_D * (trace at the candidate) . (candidate offset from the agent's cell)."""
    dx, dy = df.field_at(cell)
    return agent.k_d * (dx * (cell[0] - agent.pos[0]) + dy * (cell[1] - agent.pos[1]))

def logw_inertia(agent: Agent, cell: tuple[int, int]) -> float:
    """-k_I * (v_next + v_prev) * sin(|phi|/2), phi the turn angle; 0 when standing."""
    ux, uy = agent.last_disp
    vx, vy = cell[0] - agent.pos[0], cell[1] - agent.pos[1]
    v_prev = math.hypot(ux, uy)
    v_next = math.hypot(vx, vy)
    if v_prev == 0.0 or v_next == 0.0:
        return 0.0
    cos_phi = max(-1.0, min(1.0, (ux * vx + uy * vy) / (v_prev * v_next)))
    sin_half = math.sqrt((1.0 - cos_phi) / 2.0)
    return -agent.k_i * (v_next + v_prev) * sin_half


def logw_wall(cell: tuple[int, int], wf: WallDistanceField, k_w: float, w_max: float) -> float:
    """-k_W * (w_max - W) inside the wall zone; 0 once W >= w_max."""
    w = wf.wdist[cell[1], cell[0]]
    if w >= w_max:
        return 0.0
    return -k_w * (w_max - w)


def logw_polite(cell: tuple[int, int], counts: np.ndarray, k_p: float) -> float:
    """-k_P * number of agents adjacent to the candidate cell."""
    return -k_p * counts[cell[1], cell[0]]


def destination_distribution(agent: Agent, world: WorldView) -> DestinationDistribution:
    """Probabilities over the agent's candidate cells from the five influences.

    Vectorized over candidates; equals the sum of the per-cell logw_* terms.
    Candidates whose static distance is unreachable get probability zero.
    """
    cells = candidate_cells(agent, world.grid, world.occupancy)
    xs, ys = cells[:, 0], cells[:, 1]
    ax, ay = agent.pos
    offx = xs - ax
    offy = ys - ay

    s = world.static_fields[agent.chosen_exit].dist[ys, xs]
    reachable = np.isfinite(s)
    logw = np.where(reachable, -agent.k_s * np.where(reachable, s, 0.0), -np.inf)

    logw += agent.k_d * (
        world.dyn_field.dx[ys, xs] * offx + world.dyn_field.dy[ys, xs] * offy
    )

    v_prev = math.hypot(*agent.last_disp)
    if agent.k_i != 0.0 and v_prev > 0.0:
        v_next = np.hypot(offx, offy)
        moving = v_next > 0.0
        dot = agent.last_disp[0] * offx + agent.last_disp[1] * offy
        cos_phi = np.clip(
            np.divide(dot, v_next * v_prev, out=np.zeros_like(v_next), where=moving),
            -1.0,
            1.0,
        )
        sin_half = np.sqrt((1.0 - cos_phi) / 2.0)
        logw -= np.where(moving, agent.k_i * (v_next + v_prev) * sin_half, 0.0)

    w = world.wall_field.wdist[ys, xs]
    logw -= agent.k_w * np.where(w >= world.w_max, 0.0, world.w_max - w)

    logw -= agent.k_p * world.counts[ys, xs]

    if not np.isfinite(logw).any():
        # own cell is always reachable for the chosen exit; defensive fallback
        probs = np.zeros(len(cells))
        own = np.nonzero((xs == ax) & (ys == ay))[0]
        probs[own[0]] = 1.0
        return DestinationDistribution(cells=cells, probs=probs)
    return DestinationDistribution(cells=cells, probs=softmax_from_log(logw))


def choose_destination(agent: Agent, world: WorldView, rng: np.random.Generator) -> tuple[int, int]:
    """Sample the destination cell for this round."""
    dist = destination_distribution(agent, world)
    idx = sample_index(dist.probs, rng)
    return int(dist.cells[idx, 0]), int(dist.cells[idx, 1])
