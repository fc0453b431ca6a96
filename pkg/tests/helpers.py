"""Shared test oracles and scenario builders.

The distance oracle here is intentionally naive (fixpoint relaxation over the
whole grid) so it shares no code with the package's priority-queue search.
"""

from __future__ import annotations

import math

import numpy as np

WALL, FLOOR, EXIT = 0, 1, 2
SQRT2 = math.sqrt(2.0)


def relaxation_distances(kind: np.ndarray, sources: list[tuple[int, int]]) -> np.ndarray:
    """Shortest Moore-graph distances by repeated relaxation to fixpoint.

    Steps cost 1 orthogonally, sqrt(2) diagonally; a diagonal step is
    forbidden when both of its orthogonal corner cells are walls. Walls and
    unreachable cells stay at +inf.
    """
    h, w = kind.shape
    dist = np.full((h, w), np.inf)
    for x, y in sources:
        dist[y, x] = 0.0
    changed = True
    while changed:
        changed = False
        for y in range(h):
            for x in range(w):
                if kind[y, x] == WALL:
                    continue
                best = dist[y, x]
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        if dx == 0 and dy == 0:
                            continue
                        ny, nx = y + dy, x + dx
                        if not (0 <= nx < w and 0 <= ny < h):
                            continue
                        if kind[ny, nx] == WALL:
                            continue
                        if dx != 0 and dy != 0:
                            if kind[y, nx] == WALL and kind[ny, x] == WALL:
                                continue
                            cost = SQRT2
                        else:
                            cost = 1.0
                        if dist[ny, nx] + cost < best:
                            best = dist[ny, nx] + cost
                if best < dist[y, x] - 1e-15:
                    dist[y, x] = best
                    changed = True
    return dist


def random_kind(rng: np.random.Generator, max_side: int = 12) -> np.ndarray:
    """Random closed grid with interior walls and at least one exit and floor."""
    while True:
        w = int(rng.integers(4, max_side + 1))
        h = int(rng.integers(4, max_side + 1))
        kind = np.full((h, w), FLOOR, dtype=np.int8)
        kind[0, :] = kind[-1, :] = WALL
        kind[:, 0] = kind[:, -1] = WALL
        interior = rng.random((h - 2, w - 2)) < 0.2
        kind[1:-1, 1:-1][interior] = WALL
        floors = np.argwhere(kind == FLOOR)
        if len(floors) == 0:
            continue
        n_exits = int(rng.integers(1, 3))
        picks = rng.choice(len(floors), size=min(n_exits, len(floors)), replace=False)
        for i in picks:
            y, x = floors[i]
            kind[y, x] = EXIT
        if (kind == FLOOR).any():
            return kind


def rows_to_text(rows: list[str], directives: list[str] | None = None) -> str:
    return "\n".join(rows + (directives or [])) + "\n"


def kind_from_rows(rows: list[str]) -> np.ndarray:
    table = {"W": WALL, ".": FLOOR, "E": EXIT}
    return np.array([[table[ch] for ch in row] for row in rows], dtype=np.int8)


def make_agent(agent_id, pos, v_max=3, **couplings):
    """Agent with all couplings zero unless overridden."""
    from evacsim.decision import Agent

    kw = dict(k_s=0.0, k_d=0.0, k_i=0.0, k_w=0.0, k_p=0.0, k_e=0.0)
    kw.update(couplings)
    return Agent(id=agent_id, pos=pos, v_max=v_max, allowed_exits=frozenset({0}), **kw)


def open_room_rows(width: int, height: int, exits: list[tuple[int, int]]) -> list[str]:
    """Closed rectangle of floor with exit cells at the given positions."""
    grid = [["." for _ in range(width)] for _ in range(height)]
    for x in range(width):
        grid[0][x] = grid[height - 1][x] = "W"
    for y in range(height):
        grid[y][0] = grid[y][width - 1] = "W"
    for x, y in exits:
        grid[y][x] = "E"
    return ["".join(row) for row in grid]
