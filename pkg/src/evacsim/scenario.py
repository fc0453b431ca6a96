"""Lattice world: cell grid, scenario file parsing, neighborhood enumeration.

Grids are row-major numpy arrays indexed ``[y, x]``; positions at the API
surface are ``(x, y)`` tuples with the origin at the top-left corner.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

WALL, FLOOR, EXIT = 0, 1, 2

_CHAR_KIND = {"W": WALL, ".": FLOOR, "E": EXIT, "a": FLOOR}
_KIND_CHAR = {WALL: "W", FLOOR: ".", EXIT: "E"}

SQRT2 = math.sqrt(2.0)

_MOORE_OFFSETS = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))


class ParseError(ValueError):
    """Scenario text rejected; carries the offending line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


@dataclass(frozen=True, eq=False)
class Grid:
    """Immutable cell lattice.

    ``kind`` holds WALL/FLOOR/EXIT codes, ``exit_id`` the exit-group index for
    EXIT cells and -1 elsewhere. Exit groups are Moore-connected components of
    exit cells, numbered in row-major scan order of their first cell.
    """

    kind: np.ndarray
    exit_id: np.ndarray
    n_exits: int

    @property
    def width(self) -> int:
        return self.kind.shape[1]

    @property
    def height(self) -> int:
        return self.kind.shape[0]

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def is_wall(self, x: int, y: int) -> bool:
        return self.kind[y, x] == WALL

    def is_exit(self, x: int, y: int) -> bool:
        return self.kind[y, x] == EXIT

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return np.array_equal(self.kind, other.kind) and np.array_equal(
            self.exit_id, other.exit_id
        )

    @classmethod
    def from_kind(cls, kind: np.ndarray) -> "Grid":
        kind = np.ascontiguousarray(kind, dtype=np.int8)
        exit_id, n_exits = _label_exit_groups(kind)
        kind.setflags(write=False)
        exit_id.setflags(write=False)
        return cls(kind=kind, exit_id=exit_id, n_exits=n_exits)


def _label_exit_groups(kind: np.ndarray) -> tuple[np.ndarray, int]:
    """Label Moore-connected components of exit cells in scan order."""
    h, w = kind.shape
    exit_id = np.full((h, w), -1, dtype=np.int16)
    next_id = 0
    for y in range(h):
        for x in range(w):
            if kind[y, x] != EXIT or exit_id[y, x] != -1:
                continue
            stack = [(x, y)]
            exit_id[y, x] = next_id
            while stack:
                cx, cy = stack.pop()
                for dx, dy in _MOORE_OFFSETS:
                    nx, ny = cx + dx, cy + dy
                    if 0 <= nx < w and 0 <= ny < h:
                        if kind[ny, nx] == EXIT and exit_id[ny, nx] == -1:
                            exit_id[ny, nx] = next_id
                            stack.append((nx, ny))
            next_id += 1
    return exit_id, next_id


@dataclass(frozen=True)
class AgentProfile:
    """Per-agent movement parameters and coupling strengths.

    ``allowed_exits`` is a sorted tuple of exit-group ids, or None for all.
    """

    v_max: int = 3
    k_s: float = 1.0
    k_d: float = 0.0
    k_i: float = 0.0
    k_w: float = 0.0
    k_p: float = 0.0
    k_e: float = 0.0
    allowed_exits: tuple[int, ...] | None = None

    def validate(self) -> None:
        if not isinstance(self.v_max, int) or self.v_max < 1:
            raise ValueError(f"v_max must be an integer >= 1, got {self.v_max!r}")
        for name in ("k_s", "k_i", "k_w", "k_p", "k_e"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
        if not math.isfinite(self.k_d):
            raise ValueError(f"k_d must be finite, got {self.k_d!r}")
        if self.allowed_exits is not None and len(self.allowed_exits) == 0:
            raise ValueError("allowed exit list must not be empty")


DEFAULT_PROFILE = AgentProfile()


@dataclass(frozen=True)
class Spawn:
    x: int
    y: int
    profile: str


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    """Validated scenario: grid, named agent profiles, spawn points."""

    grid: Grid
    profiles: dict[str, AgentProfile]
    spawns: tuple[Spawn, ...]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScenarioSpec):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.profiles == other.profiles
            and self.spawns == other.spawns
        )


@dataclass(frozen=True)
class SimConfig:
    """Global run parameters: trace decay/diffusion, wall cutoff, round cap, seed."""

    delta: float = 0.2
    alpha: float = 0.2
    w_max: float = 3.0
    max_rounds: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must be in [0, 1], got {self.delta}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not math.isfinite(self.w_max) or self.w_max < 0:
            raise ValueError(f"w_max must be finite and >= 0, got {self.w_max}")
        if self.max_rounds < 1:
            raise ValueError(f"max_rounds must be >= 1, got {self.max_rounds}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


_PROFILE_KEYS = {
    "v_max": "v_max",
    "k_S": "k_s",
    "k_D": "k_d",
    "k_I": "k_i",
    "k_W": "k_w",
    "k_P": "k_p",
    "k_E": "k_e",
}

_AGENT_RE = re.compile(r"^agent\s+(-?\d+)\s+(-?\d+)\s+(\S+)\s*$")


def parse_scenario(text: str) -> ScenarioSpec:
    """Parse and validate a scenario file.

    Format: '%' starts a comment line; the leading block of non-directive
    lines are grid rows of equal length over 'W' (wall), '.' (floor),
    'E' (exit) and 'a' (floor carrying a default-profile spawn). After the
    grid, optional directives:

        profile <name> v_max=<int> k_S=<f> k_D=<f> k_I=<f> k_W=<f> k_P=<f> k_E=<f> exits=<ids|all>
        agent <x> <y> <profile>

    Raises ParseError on ragged rows, unknown characters, an open boundary,
    a missing exit or floor cell, or invalid spawns/profiles.
    """
    rows: list[tuple[int, str]] = []
    profile_lines: list[tuple[int, str]] = []
    agent_lines: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("profile ") or line == "profile":
            profile_lines.append((lineno, line))
        elif line.startswith("agent ") or line == "agent":
            agent_lines.append((lineno, line))
        else:
            if profile_lines or agent_lines:
                raise ParseError("grid row after profile/agent directives", lineno)
            rows.append((lineno, line))

    if not rows:
        raise ParseError("scenario contains no grid rows")
    width = len(rows[0][1])
    for lineno, row in rows:
        if len(row) != width:
            raise ParseError(
                f"ragged grid row: expected {width} cells, got {len(row)}", lineno
            )
        for col, ch in enumerate(row, start=1):
            if ch not in _CHAR_KIND:
                raise ParseError(f"unknown cell character {ch!r}", lineno, col)

    height = len(rows)
    kind = np.empty((height, width), dtype=np.int8)
    char_spawns: list[tuple[int, int, int]] = []  # (x, y, lineno)
    for y, (lineno, row) in enumerate(rows):
        for x, ch in enumerate(row):
            kind[y, x] = _CHAR_KIND[ch]
            if ch == "a":
                char_spawns.append((x, y, lineno))

    for y in range(height):
        for x in range(width):
            on_edge = x == 0 or y == 0 or x == width - 1 or y == height - 1
            if on_edge and kind[y, x] == FLOOR:
                raise ParseError("open boundary: edge cell must be wall or exit", rows[y][0], x + 1)
    if not (kind == EXIT).any():
        raise ParseError("scenario has no exit cell")
    if not (kind == FLOOR).any():
        raise ParseError("no floor cell, agents cannot exist")

    grid = Grid.from_kind(kind)

    profiles: dict[str, AgentProfile] = {"default": DEFAULT_PROFILE}
    for lineno, line in profile_lines:
        name, profile = _parse_profile_line(line, lineno, grid.n_exits)
        if name != "default" and name in profiles:
            raise ParseError(f"duplicate profile {name!r}", lineno)
        profiles[name] = profile

    spawns: list[Spawn] = []
    seen: dict[tuple[int, int], int] = {}
    for x, y, lineno in char_spawns:
        seen[(x, y)] = lineno
        spawns.append(Spawn(x, y, "default"))
    for lineno, line in agent_lines:
        m = _AGENT_RE.match(line)
        if not m:
            raise ParseError("malformed agent line, expected 'agent <x> <y> <profile>'", lineno)
        x, y, pname = int(m.group(1)), int(m.group(2)), m.group(3)
        if not grid.in_bounds(x, y):
            raise ParseError(f"spawn ({x}, {y}) outside the grid", lineno)
        if pname not in profiles:
            raise ParseError(f"unknown profile {pname!r}", lineno)
        if (x, y) in seen:
            raise ParseError(f"duplicate spawn at ({x}, {y})", lineno)
        seen[(x, y)] = lineno
        spawns.append(Spawn(x, y, pname))
    for spawn in spawns:
        if kind[spawn.y, spawn.x] != FLOOR:
            raise ParseError(
                f"spawn at ({spawn.x}, {spawn.y}) is not on a floor cell",
                seen[(spawn.x, spawn.y)],
            )

    spawns.sort(key=lambda s: (s.y, s.x))
    return ScenarioSpec(grid=grid, profiles=profiles, spawns=tuple(spawns))


def _parse_profile_line(line: str, lineno: int, n_exits: int) -> tuple[str, AgentProfile]:
    parts = line.split()
    if len(parts) < 2:
        raise ParseError("malformed profile line, missing name", lineno)
    name = parts[1]
    profile = DEFAULT_PROFILE
    for item in parts[2:]:
        key, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"malformed profile field {item!r}", lineno)
        try:
            if key == "exits":
                if value == "all":
                    profile = replace(profile, allowed_exits=None)
                else:
                    ids = tuple(sorted(int(v) for v in value.split(",") if v != ""))
                    if not ids:
                        raise ValueError("empty exit list")
                    for eid in ids:
                        if not 0 <= eid < n_exits:
                            raise ValueError(f"exit id {eid} does not exist")
                    profile = replace(profile, allowed_exits=ids)
            elif key == "v_max":
                profile = replace(profile, v_max=int(value))
            elif key in _PROFILE_KEYS:
                profile = replace(profile, **{_PROFILE_KEYS[key]: float(value)})
            else:
                raise ValueError(f"unknown profile key {key!r}")
        except ValueError as exc:
            raise ParseError(f"invalid profile field {item!r}: {exc}", lineno) from None
    try:
        profile.validate()
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None
    return name, profile


def render_scenario(spec: ScenarioSpec) -> str:
    """Render a spec back to scenario text; inverse of parse_scenario."""
    grid = spec.grid
    chars = [[_KIND_CHAR[int(grid.kind[y, x])] for x in range(grid.width)] for y in range(grid.height)]
    directives = []
    for spawn in spec.spawns:
        if spawn.profile == "default":
            chars[spawn.y][spawn.x] = "a"
        else:
            directives.append(f"agent {spawn.x} {spawn.y} {spawn.profile}")
    lines = ["".join(row) for row in chars]
    for name, p in spec.profiles.items():
        if name == "default" and p == DEFAULT_PROFILE:
            continue
        exits = "all" if p.allowed_exits is None else ",".join(str(e) for e in p.allowed_exits)
        lines.append(
            f"profile {name} v_max={p.v_max} k_S={p.k_s} k_D={p.k_d} k_I={p.k_i}"
            f" k_W={p.k_w} k_P={p.k_p} k_E={p.k_e} exits={exits}"
        )
    lines.extend(directives)
    return "\n".join(lines) + "\n"


def moore_neighbors(p: tuple[int, int], grid: Grid) -> list[tuple[int, int]]:
    """All in-grid cells at Chebyshev distance 1 from p."""
    x, y = p
    return [
        (x + dx, y + dy)
        for dx, dy in _MOORE_OFFSETS
        if grid.in_bounds(x + dx, y + dy)
    ]


@lru_cache(maxsize=None)
def disc_offsets(v_max: int) -> np.ndarray:
    """Lattice offsets within Euclidean distance v_max of the origin, (k, 2) array."""
    r = int(math.floor(v_max))
    offs = [
        (dx, dy)
        for dy in range(-r, r + 1)
        for dx in range(-r, r + 1)
        if dx * dx + dy * dy <= v_max * v_max
    ]
    arr = np.array(offs, dtype=np.int64)
    arr.setflags(write=False)
    return arr


def neighborhood(p: tuple[int, int], v_max: int, grid: Grid) -> np.ndarray:
    """In-grid non-wall cells within Euclidean distance v_max of p, incl. p.

    Returns an (m, 2) array of (x, y) positions.
    """
    cells = np.asarray(p, dtype=np.int64) + disc_offsets(v_max)
    ok = (
        (cells[:, 0] >= 0)
        & (cells[:, 0] < grid.width)
        & (cells[:, 1] >= 0)
        & (cells[:, 1] < grid.height)
    )
    cells = cells[ok]
    ok = grid.kind[cells[:, 1], cells[:, 0]] != WALL
    return cells[ok]


def moore_steps(grid: Grid, x: int, y: int):
    """Yield (nx, ny, cost) for permitted single steps out of (x, y).

    A step targets an in-grid non-wall Moore neighbor; cost is 1 for
    orthogonal and sqrt(2) for diagonal steps. A diagonal step is forbidden
    when both of its orthogonal corner cells are walls (no squeezing through
    a closed corner). The same step rule defines the distance-field graph.
    """
    kind = grid.kind
    w, h = grid.width, grid.height
    for dx, dy in _MOORE_OFFSETS:
        nx, ny = x + dx, y + dy
        if not (0 <= nx < w and 0 <= ny < h):
            continue
        if kind[ny, nx] == WALL:
            continue
        if dx != 0 and dy != 0:
            if kind[y, nx] == WALL and kind[ny, x] == WALL:
                continue
            yield nx, ny, SQRT2
        else:
            yield nx, ny, 1.0
