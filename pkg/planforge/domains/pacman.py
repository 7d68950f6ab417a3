"""
pacman.py

Deterministic Pacman: clear every pellet on a grid without being caught by a ghost.

Grid characters: '#' wall, '.' pellet, 'o' power-up, 'P' Pacman, 'G' ghost, ' ' empty.
Ghosts are numbered in row-major order of their 'G' cells; ghost k follows
``ghost_scripts[k]`` (a list or string of N/E/S/W moves, looped). A ghost whose next
move hits a wall or the border stays in place for that turn; an empty script keeps the
ghost stationary.

One turn (action N, E, S or W) runs these phases in order:
    1. Pacman moves; a wall or the border makes the action inapplicable.
    2. A pellet or power-up on the new cell is consumed; a power-up sets
       power_timer = power_duration.
    3. Every ghost moves by its script.
    4. Collision: a ghost on Pacman's cell, or a ghost that swapped cells with Pacman,
       is banished when power_timer > 0; otherwise Pacman dies (dead-end state).
    5. power_timer decreases by one when positive.

The goal is reached when no pellet is left and Pacman is alive.

State objects handed to heuristics are ``PacmanState`` with attributes ``pacman``
(row, col), ``ghosts`` (tuple of ``Ghost`` with ``ident``, ``pos``, ``script_index``),
``pellets`` and ``powerups`` (frozensets of (row, col)), ``power_timer`` and ``dead``.
``task.parameters`` is a ``PacmanLayout`` with ``rows``, ``cols``, ``walls``,
``scripts`` and ``power_duration``.
"""

from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, List, Mapping, Sequence, Set, Tuple, Union

from pydantic import BaseModel, Field, ValidationError, field_validator

from ..errors import Inapplicable, SchemaViolation
from ..model import (Comparator, Domain, GoalCondition, NumericCondition,
                     PropCondition, State, Transition, Var, parameters_error)

Cell = Tuple[int, int]

DIRECTIONS: Dict[str, Cell] = {
    "N": (-1, 0),
    "E": (0, 1),
    "S": (1, 0),
    "W": (0, -1),
}


class PacmanParameters(BaseModel):
    """Raw parameters block: {grid, ghost_scripts, power_duration}."""
    grid: List[str] = Field(..., min_length=1)
    ghost_scripts: List[Union[str, List[str]]] = Field(default_factory=list)
    power_duration: int = Field(10, ge=1)

    @field_validator('grid')
    @classmethod
    def validate_grid(cls, v):
        width = len(v[0])
        if width == 0 or any(len(row) != width for row in v):
            raise ValueError("grid rows must be non-empty and of equal length")
        allowed = set("#.oPG ")
        for row in v:
            bad = set(row) - allowed
            if bad:
                raise ValueError(f"unknown grid characters: {''.join(sorted(bad))}")
        if sum(row.count("P") for row in v) != 1:
            raise ValueError("grid must contain exactly one 'P'")
        return v

    @field_validator('ghost_scripts')
    @classmethod
    def validate_scripts(cls, v):
        for script in v:
            if any(step not in DIRECTIONS for step in script):
                raise ValueError("ghost scripts may only contain N, E, S, W")
        return v


@dataclass(frozen=True)
class PacmanLayout:
    """The static part of an instance."""
    rows: int
    cols: int
    walls: FrozenSet[Cell]
    scripts: Tuple[Tuple[str, ...], ...]
    power_duration: int
    start: "PacmanState"

    def open_cell(self, cell: Cell) -> bool:
        r, c = cell
        return 0 <= r < self.rows and 0 <= c < self.cols and cell not in self.walls


@dataclass(frozen=True)
class Ghost:
    ident: int
    pos: Cell
    script_index: int = 0


@dataclass(frozen=True)
class PacmanState(State):
    pacman: Cell
    ghosts: Tuple[Ghost, ...]
    pellets: FrozenSet[Cell]
    powerups: FrozenSet[Cell]
    power_timer: int = 0
    dead: bool = False

    def fluents(self) -> Dict[str, Any]:
        return {
            "pacman_row": self.pacman[0],
            "pacman_col": self.pacman[1],
            "pellets_remaining": len(self.pellets),
            "powerups_remaining": len(self.powerups),
            "ghosts_remaining": len(self.ghosts),
            "power_timer": self.power_timer,
            "dead": self.dead,
        }

    def to_json(self) -> Dict[str, Any]:
        return {
            "pacman": list(self.pacman),
            "ghosts": [{"id": g.ident, "pos": list(g.pos), "script_index": g.script_index}
                       for g in self.ghosts],
            "pellets": sorted(list(p) for p in self.pellets),
            "powerups": sorted(list(p) for p in self.powerups),
            "power_timer": self.power_timer,
            "dead": self.dead,
        }


def _shift(cell: Cell, direction: str) -> Cell:
    dr, dc = DIRECTIONS[direction]
    return cell[0] + dr, cell[1] + dc


def _move_ghost(layout: PacmanLayout, ghost: Ghost) -> Ghost:
    script = layout.scripts[ghost.ident] if ghost.ident < len(layout.scripts) else ()
    if not script:
        return ghost
    target = _shift(ghost.pos, script[ghost.script_index])
    pos = target if layout.open_cell(target) else ghost.pos
    return Ghost(ghost.ident, pos, (ghost.script_index + 1) % len(script))


def pacman_step(layout: PacmanLayout, state: PacmanState, direction: str) -> PacmanState:
    """
    Apply one turn.

    Raises:
        Inapplicable: If the target cell is a wall, outside the grid, or Pacman is dead.
    """
    if state.dead:
        raise Inapplicable("pacman is dead")
    if direction not in DIRECTIONS:
        raise Inapplicable(f"unknown direction {direction!r}")
    old = state.pacman
    new = _shift(old, direction)
    if not layout.open_cell(new):
        raise Inapplicable(f"{direction} from {old} hits a wall")

    pellets, powerups, timer = state.pellets, state.powerups, state.power_timer
    if new in pellets:
        pellets = pellets - {new}
    if new in powerups:
        powerups = powerups - {new}
        timer = layout.power_duration

    survivors = []
    dead = False
    for ghost in state.ghosts:
        moved = _move_ghost(layout, ghost)
        caught = moved.pos == new or (moved.pos == old and ghost.pos == new)
        if not caught:
            survivors.append(moved)
        elif timer > 0:
            continue
        else:
            survivors.append(moved)
            dead = True

    if timer > 0:
        timer -= 1

    return PacmanState(new, tuple(survivors), pellets, powerups, timer, dead)


class PacmanDomain(Domain):
    name = "pacman"
    state_type = PacmanState

    def parse_parameters(self, params: Mapping[str, Any]) -> PacmanLayout:
        try:
            raw = PacmanParameters.model_validate(dict(params))
        except ValidationError as e:
            raise parameters_error(e) from e

        walls, pellets, powerups, ghosts = set(), set(), set(), []
        pacman = (0, 0)
        for r, row in enumerate(raw.grid):
            for c, ch in enumerate(row):
                if ch == "#":
                    walls.add((r, c))
                elif ch == ".":
                    pellets.add((r, c))
                elif ch == "o":
                    powerups.add((r, c))
                elif ch == "P":
                    pacman = (r, c)
                elif ch == "G":
                    ghosts.append(Ghost(len(ghosts), (r, c), 0))

        if len(raw.ghost_scripts) > len(ghosts):
            raise SchemaViolation("parameters.ghost_scripts",
                                  f"{len(raw.ghost_scripts)} scripts for {len(ghosts)} ghosts")
        scripts = tuple(tuple(script) for script in raw.ghost_scripts)
        start = PacmanState(pacman, tuple(ghosts), frozenset(pellets), frozenset(powerups))
        return PacmanLayout(rows=len(raw.grid),
                            cols=len(raw.grid[0]),
                            walls=frozenset(walls),
                            scripts=scripts,
                            power_duration=raw.power_duration,
                            start=start)

    def initial_state(self, params: PacmanLayout,
                      initial_doc: Mapping[str, Any]) -> PacmanState:
        if not initial_doc:
            return params.start
        try:
            state = self.decode_state(params, initial_doc)
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaViolation("initial_state", f"malformed pacman state: {e}") from e
        self.check_invariants(params, state)
        return state

    def decode_state(self, params, doc: Mapping[str, Any]) -> PacmanState:
        return PacmanState(
            pacman=_cell(doc["pacman"]),
            ghosts=tuple(Ghost(int(g["id"]), _cell(g["pos"]), int(g.get("script_index", 0)))
                         for g in doc.get("ghosts", [])),
            pellets=frozenset(_cell(p) for p in doc.get("pellets", [])),
            powerups=frozenset(_cell(p) for p in doc.get("powerups", [])),
            power_timer=int(doc.get("power_timer", 0)),
            dead=bool(doc.get("dead", False)))

    @staticmethod
    def check_invariants(layout: PacmanLayout, state: PacmanState) -> None:
        """Raise SchemaViolation when a state breaks the layout's invariants."""
        if not layout.open_cell(state.pacman):
            raise SchemaViolation("initial_state.pacman", "pacman is not on an open cell")
        if any(not layout.open_cell(g.pos) for g in state.ghosts):
            raise SchemaViolation("initial_state.ghosts", "ghost is not on an open cell")
        if state.pellets & state.powerups:
            raise SchemaViolation("initial_state", "a cell holds a pellet and a power-up")
        if state.pacman in state.pellets or state.pacman in state.powerups:
            raise SchemaViolation("initial_state", "pacman's cell must be empty")
        if not 0 <= state.power_timer <= layout.power_duration:
            raise SchemaViolation("initial_state.power_timer", "outside [0, power_duration]")

    def successors(self, params: PacmanLayout, state: PacmanState) -> List[Transition]:
        if state.dead:
            return []
        result = []
        for direction in DIRECTIONS:
            try:
                result.append(Transition(direction, pacman_step(params, state, direction)))
            except Inapplicable:
                continue
        return result

    def is_goal(self, params, state: PacmanState) -> bool:
        return not state.dead and not state.pellets

    def builtin_goal(self, params) -> List[GoalCondition]:
        return [NumericCondition(Var("pellets_remaining"), Comparator.EQ),
                PropCondition("dead", False)]

    def variables(self, params) -> Set[str]:
        return {"pacman_row", "pacman_col", "pellets_remaining", "powerups_remaining",
                "ghosts_remaining", "power_timer", "dead"}


def _cell(value: Sequence[int]) -> Cell:
    r, c = value
    return int(r), int(c)
