"""Single-step game semantics and the run loop.

One step of the p-processor game: the filler distributes at most p units of
water (at most 1 per cup) over the previous state S_{t-1}, producing the
intermediate state I_t; the emptier then picks at most p cups and removes
water from each, producing S_t.  Removal from one cup is min(1, fill) under
the plain policy, or exactly 1-if-fill>=1-else-nothing under the
skip-under-one policy carried by the move.

Strategies never mutate states.  If a strategy emits an illegal move the run
aborts and the trace carries a structured violation report instead of
guessing a repair; clamping would hide strategy bugs the checkers exist to
find.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .rational import ONE, ZERO, as_rat
from .rng import FILLER_LABEL, OFFSET_LABEL, stream
from .state import CupState

ADAPTIVE = "adaptive"
OBLIVIOUS = "oblivious"


class ConfigError(ValueError):
    """Rejected configuration or strategy specification."""


@dataclass(frozen=True)
class GameConfig:
    n: int
    p: int
    steps: int
    seed: int = 0
    filler: str = "zero"
    emptier: str = "greedy"
    truncation: object = None
    visibility: str = ADAPTIVE

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if not 1 <= self.p <= self.n:
            raise ConfigError(f"p must be in 1..{self.n}, got {self.p}")
        if self.steps < 0:
            raise ConfigError(f"steps must be >= 0, got {self.steps}")
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.visibility not in (ADAPTIVE, OBLIVIOUS):
            raise ConfigError(f"unknown visibility {self.visibility!r}")
        if self.truncation is not None:
            try:
                truncation = as_rat(self.truncation)
            except ValueError as err:
                raise ConfigError(str(err)) from None
            if truncation <= 1:
                raise ConfigError(f"truncation must be > 1, got {truncation}")
            object.__setattr__(self, "truncation", truncation)


@dataclass(frozen=True)
class FillMove:
    """Sparse deposits, canonicalized: sorted by cup id, zero amounts dropped."""

    amounts: tuple

    def __init__(self, amounts):
        if hasattr(amounts, "items"):
            amounts = amounts.items()
        cleaned = []
        seen = set()
        for cup, amount in amounts:
            if cup in seen:
                raise ValueError(f"duplicate cup id {cup} in fill move")
            seen.add(cup)
            amount = as_rat(amount)
            if amount != 0:
                cleaned.append((cup, amount))
        cleaned.sort()
        object.__setattr__(self, "amounts", tuple(cleaned))

    def amount_into(self, cup: int):
        for other, amount in self.amounts:
            if other == cup:
                return amount
        return ZERO

    def total(self):
        total = ZERO
        for _, amount in self.amounts:
            total += amount
        return total

    def cups(self) -> tuple[int, ...]:
        return tuple(cup for cup, _ in self.amounts)


@dataclass(frozen=True)
class EmptyMove:
    """Cup selection, sorted; skip_under_one is the removal policy."""

    cups: tuple[int, ...]
    skip_under_one: bool = False

    def __init__(self, cups, skip_under_one: bool = False):
        cups = tuple(sorted(cups))
        if len(set(cups)) != len(cups):
            raise ValueError(f"duplicate cup ids in empty move: {cups}")
        object.__setattr__(self, "cups", cups)
        object.__setattr__(self, "skip_under_one", bool(skip_under_one))


@dataclass(frozen=True)
class StepRecord:
    t: int
    fill: FillMove
    intermediate: CupState
    empty: EmptyMove
    post: CupState
    removed: tuple  # (cup, amount) pairs, sorted, only amounts > 0

    def removed_from(self, cup: int):
        for other, amount in self.removed:
            if other == cup:
                return amount
        return ZERO

    def drained_cups(self) -> tuple[int, ...]:
        return tuple(cup for cup, _ in self.removed)


@dataclass(frozen=True)
class Violation:
    step: int
    source: str  # "filler" or "emptier"
    reasons: tuple[str, ...]


@dataclass(eq=False)  # identity semantics; keeps traces usable as cache keys
class Trace:
    config: GameConfig
    initial: CupState
    records: list[StepRecord]
    violation: Violation | None = None
    _backlogs: list = field(default=None, repr=False, compare=False)

    @property
    def steps_executed(self) -> int:
        return len(self.records)

    def states(self) -> list[CupState]:
        """Post states S_0..S_T."""
        return [self.initial] + [record.post for record in self.records]

    def backlog_series(self):
        if self._backlogs is None:
            self._backlogs = [state.backlog() for state in self.states()]
        return self._backlogs

    def max_backlog(self):
        return max(self.backlog_series())

    def av_series(self):
        """av_p(S_t) for t = 0..T."""
        p = self.config.p
        return [state.prefix_stats(p)[1] for state in self.states()]

    def empirical_M(self):
        """Largest av_p seen anywhere in the trace."""
        return max(self.av_series())

    def deposit_into(self, t: int, cup: int):
        return self.records[t - 1].fill.amount_into(cup)


def validate_fill(move: FillMove, config: GameConfig, state: CupState) -> list[str]:
    """Reasons the move is illegal on state; empty list means legal."""
    problems = []
    total = ZERO
    for cup, amount in move.amounts:
        if not 1 <= cup <= config.n:
            problems.append(f"cup id {cup} outside 1..{config.n}")
            continue
        if amount < 0:
            problems.append(f"negative deposit {amount} into cup {cup}")
            continue
        if amount > 1:
            problems.append(f"deposit {amount} into cup {cup} exceeds 1")
        if (
            config.truncation is not None
            and state.fill_of(cup) + amount > config.truncation
        ):
            problems.append(
                f"deposit {amount} into cup {cup} breaches truncation "
                f"{config.truncation}"
            )
        total += amount
    if total > config.p:
        problems.append(f"total deposit {total} exceeds budget {config.p}")
    return problems


def apply_fill(state: CupState, move: FillMove) -> CupState:
    """Deposit the move into the state; the caller validates legality."""
    fills = list(state.fills)
    for cup, amount in move.amounts:
        fills[cup - 1] += amount
    return CupState._wrap(tuple(fills))


def validate_empty(move: EmptyMove, config: GameConfig) -> list[str]:
    problems = []
    if len(move.cups) > config.p:
        problems.append(f"selected {len(move.cups)} cups, budget is {config.p}")
    for cup in move.cups:
        if not 1 <= cup <= config.n:
            problems.append(f"cup id {cup} outside 1..{config.n}")
    return problems


def apply_empty(state: CupState, move: EmptyMove):
    """Apply removals; returns (new state, (cup, amount) pairs with amount > 0)."""
    fills = list(state.fills)
    removed = []
    for cup in move.cups:
        fill = fills[cup - 1]
        if move.skip_under_one:
            amount = ONE if fill >= 1 else ZERO
        else:
            amount = fill if fill < 1 else ONE
        if amount > 0:
            fills[cup - 1] = fill - amount
            removed.append((cup, amount))
    return CupState._wrap(tuple(fills)), tuple(removed)


@dataclass
class AdaptiveView:
    """Everything an adaptive filler may observe: the whole trace so far."""

    config: GameConfig
    initial: CupState
    records: list[StepRecord]
    state: CupState


@dataclass
class ObliviousView:
    """An oblivious filler sees only its own prior moves (and its own RNG)."""

    config: GameConfig
    own_moves: list[FillMove]


def run_game(config: GameConfig, filler=None, emptier=None, *, stop_when=None) -> Trace:
    """Play the configured game and return its trace.

    filler and emptier default to the strategies named by the config's spec
    strings; pass instances to override.  stop_when(t, post_state) -> bool
    ends the run early (the lower-bound search uses it).
    """
    from .emptiers import make_emptier
    from .fillers import make_filler

    if emptier is None:
        emptier = make_emptier(config.emptier)
    if filler is None:
        filler = make_filler(config.filler, config, stream(config.seed, FILLER_LABEL))
    if config.visibility == OBLIVIOUS and getattr(filler, "needs_adaptive", False):
        raise ConfigError(
            f"filler {config.filler!r} needs adaptive visibility"
        )

    offsets = emptier.initial_fills(config, stream(config.seed, OFFSET_LABEL))
    initial = CupState(offsets) if offsets is not None else CupState.zeros(config.n)

    records: list[StepRecord] = []
    own_moves: list[FillMove] = []
    state = initial
    violation = None
    oblivious = config.visibility == OBLIVIOUS

    for t in range(1, config.steps + 1):
        if oblivious:
            view = ObliviousView(config, own_moves)
        else:
            view = AdaptiveView(config, initial, records, state)
        move = filler.next_move(t, view)
        problems = validate_fill(move, config, state)
        if problems:
            violation = Violation(t, "filler", tuple(problems))
            break
        intermediate = apply_fill(state, move)
        empty = emptier.select(intermediate, config.p)
        problems = validate_empty(empty, config)
        if problems:
            violation = Violation(t, "emptier", tuple(problems))
            break
        post, removed = apply_empty(intermediate, empty)
        records.append(StepRecord(t, move, intermediate, empty, post, removed))
        own_moves.append(move)
        state = post
        if stop_when is not None and stop_when(t, post):
            break

    return Trace(config, initial, records, violation)
