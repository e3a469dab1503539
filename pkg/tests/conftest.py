"""Shared test strategies and run helpers."""

from __future__ import annotations

from cupgame.engine import (
    CupState,
    EmptyMove,
    FillMove,
    GameConfig,
    StepRecord,
    Trace,
    run_game,
)
from cupgame.rational import as_rat, rat


class ScriptFiller:
    """Plays a fixed list of moves, then nothing."""

    needs_adaptive = False

    def __init__(self, moves):
        self.moves = [FillMove(move) for move in moves]

    def next_move(self, t, view):
        if t <= len(self.moves):
            return self.moves[t - 1]
        return FillMove({})


class ConstantFiller:
    """Plays the same move every step."""

    needs_adaptive = False

    def __init__(self, move):
        self.move = FillMove(move)

    def next_move(self, t, view):
        return self.move


def play(n, p, steps, *, filler=None, emptier=None, seed=0, **kwargs):
    config = GameConfig(n=n, p=p, steps=steps, seed=seed, **kwargs)
    return run_game(config, filler=filler, emptier=emptier)


def forge(n, p, emptier, steps, *, initial=None, truncation=None):
    """Assemble a Trace from raw per-step tuples, no legality checks.

    steps: list of (fill_amounts, inter_fills, removed_pairs, post_fills).
    """
    config = GameConfig(
        n=n, p=p, steps=len(steps), emptier=emptier, truncation=truncation
    )
    start = CupState([rat(x) for x in initial]) if initial else CupState.zeros(n)
    records = []
    for t, (fills, inter, removed, post) in enumerate(steps, start=1):
        removed = tuple(sorted((cup, rat(a)) for cup, a in removed))
        records.append(
            StepRecord(
                t=t,
                fill=FillMove({cup: rat(a) for cup, a in fills.items()}),
                intermediate=CupState([rat(x) for x in inter]),
                empty=EmptyMove([cup for cup, _ in removed]),
                post=CupState([rat(x) for x in post]),
                removed=removed,
            )
        )
    return Trace(config=config, initial=start, records=records)


def moves_of(trace):
    return [record.fill for record in trace.records]


def exact(value):
    return as_rat(value)
