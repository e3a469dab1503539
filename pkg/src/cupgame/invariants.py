"""Per-trace checkers for the structural facts the analysis rests on.

Each checker replays one mechanically checkable consequence of the game
semantics over a finished trace and returns an InvariantReport: pass/fail,
the parameters used, and on failure a minimal witness (step, cups, values).
Checkers whose argument depends on the emptier's policy refuse traces played
under a different emptier (PreconditionError) rather than reporting
meaningless failures.

The level decomposition: the level-i fill of a cup is
h^(i) = max(fill - 2(i-1), 0); a cup is level-i active iff fill >= 2(i-1);
the level-i integer fill is T^(i) = sum_j max(floor(h^(i)_j - 1), 0).  A
deposit f crosses a level-i threshold s (integer, s >= 2) at step t when
h^(i)(t-1) < s <= h^(i)(t-1) + f.  Unit removals decrease a positive integer
fill by exactly one per drained cup, which is what makes T^(i) obey an exact
conservation law under the skip-under-one emptier.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

from .engine import FillMove, GameConfig, Trace, run_game
from .rational import ZERO, as_rat, floor_rat, format_rat, is_integral, rat
from .state import harmonic_number, harmonic_tail

GREEDY = "greedy"
SMOOTHED = "smoothed-greedy"


class PreconditionError(Exception):
    """The trace does not satisfy the checker's hypotheses."""


@dataclass
class InvariantReport:
    check: str
    passed: bool
    params: dict
    witness: dict | None = None

    def to_jsonable(self) -> dict:
        return {
            "check": self.check,
            "passed": self.passed,
            "params": _jsonify(self.params),
            "witness": _jsonify(self.witness),
        }


def _jsonify(value):
    if value is None or isinstance(value, (bool, int, str, float)):
        return value
    if isinstance(value, dict):
        return {str(key): _jsonify(val) for key, val in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(item) for item in value]
    return format_rat(value)  # exact rationals


def _require(trace: Trace, emptiers: tuple[str, ...], check: str):
    if trace.config.emptier not in emptiers:
        raise PreconditionError(
            f"{check} needs an emptier in {emptiers}, trace used "
            f"{trace.config.emptier!r}"
        )


# ---------------------------------------------------------------------------
# plain-greedy invariants


def check_truncated_invariant(trace: Trace) -> InvariantReport:
    """Skewed averages of a truncated greedy game obey the harmonic tail.

    For every step t and every k in 1..n-p, the N-skewed average of the k
    cups below the top p satisfies f^N_k(S_t) <= 1 + sum_{j=k+1}^n 1/j.
    """
    _require(trace, (GREEDY,), "truncated-tail")
    truncation = trace.config.truncation
    if truncation is None:
        raise PreconditionError("truncated-tail needs a truncation cap")
    n, p = trace.config.n, trace.config.p
    params = {"n": n, "p": p, "truncation": truncation}
    charged = p * truncation
    bounds = [None] + [k * harmonic_tail(k, n) for k in range(1, n - p + 1)]
    for t, state in enumerate(trace.states()):
        state._rank_order()
        prefix = state._prefix
        for k in range(1, n - p + 1):
            if prefix[p + k] - charged > bounds[k]:
                value = (prefix[p + k] - charged) / k
                return InvariantReport(
                    "truncated-tail",
                    False,
                    params,
                    {"t": t, "k": k, "value": value, "bound": harmonic_tail(k, n)},
                )
    return InvariantReport("truncated-tail", True, params)


def check_cup_reset(trace: Trace) -> InvariantReport:
    """A cup whose rank fill rose was refilled, so nearby ranks are close.

    If S_t(j) > S_{t-1}(j) for some j <= p, then every rank j+1..p+1 of S_t
    holds at least S_t(j) - 1.
    """
    _require(trace, (GREEDY, SMOOTHED), "cup-reset")
    n, p = trace.config.n, trace.config.p
    params = {"n": n, "p": p}
    floor_rank = min(p + 1, n)
    states = trace.states()
    for t in range(1, len(states)):
        prev, cur = states[t - 1], states[t]
        low = cur.rank_fill(floor_rank)
        for j in range(1, min(p, n) + 1):
            fill = cur.rank_fill(j)
            if fill > prev.rank_fill(j) and low < fill - 1:
                return InvariantReport(
                    "cup-reset",
                    False,
                    params,
                    {
                        "t": t,
                        "rank": j,
                        "fill": fill,
                        "previous_fill": prev.rank_fill(j),
                        "rank_fill_p_plus_1": low,
                    },
                )
    return InvariantReport("cup-reset", True, params)


def record_setting_steps(trace: Trace) -> list[int]:
    """Steps whose av_p strictly exceeds every earlier step's av_p."""
    result = []
    best = None
    series = trace.av_series()
    for t in range(1, len(series)):
        if best is None or series[t] > best:
            result.append(t)
            best = series[t]
    return result


def check_record_constraints(trace: Trace) -> InvariantReport:
    """Record-setting states are flat near the top.

    At every record-setting step t: for each i in 1..p the cups ranked
    i+1..p+1 average at least S_t(i) - 1, and the rank-1 to rank-(p+1) gap
    is at most H_p = sum_{j=1}^p 1/j.
    """
    _require(trace, (GREEDY,), "record-gap")
    n, p = trace.config.n, trace.config.p
    if n < p + 1:
        raise PreconditionError("record-gap needs n >= p + 1")
    gap_bound = harmonic_number(p)
    params = {"n": n, "p": p, "gap_bound": gap_bound}
    states = trace.states()
    for t in record_setting_steps(trace):
        state = states[t]
        state._rank_order()
        prefix = state._prefix
        for i in range(1, p + 1):
            mass = prefix[p + 1] - prefix[i]
            need = (p + 1 - i) * (state.rank_fill(i) - 1)
            if mass < need:
                return InvariantReport(
                    "record-gap",
                    False,
                    params,
                    {
                        "t": t,
                        "i": i,
                        "tail_average": mass / (p + 1 - i),
                        "rank_fill": state.rank_fill(i),
                    },
                )
        gap = state.rank_fill(1) - state.rank_fill(p + 1)
        if gap > gap_bound:
            return InvariantReport(
                "record-gap",
                False,
                params,
                {"t": t, "gap": gap, "bound": gap_bound},
            )
    return InvariantReport("record-gap", True, params)


def check_av_invariant_single(trace: Trace) -> InvariantReport:
    """Single-processor greedy keeps every top-k average under the tail bound.

    For every step t and k in 1..n: av_k(S_t) <= 1 + sum_{j=k+1}^n 1/j.
    """
    _require(trace, (GREEDY,), "single-av")
    if trace.config.p != 1:
        raise PreconditionError("single-av needs p = 1")
    if any(fill != 0 for fill in trace.initial.fills):
        raise PreconditionError("single-av needs an empty starting state")
    n = trace.config.n
    params = {"n": n}
    bounds = [None] + [k * harmonic_tail(k, n) for k in range(1, n + 1)]
    for t, state in enumerate(trace.states()):
        state._rank_order()
        prefix = state._prefix
        for k in range(1, n + 1):
            if prefix[k] > bounds[k]:
                return InvariantReport(
                    "single-av",
                    False,
                    params,
                    {
                        "t": t,
                        "k": k,
                        "average": prefix[k] / k,
                        "bound": harmonic_tail(k, n),
                    },
                )
    return InvariantReport("single-av", True, params)


# ---------------------------------------------------------------------------
# level decomposition


def level_fill(fill, level: int):
    """h^(i) = max(fill - 2(i-1), 0)."""
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    shifted = as_rat(fill) - 2 * (level - 1)
    return shifted if shifted > 0 else ZERO


@dataclass
class LevelStats:
    """Per-step level-i series computed once per (trace, level)."""

    level: int
    active: list[int]  # A(t), t = 0..T: cups with fill >= 2(level-1)
    integer_fill: list[int]  # T(t), t = 0..T
    crossings: list[int]  # index t = 1..T (index 0 unused)
    crossing_cups: list[tuple[int, ...]]  # cups with a crossing at step t
    max_active: int


_level_cache: "weakref.WeakKeyDictionary[Trace, dict]" = weakref.WeakKeyDictionary()


def _state_level_numbers(state, level: int):
    floor_gate = 2 * (level - 1)
    active = 0
    integer_fill = 0
    for fill in state.fills:
        if fill >= floor_gate:
            active += 1
            whole = floor_rat(fill) - floor_gate - 1
            if whole > 0:
                integer_fill += whole
    return active, integer_fill


def level_series(trace: Trace, level: int) -> LevelStats:
    cache = _level_cache.setdefault(trace, {})
    if level in cache:
        return cache[level]
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    active = []
    integer_fill = []
    crossings = [0]
    crossing_cups: list[tuple[int, ...]] = [()]
    a0, t0 = _state_level_numbers(trace.initial, level)
    active.append(a0)
    integer_fill.append(t0)
    previous = trace.initial
    for record in trace.records:
        count = 0
        cups = []
        for cup, amount in record.fill.amounts:
            before = level_fill(previous.fill_of(cup), level)
            hit = floor_rat(before + amount) - max(floor_rat(before), 1)
            if hit > 0:
                count += hit
                cups.append(cup)
        crossings.append(count)
        crossing_cups.append(tuple(cups))
        a, ti = _state_level_numbers(record.post, level)
        active.append(a)
        integer_fill.append(ti)
        previous = record.post
    stats = LevelStats(
        level=level,
        active=active,
        integer_fill=integer_fill,
        crossings=crossings,
        crossing_cups=crossing_cups,
        max_active=max(active),
    )
    cache[level] = stats
    return stats


def max_level(trace: Trace) -> int:
    """Highest level at which any state has positive level fill."""
    top = max(state.backlog() for state in trace.states())
    return max(1, floor_rat(top / 2) + 1)


def count_crossings(trace: Trace, level: int, t0: int, t1: int):
    """Level-i crossings over steps t0..t1: (total, cups that crossed)."""
    if not 1 <= t0 <= t1 <= trace.steps_executed:
        raise ValueError(
            f"interval {t0}..{t1} outside 1..{trace.steps_executed}"
        )
    stats = level_series(trace, level)
    cups = set()
    for t in range(t0, t1 + 1):
        cups.update(stats.crossing_cups[t])
    return sum(stats.crossings[t0 : t1 + 1]), tuple(sorted(cups))


def bolus(trace: Trace, level: int, t0: int, t1: int) -> int:
    """Crossings in excess of the emptier's p-per-step removal rate."""
    count, _ = count_crossings(trace, level, t0, t1)
    return max(count - trace.config.p * (t1 - t0 + 1), 0)


def _deposit_cumsums(trace: Trace):
    """cum[cup-1][t] = total deposited into cup during steps 1..t."""
    cache = _level_cache.setdefault(trace, {})
    if "deposits" in cache:
        return cache["deposits"]
    n = trace.config.n
    cums = [[ZERO] * (trace.steps_executed + 1) for _ in range(n)]
    running = [ZERO] * n
    for index, record in enumerate(trace.records, start=1):
        for cup, amount in record.fill.amounts:
            running[cup - 1] += amount
        for cup in range(n):
            cums[cup][index] = running[cup]
    cache["deposits"] = cums
    return cums


def _log2(n: int):
    if n & (n - 1) == 0:
        return n.bit_length() - 1  # exact for powers of two
    return math.log2(n)


# ---------------------------------------------------------------------------
# smoothed-greedy invariants


def check_level_conservation(trace: Trace, level: int) -> InvariantReport:
    """T^(i) changes by crossings minus unit drains of 2-plus level fills.

    Exact bookkeeping identity: T^(i)(t) = T^(i)(t-1) + crossings_i(t)
    - #{drained cups whose intermediate level fill was >= 2}.  Holds because
    the skip-under-one emptier only ever removes whole units.
    """
    _require(trace, (SMOOTHED,), "level-conservation")
    stats = level_series(trace, level)
    params = {"level": level}
    for t, record in enumerate(trace.records, start=1):
        drains = sum(
            1
            for cup, amount in record.removed
            if level_fill(record.intermediate.fill_of(cup), level) >= 2
        )
        expected = stats.integer_fill[t - 1] + stats.crossings[t] - drains
        if stats.integer_fill[t] != expected:
            return InvariantReport(
                "level-conservation",
                False,
                params,
                {
                    "t": t,
                    "integer_fill": stats.integer_fill[t],
                    "expected": expected,
                    "crossings": stats.crossings[t],
                    "drains": drains,
                },
            )
    return InvariantReport("level-conservation", True, params)


def check_filler_progress(trace: Trace, level: int, d: int = 4) -> InvariantReport:
    """Sustained high integer fill forces the filler to keep crossing.

    For each t1, with t0 the largest step <= t1 whose preceding integer fill
    was at most d(p-1)log2(n): crossings over t0..t1 must be at least
    p(t1 - t0 + 1) + T^(i)(t1) - d p log2(n).
    """
    _require(trace, (SMOOTHED,), "level-progress")
    n, p = trace.config.n, trace.config.p
    log2n = _log2(n)
    threshold = d * (p - 1) * log2n
    slack = d * p * log2n
    stats = level_series(trace, level)
    params = {"level": level, "d": d, "threshold": threshold}
    cumulative = [0]
    for count in stats.crossings[1:]:
        cumulative.append(cumulative[-1] + count)
    t0 = None
    for t1 in range(1, trace.steps_executed + 1):
        if stats.integer_fill[t1 - 1] <= threshold:
            t0 = t1
        if t0 is None:
            continue
        crossings = cumulative[t1] - cumulative[t0 - 1]
        required = p * (t1 - t0 + 1) + stats.integer_fill[t1] - slack
        if crossings < required:
            return InvariantReport(
                "level-progress",
                False,
                params,
                {
                    "t0": t0,
                    "t1": t1,
                    "crossings": crossings,
                    "required": required,
                    "integer_fill": stats.integer_fill[t1],
                },
            )
    return InvariantReport("level-progress", True, params)


def check_working_set(trace: Trace, level: int, window: int = 256) -> InvariantReport:
    """Crossing-heavy intervals use few cups, and those cups got the water.

    For every interval [t0, t1] with t1 - t0 < window in which crossings
    reach p(t1 - t0 + 1): the set S of cups that crossed satisfies
    |S| <= 2 A^(i)(t0 - 1), and the deposits into S over the interval total
    at least p(t1 - t0 + 1) - |S|.
    """
    _require(trace, (SMOOTHED,), "working-set")
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    p = trace.config.p
    stats = level_series(trace, level)
    cums = _deposit_cumsums(trace)
    params = {"level": level, "window": window}
    steps = trace.steps_executed
    for t0 in range(1, steps + 1):
        crossings = 0
        cups: set[int] = set()
        for t1 in range(t0, min(steps, t0 + window - 1) + 1):
            crossings += stats.crossings[t1]
            if stats.crossing_cups[t1]:
                cups.update(stats.crossing_cups[t1])
            length = t1 - t0 + 1
            if crossings < p * length:
                continue
            active_before = stats.active[t0 - 1]
            if len(cups) > 2 * active_before:
                return InvariantReport(
                    "working-set",
                    False,
                    params,
                    {
                        "t0": t0,
                        "t1": t1,
                        "set_size": len(cups),
                        "active_before": active_before,
                        "cups": sorted(cups),
                    },
                )
            deposits = ZERO
            for cup in cups:
                deposits += cums[cup - 1][t1] - cums[cup - 1][t0 - 1]
            if deposits < p * length - len(cups):
                return InvariantReport(
                    "working-set",
                    False,
                    params,
                    {
                        "t0": t0,
                        "t1": t1,
                        "deposits": deposits,
                        "required": p * length - len(cups),
                        "cups": sorted(cups),
                    },
                )
    return InvariantReport("working-set", True, params)


def check_fractional_preservation(trace: Trace) -> InvariantReport:
    """Fill minus offset minus cumulative deposit stays an integer per cup."""
    _require(trace, (SMOOTHED,), "fractional")
    offsets = trace.initial.fills
    cums = _deposit_cumsums(trace)
    params = {"n": trace.config.n}
    for t, record in enumerate(trace.records, start=1):
        for cup in range(1, trace.config.n + 1):
            delta = record.post.fill_of(cup) - offsets[cup - 1] - cums[cup - 1][t]
            if not is_integral(delta):
                return InvariantReport(
                    "fractional",
                    False,
                    params,
                    {"t": t, "cup": cup, "residue": delta},
                )
    return InvariantReport("fractional", True, params)


def empirical_M(trace: Trace):
    """Running max of av_p over the trace; a lower estimate of the true sup."""
    return trace.empirical_M()


# ---------------------------------------------------------------------------
# offset Monte Carlo


class _ScriptedCup:
    """Oblivious filler: a fixed deposit sequence into one cup, then nothing."""

    needs_adaptive = False

    def __init__(self, amounts, cup: int):
        self.amounts = [as_rat(amount) for amount in amounts]
        self.cup = cup

    def next_move(self, t, view):
        if t <= len(self.amounts):
            return FillMove({self.cup: self.amounts[t - 1]})
        return FillMove({})


def crossing_probability_experiment(deposits, seeds: int, *, n: int = 1,
                                    cup: int = 1, base_seed: int = 0):
    """Fraction of offset draws in which the last scripted deposit crosses.

    Replays the deposit script into one cup against the smoothed greedy
    emptier under `seeds` independent offset draws and reports how often the
    final deposit pushes the cup's fill past an integer.  Removals ahead of
    the final deposit are whole units, so the fill's fractional part stays
    uniform and the exact crossing probability equals the deposit's
    fractional size.
    """
    if seeds < 100:
        raise ValueError(f"need at least 100 seeds for a usable estimate, got {seeds}")
    deposits = [as_rat(amount) for amount in deposits]
    if not deposits:
        raise ValueError("deposit script must contain at least one step")
    for amount in deposits:
        if not 0 <= amount <= 1:
            raise ValueError(f"scripted deposits must lie in [0, 1], got {amount}")
    hits = 0
    for seed in range(base_seed, base_seed + seeds):
        config = GameConfig(
            n=n, p=1, steps=len(deposits), seed=seed, emptier=SMOOTHED
        )
        trace = run_game(config, filler=_ScriptedCup(deposits, cup))
        last = trace.records[-1]
        before = (
            trace.records[-2].post if len(trace.records) > 1 else trace.initial
        ).fill_of(cup)
        if floor_rat(last.intermediate.fill_of(cup)) > floor_rat(before):
            hits += 1
    return rat(hits, seeds)


# ---------------------------------------------------------------------------
# suite driver


def _levels_report(trace, single, name, **kwargs) -> InvariantReport:
    reports = [
        single(trace, level, **kwargs) for level in range(1, max_level(trace) + 1)
    ]
    failed = [report for report in reports if not report.passed]
    params = dict(reports[0].params)
    params["levels"] = len(reports)
    if failed:
        witness = dict(failed[0].witness)
        witness["level"] = failed[0].params["level"]
        return InvariantReport(name, False, params, witness)
    return InvariantReport(name, True, params)


def _all_levels_conservation(trace, **kwargs):
    return _levels_report(trace, check_level_conservation, "level-conservation")


def _all_levels_progress(trace, d: int = 4, **kwargs):
    return _levels_report(trace, check_filler_progress, "level-progress", d=d)


def _all_levels_working_set(trace, window: int = 256, **kwargs):
    return _levels_report(trace, check_working_set, "working-set", window=window)


def _adapt(checker):
    def run(trace, **kwargs):
        return checker(trace)

    return run


CHECKERS = {
    "truncated-tail": _adapt(check_truncated_invariant),
    "cup-reset": _adapt(check_cup_reset),
    "record-gap": _adapt(check_record_constraints),
    "single-av": _adapt(check_av_invariant_single),
    "level-conservation": _all_levels_conservation,
    "level-progress": _all_levels_progress,
    "working-set": _all_levels_working_set,
    "fractional": _adapt(check_fractional_preservation),
}


def applicable_checkers(trace: Trace) -> list[str]:
    config = trace.config
    names = []
    if config.emptier == GREEDY:
        if config.truncation is not None:
            names.append("truncated-tail")
        names.append("cup-reset")
        if config.n > config.p:
            names.append("record-gap")
        if config.p == 1:
            names.append("single-av")
    if config.emptier == SMOOTHED:
        names.extend(
            ["cup-reset", "level-conservation", "level-progress", "working-set",
             "fractional"]
        )
    return names


def run_checkers(trace: Trace, names=None, *, window: int = 256, d: int = 4):
    """Run the named checkers (default: all applicable) over the trace."""
    if names is None:
        names = applicable_checkers(trace)
    reports = []
    for name in names:
        if name not in CHECKERS:
            raise ValueError(f"unknown checker {name!r}")
        reports.append(CHECKERS[name](trace, window=window, d=d))
    return reports
