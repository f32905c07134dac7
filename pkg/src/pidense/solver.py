"""Satisfiability search over saturated sets and window chains.

The search mirrors a nondeterministic procedure: pick a consistent
saturated extension of the goal set, then for every surviving diamond
either step straight to a successor set (top index) or guess a window and
follow its continuation chain, detecting structural repeats.  Failed
guesses backtrack through lazy enumerators; empty streams mean the branch
is unsatisfiable.
"""

import time
from dataclasses import dataclass
from typing import Callable, Optional

from .ccs import (
    box_minus,
    enumerate_ccs,
    enumerate_saturations,
    is_consistent,
    is_saturated,
)
from .formula import Box, Neg, neg, set_depth, sf, sorted_set, to_str
from .window import (
    EMPTY,
    EmptyWindow,
    WindowContext,
    WindowNode,
    canonical_key,
    is_continuation,
    is_window,
)


class BudgetExceeded(RuntimeError):
    """Raised when the configured step or time budget runs out."""


@dataclass
class SolverConfig:
    pi: int = 1
    mode: str = "kde-pi"  # "kde-pi" or "kde-mono"
    loop_mode: str = "seen"  # "seen" or "counter"
    counter_bound: Optional[int] = None
    ccs_mode: str = "branch"  # "branch" or "exhaustive"
    trace: bool = False
    budget_steps: Optional[int] = None
    budget_seconds: Optional[float] = None
    debug_checks: bool = False
    continuation_observer: Optional[Callable] = None
    loop_observer: Optional[Callable] = None

    def __post_init__(self):
        if self.mode not in ("kde-pi", "kde-mono"):
            raise ValueError("unknown mode %r" % self.mode)
        if self.loop_mode not in ("seen", "counter"):
            raise ValueError("unknown loop mode %r" % self.loop_mode)
        if self.ccs_mode not in ("branch", "exhaustive"):
            raise ValueError("unknown ccs mode %r" % self.ccs_mode)
        if self.loop_mode == "counter" and self.counter_bound is None:
            raise ValueError("counter mode needs counter_bound")
        if self.pi < 0:
            raise ValueError("pi must be >= 0")

    @property
    def mono(self):
        return self.mode == "kde-mono"


@dataclass
class SolveStats:
    """Search counters.  peak_live_windows counts windows during their
    head-check phase only, matching a machine that guesses continuations
    instead of enumerating them; generator state is not counted.
    peak_live_ccs adds the rows held by those windows to the live
    recursion frames."""

    choice_points: int = 0
    backtracks: int = 0
    peak_live_windows: int = 0
    peak_live_ccs: int = 0
    max_sat_depth: int = 0
    continuation_steps: int = 0
    loops_detected: int = 0
    wall_time: float = 0.0

    def to_dict(self, include_wall_time=False):
        out = {
            "choice_points": self.choice_points,
            "backtracks": self.backtracks,
            "peak_live_windows": self.peak_live_windows,
            "peak_live_ccs": self.peak_live_ccs,
            "max_sat_depth": self.max_sat_depth,
            "continuation_steps": self.continuation_steps,
            "loops_detected": self.loops_detected,
        }
        if include_wall_time:
            out["wall_time"] = self.wall_time
        return out


@dataclass
class Verdict:
    result: str
    stats: SolveStats
    trace: Optional[dict] = None
    lasso: Optional[list] = None


def _proj(i, s, mono):
    return box_minus(0 if mono else i, s)


def window_to_jsonable(w):
    """Nested row arrays of formula strings, for traces and tests."""
    if isinstance(w, EmptyWindow):
        return {"empty": True}
    return {
        "rows": [[to_str(f) for f in sorted_set(row)] for row in w.rows],
        "subs": [window_to_jsonable(s) for s in w.subs],
    }


def _sub_length(w):
    return len(w.rows) - 1 if isinstance(w, WindowNode) else 0


def _subwindows_for(parent_u, fixed_row0, k1, cfg, tick, row_ok):
    """Valid sub-windows for the pair (parent_u, fixed_row0) at level k1.
    Row 0 is pinned to the caller's row; the flow-down containment against
    the row above it is checked here."""
    tick()
    if (not cfg.mono) and k1 == cfg.pi:
        yield EMPTY
        return
    m = set_depth(parent_u)
    pbase = _proj(k1, parent_u, cfg.mono)
    exhaustive = cfg.ccs_mode == "exhaustive"
    if m == 0:
        if pbase <= fixed_row0:
            yield WindowNode((fixed_row0,), ())
        return
    # row 1 always contains pbase, so this much flows down regardless of
    # any later choice; bail before building the row product if it cannot fit
    if not (pbase | _proj(k1 + 1, pbase, cfg.mono)) <= fixed_row0:
        return

    def tails(i):
        # yields tuples (row_i, ..., row_m) for i >= 1
        if i == m:
            for r in enumerate_saturations(pbase, sf(pbase), exhaustive):
                tick()
                if row_ok(r):
                    yield (r,)
            return
        for rest in tails(i + 1):
            seed = pbase | _proj(k1 + 1, rest[0], cfg.mono)
            for r in enumerate_saturations(seed, sf(seed), exhaustive):
                tick()
                if row_ok(r):
                    yield (r,) + rest

    for tail in tails(1):
        if not (pbase | _proj(k1 + 1, tail[0], cfg.mono)) <= fixed_row0:
            continue
        rows = (fixed_row0,) + tail

        def attach(i):
            if i == m:
                yield ()
                return
            for sub in _subwindows_for(
                rows[i + 1], rows[i], k1 + 1, cfg, tick, row_ok
            ):
                for rest in attach(i + 1):
                    yield (sub,) + rest

        for subs in attach(0):
            yield WindowNode(rows, subs)


def enumerate_windows(u, v0, k, cfg, _tick=None, _row_ok=None):
    """All windows for (u, v0) at level k, deterministically.

    Rows are built top-down over full-closure universes; row 0 extends v0
    with whatever the row above it pushes down, backtracking over fatter
    extensions when needed.  Sub-windows are attached recursively with
    their first rows pinned.  _row_ok lets the caller drop rows it knows
    cannot appear in any accepting chain."""
    tick = _tick or (lambda: None)
    row_ok = _row_ok or (lambda r: True)
    n = set_depth(u)
    if n == 0:
        return
    if (not cfg.mono) and k >= cfg.pi:
        return
    base = _proj(k, u, cfg.mono)
    exhaustive = cfg.ccs_mode == "exhaustive"
    # row 1 always contains base, so row 0 always receives this core;
    # a clash here dooms every candidate before any row is chosen
    if not is_consistent(v0 | base | _proj(k + 1, base, cfg.mono)):
        return

    def tails(i):
        if i == n:
            for r in enumerate_saturations(base, sf(base), exhaustive):
                tick()
                if row_ok(r):
                    yield (r,)
            return
        for rest in tails(i + 1):
            seed = base | _proj(k + 1, rest[0], cfg.mono)
            for r in enumerate_saturations(seed, sf(seed), exhaustive):
                tick()
                if row_ok(r):
                    yield (r,) + rest

    universe0 = sf(v0 | base)
    for tail in tails(1):
        seed0 = v0 | base | _proj(k + 1, tail[0], cfg.mono)
        if not seed0 <= universe0:
            continue
        for r0 in enumerate_saturations(seed0, universe0, exhaustive):
            tick()
            if not row_ok(r0):
                continue
            rows = (r0,) + tail

            def attach(i):
                if i == n:
                    yield ()
                    return
                for sub in _subwindows_for(
                    rows[i + 1], rows[i], k + 1, cfg, tick, row_ok
                ):
                    for rest in attach(i + 1):
                        yield (sub,) + rest

            for subs in attach(0):
                yield WindowNode(rows, subs)


def _extend_window(old, new_p, new_q, k1, cfg, tick, row_ok):
    """Successors of a sub-window under row-wise inclusion for the new
    pair (new_p, new_q): every row extends the matching old row, row 0 is
    pinned to new_q.  The identity extension is always reachable when the
    pair is unchanged."""
    tick()
    if isinstance(old, EmptyWindow):
        if (not cfg.mono) and k1 == cfg.pi:
            yield EMPTY
        return
    m = len(old.rows) - 1
    if set_depth(new_p) != m:
        return
    pbase = _proj(k1, new_p, cfg.mono)
    if m == 0:
        if pbase <= new_q:
            yield WindowNode((new_q,), ())
        return
    if not (pbase | _proj(k1 + 1, pbase, cfg.mono)) <= new_q:
        return

    def tails(i):
        # yields tuples (row_i, ..., row_m) for i >= 1
        if i == m:
            for x in enumerate_ccs(pbase, cfg.ccs_mode == "exhaustive"):
                tick()
                r = old.rows[m] | x
                if is_consistent(r) and is_saturated(r) and row_ok(r):
                    yield (r,)
            return
        for rest in tails(i + 1):
            up = _proj(k1 + 1, rest[0], cfg.mono)
            for x in enumerate_ccs(up, cfg.ccs_mode == "exhaustive"):
                tick()
                r = old.rows[i] | x
                if not (is_consistent(r) and is_saturated(r)):
                    continue
                if not pbase <= r:
                    continue
                if not row_ok(r):
                    continue
                yield (r,) + rest

    for tail in tails(1):
        if not (pbase | _proj(k1 + 1, tail[0], cfg.mono)) <= new_q:
            continue
        rows = (new_q,) + tail

        def attach(i):
            if i == m:
                yield ()
                return
            for sub in _extend_window(
                old.subs[i], rows[i + 1], rows[i], k1 + 1, cfg, tick, row_ok
            ):
                for rest in attach(i + 1):
                    yield (sub,) + rest

        for subs in attach(0):
            yield WindowNode(rows, subs)


def enumerate_continuations(w, u, k, cfg, _tick=None, _row_ok=None):
    """Deterministic stream of windows continuing w one step for (u, k).

    Every overlapped row extends the row it shadows; the fresh top row and
    its sub-window are built like any window tail.  Candidates are
    filtered through the full validity and continuation checks before
    being yielded, so everything yielded passes both."""
    tick = _tick or (lambda: None)
    row_ok = _row_ok or (lambda r: True)
    if not isinstance(w, WindowNode):
        return
    n = len(w.rows) - 1
    if n < 1:
        return
    base = _proj(k, u, cfg.mono)
    exhaustive = cfg.ccs_mode == "exhaustive"
    ctx = WindowContext(
        u=u, k=k, n=n, pi=None if cfg.mono else cfg.pi, mono=cfg.mono
    )
    seen = set()

    def all_rows():
        for vn in enumerate_saturations(base, sf(base), exhaustive):
            tick()
            if not row_ok(vn):
                continue
            # build rows n-1 .. 0 descending
            def descend(j, above, acc):
                up = _proj(k + 1, above, cfg.mono)
                for x in enumerate_ccs(up, exhaustive):
                    tick()
                    r = w.rows[j + 1] | x
                    if not (is_consistent(r) and is_saturated(r)):
                        continue
                    if set_depth(r) != set_depth(w.rows[j + 1]):
                        continue
                    if not (base | up) <= r:
                        continue
                    if not row_ok(r):
                        continue
                    if j == 0:
                        yield (r,) + acc
                    else:
                        yield from descend(j - 1, r, (r,) + acc)

            yield from descend(n - 1, vn, (vn,))

    for rows in all_rows():
        def attach(i):
            if i == n:
                yield ()
                return
            if i == n - 1:
                stream = _subwindows_for(
                    rows[n], rows[n - 1], k + 1, cfg, tick, row_ok
                )
            else:
                stream = _extend_window(
                    w.subs[i + 1], rows[i + 1], rows[i], k + 1, cfg, tick, row_ok
                )
            for sub in stream:
                for rest in attach(i + 1):
                    yield (sub,) + rest

        for subs in attach(0):
            cand = WindowNode(rows, subs)
            key = canonical_key(cand)
            if key in seen:
                continue
            seen.add(key)
            if not is_window(cand, ctx):
                continue
            if not is_continuation(cand, w, ctx):
                continue
            yield cand


class _Engine:
    def __init__(self, cfg):
        self.cfg = cfg
        self.stats = SolveStats()
        self.memo = {}
        self.steps = 0
        self.t0 = time.monotonic()
        self.live_ccs = 0
        self.live_windows = 0
        self.live_rows = 0
        self.lassos = []
        self.last_chain = None
        self.trace_root = None

    def tick(self):
        self.steps += 1
        cfg = self.cfg
        if cfg.budget_steps is not None and self.steps > cfg.budget_steps:
            raise BudgetExceeded("step budget exhausted")
        if cfg.budget_seconds is not None and self.steps % 512 == 0:
            if time.monotonic() - self.t0 > cfg.budget_seconds:
                raise BudgetExceeded("time budget exhausted")

    def _peaks(self):
        if self.live_windows > self.stats.peak_live_windows:
            self.stats.peak_live_windows = self.live_windows
        live = self.live_ccs + self.live_rows
        if live > self.stats.peak_live_ccs:
            self.stats.peak_live_ccs = live

    def sat_ccs(self, u, depth_level=1, trace_node=None):
        """Satisfiability of a consistent saturated set."""
        key = frozenset(u)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.tick()
        if depth_level > self.stats.max_sat_depth:
            self.stats.max_sat_depth = depth_level
        self.live_ccs += 1
        self._peaks()
        try:
            out = self._sat_ccs_inner(u, depth_level, trace_node)
        finally:
            self.live_ccs -= 1
        self.memo[key] = out
        return out

    def _diamonds(self, u):
        out = [
            f
            for f in u
            if isinstance(f, Neg) and isinstance(f.sub, Box)
        ]
        out.sort(key=lambda f: f.key)
        return out

    def _sat_ccs_inner(self, u, depth_level, trace_node):
        cfg = self.cfg
        for dia in self._diamonds(u):
            idx = dia.sub.index
            body = neg(dia.sub.sub)
            seed = frozenset({body}) | _proj(idx, u, cfg.mono)
            entry = None
            if trace_node is not None:
                entry = {"diamond": to_str(dia, cfg.mono), "k": idx}
            if cfg.mono and set_depth(u) == 1:
                ok = False
                for v in enumerate_ccs(seed, cfg.ccs_mode == "exhaustive"):
                    self.tick()
                    self.stats.choice_points += 1
                    ok = True
                    if entry is not None:
                        entry["v0"] = [to_str(f, True) for f in sorted_set(v)]
                    break
                if not ok:
                    return False
            elif (not cfg.mono) and idx == cfg.pi:
                ok = False
                for v in enumerate_ccs(seed, cfg.ccs_mode == "exhaustive"):
                    self.tick()
                    self.stats.choice_points += 1
                    child = {"set": [to_str(f) for f in sorted_set(v)]} if entry is not None else None
                    if self.sat_ccs(v, depth_level + 1, child):
                        ok = True
                        if entry is not None:
                            entry["v0"] = [to_str(f) for f in sorted_set(v)]
                            entry["next"] = child
                        break
                    self.stats.backtracks += 1
                if not ok:
                    return False
            else:
                k = 0 if cfg.mono else idx
                ok = False
                for v0 in enumerate_ccs(seed, cfg.ccs_mode == "exhaustive"):
                    self.tick()
                    self.stats.choice_points += 1
                    # v0 sits inside every row 0, so an unsat v0 dooms
                    # every window this branch could build
                    if not self.sat_ccs(v0, depth_level + 1):
                        self.stats.backtracks += 1
                        continue
                    found = False
                    for w in enumerate_windows(
                        u, v0, k, cfg, self.tick, self.row_sat
                    ):
                        self.stats.choice_points += 1
                        self.last_chain = None
                        if self.sat_w(
                            w, u, k, (), self._fresh_counter(), depth_level
                        ):
                            found = True
                            if entry is not None:
                                entry["v0"] = [
                                    to_str(f, cfg.mono) for f in sorted_set(v0)
                                ]
                                entry["window"] = window_to_jsonable(w)
                                if self.last_chain is not None:
                                    entry["chain"] = self.last_chain
                            break
                        self.stats.backtracks += 1
                    if found:
                        ok = True
                        break
                    self.stats.backtracks += 1
                if not ok:
                    return False
            if trace_node is not None and entry is not None:
                trace_node.setdefault("diamonds", []).append(entry)
        return True

    def _fresh_counter(self):
        return self.cfg.counter_bound if self.cfg.loop_mode == "counter" else None

    def row_sat(self, r):
        """Row prune: a row that is itself unsatisfiable can never occur
        in an accepting chain, since every row of a looped chain sits
        inside some head-checked set."""
        return self.sat_ccs(r, 1)

    def sat_w(self, w, u, k, history, counter, depth_level):
        """Chain acceptance for one window.  history is the tuple of
        (key, window) pairs along the current chain in seen mode."""
        self.tick()
        cfg = self.cfg
        if isinstance(w, EmptyWindow):
            return True
        if cfg.mono and set_depth(u) <= 1:
            return True
        n = len(w.rows) - 1
        if n == 0:
            return self.sat_ccs(w.rows[0], depth_level + 1)

        if cfg.loop_mode == "seen":
            key = canonical_key(w)
            for pos, (old_key, _) in enumerate(history):
                if old_key == key:
                    self.stats.loops_detected += 1
                    self.lassos.append((pos, len(history) - pos))
                    if cfg.loop_observer is not None:
                        cfg.loop_observer(
                            [win for _, win in history] + [w], pos, u, k
                        )
                    if cfg.trace:
                        self.last_chain = {
                            "windows": [
                                window_to_jsonable(win) for _, win in history
                            ],
                            "loop_to": pos,
                        }
                    return True
        else:
            if counter == 0:
                return True

        self.live_windows += 1
        self.live_rows += n + 1
        self._peaks()
        try:
            head_ok = self.sat_ccs(w.rows[0], depth_level + 1)
            if head_ok:
                head_ok = self.sat_w(
                    w.subs[0],
                    w.rows[1],
                    k + 1,
                    (),
                    self._fresh_counter(),
                    depth_level + 1,
                )
        finally:
            self.live_windows -= 1
            self.live_rows -= n + 1
        if not head_ok:
            return False

        new_history = history + ((canonical_key(w), w),) if cfg.loop_mode == "seen" else history
        next_counter = counter - 1 if counter is not None else None
        for w2 in enumerate_continuations(w, u, k, cfg, self.tick, self.row_sat):
            self.stats.continuation_steps += 1
            self.stats.choice_points += 1
            if cfg.continuation_observer is not None:
                cfg.continuation_observer(w, w2, u, k)
            if self.sat_w(w2, u, k, new_history, next_counter, depth_level):
                return True
            self.stats.backtracks += 1
        return False


def solve_sat(f, cfg):
    """Satisfiability verdict for a formula under cfg."""
    engine = _Engine(cfg)
    t0 = time.monotonic()
    trace_root = {"formula": to_str(f, cfg.mono)} if cfg.trace else None
    found = False
    for u in enumerate_ccs(
        frozenset({f}), cfg.ccs_mode == "exhaustive"
    ):
        engine.tick()
        engine.stats.choice_points += 1
        node = {"set": [to_str(g, cfg.mono) for g in sorted_set(u)]} if cfg.trace else None
        if engine.sat_ccs(u, 1, node):
            found = True
            if trace_root is not None:
                trace_root["root"] = node
            break
        engine.stats.backtracks += 1
    engine.stats.wall_time = time.monotonic() - t0
    lasso = None
    if found and engine.lassos:
        lasso = [[p, l] for p, l in engine.lassos]
    trace = None
    if trace_root is not None:
        trace_root["result"] = "sat" if found else "unsat"
        trace = trace_root
    return Verdict(
        "sat" if found else "unsat", engine.stats, trace=trace, lasso=lasso
    )


def sat_ccs(u, cfg):
    """Satisfiability of a consistent saturated set under cfg."""
    return _Engine(cfg).sat_ccs(frozenset(u))


def sat_w(w, u, k, history, cfg, counter=None):
    """Chain acceptance for a window against history (pairs of
    (canonical_key, window)); exposed for tests."""
    engine = _Engine(cfg)
    if counter is None and cfg.loop_mode == "counter":
        counter = cfg.counter_bound
    return engine.sat_w(w, frozenset(u), k, tuple(history), counter, 1)


def solve_valid(f, cfg):
    """Validity verdict: f is valid when its negation is unsatisfiable."""
    v = solve_sat(neg(f), cfg)
    result = "valid" if v.result == "unsat" else "invalid"
    return Verdict(result, v.stats, trace=v.trace, lasso=v.lasso)


def solve_mono(f, cfg):
    """Single-modality entry point; cfg.mode must be kde-mono."""
    if not cfg.mono:
        raise ValueError("solve_mono needs mode=kde-mono")
    return solve_sat(f, cfg)
