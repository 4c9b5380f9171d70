"""Depth-first interleaving exploration with dynamic partial order reduction.

The search keeps one frame per executed step: the pre-state snapshot, the
enabled set, the backtrack and done sets, and the sleep set.  At every new
frontier it computes backtrack points for the pending transition of each
enabled thread (the full Flanagan-Godefroid form), runs the lowest eligible
thread id, and descends.  Finished subtrees push their transition into the
frame's sleep set so sibling branches skip reorderings that are already
covered.  Backtracking restores model state from snapshots and repositions
the thread bodies by deterministic prefix re-execution.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

from .core import (
    EMPTY_CLOCK,
    RUNNABLE,
    ClockVector,
    ModelState,
    ThreadId,
    Transition,
    coenabled,
    dependent,
    fingerprint,
    happens_before,
)
from .runtime import (
    BuildContext,
    Program,
    ReplayCursor,
    RuntimeSession,
    ScheduleStep,
    execute_step,
    initial_state,
    schedule_step,
)

# Trace verdicts.
COMPLETED = "completed"
DEADLOCK = "deadlock"
BUDGET_EXHAUSTED = "budget_exhausted"
BLOCKED = "blocked"                  # every enabled transition was asleep
STOPPED_ON_FAILURE = "stopped_on_failure"


@dataclass
class ExplorationConfig:
    max_depth_per_thread: Optional[int] = None
    stop_at_first_deadlock: bool = False
    sleep_sets_enabled: bool = True
    max_spurious_wakeups: int = 0
    policy_overrides: dict = field(default_factory=dict)
    stop_at_first_failure: bool = False
    keep_all_traces: bool = False

    def __post_init__(self):
        if self.max_depth_per_thread is not None and self.max_depth_per_thread < 1:
            raise ValueError("max_depth_per_thread must be >= 1 when set")


@dataclass
class ExplorationReport:
    total_transitions: int = 0
    traces: int = 0
    deadlocks: int = 0
    first_deadlock_trace: Optional[int] = None
    assertion_failures: list = field(default_factory=list)   # (trace idx, message)
    data_races: list = field(default_factory=list)           # (var, (tid, tid), trace idx)
    budget_exhausted_traces: int = 0
    # Extra findings kept alongside the fixed report surface:
    usage_errors: list = field(default_factory=list)
    crashes: list = field(default_factory=list)
    blocked_traces: int = 0
    completed_traces: int = 0

    def has_findings(self) -> bool:
        return bool(self.deadlocks or self.assertion_failures or self.data_races
                    or self.usage_errors or self.crashes)


@dataclass
class TraceResult:
    """One finished trace, as handed to observers and the trace store."""

    index: int
    verdict: str
    fingerprint: str
    schedule: list            # ScheduleStep per executed step
    findings: list            # (category, message) found on this trace's new edges


class StackEntry:
    """One depth-first-search frame."""

    __slots__ = ("pre_state", "enabled", "backtrack", "done", "sleep",
                 "chosen", "thread_clocks", "initialized")

    def __init__(self, pre_state: ModelState, sleep: dict, thread_clocks: dict):
        self.pre_state = pre_state
        self.enabled: list = []
        self.backtrack: set = set()
        self.done: set = set()
        self.sleep = sleep                  # triple -> Transition
        self.chosen: Optional[ThreadId] = None
        self.thread_clocks = thread_clocks  # tid -> clock of its last step
        self.initialized = False


def select_next(entry: StackEntry) -> Optional[ThreadId]:
    """Smallest backtrack candidate not yet explored and not asleep."""
    for tid in sorted(entry.backtrack - entry.done):
        pending = entry.pre_state.pending_of(tid)
        if pending is not None and pending.triple() not in entry.sleep:
            return tid
    return None


def propagate_sleep_set(sleep: dict, executed: Transition) -> dict:
    """Initial sleep set of the child frame: entries still independent of
    the transition just executed."""
    return {k: t for k, t in sleep.items() if not dependent(t, executed)}


def update_backtrack_sets(stack: list, trace: list, frontier: StackEntry,
                          next_t: Transition) -> None:
    """Add a backtrack point at the pre-state of the latest transition that
    is dependent with, co-enabled with, and not causally before `next_t`."""
    for i in range(len(trace) - 1, -1, -1):
        prior = trace[i]
        if not dependent(prior, next_t):
            continue
        if not coenabled(prior, next_t):
            continue
        if happens_before(i, trace, frontier.thread_clocks, next_t):
            continue
        entry = stack[i]
        if next_t.executor in entry.enabled:
            entry.backtrack.add(next_t.executor)
        else:
            entry.backtrack.update(entry.enabled)
        return


def classify_endstate(state: ModelState, config: ExplorationConfig) -> str:
    """No thread is enabled: normal completion, true deadlock, or a cut by
    the per-thread budget.

    A blocked thread may only be waiting on work a budget-disabled thread
    would still have done, so an end state is a deadlock only when no live
    thread was artificially disabled by the budget.
    """
    live = [tid for tid, ti in state.threads.items() if ti.status == RUNNABLE]
    if not live:
        return COMPLETED
    budget = config.max_depth_per_thread
    if budget is not None and any(state.threads[tid].executed >= budget for tid in live):
        return BUDGET_EXHAUSTED
    return DEADLOCK


class _Search:
    def __init__(self, program: Program, config: ExplorationConfig,
                 trace_sink: Optional[Callable] = None,
                 observer: Optional[Callable] = None):
        self.program = program
        self.config = config
        self.trace_sink = trace_sink
        self.observer = observer
        self.report = ExplorationReport()
        self.ctx = BuildContext(program, None, config.policy_overrides,
                                config.max_spurious_wakeups)
        self.session = RuntimeSession(program, self.ctx)
        state0 = initial_state(program, self.session, self.ctx)
        self.stack = [StackEntry(state0, {}, {0: EMPTY_CLOCK})]
        self.trace: list = []
        self.step_clocks: list = []
        self.session_fresh = True
        self.race_seen: set = set()
        self.segment_findings: list = []
        self.stop = False

    # -- trace bookkeeping ---------------------------------------------

    def _end_trace(self, end_state: ModelState, verdict: str) -> None:
        report = self.report
        idx = report.traces
        report.traces += 1
        # Transition work is counted per finished schedule, prefix included:
        # every trace re-executes its whole path (the engine replays prefixes
        # when it backtracks), so this is the number of transitions actually
        # run to finish model checking.  Exit bookkeeping steps don't count.
        report.total_transitions += sum(1 for t in self.trace if t.kind != "exit")
        if verdict == DEADLOCK:
            report.deadlocks += 1
            if report.first_deadlock_trace is None:
                report.first_deadlock_trace = idx
            if self.config.stop_at_first_deadlock:
                self.stop = True
        elif verdict == BUDGET_EXHAUSTED:
            report.budget_exhausted_traces += 1
        elif verdict == BLOCKED:
            report.blocked_traces += 1
        elif verdict == COMPLETED:
            report.completed_traces += 1

        findings = self.segment_findings
        self.segment_findings = []
        interesting = verdict in (DEADLOCK, STOPPED_ON_FAILURE) or bool(findings)
        if self.observer is not None or (self.trace_sink is not None and
                                         (self.config.keep_all_traces or interesting)):
            result = TraceResult(idx, verdict, fingerprint(end_state),
                                 [schedule_step(t) for t in self.trace],
                                 list(findings))
            if self.observer is not None:
                self.observer(result)
            if self.trace_sink is not None and (self.config.keep_all_traces or interesting):
                self.trace_sink(result)

    def _record_step_findings(self, findings) -> None:
        idx = self.report.traces
        for f in findings:
            if f.category == "assert":
                self.report.assertion_failures.append((idx, f.message))
            elif f.category == "usage":
                self.report.usage_errors.append((idx, f.message))
            else:
                self.report.crashes.append((idx, f.message))
            self.segment_findings.append((f.category, f.message))

    def _scan_races(self, frame: StackEntry) -> None:
        accesses = {}
        for tid in frame.enabled:
            pending = frame.pre_state.pending_of(tid)
            if pending.kind in ("read", "write"):
                accesses.setdefault(pending.object_name, []).append((tid, pending.kind))
        idx = self.report.traces
        for var in sorted(accesses):
            pairs = accesses[var]
            for (t1, k1), (t2, k2) in itertools.combinations(pairs, 2):
                if k1 == "read" and k2 == "read":
                    continue
                key = (var, frozenset((k1, k2)))
                if key in self.race_seen:
                    continue
                self.race_seen.add(key)
                self.report.data_races.append((var, (t1, t2), idx))
                self.segment_findings.append(
                    ("race", f"{var}: {k1} by thread {t1} vs {k2} by thread {t2}"))

    def _update_candidates(self, frame: StackEntry) -> list:
        budget = self.config.max_depth_per_thread
        out = []
        for tid in sorted(frame.pre_state.threads):
            ti = frame.pre_state.threads[tid]
            if ti.status != RUNNABLE or ti.pending is None:
                continue
            # A budget-disabled thread has no further transition in the
            # truncated program, so it creates no backtrack points.
            if budget is not None and ti.executed >= budget and ti.pending.kind != "exit":
                continue
            out.append(tid)
        return out

    # -- session repositioning -------------------------------------------

    def _resync_session(self) -> None:
        cursor = ReplayCursor(self.program,
                              policy_overrides=self.config.policy_overrides,
                              max_spurious=self.config.max_spurious_wakeups,
                              budget=self.config.max_depth_per_thread,
                              registry=self.ctx.registry)
        for t in self.trace:
            cursor.step(schedule_step(t))
        # Findings raised during re-execution were recorded when the edge
        # was first executed; a replay must not double-count them.
        self.session = cursor.session
        self.session_fresh = True

    # -- main loop ---------------------------------------------------------

    def run(self) -> ExplorationReport:
        config = self.config
        while self.stack and not self.stop:
            frame = self.stack[-1]
            if not frame.initialized:
                frame.initialized = True
                frame.enabled = frame.pre_state.enabled_threads(config.max_depth_per_thread)
                if not frame.enabled:
                    self._end_trace(frame.pre_state, classify_endstate(frame.pre_state, config))
                    self._pop()
                    continue
                self._scan_races(frame)
                # Backtrack points are computed for the pending transition of
                # every live thread, enabled or not: a blocked transition can
                # still race with the step that blocked it, and its
                # alternative ordering must be scheduled at that older frame.
                for tid in self._update_candidates(frame):
                    update_backtrack_sets(self.stack, self.trace, frame,
                                          frame.pre_state.pending_of(tid))
                seed = None
                for tid in frame.enabled:
                    if frame.pre_state.pending_of(tid).triple() not in frame.sleep:
                        seed = tid
                        break
                if seed is None:
                    self._end_trace(frame.pre_state, BLOCKED)
                    self._pop()
                    continue
                frame.backtrack.add(seed)

            tid = select_next(frame)
            if tid is None:
                self._pop()
                continue
            if not self.session_fresh:
                self._resync_session()
            self._execute(frame, tid)
        return self.report

    def _pop(self) -> None:
        self.stack.pop()
        if not self.stack:
            return
        executed = self.trace.pop()
        self.step_clocks.pop()
        if self.config.sleep_sets_enabled:
            self.stack[-1].sleep[executed.triple()] = executed
        self.session_fresh = False

    def _execute(self, frame: StackEntry, tid: ThreadId) -> None:
        outcome = execute_step(self.session, frame.pre_state, tid, self.ctx)
        t = outcome.transition
        frame.chosen = tid
        frame.done.add(tid)
        self._record_step_findings(outcome.findings)

        # Clock vector of this step: max of the thread's previous clock and
        # the clocks of all earlier dependent steps, then its own entry.
        clock = frame.thread_clocks.get(tid, EMPTY_CLOCK)
        for j, prior in enumerate(self.trace):
            if dependent(prior, t):
                clock = clock.merged(self.step_clocks[j])
        clock = clock.with_entry(tid, len(self.trace) + 1)
        child_clocks = dict(frame.thread_clocks)
        child_clocks[tid] = clock
        if t.kind == "create":
            # The child's first transition causally follows its creation.
            child_clocks[t.thread_target] = clock

        child_sleep = (propagate_sleep_set(frame.sleep, t)
                       if self.config.sleep_sets_enabled else {})
        self.trace.append(t)
        self.step_clocks.append(clock)
        self.stack.append(StackEntry(outcome.state, child_sleep, child_clocks))

        if self.config.stop_at_first_failure and any(
                f.category == "assert" for f in outcome.findings):
            self._end_trace(outcome.state, STOPPED_ON_FAILURE)
            self.stop = True


def explore(program: Program, config: Optional[ExplorationConfig] = None,
            trace_sink: Optional[Callable] = None,
            observer: Optional[Callable] = None) -> ExplorationReport:
    """Explore every schedule of `program` modulo independent reordering.

    `trace_sink` receives TraceResults selected for persistence (findings
    only, or everything under keep_all_traces); `observer`, when given,
    receives every finished trace.
    """
    if config is None:
        config = ExplorationConfig()
    return _Search(program, config, trace_sink, observer).run()


__all__ = [
    "BLOCKED", "BUDGET_EXHAUSTED", "COMPLETED", "DEADLOCK", "STOPPED_ON_FAILURE",
    "ExplorationConfig", "ExplorationReport", "StackEntry", "TraceResult",
    "classify_endstate", "explore", "propagate_sleep_set", "select_next",
    "update_backtrack_sets",
]
