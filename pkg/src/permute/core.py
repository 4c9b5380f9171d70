"""Shared vocabulary for the checker: transitions, visible objects, the
mirrored program state, clock vectors, and the framework rules that combine
per-transition attribute claims into the relations the search engine uses.

Every synchronization primitive is expressed as a family of `Transition`
subclasses acting on `VisibleObject` subclasses.  A transition declares only
its *own* relations: the framework combines two transitions' claims with OR
for dependence (either side may assert a conflict) and AND for co-enabledness
(either side may veto).  Claims are written under the framework guarantee
that the other transition runs on a different thread and does not create or
join the claiming transition's thread; those cases are handled here, once.
"""

from __future__ import annotations

import hashlib
import json
from typing import Iterator, Optional

ThreadId = int
ObjectId = int

# Thread status values stored in ModelState.  "blocked" is derived:
# a runnable thread whose pending transition is not enabled.
EMBRYO = "embryo"
RUNNABLE = "runnable"
EXITED = "exited"


class VisibleObject:
    """State mirror of one synchronization object (mutex, semaphore, ...).

    Created once, on first encounter of an operation naming it, and carried
    through every snapshot from then on.  Subclasses hold the kind-specific
    fields and must implement `clone` and `snapshot`.
    """

    kind = "object"
    __slots__ = ("oid", "name")

    def __init__(self, oid: ObjectId, name: str):
        self.oid = oid
        self.name = name

    def clone(self) -> "VisibleObject":
        raise NotImplementedError

    def snapshot(self) -> tuple:
        """Canonical, order-stable summary of the object state."""
        raise NotImplementedError


class Transition:
    """One visible operation by one thread, plus its search attributes.

    Subclasses override:
      enabled_in(state)    -- can this operation complete right now?
      depends_with(other)  -- this transition's own dependence claims
      coenabled_with(other)-- this transition's own co-enabledness claims
      apply_to(state)      -- produce the successor state (snapshot style)

    The defaults are the conservative ones: everything is dependent and
    co-enabled with everything, enabled always, apply does nothing.  A new
    primitive only has to narrow the claims it understands; unknown future
    transition kinds are then handled soundly.
    """

    kind = "op"

    # thread_target: the thread created or joined by this transition, if
    # any -- consulted by the framework create/join dependence rule.
    __slots__ = ("executor", "oid", "object_name", "payload", "thread_target")

    def __init__(self, executor: ThreadId, oid: Optional[ObjectId] = None,
                 object_name: Optional[str] = None, payload: tuple = ()):
        self.executor = executor
        self.oid = oid
        self.object_name = object_name
        self.payload = payload
        self.thread_target: Optional[ThreadId] = None

    # -- search attributes -------------------------------------------------

    def enabled_in(self, state: "ModelState") -> bool:
        return True

    def depends_with(self, other: "Transition") -> bool:
        return True

    def coenabled_with(self, other: "Transition") -> bool:
        return True

    def apply_to(self, state: "ModelState") -> "ModelState":
        return state.clone()

    # -- optional hooks ----------------------------------------------------

    def result_in(self, state: "ModelState"):
        """Value delivered back to the executing thread's body (reads)."""
        return None

    def usage_error(self, state: "ModelState") -> Optional[str]:
        """Misuse diagnostic (e.g. unlock by non-owner); a trace finding."""
        return None

    def assertion_failure(self, state: "ModelState") -> Optional[str]:
        """Failure message when this transition checks a predicate."""
        return None

    def mutex_owner_refs(self) -> tuple:
        """ObjectIds of mutexes whose ownership this transition reads/writes."""
        return ()

    def mutex_queue_refs(self) -> tuple:
        """ObjectIds of mutexes whose wait queue this transition mutates."""
        return ()

    # -- identity ----------------------------------------------------------

    def triple(self) -> tuple:
        """(executor, kind, object key): the identity used by sleep sets."""
        return (self.executor, self.kind, self.object_key())

    def object_key(self):
        return self.oid if self.oid is not None else self.object_name

    def same_object(self, other: "Transition") -> bool:
        key = self.object_key()
        return key is not None and key == other.object_key()

    def __repr__(self):
        obj = self.object_name or ""
        return f"<{self.kind} {obj} by T{self.executor}>"


# ---------------------------------------------------------------------------
# Framework combination rules
# ---------------------------------------------------------------------------


def dependent(a: Transition, b: Transition) -> bool:
    """Symmetric dependence: same thread, create/join pairing, or either claim."""
    if a.executor == b.executor:
        return True
    if a.thread_target == b.executor or b.thread_target == a.executor:
        return True
    return a.depends_with(b) or b.depends_with(a)


def coenabled(a: Transition, b: Transition) -> bool:
    """Symmetric co-enabledness: a thread has one next transition, and
    either side may veto the pair (AND of the two claims)."""
    if a.executor == b.executor:
        return False
    return a.coenabled_with(b) and b.coenabled_with(a)


# ---------------------------------------------------------------------------
# Clock vectors (happens-before timestamps over trace indices)
# ---------------------------------------------------------------------------


class ClockVector:
    """Map thread id -> 1-based trace step number, default 0 when absent.

    Entries only grow along a trace; `merged` is the componentwise max.
    """

    __slots__ = ("entries",)

    def __init__(self, entries: Optional[dict] = None):
        self.entries = entries or {}

    def get(self, tid: ThreadId) -> int:
        return self.entries.get(tid, 0)

    def merged(self, other: "ClockVector") -> "ClockVector":
        if not other.entries:
            return self
        if not self.entries:
            return other
        out = dict(self.entries)
        for tid, k in other.entries.items():
            if k > out.get(tid, 0):
                out[tid] = k
        return ClockVector(out)

    def with_entry(self, tid: ThreadId, step: int) -> "ClockVector":
        out = dict(self.entries)
        out[tid] = step
        return ClockVector(out)

    def __eq__(self, other):
        return isinstance(other, ClockVector) and self.entries == other.entries

    def __repr__(self):
        return f"ClockVector({self.entries!r})"


EMPTY_CLOCK = ClockVector()


def happens_before(i: int, trace: list, thread_clocks: dict, t: Transition) -> bool:
    """Is trace step i (0-based) in the causal past of t.executor's next step?

    thread_clocks maps thread id -> clock of that thread's last executed
    transition (seeded with the creator's clock at create time).
    """
    if not 0 <= i < len(trace):
        raise IndexError(f"trace index {i} out of range")
    clock = thread_clocks.get(t.executor, EMPTY_CLOCK)
    return (i + 1) <= clock.get(trace[i].executor)


# ---------------------------------------------------------------------------
# Model state
# ---------------------------------------------------------------------------


class ThreadInfo:
    __slots__ = ("status", "pending", "executed")

    def __init__(self, status: str = EMBRYO, pending: Optional[Transition] = None,
                 executed: int = 0):
        self.status = status
        self.pending = pending
        self.executed = executed

    def clone(self) -> "ThreadInfo":
        return ThreadInfo(self.status, self.pending, self.executed)


class ModelState:
    """The checker's mirror of the program: visible objects, per-thread
    status and pending transition, shared variables, spurious-wakeup use.

    Treated as an immutable snapshot by the engine; `apply_to` clones before
    mutating, so stored pre-states stay valid for backtracking.
    """

    __slots__ = ("objects", "threads", "shared_vars", "spurious_used")

    def __init__(self, objects: Optional[dict] = None, threads: Optional[dict] = None,
                 shared_vars: Optional[dict] = None, spurious_used: Optional[dict] = None):
        self.objects = objects if objects is not None else {}
        self.threads = threads if threads is not None else {}
        self.shared_vars = shared_vars if shared_vars is not None else {}
        self.spurious_used = spurious_used if spurious_used is not None else {}

    def clone(self) -> "ModelState":
        return ModelState(
            {oid: obj.clone() for oid, obj in self.objects.items()},
            {tid: ti.clone() for tid, ti in self.threads.items()},
            dict(self.shared_vars),
            dict(self.spurious_used),
        )

    def thread(self, tid: ThreadId) -> ThreadInfo:
        return self.threads[tid]

    def obj(self, oid: ObjectId) -> VisibleObject:
        return self.objects[oid]

    def enabled_threads(self, budget: Optional[int] = None) -> list:
        """Thread ids whose pending transition can execute now, in id order.

        A thread at the per-thread depth budget is artificially disabled,
        except for its exit bookkeeping step.
        """
        out = []
        for tid in sorted(self.threads):
            ti = self.threads[tid]
            if ti.status != RUNNABLE or ti.pending is None:
                continue
            if budget is not None and ti.executed >= budget and ti.pending.kind != "exit":
                continue
            if ti.pending.enabled_in(self):
                out.append(tid)
        return out

    def pending_of(self, tid: ThreadId) -> Optional[Transition]:
        return self.threads[tid].pending

    def live_threads(self) -> Iterator[ThreadId]:
        return (tid for tid, ti in self.threads.items() if ti.status == RUNNABLE)


# ---------------------------------------------------------------------------
# Fingerprints
# ---------------------------------------------------------------------------


def canonical_transition(t: Optional[Transition]) -> list:
    if t is None:
        return []
    return [t.kind, -1 if t.oid is None else t.oid, t.object_name or "",
            [str(p) for p in t.payload]]


def canonical_state(s: ModelState) -> dict:
    """Order-independent structural summary used for fingerprinting."""
    return {
        "objects": [
            [oid, s.objects[oid].kind, s.objects[oid].name, list(s.objects[oid].snapshot())]
            for oid in sorted(s.objects)
        ],
        "threads": [
            [tid, s.threads[tid].status, s.threads[tid].executed,
             canonical_transition(s.threads[tid].pending)]
            for tid in sorted(s.threads)
        ],
        "vars": sorted(s.shared_vars.items()),
        "spurious": sorted(s.spurious_used.items()),
    }


def fingerprint(s: ModelState) -> str:
    """Digest of the canonical serialization; equal states hash equally
    regardless of map insertion order or the path taken to reach them."""
    blob = json.dumps(canonical_state(s), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
