"""Oracle sequential algorithms and their fuel-bounded executor.

A machine is anything exposing the small protocol used by :func:`run`:
``initial``, ``is_end``, ``query_channel``, ``question``, ``answered``,
``transition``, ``output`` and ``render_state``. :class:`OsaSpec` is the
single-oracle implementation; lifted machines in :mod:`seqalg.dclift`
implement the same protocol with two oracle channels.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Union

from .values import EMPTY, render_value, to_json


@dataclass(frozen=True)
class MachineState:
    """A register paired with an answer cell, written ``⟨r | o⟩``."""

    register: Any
    cell: Any = EMPTY

    @property
    def empty(self) -> bool:
        return self.cell is EMPTY

    def answered(self, y) -> "MachineState":
        return MachineState(self.register, y)

    def render(self) -> str:
        r = self.register
        inner = ",".join(render_value(x) for x in r) if isinstance(r, tuple) else render_value(r)
        return f"⟨{inner} | {render_value(self.cell)}⟩"

    def to_json(self):
        return {"register": to_json(self.register), "cell": to_json(self.cell)}


def _never(state) -> bool:
    return False


def _identity(x):
    return x


@dataclass(frozen=True, kw_only=True)
class OsaSpec:
    """An oracle sequential algorithm of sort U, V, X, Y.

    ``step`` is partial: it returns ``None`` where the transition is
    undefined. ``pi`` defaults to ``xi`` of the register, which is what an
    approximation algorithm requires. An explicit (oracle-free) algorithm
    leaves ``is_query`` at its default and sets ``oracle_free``.
    """

    step: Callable[[MachineState], Optional[MachineState]]
    is_end: Callable[[MachineState], bool]
    rho: Callable[[Any], Any] = _identity
    is_query: Callable[[MachineState], bool] = _never
    xi: Optional[Callable[[Any], Any]] = None
    pi: Optional[Callable[[MachineState], Any]] = None
    name: str = "osa"
    oracle_free: bool = False
    # enumerates a declared finite slice of the state space, by size bound
    states: Optional[Callable[[int], Iterable[MachineState]]] = field(default=None, compare=False)

    channel_count = 1
    step_symbol = "▷"

    def initial(self, u) -> MachineState:
        return MachineState(self.rho(u), EMPTY)

    def query_channel(self, state) -> Optional[int]:
        return 1 if self.is_query(state) else None

    def question(self, state):
        if self.xi is None:
            raise TypeError(f"{self.name} has no query map")
        return self.xi(state.register)

    def answered(self, state, channel, y):
        return state.answered(y)

    def transition(self, state):
        nxt = self.step(state)
        return None if nxt is None else (nxt, None)

    def output(self, state):
        if self.pi is not None:
            return self.pi(state)
        if self.xi is not None:
            return self.xi(state.register)
        return state.register

    def render_state(self, state) -> str:
        if self.oracle_free:
            return render_value(state.register)
        return state.render()

    def state_json(self, state):
        if self.oracle_free:
            return to_json(state.register)
        return state.to_json()


@dataclass(frozen=True)
class Oracle:
    """A total, pure function answering queries."""

    answer: Callable[[Any], Any]
    name: str = "f"

    def __call__(self, x):
        return self.answer(x)

    @property
    def channels(self):
        return (self,)


class Kind(enum.Enum):
    INITIAL = "initial"
    STEP = "step"
    QUERY = "query"


@dataclass(frozen=True)
class TraceEntry:
    state: Any
    kind: Kind
    question: Any = None
    answer: Any = None
    channel: Optional[int] = None
    rule: Optional[str] = None


@dataclass(frozen=True)
class Trace:
    entries: tuple
    steps_used: int

    @property
    def states(self) -> list:
        return [e.state for e in self.entries]

    @property
    def final(self):
        return self.entries[-1].state

    def queries(self, channel: Optional[int] = None) -> list[TraceEntry]:
        return [
            e for e in self.entries
            if e.kind is Kind.QUERY and (channel is None or e.channel == channel)
        ]

    def calls(self, channel: Optional[int] = None) -> list[tuple]:
        """The (question, answer) call log of one run."""
        return [(e.question, e.answer) for e in self.queries(channel)]


@dataclass(frozen=True)
class Terminated:
    final: Any
    trace: Trace


@dataclass(frozen=True)
class FuelExhausted:
    trace: Trace


@dataclass(frozen=True)
class Stuck:
    state: Any
    trace: Trace


RunOutcome = Union[Terminated, FuelExhausted, Stuck]


class NonTermination(RuntimeError):
    """Fuel ran out before an end state was reached."""

    def __init__(self, trace: Trace):
        super().__init__(f"no end state within {trace.steps_used} steps")
        self.trace = trace


class MachineStuck(RuntimeError):
    """The transition function is undefined at a non-query, non-end state."""

    def __init__(self, state, trace: Trace):
        super().__init__(f"stuck at {render_value(state)}")
        self.state = state
        self.trace = trace


def expect_terminated(outcome: RunOutcome) -> Terminated:
    if isinstance(outcome, Terminated):
        return outcome
    if isinstance(outcome, Stuck):
        raise MachineStuck(outcome.state, outcome.trace)
    raise NonTermination(outcome.trace)


class Halt(enum.Enum):
    END = "end"
    STUCK = "stuck"


@dataclass(frozen=True)
class Next:
    state: Any
    entry: TraceEntry


class _Session:
    """Per-run call logs; memoizes each channel so answers stay functional."""

    def __init__(self, oracle):
        self.channels = () if oracle is None else tuple(oracle.channels)
        self.memo = [dict() for _ in self.channels]

    def ask(self, channel: int, x):
        if not 1 <= channel <= len(self.channels):
            raise ValueError(f"machine queried oracle channel {channel}, "
                             f"but {len(self.channels)} oracle(s) supplied")
        memo = self.memo[channel - 1]
        try:
            return memo[x]
        except KeyError:
            y = memo[x] = self.channels[channel - 1](x)
            return y
        except TypeError:  # unhashable question
            return self.channels[channel - 1](x)


def step_once(spec, oracle, state) -> Union[Next, Halt]:
    """One transition: an oracle query if the state asks one, else a step."""
    session = oracle if isinstance(oracle, _Session) else _Session(oracle)
    if spec.is_end(state):
        return Halt.END
    channel = spec.query_channel(state)
    if channel is not None:
        x = spec.question(state)
        y = session.ask(channel, x)
        nxt = spec.answered(state, channel, y)
        return Next(nxt, TraceEntry(nxt, Kind.QUERY, x, y, channel))
    moved = spec.transition(state)
    if moved is None:
        return Halt.STUCK
    nxt, rule = moved
    return Next(nxt, TraceEntry(nxt, Kind.STEP, rule=rule))


def run_from(spec, oracle, state, fuel: int) -> RunOutcome:
    if fuel < 1:
        raise ValueError("fuel must be at least 1")
    session = _Session(oracle)
    entries = [TraceEntry(state, Kind.INITIAL)]
    steps = 0
    while True:
        if spec.is_end(state):
            return Terminated(state, Trace(tuple(entries), steps))
        if steps >= fuel:
            return FuelExhausted(Trace(tuple(entries), steps))
        res = step_once(spec, session, state)
        if res is Halt.STUCK:
            return Stuck(state, Trace(tuple(entries), steps))
        steps += 1
        entries.append(res.entry)
        state = res.state


def run(spec, oracle, u, fuel: int) -> RunOutcome:
    """Run ``spec`` from the input state for ``u``, spending at most ``fuel`` transitions."""
    return run_from(spec, oracle, spec.initial(u), fuel)


def induced(spec, oracle, u, fuel: int):
    """The value of the induced partial functional, or ``None`` if undefined within fuel."""
    if fuel < 1:
        return None
    outcome = run(spec, oracle, u, fuel)
    if isinstance(outcome, Terminated):
        return spec.output(outcome.final)
    return None


def query_sequence(trace: Trace, channel: Optional[int] = None) -> list:
    return [e.question for e in trace.queries(channel)]


def mind_change_count(trace: Trace, channel: Optional[int] = None) -> int:
    return max(len(trace.queries(channel)) - 1, 0)


@dataclass(frozen=True)
class ContinuityVerdict:
    holds: bool
    agrees_on_queries: bool
    queries: tuple
    detail: str = ""
    divergence: Optional[int] = None


def check_continuity(spec, u, f, g, fuel: int) -> ContinuityVerdict:
    """Check that ``g`` reproduces the ``f``-run whenever it agrees on its queries.

    When ``g`` disagrees somewhere on the query sequence the verdict holds
    vacuously and ``agrees_on_queries`` is false.
    """
    first = expect_terminated(run(spec, f, u, fuel))
    session = _Session(f)
    other = _Session(g)
    questions = []
    for e in first.trace.queries():
        questions.append(e.question)
        if other.ask(e.channel, e.question) != session.ask(e.channel, e.question):
            return ContinuityVerdict(True, False, tuple(questions),
                                     f"g differs from f at {render_value(e.question)}")
    second = run(spec, g, u, fuel)
    if not isinstance(second, Terminated):
        return ContinuityVerdict(False, True, tuple(questions), "g-run did not terminate")
    a, b = first.trace.entries, second.trace.entries
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return ContinuityVerdict(False, True, tuple(questions),
                                     f"runs diverge at entry {i}", i)
    if len(a) != len(b):
        return ContinuityVerdict(False, True, tuple(questions),
                                 "runs differ in length", min(len(a), len(b)))
    return ContinuityVerdict(True, True, tuple(questions))


# --- serialization -------------------------------------------------------

_SUBSCRIPTS = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")


def entry_tag(spec, entry: TraceEntry) -> str:
    if entry.kind is Kind.INITIAL:
        return "init"
    if entry.kind is Kind.QUERY:
        if getattr(spec, "channel_count", 1) == 1:
            return "▷f"
        return "▷" + str(entry.channel).translate(_SUBSCRIPTS)
    tag = getattr(spec, "step_symbol", "▷")
    return f"{tag}({entry.rule})" if entry.rule else tag


def trace_to_text(spec, trace: Trace) -> str:
    """One line per state; query lines carry ``? x -> y``."""
    lines = []
    for e in trace.entries:
        line = f"{entry_tag(spec, e)} {spec.render_state(e.state)}"
        if e.kind is Kind.QUERY:
            line += f"  ? {render_value(e.question)} -> {render_value(e.answer)}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def trace_to_json(spec, trace: Trace) -> dict:
    entries = []
    for e in trace.entries:
        item = {"state": spec.state_json(e.state), "kind": e.kind.value,
                "text": spec.render_state(e.state)}
        if e.kind is Kind.QUERY:
            item["question"] = to_json(e.question)
            item["answer"] = to_json(e.answer)
            item["channel"] = e.channel
        if e.rule is not None:
            item["rule"] = e.rule
        entries.append(item)
    return {"entries": entries, "steps_used": trace.steps_used}


def outcome_name(outcome: RunOutcome) -> str:
    return {Terminated: "terminated", FuelExhausted: "fuel-exhausted", Stuck: "stuck"}[type(outcome)]
