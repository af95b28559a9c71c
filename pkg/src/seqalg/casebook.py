"""Ready-made machines: Euclid, bounded max, a halting-style realizer, the
least element principle and the infinite tape pipeline."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .approx import DecidablePredicate
from .cfg import GREATER, DescentOrder, FlowGraph
from .dclift import MultiOracle, OmegaSpec, OmegaState, PaddedSequence, lift, run_omega
from .engine import MachineState, OsaSpec, Trace, expect_terminated
from .values import EMPTY


def _cells(bound: int):
    return [EMPTY] + list(range(bound + 1))


# --- Euclid -----------------------------------------------------------------

def _euclid_step(s: MachineState):
    x, y = s.register
    return MachineState((y, x % y)) if y else None


def euclid_machine() -> OsaSpec:
    """gcd by repeated remainders; an explicit algorithm, no oracle."""
    return OsaSpec(
        rho=lambda ab: (max(ab), min(ab)),
        step=_euclid_step,
        is_end=lambda s: s.register[1] == 0,
        pi=lambda s: s.register[0],
        name="euclid",
        oracle_free=True,
    )


# --- bounded maximum ----------------------------------------------------------

def max_machine() -> OsaSpec:
    """``max_{i≤n} f(i)``, querying ``f(n), f(n-1), …, f(0)``.

    Not an approximation algorithm: its output is the running maximum, not
    the current query.
    """

    def step(s):
        i, n = s.register
        if s.empty or n == 0:
            return None
        return MachineState((max(i, s.cell), n - 1))

    return OsaSpec(
        rho=lambda n: (0, n + 1),
        step=step,
        is_query=lambda s: s.register[1] > 0 and s.empty,
        is_end=lambda s: s.register[1] == 0 and s.empty,
        xi=lambda r: r[1] - 1,
        pi=lambda s: s.register[0],
        name="max",
    )


# --- halting-style realizer ---------------------------------------------------

def halting_realizer_machine(T: Callable[[Any, Any, int], bool]) -> OsaSpec:
    """Realizes ``∀u ∃x ∀y (T(u,u,x) ∨ ¬T(u,u,y))``.

    Ask about 0. If the answer ``y`` has ``¬T(u,u,y)`` we are done with
    ``x = 0``; otherwise ``y`` itself is a good ``x`` and one more query
    closes the run. Registers are ``(phase, u, x)``.
    """

    def step(s):
        phase, u, x = s.register
        if phase != "h0" or s.empty:
            return None
        if not T(u, u, s.cell):
            return MachineState(("done", u, x), s.cell)
        return MachineState(("h1", u, s.cell))

    def states(bound):
        for phase, u, x in itertools.product(("h0", "h1", "done"), range(bound + 1), range(bound + 1)):
            for c in _cells(bound):
                yield MachineState((phase, u, x), c)

    return OsaSpec(
        rho=lambda u: ("h0", u, 0),
        step=step,
        is_query=lambda s: s.register[0] in ("h0", "h1") and s.empty,
        is_end=lambda s: (s.register[0] == "done" or s.register[0] == "h1") and not s.empty,
        xi=lambda r: r[2],
        name="halting",
        states=states,
    )


def halting_P(T) -> DecidablePredicate:
    return DecidablePredicate(lambda u, x, y: T(u, u, x) or not T(u, u, y), "halting-P")


# --- least element --------------------------------------------------------------

@dataclass(frozen=True)
class LeastElementContext:
    Q: Callable[[Any], bool]
    order: DescentOrder = GREATER


def least_element_machine(ctx: LeastElementContext) -> OsaSpec:
    """Descend through counterexamples while they stay inside ``Q``."""

    def step(s):
        c, x = s.register
        if c != "cs" or s.empty:
            return None
        y = s.cell
        if ctx.order(x, y) and ctx.Q(y):
            return MachineState(("cs", y))
        return MachineState(("ce", x), y)

    def states(bound):
        for c, x in itertools.product(("cs", "ce"), range(bound + 1)):
            for o in _cells(bound):
                yield MachineState((c, x), o)

    return OsaSpec(
        rho=lambda u: ("cs", u),
        step=step,
        is_query=lambda s: s.register[0] == "cs" and s.empty,
        is_end=lambda s: s.register[0] == "ce" and not s.empty,
        xi=lambda r: r[1],
        name="least-element",
        states=states,
    )


def least_element_P(ctx: LeastElementContext) -> DecidablePredicate:
    def holds(u, x, y):
        if not ctx.Q(u):
            return True
        return ctx.Q(x) and not (ctx.order(x, y) and ctx.Q(y))

    return DecidablePredicate(holds, "least-element-P")


def least_element_projection(s: MachineState) -> str:
    c = s.register[0]
    return "cs'" if c == "cs" and s.empty else c


def least_element_graph() -> FlowGraph:
    return FlowGraph.build(plain=[("cs", "cs'"), ("cs", "ce")], oracle=[("cs'", "cs")])


# --- the infinite tape ------------------------------------------------------------

EXTENSIONS = ("repeat-last", "cycle", "constant")


@dataclass(frozen=True)
class TapeContext:
    """A boolean tape given by a finite pattern and a rule for what follows it."""

    pattern: tuple
    N: int
    extend: str = "repeat-last"
    fill: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pattern", tuple(int(b) for b in self.pattern))
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if not self.pattern:
            raise ValueError("pattern must be non-empty")
        if any(b not in (0, 1) for b in self.pattern) or self.fill not in (0, 1):
            raise ValueError("tape entries must be 0 or 1")
        if self.extend not in EXTENSIONS:
            raise ValueError(f"extend must be one of {', '.join(EXTENSIONS)}")

    def bit(self, i: int) -> int:
        if i < 0:
            raise IndexError(i)
        p = self.pattern
        if i < len(p):
            return p[i]
        if self.extend == "cycle":
            return p[i % len(p)]
        if self.extend == "repeat-last":
            return p[-1]
        return self.fill

    def prefix(self, n: int) -> tuple:
        return tuple(self.bit(i) for i in range(n))

    @classmethod
    def parse(cls, pattern: str, N: int, extend: str = "repeat-last", fill: int = 0):
        bits = [int(b) for b in pattern.replace(" ", "").split(",") if b != ""]
        return cls(tuple(bits), N, extend, fill)


class RecordingTape:
    """Wraps a context and records which tape indices were read."""

    def __init__(self, ctx: TapeContext):
        self.ctx = ctx
        self.N = ctx.N
        self.touched: set[int] = set()

    def bit(self, i: int) -> int:
        self.touched.add(i)
        return self.ctx.bit(i)


def tape_machine(ctx) -> OsaSpec:
    """Either the current position starts a run of ones long enough to
    answer every counterexample, or we jump to the first zero found."""
    b = ctx.bit

    def step(s):
        c, x = s.register
        if c != "cs" or s.empty:
            return None
        y = s.cell
        if b(x) == 1 and x <= y and b(y) == 0:
            return MachineState(("ce1", y))
        return MachineState(("ce2", x), y)

    def states(bound):
        for c, x in itertools.product(("cs", "ce1", "ce2"), range(bound + 1)):
            for o in _cells(bound):
                yield MachineState((c, x), o)

    return OsaSpec(
        rho=lambda u: ("cs", u[-1] + 1 if u else 0),
        step=step,
        is_query=lambda s: s.register[0] in ("cs", "ce1") and s.empty,
        is_end=lambda s: s.register[0] in ("ce1", "ce2") and not s.empty,
        xi=lambda r: r[1],
        name="tape",
        states=states,
    )


def tape_P(ctx) -> DecidablePredicate:
    b = ctx.bit

    def holds(u, x, y):
        if u and not u[-1] < x:
            return False
        return not (b(x) == 1 and x <= y) or b(y) == 1

    return DecidablePredicate(holds, "tape-P")


def tape_Q(ctx) -> Callable[[tuple], bool]:
    b = ctx.bit

    def holds(v) -> bool:
        v = tuple(v)
        if len(v) != ctx.N:
            return False
        return all(v[i] < v[i + 1] and b(v[i]) == b(v[i + 1]) for i in range(len(v) - 1))

    return holds


def tape_counterexample_functions(ctx):
    """``(f₁, f₂, g)``: where the choice sequence first goes wrong, a
    counterexample there, and the candidate subsequence it yields."""
    b, N = ctx.bit, ctx.N

    def f1(alpha: PaddedSequence) -> int:
        for n in range(N):
            if (n > 0 and not alpha[n - 1] < alpha[n]) or b(alpha[n]) == 1:
                return n
        return N - 1

    def f2(alpha: PaddedSequence) -> int:
        x = alpha[f1(alpha)]
        if b(x) == 1:
            for y in range(x, x + N):
                if b(y) == 0:
                    return y
        return x + N - 1

    def g(alpha: PaddedSequence) -> tuple:
        x = alpha[f1(alpha)]
        if b(x) == 1:
            return tuple(range(x, x + N))
        return alpha.initial_segment(N)

    return f1, f2, g


def tape_projection(s: MachineState) -> str:
    c = s.register[0]
    if c == "cs":
        return "cs'" if s.empty else "cs"
    return "ce'" if s.empty else "ce"


def tape_graph() -> FlowGraph:
    return FlowGraph.build(plain=[("cs", "ce"), ("cs", "ce'")],
                           oracle=[("cs'", "cs"), ("ce'", "ce")])


# ρ(U*) and E under the projection
TAPE_OMEGA_I = frozenset({"cs'"})
TAPE_OMEGA_E = frozenset({"ce"})
LEAST_OMEGA_I = frozenset({"cs'"})
LEAST_OMEGA_E = frozenset({"ce"})


def tape_omega(ctx) -> OmegaSpec:
    return lift(tape_machine(ctx), 0, name="tapeω")


class TapeOmegaDirect(OmegaSpec):
    """The lifted tape machine written out by hand, independent of :func:`lift`.

    Shares query and end states with the generic lift; only the three
    transition rules are restated for the tape.
    """

    def __init__(self, ctx):
        super().__init__(tape_machine(ctx), 0, "tapeω-direct")
        self.ctx = ctx

    def transition(self, s: OmegaState):
        b = self.ctx.bit
        sigma, a = s.sigma, s.a
        if s.cell1 is not EMPTY and s.cell2 is EMPTY and not a and s.cell1 >= len(sigma):
            x = sigma[-1][1] if sigma else -1
            return OmegaState(sigma + (("cs", x + 1),), (), EMPTY, EMPTY), "a"
        if not sigma or s.cell1 is EMPTY or s.cell2 is EMPTY:
            return None
        (c, x), y = sigma[-1], s.cell2
        if c in ("ce1", "ce2"):
            return OmegaState(sigma[:-1], (x,) + a, s.cell1, y), "b"
        if b(x) == 1 and x <= y and b(y) == 0:
            return OmegaState(sigma[:-1] + (("ce1", y),), (), EMPTY, EMPTY), "c.ii"
        return OmegaState(sigma[:-1] + (("ce2", x),), a, s.cell1, y), "c.iii"


@dataclass
class TapeResult:
    v: tuple
    trace: Trace
    final: OmegaState
    alpha: PaddedSequence
    n: int
    y: int
    touched: frozenset = field(default_factory=frozenset)

    @property
    def max_touched(self) -> int:
        return max(self.touched, default=-1)


def touched_bound(N: int) -> int:
    """Largest tape index a witness run may read."""
    return N * N + N - 2


def tape_witness(ctx: TapeContext, fuel: int = 10_000, spec: Optional[OmegaSpec] = None) -> TapeResult:
    """Run the lifted tape machine on ``(f₁, f₂)`` and read off a constant subsequence."""
    probe = RecordingTape(ctx)
    f1, f2, g = tape_counterexample_functions(probe)
    machine = spec if spec is not None else tape_omega(probe)
    probe.touched.clear()  # building the lift validates it against sample states
    done = expect_terminated(run_omega(machine, MultiOracle(f1, f2), fuel))
    final = done.final
    alpha = PaddedSequence(final.a, 0)
    v = g(alpha)
    if not tape_Q(ctx)(v):
        raise AssertionError(f"witness {v} is not a constant subsequence")
    return TapeResult(v, done.trace, final, alpha, final.cell1, final.cell2, frozenset(probe.touched))
