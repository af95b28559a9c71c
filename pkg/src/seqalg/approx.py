"""Approximation algorithms, their validity conditions and n.c.i. realizers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional

from .engine import (
    MachineState,
    Oracle,
    OsaSpec,
    Trace,
    expect_terminated,
    run,
)
from .values import EMPTY, render_value, to_json

# An approximation algorithm is an OsaSpec of sort U, X, X, Y whose output
# map is the query map. We keep one class and check the conditions instead.
ApproxSpec = OsaSpec


class _Unit:
    def __repr__(self):
        return "UNIT"

    def render(self):
        return "1"

    def to_json(self):
        return "1"


# The single element of the terminal sort, used as input to sort-1 machines.
UNIT = _Unit()


@dataclass(frozen=True)
class Violation:
    condition: str
    state: Any
    detail: str

    def to_json(self):
        return {"condition": self.condition, "state": to_json(self.state), "detail": self.detail}


@dataclass
class ValidationReport:
    checked: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def conditions(self) -> set[str]:
        return {v.condition for v in self.violations}

    def to_json(self):
        return {"checked": self.checked, "ok": self.ok,
                "violations": [v.to_json() for v in self.violations]}


class InvalidApproximation(ValueError):
    def __init__(self, report: ValidationReport):
        first = report.violations[0]
        super().__init__(f"condition {first.condition} fails at "
                         f"{render_value(first.state)}: {first.detail}")
        self.report = report


def validate_approx(spec: ApproxSpec, state_samples: Optional[Iterable[MachineState]] = None,
                    bound: int = 8) -> ValidationReport:
    """Check conditions (i)-(iii) on every sample and every defined step from it.

    Also checks the structural requirements on query and end states. When no
    samples are given the spec's declared state enumeration is used.
    """
    if state_samples is None:
        if spec.states is None:
            raise ValueError(f"{spec.name} declares no state space; pass samples")
        state_samples = spec.states(bound)
    report = ValidationReport()
    bad = report.violations.append
    for s in state_samples:
        report.checked += 1
        xi_r = spec.xi(s.register)
        if spec.output(s) != xi_r:
            bad(Violation("i", s, f"π gives {render_value(spec.output(s))}, ξ gives {render_value(xi_r)}"))
        query, end = spec.is_query(s), spec.is_end(s)
        if end and s.empty:
            bad(Violation("ii", s, "end state with empty cell"))
        if query and not s.empty:
            bad(Violation("Q", s, "query state with non-empty cell"))
        if query and end:
            bad(Violation("QE", s, "state is both query and end"))
        if query or end:
            continue
        t = spec.step(s)
        if t is None or t.empty:
            continue
        if t.cell != s.cell:
            bad(Violation("iii", s, f"answer changed from {render_value(s.cell)} to {render_value(t.cell)}"))
        elif spec.xi(t.register) != xi_r:
            bad(Violation("iii", s, f"query changed from {render_value(xi_r)} to "
                                    f"{render_value(spec.xi(t.register))} while keeping the answer"))
    return report


@dataclass(frozen=True)
class CoherenceVerdict:
    holds: bool
    index: Optional[int] = None
    state: Any = None
    expected: Any = None


def check_answer_coherence(spec: ApproxSpec, oracle: Oracle, trace: Trace) -> CoherenceVerdict:
    """Every filled cell ``⟨r | y⟩`` along the trace must hold ``f(ξ(r))``."""
    for i, e in enumerate(trace.entries):
        s = e.state
        if s.empty:
            continue
        want = oracle(spec.xi(s.register))
        if s.cell != want:
            return CoherenceVerdict(False, i, s, want)
    return CoherenceVerdict(True)


@dataclass(frozen=True)
class DecidablePredicate:
    holds: Callable[[Any, Any, Any], bool]
    name: str = "P"

    def __call__(self, u, x, y) -> bool:
        return bool(self.holds(u, x, y))


@dataclass(frozen=True)
class SatisfiesVerdict:
    holds: bool
    u: Any
    x: Any
    y: Any

    def to_json(self):
        return {"holds": self.holds, "u": to_json(self.u), "x": to_json(self.x), "y": to_json(self.y)}


def _final_pair(spec, oracle, u, fuel):
    done = expect_terminated(run(spec, oracle, u, fuel))
    final = done.final
    return done, spec.xi(final.register), final.cell


def satisfies(spec: ApproxSpec, P, u, oracle: Oracle, fuel: int) -> SatisfiesVerdict:
    """Run to the end state ``⟨r | y⟩`` and evaluate ``P(u, ξ(r), y)``.

    Raises :class:`NonTermination` when fuel runs out: a run that never ends
    yields no verdict rather than vacuous satisfaction.
    """
    _, x, y = _final_pair(spec, oracle, u, fuel)
    return SatisfiesVerdict(bool(P(u, x, y)), u, x, y)


@dataclass(frozen=True)
class NciWitness:
    u: Any
    x: Any
    y: Any


def nci_realize(spec: ApproxSpec, u, oracle: Oracle, fuel: int) -> NciWitness:
    _, x, y = _final_pair(spec, oracle, u, fuel)
    if y is EMPTY:
        raise AssertionError(f"{spec.name} ended with an empty cell")
    if y != oracle(x):
        raise AssertionError(f"{spec.name}: final answer {render_value(y)} is not f({render_value(x)})")
    return NciWitness(u, x, y)


def approximation_stream(spec: ApproxSpec, trace: Trace, g: Callable = lambda x: x) -> list:
    """``(g∘ξ)(r₀), …, (g∘ξ)(r_k)`` over the registers of a run."""
    return [g(spec.xi(e.state.register)) for e in trace.entries]


def extract_witness(spec: ApproxSpec, oracle, g: Callable, fuel: int, u=UNIT):
    """Run a sort-1 machine to its end state ``⟨r | y⟩`` and return ``g(ξ(r))``."""
    done = expect_terminated(run(spec, oracle, u, fuel))
    return g(spec.xi(done.final.register))

