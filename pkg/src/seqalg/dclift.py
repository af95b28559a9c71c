"""The dependent-choice lift of an approximation algorithm.

Given an approximation algorithm ``A`` of sort X*, X, Y the lift builds a
machine of sort 1, X^ℕ, [ℕ, Y] whose registers are a stack ``σ`` of inner
registers plus the committed choices ``a``. The first oracle chooses a
depth ``n``; the second supplies a counterexample ``y`` for position ``n``.
Infinite sequences only ever appear as ``prefix::fill fill …`` and are
represented exactly by :class:`PaddedSequence`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Callable, Iterable, Optional, Sequence

from .approx import UNIT, InvalidApproximation, validate_approx
from .engine import MachineState, Oracle, OsaSpec, RunOutcome, Stuck, run
from .values import EMPTY, OVERLINE, render_seq, render_value, to_json


class PaddedSequence:
    """An infinite sequence ``prefix :: fill fill fill …``.

    Equality and hashing are extensional: trailing fill elements in the
    prefix do not matter. ``prefix`` keeps the representation it was built
    with, which the lifted order relies on.
    """

    __slots__ = ("prefix", "fill")

    def __init__(self, prefix: Iterable = (), fill: Any = 0):
        object.__setattr__(self, "prefix", tuple(prefix))
        object.__setattr__(self, "fill", fill)

    def __setattr__(self, name, value):
        raise AttributeError("PaddedSequence is immutable")

    def __getitem__(self, i: int):
        if i < 0:
            raise IndexError(i)
        return self.prefix[i] if i < len(self.prefix) else self.fill

    def initial_segment(self, n: int) -> tuple:
        return tuple(self[i] for i in range(n))

    def _core(self) -> tuple:
        p = self.prefix
        k = len(p)
        while k and p[k - 1] == self.fill:
            k -= 1
        return p[:k]

    def __eq__(self, other):
        if not isinstance(other, PaddedSequence):
            return NotImplemented
        return self.fill == other.fill and self._core() == other._core()

    def __hash__(self):
        return hash((self._core(), self.fill))

    def __repr__(self):
        return f"PaddedSequence({self.prefix!r}, fill={self.fill!r})"

    def render(self) -> str:
        return f"{render_seq(self.prefix)}::{render_value(self.fill)}{OVERLINE}"

    def to_json(self):
        return {"prefix": to_json(self.prefix), "fill": to_json(self.fill)}


def padded(prefix: Iterable = (), fill: Any = 0) -> PaddedSequence:
    return PaddedSequence(prefix, fill)


@dataclass(frozen=True)
class LiftedRegister:
    sigma: tuple
    a: tuple


@dataclass(frozen=True)
class OmegaState:
    """``⟨σ, a | o₁, o₂⟩``: inner register stack, committed choices, two cells."""

    sigma: tuple
    a: tuple = ()
    cell1: Any = EMPTY
    cell2: Any = EMPTY

    @property
    def register(self) -> LiftedRegister:
        return LiftedRegister(self.sigma, self.a)

    @property
    def empty(self) -> bool:
        return self.cell1 is EMPTY and self.cell2 is EMPTY

    def render(self) -> str:
        return (f"⟨{render_seq(self.sigma)},{render_seq(self.a)} | "
                f"{render_value(self.cell1)},{render_value(self.cell2)}⟩")

    def to_json(self):
        return {"sigma": to_json(self.sigma), "a": to_json(self.a),
                "cell1": to_json(self.cell1), "cell2": to_json(self.cell2)}


@dataclass(frozen=True)
class MultiOracle:
    """Two independently queried oracles: depth chooser and counterexample."""

    phi1: Callable
    phi2: Callable

    @property
    def channels(self):
        return (self.phi1, self.phi2)


def xi_star(sigma: Sequence, xi: Callable) -> tuple:
    return tuple(xi(r) for r in sigma)


class OmegaSpec:
    """The lifted machine. Implements the engine's machine protocol."""

    channel_count = 2
    step_symbol = "▷ω"
    oracle_free = False
    states = None

    def __init__(self, inner: OsaSpec, fill: Any = 0, name: Optional[str] = None):
        self.inner = inner
        self.fill = fill
        self.name = name or f"{inner.name}ω"

    # -- inner machine helpers --------------------------------------------

    def _inner_end(self, r, y) -> bool:
        return self.inner.is_end(MachineState(r, y))

    def _inner_step(self, r, o) -> Optional[MachineState]:
        s = MachineState(r, o)
        if self.inner.is_end(s) or self.inner.is_query(s):
            return None
        return self.inner.step(s)

    # -- protocol -----------------------------------------------------------

    def xi(self, register: LiftedRegister) -> PaddedSequence:
        return PaddedSequence(xi_star(register.sigma, self.inner.xi) + tuple(register.a), self.fill)

    def initial(self, u=UNIT) -> OmegaState:
        return OmegaState((self.inner.rho(()),), (), EMPTY, EMPTY)

    def in_q1(self, s: OmegaState) -> bool:
        return (bool(s.sigma) and not s.a and s.empty
                and self.inner.is_query(MachineState(s.sigma[-1], EMPTY)))

    def in_q2(self, s: OmegaState) -> bool:
        return (s.cell1 is not EMPTY and s.cell2 is EMPTY and not s.a
                and s.cell1 < len(s.sigma))

    def is_query(self, s) -> bool:
        return self.query_channel(s) is not None

    def query_channel(self, s) -> Optional[int]:
        if self.in_q1(s):
            return 1
        if self.in_q2(s):
            return 2
        return None

    def is_end(self, s) -> bool:
        return not s.sigma and s.cell1 is not EMPTY and s.cell2 is not EMPTY

    def question(self, s) -> PaddedSequence:
        return self.xi(s.register)

    def answered(self, s, channel, y):
        if channel == 1:
            if not isinstance(y, int) or isinstance(y, bool) or y < 0:
                raise ValueError(f"first oracle must return a natural number, got {y!r}")
            return replace(s, cell1=y)
        return replace(s, cell2=y)

    def applicable_rules(self, s: OmegaState) -> list[str]:
        """Every transition (oracle or rule) whose pattern matches ``s``."""
        found = []
        if self.is_end(s):
            return found
        if self.in_q1(s):
            found.append("q1")
        if self.in_q2(s):
            found.append("q2")
        if s.cell1 is not EMPTY and s.cell2 is EMPTY and not s.a and s.cell1 >= len(s.sigma):
            found.append("a")
        if s.sigma:
            r = s.sigma[-1]
            if s.cell1 is not EMPTY and s.cell2 is not EMPTY:
                if self._inner_end(r, s.cell2):
                    found.append("b")
                else:
                    t = self._inner_step(r, s.cell2)
                    if t is not None and t.empty:
                        found.append("c.ii")
                    elif t is not None and t.cell == s.cell2:
                        found.append("c.iii")
            elif s.empty and not s.a:
                t = self._inner_step(r, EMPTY)
                if t is not None and t.empty:
                    found.append("c.i")
        return found

    def transition(self, s: OmegaState):
        rules = [r for r in self.applicable_rules(s) if r not in ("q1", "q2")]
        if not rules:
            return None
        assert len(rules) == 1, f"overlapping rules {rules} at {s.render()}"
        rule = rules[0]
        sigma, a = s.sigma, s.a
        if rule == "a":
            pushed = self.inner.rho(xi_star(sigma, self.inner.xi))
            return OmegaState(sigma + (pushed,), (), EMPTY, EMPTY), rule
        r = sigma[-1]
        if rule == "b":
            return OmegaState(sigma[:-1], (self.inner.xi(r),) + a, s.cell1, s.cell2), rule
        if rule == "c.i":
            t = self._inner_step(r, EMPTY)
            return OmegaState(sigma[:-1] + (t.register,), (), EMPTY, EMPTY), rule
        t = self._inner_step(r, s.cell2)
        if rule == "c.ii":
            return OmegaState(sigma[:-1] + (t.register,), (), EMPTY, EMPTY), rule
        return OmegaState(sigma[:-1] + (t.register,), a, s.cell1, s.cell2), rule

    def output(self, s) -> PaddedSequence:
        return self.xi(s.register)

    def render_state(self, s) -> str:
        return s.render()

    def state_json(self, s):
        return s.to_json()


def lift(inner: OsaSpec, fill: Any = 0, samples: Optional[Iterable[MachineState]] = None,
         bound: int = 6, name: Optional[str] = None) -> OmegaSpec:
    """Build the lifted machine, rejecting inners that fail validation.

    Validation uses ``samples`` or the inner machine's declared state space
    up to ``bound``; with neither available only ``ρ([])`` is checked.
    """
    if samples is not None or inner.states is not None:
        report = validate_approx(inner, samples, bound)
        if not report.ok:
            raise InvalidApproximation(report)
    try:
        inner.rho(())
    except Exception as exc:
        raise ValueError(f"{inner.name}: ρ([]) must be defined") from exc
    return OmegaSpec(inner, fill, name)


def run_omega(spec: OmegaSpec, phi: MultiOracle, fuel: int) -> RunOutcome:
    outcome = run(spec, phi, UNIT, fuel)
    if isinstance(outcome, Stuck):
        raise AssertionError(f"lifted machine stuck at {outcome.state.render()}")
    return outcome


def check_p_omega(P: Callable, alpha: PaddedSequence, n: int, y) -> bool:
    """``P(ᾱn, α_n, y)``."""
    return bool(P(alpha.initial_segment(n), alpha[n], y))


_LEVEL_OF_STACK = {"q1", "q2", "a"}
_LEVEL_BELOW_STACK = {"b", "c.i", "c.ii", "c.iii"}


def transition_level(spec: OmegaSpec, state: OmegaState, rule: str) -> int:
    """Level of the transition ``rule`` at ``state``.

    Oracle transitions (``q1``, ``q2``) and rule (a) sit at level ``|σ|``;
    rules (b) and (c) at ``|σ| - 1``.
    """
    if rule not in spec.applicable_rules(state):
        raise ValueError(f"rule {rule} does not apply at {state.render()}")
    if rule in _LEVEL_OF_STACK:
        return len(state.sigma)
    return len(state.sigma) - 1


def entry_rule(entry) -> str:
    """The rule tag of a trace entry: ``q1``/``q2`` for queries."""
    return f"q{entry.channel}" if entry.rule is None else entry.rule


@dataclass
class F1Report:
    witnesses: dict
    inconclusive: list

    @property
    def member(self) -> bool:
        return not self.inconclusive


def in_F1_on_samples(phi1: Callable, gammas: Iterable, bound: int, fill: Any = 0) -> F1Report:
    """Search ``N ≤ bound`` with ``φ₁(γ̄N::fill) < N`` for each sample ``γ``.

    Membership is only semi-decidable; samples without a witness below the
    bound are reported as inconclusive, never as non-members.
    """
    witnesses, inconclusive = {}, []
    for i, gamma in enumerate(gammas):
        if not isinstance(gamma, PaddedSequence):
            gamma = PaddedSequence(gamma, fill)
        for N in range(bound + 1):
            if phi1(PaddedSequence(gamma.initial_segment(N), fill)) < N:
                witnesses[i] = N
                break
        else:
            inconclusive.append(gamma)
    return F1Report(witnesses, inconclusive)


def mind_change_bounds(h: Callable[[int], int], N: int, limit: Optional[int] = None) -> tuple[int, int]:
    """The conjectured query bounds ``(Σ_{j≤N} Π_{i≤j} h(i), Π_{i≤N} h(i))``."""
    total, prod = 0, 1
    for j in range(N + 1):
        prod *= h(j)
        total += prod
        if limit is not None and total > limit:
            raise OverflowError(f"bound exceeds {limit}")
    return total, prod
