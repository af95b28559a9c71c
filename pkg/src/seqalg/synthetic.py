"""Seeded random approximation algorithms for property testing.

Two families:

* :func:`random_acyclic_machine` builds an arbitrary approximation algorithm
  over a finite, acyclic register graph, so every run terminates.
* :func:`random_search_machine` builds a machine of sort X*, X, Y that walks
  a list of candidates and stops at the first one passing a random
  decidable predicate. The last candidate always passes, so the machine
  satisfies the predicate by construction and can be lifted.

Everything is a pure function of the seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from .approx import DecidablePredicate
from .engine import MachineState, Oracle, OsaSpec


def _rng(*key) -> random.Random:
    return random.Random(":".join(map(str, key)))


# --- acyclic register graphs --------------------------------------------------


def random_acyclic_machine(seed: int, size: int = 8, values: int = 4, inputs: int = 3) -> OsaSpec:
    """An approximation algorithm over registers ``0..size-1``.

    Every transition moves to a larger register, so runs are bounded by
    ``2 * size`` transitions. Answers range over ``0..values-1``.
    """
    rng = _rng("acyclic", seed)
    xi_table = [rng.randrange(values) for _ in range(size)]
    asks = [rng.random() < 0.6 for _ in range(size)]
    asks[-1] = True
    silent = {}
    for r in range(size - 1):
        if not asks[r]:
            silent[r] = rng.randrange(r + 1, size)
    entry = [rng.randrange(max(size // 2, 1)) for _ in range(inputs)]

    @lru_cache(maxsize=None)
    def on_answer(r: int, y):
        """``("end",)``, ``("drop", r')`` or ``("keep", r')`` for ``⟨r | y⟩``."""
        if r == size - 1:
            return ("end",)
        pick = _rng("acyclic", seed, r, y)
        same = [t for t in range(r + 1, size) if asks[t] and xi_table[t] == xi_table[r]]
        roll = pick.random()
        if roll < 0.3:
            return ("end",)
        if roll < 0.55 and same:
            return ("keep", pick.choice(same))
        return ("drop", pick.randrange(r + 1, size))

    def is_end(s):
        return not s.empty and asks[s.register] and on_answer(s.register, s.cell) == ("end",)

    def step(s):
        r = s.register
        if s.empty:
            return MachineState(silent[r]) if r in silent else None
        if not asks[r]:
            return None
        move = on_answer(r, s.cell)
        if move[0] == "keep":
            return MachineState(move[1], s.cell)
        if move[0] == "drop":
            return MachineState(move[1])
        return None

    def states(bound):
        for r in range(size):
            yield MachineState(r)
            if asks[r]:
                for y in range(values):
                    yield MachineState(r, y)

    return OsaSpec(
        rho=lambda u: entry[u % inputs],
        step=step,
        is_query=lambda s: s.empty and asks[s.register],
        is_end=is_end,
        xi=lambda r: xi_table[r],
        name=f"acyclic-{seed}",
        states=states,
    )


def random_table_oracle(seed: int, domain: int, values: int) -> Oracle:
    rng = _rng("oracle", seed)
    table = [rng.randrange(values) for _ in range(domain)]
    return Oracle(lambda x: table[x % domain], f"table-{seed}")


# --- candidate search -------------------------------------------------------------


@dataclass(frozen=True)
class SearchFamily:
    """A random predicate ``P`` on ``X* × X × Y`` together with its safe candidates."""

    seed: int
    bound: int = 5
    density: float = 0.5
    max_candidates: int = 4

    def safe(self, u: tuple) -> int:
        return _rng("safe", self.seed, u).randrange(self.bound + 1)

    def holds(self, u, x, y) -> bool:
        u = tuple(u)
        if x == self.safe(u):
            return True
        return _rng("P", self.seed, u, x, y).random() < self.density

    @property
    def P(self) -> DecidablePredicate:
        return DecidablePredicate(self.holds, f"P-{self.seed}")

    def candidates(self, u: tuple) -> tuple:
        rng = _rng("cands", self.seed, u)
        k = rng.randrange(self.max_candidates)
        return tuple(rng.randrange(self.bound + 1) for _ in range(k)) + (self.safe(u),)

    def noise(self, u: tuple, i: int) -> int:
        return _rng("noise", self.seed, u, i).randrange(3)


def random_search_machine(family: SearchFamily) -> OsaSpec:
    """Try candidates in order, with a few silent bookkeeping steps in between.

    Registers: ``("try", u, i)`` asks about candidate ``i``; ``("wait", u, i, k)``
    counts down ``k`` silent steps before trying ``i``; ``("hold", u, i, k)``
    counts down while keeping the answer; ``("done", u, i)`` is final.
    """
    F = family

    @lru_cache(maxsize=None)
    def cands(u):
        return F.candidates(u)

    def xi(r):
        return cands(r[1])[r[2]]

    def step(s):
        r = s.register
        tag, u, i = r[0], r[1], r[2]
        if tag == "wait" and s.empty:
            k = r[3]
            return MachineState(("wait", u, i, k - 1) if k > 1 else ("try", u, i))
        if tag == "hold" and not s.empty:
            k = r[3]
            return MachineState(("hold", u, i, k - 1) if k > 1 else ("done", u, i), s.cell)
        if tag == "try" and not s.empty:
            x, y = xi(r), s.cell
            if F.holds(u, x, y):
                k = F.noise(u, i)
                return MachineState(("hold", u, i, k) if k else ("done", u, i), y)
            j = i + 1
            k = F.noise(u, j)
            return MachineState(("wait", u, j, k) if k else ("try", u, j))
        return None

    def rho(u):
        u = tuple(u)
        k = F.noise(u, 0)
        return ("wait", u, 0, k) if k else ("try", u, 0)

    def states(bound):
        us = [(), (0,), (1, 2)]
        for u in us:
            for i in range(len(cands(u))):
                regs = [("try", u, i), ("done", u, i)] + [(t, u, i, k) for t in ("wait", "hold") for k in (1, 2)]
                for r in regs:
                    yield MachineState(r)
                    for y in range(bound + 1):
                        yield MachineState(r, y)

    return OsaSpec(
        rho=rho,
        step=step,
        is_query=lambda s: s.register[0] == "try" and s.empty,
        is_end=lambda s: s.register[0] == "done" and not s.empty,
        xi=xi,
        name=f"search-{F.seed}",
        states=states,
    )


def hashed_sequence_oracle(seed: int, label: str, depth: int, modulus: int) -> Callable:
    """A continuous functional on padded sequences: looks at the first ``depth`` entries."""

    def phi(alpha):
        return _rng(label, seed, alpha.initial_segment(depth)).randrange(modulus)

    return phi

