"""A small System T with an oracle constant, and its reducer packaged as a machine.

Terms are untyped in construction and checked by inference (base type 0 and
arrows). Reduction is leftmost-outermost and never goes under a binder; an
application ``phi n`` with a numeral argument is reported as an oracle redex
instead of being contracted, and the argument of ``phi`` is reduced first
otherwise.

Concrete syntax::

    term  ::= 'lam' ident+ '.' term | 'app' atom atom+ | 'suc' atom
            | 'rec' atom atom atom | atom
    atom  ::= ident | 'zero' | numeral | 'phi' | '(' term ')'

A free ``phi`` denotes the oracle constant; a bound one is an ordinary variable.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Callable, Optional, Union

from .engine import MachineState, Oracle, OsaSpec, expect_terminated, run

# --- terms ----------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lam:
    var: str
    body: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Num:
    """The numeral ``n``; ``Num(0)`` is zero."""
    value: int


@dataclass(frozen=True)
class Succ:
    arg: "Term"


@dataclass(frozen=True)
class Rec:
    n: "Term"
    base: "Term"
    step: "Term"


@dataclass(frozen=True)
class Phi:
    pass


Term = Union[Var, Lam, App, Num, Succ, Rec, Phi]
ZERO = Num(0)
PHI = Phi()


def numeral(n: int) -> Num:
    if n < 0:
        raise ValueError("numerals are natural numbers")
    return Num(n)


def numeral_value(t) -> Optional[int]:
    """The value of ``t`` if it is a numeral (possibly under successors)."""
    k = 0
    while isinstance(t, Succ):
        t, k = t.arg, k + 1
    return t.value + k if isinstance(t, Num) else None


def lams(names, body):
    for v in reversed(names):
        body = Lam(v, body)
    return body


def apps(f, *args):
    for a in args:
        f = App(f, a)
    return f


def render_term(t) -> str:
    if isinstance(t, Num):
        return str(t.value)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Phi):
        return "phi"
    if isinstance(t, Succ):
        return f"(suc {render_term(t.arg)})"
    if isinstance(t, Rec):
        return f"(rec {render_term(t.n)} {render_term(t.base)} {render_term(t.step)})"
    if isinstance(t, Lam):
        names = [t.var]
        body = t.body
        while isinstance(body, Lam):
            names.append(body.var)
            body = body.body
        return f"(lam {' '.join(names)}. {render_term(body)})"
    parts = []
    while isinstance(t, App):
        parts.append(t.arg)
        t = t.fun
    parts.append(t)
    return "(app " + " ".join(render_term(p) for p in reversed(parts)) + ")"


def free_vars(t) -> frozenset:
    if isinstance(t, Var):
        return frozenset({t.name})
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.var}
    if isinstance(t, App):
        return free_vars(t.fun) | free_vars(t.arg)
    if isinstance(t, Succ):
        return free_vars(t.arg)
    if isinstance(t, Rec):
        return free_vars(t.n) | free_vars(t.base) | free_vars(t.step)
    return frozenset()


def subst(t, name: str, value):
    """``t[value/name]``; ``value`` is closed, so no capture can occur."""
    if isinstance(t, Var):
        return value if t.name == name else t
    if isinstance(t, Lam):
        return t if t.var == name else Lam(t.var, subst(t.body, name, value))
    if isinstance(t, App):
        return App(subst(t.fun, name, value), subst(t.arg, name, value))
    if isinstance(t, Succ):
        return Succ(subst(t.arg, name, value))
    if isinstance(t, Rec):
        return Rec(subst(t.n, name, value), subst(t.base, name, value), subst(t.step, name, value))
    return t


# --- types ------------------------------------------------------------------------


@dataclass(frozen=True)
class Arrow:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True)
class TVar:
    id: int


BASE = "0"
Type = Union[str, Arrow, TVar]
ORACLE_TYPE = Arrow(BASE, BASE)
REALIZER_TYPE = Arrow(ORACLE_TYPE, Arrow(BASE, BASE))


def render_type(ty) -> str:
    if isinstance(ty, Arrow):
        dom = render_type(ty.dom)
        if isinstance(ty.dom, Arrow):
            dom = f"({dom})"
        return f"{dom}→{render_type(ty.cod)}"
    if isinstance(ty, TVar):
        return f"τ{ty.id}"
    return ty


class TypeMismatch(TypeError):
    pass


class _Infer:
    def __init__(self):
        self.subst: dict[int, Type] = {}
        self.fresh_ids = itertools.count()

    def fresh(self) -> TVar:
        return TVar(next(self.fresh_ids))

    def resolve(self, ty):
        while isinstance(ty, TVar) and ty.id in self.subst:
            ty = self.subst[ty.id]
        return ty

    def occurs(self, v: TVar, ty) -> bool:
        ty = self.resolve(ty)
        if ty == v:
            return True
        return isinstance(ty, Arrow) and (self.occurs(v, ty.dom) or self.occurs(v, ty.cod))

    def unify(self, a, b, where):
        a, b = self.resolve(a), self.resolve(b)
        if a == b:
            return
        if isinstance(a, TVar):
            if self.occurs(a, b):
                raise TypeMismatch(f"infinite type in {render_term(where)}")
            self.subst[a.id] = b
            return
        if isinstance(b, TVar):
            self.unify(b, a, where)
            return
        if isinstance(a, Arrow) and isinstance(b, Arrow):
            self.unify(a.dom, b.dom, where)
            self.unify(a.cod, b.cod, where)
            return
        raise TypeMismatch(f"cannot match {render_type(self.zonk(a))} with "
                           f"{render_type(self.zonk(b))} in {render_term(where)}")

    def zonk(self, ty):
        ty = self.resolve(ty)
        if isinstance(ty, Arrow):
            return Arrow(self.zonk(ty.dom), self.zonk(ty.cod))
        return ty

    def infer(self, t, env: dict):
        if isinstance(t, Var):
            if t.name not in env:
                raise TypeMismatch(f"unbound variable {t.name}")
            return env[t.name]
        if isinstance(t, (Num,)):
            return BASE
        if isinstance(t, Phi):
            return ORACLE_TYPE
        if isinstance(t, Succ):
            self.unify(self.infer(t.arg, env), BASE, t)
            return BASE
        if isinstance(t, Lam):
            a = self.fresh()
            return Arrow(a, self.infer(t.body, {**env, t.var: a}))
        if isinstance(t, App):
            f = self.infer(t.fun, env)
            a = self.infer(t.arg, env)
            r = self.fresh()
            self.unify(f, Arrow(a, r), t)
            return r
        # recursor: n : 0, base : σ, step : 0 → σ → σ
        self.unify(self.infer(t.n, env), BASE, t)
        sigma = self.infer(t.base, env)
        self.unify(self.infer(t.step, env), Arrow(BASE, Arrow(sigma, sigma)), t)
        return sigma


def _default(ty):
    if isinstance(ty, TVar):
        return BASE
    if isinstance(ty, Arrow):
        return Arrow(_default(ty.dom), _default(ty.cod))
    return ty


def infer_type(t, env: Optional[dict] = None) -> Type:
    """Principal type of ``t``, with leftover type variables defaulted to 0."""
    inf = _Infer()
    ty = inf.infer(t, dict(env or {}))
    return _default(inf.zonk(ty))


def check_type(t, expected: Type, env: Optional[dict] = None) -> None:
    inf = _Infer()
    inf.unify(inf.infer(t, dict(env or {})), expected, t)


# --- reduction --------------------------------------------------------------------


@dataclass(frozen=True)
class Reduced:
    term: Term


@dataclass(frozen=True)
class OracleRedex:
    n: int
    position: tuple


@dataclass(frozen=True)
class Normal:
    n: int


StepResult = Union[Reduced, OracleRedex, Normal]


class StuckTerm(ValueError):
    pass


def _wrap(res, rebuild, field_name):
    if isinstance(res, Reduced):
        return Reduced(rebuild(res.term))
    return OracleRedex(res.n, (field_name,) + res.position)


def _step(t):
    """Reduced or OracleRedex for a non-numeral term."""
    if isinstance(t, App):
        f, a = t.fun, t.arg
        if isinstance(f, Lam):
            return Reduced(subst(f.body, f.var, a))
        if isinstance(f, Phi):
            n = numeral_value(a)
            if n is not None:
                return OracleRedex(n, ())
            return _wrap(_step(a), lambda b: App(f, b), "arg")
        return _wrap(_step(f), lambda g: App(g, a), "fun")
    if isinstance(t, Succ):
        return _wrap(_step(t.arg), Succ, "arg")
    if isinstance(t, Rec):
        k = numeral_value(t.n)
        if k is None:
            return _wrap(_step(t.n), lambda m: Rec(m, t.base, t.step), "n")
        if k == 0:
            return Reduced(t.base)
        return Reduced(apps(t.step, Num(k - 1), Rec(Num(k - 1), t.base, t.step)))
    raise StuckTerm(f"no redex in {render_term(t)}")


def reduce_step(t) -> StepResult:
    """One step of the strategy on a closed term of type 0."""
    n = numeral_value(t)
    if n is not None:
        return Normal(n)
    return _step(t)


def replace_at(t, position: tuple, new):
    if not position:
        return new
    head, rest = position[0], position[1:]
    if isinstance(t, App):
        if head == "fun":
            return App(replace_at(t.fun, rest, new), t.arg)
        return App(t.fun, replace_at(t.arg, rest, new))
    if isinstance(t, Succ):
        return Succ(replace_at(t.arg, rest, new))
    if isinstance(t, Rec) and head == "n":
        return Rec(replace_at(t.n, rest, new), t.base, t.step)
    raise ValueError(f"bad position {position} in {render_term(t)}")


def subterm_at(t, position: tuple):
    for head in position:
        t = getattr(t, head)
    return t


# --- the machine ----------------------------------------------------------------


@dataclass(frozen=True)
class TermRegister:
    """``(phase, term, x)`` with phase ``cc`` (computing) or ``cq`` (querying)."""

    phase: str
    term: Term
    x: int

    def render(self) -> str:
        return f"{self.phase},{render_term(self.term)},{self.x}"

    def to_json(self):
        return {"phase": self.phase, "term": render_term(self.term), "x": self.x}


def _register_step(s: MachineState):
    r = s.register
    if r.phase == "cc":
        res = reduce_step(r.term)
        if isinstance(res, Reduced):
            return MachineState(TermRegister("cc", res.term, r.x), s.cell)
        return MachineState(TermRegister("cq", r.term, res.n))
    if s.empty or numeral_value(r.term) is not None:
        return None
    res = reduce_step(r.term)
    if not isinstance(res, OracleRedex):
        return None
    return MachineState(TermRegister("cc", replace_at(r.term, res.position, Num(s.cell)), r.x), s.cell)


def to_osa(t: Term) -> OsaSpec:
    """The machine reducing ``t phi u`` and querying its normal form; ``u`` is its input."""
    if free_vars(t):
        raise TypeMismatch(f"term has free variables {sorted(free_vars(t))}")
    check_type(t, REALIZER_TYPE)
    return OsaSpec(
        rho=lambda u: TermRegister("cc", apps(t, PHI, Num(u)), 0),
        step=_register_step,
        is_query=lambda s: s.register.phase == "cq" and s.empty,
        is_end=lambda s: s.register.phase == "cq" and not s.empty and numeral_value(s.register.term) is not None,
        xi=lambda r: r.x,
        name="systemT",
    )


def treduce(t: Term, f: Callable[[int], int], u: int, fuel: int):
    """Run the reducer machine; returns the engine outcome."""
    spec = to_osa(t)
    oracle = f if hasattr(f, "channels") else Oracle(f)
    return spec, run(spec, oracle, u, fuel)


def normalize_with_oracle(t: Term, f: Callable[[int], int], u: int, fuel: int) -> tuple[int, int]:
    """``(n, f(n))`` where ``n`` is the normal form of ``t f u``."""
    _, outcome = treduce(t, f, u, fuel)
    final = expect_terminated(outcome).final
    return final.register.x, final.cell


# --- parsing --------------------------------------------------------------------


class TermSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym>[().\\λ]))")
_KEYWORDS = {"lam", "app", "suc", "rec", "zero"}


def _tokenize(text: str):
    pos, out = 0, []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise TermSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        out.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, v, pos = self.take()
        if v != value:
            raise TermSyntaxError(f"expected {value!r}, found {v or 'end of input'!r}", pos)

    def term(self, bound):
        kind, v, pos = self.peek()
        if v in ("lam", "\\", "λ"):
            self.take()
            names = []
            while self.peek()[0] == "ident" and self.peek()[1] not in _KEYWORDS:
                names.append(self.take()[1])
            if not names:
                raise TermSyntaxError("lam needs at least one variable", self.peek()[2])
            self.expect(".")
            return lams(names, self.term(bound | set(names)))
        if v == "app":
            self.take()
            f = self.atom(bound)
            args = []
            while self.at_atom():
                args.append(self.atom(bound))
            if not args:
                raise TermSyntaxError("app needs an argument", self.peek()[2])
            return apps(f, *args)
        if v == "suc":
            self.take()
            return Succ(self.atom(bound))
        if v == "rec":
            self.take()
            return Rec(self.atom(bound), self.atom(bound), self.atom(bound))
        return self.atom(bound)

    def at_atom(self):
        kind, v, _ = self.peek()
        return kind == "num" or v == "(" or (kind == "ident" and v not in _KEYWORDS - {"zero"})

    def atom(self, bound):
        kind, v, pos = self.take()
        if kind == "num":
            return Num(int(v))
        if v == "(":
            t = self.term(bound)
            self.expect(")")
            return t
        if v == "zero":
            return ZERO
        if kind == "ident" and v not in _KEYWORDS:
            if v == "phi" and v not in bound:
                return PHI
            return Var(v)
        raise TermSyntaxError(f"unexpected {v or 'end of input'!r}", pos)


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term(frozenset())
    kind, v, pos = p.peek()
    if kind != "eof":
        raise TermSyntaxError(f"trailing input {v!r}", pos)
    return t


def parse_realizer(text: str) -> Term:
    """Parse and check a closed term of type (0→0)→0→0."""
    t = parse_term(text)
    if free_vars(t):
        raise TypeMismatch(f"unbound variables {', '.join(sorted(free_vars(t)))}")
    check_type(t, REALIZER_TYPE)
    return t
