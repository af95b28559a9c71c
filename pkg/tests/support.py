"""Independent reference implementations used as test oracles.

Nothing here imports the machines under test; each function restates the
mathematics directly so that agreement means something.
"""

from __future__ import annotations

import itertools
from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


# --- arithmetic -------------------------------------------------------------------


def gcd_by_subtraction(a: int, b: int) -> int:
    while a and b:
        if a >= b:
            a -= b
        else:
            b -= a
    return a or b


def brute_max(f, n: int) -> int:
    best = 0
    for i in range(n + 1):
        best = best if best >= f(i) else f(i)
    return best


# --- tapes ----------------------------------------------------------------------------


def tape_bits(pattern, extend: str, fill: int = 0):
    pattern = list(pattern)

    def bit(i):
        if i < len(pattern):
            return pattern[i]
        return {"cycle": pattern[i % len(pattern)], "repeat-last": pattern[-1], "constant": fill}[extend]

    return bit


def tape_P_direct(bit):
    def P(u, x, y):
        first = True if len(u) == 0 else u[len(u) - 1] < x
        second = (not (bit(x) == 1 and x <= y)) or bit(y) == 1
        return first and second

    return P


def tape_Q_direct(bit, N):
    def Q(v):
        if len(v) != N:
            return False
        for i in range(N - 1):
            if not (v[i] < v[i + 1]) or bit(v[i]) != bit(v[i + 1]):
                return False
        return True

    return Q


def brute_constant_subsequence(bit, N: int, limit: int):
    for v in itertools.combinations(range(limit), N):
        if all(bit(v[0]) == bit(i) for i in v):
            return v
    return None


# --- least element / halting predicates --------------------------------------------


def least_P_direct(Q):
    # Q(u) → Q(x) ∧ (y < x → ¬Q(y))
    return lambda u, x, y: (not Q(u)) or (Q(x) and (not y < x or not Q(y)))


def halting_P_direct(T):
    return lambda u, x, y: T(u, u, x) or not T(u, u, y)


# --- System T by environment semantics ------------------------------------------


def eval_T(term, f, env=None):
    """Denotation of a term: naturals and Python closures."""
    from seqalg import systt as T

    env = env or {}
    if isinstance(term, T.Num):
        return term.value
    if isinstance(term, T.Var):
        return env[term.name]
    if isinstance(term, T.Phi):
        return f
    if isinstance(term, T.Succ):
        return eval_T(term.arg, f, env) + 1
    if isinstance(term, T.Lam):
        return lambda v, term=term: eval_T(term.body, f, {**env, term.var: v})
    if isinstance(term, T.App):
        return eval_T(term.fun, f, env)(eval_T(term.arg, f, env))
    n = eval_T(term.n, f, env)
    acc = eval_T(term.base, f, env)
    step = eval_T(term.step, f, env)
    for k in range(n):
        acc = step(k)(acc)
    return acc


# --- lifted graphs by brute force --------------------------------------------------


def lift_cfg_direct(vertices, plain, oracle, omega_I, omega_E, L):
    """Test every ordered pair of lifted vertices against the three rules."""
    sigma = ["star"] + [(t, n, p) for t in ("bot", "top") for n in range(L + 1) for p in vertices]
    B, Bp = set(), set()
    for s, t in itertools.product(sigma, sigma):
        if t == "star":
            if s != "star" and s[0] == "bot" and s[1] == 0 and s[2] in omega_E:
                B.add((s, t))
            continue
        if s == "star":
            continue
        (ts, ns, ps), (tt, nt, pt) = s, t
        if ts == tt == "bot" and ns == nt and (ps, pt) in plain:
            B.add((s, t))
        for p, q in oracle:
            if ts == "bot" and tt == "top" and ns == nt and ps == pt == p:
                Bp.add((s, t))
            if ts == "top" and tt == "bot" and ns == nt and ps == p and pt == q:
                Bp.add((s, t))
            if ts == "top" and tt == "bot" and nt == ns + 1 and ps == p and pt in omega_I:
                B.add((s, t))
            if ts == "bot" and tt == "bot" and ns == nt + 1 and ps in omega_E and pt == q:
                B.add((s, t))
    return set(sigma), B, Bp


# --- hand-written realizers of type (0→0)→0→0 ---------------------------------------

TERMS = [
    "lam f u. app f (app f u)",
    "lam f u. u",
    "lam f u. zero",
    "lam f u. 7",
    "lam f u. suc (suc u)",
    "lam f u. rec u zero (lam k r. suc r)",
    "lam f u. rec (app f 0) 0 (lam k r. suc (suc r))",
    "lam f u. app f (suc (app f 0))",
    "lam f u. rec u (app f 0) (lam k r. app f r)",
    "lam f u. rec u 0 (lam k r. app f k)",
    "lam f u. app (lam x. app f (suc x)) u",
    "lam f u. app (lam g. app g (app g u)) f",
    "lam f u. rec (app f u) u (lam k r. r)",
    "lam f u. rec u 1 (lam k r. rec r 0 (lam j s. suc (suc s)))",
    "lam f u. rec 3 u (lam k r. app f (suc r))",
    "lam f u. app (lam x y. y) (app f 5) (app f u)",
    "lam f u. rec (app f (app f 1)) (suc u) (lam k r. suc k)",
    "lam f u. app (app (lam a b. rec a b (lam k r. suc r)) u) (app f u)",
    "lam f u. rec u 0 (lam k r. rec r (app f k) (lam j s. s))",
    "lam phi u. app phi (app phi u)",
    "lam f u. app f (rec u 0 (lam k r. app f r))",
    "lam f u. rec 2 0 (lam k r. rec (app f r) r (lam j s. suc s))",
    "\\f u. suc (app f (suc zero))",
    "lam f. lam u. app (lam h. app h (app h 0)) (lam z. app f (suc z))",
]
