"""Acceptance criteria, one test each, with their time limits."""

import json
import random
import time
from contextlib import contextmanager
from dataclasses import replace

import pytest

from seqalg import cli
from seqalg.approx import check_answer_coherence, nci_realize, validate_approx
from seqalg.casebook import (
    TAPE_OMEGA_E,
    TAPE_OMEGA_I,
    LeastElementContext,
    TapeContext,
    euclid_machine,
    halting_realizer_machine,
    least_element_machine,
    max_machine,
    tape_counterexample_functions,
    tape_graph,
    tape_machine,
    tape_omega,
    tape_projection,
    tape_witness,
)
from seqalg.cfg import LESS, check_descending, lift_cfg, lift_order, omega_projection, verify_cfg, vertex_label
from seqalg.dclift import MultiOracle, OmegaState, PaddedSequence, lift, mind_change_bounds, run_omega
from seqalg.engine import Kind, MachineState, Oracle, Terminated, query_sequence, run
from seqalg.synthetic import (
    SearchFamily,
    hashed_sequence_oracle,
    random_acyclic_machine,
    random_search_machine,
    random_table_oracle,
)
from seqalg.systt import PHI, Num, apps, normalize_with_oracle, parse_realizer, to_osa
from seqalg.values import EMPTY

from conftest import REPORTS
from support import (
    TERMS,
    brute_constant_subsequence,
    eval_T,
    fixture_text,
    gcd_by_subtraction,
    halting_P_direct,
    least_P_direct,
    tape_bits,
    tape_P_direct,
    tape_Q_direct,
)

EXTENDS = ("cycle", "repeat-last", "constant")


@contextmanager
def within(limit):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < limit, f"took {elapsed:.2f}s, limit {limit}s"


def random_ctx(rng, max_N=4, max_len=6):
    pattern = tuple(rng.randint(0, 1) for _ in range(rng.randint(1, max_len)))
    return TapeContext(pattern, rng.randint(1, max_N), rng.choice(EXTENDS), rng.randint(0, 1))


def bits_of(ctx):
    return tape_bits(ctx.pattern, ctx.extend, ctx.fill)


def call(*argv):
    import io

    out = io.StringIO()
    return cli.main(list(argv), out=out), out.getvalue()


# 1 ------------------------------------------------------------------------------------


@pytest.mark.criterion(1, "golden tape traces", 1)
def test_criterion_1_golden_traces(tmp_path):
    with within(1):
        cases = [("0,1,1", "repeat-last", "tape_011_repeat.txt", "[1,2]", OmegaState((), (0, 1), 1, 2)),
                 ("1,0", "cycle", "tape_10_cycle.txt", "[1,3]", OmegaState((), (1, 3), 1, 4))]
        for pattern, extend, fixture, v, final in cases:
            path = tmp_path / fixture
            code, text = call("tape", "--pattern", pattern, "--extend", extend, "--N", "2", "--emit-trace", str(path))
            assert code == 0 and text == f"v: {v}\n"
            assert path.read_bytes() == fixture_text(fixture).encode("utf-8")
            ctx = TapeContext.parse(pattern, 2, extend)
            assert tape_witness(ctx).final == final


# 2 ------------------------------------------------------------------------------------


@pytest.mark.criterion(2, "Euclid golden run and 1000 gcd pairs", 1)
def test_criterion_2_euclid():
    with within(1):
        spec = euclid_machine()
        out = run(spec, None, (28, 72), 100)
        assert [s.register for s in out.trace.states] == [(72, 28), (28, 16), (16, 12), (12, 4), (4, 0)]
        assert spec.output(out.final) == 4
        rng = random.Random(2)
        for _ in range(1000):
            a, b = rng.randrange(0, 10_000), rng.randrange(0, 10_000)
            if a == b == 0:
                continue
            out = run(spec, None, (a, b), 1000)
            assert isinstance(out, Terminated)
            assert spec.output(out.final) == gcd_by_subtraction(a, b), (a, b)


# 3 ------------------------------------------------------------------------------------


@pytest.mark.criterion(3, "n.c.i. realizers on 3x1000 samples", 10)
def test_criterion_3_nci_realizers():
    rng = random.Random(3)
    with within(10):
        for _ in range(1000):
            qt = [rng.random() < 0.5 for _ in range(31)]
            ft = [rng.randrange(31) for _ in range(31)]
            Q = qt.__getitem__
            u = rng.randrange(31)
            w = nci_realize(least_element_machine(LeastElementContext(Q)), u, Oracle(ft.__getitem__), 1000)
            assert w.y == ft[w.x] and least_P_direct(Q)(u, w.x, w.y), (qt, ft, u)

        for _ in range(1000):
            k = rng.randint(2, 5)
            shift = rng.randrange(k)
            T = lambda a, b, n, k=k, shift=shift: (n + shift + a) % k == 0
            ft = [rng.randrange(20) for _ in range(20)]
            u = rng.randrange(10)
            w = nci_realize(halting_realizer_machine(T), u, Oracle(ft.__getitem__), 100)
            assert w.y == ft[w.x] and halting_P_direct(T)(u, w.x, w.y)

        for _ in range(1000):
            ctx = random_ctx(rng)
            u = tuple(sorted(rng.sample(range(12), rng.randint(0, 3))))
            ft = [rng.randrange(24) for _ in range(24)]
            w = nci_realize(tape_machine(ctx), u, Oracle(ft.__getitem__), 100)
            assert w.y == ft[w.x] and tape_P_direct(bits_of(ctx))(u, w.x, w.y), (ctx, u, ft)


# 4 ------------------------------------------------------------------------------------


def _coherent(spec, oracle, u, fuel):
    out = run(spec, oracle, u, fuel)
    assert isinstance(out, Terminated), spec.name
    verdict = check_answer_coherence(spec, oracle, out.trace)
    assert verdict.holds, (spec.name, u, verdict)
    # restated directly: a filled cell always carries f(ξ(r))
    for s in out.trace.states:
        if s.cell is not EMPTY:
            assert s.cell == oracle.answer(spec.xi(s.register))


@pytest.mark.criterion(4, "answer coherence on casebook and 200+ synthetic machines", 10)
def test_criterion_4_coherence():
    rng = random.Random(4)
    with within(10):
        for _ in range(100):
            f = random_table_oracle(rng.randrange(10**6), 31, 31)
            ctx = LeastElementContext(lambda x, m=rng.randint(2, 4): x % m == 0)
            _coherent(least_element_machine(ctx), f, rng.randrange(31), 1000)
            _coherent(max_machine(), f, rng.randrange(9), 100)
            _coherent(halting_realizer_machine(lambda a, b, n: n % 2 == 0), f, rng.randrange(9), 100)
            tctx = random_ctx(rng)
            _coherent(tape_machine(tctx), f, tuple(sorted(rng.sample(range(12), rng.randint(0, 2)))), 100)
        for text in TERMS:
            _coherent(to_osa(parse_realizer(text)), Oracle(lambda n: (3 * n + 1) % 7), 2, 20_000)
        for seed in range(150):
            spec = random_acyclic_machine(seed, size=rng.randint(3, 10), values=rng.randint(2, 5))
            assert validate_approx(spec).ok
            for u in range(3):
                _coherent(spec, random_table_oracle(seed * 31 + u, 5, 5), u, 40)
        for seed in range(60):
            spec = random_search_machine(SearchFamily(seed))
            for _ in range(3):
                u = tuple(rng.randrange(6) for _ in range(rng.randrange(3)))
                _coherent(spec, random_table_oracle(rng.randrange(10**6), 6, 6), u, 100)


# 5 ------------------------------------------------------------------------------------


@pytest.mark.criterion(5, "lifted machines realize P_omega; tape witnesses checked by brute force", 30)
def test_criterion_5_lift_correctness():
    rng = random.Random(5)
    with within(30):
        # the end-to-end tape pipeline on (f1, f2)
        for _ in range(300):
            ctx = random_ctx(rng)
            r = tape_witness(ctx)
            bit = bits_of(ctx)
            alpha = r.alpha
            assert tape_P_direct(bit)(alpha.initial_segment(r.n), alpha[r.n], r.y)
            assert tape_Q_direct(bit, ctx.N)(r.v)
            assert brute_constant_subsequence(bit, ctx.N, ctx.N * 2 ** ctx.N + ctx.N) is not None

        # the tape lift on other continuous oracles
        for i in range(200):
            ctx = random_ctx(rng)
            depth = rng.randint(1, 4)
            phi1 = hashed_sequence_oracle(i, "phi1", depth, depth)
            phi2 = hashed_sequence_oracle(i, "phi2", rng.randint(1, 5), 12)
            out = run_omega(tape_omega(ctx), MultiOracle(phi1, phi2), 10_000)
            final = out.final
            alpha = PaddedSequence(final.a, 0)
            assert (final.cell1, final.cell2) == (phi1(alpha), phi2(alpha))
            assert tape_P_direct(bits_of(ctx))(alpha.initial_segment(final.cell1), alpha[final.cell1], final.cell2)

        # synthetic lifted machines
        for seed in range(60):
            fam = SearchFamily(seed, bound=rng.randint(2, 6), density=rng.random())
            spec = lift(random_search_machine(fam), 0)
            depth = rng.randint(1, 4)
            phi1 = hashed_sequence_oracle(seed, "phi1", depth, depth)
            phi2 = hashed_sequence_oracle(seed, "phi2", rng.randint(1, 5), 7)
            out = run_omega(spec, MultiOracle(phi1, phi2), 10_000)
            final = out.final
            alpha = PaddedSequence(final.a, 0)
            n, y = final.cell1, final.cell2
            assert (n, y) == (phi1(alpha), phi2(alpha))
            assert fam.holds(alpha.initial_segment(n), alpha[n], y), (seed, alpha, n, y)


# 6 ------------------------------------------------------------------------------------


@pytest.mark.criterion(6, "continuity under 200 off-query oracle mutations", 5)
def test_criterion_6_continuity():
    rng = random.Random(6)
    machines = [
        (lambda: max_machine(), lambda: rng.randrange(9)),
        (lambda: least_element_machine(LeastElementContext(lambda x: x % 2 == 0)), lambda: rng.randrange(30)),
        (lambda: halting_realizer_machine(lambda a, b, n: n % 3 == 0), lambda: rng.randrange(9)),
        (lambda: tape_machine(random_ctx(rng)), lambda: tuple(sorted(rng.sample(range(10), rng.randint(0, 2))))),
        (lambda: random_acyclic_machine(rng.randrange(1000)), lambda: rng.randrange(3)),
    ]
    mutated = 0
    with within(5):
        for trial in range(200):
            make, draw = machines[trial % len(machines)]
            spec, u = make(), draw()
            table = {x: rng.randrange(30) for x in range(40)}
            f = Oracle(lambda x: table[x])
            out = run(spec, f, u, 1000)
            asked = set(query_sequence(out.trace))
            edited = dict(table)
            for x in rng.sample(sorted(set(table) - asked), 10):
                edited[x] = table[x] + 1 + rng.randrange(5)
            mutated += sum(edited[x] != table[x] for x in table)
            g = Oracle(lambda x: edited[x])
            again = run(spec, g, u, 1000)
            assert again.final == out.final, (spec.name, u)
            assert query_sequence(again.trace) == query_sequence(out.trace)
    assert mutated == 2000


# 7 ------------------------------------------------------------------------------------


@pytest.mark.criterion(7, "lifted control flow graph and golden paths", 1)
def test_criterion_7_graph_lift():
    with within(1):
        lifted = lift_cfg(tape_graph(), TAPE_OMEGA_I, TAPE_OMEGA_E, 1)
        got = lifted.to_json()
        want = json.loads(fixture_text("tape_lift_level1.json"))
        for key in ("vertices", "plain_edges", "oracle_edges"):
            assert sorted(map(json.dumps, got[key])) == sorted(map(json.dumps, want[key])), key
        proj = omega_projection(tape_projection)
        for ctx, fixture in [(TapeContext((0, 1, 1), 2), "path_011_repeat.txt"), (TapeContext((1, 0), 2, "cycle"), "path_10_cycle.txt")]:
            r = tape_witness(ctx)
            assert verify_cfg(lifted, proj, [r.trace]).ok
            assert [vertex_label(proj(s)) for s in r.trace.states] == fixture_text(fixture).splitlines()


# 8 ------------------------------------------------------------------------------------


def _weakly_descends(a, b):
    """Direct restatement over raw prefixes: equal, one more element, or a larger entry at the end."""
    if a == b or (len(b) == len(a) + 1 and b[:-1] == a):
        return True
    i = len(b) - 1
    return 0 <= i < len(a) and b[:i] == a[:i] and a[i] < b[i]


@pytest.mark.criterion(8, "lifted tape runs descend under the lifted order", 1)
def test_criterion_8_descent():
    rng = random.Random(8)
    with within(1):
        contexts = [TapeContext((0, 1, 1), 2), TapeContext((1, 0), 2, "cycle")]
        contexts += [random_ctx(rng, max_N=3) for _ in range(60)]
        checked = 0
        for ctx in contexts:
            spec = tape_omega(ctx)
            trace = tape_witness(ctx, spec=spec).trace
            assert check_descending(spec, lift_order(LESS), [trace]).ok, ctx
            es = trace.entries
            for prev, e in zip(es, es[1:]):
                if e.kind is Kind.STEP:
                    a = tuple(spec.xi(prev.state.register).prefix)
                    b = tuple(spec.xi(e.state.register).prefix)
                    assert _weakly_descends(a, b), (ctx, a, b)
                    checked += 1
        assert checked > 100


# 9 ------------------------------------------------------------------------------------


def _sample_phi1(rng, N, ctx, i):
    """A functional reading only the first N entries with values below N."""
    kind = i % 4
    if kind == 3:
        # the deepest choice everywhere; explores the most levels
        return "const", lambda alpha, N=N: N - 1
    if kind == 0:
        f1, _, _ = tape_counterexample_functions(ctx)
        return "f1", f1
    if kind == 1:
        return "hashed", hashed_sequence_oracle(i, "phi1", N, N)
    table = {}

    def phi(alpha):
        key = alpha.initial_segment(N)
        if key not in table:
            table[key] = rng.randrange(N)
        return table[key]

    return "lazy-table", phi


@pytest.mark.criterion(9, "query counts within the conjectured bounds", 30)
def test_criterion_9_bounds():
    rng = random.Random(9)
    h = lambda i: 2
    violations = []
    worst = {}
    with within(30):
        for i in range(400):
            N = 1 + i % 4
            ctx = random_ctx(rng, max_N=N)
            ctx = replace(ctx, N=N)
            label, phi1 = _sample_phi1(rng, N, ctx, i)
            _, f2, _ = tape_counterexample_functions(ctx)
            phi2 = f2 if rng.random() < 0.5 else hashed_sequence_oracle(i, "phi2", rng.randint(1, 5), 12)
            out = run_omega(tape_omega(ctx), MultiOracle(phi1, phi2), 100_000)
            q1, q2 = len(out.trace.queries(1)), len(out.trace.queries(2))
            b1, b2 = mind_change_bounds(h, N)
            w = worst.setdefault(N, [0, 0, b1, b2, 0])
            w[0], w[1], w[4] = max(w[0], q1), max(w[1], q2), w[4] + 1
            if q1 > b1 or q2 > b2:
                violations.append(f"N={N} tape={ctx.pattern}/{ctx.extend} phi1={label} #1={q1}>{b1}? #2={q2}>{b2}?")
    for N in sorted(worst):
        q1, q2, b1, b2, runs = worst[N]
        REPORTS.append(f"h=2 N={N}: {runs} runs, max first-oracle queries {q1} (bound {b1}), "
                       f"max second-oracle queries {q2} (bound {b2})")
    assert not violations, violations[:5]


# 10 -----------------------------------------------------------------------------------


@pytest.mark.criterion(10, "System T reducer agrees with environment semantics", 5)
def test_criterion_10_system_t():
    assert len(TERMS) >= 20
    with within(5):
        for text in TERMS:
            t = parse_realizer(text)
            for u in range(4):
                for f in (lambda n: n + 2, lambda n: (5 * n + 1) % 6, lambda n: 0, lambda n: n):
                    x, y = normalize_with_oracle(t, f, u, 50_000)
                    assert x == eval_T(apps(t, PHI, Num(u)), f), text
                    assert x == eval_T(t, f)(f)(u) and y == f(x)


# 11 -----------------------------------------------------------------------------------


@pytest.mark.criterion(11, "validator accepts casebook machines and rejects three mutants", 1)
def test_criterion_11_validator():
    with within(1):
        even = LeastElementContext(lambda x: x % 2 == 0)
        good = [least_element_machine(even),
                halting_realizer_machine(lambda a, b, n: n % 2 == 0),
                tape_machine(TapeContext((1, 0), 2, "cycle")),
                tape_machine(TapeContext((0, 1, 1), 2))]
        for spec in good:
            report = validate_approx(spec, bound=10)
            assert report.ok and report.checked > 0, (spec.name, report.violations[:3])

        base = least_element_machine(even)

        def keep_but_move(s):
            c, x = s.register
            if c == "cs" and not s.empty and not (s.cell < x and s.cell % 2 == 0):
                return MachineState(("ce", x + 1), s.cell)
            return base.step(s)

        mutants = {
            "i": replace(base, pi=lambda s: s.register[1] + 1),
            "ii": replace(base, is_end=lambda s: s.register[0] == "ce"),
            "iii": replace(base, step=keep_but_move),
        }
        for condition, spec in mutants.items():
            report = validate_approx(spec, bound=10)
            assert report.conditions() == {condition}, (condition, report.conditions())
