"""Control flow graphs, their lift to the dependent-choice machine, and descent orders."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .dclift import OmegaState, PaddedSequence
from .engine import Kind, MachineState, Trace
from .values import EMPTY

STAR = "star"


def vertex_label(v) -> str:
    """Stable text for a vertex: atoms as-is, lifted vertices as ``bot1:cs'``."""
    if isinstance(v, tuple):
        tag, level, p = v
        return f"{tag}{level}:{vertex_label(p)}"
    return str(v)


@dataclass(frozen=True)
class FlowGraph:
    vertices: frozenset
    plain_edges: frozenset
    oracle_edges: frozenset

    def __post_init__(self):
        for u, v in self.plain_edges | self.oracle_edges:
            if u not in self.vertices or v not in self.vertices:
                raise ValueError(f"edge {vertex_label(u)} -> {vertex_label(v)} leaves the vertex set")

    @classmethod
    def build(cls, plain=(), oracle=(), vertices=()):
        plain, oracle = frozenset(plain), frozenset(oracle)
        vs = set(vertices)
        for u, v in plain | oracle:
            vs.update((u, v))
        return cls(frozenset(vs), plain, oracle)

    def to_json(self):
        def edges(es):
            return sorted([vertex_label(u), vertex_label(v)] for u, v in es)
        return {"vertices": sorted(vertex_label(v) for v in self.vertices),
                "plain_edges": edges(self.plain_edges),
                "oracle_edges": edges(self.oracle_edges)}


@dataclass(frozen=True)
class ProjectionMap:
    project: Callable[[Any], Any]

    def __call__(self, state):
        return self.project(state)


@dataclass
class CfgVerdict:
    missing: list = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.missing


def verify_cfg(graph: FlowGraph, proj: Callable, traces: Iterable[Trace]) -> CfgVerdict:
    """Every consecutive pair of every run must walk along an edge of the right kind.

    The kind of the following trace entry tells whether ``s_i`` was a query
    state, so no machine is needed.
    """
    verdict = CfgVerdict()
    for ti, trace in enumerate(traces):
        es = trace.entries
        for i in range(len(es) - 1):
            edge = (proj(es[i].state), proj(es[i + 1].state))
            oracle = es[i + 1].kind is Kind.QUERY
            edges = graph.oracle_edges if oracle else graph.plain_edges
            verdict.checked += 1
            if edge not in edges:
                verdict.missing.append((ti, i, "oracle" if oracle else "plain", edge))
    return verdict


def lift_cfg(graph: FlowGraph, omega_I: Iterable, omega_E: Iterable, max_level: int) -> FlowGraph:
    """The lifted graph, truncated to levels ``0..max_level``."""
    if max_level < 0:
        raise ValueError("max_level must be non-negative")
    omega_I, omega_E = frozenset(omega_I), frozenset(omega_E)
    levels = range(max_level + 1)
    plain, oracle = set(), set()
    for n in levels:
        for p, q in graph.plain_edges:
            plain.add((("bot", n, p), ("bot", n, q)))
        for p, q in graph.oracle_edges:
            oracle.add((("bot", n, p), ("top", n, p)))
            oracle.add((("top", n, p), ("bot", n, q)))
            if n + 1 <= max_level:
                for u in omega_I:
                    plain.add((("top", n, p), ("bot", n + 1, u)))
                for u in omega_E:
                    plain.add((("bot", n + 1, u), ("bot", n, q)))
    for u in omega_E:
        plain.add((("bot", 0, u), STAR))
    vertices = {STAR} | {(tag, n, p) for tag in ("bot", "top") for n in levels for p in graph.vertices}
    return FlowGraph(frozenset(vertices), frozenset(plain), frozenset(oracle))


def project_omega(state: OmegaState, inner_proj: Callable):
    if not state.sigma:
        return STAR
    level = len(state.sigma) - 1
    p = inner_proj(MachineState(state.sigma[-1], state.cell2))
    top = state.cell1 is not EMPTY and state.cell2 is EMPTY
    return ("top" if top else "bot", level, p)


def omega_projection(inner_proj: Callable) -> ProjectionMap:
    return ProjectionMap(lambda s: project_omega(s, inner_proj))


@dataclass(frozen=True)
class DescentOrder:
    """``strictly_descends(x, y)`` means ``x ≻ y``."""

    strictly_descends: Callable[[Any, Any], bool]
    name: str = "≻"

    def __call__(self, x, y) -> bool:
        return bool(self.strictly_descends(x, y))

    def weakly(self, x, y) -> bool:
        return x == y or self(x, y)


GREATER = DescentOrder(lambda x, y: x > y, ">")
# the tape machine only ever moves its candidate upwards
LESS = DescentOrder(lambda x, y: x < y, "<")


@dataclass
class DescentVerdict:
    violations: list = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


def check_descending(spec, order: DescentOrder, traces: Iterable[Trace]) -> DescentVerdict:
    """``ξ(s) ⪰ ξ(t)`` over every plain step ``s ▷ t`` of the traces."""
    verdict = DescentVerdict()
    for ti, trace in enumerate(traces):
        es = trace.entries
        for i in range(len(es) - 1):
            if es[i + 1].kind is not Kind.STEP:
                continue
            a = spec.xi(es[i].state.register)
            b = spec.xi(es[i + 1].state.register)
            verdict.checked += 1
            if not order.weakly(a, b):
                verdict.violations.append((ti, i, a, b))
    return verdict


def lift_order(order: DescentOrder, fill: Any = 0) -> DescentOrder:
    """The order on padded sequences induced by ``order`` on elements.

    ``a ≻ a::x`` (extension by one element), and ``a ≻ a[:i]::y`` whenever
    ``a[i] ≻ y``. Both sides must be padded with ``fill``. Prefixes are
    compared as represented.
    """

    def descends(alpha: PaddedSequence, beta: PaddedSequence) -> bool:
        if alpha.fill != fill or beta.fill != fill:
            return False
        a, b = alpha.prefix, beta.prefix
        if len(b) == len(a) + 1 and b[:len(a)] == a:
            return True
        i = len(b) - 1
        return 0 <= i < len(a) and b[:i] == a[:i] and order(a[i], b[i])

    return DescentOrder(descends, f"{order.name}ω")


def _dot_id(label: str) -> str:
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_dot(graph: FlowGraph, name: str = "G") -> str:
    """DOT text with sorted vertices; oracle edges are dotted."""
    lines = [f"digraph {_dot_id(name)} {{"]
    for label in sorted(vertex_label(v) for v in graph.vertices):
        lines.append(f"  {_dot_id(label)};")
    edges = [(vertex_label(u), vertex_label(v), "") for u, v in graph.plain_edges]
    edges += [(vertex_label(u), vertex_label(v), " [style=dotted]") for u, v in graph.oracle_edges]
    for u, v, attr in sorted(edges):
        lines.append(f"  {_dot_id(u)} -> {_dot_id(v)}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
