"""Entanglement graphs, measurement dependencies, rounds and DOT export."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Iterable, Mapping

import networkx as nx

from pmmft.angles import Angle, AnglePoly
from pmmft.pattern import CORRECTIONS, Command, Entangle, Measure, Pattern, Prepare, is_standard

if TYPE_CHECKING:
    from pmmft.frames import FramePlan

__all__ = [
    "NotStandardized",
    "EntanglementGraph",
    "DependencyDag",
    "Phase",
    "extract_graph",
    "pattern_from_graph",
    "dependencies",
    "rounds",
    "one_buffered_schedule",
    "to_dot",
    "basis_label",
]


class NotStandardized(ValueError):
    pass


def basis_label(angle: AnglePoly) -> str:
    """Short basis annotation from the constant part of a measurement angle."""
    c = angle.const
    base = {0: "X", 1: "Y", 2: "-X", 3: "-Y"}.get(c.quarter_turns()) if c.is_multiple_of(Angle.of(1, 2).turns) else str(c)
    return base if angle.is_constant else f"{base}*"


@dataclass(frozen=True)
class EntanglementGraph:
    vertices: tuple[int, ...]
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    prep: Mapping[int, Angle]
    measure: Mapping[int, AnglePoly]
    edges: frozenset[frozenset[int]]

    def label(self, v: int) -> str:
        return "input" if v in self.inputs else f"prep({self.prep[v]})"

    def role(self, v: int) -> str:
        return "output" if v in self.outputs else f"measured({basis_label(self.measure[v])})"

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        for v in self.vertices:
            g.add_node(v, label=self.label(v), role=self.role(v))
        g.add_edges_from(tuple(sorted(e)) for e in self.edges)
        return g

    def to_dict(self) -> dict[str, Any]:
        return {
            "vertices": [{"id": v, "label": self.label(v), "role": self.role(v)} for v in self.vertices],
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "edges": sorted(sorted(e) for e in self.edges),
        }


def extract_graph(p: Pattern) -> EntanglementGraph:
    """Entanglement graph of a standardized pattern."""
    if not is_standard(p):
        raise NotStandardized("extract_graph needs a pattern in standard form")
    prep = {c.q: c.angle for c in p.seq if isinstance(c, Prepare)}
    meas = {c.q: c.angle for c in p.seq if isinstance(c, Measure)}
    edges = frozenset(c.edge for c in p.seq if isinstance(c, Entangle))
    order = list(p.inputs) + sorted(p.V - p.I)
    return EntanglementGraph(tuple(order), p.inputs, p.outputs, prep, meas, edges)


def pattern_from_graph(g: EntanglementGraph, measurements: Mapping[int, AnglePoly] | None = None) -> Pattern:
    """Standard pattern with ``g``'s preparations and edges and no corrections."""
    measurements = dict(g.measure if measurements is None else measurements)
    seq: list[Command] = [Prepare(v, g.prep[v]) for v in g.vertices if v not in g.inputs]
    seq += [Entangle(*sorted(e)) for e in sorted(sorted(e) for e in g.edges)]
    seq += [Measure(v, measurements[v]) for v in g.vertices if v not in g.outputs]
    return Pattern(seq, g.inputs, g.outputs, g.vertices)


@dataclass(frozen=True)
class DependencyDag:
    nodes: tuple[int, ...]
    arcs: frozenset[tuple[int, int]]
    layers: tuple[tuple[int, ...], ...]

    @property
    def depth(self) -> int:
        return len(self.layers)

    def round_of(self, q: int) -> int:
        for r, layer in enumerate(self.layers):
            if q in layer:
                return r
        raise KeyError(q)

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.arcs)
        return g


def _layer(nodes: Iterable[int], deps: Mapping[int, Iterable[int]]) -> DependencyDag:
    nodes = tuple(nodes)
    arcs = frozenset((k, j) for j in nodes for k in deps.get(j, ()))
    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    g.add_edges_from(arcs)
    if not nx.is_directed_acyclic_graph(g):
        raise ValueError("measurement dependencies contain a cycle")
    level: dict[int, int] = {}
    for v in nx.topological_sort(g):
        level[v] = max((level[u] + 1 for u in g.predecessors(v)), default=0)
    depth = max(level.values(), default=-1) + 1
    layers = tuple(tuple(v for v in nodes if level[v] == r) for r in range(depth))
    return DependencyDag(nodes, arcs, layers)


def dependencies(p: Pattern) -> dict[int, frozenset[int]]:
    """Signals read by each measurement once corrections are merged."""
    if not is_standard(p):
        from pmmft.rewrite import standardize

        p, _ = standardize(p, trace=False)
    return {c.q: c.angle.signals for c in p.seq if isinstance(c, Measure)}


def rounds(p: Pattern | FramePlan, frame_tracking: bool = False) -> DependencyDag:
    """Layer measurements by longest dependency chain.

    With ``frame_tracking`` (or when given a frame plan) only dependencies
    that change the measurement basis count; outcome flips are classical.
    """
    from pmmft.frames import FramePlan, frame_track

    if isinstance(p, Pattern) and frame_tracking:
        p = frame_track(p)
    if isinstance(p, FramePlan):
        return _layer(p.order, p.basis_dependencies)
    deps = dependencies(p)
    return _layer([c.q for c in p.seq if isinstance(c, Measure)], deps)


@dataclass(frozen=True)
class Phase:
    prepare: tuple[Command, ...]
    measure: tuple[Command, ...]

    @property
    def commands(self) -> tuple[Command, ...]:
        return self.prepare + self.measure


def one_buffered_schedule(p: Pattern) -> list[Phase]:
    """Interleave preparing round ``r+1``'s subgraph with measuring round ``r``.

    Concatenating the phases' commands gives a valid reordering of ``p``.
    """
    if not is_standard(p):
        raise NotStandardized("one_buffered_schedule needs a pattern in standard form")
    dag = rounds(p)
    depth = dag.depth
    last = max(depth - 1, 0)
    when = {q: dag.round_of(q) for q in dag.nodes}
    for q in p.V:
        when.setdefault(q, last)
    need = dict(when)
    for c in p.seq:
        if isinstance(c, Entangle):
            r = min(when[c.i], when[c.j])
            need[c.i] = min(need[c.i], r)
            need[c.j] = min(need[c.j], r)
    preps: list[list[Command]] = [[] for _ in range(max(depth, 1))]
    meas: list[list[Command]] = [[] for _ in range(max(depth, 1))]
    tail: list[Command] = []
    for c in p.seq:
        if isinstance(c, Prepare):
            preps[need[c.q]].append(c)
        elif isinstance(c, Entangle):
            preps[min(when[c.i], when[c.j])].append(c)
        elif isinstance(c, Measure):
            meas[when[c.q]].append(c)
        elif isinstance(c, CORRECTIONS):
            tail.append(c)
    if depth <= 1:
        return [Phase(tuple(preps[0]), tuple(meas[0]) + tuple(tail))]
    phases = [Phase(tuple(preps[0]), ())]
    for r in range(1, depth):
        phases.append(Phase(tuple(preps[r]), tuple(meas[r - 1])))
    phases.append(Phase((), tuple(meas[depth - 1]) + tuple(tail)))
    return phases


def schedule_to_pattern(p: Pattern, phases: Iterable[Phase]) -> Pattern:
    return p.with_seq(c for ph in phases for c in ph.commands)


_DOT_STYLE = {
    "input": 'shape=box, style=filled, fillcolor="gray80"',
    "output": 'shape=circle, style=filled, fillcolor="white"',
    "measured": 'shape=circle, style=filled, fillcolor="gray60"',
}


def to_dot(g: EntanglementGraph, name: str = "pattern") -> str:
    """Graphviz text: boxed inputs, white outputs, gray measured vertices."""
    lines = [f"graph {name} {{", "  node [fontsize=10];"]
    for v in g.vertices:
        if v in g.inputs and v not in g.outputs:
            style = _DOT_STYLE["input"]
            label = f"{v}\\n{g.role(v)}"
        elif v in g.inputs:
            style = 'shape=box, style=filled, fillcolor="white"'
            label = f"{v}"
        elif v in g.outputs:
            style = _DOT_STYLE["output"]
            label = f"{v}\\n{g.prep[v]}"
        else:
            style = _DOT_STYLE["measured"]
            label = f"{v}\\n{g.prep[v]} / {basis_label(g.measure[v])}"
        lines.append(f'  {v} [label="{label}", {style}];')
    for a, b in sorted(sorted(e) for e in g.edges):
        lines.append(f"  {a} -- {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
