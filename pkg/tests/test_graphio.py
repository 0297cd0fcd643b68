from __future__ import annotations

import networkx as nx
import numpy as np
import pytest

from helpers import random_input, random_pattern, same_channel
from pmmft.angles import Angle, AnglePoly
from pmmft.graphio import (
    NotStandardized,
    basis_label,
    extract_graph,
    one_buffered_schedule,
    pattern_from_graph,
    rounds,
    schedule_to_pattern,
    to_dot,
)
from pmmft.pattern import build_named, compose_serial, validate
from pmmft.rewrite import standardize


def std(p):
    return standardize(p, trace=False)[0]


class TestGraph:
    def test_j0(self):
        g = extract_graph(build_named("J", 0))
        assert g.vertices == (1, 2)
        assert g.edges == frozenset({frozenset({1, 2})})
        assert g.role(1) == "measured(X)" and g.role(2) == "output" and g.label(1) == "input"

    def test_requires_standard(self):
        j = build_named("J", 0)
        with pytest.raises(NotStandardized):
            extract_graph(compose_serial(j, j))

    def test_networkx_and_dict(self):
        g = extract_graph(std(build_named("T+")))
        nxg = g.to_networkx()
        assert nx.is_connected(nxg) and nxg.number_of_edges() == len(g.edges)
        d = g.to_dict()
        assert d["inputs"] == [1] and len(d["vertices"]) == 3

    def test_basis_labels(self):
        assert basis_label(AnglePoly.constant(Angle.of(1, 2))) == "Y"
        assert basis_label(AnglePoly.constant(Angle.of(1, 4))) == "pi/4"
        assert basis_label(AnglePoly({frozenset({3}): Angle.of(1, 1)})) == "X*"

    def test_pattern_from_graph_round_trip(self):
        p = std(build_named("T+"))
        g = extract_graph(p)
        q = pattern_from_graph(g)
        assert validate(q) == []
        assert extract_graph(q) == g

    def test_dot(self):
        text = to_dot(extract_graph(build_named("J", 0)), name="j")
        assert text.startswith("graph j {") and "1 -- 2;" in text
        assert "shape=box" in text and 'fillcolor="white"' in text


class TestRounds:
    def test_examples(self):
        j0 = build_named("J", 0)
        assert rounds(std(compose_serial(j0, j0))).depth == 1
        assert rounds(std(build_named("J", Angle.of(1, 4)))).depth == 1

    def test_adaptive_chain(self):
        j = build_named("J", Angle.of(1, 4))
        p = std(compose_serial(j, j))
        dag = rounds(p)
        assert dag.depth == 2 and dag.round_of(2) == 1
        assert rounds(p, frame_tracking=True).depth == 2

    def test_frame_tracking_removes_pauli_dependencies(self):
        j0 = build_named("J", 0)
        p = std(compose_serial(compose_serial(j0, j0), j0))
        assert rounds(p, frame_tracking=True).depth == 1

    def test_round_of_unknown(self):
        with pytest.raises(KeyError):
            rounds(build_named("J", 0)).round_of(42)

    def test_networkx_dag(self):
        j = build_named("J", Angle.of(1, 4))
        dag = rounds(std(compose_serial(j, j)))
        assert nx.is_directed_acyclic_graph(dag.to_networkx())


class TestSchedule:
    @pytest.mark.parametrize("seed", range(10))
    def test_same_channel(self, seed):
        rng = np.random.default_rng(seed)
        p = std(random_pattern(rng))
        phases = one_buffered_schedule(p)
        q = schedule_to_pattern(p, phases)
        assert sorted(map(repr, q.seq)) == sorted(map(repr, p.seq))
        assert validate(q) == []
        assert same_channel(p, q, random_input(rng, len(p.inputs)))

    def test_requires_standard(self):
        j = build_named("J", 0)
        with pytest.raises(NotStandardized):
            one_buffered_schedule(compose_serial(j, j))
