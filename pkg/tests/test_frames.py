from __future__ import annotations

import itertools

import numpy as np
import pytest

from helpers import random_input, random_pattern
from pmmft.angles import Angle, AnglePoly, Condition
from pmmft.dense import enumerate_branches, equal_up_to_phase
from pmmft.frames import CliffordFrame, NonCliffordDependency, frame_track, plan_branches
from pmmft.pattern import CorrectZ, Entangle, Measure, Pattern, Prepare, build_named, compose_serial
from pmmft.rewrite import standardize

FRAMES = [CliffordFrame(x, k, ph) for x, k, ph in itertools.product(range(2), range(4), range(4))]


def _dense_map(p, state):
    return {b.outcomes: (b.probability, b.state) for b in enumerate_branches(p, state)}


class TestCliffordFrame:
    @pytest.mark.parametrize("a", FRAMES, ids=str)
    def test_composition_matches_matrices(self, a):
        for b in FRAMES:
            assert np.allclose((a @ b).matrix(), a.matrix() @ b.matrix())

    def test_normalised_fields(self):
        f = CliffordFrame(3, -1, 5)
        assert (f.x, f.k, f.phase) == (1, 3, 1)

    @pytest.mark.parametrize("k", range(4))
    @pytest.mark.parametrize("x", range(2))
    def test_measure_angle(self, x, k):
        f = CliffordFrame(x, k)
        theta = Angle.of(1, 4)
        bra = lambda t: np.array([1, np.exp(-1j * float(t))])  # noqa: E731
        lhs = bra(theta) @ f.matrix()
        assert equal_up_to_phase(lhs, bra(f.measure_angle(theta)))

    def test_from_correction(self):
        assert CliffordFrame.from_correction(CorrectZ(1, Angle.of(3, 2))) == CliffordFrame(k=3)

    def test_str(self):
        assert str(CliffordFrame()) == "I" and str(CliffordFrame(1, 1, 2)) == "i^2 S^1 X"


class TestFrameTrack:
    def test_j0_chain_is_flip_only(self):
        j0 = build_named("J", 0)
        plan = frame_track(compose_serial(compose_serial(j0, j0), j0))
        assert all(not d for d in plan.basis_dependencies.values())
        assert plan.flip_dependencies[3] == frozenset({1})

    def test_pi2_dependency_is_basis(self):
        m2 = Measure(2, AnglePoly({frozenset({1}): Angle.of(1, 2)}))
        plan = frame_track(Pattern([Prepare(2), Entangle(1, 2), Measure(1), m2], (1,), ()))
        assert plan.basis_dependencies[2] == frozenset({1})
        assert plan.setting(2, {1: 1}) == (Angle.of(1, 2), 0)

    def test_non_clifford_coefficient(self):
        p = Pattern([Prepare(2), Measure(1), Measure(2, AnglePoly({frozenset({1}): Angle.of(1, 4)}))], (1,), ())
        with pytest.raises(NonCliffordDependency):
            frame_track(p)

    def test_non_clifford_output_correction(self):
        p = Pattern([Prepare(2), Measure(1), CorrectZ(2, Angle.of(1, 4), Condition.on(1))], (1,), (2,))
        with pytest.raises(NonCliffordDependency):
            frame_track(p)

    def test_identity_plan(self):
        plan = frame_track(Pattern([Prepare(1), Prepare(2), Entangle(1, 2), Measure(1)], (), (2,)))
        assert plan.is_identity
        assert plan.to_dict()["order"] == [1]

    @pytest.mark.parametrize("seed", range(25))
    def test_plan_reproduces_dense(self, seed):
        rng = np.random.default_rng(seed)
        p = standardize(random_pattern(rng, clifford=True), trace=False)[0]
        state = random_input(rng, len(p.inputs))
        plan = frame_track(p)
        got = plan_branches(plan, p, state)
        want = _dense_map(p, state)
        for key in set(got) | set(want):
            pa, sa = got.get(key, (0.0, None))
            pb, sb = want.get(key, (0.0, None))
            assert abs(pa - pb) < 1e-9
            if pa > 1e-9:
                assert equal_up_to_phase(sa, sb, atol=1e-8)

    def test_non_pauli_constant_with_basis_swap(self):
        j = build_named("J", Angle.of(1, 4))
        p = standardize(compose_serial(j, j), trace=False)[0]
        plan = frame_track(p)
        assert plan.basis_dependencies[p.measured[1]] == frozenset({p.measured[0]})
        state = random_input(np.random.default_rng(0), 1)
        got, want = plan_branches(plan, p, state), _dense_map(p, state)
        assert set(got) == set(want)
        for key in want:
            assert abs(got[key][0] - want[key][0]) < 1e-9
            assert equal_up_to_phase(got[key][1], want[key][1], atol=1e-8)
