from __future__ import annotations

import math

import numpy as np
import pytest

from helpers import random_pattern
from pmmft.angles import Angle, AnglePoly
from pmmft.framesim import FrameSimulator
from pmmft.pattern import Entangle, Measure, Pattern, Prepare, build_named
from pmmft.stab import NoiseModel, NonClifford, outcome_distribution


def _closed(p):
    seq = [Prepare(q) for q in p.inputs] + list(p.seq) + [Measure(q) for q in p.outputs]
    return Pattern(seq, (), ())


def _flip_only(seed):
    rng = np.random.default_rng(seed)
    while True:
        p = _closed(random_pattern(rng, clifford=True))
        try:
            return p, FrameSimulator(p)
        except NonClifford:
            continue


class TestNoiseless:
    @pytest.mark.parametrize("seed", range(12))
    def test_matches_exact_distribution(self, seed):
        p, sim = _flip_only(seed)
        n = 4000
        s = sim.sample(n, rng=np.random.default_rng(seed))
        exact = outcome_distribution(p)
        keys, counts = np.unique(s.signals, axis=0, return_counts=True)
        seen = {tuple(int(v) for v in k): c for k, c in zip(keys, counts)}
        assert set(seen) <= set(exact)
        for key, prob in exact.items():
            sd = math.sqrt(n * prob * (1 - prob)) + 1
            assert abs(seen.get(key, 0) - n * prob) < 6 * sd

    def test_no_residual_frame(self):
        sim = FrameSimulator(build_named("J", 0))
        s = sim.sample(50, rng=np.random.default_rng(0))
        assert not s.x.any() and not s.z.any()
        assert s.outputs == (2,) and s.column(1).shape == (50,)


class TestNoise:
    def test_measurement_flip(self):
        sim = FrameSimulator(Pattern([Prepare(1), Measure(1)]))
        s = sim.sample(100, NoiseModel(p_meas=1.0), np.random.default_rng(0))
        assert s.column(1).all()

    def test_prep_fault_rate(self):
        # a uniform Pauli after |+> flips an X measurement two times in three
        sim = FrameSimulator(Pattern([Prepare(1), Measure(1)]))
        n = 30000
        s = sim.sample(n, NoiseModel(p_prep=1.0), np.random.default_rng(1))
        assert abs(s.column(1).mean() - 2 / 3) < 5 * math.sqrt(2 / 9 / n)

    def test_entangling_fault_rate(self):
        # E_12 E_12 is the identity; each E faults with prob 1/2 and 8 of the
        # 15 two-qubit Paulis flip an X measurement of qubit 1
        p = Pattern([Prepare(1), Prepare(2), Entangle(1, 2), Entangle(1, 2), Measure(1), Measure(2)])
        n = 30000
        s = FrameSimulator(p).sample(n, NoiseModel(p_ent=0.5), np.random.default_rng(2))
        q = 0.5 * 8 / 15
        want = 2 * q * (1 - q)
        assert abs(s.column(1).mean() - want) < 5 * math.sqrt(want * (1 - want) / n)

    def test_residual_output_frame(self):
        s = FrameSimulator(build_named("J", 0)).sample(2000, NoiseModel(p_idle=1.0), np.random.default_rng(3))
        assert (s.x | s.z).any(axis=1).mean() > 0.5

    def test_seeded(self):
        p, sim = _flip_only(4)
        a = sim.sample(200, NoiseModel.uniform(0.1), np.random.default_rng(9))
        b = sim.sample(200, NoiseModel.uniform(0.1), np.random.default_rng(9))
        assert np.array_equal(a.signals, b.signals)


def test_rejects_basis_dependency():
    m2 = Measure(2, AnglePoly({frozenset({1}): Angle.of(1, 2)}))
    with pytest.raises(NonClifford):
        FrameSimulator(Pattern([Prepare(1), Prepare(2), Entangle(1, 2), Measure(1), m2]))
