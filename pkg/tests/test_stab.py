from __future__ import annotations

import json
import math

import numpy as np
import pytest

from helpers import random_pattern
from pmmft.angles import Angle
from pmmft.dense import enumerate_branches, equal_up_to_phase
from pmmft.pattern import CorrectX, Entangle, Measure, Pattern, Prepare, build_named, compose_serial
from pmmft.rewrite import standardize
from pmmft.stab import (
    ForcedOutcomeImpossible,
    NoiseEvent,
    NoiseModel,
    NonClifford,
    PauliOp,
    Tableau,
    apply,
    load_noise_model,
    outcome_distribution,
    sample,
)

PAULIS = "IXYZ"


class TestPauliOp:
    @pytest.mark.parametrize("a", [p + q for p in PAULIS for q in PAULIS])
    def test_product_matches_matrices(self, a):
        for b in (p + q for p in PAULIS for q in PAULIS):
            pa, pb = PauliOp.from_string(a), PauliOp.from_string(b)
            assert np.allclose((pa * pb).matrix(), pa.matrix() @ pb.matrix())
            comm = np.allclose(pa.matrix() @ pb.matrix(), pb.matrix() @ pa.matrix())
            assert pa.commutes(pb) == comm

    def test_parse_and_str(self):
        op = PauliOp.from_string("-iXZ", (4, 7))
        assert op.phase == 3 and op.qubits == (4, 7) and str(op) == "-iXZ"
        assert not op.is_hermitian and op.weight == 2

    def test_length_check(self):
        with pytest.raises(ValueError):
            PauliOp((1, 2), (0,), (0, 0))


class TestTableau:
    def test_plus_state(self):
        t = Tableau()
        t.add_qubit(1)
        assert t.expectation(PauliOp.single(1, "X")) == 1
        assert t.expectation(PauliOp.single(1, "Z")) == 0

    @pytest.mark.parametrize("k, letter, sign", [(1, "Y", 1), (2, "X", -1), (3, "Y", -1)])
    def test_rotated_preparations(self, k, letter, sign):
        t = Tableau()
        t.add_qubit(1, k)
        assert t.expectation(PauliOp.single(1, letter)) == sign

    def test_bell_pair(self):
        t = Tableau()
        t.add_qubit(1)
        t.add_qubit(2)
        t.cz(1, 2)
        t.h(2)
        assert t.expectation(PauliOp.from_string("XX", (1, 2))) == 1
        assert t.expectation(PauliOp.from_string("ZZ", (1, 2))) == 1
        assert t.check()

    def test_z_measure_is_fair(self):
        outs = []
        for seed in range(400):
            t = Tableau()
            t.add_qubit(1)
            outs.append(t.measure(PauliOp.single(1, "Z"), rng=np.random.default_rng(seed))[0])
        assert abs(np.mean(outs) - 0.5) < 5 * math.sqrt(0.25 / 400)

    def test_forced_impossible(self):
        t = Tableau()
        t.add_qubit(1)
        with pytest.raises(ForcedOutcomeImpossible):
            t.measure(PauliOp.single(1, "X"), forced=1)

    def test_y_power_sign(self):
        # Y^n on |+_{pi/2}>^n has eigenvalue +1
        t = Tableau()
        for q in range(7):
            t.add_qubit(q, 1)
        assert t.expectation(PauliOp.from_string("Y" * 7)) == 1
        assert t.expectation(PauliOp.from_string("-" + "Y" * 7)) == -1

    def test_state_vector(self):
        t = Tableau()
        t.add_qubit(1)
        t.add_qubit(2)
        t.cz(1, 2)
        want = np.diag([1, 1, 1, -1]) @ np.full(4, 0.5)
        assert equal_up_to_phase(t.state_vector([1, 2]), want)

    def test_relabel(self):
        t = Tableau()
        t.add_qubit(1, 1)
        t.relabel({1: 9})
        assert t.labels == [9] and t.expectation(PauliOp.single(9, "Y")) == 1

    def test_non_hermitian_rejected(self):
        t = Tableau()
        t.add_qubit(1)
        with pytest.raises(ValueError):
            t.measure(PauliOp.single(1, "X", phase=1))


class TestApply:
    def test_j0_on_plus(self):
        res = apply(build_named("J", 0), seed=1)
        # J0 |+> = |0>
        assert res.tableau.expectation(PauliOp.single(2, "Z")) == 1

    @pytest.mark.parametrize("k", range(4))
    def test_measurement_bases(self, k):
        # |+_{k pi/2}> measured at angle k pi/2 always gives 0
        p = Pattern([Prepare(1, Angle.of(k, 2)), Measure(1, Angle.of(k, 2))])
        assert all(apply(p, seed=s).signals[1] == 0 for s in range(8))

    def test_non_clifford(self):
        with pytest.raises(NonClifford) as exc:
            apply(build_named("J", Angle.of(1, 4)))
        assert exc.value.index is not None

    def test_forced_outcomes(self):
        p = build_named("J", 0)
        assert apply(p, forced_outcomes={1: 1}).signals[1] == 1

    def test_p_meas_one_flips(self):
        p = Pattern([Prepare(1), Measure(1)])
        res = apply(p, noise=NoiseModel(p_meas=1.0), seed=0)
        assert res.signals[1] == 1 and res.noise_log[0].kind == "flip"

    def test_p_ent_rate(self):
        n, p_ent = 4000, 0.1
        p = Pattern([Prepare(1), Prepare(2), Entangle(1, 2), Measure(1), Measure(2)])
        hits = sum(len(apply(p, noise=NoiseModel(p_ent=p_ent), seed=s).noise_log) for s in range(n))
        assert abs(hits - n * p_ent) < 5 * math.sqrt(n * p_ent * (1 - p_ent))

    def test_replay_noise_log(self):
        p = standardize(compose_serial(build_named("J", 0), build_named("J", 0)), trace=False)[0]
        p = Pattern([Prepare(1), *p.seq, Measure(3)], (), ())
        res = apply(p, noise=NoiseModel.uniform(0.3), seed=7)
        again = apply(p, noise_log=res.noise_log, forced_outcomes=res.signals)
        assert again.signals == res.signals and again.noise_log == res.noise_log

    def test_noise_event_json(self):
        ev = NoiseEvent(3, "pauli", (1, 2), "XZ")
        assert NoiseEvent.from_dict(json.loads(json.dumps(ev.to_dict()))) == ev

    def test_idle_noise_on_outputs(self):
        res = apply(build_named("J", 0), noise=NoiseModel(p_idle=1.0), seed=0)
        assert {e.qubits for e in res.noise_log} == {(1,), (2,)}


class TestNoiseModel:
    @pytest.mark.parametrize("bad", [-0.1, 1.5])
    def test_validation(self, bad):
        with pytest.raises(ValueError):
            NoiseModel(p_prep=bad)

    def test_unknown_key(self):
        with pytest.raises(ValueError):
            NoiseModel.from_dict({"p_flip": 0.1})

    def test_load_json_and_toml(self, tmp_path):
        j = tmp_path / "n.json"
        j.write_text(json.dumps({"p_prep": 0.01, "p_meas": 0.02}))
        t = tmp_path / "n.toml"
        t.write_text("[noise]\np_prep = 0.01\np_meas = 0.02\n")
        assert load_noise_model(j) == load_noise_model(t) == NoiseModel(p_prep=0.01, p_meas=0.02)

    def test_uniform(self):
        m = NoiseModel.uniform(0.1)
        assert (m.p_prep, m.p_ent, m.p_meas, m.p_idle) == (0.1, 0.1, 0.1, 0.0)
        assert NoiseModel().is_noiseless


def _closed(p):
    seq = [Prepare(q) for q in p.inputs] + list(p.seq) + [Measure(q, Angle.of(1, 2)) for q in p.outputs]
    return Pattern(seq, (), ())


class TestDistribution:
    @pytest.mark.parametrize("seed", range(15))
    def test_matches_dense(self, seed):
        p = _closed(random_pattern(np.random.default_rng(seed), clifford=True))
        dense = {b.outcomes: b.probability for b in enumerate_branches(p)}
        stab = outcome_distribution(p)
        for key in set(dense) | set(stab):
            assert abs(dense.get(key, 0.0) - stab.get(key, 0.0)) < 1e-9

    def test_sample_shape_and_seed(self):
        p = Pattern([Prepare(1), Prepare(2), Measure(1, Angle.of(1, 2)), Measure(2)])
        a = sample(p, 100, seed=3)
        assert a.shape == (100, 2) and (a[:, 1] == 0).all()
        assert np.array_equal(a, sample(p, 100, seed=3))

    def test_correction_in_pattern(self):
        p = Pattern([Prepare(1), Prepare(2), Entangle(1, 2), Measure(1, Angle.of(1, 2)), CorrectX(2), Measure(2, Angle.of(1, 2))])
        assert sum(outcome_distribution(p).values()) == pytest.approx(1.0)
