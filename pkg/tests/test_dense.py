from __future__ import annotations

import math

import numpy as np
import pytest

from helpers import random_input, random_pattern
from pmmft.angles import Angle, Condition
from pmmft.dense import (
    DenseState,
    NotDeterministic,
    TooManyBranches,
    branch_channels,
    canonical_phase,
    enumerate_branches,
    equal_up_to_phase,
    extract_unitary,
    named_state,
    run,
)
from pmmft.pattern import CorrectX, Entangle, Measure, Pattern, Prepare, build_named, compose_serial

H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
CZ = np.diag([1, 1, 1, -1]).astype(complex)


def rz(a):
    return np.diag([1, np.exp(1j * a)])


class TestStates:
    def test_named(self):
        assert np.allclose(named_state("minus"), [1 / math.sqrt(2), -1 / math.sqrt(2)])
        with pytest.raises(ValueError):
            named_state("bogus")

    def test_from_vector_copies(self):
        vec = np.kron(named_state("plus"), named_state("plus"))
        keep = vec.copy()
        st = DenseState.from_vector(vec, (1, 2))
        st.entangle(1, 2)
        assert np.array_equal(vec, keep)

    def test_entangle_is_cz(self):
        st = DenseState.from_vector(np.full(4, 0.5, dtype=complex), (1, 2))
        st.entangle(1, 2)
        assert np.allclose(st.vector((1, 2)), CZ @ np.full(4, 0.5))


class TestUnitaries:
    @pytest.mark.parametrize("alpha", [0, 1, 2, 3, 5])
    def test_j(self, alpha):
        a = Angle.of(alpha, 4)
        assert equal_up_to_phase(extract_unitary(build_named("J", a)), H @ rz(float(a)))

    def test_cz(self):
        assert equal_up_to_phase(extract_unitary(build_named("CZ")), CZ)

    def test_j_composition(self):
        j = build_named("J", 0)
        assert equal_up_to_phase(extract_unitary(compose_serial(j, j)), np.eye(2))

    def test_not_deterministic(self):
        p = Pattern([Prepare(2), Entangle(1, 2), Measure(1)], (1,), (2,))
        with pytest.raises(NotDeterministic) as exc:
            extract_unitary(p)
        assert exc.value.witness is not None

    def test_too_many_inputs(self):
        with pytest.raises(ValueError):
            extract_unitary(Pattern([], (1, 2, 3, 4, 5), (1, 2, 3, 4, 5)))


class TestBranches:
    @pytest.mark.parametrize("seed", range(10))
    def test_probabilities_sum_to_one(self, seed):
        rng = np.random.default_rng(seed)
        p = random_pattern(rng)
        res = enumerate_branches(p, random_input(rng, len(p.inputs)))
        assert math.isclose(sum(b.probability for b in res), 1.0, abs_tol=1e-9)

    @pytest.mark.parametrize("seed", range(10))
    def test_channel_completeness(self, seed):
        p = random_pattern(np.random.default_rng(seed))
        ks = branch_channels(p).values()
        total = sum(k.conj().T @ k for k in ks)
        assert np.allclose(total, np.eye(2 ** len(p.inputs)), atol=1e-9)

    def test_cap(self):
        p = Pattern([Prepare(q) for q in range(1, 4)] + [Measure(q) for q in range(1, 4)])
        with pytest.raises(TooManyBranches):
            enumerate_branches(p, cap=2)

    def test_run_matches_some_branch(self):
        p = build_named("J", Angle.of(1, 4))
        psi = named_state("plus_pi4")
        vec, sig = run(p, psi, seed=3)
        assert set(sig) == {1}
        assert equal_up_to_phase(vec, H @ rz(math.pi / 4) @ psi)

    def test_run_seeded(self):
        p = Pattern([Prepare(1), Prepare(2), Measure(1, Angle.of(1, 2)), Measure(2, Angle.of(1, 2))])
        assert run(p, seed=5)[1] == run(p, seed=5)[1]

    def test_zero_branches_dropped(self):
        p = Pattern([Prepare(1), Measure(1)])
        assert [b.outcomes for b in enumerate_branches(p)] == [(0,)]

    def test_correction_applied(self):
        p = Pattern([Prepare(2), Entangle(1, 2), Measure(1), CorrectX(2, Condition.on(1))], (1,), (2,))
        for b in enumerate_branches(p, named_state("zero")):
            assert equal_up_to_phase(b.state, named_state("plus"))


def test_canonical_phase():
    m = np.array([[0, 1j], [1j, 0]])
    c = canonical_phase(m)
    assert c[0, 1] == 1 and equal_up_to_phase(m, c)
