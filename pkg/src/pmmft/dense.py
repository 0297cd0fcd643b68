"""Dense state-vector simulation of patterns.

Qubits are tensor axes; a measured qubit's axis is contracted away at once,
so memory stays at ``2**live``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from pmmft.angles import Angle
from pmmft.pattern import CorrectX, CorrectZ, Entangle, Measure, Pattern, Prepare

__all__ = [
    "DenseState",
    "BranchResult",
    "DimensionMismatch",
    "TooManyBranches",
    "NotDeterministic",
    "named_state",
    "run",
    "enumerate_branches",
    "extract_unitary",
    "canonical_phase",
    "equal_up_to_phase",
    "branch_channels",
]

NORM_TOL = 1e-12


class DimensionMismatch(ValueError):
    pass


class TooManyBranches(RuntimeError):
    pass


class NotDeterministic(RuntimeError):
    def __init__(self, message: str, witness: tuple[tuple[int, ...], tuple[int, ...]] | None = None) -> None:
        super().__init__(message)
        self.witness = witness


def plus_state(angle: Angle | float = 0.0) -> np.ndarray:
    return np.array([1.0, cmath.exp(1j * float(angle))]) / math.sqrt(2)


def named_state(name: str) -> np.ndarray:
    table = {
        "zero": np.array([1.0, 0.0], dtype=complex),
        "one": np.array([0.0, 1.0], dtype=complex),
        "plus": plus_state(0.0),
        "minus": plus_state(math.pi),
        "plus_pi2": plus_state(math.pi / 2),
        "plus_pi4": plus_state(math.pi / 4),
    }
    try:
        return table[name]
    except KeyError:
        raise ValueError(f"unknown named state {name!r}; expected one of {sorted(table)}") from None


@dataclass
class DenseState:
    """Amplitude tensor plus the qubit label carried by each axis.

    ``extra`` leading axes belong to an untouched reference system (used for
    channel extraction) and are never relabelled.
    """

    psi: np.ndarray
    labels: list[int]
    extra: int = 0
    signals: dict[int, int] = field(default_factory=dict)

    @classmethod
    def from_vector(cls, vec: np.ndarray, labels: Sequence[int], extra: int = 0) -> DenseState:
        n = len(labels) + extra
        vec = np.array(vec, dtype=complex)  # copy: entangle works in place
        if vec.size != 2**n:
            raise DimensionMismatch(f"state of size {vec.size} given for {n} qubits")
        return cls(vec.reshape((2,) * n) if n else vec.reshape(()), list(labels), extra)

    def axis(self, q: int) -> int:
        return self.extra + self.labels.index(q)

    def copy(self) -> DenseState:
        return DenseState(self.psi.copy(), list(self.labels), self.extra, dict(self.signals))

    def norm(self) -> float:
        return float(np.linalg.norm(self.psi))

    def prepare(self, q: int, angle: Angle | float) -> None:
        self.psi = np.multiply.outer(self.psi, plus_state(angle))
        self.labels.append(q)

    def entangle(self, i: int, j: int) -> None:
        a, b = self.axis(i), self.axis(j)
        idx: list[slice | int] = [slice(None)] * self.psi.ndim
        idx[a] = 1
        idx[b] = 1
        self.psi[tuple(idx)] *= -1

    def apply_x(self, q: int) -> None:
        self.psi = np.flip(self.psi, axis=self.axis(q)).copy()

    def apply_z(self, q: int, angle: Angle | float) -> None:
        a = self.axis(q)
        t = float(angle)
        shape = [1] * self.psi.ndim
        shape[a] = 2
        self.psi = self.psi * np.array([cmath.exp(-0.5j * t), cmath.exp(0.5j * t)]).reshape(shape)

    def project(self, q: int, angle: Angle | float, outcome: int) -> float:
        """Contract ``q`` with the bra of ``|+-_angle>``; return the squared norm left.

        The state is left unnormalised so branch weights compose.
        """
        a = self.axis(q)
        t = float(angle)
        bra = np.array([1.0, (-1) ** outcome * cmath.exp(-1j * t)]) / math.sqrt(2)
        self.psi = np.tensordot(self.psi, bra, axes=([a], [0]))
        self.labels.remove(q)
        return float(np.vdot(self.psi, self.psi).real)

    def vector(self, order: Sequence[int] | None = None) -> np.ndarray:
        """Flattened amplitudes with axes in ``order`` (reference axes first)."""
        order = list(self.labels) if order is None else list(order)
        perm = list(range(self.extra)) + [self.axis(q) for q in order]
        return np.transpose(self.psi, perm).reshape(-1)


@dataclass(frozen=True)
class BranchResult:
    outcomes: tuple[int, ...]
    measured: tuple[int, ...]
    probability: float
    state: np.ndarray

    def signal_map(self) -> dict[int, int]:
        return dict(zip(self.measured, self.outcomes))


def _initial(p: Pattern, input_state: np.ndarray | None, extra: int = 0) -> DenseState:
    n_in = len(p.inputs)
    if input_state is None:
        if n_in:
            input_state = np.ones(2**n_in, dtype=complex) / math.sqrt(2**n_in)
        else:
            input_state = np.ones(1, dtype=complex)
    return DenseState.from_vector(input_state, p.inputs, extra)


def _apply_unitary(st: DenseState, cmd, signals: Mapping[int, int]) -> None:
    if isinstance(cmd, Prepare):
        st.prepare(cmd.q, cmd.angle)
    elif isinstance(cmd, Entangle):
        st.entangle(cmd.i, cmd.j)
    elif isinstance(cmd, CorrectX):
        if cmd.cond.evaluate(signals):
            st.apply_x(cmd.q)
    elif isinstance(cmd, CorrectZ):
        if cmd.cond.evaluate(signals):
            st.apply_z(cmd.q, cmd.angle)
    else:
        raise TypeError(cmd)


def run(
    p: Pattern,
    input_state: np.ndarray | None = None,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, dict[int, int]]:
    """Sample one trajectory; returns the normalised output vector and signals."""
    rng = rng if rng is not None else np.random.default_rng(seed)
    st = _initial(p, input_state)
    weight = st.norm() ** 2
    for cmd in p.seq:
        if isinstance(cmd, Measure):
            angle = cmd.angle.evaluate(st.signals)
            trial = st.copy()
            w0 = trial.project(cmd.q, angle, 0)
            if rng.random() < w0 / weight:
                s, st, w = 0, trial, w0
            else:
                s, w = 1, st.project(cmd.q, angle, 1)
            st.psi = st.psi / math.sqrt(w)
            weight = 1.0
            st.signals[cmd.q] = s
        else:
            _apply_unitary(st, cmd, st.signals)
    return st.vector(p.outputs), dict(st.signals)


def _branches(p: Pattern, st: DenseState, start: int, cap: int) -> list[tuple[tuple[int, ...], DenseState]]:
    """Depth-first walk over outcomes; states stay unnormalised."""
    seq = p.seq
    for idx in range(start, len(seq)):
        cmd = seq[idx]
        if isinstance(cmd, Measure):
            angle = cmd.angle.evaluate(st.signals)
            out = []
            for s in (0, 1):
                child = st.copy() if s == 0 else st
                child.project(cmd.q, angle, s)
                child.signals[cmd.q] = s
                if child.norm() ** 2 < 1e-30:
                    continue
                for outcomes, leaf in _branches(p, child, idx + 1, cap):
                    out.append(((s,) + outcomes, leaf))
            return out
        _apply_unitary(st, cmd, st.signals)
    return [((), st)]


def enumerate_branches(p: Pattern, input_state: np.ndarray | None = None, cap: int = 20) -> list[BranchResult]:
    """All outcome branches with exact probabilities, ordered by outcome vector.

    Zero-probability branches are dropped.
    """
    measured = tuple(p.measured)
    if len(measured) > cap:
        raise TooManyBranches(f"{len(measured)} measurements exceed the cap of {cap}")
    st = _initial(p, input_state)
    total = st.norm() ** 2
    results = []
    for outcomes, leaf in _branches(p, st, 0, cap):
        prob = leaf.norm() ** 2 / total
        vec = leaf.vector(p.outputs)
        vec = vec / np.linalg.norm(vec)
        results.append(BranchResult(outcomes, measured, prob, vec))
    results.sort(key=lambda r: r.outcomes)
    return results


def branch_channels(p: Pattern, cap: int = 20) -> dict[tuple[int, ...], np.ndarray]:
    """Kraus operator ``K_b`` (outputs x inputs) for every branch ``b``.

    Obtained by running the pattern on half of a maximally entangled state, so
    ``K_b`` includes the branch amplitude; ``sum_b K_b^dag K_b = I``.
    """
    measured = tuple(p.measured)
    if len(measured) > cap:
        raise TooManyBranches(f"{len(measured)} measurements exceed the cap of {cap}")
    n_in = len(p.inputs)
    d_in = 2**n_in
    omega = np.eye(d_in, dtype=complex).reshape(-1)
    st = DenseState.from_vector(omega, p.inputs, extra=n_in)
    out = {}
    for outcomes, leaf in _branches(p, st, 0, cap):
        k = leaf.vector(p.outputs).reshape(d_in, -1).T
        out[outcomes] = k
    return out


def canonical_phase(m: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Rotate ``m`` so that its first entry above ``tol`` is positive real."""
    flat = m.reshape(-1)
    nz = np.flatnonzero(np.abs(flat) > tol)
    if nz.size == 0:
        return m
    ph = flat[nz[0]] / abs(flat[nz[0]])
    return m / ph


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    if a.shape != b.shape:
        return False
    return bool(np.allclose(canonical_phase(a), canonical_phase(b), atol=atol))


def extract_unitary(p: Pattern, atol: float = 1e-10) -> np.ndarray:
    """Common branch operator of a deterministic pattern, phase-canonicalised.

    Raises :class:`NotDeterministic` with a witness pair of outcome vectors
    if two branches implement different maps.
    """
    if len(p.inputs) > 4:
        raise ValueError("extract_unitary supports at most 4 inputs")
    kraus = branch_channels(p)
    ref_key = None
    ref = None
    for key, k in sorted(kraus.items()):
        norm = np.linalg.norm(k)
        if norm < 1e-12:
            continue
        u = canonical_phase(k * math.sqrt(k.shape[1]) / norm)
        if ref is None:
            ref, ref_key = u, key
            gram = u.conj().T @ u
            if not np.allclose(gram, np.eye(u.shape[1]), atol=1e-8):
                raise NotDeterministic("branch operator is not an isometry", (key, key))
            continue
        if not np.allclose(u, ref, atol=atol):
            raise NotDeterministic(f"branches {ref_key} and {key} differ", (ref_key, key))
    if ref is None:
        raise NotDeterministic("no branch with nonzero weight")
    return ref
