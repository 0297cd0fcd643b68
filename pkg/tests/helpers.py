"""Random pattern generators and small oracles shared by the tests."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from pmmft.angles import Angle, AnglePoly, Condition
from pmmft.dense import enumerate_branches, equal_up_to_phase
from pmmft.pattern import CorrectX, CorrectZ, Entangle, Measure, Pattern, Prepare

# criterion number -> one summary line, printed at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def report(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[criterion] = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(ACCEPTANCE_LINES[criterion])


QUARTERS = [Angle(Fraction(k, 2)) for k in range(4)]
EIGHTHS = [Angle(Fraction(k, 4)) for k in range(8)]


def _cond(rng: np.random.Generator, measured: list[int]) -> Condition:
    k = int(rng.integers(1, min(2, len(measured)) + 1))
    sig = rng.choice(measured, size=k, replace=False)
    return Condition(frozenset(int(s) for s in sig), bool(rng.random() < 0.2))


def _poly(rng: np.random.Generator, measured: list[int], angles: list[Angle], unit: Fraction) -> AnglePoly:
    terms = {frozenset(): angles[int(rng.integers(len(angles)))]}
    if measured and rng.random() < 0.7:
        for _ in range(int(rng.integers(1, 3))):
            s = int(rng.choice(measured))
            terms[frozenset({s})] = Angle(unit * int(rng.integers(1, int(2 / unit))))
    return AnglePoly(terms)


def random_pattern(
    rng: np.random.Generator,
    max_qubits: int = 6,
    max_measurements: int = 4,
    clifford: bool = False,
    max_inputs: int = 2,
) -> Pattern:
    """A random valid pattern with corrections interleaved anywhere."""
    n = int(rng.integers(2, max_qubits + 1))
    qubits = list(range(1, n + 1))
    n_in = int(rng.integers(0, min(max_inputs, n - 1) + 1))
    inputs = [int(q) for q in rng.choice(qubits, size=n_in, replace=False)]
    n_meas = int(rng.integers(1, min(max_measurements, n - 1) + 1))
    to_measure = set(int(q) for q in rng.choice(qubits, size=n_meas, replace=False))
    outputs = [q for q in qubits if q not in to_measure]
    angles = QUARTERS if clifford else EIGHTHS
    unit = Fraction(1, 2) if clifford else Fraction(1, 4)
    live = set(inputs)
    unprepared = [q for q in qubits if q not in inputs]
    measured: list[int] = []
    seq = []
    while unprepared or to_measure - set(measured):
        choice = rng.random()
        pending = sorted((to_measure - set(measured)) & live)
        if unprepared and (choice < 0.3 or not live):
            q = unprepared.pop(int(rng.integers(len(unprepared))))
            seq.append(Prepare(q, angles[int(rng.integers(len(angles)))]))
            live.add(q)
        elif choice < 0.6 and len(live) >= 2:
            i, j = rng.choice(sorted(live), size=2, replace=False)
            seq.append(Entangle(int(i), int(j)))
        elif choice < 0.75 and measured:
            q = int(rng.choice(sorted(live)))
            if rng.random() < 0.5:
                seq.append(CorrectX(q, _cond(rng, measured)))
            else:
                z = Angle.of(1) if clifford or rng.random() < 0.6 else angles[int(rng.integers(1, len(angles)))]
                seq.append(CorrectZ(q, z, _cond(rng, measured)))
        elif pending and not (unprepared and rng.random() < 0.5):
            q = int(rng.choice(pending))
            seq.append(Measure(q, _poly(rng, measured, angles, unit)))
            measured.append(q)
            live.discard(q)
    # a few trailing corrections on outputs
    for _ in range(int(rng.integers(0, 3))):
        if outputs:
            q = int(rng.choice(outputs))
            seq.append(CorrectX(q, _cond(rng, measured)) if rng.random() < 0.5 else CorrectZ(q, Angle.of(1), _cond(rng, measured)))
    return Pattern(seq, inputs, outputs, qubits)


def random_input(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def branch_map(p: Pattern, state: np.ndarray | None = None) -> dict[tuple[tuple[int, int], ...], tuple[float, np.ndarray]]:
    """Branches keyed by sorted (qubit, outcome) pairs, so command order does not matter."""
    out = {}
    for b in enumerate_branches(p, state):
        key = tuple(sorted(zip(b.measured, b.outcomes)))
        out[key] = (b.probability, b.state)
    return out


def same_channel(p: Pattern, q: Pattern, state: np.ndarray | None = None, atol: float = 1e-10) -> bool:
    """Branch-by-branch equality of probabilities and output states."""
    a, b = branch_map(p, state), branch_map(q, state)
    keys = set(a) | set(b)
    for k in keys:
        pa, sa = a.get(k, (0.0, None))
        pb, sb = b.get(k, (0.0, None))
        if abs(pa - pb) > atol:
            return False
        if pa > atol and not equal_up_to_phase(sa, sb, atol=1e-8):
            return False
    return True


def all_bits(n: int):
    return itertools.product((0, 1), repeat=n)


def rule_context(rng: np.random.Generator, rule: str, max_qubits: int = 4) -> tuple[Pattern, int]:
    """A random valid pattern with a rewrite redex for ``rule`` at the returned index.

    The redex is a correction inserted right before a measurement (``merge_z``,
    ``merge_x``) or an entanglement (``commute_ex``, ``commute_ez``) of its
    qubit, conditioned on signals measured earlier.
    """
    target = Measure if rule in ("merge_z", "merge_x") else Entangle
    while True:
        p = random_pattern(rng, max_qubits=max_qubits, max_measurements=3, max_inputs=2)
        spots = [i for i, c in enumerate(p.seq) if isinstance(c, target)]
        if spots:
            break
    i = int(rng.choice(spots))
    c = p.seq[i]
    q = c.q if target is Measure else int(rng.choice(c.qubits))
    earlier = [x.q for x in p.seq[:i] if isinstance(x, Measure)]
    cond = _cond(rng, earlier) if earlier and rng.random() < 0.8 else Condition(frozenset(), True)
    if rule in ("merge_x", "commute_ex"):
        corr = CorrectX(q, cond)
    else:
        corr = CorrectZ(q, EIGHTHS[int(rng.integers(1, 8))], cond)
    return p.with_seq(p.seq[:i] + (corr,) + p.seq[i:]), i
