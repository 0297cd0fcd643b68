"""Vectorised Pauli-frame sampling of Clifford patterns.

One noiseless tableau run fixes a reference trajectory; each trial then only
tracks the Pauli difference from it. Reference outcomes are randomised by
injecting the stabilizer of every fresh preparation with probability 1/2,
which leaves the physical state unchanged but spreads outcomes exactly as a
real run would.

Outcome-dependent angles may only shift by multiples of pi (an outcome flip);
basis changes by pi/2 are rejected here and handled by frame tracking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from pmmft.angles import AnglePoly, Condition
from pmmft.pattern import CorrectX, CorrectZ, Entangle, Measure, Pattern, Prepare
from pmmft.stab import NoiseEvent, NoiseModel, NonClifford, PauliOp, Tableau, basis_op, check_clifford

__all__ = ["FrameSimulator", "FrameSample"]


@dataclass
class FrameSample:
    """Per-trial signals plus the residual Pauli frame on the outputs."""

    measured: tuple[int, ...]
    signals: np.ndarray  # (trials, measured) uint8
    outputs: tuple[int, ...]
    x: np.ndarray  # (trials, outputs) uint8
    z: np.ndarray

    def column(self, q: int) -> np.ndarray:
        return self.signals[:, self.measured.index(q)]

    def signal_dict(self) -> dict[int, np.ndarray]:
        return {q: self.signals[:, k] for k, q in enumerate(self.measured)}


def _flip_terms(poly: AnglePoly, where: str) -> list[frozenset[int]]:
    out = []
    for key, val in poly.terms.items():
        if not key:
            continue
        if not val.is_multiple_of(1):
            raise NonClifford(f"{where}: outcome-dependent basis change {val} needs frame tracking")
        if val.turns % 2:
            out.append(key)
    return out


def _parity(terms: list[frozenset[int]], sig: dict[int, np.ndarray], trials: int) -> np.ndarray:
    acc = np.zeros(trials, dtype=np.uint8)
    for key in terms:
        prod = np.ones(trials, dtype=np.uint8)
        for k in key:
            prod &= sig[k]
        acc ^= prod
    return acc


def _cond(c: Condition, sig: dict[int, np.ndarray], trials: int) -> np.ndarray:
    acc = np.full(trials, int(c.const), dtype=np.uint8)
    for k in c.signals:
        acc ^= sig[k]
    return acc


class FrameSimulator:
    """Sample many noisy trials of a fixed Clifford pattern at once."""

    def __init__(self, p: Pattern) -> None:
        check_clifford(p)
        self.p = p
        self._plan = []
        for idx, c in enumerate(p.seq):
            if isinstance(c, Measure):
                self._plan.append(("M", _flip_terms(c.angle, str(c))))
            elif isinstance(c, CorrectZ) and not c.cond.is_always and not c.cond.is_never and not c.angle.is_multiple_of(1):
                raise NonClifford(f"{c}: conditional non-Pauli correction", idx)
            else:
                self._plan.append(None)
        self._reference()

    def _reference(self) -> None:
        t = Tableau(max(8, len(self.p.V)))
        for q in self.p.inputs:
            t.add_qubit(q)
        sig: dict[int, int] = {}
        self.ref: dict[int, int] = {}
        self.basis_y: dict[int, int] = {}
        for c in self.p.seq:
            if isinstance(c, Prepare):
                t.add_qubit(c.q, c.angle.quarter_turns())
            elif isinstance(c, Entangle):
                t.cz(c.i, c.j)
            elif isinstance(c, CorrectX):
                if c.cond.evaluate(sig):
                    t.pauli(PauliOp.single(c.q, "X"))
            elif isinstance(c, CorrectZ):
                if c.cond.evaluate(sig):
                    t.s(c.q, c.angle.quarter_turns())
            else:
                angle = c.angle.evaluate(sig)
                op = basis_op(c.q, angle)
                forced = 0 if t.peek(op) is None else None
                s, _ = t.measure(op, forced=forced)
                sig[c.q] = s
                self.ref[c.q] = s
                self.basis_y[c.q] = angle.quarter_turns() % 2
        self.ref_signals = sig

    def sample(self, trials: int, noise: NoiseModel | None = None, rng: np.random.Generator | None = None) -> FrameSample:
        """Signals and residual output frames of ``trials`` noisy runs.

        Inputs start in ``|+>`` and carry a random X gauge so that signals
        follow the ``|+>`` distribution. The residual frame has the gauge's
        own contribution removed, so it reflects faults for any input state.
        """
        rng = rng if rng is not None else np.random.default_rng()
        noise = noise or NoiseModel()
        in_gauge = {q: rng.integers(0, 2, trials, dtype=np.uint8) for q in self.p.inputs}
        measured, signals, x, z = self._propagate(trials, noise, rng, in_gauge, True)
        if in_gauge and self.p.outputs:
            _, _, gx, gz = self._propagate(trials, NoiseModel(), rng, in_gauge, False)
            x, z = x ^ gx, z ^ gz
        return FrameSample(measured, signals, tuple(self.p.outputs), x, z)

    def single_faults(self, events: Sequence[NoiseEvent], rng: np.random.Generator | None = None) -> FrameSample:
        """One otherwise noiseless trial per event in ``events``.

        Events use the placement of :func:`pmmft.stab.apply`: Pauli faults
        land after preparations and entanglements and before measurements,
        and ``"flip"`` events invert a recorded outcome.
        """
        rng = rng if rng is not None else np.random.default_rng()
        n = len(events)
        faults: dict[int, list[tuple[int, NoiseEvent]]] = {}
        for t, ev in enumerate(events):
            faults.setdefault(ev.index, []).append((t, ev))
        in_gauge = {q: rng.integers(0, 2, n, dtype=np.uint8) for q in self.p.inputs}
        measured, signals, x, z = self._propagate(n, NoiseModel(), rng, in_gauge, True, faults)
        if in_gauge and self.p.outputs:
            _, _, gx, gz = self._propagate(n, NoiseModel(), rng, in_gauge, False)
            x, z = x ^ gx, z ^ gz
        return FrameSample(measured, signals, tuple(self.p.outputs), x, z)

    def _propagate(self, trials, noise, rng, in_gauge, prep_gauge, faults=None):
        p = self.p
        faults = faults or {}
        col = {q: k for k, q in enumerate(sorted(p.V))}
        x = np.zeros((trials, len(col)), dtype=np.uint8)
        z = np.zeros((trials, len(col)), dtype=np.uint8)
        ref = {q: np.full(trials, v, dtype=np.uint8) for q, v in self.ref_signals.items()}
        sig: dict[int, np.ndarray] = {}

        def pauli1(q: int, prob: float) -> None:
            if not prob:
                return
            hit = rng.random(trials) < prob
            which = rng.integers(1, 4, trials)
            a = col[q]
            x[:, a] ^= (hit & (which <= 2)).astype(np.uint8)
            z[:, a] ^= (hit & (which >= 2)).astype(np.uint8)

        def inject(idx: int) -> np.ndarray:
            flips = np.zeros(trials, dtype=np.uint8)
            for t, ev in faults.get(idx, ()):
                if ev.kind == "flip":
                    flips[t] ^= 1
                    continue
                for q, letter in zip(ev.qubits, ev.paulis):
                    x[t, col[q]] ^= letter in "XY"
                    z[t, col[q]] ^= letter in "YZ"
            return flips

        for q, g in in_gauge.items():
            x[:, col[q]] ^= g

        measured = []
        for idx, (c, plan) in enumerate(zip(p.seq, self._plan)):
            if isinstance(c, Prepare):
                a = col[c.q]
                if prep_gauge:
                    gauge = rng.integers(0, 2, trials, dtype=np.uint8)
                    x[:, a] ^= gauge
                    if c.angle.quarter_turns() % 2:
                        z[:, a] ^= gauge
                pauli1(c.q, noise.p_prep)
            elif isinstance(c, Entangle):
                a, b = col[c.i], col[c.j]
                z[:, a] ^= x[:, b]
                z[:, b] ^= x[:, a]
                if noise.p_ent:
                    hit = rng.random(trials) < noise.p_ent
                    k = rng.integers(1, 16, trials)
                    pa, pb = k // 4, k % 4
                    x[:, a] ^= (hit & ((pa == 1) | (pa == 2))).astype(np.uint8)
                    z[:, a] ^= (hit & ((pa == 2) | (pa == 3))).astype(np.uint8)
                    x[:, b] ^= (hit & ((pb == 1) | (pb == 2))).astype(np.uint8)
                    z[:, b] ^= (hit & ((pb == 2) | (pb == 3))).astype(np.uint8)
            elif isinstance(c, CorrectX):
                if c.cond.signals:
                    x[:, col[c.q]] ^= _cond(c.cond, sig, trials) ^ _cond(c.cond, ref, trials)
            elif isinstance(c, CorrectZ):
                a = col[c.q]
                k = c.angle.quarter_turns()
                if c.cond.signals and k == 2:
                    z[:, a] ^= _cond(c.cond, sig, trials) ^ _cond(c.cond, ref, trials)
                elif k % 2 and not c.cond.is_never:
                    z[:, a] ^= x[:, a]
            else:
                pauli1(c.q, noise.p_idle)
                forced_flip = inject(idx)
                a = col[c.q]
                flip = z[:, a] ^ (x[:, a] if self.basis_y[c.q] else 0) ^ forced_flip
                if noise.p_meas:
                    flip = flip ^ (rng.random(trials) < noise.p_meas).astype(np.uint8)
                raw = flip ^ self.ref[c.q]
                delta = _parity(plan[1], sig, trials) ^ _parity(plan[1], ref, trials)
                sig[c.q] = raw ^ delta
                measured.append(c.q)
                continue
            inject(idx)
        inject(len(p.seq))
        for q in p.outputs:
            pauli1(q, noise.p_idle)
        signals = np.stack([sig[q] for q in measured], axis=1) if measured else np.zeros((trials, 0), dtype=np.uint8)
        out_cols = [col[q] for q in p.outputs]
        return tuple(measured), signals, x[:, out_cols], z[:, out_cols]

