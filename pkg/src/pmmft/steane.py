"""Steane [[7,1,3]] code: checks, decoders, encoders and syndrome teleportation.

Block positions are ``0..6``; the Hamming parity-check column of position
``j`` is the binary expansion of ``j + 1``, so a nonzero syndrome read as an
integer names the flipped position directly.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from pmmft.angles import ZERO, Angle, Condition
from pmmft.pattern import (
    Command,
    CorrectX,
    CorrectZ,
    Entangle,
    Measure,
    Pattern,
    Prepare,
)
from pmmft.stab import PauliOp

__all__ = [
    "CodeSpec",
    "STEANE",
    "Syndrome",
    "Decoded",
    "decode_transversal",
    "decode_words",
    "infer_syndrome",
    "build_encoder",
    "transversal_cz",
    "build_syndrome_teleport",
    "TeleportLayout",
    "teleport_layout",
    "compile_circuit",
]

_HAMMING = np.array(
    [
        [0, 0, 0, 1, 1, 1, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [1, 0, 1, 0, 1, 0, 1],
    ],
    dtype=np.uint8,
)


@dataclass(frozen=True)
class CodeSpec:
    """A self-dual CSS code given by its X and Z check matrices."""

    n: int
    k: int
    d: int
    hx: tuple[tuple[int, ...], ...]
    hz: tuple[tuple[int, ...], ...]
    logical_x: tuple[int, ...]
    logical_z: tuple[int, ...]
    y_sign: int = -1  # Ybar = i Xbar Zbar = y_sign * Y^{(x)n}

    @classmethod
    def steane(cls) -> CodeSpec:
        rows = tuple(tuple(int(v) for v in r) for r in _HAMMING)
        ones = (1,) * 7
        return cls(7, 1, 3, rows, rows, ones, ones, -1)

    @property
    def HX(self) -> np.ndarray:
        return np.array(self.hx, dtype=np.uint8)

    @property
    def HZ(self) -> np.ndarray:
        return np.array(self.hz, dtype=np.uint8)

    def generators(self, qubits: Sequence[int] | None = None) -> list[PauliOp]:
        """X-type generators first, then Z-type."""
        qubits = tuple(range(self.n)) if qubits is None else tuple(qubits)
        zero = (0,) * self.n
        return [PauliOp(qubits, r, zero) for r in self.hx] + [PauliOp(qubits, zero, r) for r in self.hz]

    def logical(self, which: str, qubits: Sequence[int] | None = None) -> PauliOp:
        """``X``, ``Z`` or ``Y`` logical operator with the code's sign convention."""
        qubits = tuple(range(self.n)) if qubits is None else tuple(qubits)
        zero = (0,) * self.n
        if which == "X":
            return PauliOp(qubits, self.logical_x, zero)
        if which == "Z":
            return PauliOp(qubits, zero, self.logical_z)
        if which == "Y":
            xz = PauliOp(qubits, self.logical_x, zero) * PauliOp(qubits, zero, self.logical_z)
            return PauliOp(qubits, xz.x, xz.z, xz.phase + 1)
        raise ValueError(which)

    def syndrome_bits(self, x: Sequence[int], z: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Checks violated by a Pauli with bit vectors ``x`` and ``z``."""
        xv = np.asarray(x, dtype=np.uint8)
        zv = np.asarray(z, dtype=np.uint8)
        return tuple(int(v) for v in self.HZ @ xv % 2), tuple(int(v) for v in self.HX @ zv % 2)

    def self_check(self) -> list[str]:
        """Return a list of failed properties (empty when the code is sound)."""
        errors = []
        gens = self.generators()
        for a, b in itertools.combinations(gens, 2):
            if not a.commutes(b):
                errors.append(f"generators {a} and {b} anticommute")
        lx, lz = self.logical("X"), self.logical("Z")
        for g in gens:
            if not (lx.commutes(g) and lz.commutes(g)):
                errors.append(f"logical operator anticommutes with {g}")
        if lx.commutes(lz):
            errors.append("logical X and Z commute")
        ly = self.logical("Y")
        if str(ly)[0] != ("-" if self.y_sign < 0 else "+") or ly.phase % 2:
            errors.append(f"logical Y convention mismatch: {ly}")
        # every nontrivial Pauli of weight < d must be detected
        for w in range(1, self.d):
            for pos in itertools.combinations(range(self.n), w):
                for letters in itertools.product((1, 2, 3), repeat=w):
                    x = [0] * self.n
                    z = [0] * self.n
                    for p, l in zip(pos, letters):
                        x[p] = int(l in (1, 2))
                        z[p] = int(l in (2, 3))
                    sx, sz = self.syndrome_bits(x, z)
                    if not any(sx) and not any(sz):
                        errors.append(f"undetected weight-{w} error at {pos}")
        return errors

    def to_dict(self) -> dict[str, Any]:
        return {
            "format_version": 1,
            "n": self.n,
            "k": self.k,
            "d": self.d,
            "hx": [list(r) for r in self.hx],
            "hz": [list(r) for r in self.hz],
            "logical_x": list(self.logical_x),
            "logical_z": list(self.logical_z),
            "y_sign": self.y_sign,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> CodeSpec:
        return cls(
            d["n"],
            d["k"],
            d["d"],
            tuple(tuple(r) for r in d["hx"]),
            tuple(tuple(r) for r in d["hz"]),
            tuple(d["logical_x"]),
            tuple(d["logical_z"]),
            d.get("y_sign", -1),
        )

    @classmethod
    def from_json(cls, text: str) -> CodeSpec:
        return cls.from_dict(json.loads(text))


STEANE = CodeSpec.steane()


@dataclass(frozen=True)
class Syndrome:
    """``x_bits`` flag X-type faults (Z checks); ``z_bits`` flag Z-type faults."""

    x_bits: tuple[int, ...]
    z_bits: tuple[int, ...]

    @property
    def is_trivial(self) -> bool:
        return not any(self.x_bits) and not any(self.z_bits)

    @staticmethod
    def _position(bits: Sequence[int]) -> int | None:
        v = int("".join(map(str, bits)), 2)
        return None if v == 0 else v - 1

    @property
    def x_position(self) -> int | None:
        """Block position of a single X-type fault consistent with the syndrome."""
        return self._position(self.x_bits)

    @property
    def z_position(self) -> int | None:
        return self._position(self.z_bits)


def infer_syndrome(g: PauliOp, code: CodeSpec = STEANE) -> Syndrome:
    """Commutation of ``g`` (one block, position order) with each generator."""
    if len(g.qubits) != code.n:
        raise ValueError(f"expected a {code.n}-qubit Pauli, got {len(g.qubits)}")
    sx, sz = code.syndrome_bits(g.x, g.z)
    return Syndrome(sx, sz)


@dataclass(frozen=True)
class Decoded:
    logical: int
    syndrome: tuple[int, ...]
    corrected: bool
    word: tuple[int, ...] = field(default=(), compare=False)


def decode_words(words: np.ndarray, basis: str = "X", code: CodeSpec = STEANE) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised decoding of transversal X- or Y-basis outcome words.

    Returns ``(logical, syndrome_int, corrected_words)`` for a ``(trials, 7)``
    array. The syndrome integer is ``j + 1`` for a single flip at ``j``.
    """
    words = np.asarray(words, dtype=np.uint8)
    h = code.HX if basis == "X" else code.HX  # self-dual: same checks for Y words
    syn_bits = (words @ h.T.astype(np.int64)) % 2
    weights = 1 << np.arange(h.shape[0] - 1, -1, -1)
    syn = syn_bits @ weights
    fixed = words.copy()
    hit = syn > 0
    rows = np.flatnonzero(hit)
    fixed[rows, syn[rows] - 1] ^= 1
    lx = np.asarray(code.logical_x, dtype=np.int64)
    logical = ((fixed.astype(np.int64) @ lx) % 2).astype(np.uint8)
    if basis == "Y" and code.y_sign < 0:
        logical ^= 1
    elif basis not in ("X", "Y"):
        raise ValueError(f"basis must be 'X' or 'Y', not {basis!r}")
    return logical, syn.astype(np.int64), fixed


def decode_transversal(outcomes: Sequence[int], basis: str = "X", code: CodeSpec = STEANE) -> Decoded:
    """Hamming-correct a transversal measurement word and read the logical bit."""
    if len(outcomes) != code.n:
        raise ValueError(f"expected {code.n} outcomes")
    lg, syn, fixed = decode_words(np.asarray([outcomes]), basis, code)
    s = int(syn[0])
    bits = tuple(int(b) for b in format(s, f"0{len(code.hx)}b"))
    return Decoded(int(lg[0]), bits, s != 0, tuple(int(v) for v in fixed[0]))


# -- pattern builders -------------------------------------------------------


def compile_circuit(
    wires: Sequence[str],
    gates: Iterable[tuple],
    start: int = 1,
) -> Pattern:
    """Compile an H/CZ circuit into a pattern.

    ``wires[w]`` is ``"in"`` for an input wire or an angle string for a wire
    prepared in ``|+_angle>``. Each ``("H", w)`` becomes a ``J_0`` step onto a
    fresh qubit; ``("CZ", a, b)`` is an entangling command. Wires are output in
    order; wire ``w`` starts on qubit ``start + w``.
    """
    cur = {w: start + w for w in range(len(wires))}
    nxt = start + len(wires)
    seq: list[Command] = []
    inputs = []
    for w, kind in enumerate(wires):
        if kind == "in":
            inputs.append(cur[w])
        else:
            seq.append(Prepare(cur[w], Angle.coerce(kind)))
    for g in gates:
        if g[0] == "H":
            w = g[1]
            old, new = cur[w], nxt
            nxt += 1
            seq += [Prepare(new), Entangle(old, new), Measure(old), CorrectX(new, Condition.on(old))]
            cur[w] = new
        elif g[0] == "CZ":
            seq.append(Entangle(cur[g[1]], cur[g[2]]))
        else:
            raise ValueError(f"unknown gate {g!r}")
    return Pattern(seq, inputs, [cur[w] for w in range(len(wires))])


# X-stabilizer generators with pivots at positions 3, 4 and 5 (0-based)
_PIVOTS = {3: (0, 1, 6), 4: (0, 2, 6), 5: (1, 2, 6)}


def _encoder_circuit(input_angle: Angle | None) -> tuple[list[str], list[tuple]]:
    """Gates for the generic encoder with the data on position 2."""
    wires = ["0"] * 7
    wires[2] = "in" if input_angle is None else str(input_angle)
    gates: list[tuple] = [("CZ", 2, 0), ("CZ", 2, 1)]
    gates += [("H", 2), ("CZ", 4, 2), ("CZ", 5, 2), ("H", 2)]
    targets: dict[int, list[int]] = {}
    for piv, tgts in _PIVOTS.items():
        for t in tgts:
            if t != 2:
                targets.setdefault(t, []).append(piv)
    for t in sorted(targets):
        gates += [("CZ", piv, t) for piv in targets[t]] + [("H", t)]
    return wires, gates


def _plus_circuit() -> tuple[list[str], list[tuple]]:
    """|+bar> as a graph state: pivots joined to their supports, then H on pivots."""
    wires = ["0"] * 7
    gates: list[tuple] = [("CZ", piv, t) for piv, tgts in _PIVOTS.items() for t in tgts]
    gates += [("H", piv) for piv in _PIVOTS]
    return wires, gates


def build_encoder(input_angle: Angle | str | int | None = None, start: int = 1, standard: bool = True) -> Pattern:
    """Encoding pattern for the Steane code.

    ``None`` gives a one-input encoder of an arbitrary state; an angle gives a
    closed pattern preparing the encoded ``|+_angle>``. Angle 0 uses a shallow
    graph-state construction; other angles feed ``|+_angle>`` to the generic
    encoder. Outputs are listed in block-position order.
    """
    from pmmft.rewrite import standardize

    angle = None if input_angle is None else Angle.coerce(input_angle)
    if angle is not None and angle == ZERO:
        wires, gates = _plus_circuit()
    else:
        wires, gates = _encoder_circuit(angle)
    p = compile_circuit(wires, gates, start)
    if standard:
        p, _ = standardize(p, trace=False)
    return p


def transversal_cz(first: Sequence[int] = tuple(range(1, 8)), second: Sequence[int] = tuple(range(8, 15))) -> Pattern:
    """Seven ``E`` commands pairing equal positions of two blocks."""
    first, second = tuple(first), tuple(second)
    if len(first) != 7 or len(second) != 7:
        raise ValueError("blocks must have 7 qubits")
    seq = [Entangle(a, b) for a, b in zip(first, second)]
    return Pattern(seq, first + second, first + second)


@dataclass(frozen=True)
class TeleportLayout:
    """Qubit roles inside a syndrome-extracting teleport."""

    data: tuple[int, ...]
    first: tuple[int, ...]  # measured half of the encoded pair
    second: tuple[int, ...]  # output block
    resource: Pattern  # closed pattern preparing the encoded pair
    checker: tuple[int, ...] = ()  # X-measured copy that screens ``second`` for Z faults


def _j0_layer(qubits: Sequence[int], start: int) -> tuple[list[Command], tuple[int, ...]]:
    seq: list[Command] = []
    new = tuple(range(start, start + len(qubits)))
    for old, q in zip(qubits, new):
        seq += [Prepare(q), Entangle(old, q), Measure(old), CorrectX(q, Condition.on(old))]
    return seq, new


def teleport_layout(block: Sequence[int], start: int | None = None, verified: bool = False) -> TeleportLayout:
    """Build the encoded pair ``CZ|+bar>|+bar>`` on fresh qubits.

    With ``verified`` the output half is first run through a transversal CNOT
    from a third ``|+bar>`` block (compiled as ``J_0``, ``CZ``, ``J_0``), which
    copies its Z faults onto the checker; the checker is then measured in the
    X basis so that a dirty syndrome can be rejected.
    """
    block = tuple(block)
    if len(block) != 7:
        raise ValueError("block must have 7 qubits")
    start = max(block) + 1 if start is None else start
    enc_a = build_encoder(0, start=start)
    enc_b = build_encoder(0, start=max(enc_a.V) + 1)
    seq: list[Command] = list(enc_a.seq) + list(enc_b.seq)
    first, second = enc_a.outputs, enc_b.outputs
    qubits = set(enc_a.V) | set(enc_b.V)
    checker: tuple[int, ...] = ()
    if verified:
        enc_c = build_encoder(0, start=max(qubits) + 1)
        seq += list(enc_c.seq)
        qubits |= set(enc_c.V)
        checker = enc_c.outputs
        layer, mid = _j0_layer(second, max(qubits) + 1)
        seq += layer
        seq += [Entangle(c, m) for c, m in zip(checker, mid)]
        layer2, second = _j0_layer(mid, max(mid) + 1)
        seq += layer2
        seq += [Measure(c) for c in checker]
        qubits |= set(mid) | set(second)
    seq += [Entangle(a, b) for a, b in zip(first, second)]
    resource = Pattern(seq, (), first + second, qubits)
    return TeleportLayout(block, first, second, resource, checker)


def build_syndrome_teleport(
    block: Sequence[int] = tuple(range(1, 8)), standard: bool = True, verified: bool = False
) -> Pattern:
    """Teleport a block through an encoded ``CZ|+bar>|+bar>`` pair.

    Each data qubit is joined to its partner in the first half, both are
    measured in the X basis, and the byproduct ``X^{s_a} Z^{s_d}`` lands on
    the matching qubit of the second half, which is the output block.
    """
    from pmmft.rewrite import standardize

    lay = teleport_layout(block, verified=verified)
    seq: list[Command] = list(lay.resource.seq)
    for d, a, b in zip(lay.data, lay.first, lay.second):
        seq += [Entangle(d, a), Measure(d), Measure(a)]
    for d, a, b in zip(lay.data, lay.first, lay.second):
        seq += [CorrectZ(b, Angle.of(1), Condition.on(d)), CorrectX(b, Condition.on(a))]
    p = Pattern(seq, lay.data, lay.second, set(lay.data) | lay.resource.V)
    if standard:
        p, _ = standardize(p, trace=False)
    return p
