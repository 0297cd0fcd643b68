"""Measurement-pattern IR: commands, patterns, validation and composition.

Commands are stored in execution order (``seq[0]`` runs first). The
``mbqc_str`` helper renders the conventional right-to-left notation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

from pmmft.angles import ALWAYS, ZERO, Angle, AnglePoly, Condition

__all__ = [
    "Prepare",
    "Entangle",
    "Measure",
    "CorrectX",
    "CorrectZ",
    "Command",
    "Pattern",
    "Violation",
    "BindingMismatch",
    "UnknownName",
    "validate",
    "is_pmm",
    "is_standard",
    "compose_serial",
    "compose_parallel",
    "build_named",
    "identity_pattern",
]


@dataclass(frozen=True)
class Prepare:
    q: int
    angle: Angle = ZERO

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.q,)

    def relabel(self, m: Mapping[int, int]) -> Prepare:
        return Prepare(m.get(self.q, self.q), self.angle)

    def __str__(self) -> str:
        return f"N_{self.q}^{self.angle}"


@dataclass(frozen=True)
class Entangle:
    i: int
    j: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.i, self.j)

    @property
    def edge(self) -> frozenset[int]:
        return frozenset((self.i, self.j))

    def other(self, q: int) -> int:
        return self.j if q == self.i else self.i

    def relabel(self, m: Mapping[int, int]) -> Entangle:
        return Entangle(m.get(self.i, self.i), m.get(self.j, self.j))

    def __str__(self) -> str:
        return f"E_{self.i}{self.j}" if max(self.i, self.j) < 10 else f"E_{{{self.i},{self.j}}}"


@dataclass(frozen=True)
class Measure:
    q: int
    angle: AnglePoly = field(default_factory=AnglePoly)

    def __post_init__(self) -> None:
        if not isinstance(self.angle, AnglePoly):
            object.__setattr__(self, "angle", AnglePoly.constant(Angle.coerce(self.angle)))

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.q,)

    def relabel(self, m: Mapping[int, int]) -> Measure:
        return Measure(m.get(self.q, self.q), self.angle.relabel(m))

    def __str__(self) -> str:
        return f"M_{self.q}^{self.angle}"


@dataclass(frozen=True)
class CorrectX:
    q: int
    cond: Condition = ALWAYS

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.q,)

    def relabel(self, m: Mapping[int, int]) -> CorrectX:
        return CorrectX(m.get(self.q, self.q), self.cond.relabel(m))

    def __str__(self) -> str:
        return f"X_{self.q}" + ("" if self.cond.is_always else f"^{{{self.cond}}}")


@dataclass(frozen=True)
class CorrectZ:
    """``Z(angle) = exp(-i angle Z / 2)``; ``angle = pi`` is the Pauli Z up to phase."""

    q: int
    angle: Angle = Angle(Fraction(1))
    cond: Condition = ALWAYS

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.q,)

    def relabel(self, m: Mapping[int, int]) -> CorrectZ:
        return CorrectZ(m.get(self.q, self.q), self.angle, self.cond.relabel(m))

    def __str__(self) -> str:
        head = f"Z_{self.q}" if self.angle == Angle(Fraction(1)) else f"Z({self.angle})_{self.q}"
        return head + ("" if self.cond.is_always else f"^{{{self.cond}}}")


Command = Union[Prepare, Entangle, Measure, CorrectX, CorrectZ]
CORRECTIONS = (CorrectX, CorrectZ)


def signals_of(cmd: Command) -> frozenset[int]:
    if isinstance(cmd, Measure):
        return cmd.angle.signals
    if isinstance(cmd, CORRECTIONS):
        return cmd.cond.signals
    return frozenset()


class BindingMismatch(ValueError):
    pass


class UnknownName(KeyError):
    pass


@dataclass(frozen=True)
class Pattern:
    """Qubits ``V``, ordered inputs and outputs, and a command sequence.

    ``inputs`` and ``outputs`` are tuples because their order fixes the tensor
    factor order used by the simulators.
    """

    V: frozenset[int]
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    seq: tuple[Command, ...]

    def __init__(
        self,
        seq: Iterable[Command],
        inputs: Iterable[int] = (),
        outputs: Iterable[int] = (),
        V: Iterable[int] | None = None,
    ) -> None:
        seq = tuple(seq)
        inputs = tuple(inputs)
        outputs = tuple(outputs)
        if V is None:
            qs: set[int] = set(inputs) | set(outputs)
            for c in seq:
                qs.update(c.qubits)
            V = qs
        object.__setattr__(self, "V", frozenset(V))
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)
        object.__setattr__(self, "seq", seq)

    @property
    def I(self) -> frozenset[int]:  # noqa: E743
        return frozenset(self.inputs)

    @property
    def O(self) -> frozenset[int]:  # noqa: E743
        return frozenset(self.outputs)

    @property
    def measured(self) -> list[int]:
        return [c.q for c in self.seq if isinstance(c, Measure)]

    def with_seq(self, seq: Iterable[Command]) -> Pattern:
        return Pattern(seq, self.inputs, self.outputs, self.V)

    def relabel(self, mapping: Mapping[int, int]) -> Pattern:
        return Pattern(
            (c.relabel(mapping) for c in self.seq),
            (mapping.get(q, q) for q in self.inputs),
            (mapping.get(q, q) for q in self.outputs),
            (mapping.get(q, q) for q in self.V),
        )

    def __len__(self) -> int:
        return len(self.seq)

    def __str__(self) -> str:
        return "\n".join(str(c) for c in self.seq)

    def mbqc_str(self) -> str:
        """Right-to-left rendering, last executed command first."""
        return " ".join(str(c) for c in reversed(self.seq))


@dataclass(frozen=True)
class Violation:
    index: int | None
    rule: str
    message: str

    def __str__(self) -> str:
        where = "pattern" if self.index is None else f"command {self.index}"
        return f"{where}: [{self.rule}] {self.message}"


def validate(p: Pattern) -> list[Violation]:
    """Return every well-formedness violation of ``p``; empty means valid."""
    out: list[Violation] = []
    for q in p.I | p.O:
        if q not in p.V:
            out.append(Violation(None, "io-subset", f"qubit {q} not in V"))
    if len(set(p.inputs)) != len(p.inputs) or len(set(p.outputs)) != len(p.outputs):
        out.append(Violation(None, "io-duplicate", "repeated qubit in inputs or outputs"))
    prepared: set[int] = set()
    touched: set[int] = set(p.inputs)
    measured: set[int] = set()
    for idx, cmd in enumerate(p.seq):
        for q in cmd.qubits:
            if q not in p.V:
                out.append(Violation(idx, "unknown-qubit", f"qubit {q} not in V"))
            if q in measured:
                out.append(Violation(idx, "after-measure", f"qubit {q} used after its measurement"))
        if isinstance(cmd, Entangle) and cmd.i == cmd.j:
            out.append(Violation(idx, "self-loop", f"E on a single qubit {cmd.i}"))
        for s in signals_of(cmd):
            if s not in measured:
                out.append(Violation(idx, "future-signal", f"depends on s{s}, not measured earlier"))
        if isinstance(cmd, Prepare):
            if cmd.q in p.I:
                out.append(Violation(idx, "input-prepared", f"input qubit {cmd.q} is prepared"))
            elif cmd.q in prepared:
                out.append(Violation(idx, "double-prepare", f"qubit {cmd.q} prepared twice"))
            elif cmd.q in touched:
                out.append(Violation(idx, "use-before-prepare", f"qubit {cmd.q} used before preparation"))
            prepared.add(cmd.q)
        else:
            for q in cmd.qubits:
                if q not in p.I and q not in prepared:
                    out.append(Violation(idx, "use-before-prepare", f"qubit {q} used before preparation"))
        touched.update(cmd.qubits)
        if isinstance(cmd, Measure):
            if cmd.q in p.O:
                out.append(Violation(idx, "output-measured", f"output qubit {cmd.q} is measured"))
            if cmd.q in measured:
                out.append(Violation(idx, "double-measure", f"qubit {cmd.q} measured twice"))
            measured.add(cmd.q)
    for q in sorted(p.V - p.I - prepared):
        out.append(Violation(None, "unprepared", f"non-input qubit {q} never prepared"))
    for q in sorted(p.V - p.O - measured):
        out.append(Violation(None, "unmeasured", f"non-output qubit {q} never measured"))
    return out


_HALF = Fraction(1, 2)


def is_pmm(p: Pattern) -> bool:
    """True if ``p`` lies in the Pauli measurement model."""
    for cmd in p.seq:
        if isinstance(cmd, Prepare) and cmd.angle not in (ZERO, Angle.of(1, 4)):
            return False
        if isinstance(cmd, Measure) and not all(c.is_multiple_of(_HALF) for c in cmd.angle.coefficients()):
            return False
        if isinstance(cmd, CorrectZ) and not cmd.angle.is_multiple_of(_HALF):
            return False
    return True


_RANK = {Prepare: 0, Entangle: 1, Measure: 2, CorrectX: 3, CorrectZ: 3}


def is_standard(p: Pattern) -> bool:
    """Preparations, then entanglements, then measurements, then output corrections."""
    ranks = [_RANK[type(c)] for c in p.seq]
    if ranks != sorted(ranks):
        return False
    return all(c.q in p.O for c in p.seq if isinstance(c, CORRECTIONS))


def _fresh_map(qubits: Iterable[int], start: int, fixed: Mapping[int, int] | None = None) -> dict[int, int]:
    mapping = dict(fixed or {})
    nxt = start
    for q in sorted(qubits):
        if q in mapping:
            continue
        mapping[q] = nxt
        nxt += 1
    return mapping


def compose_serial(a: Pattern, b: Pattern, binding: Mapping[int, int] | None = None) -> Pattern:
    """Run ``a`` then ``b`` with ``a``'s outputs fed into ``b``'s inputs.

    ``binding`` maps each output of ``a`` to an input of ``b``; by default
    outputs and inputs are paired positionally.
    """
    if len(a.outputs) != len(b.inputs):
        raise BindingMismatch(f"{len(a.outputs)} outputs cannot feed {len(b.inputs)} inputs")
    if binding is None:
        binding = dict(zip(a.outputs, b.inputs))
    if set(binding) != set(a.outputs) or set(binding.values()) != set(b.inputs):
        raise BindingMismatch("binding must be a bijection from a's outputs onto b's inputs")
    fixed = {bq: aq for aq, bq in binding.items()}
    start = max(a.V, default=0) + 1
    mapping = _fresh_map(b.V, start, fixed)
    rb = b.relabel(mapping)
    return Pattern(a.seq + rb.seq, a.inputs, rb.outputs, a.V | rb.V)


def compose_parallel(a: Pattern, b: Pattern) -> Pattern:
    """Tensor product of two patterns on disjoint relabelled qubits."""
    start = max(a.V, default=0) + 1
    rb = b.relabel(_fresh_map(b.V, start))
    return Pattern(a.seq + rb.seq, a.inputs + rb.inputs, a.outputs + rb.outputs, a.V | rb.V)


def identity_pattern(n: int = 1) -> Pattern:
    qs = tuple(range(1, n + 1))
    return Pattern((), qs, qs)


def _poly(*terms: tuple[Iterable[int], Angle]) -> AnglePoly:
    return AnglePoly({frozenset(k): v for k, v in terms})


def build_named(name: str, angle: Angle | Fraction | int | str | None = None) -> Pattern:
    """Builders for the generator patterns.

    ``J`` (J_alpha = H Z(alpha)), ``X`` (exp(-i alpha X / 2)), ``CZ``, ``N``,
    ``M``, ``T`` (teleportation stripped of its resource, inputs 1,2,3) and
    ``T+`` (``T`` preceded by its two-qubit resource preparation).
    """
    key = _ALIASES.get(name, name)
    if key in ("J", "X") and angle is None:
        raise ValueError(f"pattern {name!r} needs an angle")
    a = Angle.coerce(angle) if angle is not None else ZERO
    pi4 = Angle.of(1, 4)
    if key == "J":
        return Pattern(
            [Prepare(2), Entangle(1, 2), Measure(1, AnglePoly.constant(-a)), CorrectX(2, Condition.on(1))],
            inputs=(1,),
            outputs=(2,),
        )
    if key == "X":
        adaptive = _poly(((), -a + pi4), ((1,), a * 2))
        return Pattern(
            [
                Prepare(2, pi4),
                Prepare(3),
                Entangle(1, 2),
                Entangle(2, 3),
                Measure(1),
                Measure(2, adaptive),
                CorrectZ(3, Angle.of(1), Condition.on(1)),
                CorrectX(3, Condition.on(2)),
            ],
            inputs=(1,),
            outputs=(3,),
        )
    if key == "CZ":
        return Pattern([Entangle(1, 2)], inputs=(1, 2), outputs=(1, 2))
    if key == "N":
        return Pattern([Prepare(1, a)], inputs=(), outputs=(1,))
    if key == "M":
        return Pattern([Measure(1, AnglePoly.constant(a))], inputs=(1,), outputs=())
    if key == "T":
        return Pattern(
            [
                Entangle(1, 2),
                Measure(1),
                Measure(2),
                CorrectZ(3, Angle.of(1), Condition.on(1)),
                CorrectX(3, Condition.on(2)),
            ],
            inputs=(1, 2, 3),
            outputs=(3,),
        )
    if key == "T+":
        t = build_named("T")
        return Pattern((Prepare(2), Prepare(3), Entangle(2, 3)) + t.seq, inputs=(1,), outputs=(3,))
    raise UnknownName(name)


_ALIASES = {
    "𝔍": "J",
    "𝔛": "X",
    "∧𝔷": "CZ",
    "𝔑": "N",
    "𝔐": "M",
    "𝔗": "T",
    "T_resource": "T+",
}

