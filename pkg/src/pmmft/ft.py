"""Fault-tolerant transform of Pauli-measurement patterns into Steane blocks.

Every logical qubit becomes a 7-qubit block. Preparations become encoders,
entanglement becomes transversal ``E``, and a logical measurement becomes
seven physical measurements plus a classical decode. Syndrome-extracting
teleportations are spliced in between gadgets on a wire.

The physical pattern carries all byproduct corrections of encoders and
teleports into its measurement angles by standardization, so every physical
signal comes out already frame-corrected. Dependencies on *logical* signals
cannot be written as physical commands (decoding is not linear), so they
live in a classical program: outcome flips, X/Y basis swaps and the logical
corrections on output blocks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

from pmmft.angles import Angle, AnglePoly, Condition
from pmmft.dsl import command_from_dict, command_to_dict, pattern_from_dict, pattern_to_dict
from pmmft.pattern import (
    CORRECTIONS,
    Command,
    CorrectX,
    CorrectZ,
    Entangle,
    Measure,
    Pattern,
    Prepare,
    is_pmm,
    is_standard,
)
from pmmft.steane import STEANE, CodeSpec, build_encoder, decode_words, teleport_layout

__all__ = [
    "NotPMM",
    "Verify",
    "DecodeMeasure",
    "LogicalCorrection",
    "ClassicalProgram",
    "FTPattern",
    "FTRun",
    "ft_transform",
    "encoded_input_tableau",
]

_HALF = Fraction(1, 2)


class NotPMM(ValueError):
    pass


@dataclass(frozen=True)
class Verify:
    """Post-select on a trivial check syndrome of a transversal X word."""

    label: str
    qubits: tuple[int, ...]


@dataclass(frozen=True)
class DecodeMeasure:
    """Decode block ``qubits`` into the logical signal of ``logical``.

    The logical angle is ``base + j pi/2`` with ``j`` the sum of ``terms``
    over earlier logical signals. Odd ``j`` moves the block to the other
    Pauli basis, whose frame-corrected angles are ``alt``.
    """

    logical: int
    qubits: tuple[int, ...]
    base: Angle
    terms: Mapping[frozenset[int], int] = field(default_factory=dict)
    alt: Mapping[int, AnglePoly] = field(default_factory=dict)

    @property
    def swaps(self) -> bool:
        return any(v % 2 for v in self.terms.values())


@dataclass(frozen=True)
class LogicalCorrection:
    """``X`` or ``Z(quarters pi/2)`` on an output block when ``cond`` holds."""

    logical: int
    kind: str
    quarters: int
    cond: Condition


@dataclass(frozen=True)
class ClassicalProgram:
    verify: tuple[Verify, ...]
    decode: tuple[DecodeMeasure, ...]
    logical_corrections: tuple[LogicalCorrection, ...]
    physical_corrections: tuple[Command, ...]
    input_blocks: Mapping[int, tuple[int, ...]]
    output_blocks: Mapping[int, tuple[int, ...]]

    def to_dict(self) -> dict[str, Any]:
        return {
            "verify": [{"label": v.label, "qubits": list(v.qubits)} for v in self.verify],
            "decode": [
                {
                    "logical": d.logical,
                    "qubits": list(d.qubits),
                    "base": [d.base.numerator, d.base.denominator],
                    "terms": [{"signals": sorted(k), "quarters": v} for k, v in d.terms.items()],
                    "alt": {str(q): [[sorted(k), [a.numerator, a.denominator]] for k, a in poly.terms.items()] for q, poly in d.alt.items()},
                }
                for d in self.decode
            ],
            "logical_corrections": [
                {"logical": c.logical, "op": c.kind, "quarters": c.quarters, "signals": sorted(c.cond.signals), "const": int(c.cond.const)}
                for c in self.logical_corrections
            ],
            "physical_corrections": [command_to_dict(c) for c in self.physical_corrections],
            "input_blocks": {str(k): list(v) for k, v in self.input_blocks.items()},
            "output_blocks": {str(k): list(v) for k, v in self.output_blocks.items()},
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> ClassicalProgram:
        def angle(v: Sequence[int]) -> Angle:
            return Angle(Fraction(v[0], v[1]))

        decode = tuple(
            DecodeMeasure(
                e["logical"],
                tuple(e["qubits"]),
                angle(e["base"]),
                {frozenset(t["signals"]): t["quarters"] for t in e["terms"]},
                {int(q): AnglePoly({frozenset(k): angle(a) for k, a in terms}) for q, terms in e["alt"].items()},
            )
            for e in d["decode"]
        )
        return cls(
            tuple(Verify(v["label"], tuple(v["qubits"])) for v in d["verify"]),
            decode,
            tuple(
                LogicalCorrection(c["logical"], c["op"], c["quarters"], Condition(frozenset(c["signals"]), bool(c["const"])))
                for c in d["logical_corrections"]
            ),
            tuple(command_from_dict(c) for c in d["physical_corrections"]),
            {int(k): tuple(v) for k, v in d["input_blocks"].items()},
            {int(k): tuple(v) for k, v in d["output_blocks"].items()},
        )


def _quarter_terms(poly: AnglePoly) -> dict[frozenset[int], int]:
    return {k: v.quarter_turns() for k, v in poly.terms.items() if k and v.quarter_turns()}


def _eval_terms(terms: Mapping[frozenset[int], int], logical: Mapping[int, np.ndarray], trials: int) -> np.ndarray:
    j = np.zeros(trials, dtype=np.int64)
    for key, v in terms.items():
        prod = np.ones(trials, dtype=np.int64)
        for s in key:
            prod &= logical[s].astype(np.int64)
        j += v * prod
    return j % 4


@dataclass
class FTRun:
    """One tableau execution of a fault-tolerant pattern."""

    accepted: bool
    logical: dict[int, int]
    signals: dict[int, int]
    tableau: Any


@dataclass(frozen=True)
class FTPattern:
    """Physical pattern (``N``, ``E``, ``M`` only) plus its classical program."""

    pattern: Pattern
    program: ClassicalProgram
    logical: Pattern
    code: CodeSpec = STEANE

    # -- classical post-processing -----------------------------------------
    def evaluate(self, signals: Mapping[int, np.ndarray]) -> tuple[np.ndarray, dict[int, np.ndarray]]:
        """Vectorised acceptance and logical signals from physical signals.

        ``signals`` maps each measured qubit to a ``(trials,)`` bit array.
        """
        any_col = next(iter(signals.values()), np.zeros(1, dtype=np.uint8))
        trials = len(np.atleast_1d(any_col))
        hx = self.code.HX.astype(np.int64)
        accepted = np.ones(trials, dtype=bool)
        for v in self.program.verify:
            word = np.stack([np.atleast_1d(signals[q]) for q in v.qubits], axis=1).astype(np.int64)
            accepted &= ~((word @ hx.T) % 2).any(axis=1)
        logical: dict[int, np.ndarray] = {}
        for d in self.program.decode:
            word = np.stack([np.atleast_1d(signals[q]) for q in d.qubits], axis=1)
            j = _eval_terms(d.terms, logical, trials)
            k = d.base.quarter_turns() + (j % 2)
            lx, _, _ = decode_words(word, "X", self.code)
            ly, _, _ = decode_words(word, "Y", self.code)
            bit = np.where(k % 2 == 1, ly, lx).astype(np.uint8)
            logical[d.logical] = bit ^ (j // 2).astype(np.uint8)
        return accepted, logical

    def _hook(self):
        owner = {q: d for d in self.program.decode if d.swaps for q in d.qubits}
        if not owner:
            return None
        cache: dict[int, int] = {}

        def hook(q: int, signals: dict[int, int]) -> Angle | None:
            d = owner.get(q)
            if d is None:
                return None
            if d.logical not in cache:
                sig = {k: np.array([v], dtype=np.uint8) for k, v in signals.items()}
                logical = {}
                for e in self.program.decode:
                    if e is d:
                        break
                    _, got = FTPattern.evaluate(self._prefix(e), sig)
                    logical[e.logical] = got[e.logical]
                cache[d.logical] = int(_eval_terms(d.terms, logical, 1)[0] % 2)
            return d.alt[q].evaluate(signals) if cache[d.logical] else None

        return hook

    def _prefix(self, upto: DecodeMeasure) -> FTPattern:
        idx = self.program.decode.index(upto)
        prog = ClassicalProgram((), self.program.decode[: idx + 1], (), (), {}, {})
        return FTPattern(self.pattern, prog, self.logical, self.code)

    def run(
        self,
        inputs: Mapping[int, int] | None = None,
        seed: int | None = None,
        noise: Any = None,
        noise_log: Any = None,
    ) -> FTRun:
        """Execute on the stabilizer backend.

        ``inputs`` maps a logical input to ``k`` for the encoded ``|+_{k pi/2}>``
        (default ``|+bar>``). Output blocks carry every correction afterwards.
        """
        from pmmft.stab import PauliOp, apply

        quarters = {q: 0 for q in self.program.input_blocks}
        quarters.update(inputs or {})
        t0 = encoded_input_tableau(self.program.input_blocks, quarters, self.code) if quarters else None
        res = apply(self.pattern, noise=noise, seed=seed, noise_log=noise_log, input_tableau=t0, angle_hook=self._hook())
        sig = {k: np.array([v], dtype=np.uint8) for k, v in res.signals.items()}
        acc, logical = self.evaluate(sig)
        t = res.tableau
        for c in self.program.physical_corrections:
            if c.cond.evaluate(res.signals):
                if isinstance(c, CorrectX):
                    t.pauli(PauliOp.single(c.q, "X"))
                else:
                    t.s(c.q, c.angle.quarter_turns())
        lsig = {k: int(v[0]) for k, v in logical.items()}
        for c in self.program.logical_corrections:
            if c.cond.evaluate(lsig):
                for q in self.program.output_blocks[c.logical]:
                    if c.kind == "X":
                        t.pauli(PauliOp.single(q, "X"))
                    else:
                        # transversal S is the logical S dagger on this code
                        t.s(q, -c.quarters)
        return FTRun(bool(acc[0]), lsig, dict(res.signals), t)

    # -- frame tracking and serialization ------------------------------------
    def frame_plan(self):
        from pmmft.frames import FramePlan, frame_track

        plan = frame_track(self.pattern)
        extra: dict[int, frozenset[int]] = {}
        block_of = {d.logical: d.qubits for d in self.program.decode}
        for d in self.program.decode:
            deps: set[int] = set()
            for key, v in d.terms.items():
                if v % 2:
                    for s in key:
                        deps |= set(block_of[s])
            for q in d.qubits:
                extra[q] = frozenset(deps)
        rules = tuple(
            (c.q, "X", 0, c.cond) if isinstance(c, CorrectX) else (c.q, "Z", c.angle.quarter_turns(), c.cond)
            for c in self.program.physical_corrections
        )
        return FramePlan(plan.order, plan.base, plan.terms, plan.outputs, rules, extra)

    def to_dict(self) -> dict[str, Any]:
        out = pattern_to_dict(self.pattern)
        out["classical"] = self.program.to_dict()
        out["logical"] = pattern_to_dict(self.logical)
        out["code"] = self.code.to_dict()
        return out

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> FTPattern:
        return cls(
            pattern_from_dict(d),
            ClassicalProgram.from_dict(d["classical"]),
            pattern_from_dict(d["logical"]),
            CodeSpec.from_dict(d["code"]),
        )

    @classmethod
    def from_json(cls, text: str) -> FTPattern:
        return cls.from_dict(json.loads(text))


def encoded_input_tableau(blocks: Mapping[int, tuple[int, ...]], quarters: Mapping[int, int], code: CodeSpec = STEANE):
    """Tableau holding the encoded ``|+_{k pi/2}>`` on each input block."""
    from pmmft.stab import Tableau

    t = Tableau(8 * max(1, len(blocks)))
    for q, block in blocks.items():
        for b in block:
            t.add_qubit(b)
        gens = code.generators(block)
        # start from |+>^7, which already satisfies the X-type checks and X bar
        for g in gens[len(code.hx) :]:
            t.measure(g, forced=0)
        k = quarters.get(q, 0) % 4
        if k % 2:
            t.measure(code.logical("Y", block), forced=k // 2)
        elif k:
            t.pauli(code.logical("Z", block))
    return t


# -- the transform ------------------------------------------------------------


class _Builder:
    def __init__(self, verify_prep: bool, teleport_every_gadget: bool) -> None:
        self.seq: list[Command] = []
        self.nxt = 1
        self.verify: list[Verify] = []
        self.block: dict[int, tuple[int, ...]] = {}
        self.pending: dict[int, bool] = {}
        self.verify_prep = verify_prep
        self.every = teleport_every_gadget

    def fresh(self, n: int) -> tuple[int, ...]:
        out = tuple(range(self.nxt, self.nxt + n))
        self.nxt += n
        return out

    def add(self, p: Pattern) -> None:
        self.seq += p.seq
        self.nxt = max(self.nxt, max(p.V) + 1)

    def teleport(self, q: int) -> None:
        lay = teleport_layout(self.block[q], start=self.nxt, verified=True)
        self.add(lay.resource)
        for d, a in zip(lay.data, lay.first):
            self.seq += [Entangle(d, a), Measure(d), Measure(a)]
        for d, a, b in zip(lay.data, lay.first, lay.second):
            self.seq += [CorrectZ(b, Angle.of(1), Condition.on(d)), CorrectX(b, Condition.on(a))]
        n = len(self.verify)
        self.verify += [Verify(f"data{n}", lay.data), Verify(f"resource{n}", lay.first), Verify(f"checker{n}", lay.checker)]
        self.block[q] = lay.second
        self.pending[q] = False

    def before_gadget(self, q: int, measuring: bool = False) -> None:
        if self.pending.get(q) and (self.every or measuring):
            self.teleport(q)

    def after_gadget(self, q: int) -> None:
        self.pending[q] = True


def ft_transform(p: Pattern, verify_prep: bool = True, teleport_every_gadget: bool = False) -> FTPattern:
    """Level-1 Steane encoding of a Pauli-measurement pattern.

    A verified teleport is inserted before every logical measurement that
    follows another gadget on its wire, and with ``teleport_every_gadget``
    between any two consecutive gadgets. ``verify_prep`` teleports each fresh
    encoded block once and post-selects on its syndromes.
    """
    from pmmft.rewrite import standardize

    if not is_pmm(p):
        raise NotPMM("ft_transform needs a pattern in the Pauli measurement model")
    lp = p if is_standard(p) else standardize(p, trace=False)[0]
    b = _Builder(verify_prep, teleport_every_gadget)
    inputs: list[int] = []
    input_blocks: dict[int, tuple[int, ...]] = {}
    for q in lp.inputs:
        block = b.fresh(7)
        b.block[q] = input_blocks[q] = block
        inputs += block
    decode: list[tuple[int, Angle, dict[frozenset[int], int]]] = []
    logical_corr: list[LogicalCorrection] = []
    blocks_measured: dict[int, tuple[int, ...]] = {}
    for c in lp.seq:
        if isinstance(c, Prepare):
            enc = build_encoder(c.angle, start=b.nxt)
            b.add(enc)
            b.block[c.q] = enc.outputs
            if verify_prep:
                b.teleport(c.q)
            b.after_gadget(c.q)
        elif isinstance(c, Entangle):
            b.before_gadget(c.i)
            b.before_gadget(c.j)
            b.seq += [Entangle(x, y) for x, y in zip(b.block[c.i], b.block[c.j])]
            b.after_gadget(c.i)
            b.after_gadget(c.j)
        elif isinstance(c, Measure):
            b.before_gadget(c.q, measuring=True)
            base = c.angle.const
            b.seq += [Measure(x, AnglePoly.constant(base)) for x in b.block[c.q]]
            blocks_measured[c.q] = b.block[c.q]
            decode.append((c.q, base, _quarter_terms(c.angle)))
        elif isinstance(c, CorrectX):
            logical_corr.append(LogicalCorrection(c.q, "X", 0, c.cond))
        elif isinstance(c, CorrectZ):
            logical_corr.append(LogicalCorrection(c.q, "Z", c.angle.quarter_turns(), c.cond))
    outputs = tuple(x for q in lp.outputs for x in b.block[q])
    phys, _ = standardize(Pattern(b.seq, inputs, outputs), trace=False)
    alt: dict[int, dict[int, AnglePoly]] = {}
    swaps = [q for q, _, terms in decode if any(v % 2 for v in terms.values())]
    if swaps:
        shifted = {x for q in swaps for x in blocks_measured[q]}
        seq2 = [
            Measure(x.q, AnglePoly.constant(x.angle.const + Angle.of(1, 2))) if isinstance(x, Measure) and x.q in shifted else x
            for x in b.seq
        ]
        phys2, _ = standardize(Pattern(seq2, inputs, outputs), trace=False)
        polys2 = {x.q: x.angle for x in phys2.seq if isinstance(x, Measure)}
        for q in swaps:
            alt[q] = {x: polys2[x] for x in blocks_measured[q]}
    body = [x for x in phys.seq if not isinstance(x, CORRECTIONS)]
    corrections = tuple(x for x in phys.seq if isinstance(x, CORRECTIONS))
    program = ClassicalProgram(
        tuple(b.verify),
        tuple(DecodeMeasure(q, blocks_measured[q], base, terms, alt.get(q, {})) for q, base, terms in decode),
        tuple(logical_corr),
        corrections,
        input_blocks,
        {q: b.block[q] for q in lp.outputs},
    )
    return FTPattern(phys.with_seq(body), program, lp)
