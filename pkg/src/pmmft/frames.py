"""Clifford frames and frame tracking of adaptive Pauli-basis measurements.

An outcome-dependent angle ``theta0 + j(s) * pi/2`` is read as a fixed
measurement of ``theta0`` behind the frame ``S^{-j(s)}``. Even ``j`` only
flips the recorded outcome and stays classical; odd ``j`` swaps the X and Y
bases and is a genuine dependency.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

from pmmft.angles import Angle, AnglePoly, Condition
from pmmft.pattern import CORRECTIONS, CorrectX, CorrectZ, Measure, Pattern, is_standard

__all__ = [
    "CliffordFrame",
    "FramePlan",
    "NonCliffordDependency",
    "frame_track",
    "plan_branches",
]

_S = np.diag([1, 1j])
_X = np.array([[0, 1], [1, 0]], dtype=complex)


class NonCliffordDependency(ValueError):
    pass


@dataclass(frozen=True)
class CliffordFrame:
    """``i**phase * S**k * X**x`` on one qubit."""

    x: int = 0
    k: int = 0
    phase: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", self.x % 2)
        object.__setattr__(self, "k", self.k % 4)
        object.__setattr__(self, "phase", self.phase % 4)

    def __matmul__(self, other: CliffordFrame) -> CliffordFrame:
        # X S^k = i^k S^{-k} X
        k2 = -other.k if self.x else other.k
        extra = other.k if self.x else 0
        return CliffordFrame(self.x ^ other.x, self.k + k2, self.phase + other.phase + extra)

    def matrix(self) -> np.ndarray:
        return (1j**self.phase) * np.linalg.matrix_power(_S, self.k) @ np.linalg.matrix_power(_X, self.x)

    @property
    def is_pauli(self) -> bool:
        return self.k % 2 == 0

    def measure_angle(self, theta: Angle) -> Angle:
        """Angle ``theta'`` with ``M^theta(F psi) = M^theta'(psi)``."""
        a = theta - Angle(Fraction(self.k, 2))
        return -a if self.x else a

    @classmethod
    def from_correction(cls, cmd: CorrectX | CorrectZ) -> CliffordFrame:
        if isinstance(cmd, CorrectX):
            return cls(x=1)
        return cls(k=cmd.angle.quarter_turns())

    def __str__(self) -> str:
        parts = [f"S^{self.k}" if self.k else "", "X" if self.x else ""]
        body = " ".join(p for p in parts if p) or "I"
        return body if not self.phase else f"i^{self.phase} {body}"


def _quarters(poly: AnglePoly, where: str) -> tuple[Angle, dict[frozenset[int], int]]:
    terms: dict[frozenset[int], int] = {}
    for key, val in poly.terms.items():
        if not key:
            continue
        if not val.is_multiple_of(Fraction(1, 2)):
            raise NonCliffordDependency(f"{where}: coefficient {val} is not a multiple of pi/2")
        terms[key] = val.quarter_turns()
    return poly.const, terms


def _eval_quarters(terms: Mapping[frozenset[int], int], signals: Mapping[int, int]) -> int:
    return sum(v for k, v in terms.items() if all(signals[s] for s in k)) % 4


@dataclass(frozen=True)
class FramePlan:
    """Fixed-basis measurement schedule plus classical frame updates.

    ``terms[q]`` maps signal products to quarter-turn counts; the frame in
    front of measurement ``q`` is ``S^{-j}`` with ``j`` their evaluated sum.
    """

    order: tuple[int, ...]
    base: Mapping[int, Angle]
    terms: Mapping[int, Mapping[frozenset[int], int]]
    outputs: tuple[int, ...] = ()
    output_rules: tuple[tuple[int, str, int, Condition], ...] = ()
    extra_dependencies: Mapping[int, frozenset[int]] = field(default_factory=dict)

    @property
    def basis_dependencies(self) -> dict[int, frozenset[int]]:
        """Signals whose value can swap the X/Y basis of each measurement."""
        out = {}
        for q in self.order:
            deps: set[int] = set()
            for key, v in self.terms[q].items():
                if v % 2:
                    deps |= key
            out[q] = frozenset(deps) | self.extra_dependencies.get(q, frozenset())
        return out

    @property
    def flip_dependencies(self) -> dict[int, frozenset[int]]:
        out = {}
        for q in self.order:
            deps: set[int] = set()
            for key, v in self.terms[q].items():
                if v % 2 == 0 and v:
                    deps |= key
            out[q] = frozenset(deps)
        return out

    @property
    def is_identity(self) -> bool:
        return not any(self.terms[q] for q in self.order) and not self.output_rules

    def frame(self, q: int, signals: Mapping[int, int]) -> CliffordFrame:
        if q in self.base:
            return CliffordFrame(k=-_eval_quarters(self.terms[q], signals))
        f = CliffordFrame()
        for oq, kind, quarter, cond in self.output_rules:
            if oq == q and cond.evaluate(signals):
                step = CliffordFrame(x=1) if kind == "X" else CliffordFrame(k=quarter)
                f = step @ f
        return f

    def setting(self, q: int, signals: Mapping[int, int]) -> tuple[Angle, int]:
        """Basis to measure and outcome flip for ``q`` given earlier signals."""
        j = _eval_quarters(self.terms[q], signals)
        return self.base[q] + Angle(Fraction(j % 2, 2)), j // 2

    def to_dict(self) -> dict[str, Any]:
        return {
            "order": list(self.order),
            "measurements": [
                {
                    "q": q,
                    "base": [self.base[q].numerator, self.base[q].denominator],
                    "terms": [{"signals": sorted(k), "quarters": v} for k, v in sorted(self.terms[q].items(), key=lambda kv: sorted(kv[0]))],
                    "basis_dependencies": sorted(self.basis_dependencies[q]),
                }
                for q in self.order
            ],
            "outputs": [
                {"q": q, "op": kind, "quarters": quarter, "signals": sorted(c.signals), "const": int(c.const)}
                for q, kind, quarter, c in self.output_rules
            ],
        }


def frame_track(p: Any) -> FramePlan:
    """Replace adaptive Pauli-basis measurements by fixed bases plus frames.

    Accepts a pattern (standardized first if needed) or any object with a
    ``frame_plan()`` method, such as a fault-tolerant pattern.
    """
    if hasattr(p, "frame_plan"):
        return p.frame_plan()
    if not is_standard(p):
        from pmmft.rewrite import standardize

        p, _ = standardize(p, trace=False)
    order, base, terms = [], {}, {}
    for c in p.seq:
        if isinstance(c, Measure):
            const, t = _quarters(c.angle, str(c))
            order.append(c.q)
            base[c.q] = const
            terms[c.q] = t
    rules = []
    for c in p.seq:
        if isinstance(c, CORRECTIONS):
            if isinstance(c, CorrectZ):
                if not c.angle.is_multiple_of(Fraction(1, 2)):
                    raise NonCliffordDependency(f"{c}: correction outside the Clifford group")
                rules.append((c.q, "Z", c.angle.quarter_turns(), c.cond))
            else:
                rules.append((c.q, "X", 0, c.cond))
    return FramePlan(tuple(order), base, terms, tuple(p.outputs), tuple(rules))


def plan_branches(
    plan: FramePlan, p: Pattern, input_state: np.ndarray | None = None
) -> dict[tuple[int, ...], tuple[float, np.ndarray]]:
    """Run ``plan`` on the dense backend over every raw outcome string.

    Returns ``{interpreted signals: (probability, output state)}`` where the
    output state has the output frames applied, for comparison with
    :func:`pmmft.dense.enumerate_branches` on ``p``.
    """
    from pmmft.dense import DenseState, _initial
    from pmmft.pattern import Entangle, Prepare

    st0 = _initial(p, input_state)
    total = st0.norm() ** 2
    out: dict[tuple[int, ...], tuple[float, np.ndarray]] = {}
    m = len(plan.order)
    for raw in itertools.product((0, 1), repeat=m):
        st: DenseState = st0.copy()
        sig: dict[int, int] = {}
        k = 0
        for c in p.seq:
            if isinstance(c, Prepare):
                st.prepare(c.q, c.angle)
            elif isinstance(c, Entangle):
                st.entangle(c.i, c.j)
            elif isinstance(c, Measure):
                angle, flip = plan.setting(c.q, sig)
                st.project(c.q, angle, raw[k])
                sig[c.q] = raw[k] ^ flip
                k += 1
        w = st.norm() ** 2
        if w < 1e-30:
            continue
        vec = st.vector(p.outputs)
        n_out = len(p.outputs)
        for idx, q in enumerate(p.outputs):
            f = plan.frame(q, sig).matrix()
            t = vec.reshape((2,) * n_out)
            t = np.moveaxis(np.tensordot(f, t, axes=([1], [idx])), 0, idx)
            vec = t.reshape(-1)
        out[tuple(sig[q] for q in plan.order)] = (w / total, vec / np.linalg.norm(vec))
    return out
