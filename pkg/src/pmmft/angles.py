"""Exact angles, signal conditions and multilinear angle polynomials.

Every angle is a rational multiple of pi reduced modulo 2*pi. Adaptive
measurement angles are multilinear polynomials over 0/1 signal variables
whose coefficients are such angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping

__all__ = ["Angle", "Condition", "AnglePoly", "ALWAYS", "NEVER"]


@dataclass(frozen=True, order=True)
class Angle:
    """A rational multiple of pi, kept in ``[0, 2)`` units of pi."""

    turns: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        t = Fraction(self.turns) % 2
        object.__setattr__(self, "turns", t)

    @classmethod
    def of(cls, numerator: int, denominator: int = 1) -> Angle:
        if denominator <= 0:
            raise ValueError("denominator must be positive")
        return cls(Fraction(numerator, denominator))

    @classmethod
    def coerce(cls, value: Angle | Fraction | int | str) -> Angle:
        if isinstance(value, Angle):
            return value
        if isinstance(value, str):
            from pmmft.dsl import parse_angle

            return parse_angle(value)
        return cls(Fraction(value))

    @property
    def numerator(self) -> int:
        return self.turns.numerator

    @property
    def denominator(self) -> int:
        return self.turns.denominator

    def __add__(self, other: Angle) -> Angle:
        return Angle(self.turns + other.turns)

    def __sub__(self, other: Angle) -> Angle:
        return Angle(self.turns - other.turns)

    def __neg__(self) -> Angle:
        return Angle(-self.turns)

    def __mul__(self, k: int) -> Angle:
        if not isinstance(k, int):
            return NotImplemented
        return Angle(self.turns * k)

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return self.turns != 0

    def __float__(self) -> float:
        return float(self.turns) * math.pi

    def is_multiple_of(self, unit: Fraction | int) -> bool:
        """True if the angle is an integer multiple of ``unit * pi``."""
        q = self.turns / Fraction(unit)
        return q.denominator == 1

    def quarter_turns(self) -> int:
        """Number of pi/2 steps; raises if the angle is not a multiple of pi/2."""
        if not self.is_multiple_of(Fraction(1, 2)):
            raise ValueError(f"{self} is not a multiple of pi/2")
        return int(self.turns * 2) % 4

    def __str__(self) -> str:
        n, d = self.numerator, self.denominator
        if n == 0:
            return "0"
        head = "pi" if n == 1 else f"{n}*pi"
        return head if d == 1 else f"{head}/{d}"

    def __repr__(self) -> str:
        return f"Angle({self})"


ZERO = Angle()
PI = Angle(Fraction(1))


@dataclass(frozen=True)
class Condition:
    """XOR of a set of signals, optionally XOR-ed with the constant 1.

    ``Condition(frozenset(), True)`` is the always-on condition used for
    unconditional corrections; ``Condition()`` never fires.
    """

    signals: frozenset[int] = frozenset()
    const: bool = False

    @classmethod
    def on(cls, *signals: int) -> Condition:
        return cls(frozenset(signals))

    @property
    def is_always(self) -> bool:
        return self.const and not self.signals

    @property
    def is_never(self) -> bool:
        return not self.const and not self.signals

    def __xor__(self, other: Condition) -> Condition:
        return Condition(self.signals ^ other.signals, self.const ^ other.const)

    def evaluate(self, outcomes: Mapping[int, int]) -> int:
        v = int(self.const)
        for s in self.signals:
            v ^= outcomes[s] & 1
        return v

    def relabel(self, mapping: Mapping[int, int]) -> Condition:
        return Condition(frozenset(mapping.get(s, s) for s in self.signals), self.const)

    def __str__(self) -> str:
        parts = ([] if not self.const else ["1"]) + [f"s{s}" for s in sorted(self.signals)]
        return "^".join(parts) if parts else "0"


ALWAYS = Condition(frozenset(), True)
NEVER = Condition()


def _key(signals: Iterable[int]) -> frozenset[int]:
    return frozenset(signals)


@dataclass(frozen=True)
class AnglePoly:
    """Multilinear polynomial in signal bits with :class:`Angle` coefficients.

    ``terms`` maps a set of signals to its coefficient; the empty set holds the
    constant term. Zero coefficients are never stored, so structural equality
    is polynomial equality.
    """

    terms: Mapping[frozenset[int], Angle] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {_key(k): Angle.coerce(v) for k, v in dict(self.terms).items()}
        clean = {k: v for k, v in clean.items() if v}
        object.__setattr__(self, "terms", dict(sorted(clean.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))))

    def __hash__(self) -> int:
        return hash(tuple(self.terms.items()))

    @classmethod
    def constant(cls, angle: Angle | Fraction | int) -> AnglePoly:
        return cls({frozenset(): Angle.coerce(angle)})

    @classmethod
    def scaled_parity(cls, beta: Angle, cond: Condition) -> AnglePoly:
        """``beta * cond`` where ``cond`` is an XOR of bits (plus a constant).

        Uses ``xor(S) = sum over nonempty T of S of (-2)^(|T|-1) prod(T)``
        and ``1 xor v = 1 - v``.
        """
        terms: dict[frozenset[int], Angle] = {}
        sig = sorted(cond.signals)
        for r in range(1, len(sig) + 1):
            coeff = beta * ((-2) ** (r - 1))
            for subset in combinations(sig, r):
                terms[frozenset(subset)] = coeff
        poly = cls(terms)
        if cond.const:
            poly = cls.constant(beta) - poly
        return poly

    @property
    def const(self) -> Angle:
        return self.terms.get(frozenset(), ZERO)

    @property
    def signals(self) -> frozenset[int]:
        out: set[int] = set()
        for k in self.terms:
            out |= k
        return frozenset(out)

    @property
    def is_constant(self) -> bool:
        return all(not k for k in self.terms)

    def coefficients(self) -> list[Angle]:
        return list(self.terms.values())

    def __add__(self, other: AnglePoly) -> AnglePoly:
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, ZERO) + v
        return AnglePoly(out)

    def __neg__(self) -> AnglePoly:
        return AnglePoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other: AnglePoly) -> AnglePoly:
        return self + (-other)

    def scale_by_one_minus_two_s(self, k: int) -> AnglePoly:
        """Multiply by ``(1 - 2 s_k)``, reducing ``s_k**2 = s_k``."""
        out: dict[frozenset[int], Angle] = {}

        def bump(key: frozenset[int], val: Angle) -> None:
            out[key] = out.get(key, ZERO) + val

        for key, c in self.terms.items():
            if k in key:
                bump(key, -c)
            else:
                bump(key, c)
                bump(key | {k}, c * -2)
        return AnglePoly(out)

    def times_sign_of(self, cond: Condition) -> AnglePoly:
        """Multiply by ``(-1) ** cond``."""
        poly = self
        for s in sorted(cond.signals):
            poly = poly.scale_by_one_minus_two_s(s)
        return -poly if cond.const else poly

    def evaluate(self, outcomes: Mapping[int, int]) -> Angle:
        total = ZERO
        for key, c in self.terms.items():
            if all(outcomes[s] & 1 for s in key):
                total = total + c
        return total

    def relabel(self, mapping: Mapping[int, int]) -> AnglePoly:
        return AnglePoly({frozenset(mapping.get(s, s) for s in k): v for k, v in self.terms.items()})

    def __str__(self) -> str:
        if self.is_constant:
            return str(self.const)
        parts = []
        for k, v in self.terms.items():
            name = "const" if not k else "*".join(f"s{s}" for s in sorted(k))
            parts.append(f"{name}:{v}")
        return "poly{" + "; ".join(parts) + "}"

    def __repr__(self) -> str:
        return f"AnglePoly({self})"
