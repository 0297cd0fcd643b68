"""Text DSL and canonical JSON for patterns.

DSL lines, in execution order::

    IN: 1
    OUT: 3
    N 2 pi/4
    E 1 2
    M 1 -a
    M 2 poly{const:-a+pi/4; s1:+2a}
    X 3 if s2
    Z 3 pi if s1

Angles are sums of terms such as ``3*pi/4``, ``-pi``, ``2a`` or ``a/2`` where
named symbols are bound to concrete angles by the caller. Conditions are
``s1^s2`` (``+`` is accepted as XOR) with an optional leading ``1``.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Any, Mapping

from pmmft.angles import ALWAYS, Angle, AnglePoly, Condition
from pmmft.pattern import Command, CorrectX, CorrectZ, Entangle, Measure, Pattern, Prepare

FORMAT_VERSION = 1

__all__ = [
    "DSLError",
    "parse_angle",
    "parse_pattern",
    "dump_pattern",
    "pattern_to_json",
    "pattern_from_json",
    "pattern_to_dict",
    "pattern_from_dict",
    "FORMAT_VERSION",
]


class DSLError(ValueError):
    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


_TERM = re.compile(r"^(?P<num>\d+)?\*?(?P<sym>[A-Za-z_]\w*)?(?:/(?P<den>\d+))?$")


def parse_angle(text: str, params: Mapping[str, Angle | Fraction | int | str] | None = None) -> Angle:
    """Parse an angle expression into an exact :class:`Angle`."""
    params = params or {}
    expr = text.replace(" ", "")
    if not expr:
        raise DSLError("empty angle")
    total = Fraction(0)
    for sign, body in re.findall(r"([+-]?)([^+-]+)", expr):
        m = _TERM.match(body)
        if not m or (m.group("num") is None and m.group("sym") is None):
            raise DSLError(f"cannot parse angle term {body!r}")
        num = Fraction(int(m.group("num"))) if m.group("num") else Fraction(1)
        sym = m.group("sym")
        if sym is None:
            if num != 0:
                raise DSLError(f"bare number {body!r}; write multiples of pi as n*pi/d")
            unit = Fraction(0)
        elif sym == "pi":
            unit = Fraction(1)
        elif sym in params:
            unit = Angle.coerce(params[sym]).turns
        else:
            raise DSLError(f"unbound angle symbol {sym!r}")
        val = num * unit
        if m.group("den"):
            val /= int(m.group("den"))
        total += -val if sign == "-" else val
    return Angle(total)


def _parse_poly(text: str, params: Mapping[str, Any]) -> AnglePoly:
    text = text.strip()
    if not text.startswith("poly{"):
        return AnglePoly.constant(parse_angle(text, params))
    if not text.endswith("}"):
        raise DSLError("unterminated poly{...}")
    terms: dict[frozenset[int], Angle] = {}
    for chunk in filter(None, (c.strip() for c in text[5:-1].split(";"))):
        key, _, value = chunk.partition(":")
        key = key.strip()
        if key == "const":
            sig: frozenset[int] = frozenset()
        else:
            names = [n for n in re.split(r"[*\s]+", key) if n]
            if not names or not all(re.fullmatch(r"s\d+", n) for n in names):
                raise DSLError(f"bad poly key {key!r}")
            sig = frozenset(int(n[1:]) for n in names)
        terms[sig] = terms.get(sig, Angle()) + parse_angle(value, params)
    return AnglePoly(terms)


def _parse_cond(text: str) -> Condition:
    cond = Condition()
    for tok in filter(None, (t.strip() for t in re.split(r"[\^+]", text))):
        if tok == "1":
            cond = cond ^ ALWAYS
        elif re.fullmatch(r"s\d+", tok):
            cond = cond ^ Condition.on(int(tok[1:]))
        else:
            raise DSLError(f"bad condition token {tok!r}")
    return cond


def _split_cond(rest: str) -> tuple[str, Condition]:
    if " if " in f" {rest} ":
        head, _, tail = f" {rest} ".partition(" if ")
        return head.strip(), _parse_cond(tail)
    return rest.strip(), ALWAYS


def parse_pattern(text: str, params: Mapping[str, Any] | None = None) -> Pattern:
    """Parse DSL text; ``params`` binds symbolic angles such as ``a``."""
    params = dict(params or {})
    inputs: list[int] = []
    outputs: list[int] = []
    seq: list[Command] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            upper = line.upper()
            if upper.startswith("IN:"):
                inputs = [int(t) for t in line[3:].replace(",", " ").split()]
                continue
            if upper.startswith("OUT:"):
                outputs = [int(t) for t in line[4:].replace(",", " ").split()]
                continue
            op, _, rest = line.partition(" ")
            op = op.upper()
            if op == "N":
                q, _, ang = rest.strip().partition(" ")
                seq.append(Prepare(int(q), parse_angle(ang, params) if ang.strip() else Angle()))
            elif op == "E":
                i, j = rest.split()
                seq.append(Entangle(int(i), int(j)))
            elif op == "M":
                q, _, ang = rest.strip().partition(" ")
                seq.append(Measure(int(q), _parse_poly(ang, params) if ang.strip() else AnglePoly()))
            elif op == "X":
                body, cond = _split_cond(rest)
                seq.append(CorrectX(int(body), cond))
            elif op == "Z":
                body, cond = _split_cond(rest)
                q, _, ang = body.partition(" ")
                angle = parse_angle(ang, params) if ang.strip() else Angle(Fraction(1))
                seq.append(CorrectZ(int(q), angle, cond))
            else:
                raise DSLError(f"unknown command {op!r}")
        except DSLError as exc:
            if exc.line is None:
                raise DSLError(str(exc), lineno) from None
            raise
        except ValueError as exc:
            raise DSLError(str(exc), lineno) from None
    return Pattern(seq, inputs, outputs)


def _cond_str(cond: Condition) -> str:
    return "" if cond.is_always else f" if {cond}"


def dump_pattern(p: Pattern) -> str:
    """Render ``p`` as DSL text; round-trips through :func:`parse_pattern`."""
    lines = [f"IN: {' '.join(map(str, p.inputs))}".rstrip(), f"OUT: {' '.join(map(str, p.outputs))}".rstrip()]
    for c in p.seq:
        if isinstance(c, Prepare):
            lines.append(f"N {c.q} {c.angle}")
        elif isinstance(c, Entangle):
            lines.append(f"E {c.i} {c.j}")
        elif isinstance(c, Measure):
            lines.append(f"M {c.q} {c.angle}")
        elif isinstance(c, CorrectX):
            lines.append(f"X {c.q}{_cond_str(c.cond)}")
        else:
            lines.append(f"Z {c.q} {c.angle}{_cond_str(c.cond)}")
    return "\n".join(lines) + "\n"


def _angle_json(a: Angle) -> list[int]:
    return [a.numerator, a.denominator]


def _angle_from(v: list[int]) -> Angle:
    return Angle.of(int(v[0]), int(v[1]))


def _cond_json(c: Condition) -> dict[str, Any]:
    return {"signals": sorted(c.signals), "const": int(c.const)}


def _cond_from(d: Mapping[str, Any]) -> Condition:
    return Condition(frozenset(d["signals"]), bool(d["const"]))


def command_to_dict(c: Command) -> dict[str, Any]:
    if isinstance(c, Prepare):
        return {"op": "N", "q": c.q, "angle": _angle_json(c.angle)}
    if isinstance(c, Entangle):
        return {"op": "E", "q": [c.i, c.j]}
    if isinstance(c, Measure):
        terms = [{"signals": sorted(k), "coeff": _angle_json(v)} for k, v in c.angle.terms.items()]
        terms.sort(key=lambda t: (len(t["signals"]), t["signals"]))
        return {"op": "M", "q": c.q, "angle": terms}
    if isinstance(c, CorrectX):
        return {"op": "X", "q": c.q, "cond": _cond_json(c.cond)}
    return {"op": "Z", "q": c.q, "angle": _angle_json(c.angle), "cond": _cond_json(c.cond)}


def command_from_dict(d: Mapping[str, Any]) -> Command:
    op = d["op"]
    if op == "N":
        return Prepare(int(d["q"]), _angle_from(d["angle"]))
    if op == "E":
        return Entangle(int(d["q"][0]), int(d["q"][1]))
    if op == "M":
        return Measure(int(d["q"]), AnglePoly({frozenset(t["signals"]): _angle_from(t["coeff"]) for t in d["angle"]}))
    if op == "X":
        return CorrectX(int(d["q"]), _cond_from(d["cond"]))
    if op == "Z":
        return CorrectZ(int(d["q"]), _angle_from(d["angle"]), _cond_from(d["cond"]))
    raise ValueError(f"unknown op {op!r}")


def pattern_to_dict(p: Pattern) -> dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "V": sorted(p.V),
        "I": list(p.inputs),
        "O": list(p.outputs),
        "seq": [command_to_dict(c) for c in p.seq],
    }


def pattern_from_dict(d: Mapping[str, Any]) -> Pattern:
    version = d.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {version}")
    return Pattern((command_from_dict(c) for c in d["seq"]), d["I"], d["O"], d["V"])


def pattern_to_json(p: Pattern, indent: int | None = None) -> str:
    return json.dumps(pattern_to_dict(p), indent=indent, sort_keys=True)


def pattern_from_json(text: str) -> Pattern:
    return pattern_from_dict(json.loads(text))
