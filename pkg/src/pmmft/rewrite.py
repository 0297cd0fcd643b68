"""Standardization by local rewriting.

Corrections are pushed toward the end of the execution order, commuting past
entanglements (an X on one end of ``E`` leaves a Z on the other) and past
commands on other qubits, until they merge into the measurement of their
qubit. What remains is sorted into N, E, M, corrections order and the output
corrections are folded into one Z and one X per qubit where possible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from pmmft.angles import PI, ZERO, AnglePoly, Condition
from pmmft.pattern import (
    CORRECTIONS,
    Command,
    CorrectX,
    CorrectZ,
    Entangle,
    Measure,
    Pattern,
    Prepare,
    signals_of,
)

__all__ = [
    "RewriteStep",
    "NotAdjacent",
    "ReplayMismatch",
    "merge_z",
    "merge_x",
    "commute_ex",
    "commute_ez",
    "free_commute",
    "standardize",
    "replay",
    "trace_to_json",
    "RULES",
]

RULES = ("MergeZ", "MergeX", "CommuteEX", "CommuteEZ", "FreeCommute", "NormalizeOutputs")


class NotAdjacent(ValueError):
    pass


class ReplayMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RewriteStep:
    """Replace ``before`` at ``position`` by ``after``."""

    rule: str
    position: int
    before: tuple[Command, ...]
    after: tuple[Command, ...]

    def to_dict(self) -> dict[str, Any]:
        from pmmft.dsl import command_to_dict

        return {
            "rule": self.rule,
            "position": self.position,
            "before": [command_to_dict(c) for c in self.before],
            "after": [command_to_dict(c) for c in self.after],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RewriteStep:
        from pmmft.dsl import command_from_dict

        return cls(
            d["rule"],
            int(d["position"]),
            tuple(command_from_dict(c) for c in d["before"]),
            tuple(command_from_dict(c) for c in d["after"]),
        )


def _merge_z_cmds(corr: Command, meas: Command) -> Measure:
    if not (isinstance(corr, CorrectZ) and isinstance(meas, Measure) and corr.q == meas.q):
        raise NotAdjacent(f"{corr} is not a Z correction directly before the measurement of its qubit")
    return Measure(meas.q, meas.angle - AnglePoly.scaled_parity(corr.angle, corr.cond))


def _merge_x_cmds(corr: Command, meas: Command) -> Measure:
    if not (isinstance(corr, CorrectX) and isinstance(meas, Measure) and corr.q == meas.q):
        raise NotAdjacent(f"{corr} is not an X correction directly before the measurement of its qubit")
    return Measure(meas.q, meas.angle.times_sign_of(corr.cond))


def _commute_ex_cmds(corr: Command, ent: Command) -> tuple[Command, ...]:
    if not (isinstance(corr, CorrectX) and isinstance(ent, Entangle) and corr.q in ent.qubits):
        raise NotAdjacent(f"{corr} is not an X correction directly before an E on its qubit")
    return (ent, corr, CorrectZ(ent.other(corr.q), PI, corr.cond))


def _commute_ez_cmds(corr: Command, ent: Command) -> tuple[Command, ...]:
    if not (isinstance(corr, CorrectZ) and isinstance(ent, Entangle) and corr.q in ent.qubits):
        raise NotAdjacent(f"{corr} is not a Z correction directly before an E on its qubit")
    return (ent, corr)


def _free_cmds(a: Command, b: Command) -> tuple[Command, ...]:
    if set(a.qubits) & set(b.qubits):
        raise NotAdjacent(f"{a} and {b} share a qubit")
    if isinstance(a, Measure) and a.q in signals_of(b):
        raise NotAdjacent(f"{b} depends on the outcome of {a}")
    return (b, a)


def _local(p: Pattern, index: int, fn) -> Pattern:
    seq = list(p.seq)
    if not 0 <= index < len(seq) - 1:
        raise NotAdjacent(f"no command pair at position {index}")
    out = fn(seq[index], seq[index + 1])
    if isinstance(out, Measure):
        out = (out,)
    seq[index : index + 2] = list(out)
    return p.with_seq(seq)


def merge_z(p: Pattern, index: int) -> Pattern:
    """``Z_i(beta)^c`` then ``M_i^alpha`` becomes ``M_i^(alpha - c*beta)``."""
    return _local(p, index, _merge_z_cmds)


def merge_x(p: Pattern, index: int) -> Pattern:
    """``X_i^c`` then ``M_i^alpha`` becomes ``M_i^((-1)^c alpha)``."""
    return _local(p, index, _merge_x_cmds)


def commute_ex(p: Pattern, index: int) -> Pattern:
    """``X_i^c`` then ``E_ij`` becomes ``E_ij``, ``X_i^c``, ``Z_j^c``."""
    return _local(p, index, _commute_ex_cmds)


def commute_ez(p: Pattern, index: int) -> Pattern:
    """``Z_i(a)^c`` then ``E_ij`` becomes ``E_ij``, ``Z_i(a)^c``."""
    return _local(p, index, _commute_ez_cmds)


def free_commute(p: Pattern, index: int) -> Pattern:
    """Swap two adjacent commands acting on disjoint qubits."""
    return _local(p, index, _free_cmds)


_RANK = {Prepare: 0, Entangle: 1, Measure: 2, CorrectX: 3, CorrectZ: 3}


class _Rewriter:
    def __init__(self, p: Pattern, record: bool) -> None:
        self.p = p
        self.seq: list[Command] = list(p.seq)
        self.done: list[bool] = [False] * len(self.seq)
        self.record = record
        self.steps: list[RewriteStep] = []

    def _replace(self, rule: str, pos: int, width: int, new: Sequence[Command], flags: Sequence[bool]) -> None:
        if self.record:
            self.steps.append(RewriteStep(rule, pos, tuple(self.seq[pos : pos + width]), tuple(new)))
        self.seq[pos : pos + width] = list(new)
        self.done[pos : pos + width] = list(flags)

    def push(self, i: int) -> None:
        """Move the correction at ``i`` later until it merges or is blocked."""
        self.done[i] = True
        while i + 1 < len(self.seq):
            c, nxt = self.seq[i], self.seq[i + 1]
            if isinstance(nxt, Measure) and nxt.q == c.q:
                if isinstance(c, CorrectZ):
                    self._replace("MergeZ", i, 2, [_merge_z_cmds(c, nxt)], [True])
                else:
                    self._replace("MergeX", i, 2, [_merge_x_cmds(c, nxt)], [True])
                return
            if isinstance(nxt, Entangle) and c.q in nxt.qubits:
                if isinstance(c, CorrectX):
                    self._replace("CommuteEX", i, 2, _commute_ex_cmds(c, nxt), [True, True, False])
                    self.push(i + 2)
                else:
                    self._replace("CommuteEZ", i, 2, _commute_ez_cmds(c, nxt), [True, True])
                i += 1
                continue
            if c.q in nxt.qubits:
                if isinstance(nxt, CORRECTIONS) and not self.done[i + 1]:
                    self.push(i + 1)
                    continue
                return
            self._replace("FreeCommute", i, 2, (nxt, c), (self.done[i + 1], True))
            i += 1

    def run(self, strategy: str) -> None:
        if strategy not in ("rtl", "ltr"):
            raise ValueError(f"unknown strategy {strategy!r}")
        while True:
            pending = [k for k, c in enumerate(self.seq) if isinstance(c, CORRECTIONS) and not self.done[k]]
            if not pending:
                break
            self.push(pending[-1] if strategy == "rtl" else pending[0])
        self._sort()
        self._normalize_outputs()

    def _sort(self) -> None:
        ranks = [_RANK[type(c)] for c in self.seq]
        if not self.record:
            order = sorted(range(len(self.seq)), key=lambda k: ranks[k])
            self.seq = [self.seq[k] for k in order]
            return
        # insertion sort keeps every move an adjacent free commutation
        for k in range(1, len(self.seq)):
            j = k
            while j > 0 and ranks[j - 1] > ranks[j]:
                self._replace("FreeCommute", j - 1, 2, (self.seq[j], self.seq[j - 1]), (True, True))
                ranks[j - 1], ranks[j] = ranks[j], ranks[j - 1]
                j -= 1

    def _normalize_outputs(self) -> None:
        start = len(self.seq)
        while start > 0 and isinstance(self.seq[start - 1], CORRECTIONS):
            start -= 1
        tail = self.seq[start:]
        per_qubit: dict[int, list[Command]] = {}
        for c in tail:
            per_qubit.setdefault(c.q, []).append(c)
        order = list(self.p.outputs) + sorted(set(per_qubit) - set(self.p.outputs))
        new_tail: list[Command] = []
        for q in order:
            cmds = per_qubit.get(q, [])
            live = [c for c in cmds if not c.cond.is_never and not (isinstance(c, CorrectZ) and c.angle == ZERO)]
            if all(c.angle == PI for c in live if isinstance(c, CorrectZ)):
                cx, cz = Condition(), Condition()
                for c in live:
                    if isinstance(c, CorrectX):
                        cx = cx ^ c.cond
                    else:
                        cz = cz ^ c.cond
                live = ([CorrectZ(q, PI, cz)] if not cz.is_never else []) + (
                    [CorrectX(q, cx)] if not cx.is_never else []
                )
            new_tail.extend(live)
        if new_tail != tail:
            self._replace("NormalizeOutputs", start, len(tail), new_tail, [True] * len(new_tail))


def standardize(p: Pattern, strategy: str = "rtl", trace: bool = True) -> tuple[Pattern, list[RewriteStep]]:
    """Rewrite ``p`` into standard form and return it with the rewrite trace.

    ``strategy`` picks which pending correction is pushed next: the last one
    (``"rtl"``) or the first one (``"ltr"``). With ``trace=False`` the final
    reordering is done by a stable sort and no steps are recorded.
    """
    rw = _Rewriter(p, trace)
    rw.run(strategy)
    return p.with_seq(rw.seq), rw.steps


def replay(p: Pattern, steps: Iterable[RewriteStep]) -> Pattern:
    """Apply recorded steps to ``p``; each step's ``before`` must match exactly."""
    seq = list(p.seq)
    for n, st in enumerate(steps):
        window = tuple(seq[st.position : st.position + len(st.before)])
        if window != st.before:
            raise ReplayMismatch(f"step {n} ({st.rule}) does not match at position {st.position}")
        seq[st.position : st.position + len(st.before)] = list(st.after)
    return p.with_seq(seq)


def trace_to_json(steps: Iterable[RewriteStep]) -> list[dict[str, Any]]:
    return [s.to_dict() for s in steps]
