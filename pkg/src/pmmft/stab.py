"""Stabilizer-tableau simulation of Clifford patterns with Pauli noise.

The tableau keeps destabilizers next to stabilizers so measurements cost
``O(n^2)``. Pauli strings use the bit convention ``(x, z) = (1, 1) -> Y``
and carry an exact phase ``i**phase``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from pmmft.angles import Angle, AnglePoly
from pmmft.pattern import Command, CorrectX, CorrectZ, Entangle, Measure, Pattern, Prepare

__all__ = [
    "PauliOp",
    "Tableau",
    "NoiseModel",
    "NoiseEvent",
    "StabResult",
    "NonClifford",
    "ForcedOutcomeImpossible",
    "apply",
    "measure_pauli",
    "check_clifford",
    "load_noise_model",
    "outcome_distribution",
    "sample",
    "single_fault_events",
]

HALF = Fraction(1, 2)
_LETTERS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


class NonClifford(ValueError):
    def __init__(self, message: str, index: int | None = None) -> None:
        super().__init__(message)
        self.index = index


class ForcedOutcomeImpossible(ValueError):
    pass


def _g(x1: np.ndarray, z1: np.ndarray, x2: np.ndarray, z2: np.ndarray) -> np.ndarray:
    """Power of ``i`` picked up by the single-qubit product ``P1 P2``."""
    x1, z1, x2, z2 = (np.asarray(a, dtype=np.int64) for a in (x1, z1, x2, z2))
    return np.where(
        x1 & z1,
        z2 - x2,
        np.where(x1 == 1, z2 * (2 * x2 - 1), np.where(z1 == 1, x2 * (1 - 2 * z2), 0)),
    )


@dataclass(frozen=True)
class PauliOp:
    """``i**phase`` times a tensor product of single-qubit Paulis on ``qubits``."""

    qubits: tuple[int, ...]
    x: tuple[int, ...]
    z: tuple[int, ...]
    phase: int = 0

    def __post_init__(self) -> None:
        if not (len(self.qubits) == len(self.x) == len(self.z)):
            raise ValueError("qubits, x and z must have equal length")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_string(cls, text: str, qubits: Sequence[int] | None = None) -> PauliOp:
        """``"-XIZ"`` style string; ``qubits`` defaults to ``0..n-1``."""
        phase = 0
        for prefix, ph in (("+i", 1), ("-i", 3), ("i", 1), ("+", 0), ("-", 2)):
            if text.startswith(prefix):
                phase, text = ph, text[len(prefix) :]
                break
        qubits = tuple(range(len(text))) if qubits is None else tuple(qubits)
        bits = [_LETTERS[c] for c in text.upper()]
        return cls(qubits, tuple(b[0] for b in bits), tuple(b[1] for b in bits), phase)

    @classmethod
    def single(cls, q: int, letter: str, phase: int = 0) -> PauliOp:
        x, z = _LETTERS[letter]
        return cls((q,), (x,), (z,), phase)

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def weight(self) -> int:
        return sum(1 for a, b in zip(self.x, self.z) if a or b)

    def as_dict(self) -> dict[int, tuple[int, int]]:
        return {q: (a, b) for q, a, b in zip(self.qubits, self.x, self.z)}

    def __mul__(self, other: PauliOp) -> PauliOp:
        a, b = self.as_dict(), other.as_dict()
        qubits = tuple(dict.fromkeys(self.qubits + other.qubits))
        pa = np.array([a.get(q, (0, 0)) for q in qubits]).reshape(-1, 2)
        pb = np.array([b.get(q, (0, 0)) for q in qubits]).reshape(-1, 2)
        ph = self.phase + other.phase + int(_g(pa[:, 0], pa[:, 1], pb[:, 0], pb[:, 1]).sum())
        return PauliOp(qubits, tuple(int(v) for v in pa[:, 0] ^ pb[:, 0]), tuple(int(v) for v in pa[:, 1] ^ pb[:, 1]), ph)

    def commutes(self, other: PauliOp) -> bool:
        a, b = self.as_dict(), other.as_dict()
        s = sum(a[q][0] * b[q][1] + a[q][1] * b[q][0] for q in set(a) & set(b))
        return s % 2 == 0

    def __str__(self) -> str:
        sign = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase]
        letters = {v: k for k, v in _LETTERS.items()}
        return sign + "".join(letters[(a, b)] for a, b in zip(self.x, self.z))

    def matrix(self) -> np.ndarray:
        mats = {
            (0, 0): np.eye(2),
            (1, 0): np.array([[0, 1], [1, 0]]),
            (1, 1): np.array([[0, -1j], [1j, 0]]),
            (0, 1): np.diag([1, -1]),
        }
        out = np.array([[1.0 + 0j]])
        for a, b in zip(self.x, self.z):
            out = np.kron(out, mats[(a, b)])
        return (1j**self.phase) * out


class Tableau:
    """Destabilizer/stabilizer tableau over qubits added on the fly."""

    def __init__(self, capacity: int = 8) -> None:
        self.n = 0
        self.index: dict[int, int] = {}
        self._alloc(capacity)

    def _alloc(self, cap: int) -> None:
        old = getattr(self, "x", None)
        x = np.zeros((2 * cap, cap), dtype=np.uint8)
        z = np.zeros((2 * cap, cap), dtype=np.uint8)
        r = np.zeros(2 * cap, dtype=np.uint8)
        if old is not None:
            n, oc = self.n, self.cap
            for src, dst in ((slice(0, n), slice(0, n)), (slice(oc, oc + n), slice(cap, cap + n))):
                x[dst, :n] = self.x[src, :n]
                z[dst, :n] = self.z[src, :n]
                r[dst] = self.r[src]
        self.cap = cap
        self.x, self.z, self.r = x, z, r

    @property
    def labels(self) -> list[int]:
        return list(self.index)

    def _rows(self) -> np.ndarray:
        return np.r_[np.arange(self.n), self.cap + np.arange(self.n)]

    def copy(self) -> Tableau:
        t = Tableau.__new__(Tableau)
        t.n, t.cap, t.index = self.n, self.cap, dict(self.index)
        t.x, t.z, t.r = self.x.copy(), self.z.copy(), self.r.copy()
        return t

    def relabel(self, mapping: Mapping[int, int]) -> None:
        """Rename qubits in place."""
        new = {mapping.get(q, q): a for q, a in self.index.items()}
        if len(new) != len(self.index):
            raise ValueError("relabelling merges qubits")
        self.index = new

    # -- state preparation and gates -------------------------------------
    def add_qubit(self, q: int, quarter_turns: int = 0) -> None:
        """Append ``q`` in ``|+_{k pi/2}>``."""
        if q in self.index:
            raise ValueError(f"qubit {q} already present")
        if self.n == self.cap:
            self._alloc(2 * self.cap)
        a = self.n
        self.index[q] = a
        self.n += 1
        k = quarter_turns % 4
        self.z[a, a] = 1  # destabilizer Z
        s = self.cap + a
        self.x[s, a] = 1
        self.z[s, a] = k % 2
        self.r[s] = k // 2

    def add_zero(self, q: int) -> None:
        self.add_qubit(q)
        self.h(q)

    def _col(self, q: int) -> int:
        try:
            return self.index[q]
        except KeyError:
            raise KeyError(f"qubit {q} not in tableau") from None

    def h(self, q: int) -> None:
        a, rows = self._col(q), self._rows()
        xa, za = self.x[rows, a].copy(), self.z[rows, a].copy()
        self.r[rows] ^= xa & za
        self.x[rows, a], self.z[rows, a] = za, xa

    def s(self, q: int, power: int = 1) -> None:
        a, rows = self._col(q), self._rows()
        for _ in range(power % 4):
            self.r[rows] ^= self.x[rows, a] & self.z[rows, a]
            self.z[rows, a] ^= self.x[rows, a]

    def cz(self, i: int, j: int) -> None:
        a, b, rows = self._col(i), self._col(j), self._rows()
        xa, xb = self.x[rows, a], self.x[rows, b]
        self.r[rows] ^= xa & xb & (self.z[rows, a] ^ self.z[rows, b])
        self.z[rows, a] ^= xb
        self.z[rows, b] ^= xa

    def pauli(self, op: PauliOp) -> None:
        """Apply a Pauli operator (global phase dropped)."""
        rows = self._rows()
        for q, px, pz in zip(op.qubits, op.x, op.z):
            a = self._col(q)
            if px:
                self.r[rows] ^= self.z[rows, a]
            if pz:
                self.r[rows] ^= self.x[rows, a]

    # -- measurement -----------------------------------------------------
    def _vec(self, op: PauliOp) -> tuple[np.ndarray, np.ndarray]:
        vx = np.zeros(self.cap, dtype=np.uint8)
        vz = np.zeros(self.cap, dtype=np.uint8)
        for q, px, pz in zip(op.qubits, op.x, op.z):
            a = self._col(q)
            vx[a] ^= px
            vz[a] ^= pz
        return vx, vz

    def _anti(self, rows: np.ndarray, vx: np.ndarray, vz: np.ndarray) -> np.ndarray:
        s = (self.x[rows] & vz).sum(axis=1) + (self.z[rows] & vx).sum(axis=1)
        return (s % 2).astype(bool)

    def _rowmul(self, h: np.ndarray, i: int) -> None:
        """Rows ``h`` become ``row_i * row_h`` with exact sign."""
        if h.size == 0:
            return
        n = self.n
        g = _g(self.x[i, :n][None, :], self.z[i, :n][None, :], self.x[h, :n], self.z[h, :n]).sum(axis=1)
        ph = (2 * self.r[h].astype(np.int64) + 2 * int(self.r[i]) + g) % 4
        self.r[h] = (ph == 2).astype(np.uint8)
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def peek(self, op: PauliOp) -> int | None:
        """Deterministic outcome of measuring ``op`` or ``None`` if random."""
        vx, vz = self._vec(op)
        stab = self.cap + np.arange(self.n)
        if self._anti(stab, vx, vz).any():
            return None
        destab = np.arange(self.n)
        hits = destab[self._anti(destab, vx, vz)]
        sx = np.zeros(self.cap, dtype=np.uint8)
        sz = np.zeros(self.cap, dtype=np.uint8)
        ph = 0
        n = self.n
        for d in hits:
            i = self.cap + d
            ph += 2 * int(self.r[i]) + int(_g(self.x[i, :n], self.z[i, :n], sx[:n], sz[:n]).sum())
            sx ^= self.x[i]
            sz ^= self.z[i]
        return ((ph - op.phase) % 4) // 2

    def measure(self, op: PauliOp, rng: np.random.Generator | None = None, forced: int | None = None) -> tuple[int, bool]:
        """Measure a Hermitian Pauli; returns ``(outcome, deterministic)``."""
        if not op.is_hermitian:
            raise ValueError("cannot measure a non-Hermitian Pauli")
        det = self.peek(op)
        if det is not None:
            if forced is not None and forced != det:
                raise ForcedOutcomeImpossible(f"outcome of {op} is fixed to {det}")
            return det, True
        vx, vz = self._vec(op)
        rows = self._rows()
        anti = rows[self._anti(rows, vx, vz)]
        p = next(int(r) for r in anti if r >= self.cap)
        self._rowmul(np.array([r for r in anti if r != p], dtype=np.int64), p)
        d = p - self.cap
        self.x[d], self.z[d], self.r[d] = self.x[p], self.z[p], self.r[p]
        if forced is not None:
            out = int(forced)
        else:
            out = int((rng if rng is not None else np.random.default_rng()).integers(2))
        self.x[p], self.z[p] = vx, vz
        self.r[p] = ((op.phase // 2) + out) % 2
        return out, False

    def expectation(self, op: PauliOp) -> int:
        """``+1``/``-1`` if ``op`` or ``-op`` stabilizes the state, else 0."""
        det = self.peek(op)
        return 0 if det is None else 1 - 2 * det

    # -- inspection ------------------------------------------------------
    def stabilizers(self) -> list[PauliOp]:
        labels = self.labels
        out = []
        for k in range(self.n):
            i = self.cap + k
            out.append(PauliOp(tuple(labels), tuple(int(v) for v in self.x[i, : self.n]), tuple(int(v) for v in self.z[i, : self.n]), 2 * int(self.r[i])))
        return out

    def check(self) -> bool:
        """Symplectic invariant: destab_i anticommutes with stab_i only."""
        n = self.n
        rows = self._rows()
        x, z = self.x[rows, :n].astype(np.int64), self.z[rows, :n].astype(np.int64)
        form = (x @ z.T + z @ x.T) % 2
        want = np.zeros((2 * n, 2 * n), dtype=np.int64)
        want[np.arange(n), n + np.arange(n)] = 1
        want[n + np.arange(n), np.arange(n)] = 1
        return bool(np.array_equal(form, want))

    def state_vector(self, order: Sequence[int] | None = None, seed: int = 0) -> np.ndarray:
        """Dense vector (small ``n`` only) with qubits in ``order``.

        Qubits left out of ``order`` must be in a product state with the rest
        (measured qubits are); they are projected out.
        """
        labels = self.labels
        order = list(labels) if order is None else list(order)
        rest = [q for q in labels if q not in order]
        full = order + rest
        n = len(full)
        if n > 14:
            raise ValueError("state_vector is limited to 14 qubits")
        rng = np.random.default_rng(seed)
        psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        psi = psi.reshape((2,) * n)
        pos = {q: k for k, q in enumerate(full)}
        for g in self.stabilizers():
            psi = 0.5 * (psi + _apply_pauli(psi, g, pos))
        vec = psi.reshape(2 ** len(order), 2 ** len(rest))
        col = int(np.argmax(np.linalg.norm(vec, axis=0)))
        v = vec[:, col]
        return v / np.linalg.norm(v)


def _apply_pauli(psi: np.ndarray, g: PauliOp, pos: Mapping[int, int]) -> np.ndarray:
    out = psi
    for q, px, pz in zip(g.qubits, g.x, g.z):
        a = pos[q]
        if pz:
            shape = [1] * out.ndim
            shape[a] = 2
            out = out * np.array([1, -1]).reshape(shape)
        if px:
            out = np.flip(out, axis=a)
    # Y = i X Z, so each Y contributes a factor i beyond the XZ product
    ny = sum(1 for px, pz in zip(g.x, g.z) if px and pz)
    return (1j ** (g.phase + ny)) * out


def measure_pauli(t: Tableau, op: PauliOp, forced: int | None = None, rng: np.random.Generator | None = None) -> tuple[int, bool]:
    return t.measure(op, rng=rng, forced=forced)


# -- noise ----------------------------------------------------------------


@dataclass(frozen=True)
class NoiseModel:
    """Independent Pauli faults; ``p_idle`` hits every qubit once before it is measured or output."""

    p_prep: float = 0.0
    p_ent: float = 0.0
    p_meas: float = 0.0
    p_idle: float = 0.0
    seed: int | None = None

    def __post_init__(self) -> None:
        for k in ("p_prep", "p_ent", "p_meas", "p_idle"):
            v = getattr(self, k)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{k}={v} is not a probability")

    @classmethod
    def uniform(cls, p: float, seed: int | None = None) -> NoiseModel:
        return cls(p, p, p, 0.0, seed)

    @property
    def is_noiseless(self) -> bool:
        return self.p_prep == self.p_ent == self.p_meas == self.p_idle == 0.0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> NoiseModel:
        known = {"p_prep", "p_ent", "p_meas", "p_idle", "seed"}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown noise keys {sorted(extra)}")
        return cls(**{k: d[k] for k in known if k in d})


def _toml_loads(text: str) -> dict[str, Any]:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    return tomllib.loads(text)


def load_noise_model(path: str | Path) -> NoiseModel:
    """Read a noise model from a JSON or TOML file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        data = _toml_loads(text)
    else:
        data = json.loads(text)
    return NoiseModel.from_dict(data.get("noise", data))


@dataclass(frozen=True)
class NoiseEvent:
    """A fault injected at command ``index``: a Pauli string or a measurement flip."""

    index: int
    kind: str  # "pauli" or "flip"
    qubits: tuple[int, ...] = ()
    paulis: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {"index": self.index, "kind": self.kind, "qubits": list(self.qubits), "paulis": self.paulis}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> NoiseEvent:
        return cls(int(d["index"]), d["kind"], tuple(d.get("qubits", ())), d.get("paulis", ""))


_P1 = "XYZ"
_P2 = [a + b for a in "IXYZ" for b in "IXYZ"][1:]


def _sample_events(cmd: Command, idx: int, model: NoiseModel, rng: np.random.Generator, when: str) -> list[NoiseEvent]:
    ev: list[NoiseEvent] = []
    if when == "after" and isinstance(cmd, Prepare) and model.p_prep and rng.random() < model.p_prep:
        ev.append(NoiseEvent(idx, "pauli", (cmd.q,), _P1[rng.integers(3)]))
    if when == "after" and isinstance(cmd, Entangle) and model.p_ent and rng.random() < model.p_ent:
        ev.append(NoiseEvent(idx, "pauli", (cmd.i, cmd.j), _P2[rng.integers(15)]))
    if when == "before" and isinstance(cmd, Measure):
        if model.p_idle and rng.random() < model.p_idle:
            ev.append(NoiseEvent(idx, "pauli", (cmd.q,), _P1[rng.integers(3)]))
        if model.p_meas and rng.random() < model.p_meas:
            ev.append(NoiseEvent(idx, "flip", (cmd.q,)))
    return ev


def single_fault_events(p: Pattern) -> list[NoiseEvent]:
    """Every single fault the preparation, entangling and measurement channels can place."""
    out: list[NoiseEvent] = []
    for idx, c in enumerate(p.seq):
        if isinstance(c, Prepare):
            out += [NoiseEvent(idx, "pauli", (c.q,), a) for a in _P1]
        elif isinstance(c, Entangle):
            out += [NoiseEvent(idx, "pauli", (c.i, c.j), ab) for ab in _P2]
        elif isinstance(c, Measure):
            out.append(NoiseEvent(idx, "flip", (c.q,)))
    return out


# -- pattern execution -------------------------------------------------------


def _is_quarter(a: Angle) -> bool:
    return a.is_multiple_of(HALF)


def check_clifford(p: Pattern) -> None:
    """Raise :class:`NonClifford` naming the first non-Clifford command."""
    for k, c in enumerate(p.seq):
        bad = (
            (isinstance(c, Prepare) and not _is_quarter(c.angle))
            or (isinstance(c, Measure) and not all(_is_quarter(v) for v in c.angle.coefficients()))
            or (isinstance(c, CorrectZ) and not _is_quarter(c.angle))
        )
        if bad:
            raise NonClifford(f"command {k} ({c}) is not Clifford", k)


def basis_op(q: int, angle: Angle) -> PauliOp:
    """Observable whose ``+1`` eigenstate is ``|+_angle>`` (angle a multiple of pi/2)."""
    k = angle.quarter_turns()
    return PauliOp((q,), (1,), (k % 2,), 2 * (k // 2))


@dataclass
class StabResult:
    signals: dict[int, int]
    tableau: Tableau
    noise_log: list[NoiseEvent] = field(default_factory=list)
    deterministic: dict[int, bool] = field(default_factory=dict)


def _inject(t: Tableau, ev: NoiseEvent) -> None:
    if ev.kind == "pauli":
        t.pauli(PauliOp.from_string(ev.paulis, ev.qubits))


def apply(
    p: Pattern,
    noise: NoiseModel | None = None,
    forced_outcomes: Mapping[int, int] | None = None,
    seed: int | None = None,
    noise_log: Iterable[NoiseEvent] | None = None,
    input_tableau: Tableau | None = None,
    angle_hook: Callable[[int, dict[int, int]], Angle | None] | None = None,
) -> StabResult:
    """Run a Clifford pattern on the tableau backend.

    Inputs start in ``|+>`` unless ``input_tableau`` already holds them.
    ``noise_log`` replays recorded faults instead of sampling new ones.
    ``angle_hook(q, signals)`` may override a measurement angle at run time.
    """
    check_clifford(p)
    forced = dict(forced_outcomes or {})
    rng = np.random.default_rng(seed if seed is not None else (noise.seed if noise else None))
    t = input_tableau.copy() if input_tableau is not None else Tableau(max(8, len(p.V)))
    for q in p.inputs:
        if q not in t.index:
            t.add_qubit(q)
    replay: dict[int, list[NoiseEvent]] | None = None
    if noise_log is not None:
        replay = {}
        for ev in noise_log:
            replay.setdefault(ev.index, []).append(ev)
    sample = noise is not None and not noise.is_noiseless and replay is None
    log: list[NoiseEvent] = []
    signals: dict[int, int] = {}
    det: dict[int, bool] = {}

    def events(cmd: Command, idx: int, when: str) -> list[NoiseEvent]:
        if replay is not None:
            mine = [e for e in replay.get(idx, []) if (e.kind == "flip" or isinstance(cmd, Measure)) == (when == "before")]
            return mine
        return _sample_events(cmd, idx, noise, rng, when) if sample else []

    for idx, cmd in enumerate(p.seq):
        if isinstance(cmd, Measure):
            flip = 0
            for ev in events(cmd, idx, "before"):
                log.append(ev)
                if ev.kind == "flip":
                    flip ^= 1
                else:
                    _inject(t, ev)
            angle = cmd.angle.evaluate(signals)
            if angle_hook is not None:
                override = angle_hook(cmd.q, signals)
                angle = angle if override is None else override
            want = forced.get(cmd.q)
            out, d = t.measure(basis_op(cmd.q, angle), rng=rng, forced=None if want is None else want ^ flip)
            signals[cmd.q] = out ^ flip
            det[cmd.q] = d
            continue
        if isinstance(cmd, Prepare):
            t.add_qubit(cmd.q, cmd.angle.quarter_turns())
        elif isinstance(cmd, Entangle):
            t.cz(cmd.i, cmd.j)
        elif isinstance(cmd, CorrectX):
            if cmd.cond.evaluate(signals):
                t.pauli(PauliOp.single(cmd.q, "X"))
        elif isinstance(cmd, CorrectZ):
            if cmd.cond.evaluate(signals):
                t.s(cmd.q, cmd.angle.quarter_turns())
        for ev in events(cmd, idx, "after"):
            log.append(ev)
            _inject(t, ev)
    if noise is not None and noise.p_idle and replay is None:
        for q in p.outputs:
            if rng.random() < noise.p_idle:
                ev = NoiseEvent(len(p.seq), "pauli", (q,), _P1[rng.integers(3)])
                log.append(ev)
                _inject(t, ev)
    elif replay is not None:
        for ev in replay.get(len(p.seq), []):
            log.append(ev)
            _inject(t, ev)
    return StabResult(signals, t, log, det)


def outcome_distribution(p: Pattern, input_tableau: Tableau | None = None) -> dict[tuple[int, ...], float]:
    """Exact noiseless distribution of signals, keyed in measurement order.

    Walks the outcome tree by forcing each random measurement both ways, so
    a pattern with ``r`` random measurements costs about ``2 * 2**r`` runs.
    """
    order = tuple(p.measured)
    out: dict[tuple[int, ...], float] = {}
    stack: list[dict[int, int]] = [{}]
    while stack:
        prefix = stack.pop()
        res = apply(p, forced_outcomes=prefix, seed=0, input_tableau=input_tableau)
        free = next((q for q in order if q not in prefix and not res.deterministic[q]), None)
        if free is None:
            key = tuple(res.signals[q] for q in order)
            out[key] = out.get(key, 0.0) + 0.5 ** len(prefix)
        else:
            stack += [{**prefix, free: 1}, {**prefix, free: 0}]
    return out


def sample(p: Pattern, shots: int, seed: int | None = None) -> np.ndarray:
    """``(shots, measurements)`` noiseless signal samples in measurement order."""
    dist = outcome_distribution(p)
    keys = list(dist)
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(keys), size=shots, p=np.array([dist[k] for k in keys]))
    return np.array(keys, dtype=np.uint8).reshape(len(keys), -1)[idx]


def measurement_ops(p: Pattern) -> list[tuple[int, AnglePoly]]:
    return [(c.q, c.angle) for c in p.seq if isinstance(c, Measure)]
