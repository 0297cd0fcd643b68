"""Logical error rates of bare and fault-tolerant patterns under Pauli noise.

Trials run in fixed-size batches; batch ``b`` draws from
``np.random.default_rng([seed, b])`` so results do not depend on how batches
are spread over worker processes. Stopping rules are checked in batch order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.stats import binomtest

from pmmft.dsl import pattern_from_dict, pattern_to_dict
from pmmft.pattern import Measure, Pattern, Prepare
from pmmft.stab import NoiseModel

__all__ = [
    "Experiment",
    "RateEstimate",
    "SweepResult",
    "InsufficientFailures",
    "builtin_pattern",
    "run_experiment",
    "sweep",
    "fit_slope",
    "require_slope",
    "BUILTIN_PATTERNS",
]

FORMAT_VERSION = 1
COLUMNS = ("p_prep", "p_ent", "p_meas", "trials", "accepted", "failures", "rate", "ci_lo", "ci_hi")


class InsufficientFailures(ValueError):
    pass


def _wire() -> Pattern:
    return Pattern([Prepare(1), Measure(1)], (), ())


def _j0_twice() -> Pattern:
    from pmmft.pattern import build_named, compose_serial

    j0 = build_named("J", 0)
    body = compose_serial(j0, j0)
    (a,), (b,) = body.inputs, body.outputs
    return Pattern([Prepare(a), *body.seq, Measure(b)], (), ())


BUILTIN_PATTERNS = {"wire": _wire, "j0j0": _j0_twice}


def builtin_pattern(name: str) -> Pattern:
    """Closed test patterns: ``wire`` is ``M N``; ``j0j0`` sends ``|+>`` through two ``J_0``."""
    try:
        return BUILTIN_PATTERNS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin pattern {name!r}; choose from {sorted(BUILTIN_PATTERNS)}") from None


@dataclass(frozen=True)
class Experiment:
    """Everything needed to reproduce a rate estimate.

    ``pattern`` is a builtin name or a serialized pattern dict. With ``ft``
    the pattern is run through the fault-tolerant transform first.
    ``postselect`` is ``"reject"`` (drop trials with a dirty verification
    syndrome) or ``"accept"`` (keep every trial).
    """

    pattern: str | Mapping[str, Any] = "wire"
    noise: NoiseModel = field(default_factory=NoiseModel)
    trials: int = 10_000
    seed: int = 0
    postselect: str = "reject"
    ft: bool = False
    verify_prep: bool = False
    batch_size: int = 50_000
    min_accepted: int = 0
    min_failures: int = 0
    max_trials: int | None = None

    def __post_init__(self) -> None:
        if self.postselect not in ("reject", "accept"):
            raise ValueError("postselect must be 'reject' or 'accept'")
        if self.trials < 0 or self.batch_size <= 0:
            raise ValueError("trials must be >= 0 and batch_size > 0")

    def build(self) -> Pattern:
        if isinstance(self.pattern, str):
            return builtin_pattern(self.pattern)
        return pattern_from_dict(self.pattern)

    def with_p(self, p: float) -> Experiment:
        n = self.noise
        return replace(self, noise=NoiseModel(p, p, p, n.p_idle, n.seed))

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["noise"] = self.noise.to_dict()
        d["pattern"] = self.pattern if isinstance(self.pattern, str) else dict(self.pattern)
        d["format_version"] = FORMAT_VERSION
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> Experiment:
        d = dict(d)
        version = d.pop("format_version", FORMAT_VERSION)
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported format_version {version}")
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown experiment fields: {sorted(unknown)}")
        if "noise" in d:
            d["noise"] = NoiseModel.from_dict(d["noise"])
        if isinstance(d.get("pattern"), Pattern):
            d["pattern"] = pattern_to_dict(d["pattern"])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> Experiment:
        return cls.from_dict(json.loads(text))


def _wilson(k: int, n: int) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    ci = binomtest(k, n).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class RateEstimate:
    noise: NoiseModel
    trials: int
    accepted: int
    failures: int

    @property
    def rate(self) -> float:
        return self.failures / self.accepted if self.accepted else 0.0

    @property
    def interval(self) -> tuple[float, float]:
        return _wilson(self.failures, self.accepted)

    @property
    def acceptance(self) -> float:
        return self.accepted / self.trials if self.trials else 1.0

    def row(self) -> dict[str, Any]:
        lo, hi = self.interval
        n = self.noise
        return {
            "p_prep": n.p_prep,
            "p_ent": n.p_ent,
            "p_meas": n.p_meas,
            "trials": self.trials,
            "accepted": self.accepted,
            "failures": self.failures,
            "rate": self.rate,
            "ci_lo": lo,
            "ci_hi": hi,
        }


class _Runner:
    """Per-process simulator state for one experiment."""

    def __init__(self, e: Experiment) -> None:
        from pmmft.framesim import FrameSimulator

        self.e = e
        p = e.build()
        self.ftp = None
        if e.ft:
            from pmmft.ft import ft_transform

            if p.outputs:
                raise ValueError("fault-tolerant experiments need a closed pattern; measure the outputs")
            self.ftp = ft_transform(p, verify_prep=e.verify_prep)
            p = self.ftp.pattern
        self.sim = FrameSimulator(p)
        self.p = p
        acc, sig, out = self._observe(self.sim.sample(256, None, np.random.default_rng(0)))
        # reference: observables that are deterministic without noise
        self.reference = {q: int(v[0]) for q, v in sig.items() if (v == v[0]).all()}

    def _observe(self, sample) -> tuple[np.ndarray, dict[int, np.ndarray], np.ndarray]:
        n = sample.signals.shape[0]
        if self.ftp is not None:
            acc, logical = self.ftp.evaluate(sample.signal_dict())
            out = np.zeros(n, dtype=bool)
        else:
            acc, logical = np.ones(n, dtype=bool), sample.signal_dict()
            out = (sample.x | sample.z).any(axis=1) if sample.x.size else np.zeros(n, dtype=bool)
        if self.e.postselect == "accept":
            acc = np.ones(n, dtype=bool)
        return acc, logical, out

    def batch(self, index: int, size: int) -> tuple[int, int, int]:
        rng = np.random.default_rng([self.e.seed, index])
        acc, sig, out = self._observe(self.sim.sample(size, self.e.noise, rng))
        fail = out.copy()
        for q, v in self.reference.items():
            fail |= sig[q] != v
        return size, int(acc.sum()), int((fail & acc).sum())


_WORKER: _Runner | None = None


def _init_worker(payload: str) -> None:
    global _WORKER
    _WORKER = _Runner(Experiment.from_json(payload))


def _work(args: tuple[int, int]) -> tuple[int, int, int]:
    assert _WORKER is not None
    return _WORKER.batch(*args)


def _sizes(e: Experiment):
    if e.max_trials is not None:
        cap = e.max_trials
    elif e.min_accepted or e.min_failures:
        cap = 10**12
    else:
        cap = e.trials
    done, b = 0, 0
    while done < cap:
        size = min(e.batch_size, cap - done)
        yield b, size
        done += size
        b += 1


def run_experiment(e: Experiment, jobs: int = 1) -> RateEstimate:
    """Sample until ``trials`` (and the optional minimums) are reached.

    A trial fails if any noiseless-deterministic (logical) signal differs
    from its reference value or, for bare patterns, if a Pauli error is left
    on the outputs. Rejected trials count in ``trials`` only.
    """
    runner = _Runner(e)
    trials = accepted = failures = 0

    def done() -> bool:
        return trials >= e.trials and accepted >= e.min_accepted and failures >= e.min_failures

    sizes = _sizes(e)
    if jobs <= 1:
        for b, size in sizes:
            if done():
                break
            t, a, f = runner.batch(b, size)
            trials, accepted, failures = trials + t, accepted + a, failures + f
        return RateEstimate(e.noise, trials, accepted, failures)
    with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(e.to_json(),)) as pool:
        while not done():
            chunk = [s for _, s in zip(range(jobs), sizes)]
            if not chunk:
                break
            for t, a, f in pool.map(_work, chunk):
                if done():
                    break
                trials, accepted, failures = trials + t, accepted + a, failures + f
    return RateEstimate(e.noise, trials, accepted, failures)


def fit_slope(points: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of ``log rate`` against ``log p``."""
    if len(points) < 2:
        raise InsufficientFailures("need at least two points to fit a slope")
    x = np.log([p for p, _ in points])
    y = np.log([r for _, r in points])
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class SweepResult:
    estimates: tuple[RateEstimate, ...]
    slope: float | None
    used: tuple[float, ...]
    flagged: tuple[float, ...]

    def rows(self) -> list[dict[str, Any]]:
        return [e.row() for e in self.estimates]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows())
        slope = "nan" if self.slope is None else f"{self.slope:.4f}"
        buf.write(f"# slope {slope} over p={list(self.used)} flagged={list(self.flagged)}\n")
        return buf.getvalue()

    def to_dict(self) -> dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "columns": list(COLUMNS),
            "rows": self.rows(),
            "slope": self.slope,
            "used": list(self.used),
            "flagged": list(self.flagged),
        }


def sweep(e: Experiment, p_values: Sequence[float], min_failures: int = 100, jobs: int = 1) -> SweepResult:
    """Rates at ``p_prep = p_ent = p_meas = p`` plus a log-log slope.

    Points with fewer than ``min_failures`` failures are flagged and left
    out of the fit; the slope is ``None`` if fewer than two points remain.
    """
    if not len(p_values):
        raise ValueError("p_values must not be empty")
    ests = tuple(run_experiment(e.with_p(p), jobs=jobs) for p in p_values)
    used = tuple(p for p, r in zip(p_values, ests) if r.failures >= min_failures and r.failures > 0)
    flagged = tuple(p for p in p_values if p not in used)
    slope = None
    if len(used) >= 2:
        slope = fit_slope([(p, r.rate) for p, r in zip(p_values, ests) if p in used])
    return SweepResult(ests, slope, used, flagged)


def require_slope(result: SweepResult) -> float:
    if result.slope is None or not math.isfinite(result.slope):
        raise InsufficientFailures(f"too few points with enough failures; flagged {list(result.flagged)}")
    return result.slope
