"""Command-line front end.

Exit codes: 0 success, 1 diagnostics reported, 2 usage error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from pmmft.dsl import DSLError, dump_pattern, parse_pattern, pattern_from_dict, pattern_to_json
from pmmft.pattern import Pattern, validate

__all__ = ["main", "load_pattern", "EXIT_OK", "EXIT_DIAGNOSTICS", "EXIT_USAGE", "EXIT_INTERNAL"]

EXIT_OK, EXIT_DIAGNOSTICS, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
FORMAT_VERSION = 1


class UsageError(Exception):
    pass


class Diagnostics(Exception):
    pass


def load_pattern(path: str | Path) -> Pattern:
    """Read a pattern from DSL text or JSON (chosen by content)."""
    path = Path(path)
    if not path.exists():
        raise UsageError(f"no such file: {path}")
    text = path.read_text()
    if text.lstrip().startswith("{"):
        return pattern_from_dict(json.loads(text))
    return parse_pattern(text)


def _load_config(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise UsageError(f"no such file: {path}")
    if path.suffix.lower() == ".toml":
        from pmmft.stab import _toml_loads

        return _toml_loads(path.read_text())
    return json.loads(path.read_text())


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _valid_or_raise(p: Pattern) -> None:
    problems = validate(p)
    if problems:
        raise Diagnostics("\n".join(str(v) for v in problems))


# -- subcommands --------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    from pmmft.pattern import is_pmm, is_standard

    p = load_pattern(args.pattern)
    problems = validate(p)
    for v in problems:
        print(v)
    if problems:
        return EXIT_DIAGNOSTICS
    print(f"ok: {len(p.V)} qubits, {len(p.seq)} commands, standard={is_standard(p)}, pmm={is_pmm(p)}")
    return EXIT_OK


def cmd_standardize(args: argparse.Namespace) -> int:
    from pmmft.pattern import is_standard
    from pmmft.rewrite import standardize, trace_to_json

    p = load_pattern(args.pattern)
    _valid_or_raise(p)
    q, steps = standardize(p, strategy=args.strategy, trace=bool(args.trace))
    if not is_standard(q) or validate(q):
        raise AssertionError("standardization produced a non-standard or invalid pattern")
    if args.trace:
        Path(args.trace).write_text(json.dumps({"format_version": FORMAT_VERSION, "steps": trace_to_json(steps)}, indent=1))
    _emit(pattern_to_json(q, indent=1) if args.emit == "json" else dump_pattern(q), args.output)
    return EXIT_OK


def cmd_graph(args: argparse.Namespace) -> int:
    from pmmft.graphio import extract_graph, rounds, to_dot
    from pmmft.rewrite import standardize

    p = load_pattern(args.pattern)
    _valid_or_raise(p)
    q, _ = standardize(p, trace=False)
    g = extract_graph(q)
    dag = rounds(q, frame_tracking=args.frame_tracking)
    if args.format == "json":
        d = g.to_dict()
        d.update(format_version=FORMAT_VERSION, rounds=dag.depth, layers=[list(layer) for layer in dag.layers])
        _emit(json.dumps(d, indent=1), args.output)
    else:
        _emit(to_dot(g) + f"// rounds: {dag.depth}\n", args.output)
    return EXIT_OK


def _input_state(p: Pattern, name: str | None) -> np.ndarray | None:
    from pmmft.dense import named_state

    if name is None:
        return None
    vec = np.ones(1, dtype=complex)
    for _ in p.inputs:
        vec = np.kron(vec, named_state(name))
    return vec


def _fmt_vec(v: np.ndarray) -> list[list[float]]:
    return [[round(float(z.real), 12), round(float(z.imag), 12)] for z in v]


def cmd_simulate(args: argparse.Namespace) -> int:
    p = load_pattern(args.pattern)
    _valid_or_raise(p)
    if args.backend == "dense":
        from pmmft.dense import canonical_phase, enumerate_branches, run

        state = _input_state(p, args.input_state)
        if args.branches:
            out = [
                {"signals": dict(zip(map(str, b.measured), b.outcomes)), "probability": b.probability, "state": _fmt_vec(canonical_phase(b.state))}
                for b in enumerate_branches(p, state)
            ]
            doc = {"format_version": FORMAT_VERSION, "branches": out}
        else:
            vec, sig = run(p, state, seed=args.seed)
            doc = {"format_version": FORMAT_VERSION, "signals": {str(k): v for k, v in sig.items()}, "state": _fmt_vec(canonical_phase(vec))}
    else:
        from pmmft.stab import apply, load_noise_model

        if args.branches:
            raise UsageError("--branches needs the dense backend")
        if args.input_state not in (None, "plus"):
            raise UsageError("the stab backend starts inputs in |+>")
        noise = load_noise_model(args.noise) if args.noise else None
        res = apply(p, noise=noise, seed=args.seed)
        stabs = [str(s) for s in res.tableau.stabilizers()]
        doc = {
            "format_version": FORMAT_VERSION,
            "signals": {str(k): v for k, v in res.signals.items()},
            "qubits": res.tableau.labels,
            "stabilizers": stabs,
            "noise": [e.to_dict() for e in res.noise_log],
        }
    _emit(json.dumps(doc, indent=1), args.output)
    return EXIT_OK


def cmd_unitary(args: argparse.Namespace) -> int:
    from pmmft.dense import NotDeterministic, canonical_phase, extract_unitary

    p = load_pattern(args.pattern)
    _valid_or_raise(p)
    try:
        u = canonical_phase(extract_unitary(p))
    except NotDeterministic as exc:
        print(f"not deterministic: {exc}")
        return EXIT_DIAGNOSTICS
    with np.printoptions(precision=6, suppress=True):
        _emit(str(u), args.output)
    return EXIT_OK


def cmd_ft(args: argparse.Namespace) -> int:
    from pmmft.ft import NotPMM, ft_transform

    p = load_pattern(args.pattern)
    _valid_or_raise(p)
    try:
        f = ft_transform(p, verify_prep=not args.no_verify_prep, teleport_every_gadget=args.teleport_every_gadget)
    except NotPMM as exc:
        print(f"not PMM: {exc}")
        return EXIT_DIAGNOSTICS
    if args.emit == "json":
        d = f.to_dict()
        _emit(json.dumps(d, indent=1), args.output)
    else:
        _emit(dump_pattern(f.pattern), args.output)
    prog = f.program
    print(
        f"ft: {len(f.pattern.V)} physical qubits, {len(f.pattern.measured)} measurements, "
        f"{len(prog.verify)} verification words, {len(prog.decode)} logical decodes",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_mc(args: argparse.Namespace) -> int:
    from pmmft.montecarlo import Experiment, run_experiment, sweep

    cfg = _load_config(args.config)
    version = cfg.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise UsageError(f"unsupported format_version {version}")
    unknown = set(cfg) - {"format_version", "experiment", "p_values", "min_failures"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    e = Experiment.from_dict(cfg.get("experiment", {}))
    if args.seed is not None:
        e = Experiment.from_dict({**e.to_dict(), "seed": args.seed})
    if "p_values" in cfg:
        res = sweep(e, cfg["p_values"], min_failures=cfg.get("min_failures", 100), jobs=args.jobs)
        text = res.to_csv() if args.format == "csv" else json.dumps(res.to_dict(), indent=1)
    else:
        r = run_experiment(e, jobs=args.jobs)
        if args.format == "csv":
            from pmmft.montecarlo import COLUMNS

            row = r.row()
            text = ",".join(COLUMNS) + "\n" + ",".join(str(row[c]) for c in COLUMNS) + "\n"
        else:
            text = json.dumps({"format_version": FORMAT_VERSION, "rows": [r.row()], "acceptance": r.acceptance}, indent=1)
    _emit(text, args.output)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pmmft", description="Compile, simulate and fault-tolerantly encode measurement patterns.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_pattern(name: str, help: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help)
        sp.add_argument("pattern", help="pattern file (DSL or JSON)")
        sp.add_argument("-o", "--output", help="write the result here instead of stdout")
        return sp

    sp = sub.add_parser("validate", help="report well-formedness diagnostics")
    sp.add_argument("pattern")
    sp.set_defaults(func=cmd_validate)

    sp = with_pattern("standardize", "rewrite into N E M C order")
    sp.add_argument("--strategy", choices=("rtl", "ltr"), default="rtl")
    sp.add_argument("--trace", help="write the rewrite trace as JSON")
    sp.add_argument("--emit", choices=("dsl", "json"), default="dsl")
    sp.set_defaults(func=cmd_standardize)

    sp = with_pattern("graph", "entanglement graph and measurement rounds")
    sp.add_argument("--format", choices=("dot", "json"), default="dot")
    sp.add_argument("--frame-tracking", action="store_true", help="count only basis-changing dependencies")
    sp.set_defaults(func=cmd_graph)

    sp = with_pattern("simulate", "run a pattern")
    sp.add_argument("--backend", choices=("dense", "stab"), default="dense")
    sp.add_argument("--branches", action="store_true", help="enumerate every outcome branch (dense)")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--input-state", default=None, help="zero, one, plus, minus, plus_pi2 or plus_pi4 on every input")
    sp.add_argument("--noise", help="noise model file (stab backend)")
    sp.set_defaults(func=cmd_simulate)

    sp = with_pattern("unitary", "print the implemented unitary")
    sp.set_defaults(func=cmd_unitary)

    sp = with_pattern("ft", "Steane fault-tolerant transform")
    sp.add_argument("--no-verify-prep", action="store_true")
    sp.add_argument("--teleport-every-gadget", action="store_true")
    sp.add_argument("--emit", choices=("json", "dsl"), default="json")
    sp.set_defaults(func=cmd_ft)

    sp = sub.add_parser("mc", help="Monte Carlo error rates from a config file")
    sp.add_argument("config", help="JSON or TOML config")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_mc)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (Diagnostics, DSLError) as exc:
        print(exc)
        return EXIT_DIAGNOSTICS
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}")
        return EXIT_DIAGNOSTICS
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
