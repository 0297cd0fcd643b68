"""Measurement patterns in the Pauli measurement model, with Steane-code fault tolerance.

Modules: :mod:`pmmft.pattern` and :mod:`pmmft.dsl` (pattern core),
:mod:`pmmft.rewrite` (standardization), :mod:`pmmft.graphio` (graphs and
rounds), :mod:`pmmft.dense` and :mod:`pmmft.stab` (simulators),
:mod:`pmmft.frames`, :mod:`pmmft.steane` and :mod:`pmmft.ft` (fault
tolerance), :mod:`pmmft.montecarlo` and :mod:`pmmft.cli`.
"""

from __future__ import annotations

from pmmft.angles import PI, ZERO, Angle, AnglePoly, Condition
from pmmft.dsl import dump_pattern, parse_pattern, pattern_from_json, pattern_to_json
from pmmft.pattern import (
    CorrectX,
    CorrectZ,
    Entangle,
    Measure,
    Pattern,
    Prepare,
    build_named,
    compose_parallel,
    compose_serial,
    is_pmm,
    is_standard,
    validate,
)
from pmmft.rewrite import standardize

__version__ = "0.1.0"

__all__ = [
    "Angle",
    "AnglePoly",
    "Condition",
    "PI",
    "ZERO",
    "Pattern",
    "Prepare",
    "Entangle",
    "Measure",
    "CorrectX",
    "CorrectZ",
    "build_named",
    "compose_serial",
    "compose_parallel",
    "validate",
    "is_pmm",
    "is_standard",
    "standardize",
    "parse_pattern",
    "dump_pattern",
    "pattern_to_json",
    "pattern_from_json",
]
