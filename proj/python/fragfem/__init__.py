"""Finite element solver for multidimensional fragmentation equations."""

import json
import os

from ._core import (
    Error,
    NumericalFailure,
    ParseError,
    Space,
    ValidationError,
    case_ids,
    gain_matrix,
    mass_matrix,
    selection_matrix,
    simplex_quadrature,
)

__all__ = [
    "Error",
    "NumericalFailure",
    "ParseError",
    "Space",
    "ValidationError",
    "case_ids",
    "gain_matrix",
    "mass_matrix",
    "selection_matrix",
    "simplex_quadrature",
    "run",
    "validate",
]


def run(scenario, overrides=()):
    """Run a scenario given as a file path or as scenario text; returns the report as a dict."""
    from ._core import run_scenario_json

    if isinstance(scenario, os.PathLike) or (isinstance(scenario, str) and os.path.isfile(scenario)):
        return json.loads(run_scenario_json(path=os.fspath(scenario), overrides=list(overrides)))
    return json.loads(run_scenario_json(text=scenario, overrides=list(overrides)))


def validate(flip_gain_sign=False, corrupt_gain=False, quick=True):
    """Invariant checks; the report's "ok" field tells whether all passed."""
    from ._core import validate_json

    return json.loads(validate_json(flip_gain_sign=flip_gain_sign, corrupt_gain=corrupt_gain, quick=quick))
