"""(kappa, mu) contact metric analysis.

The analyze functions return the parsed JSON report as a dict.
"""

import json

from ._kmu import (
    DEFAULT_TOLERANCE,
    REPORT_VERSION,
    KmuError,
    closed_form_invariants,
    evaluate,
    fixture_names,
    jet2,
    parse_expression,
)
from . import _kmu

__all__ = [
    "DEFAULT_TOLERANCE",
    "REPORT_VERSION",
    "KmuError",
    "analyze_fixture",
    "analyze_kmu",
    "analyze_model",
    "closed_form_invariants",
    "evaluate",
    "fixture",
    "fixture_names",
    "jet2",
    "kmu_model",
    "parse_expression",
    "report_text",
]


def fixture(name, seed=42):
    """Model document of a bundled fixture."""
    return json.loads(_kmu.fixture_json(name, seed))


def kmu_model(kappa, mu):
    """Model document of the generator model for (kappa, mu)."""
    return json.loads(_kmu.kmu_model_json(kappa, mu))


def analyze_fixture(name, tolerance=DEFAULT_TOLERANCE, seed=42, deform=()):
    return json.loads(_kmu.analyze_fixture(name, tolerance, seed, list(deform)))


def analyze_kmu(kappa, mu, tolerance=DEFAULT_TOLERANCE, deform=()):
    return json.loads(_kmu.analyze_kmu(kappa, mu, tolerance, list(deform)))


def analyze_model(model, tolerance=DEFAULT_TOLERANCE, deform=()):
    """Analyze a model given as a dict, a JSON string, or a path to a model file."""
    if isinstance(model, dict):
        text = json.dumps(model)
    elif hasattr(model, "read_text"):
        text = model.read_text()
    elif isinstance(model, str) and model.lstrip().startswith("{"):
        text = model
    else:
        with open(model, encoding="utf-8") as f:
            text = f.read()
    return json.loads(_kmu.analyze_model_json(text, tolerance, list(deform)))


def report_text(report):
    """Human-readable rendering of a report dict."""
    return _kmu.report_text(json.dumps(report))
