"""Python access to the ideval clustering evaluation core."""

import json

from . import _ideval
from ._ideval import IdevalError, figure_sources, figures, format_percent, run_cli

__all__ = [
    "IdevalError",
    "evaluate",
    "evaluate_materialized",
    "figure_sources",
    "figures",
    "format_percent",
    "run_cli",
    "sample_pairs",
    "transform",
]


def evaluate(config_path, per_element=False):
    """Metrics report for a run configuration, as a dict."""
    return json.loads(_ideval.evaluate_config(str(config_path), per_element))


def evaluate_materialized(directory, per_element=False):
    """Metrics report for the output of transform()."""
    return json.loads(_ideval.evaluate_materialized(str(directory), per_element))


def sample_pairs(config_path, n, seed=1):
    """Sampled pairs as TSV text in the pair file format."""
    return _ideval.sample_pairs(str(config_path), n, seed)


def transform(config_path, out_dir):
    """Writes the expanded clusterings and weights; returns a summary dict."""
    return _ideval.transform(str(config_path), str(out_dir))
