"""Cumulative-logit models with Bridge-distributed random effects."""

from ._core import (
    IoError,
    ValidationError,
    bridge_cdf,
    bridge_log_pdf,
    bridge_quantile,
    bridge_sample,
    bridge_variance,
    category_probs,
    criteria,
    effect_interpretation,
    logistic,
    marginalize,
    modified_bridge_log_pdf,
    modified_bridge_variance,
    run_cli,
)

__all__ = [
    "IoError",
    "ValidationError",
    "bridge_cdf",
    "bridge_log_pdf",
    "bridge_quantile",
    "bridge_sample",
    "bridge_variance",
    "category_probs",
    "criteria",
    "effect_interpretation",
    "logistic",
    "marginalize",
    "modified_bridge_log_pdf",
    "modified_bridge_variance",
    "run_cli",
]
