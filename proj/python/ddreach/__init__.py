"""Python bindings for the ddreach reachability library."""

import json

from ._core import (
    ConstrainedZonotope,
    InfoState,
    NumericalError,
    RankDeficientError,
    Zonotope,
    cartesian_product,
    discretize,
    halfspace_intersection,
    linear_map,
    minkowski_sum,
    model_set_proxy,
    pinv_right_inverse,
    row_norm_dual_bound,
    row_norm_right_inverse,
    selftest,
)
from . import _core


def default_config(kind="lti"):
    return json.loads(_core.default_config(kind))


def run_experiment(config):
    """Run an LTI or PWA experiment from a config dict; returns (report, timings)."""
    report, timings = _core.run_experiment(json.dumps(config))
    return json.loads(report), json.loads(timings)


__all__ = [
    "ConstrainedZonotope",
    "InfoState",
    "NumericalError",
    "RankDeficientError",
    "Zonotope",
    "cartesian_product",
    "default_config",
    "discretize",
    "halfspace_intersection",
    "linear_map",
    "minkowski_sum",
    "model_set_proxy",
    "pinv_right_inverse",
    "row_norm_dual_bound",
    "row_norm_right_inverse",
    "run_experiment",
    "selftest",
]
