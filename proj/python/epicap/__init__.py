"""Epidemic risk pipeline: distribution fitting, rate surfaces and
parametric contract pricing on top of the C++ core."""

import importlib
import os
import sys

try:
    from . import _core
except ImportError:
    # Out-of-tree runs (ctest, editable checkouts) point at the build
    # directory instead of a packaged extension.
    _dir = os.environ.get("EPICAP_CORE_DIR")
    if not _dir:
        raise
    if _dir not in sys.path:
        sys.path.insert(0, _dir)
    _core = importlib.import_module("_core")

EpicapError = _core.EpicapError

families = _core.families
param_names = _core.param_names
pdf = _core.pdf
cdf = _core.cdf
quantile = _core.quantile
sample = _core.sample
fit_mle = _core.fit_mle
ks_statistic = _core.ks_statistic
rank_candidates = _core.rank_candidates
rate_surface = _core.rate_surface
payout = _core.payout
expected_payout = _core.expected_payout
expected_shortfall = _core.expected_shortfall
run_pipeline = _core.run_pipeline
check_schemas = _core.check_schemas

__all__ = [
    "EpicapError",
    "families",
    "param_names",
    "pdf",
    "cdf",
    "quantile",
    "sample",
    "fit_mle",
    "ks_statistic",
    "rank_candidates",
    "rate_surface",
    "payout",
    "expected_payout",
    "expected_shortfall",
    "run_pipeline",
    "check_schemas",
]
