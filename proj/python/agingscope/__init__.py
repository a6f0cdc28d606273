"""Python access to the agingscope trend and aging analyses."""

from ._core import (
    AgingscopeError,
    GroupComparison,
    MannKendall,
    SenSlope,
    TrendVerdict,
    compare_groups,
    detect_trend,
    generate_series,
    mann_kendall,
    mann_kendall_hamed_rao,
    parse_displayed_line,
    parse_gc_line,
    project_degradation,
    rejuvenation_gain,
    route_test,
    sen_slope,
    spearman_correlation,
)

__all__ = [
    "AgingscopeError",
    "GroupComparison",
    "MannKendall",
    "SenSlope",
    "TrendVerdict",
    "compare_groups",
    "detect_trend",
    "generate_series",
    "mann_kendall",
    "mann_kendall_hamed_rao",
    "parse_displayed_line",
    "parse_gc_line",
    "project_degradation",
    "rejuvenation_gain",
    "route_test",
    "sen_slope",
    "spearman_correlation",
]
