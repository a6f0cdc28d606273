import math

import pytest

import agingscope as ag

GC_LINE = (
    "Explicit concurrent mark sweep GC freed 104710(7MB) AllocSpace objects, "
    "21(416KB) LOS objects, 33% free, 25MB/38MB, paused 1.230ms total 67.216ms"
)


def test_displayed_line():
    e = ag.parse_displayed_line(
        "I/ActivityManager(1097): Displayed com.example.myapp/.MainActivity: +100ms", 3.0
    )
    assert e == {"t": 3.0, "activity": "com.example.myapp/.MainActivity", "launch_time_ms": 100.0}
    assert ag.parse_displayed_line("I/ActivityManager(1097): Start proc 1234") is None


def test_gc_line():
    g = ag.parse_gc_line(GC_LINE, process="system")
    assert g["cause"] == "explicit"
    assert g["pause_ms"] == [1.23]
    assert g["total_ms"] == pytest.approx(67.216)
    assert g["los_bytes"] == 416 * 1024


def test_mann_kendall_and_sen():
    mk = ag.mann_kendall([1, 2, 3, 4, 5])
    assert mk.s == 10
    assert mk.exact
    sen = ag.sen_slope([0, 1, 2, 3], [1, 3, 5, 7])
    assert sen.slope == pytest.approx(2.0)
    assert sen.ci_low <= sen.slope <= sen.ci_high


def test_detect_trend_on_synthetic_series():
    t, x = ag.generate_series(720, dt=30, slope=380 / 21600, intercept=600, noise_sigma=100, seed=4)
    v = ag.detect_trend(t, x)
    assert v.declared
    assert v.ci_low <= 380 / 21600 <= v.ci_high
    assert v.tests[0]["name"] == "DurbinWatson"
    assert v.tests[0]["p_value"] is None

    t, x = ag.generate_series(720, noise_sigma=1, ar1_phi=0.6, seed=9)
    assert ag.detect_trend(t, x).route == "modified_MK"
    assert ag.mann_kendall_hamed_rao(x, t).variance_factor > 1


def test_group_routing():
    assert ag.route_test(0.2, 0.3) == "FISHER"
    assert ag.route_test(0.2, 0.01) == "WELCH"
    assert ag.route_test(0.01, 0.9) == "KW"
    c = ag.compare_groups({"a": [1.0, 2.0, 3.0, 2.5], "b": [7.0, 8.0, 9.0, 8.5]}, factor="APP")
    assert c.test in {"FISHER", "WELCH", "KW"}
    assert c.significant
    rho, p = ag.spearman_correlation([1, 2, 3, 4, 5], [1, 3, 2, 5, 4])
    assert rho == pytest.approx(0.8)
    assert 0 <= p <= 1


def test_aging_projection():
    lt, ttaf_h = ag.project_degradation(237.575 / 21600)
    assert lt == pytest.approx(237.575)
    assert ttaf_h == pytest.approx(5.051, rel=5e-4)
    assert math.isinf(ag.project_degradation(0.0)[1])
    g_lt, g_ttaf = ag.rejuvenation_gain(167.181, 7.178, 29.303, 9.507)
    assert round(g_lt) == 82
    assert round(g_ttaf) == 32


def test_errors_carry_codes():
    with pytest.raises(ag.AgingscopeError) as info:
        ag.mann_kendall([1, 2])
    assert info.value.code == "TooShort"
    with pytest.raises(ag.AgingscopeError):
        ag.rejuvenation_gain(0, 1, 1, 1)
