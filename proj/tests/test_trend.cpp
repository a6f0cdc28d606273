#include <cmath>
#include <numeric>

#include "agingscope/synth.hpp"
#include "agingscope/trend.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace agingscope;
using namespace agingscope::trend;

namespace {

std::vector<double> iota_vec(std::size_t n, double start = 0, double step = 1) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = start + step * static_cast<double>(i);
  return v;
}

model::MetricSeries series_of(const std::vector<double>& x, double dt = 30) {
  return model::make_series("e", "m", iota_vec(x.size(), 0, dt), x);
}

model::MetricSeries noise(std::uint64_t seed, std::size_t n, double slope, double sigma, double phi = 0) {
  synth::SeriesSpec spec;
  spec.n = n;
  spec.slope = slope;
  spec.noise_sigma = sigma;
  spec.ar1_phi = phi;
  spec.seed = seed;
  return synth::generate_series(spec);
}

}  // namespace

TEST_SUITE("trend") {
  TEST_CASE("alpha and names") {
    CHECK(Alpha().value() == 0.05);
    CHECK_CODE(Alpha(0.0), ErrorCode::InvalidArgument);
    CHECK_CODE(Alpha(1.0), ErrorCode::InvalidArgument);
    for (auto t : {TestName::MK, TestName::MK_HamedRao, TestName::CoxStuart, TestName::TTest, TestName::SpearmanRho,
                   TestName::DurbinWatson})
      CHECK(parse_test_name(to_string(t)) == t);
    for (auto d : {Decision::Reject, Decision::FailToReject, Decision::Inconclusive})
      CHECK(parse_decision(to_string(d)) == d);
    CHECK(decide(0.01, Alpha(0.05)) == Decision::Reject);
    CHECK(decide(0.05, Alpha(0.05)) == Decision::FailToReject);
  }

  TEST_CASE("Durbin-Watson") {
    std::vector<double> alt(100);
    for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? -1.0 : 1.0;
    CHECK(durbin_watson_statistic(alt) == doctest::Approx(3.96));
    CHECK(durbin_watson_residuals(alt).decision == Decision::Reject);
    std::vector<double> same(50, 2.0);
    CHECK(durbin_watson_statistic(same) == 0.0);
    CHECK(durbin_watson_residuals(same).decision == Decision::Reject);
    CHECK_FALSE(durbin_watson_residuals(alt).p_value);

    auto b = durbin_watson_bounds(100);
    CHECK(b.lower < b.upper);
    CHECK(b.lower == doctest::Approx(1.65).epsilon(0.01));
    CHECK(durbin_watson_bounds(1000).lower == durbin_watson_bounds(200).lower);
    CHECK_CODE(durbin_watson_bounds(5), ErrorCode::TooShort);

    double mean = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) mean += durbin_watson(noise(seed + 1, 720, 0, 1)).statistic;
    CHECK(std::abs(mean / 1000 - 2.0) <= 0.05);
  }

  TEST_CASE("Mann-Kendall S") {
    CHECK(mann_kendall_s(iota_vec(10)) == 45);
    CHECK(mann_kendall_s(std::vector<double>{3, 1, 2, 5, 4}) == 4);
    auto flat = mann_kendall_stats(std::vector<double>(12, 1.0));
    CHECK(flat.s == 0);
    CHECK(flat.p_value == 1.0);
    CHECK(mann_kendall_variance(iota_vec(10)) == doctest::Approx(10 * 9 * 25 / 18.0));
    CHECK_CODE(mann_kendall_stats(std::vector<double>{1, 2, 3}), ErrorCode::TooShort);
  }

  TEST_CASE("Mann-Kendall exact null") {
    CHECK(mann_kendall_exact_p(0, 4) == doctest::Approx(1.0));
    CHECK(mann_kendall_exact_p(6, 4) == doctest::Approx(2.0 / 24));
    auto st = mann_kendall_stats(iota_vec(10));
    CHECK(st.exact);
    CHECK(st.p_value == doctest::Approx(2.0 / 3628800));
    auto big = mann_kendall_stats(iota_vec(11));
    CHECK_FALSE(big.exact);
  }

  TEST_CASE("oracle agreement on small random series") {
    synth::Rng rng(99);
    for (int rep = 0; rep < 200; ++rep) {
      const std::size_t n = 4 + rep % 9;
      std::vector<double> x(n), t(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::round(rng.uniform() * (rep % 2 ? 4 : 1000));
        t[i] = static_cast<double>(i) * 30 + std::round(rng.uniform() * 10);
      }
      CHECK(mann_kendall_s(x) == oracle::mk_s(x));
      CHECK(mann_kendall_variance(x) == doctest::Approx(oracle::mk_var_s(x)).epsilon(1e-9));
      CHECK(sen_slope(t, x).slope == doctest::Approx(oracle::sen_slope(t, x)).epsilon(1e-12));
      if (n >= 6) {
        bool tied = true;
        for (std::size_t i = 0; i < n / 2; ++i) tied &= x[i] == x[i + n - n / 2];
        if (!tied) CHECK(cox_stuart_stats(x).p_value == doctest::Approx(oracle::cox_stuart_p(x)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("Hamed-Rao") {
    auto s = noise(7, 200, 0, 1);
    auto plain = mann_kendall_stats(s.values());
    auto hr = mann_kendall_hamed_rao_stats(s.times(), s.values());
    CHECK(hr.s == plain.s);
    if (hr.variance_factor == 1.0) CHECK(hr.p_value == plain.p_value);
    CHECK(hr.variance_factor >= 1.0 / 200);

    auto ar = noise(11, 720, 0, 1, 0.8);
    CHECK(mann_kendall_hamed_rao_stats(ar.times(), ar.values()).variance_factor > 1.0);

    auto line = series_of(iota_vec(30));
    CHECK(mann_kendall(line).decision == Decision::Reject);
    CHECK(mann_kendall_hamed_rao(line).decision == Decision::Reject);
    CHECK_CODE(mann_kendall_hamed_rao_stats(iota_vec(9), iota_vec(9)), ErrorCode::TooShort);
  }

  TEST_CASE("Hamed-Rao keeps the false-positive rate near nominal") {
    int plain = 0, corrected = 0;
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
      auto s = noise(seed * 7919, 720, 0, 1, 0.8);
      plain += mann_kendall(s).decision == Decision::Reject;
      corrected += mann_kendall_hamed_rao(s).decision == Decision::Reject;
    }
    CHECK(plain > 150);
    CHECK(corrected <= 100);
  }

  TEST_CASE("Hamed-Rao at phi 0.6") {
    int plain = 0, corrected = 0;
    for (std::uint64_t seed = 1; seed <= 300; ++seed) {
      auto s = noise(seed * 104729, 720, 0, 1, 0.6);
      plain += mann_kendall(s).decision == Decision::Reject;
      corrected += mann_kendall_hamed_rao(s).decision == Decision::Reject;
    }
    CHECK(plain > 75);
    CHECK(corrected * 2 < plain);
    CHECK(corrected <= 30);
  }

  TEST_CASE("Cox-Stuart") {
    auto st = cox_stuart_stats(iota_vec(20));
    CHECK(st.pairs == 10);
    CHECK(st.positive == 10);
    CHECK(st.p_value == doctest::Approx(2 * std::pow(0.5, 10)));
    CHECK(cox_stuart_stats(std::vector<double>{1, 2, 3, 100, 4, 5, 6}).pairs == 3);
    CHECK_CODE(cox_stuart_stats(std::vector<double>(8, 3.0)), ErrorCode::AllTied);
  }

  TEST_CASE("regression t-test") {
    auto r = t_test_trend_stats(std::vector<double>{0, 1, 2, 3}, std::vector<double>{1, 2, 2, 3});
    CHECK(r.slope == doctest::Approx(0.6));
    CHECK(r.intercept == doctest::Approx(1.1));
    auto perfect = t_test_trend_stats(iota_vec(10), iota_vec(10, 1, 2));
    CHECK(perfect.p_value == 0.0);
    auto flat = t_test_trend(series_of(std::vector<double>(10, 4.0)));
    CHECK(flat.statistic == 0.0);
    CHECK(flat.decision == Decision::FailToReject);
  }

  TEST_CASE("Spearman rho") {
    const auto t = iota_vec(5, 1);
    CHECK(spearman_rho(t, iota_vec(5)) == doctest::Approx(1.0));
    CHECK(spearman_rho(t, iota_vec(5, 5, -1)) == doctest::Approx(-1.0));
    CHECK(spearman_rho(t, std::vector<double>{1, 3, 2, 5, 4}) == doctest::Approx(0.8));
    CHECK(spearman_p_value(1.0, 5) == 0.0);
    CHECK(mid_ranks(std::vector<double>{5, 1, 5, 2}) == std::vector<double>{3.5, 1, 3.5, 2});
    CHECK_CODE(spearman_rho(t, std::vector<double>(5, 1.0)), ErrorCode::AllTied);
  }

  TEST_CASE("Sen slope") {
    auto exact = sen_slope(iota_vec(10), iota_vec(10, 0, 2));
    CHECK(exact.slope == 2);
    CHECK(exact.ci_low == 2);
    CHECK(exact.ci_high == 2);
    CHECK(sen_slope(std::vector<double>{0, 1, 2}, std::vector<double>{1, 2, 10}).slope == 4.5);
    CHECK(sen_slope(iota_vec(10), std::vector<double>(10, 3.0)).slope == 0.0);
    auto s = noise(5, 200, 0.01, 1);
    auto ss = sen_slope(s);
    CHECK(ss.ci_low <= ss.slope);
    CHECK(ss.slope <= ss.ci_high);
  }

  TEST_CASE("battery") {
    auto flat = detect_trend(series_of(std::vector<double>(40, 5.0)));
    CHECK_FALSE(flat.declared);
    CHECK(flat.slope == 0.0);

    auto line = detect_trend(series_of(iota_vec(40, 100, 3)));
    CHECK(line.declared);
    CHECK(line.increasing());
    CHECK(line.slope == doctest::Approx(0.1));
    REQUIRE(line.tests.size() == 5);
    CHECK(line.find(TestName::DurbinWatson));
    CHECK(line.find(TestName::CoxStuart));

    CHECK_CODE(detect_trend(series_of(iota_vec(9))), ErrorCode::TooShort);
  }

  TEST_CASE("battery power and coverage") {
    int declared = 0, covered = 0;
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
      auto v = detect_trend(noise(seed, 720, 0.01, 50));
      declared += v.declared;
      covered += v.ci_low <= 0.01 && 0.01 <= v.ci_high;
    }
    CHECK(declared >= 950);
    CHECK(covered >= 930);
  }

  TEST_CASE("autocorrelated noise routes to the modified test") {
    int modified = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed)
      modified += detect_trend(noise(seed, 720, 0, 1, 0.6)).route == AutocorrRoute::ModifiedMK;
    CHECK(modified >= 190);
  }

  TEST_CASE("declaration implies the confirmation rule") {
    for (std::uint64_t seed = 1; seed <= 300; ++seed) {
      auto v = detect_trend(noise(seed, 100, seed % 3 ? 0.002 : 0, 1, seed % 2 ? 0.5 : 0));
      const auto* mk = v.find(v.route == AutocorrRoute::PlainMK ? TestName::MK : TestName::MK_HamedRao);
      REQUIRE(mk);
      int confirmations = 0;
      for (auto t : {TestName::CoxStuart, TestName::TTest, TestName::SpearmanRho})
        confirmations += v.find(t)->decision == Decision::Reject;
      CHECK(v.declared == (mk->decision == Decision::Reject && confirmations >= 2));
      CHECK(v.ci_low <= v.slope);
      CHECK(v.slope <= v.ci_high);
    }
  }

  TEST_CASE("invariance under shift and positive scaling") {
    auto s = noise(42, 120, 0.003, 1);
    auto v = detect_trend(s);
    auto shifted = s;
    for (auto& p : shifted.samples) p.value = 3 * p.value + 1000;
    auto w = detect_trend(shifted);
    CHECK(v.declared == w.declared);
    CHECK(w.slope == doctest::Approx(3 * v.slope));
    CHECK(v.route == w.route);
    CHECK(v.tests[1].statistic == w.tests[1].statistic);
  }
}
