#include <doctest.h>

#include <cmath>

#include "cirisk/errors.hpp"
#include "cirisk/interval_family.hpp"

using namespace cirisk;

namespace {

constexpr double kT5 = 2.570581835636;              // t critical, m = 5, alpha = .05
constexpr double kNaiveS = 1.8357626198909036;      // kT5 * sqrt(1 - 0.49)

}  // namespace

TEST_CASE("usual interval is the empty-segment member") {
  const BSFunctions bs = usual_interval(5, 0.05);
  CHECK(std::abs(bs.t_m() - kT5) < 1e-9);
  CHECK(std::abs(bs.d() - kT5) < 1e-9);
  CHECK(bs.segments().empty());
  for (double x : {-5.0, -1.0, 0.0, 0.3, 2.0, 100.0}) {
    CHECK(bs.b(x) == 0.0);
    CHECK(bs.s(x) == bs.t_m());
  }
  CHECK(validate_f_d(bs).empty());
  const LengthComparison cmp = pointwise_length_compare(bs);
  CHECK(cmp.never_longer);
  CHECK(!cmp.strictly_shorter_somewhere);
}

TEST_CASE("pre-test member has the expected shape") {
  const double rho = 0.7;
  const BSFunctions bs = naive_pretest(kT5, rho, 5, 0.05);
  CHECK(std::abs(bs.d() - kT5) < 1e-9);

  SUBCASE("values inside and outside the acceptance region") {
    CHECK(std::abs(bs.b(1.0) - rho) < 1e-12);
    CHECK(std::abs(bs.b(2.0) - 2.0 * rho) < 1e-12);
    CHECK(std::abs(bs.s(1.0) - kNaiveS) < 1e-9);
    CHECK(std::abs(bs.s(-1.7) - kNaiveS) < 1e-9);  // s sees |x|
    CHECK(bs.b(0.0) == 0.0);
    CHECK(bs.b(kT5 + 0.5) == 0.0);
    CHECK(bs.s(kT5 + 0.5) == bs.t_m());
    CHECK(bs.b(-1.0) == -bs.b(1.0));  // odd extension
  }
  SUBCASE("exactly one jump, at the cutoff") {
    REQUIRE(bs.discontinuities().size() == 1);
    CHECK(std::abs(bs.discontinuities()[0] - kT5) < 1e-9);
  }
  SUBCASE("class membership and pointwise length") {
    CHECK(validate_f_d(bs).empty());
    const LengthComparison cmp = pointwise_length_compare(bs);
    CHECK(cmp.never_longer);
    CHECK(cmp.strictly_shorter_somewhere);
    CHECK(std::abs(cmp.max_saving - (kT5 - kNaiveS)) < 1e-9);
  }
  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(naive_pretest(0.0, rho, 5, 0.05), InputError);
    CHECK_THROWS_AS(naive_pretest(1.0, 1.0, 5, 0.05), InputError);
    CHECK_THROWS_AS(naive_pretest(1.0, -1.2, 5, 0.05), InputError);
  }
}

TEST_CASE("smooth mixture interpolates and hands off continuously") {
  const double rho = 0.7, q = kT5;
  const BSFunctions bs =
      smooth_mixture(smoothstep_weight(q), q, rho, 5, 0.05, 32);
  CHECK(validate_f_d(bs).empty());
  CHECK(bs.discontinuities().empty());  // weight reaching 1 removes all jumps
  CHECK(bs.b(0.0) == 0.0);
  CHECK(std::abs(bs.s(0.0) - kNaiveS) < 1e-9);      // h(0) = 0: pre-test width
  CHECK(std::abs(bs.s(q - 1e-9) - kT5) < 1e-6);     // h(q) = 1: usual width
  CHECK(bs.b(q + 0.1) == 0.0);
  // between the endpoints the width lies between the two extremes
  for (double x : {0.3, 1.0, 2.0}) {
    CHECK(bs.s(x) >= kNaiveS - 1e-12);
    CHECK(bs.s(x) <= kT5 + 1e-12);
  }
  // a weight that never reaches 1 would leave the class: rejected
  CHECK_THROWS_AS(
      smooth_mixture([](double) { return 0.5; }, q, rho, 5, 0.05, 8),
      InputError);
  CHECK_THROWS_AS(
      smooth_mixture([](double) { return 2.0; }, q, rho, 5, 0.05, 8),
      InputError);
}

TEST_CASE("constructor enforces the segment tiling") {
  std::vector<BSSegment> segs(1);
  segs[0] = {0.5, 1.0, SegmentMode::step, 0, 0, 2.0, 2.0};  // gap at 0
  CHECK_THROWS_AS(BSFunctions(2.0, 2.5, segs), InputError);

  segs[0] = {0.0, 0.0, SegmentMode::step, 0, 0, 2.0, 2.0};  // empty piece
  CHECK_THROWS_AS(BSFunctions(2.0, 2.5, segs), InputError);

  segs[0] = {0.0, 1.0, SegmentMode::step, 0, 0, std::nan(""), 2.0};
  CHECK_THROWS_AS(BSFunctions(2.0, 2.5, segs), InputError);

  CHECK_THROWS_AS(BSFunctions(-1.0, 2.5, {}), InputError);
  CHECK_THROWS_AS(BSFunctions(2.0, 0.0, {}), InputError);

  std::vector<BSSegment> two(2);
  two[0] = {0.0, 1.0, SegmentMode::step, 0.0, 0.0, 2.0, 2.0};
  two[1] = {1.5, 2.0, SegmentMode::step, 0.0, 0.0, 2.0, 2.0};  // gap at 1
  CHECK_THROWS_AS(BSFunctions(2.0, 2.5, two), InputError);
}

TEST_CASE("class violations are named") {
  const double t = 2.5;

  SUBCASE("nonpositive half-width") {
    std::vector<BSSegment> segs(1);
    segs[0] = {0.0, 1.0, SegmentMode::linear, 0.0, 0.0, 1.0, 0.0};
    const BSFunctions bs(2.0, t, segs);
    const auto v = validate_f_d(bs);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("strictly positive") != std::string::npos);
  }
  SUBCASE("center shift persists beyond d") {
    std::vector<BSSegment> segs(1);
    segs[0] = {0.0, 3.0, SegmentMode::step, 0.4, 0.4, t, t};
    const BSFunctions bs(2.0, t, segs);  // segment runs past d = 2
    const auto v = validate_f_d(bs);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("beyond d") != std::string::npos);
  }
  SUBCASE("width differs from the usual beyond d") {
    std::vector<BSSegment> segs(2);
    segs[0] = {0.0, 2.0, SegmentMode::step, 0.0, 0.0, 1.5, 1.5};
    segs[1] = {2.0, 2.6, SegmentMode::step, 0.0, 0.0, 3.0, 3.0};
    const BSFunctions bs(2.0, t, segs);
    CHECK(validate_f_d(bs).size() == 1);
  }
  SUBCASE("members beyond reproach") {
    std::vector<BSSegment> segs(2);
    segs[0] = {0.0, 1.0, SegmentMode::linear, 0.0, 0.8, 1.5, 2.0};
    segs[1] = {1.0, 2.0, SegmentMode::step, -0.3, -0.3, 2.9, 2.9};
    CHECK(validate_f_d(BSFunctions(2.0, t, segs)).empty());
  }
}

TEST_CASE("json round trip preserves evaluation exactly") {
  const BSFunctions bs = naive_pretest(kT5, 0.7, 5, 0.05);
  const BSFunctions back = BSFunctions::from_json(bs.to_json());
  for (double x : {-3.0, -0.4, 0.0, 0.9, 2.0, kT5, 5.0}) {
    CHECK(bs.b(x) == back.b(x));
    CHECK(bs.s(x) == back.s(x));
  }
  CHECK(back.label() == "naive_pretest");
  CHECK(back.d() == bs.d());

  SUBCASE("malformed documents are rejected as input errors") {
    nlohmann::json j = bs.to_json();
    j.erase("d");
    CHECK_THROWS_AS(BSFunctions::from_json(j), InputError);
    nlohmann::json j2 = bs.to_json();
    j2["segments"][0]["mode"] = "cubic";
    CHECK_THROWS_AS(BSFunctions::from_json(j2), InputError);
    nlohmann::json j3 = bs.to_json();
    j3["segments"][0]["x_lo"] = "oops";
    CHECK_THROWS_AS(BSFunctions::from_json(j3), InputError);
    CHECK_THROWS_AS(BSFunctions::from_json(nlohmann::json::array()), InputError);
  }
}

TEST_CASE("realized intervals follow the centering and width rules") {
  Geometry g;
  g.v11 = 0.25;
  g.v22 = 0.5;
  g.v12 = 0.1;
  g.rho = 0.1 / std::sqrt(0.125);
  g.m = 5;
  SufficientStats st;
  st.theta_hat = 10.0;
  st.tau_hat = 1.0;
  st.sigma_hat = 2.0;
  st.m = 5;
  st.x_stat = st.tau_hat / (st.sigma_hat * std::sqrt(g.v22));

  const BSFunctions usual = usual_interval(5, 0.05);
  const IntervalRealization iu = evaluate_interval(usual, st, g);
  CHECK(std::abs(iu.center - 10.0) < 1e-14);
  CHECK(std::abs(iu.half_width - 0.5 * 2.0 * kT5) < 1e-9);
  CHECK(iu.lower < iu.upper);

  const BSFunctions naive = naive_pretest(kT5, 0.7, 5, 0.05);
  const IntervalRealization in_ = evaluate_interval(naive, st, g);
  // |x| < q: center shifted by -scale * rho * x, width shrunk
  CHECK(std::abs(in_.center - (10.0 - 1.0 * 0.7 * st.x_stat)) < 1e-12);
  CHECK(std::abs(in_.half_width - kNaiveS) < 1e-9);

  SufficientStats wrong = st;
  wrong.m = 7;
  CHECK_THROWS_AS(evaluate_interval(usual, wrong, g), DimensionError);
}
