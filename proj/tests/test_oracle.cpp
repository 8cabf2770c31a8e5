#include <cmath>
#include <filesystem>

#include "bifurc/datagen.hpp"
#include "bifurc/errors.hpp"
#include "bifurc/oracle.hpp"
#include "bifurc/problems.hpp"
#include "bifurc/rng.hpp"
#include "doctest.h"

using namespace bifurc;

TEST_CASE("quadratic_curve: values and discriminant identity") {
  CHECK(quadratic_curve(0.0) == doctest::Approx(0.0));
  CHECK(quadratic_curve(2.0) == doctest::Approx(1.0));
  CHECK(quadratic_curve(-1.0) == doctest::Approx(0.25));

  SplitMix64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const double b = rng.uniform(-3.0, 3.0);
    CHECK(b * b - 4.0 * quadratic_curve(b) == doctest::Approx(0.0));
  }
}

TEST_CASE("cubic_curve: triple root with two vanishing derivatives") {
  CHECK(cubic_curve(0.0).first == doctest::Approx(0.0));
  CHECK(cubic_curve(0.0).second == doctest::Approx(0.0));
  CHECK(cubic_curve(3.0).first == doctest::Approx(3.0));
  CHECK(cubic_curve(3.0).second == doctest::Approx(1.0));

  SplitMix64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const double b = rng.uniform(0.0, 2.0);
    const auto [c, d] = cubic_curve(b);
    const double x = -b / 3.0;
    const double f = ((x + b) * x + c) * x + d;
    const double fx = 3.0 * x * x + 2.0 * b * x + c;
    const double fxx = 6.0 * x + 2.0 * b;
    CHECK(std::abs(f) <= 1e-14);
    CHECK(std::abs(fx) <= 1e-14);
    CHECK(std::abs(fxx) <= 1e-14);
    // the discriminant vanishes identically on the curve
    CHECK(std::abs(cubic_discriminant(b, c, d)) <= 1e-14);
  }
}

TEST_CASE("cubic_discriminant: signed examples") {
  CHECK(cubic_discriminant(0.0, 0.0, 0.0) == doctest::Approx(0.0));
  // x³ − 3x + 2 = (x−1)²(x+2): Δ = (−1)² + (−1)³ = 0
  CHECK(cubic_discriminant(0.0, -3.0, 2.0) == doctest::Approx(0.0));
  // x³ + 1 has a single real root: Δ = 1/4 > 0
  CHECK(cubic_discriminant(0.0, 0.0, 1.0) == doctest::Approx(0.25));
}

TEST_CASE("sigma_min_scan: ex1 exact branch reproduces 2*sqrt(p)") {
  const ProblemSpec spec = make_ex1_turning();
  Branch branch;
  branch.label = "exact";
  for (double p = 2.0; p >= 1e-6; p -= 0.01) branch.samples.push_back({{p}, {std::sqrt(p)}});

  const SigmaScan scan = sigma_min_scan(spec, branch);
  REQUIRE(scan.points.size() == branch.samples.size());
  for (std::size_t i = 0; i < scan.points.size(); ++i)
    CHECK(scan.points[i].sigma_min ==
          doctest::Approx(2.0 * std::sqrt(scan.points[i].p)).epsilon(1e-10));

  REQUIRE(!scan.folds.empty());
  bool found = false;
  for (const FoldEstimate& f : scan.folds)
    if (f.truncated && std::abs(f.p_star) <= 1e-3) found = true;
  CHECK(found);

  CHECK_THROWS_AS(sigma_min_scan(spec, Branch{}), argument_error);
}

TEST_CASE("sigma_min_scan: ex4 trivial branch is p-independent with no fold") {
  const ProblemSpec spec = make_ex4_bvp();
  Branch branch;
  for (double p = 0.0; p <= 10.0; p += 0.5)
    branch.samples.push_back({{p}, Vector(kEx4Unknowns, 0.0)});
  const SigmaScan scan = sigma_min_scan(spec, branch);
  const double first = scan.points.front().sigma_min;
  for (const ScanPoint& pt : scan.points) CHECK(pt.sigma_min == doctest::Approx(first));
  CHECK(scan.folds.empty());
}

TEST_CASE("schnakenberg dispersion relation: root condition and positivity") {
  const double a = 1.0 / 3.0, b = 2.0 / 3.0;
  for (double eta : {45.0, 50.0, 62.5, 80.0}) {
    const auto turing = schnakenberg_turing(a, b, eta);
    REQUIRE(turing.has_value());
    CHECK(turing->d_star > 0.0);
    CHECK(turing->mode >= 1);
    CHECK(turing->mode <= 10);

    // the determinant at (d*, k) vanishes
    const double u = a + b;
    const double fu = 2.0 * b / u - 1.0;
    const double fv = u * u;
    const double gu = -2.0 * b / u;
    const double gv = -u * u;
    const double h = 0.1;
    const double mu = (2.0 - 2.0 * std::cos(turing->mode * M_PI * h)) / (h * h);
    const double det = (-mu + eta * fu) * (-turing->d_star * mu + eta * gv) -
                       eta * eta * fv * gu;
    CHECK(std::abs(det) <= 1e-9 * std::max(1.0, std::abs(eta * eta * fv * gu)));
  }
}

TEST_CASE("schnakenberg d*: cross-check against the constant-branch sigma scan" *
          doctest::timeout(300)) {
  const double a = 1.0 / 3.0, b = 2.0 / 3.0, eta = 50.0;
  const auto d_star = schnakenberg_dstar(a, b, eta);
  REQUIRE(d_star.has_value());

  const ProblemSpec spec = make_ex5_schnakenberg({a, b, eta}, {*d_star - 1.0, *d_star + 1.0});
  TraceOptions opts;
  opts.step = 0.002;
  opts.direction = 1;
  opts.max_steps = 1000;
  opts.fold_tol = 0.0;  // scan across the singularity, do not stop
  const Branch branch =
      trace_branch(spec, {{*d_star - 1.0}, schnakenberg_constant_state(a, b)}, 0, opts);
  REQUIRE(branch.samples.size() > 500);

  const SigmaScan scan = sigma_min_scan(spec, branch);
  REQUIRE(!scan.folds.empty());
  double best = 1e9;
  for (const FoldEstimate& f : scan.folds) best = std::min(best, std::abs(f.p_star - *d_star));
  CHECK(best <= 1e-3);
}

TEST_CASE("curve_error: exact values and grid checks") {
  OracleCurve exact;
  OracleCurve approx;
  for (double b = 0.0; b <= 1.5 + 1e-12; b += 0.05) {
    exact.grid.push_back(b);
    exact.values.push_back(quadratic_curve(b));
    approx.grid.push_back(b);
    approx.values.push_back(quadratic_curve(b));
  }
  CHECK(curve_error(approx, exact) == doctest::Approx(0.0));

  for (double& v : approx.values) v += 0.01;
  CHECK(curve_error(approx, exact) == doctest::Approx(0.015).epsilon(1e-12));

  OracleCurve shifted = exact;
  shifted.grid[1] += 0.5;
  CHECK_THROWS_AS(curve_error(shifted, exact), argument_error);
  OracleCurve shorter = exact;
  shorter.grid.pop_back();
  shorter.values.pop_back();
  CHECK_THROWS_AS(curve_error(shorter, exact), argument_error);
}

TEST_CASE("frozen fixture matches a live recomputation" * doctest::timeout(900)) {
  const OracleFixture frozen = load_fixture(BIFURC_FIXTURE_PATH);
  REQUIRE(frozen.ex4_folds.size() == 4);
  CHECK(frozen.ex5_dstar > 0.0);

  const OracleFixture live = make_reference_fixture();
  REQUIRE(live.ex4_folds.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(live.ex4_folds[i] == doctest::Approx(frozen.ex4_folds[i]).epsilon(1e-9));
  CHECK(live.ex5_dstar == doctest::Approx(frozen.ex5_dstar).epsilon(1e-12));

  // the ex5 reference value is the dispersion-relation solution
  const auto direct = schnakenberg_dstar(frozen.ex5_params.a, frozen.ex5_params.b,
                                         frozen.ex5_params.eta);
  REQUIRE(direct.has_value());
  CHECK(*direct == doctest::Approx(frozen.ex5_dstar).epsilon(1e-12));
}
