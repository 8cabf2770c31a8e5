#include <cmath>
#include <filesystem>
#include <set>

#include "bifurc/datagen.hpp"
#include "bifurc/errors.hpp"
#include "bifurc/oracle.hpp"
#include "bifurc/problems.hpp"
#include "doctest.h"

using namespace bifurc;

TEST_CASE("gen_ex1: sizes, exactness, determinism") {
  const auto data = gen_ex1(1600, 7);
  CHECK(data.size() == 1600);
  for (const SolutionSample& s : data) {
    CHECK(s.p[0] >= 0.0);
    CHECK(s.p[0] <= 2.0);
    CHECK(s.u[0] * s.u[0] == doctest::Approx(s.p[0]).epsilon(1e-15));
  }
  const auto again = gen_ex1(1600, 7);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(data[i].p == again[i].p);
    CHECK(data[i].u == again[i].u);
  }
  CHECK_THROWS_AS(gen_ex1(0, 1), argument_error);
}

TEST_CASE("gen_ex2: default sizes and discriminant guarantee") {
  const auto data = gen_ex2(5000, 5, 3);
  CHECK(data.size() == 25000);
  const ProblemSpec spec = make_ex2_quadratic();
  for (const SolutionSample& s : data) {
    const double b = s.p[0], c = s.p[1];
    CHECK(c <= b * b / 4.0 + 1e-15);
    CHECK(c >= b * b / 8.0 - 1e-15);
    CHECK(std::abs(residual(spec, s.u, s.p)[0]) <= 1e-12);
  }
  // double root sanity: b=2, c=1 → u = −1 (checked through the formula path)
  const double u = (-2.0 + std::sqrt(std::max(0.0, 4.0 - 4.0))) / 2.0;
  CHECK(u == doctest::Approx(-1.0));
  CHECK(residual(spec, {u}, {2.0, 1.0})[0] == doctest::Approx(0.0));
}

TEST_CASE("gen_ex3: default sizes, vanishing discriminant, residual feasibility") {
  const auto data = gen_ex3(3000, 4, 5);
  CHECK(data.size() == 12000);
  const ProblemSpec spec = make_ex3_cubic();
  for (const SolutionSample& s : data) {
    const double b = s.p[0], c = s.p[1], d = s.p[2];
    CHECK(std::abs(cubic_discriminant(b, c, d)) <= 1e-10);
    CHECK(std::abs(residual(spec, s.u, s.p)[0]) <= 1e-10);
  }
  // degenerate corner: b = 0, c = 0 gives d = 0 and the triple root x = 0
  CHECK(residual(spec, {0.0}, {0.0, 0.0, 0.0})[0] == doctest::Approx(0.0));
}

TEST_CASE("trace_branch: ex1 path ends at the fold near p = 0") {
  const ProblemSpec spec = make_ex1_turning();
  TraceOptions opts;
  opts.step = 0.01;
  opts.direction = -1;
  opts.max_steps = 500;
  opts.fold_tol = 1e-3;
  const Branch branch = trace_branch(spec, {{2.0}, {std::sqrt(2.0)}}, 0, opts);
  CHECK(branch.stop_reason == "fold");
  CHECK(branch.samples.back().p[0] < 0.05);
  for (const SolutionSample& s : branch.samples)
    CHECK(std::abs(residual(spec, s.u, s.p)[0]) <= 1e-8);
}

TEST_CASE("trace_branch: ex4 trivial branch stays at zero") {
  const ProblemSpec spec = make_ex4_bvp();
  TraceOptions opts;
  opts.step = 0.1;
  opts.direction = 1;
  opts.max_steps = 50;
  opts.fold_tol = 1e-6;
  const Branch branch = trace_branch(spec, {{1.0}, Vector(kEx4Unknowns, 0.0)}, 0, opts);
  CHECK(branch.samples.size() == 51);
  CHECK(branch.stop_reason == "max_steps");
  for (const SolutionSample& s : branch.samples) CHECK(norm_inf(s.u) <= 1e-12);
}

TEST_CASE("trace_branch: rejects a bad start") {
  const ProblemSpec spec = make_ex1_turning();
  TraceOptions opts;
  // no real solution at p = −1, Newton cannot converge
  CHECK_THROWS_AS(trace_branch(spec, {{-1.0}, {1.0}}, 0, opts), generation_error);
}

TEST_CASE("gen_ex4_branches: four distinct feasible branches ending at folds" *
          doctest::timeout(600)) {
  Ex4Options opts;
  opts.points_per_branch = 300;  // full 7600 resolution is exercised at acceptance time
  const auto branches = gen_ex4_branches(0, opts);
  REQUIRE(branches.size() == 4);

  const ProblemSpec spec = make_ex4_bvp();
  std::set<std::string> labels;
  for (const Branch& branch : branches) {
    labels.insert(branch.label);
    CHECK(branch.samples.size() == opts.points_per_branch);
    CHECK(branch.stop_reason == "fold");
    for (std::size_t i = 0; i < branch.samples.size(); i += 7) {
      const Vector res = residual(spec, branch.samples[i].u, branch.samples[i].p);
      CHECK(norm_inf(res) <= 1e-8);
    }
    // distinctness at the anchor parameter
    for (const Branch& other : branches) {
      if (&other == &branch) continue;
      double diff = 0.0;
      for (std::size_t j = 0; j < branch.samples.front().u.size(); ++j)
        diff = std::max(diff,
                        std::abs(branch.samples.front().u[j] - other.samples.front().u[j]));
      CHECK(diff > opts.dedupe_tol);
    }
    // the trace was cut at a fold: σ_min at the last sample reaches fold_tol
    const SolutionSample& last = branch.samples.back();
    const double sigma = smallest_singular(jac_u(spec, last.u, last.p)).sigma_min;
    CHECK(sigma <= 1e-4);
  }
  CHECK(labels.size() == 4);
}

TEST_CASE("gen_ex5: samples are feasible and bracket the Turing point" * doctest::timeout(600)) {
  const double b = 2.0 / 3.0;
  const double eta = 50.0;
  const auto data = gen_ex5(b, eta, 300, 0);
  CHECK(data.size() == 300);

  const auto d_star = schnakenberg_dstar(1.0 / 3.0, b, eta);
  REQUIRE(d_star.has_value());

  const ProblemSpec spec = make_ex5_schnakenberg({1.0 / 3.0, b, eta}, {*d_star - 2, *d_star + 2});
  double d_lo = data.front().p[0], d_hi = data.front().p[0];
  for (const SolutionSample& s : data) {
    d_lo = std::min(d_lo, s.p[0]);
    d_hi = std::max(d_hi, s.p[0]);
  }
  CHECK(d_lo < *d_star);
  CHECK(d_hi > *d_star);
  for (std::size_t i = 0; i < data.size(); i += 11) {
    const Vector res = residual(spec, data[i].u, data[i].p);
    CHECK(norm_inf(res) <= 1e-8);
  }
  // the branch is genuinely nonconstant above d*
  const Vector constant = schnakenberg_constant_state(1.0 / 3.0, b);
  double dev = 0.0;
  for (std::size_t j = 0; j < data.front().u.size(); ++j)
    dev = std::max(dev, std::abs(data.front().u[j] - constant[j]));
  CHECK(dev > 1e-3);
}

TEST_CASE("dataset files: header + rows round trip") {
  const auto path = std::filesystem::temp_directory_path() / "bifurc_ds_roundtrip.jsonl";
  const auto data = gen_ex1(50, 12);
  DatasetHeader header;
  header.problem = "ex1_turning";
  header.seed = 12;
  header.args_json = "{\"count\":50}";
  save_dataset(path, header, data);

  const auto [loaded_header, loaded] = load_dataset(path);
  CHECK(loaded_header.problem == "ex1_turning");
  CHECK(loaded_header.seed == 12);
  REQUIRE(loaded.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(loaded[i].p == data[i].p);  // exact: shortest-round-trip doubles
    CHECK(loaded[i].u == data[i].u);
  }
  std::filesystem::remove(path);
}
