#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "bifurc/bifurcation.hpp"
#include "bifurc/datagen.hpp"
#include "bifurc/errors.hpp"
#include "bifurc/network.hpp"
#include "bifurc/oracle.hpp"
#include "bifurc/problems.hpp"
#include "bifurc/training.hpp"
#include "commands.hpp"

namespace bifurc::cli {

namespace {

namespace fs = std::filesystem;

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = cursor.fetch_add(1); i < count; i = cursor.fetch_add(1)) body(i);
    });
  for (std::thread& t : pool) t.join();
}

std::vector<std::array<double, 2>> box_from_samples(const std::vector<SolutionSample>& data) {
  std::vector<std::array<double, 2>> box(data.front().p.size());
  for (std::size_t k = 0; k < box.size(); ++k) box[k] = {data.front().p[k], data.front().p[k]};
  for (const SolutionSample& s : data)
    for (std::size_t k = 0; k < box.size(); ++k) {
      box[k][0] = std::min(box[k][0], s.p[k]);
      box[k][1] = std::max(box[k][1], s.p[k]);
    }
  return box;
}

std::ofstream open_csv(const fs::path& path, const std::string& manifest,
                       const std::string& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("reproduce: cannot open " + path.string());
  out << "# " << manifest << "\n" << header << "\n";
  out.precision(17);
  return out;
}

std::string scale_manifest(const ReproduceOptions& opts, const std::string& extra) {
  return "cmd=reproduce experiment=" + opts.experiment + " scale=" + opts.scale +
         " seed=" + std::to_string(opts.seed) + " " + extra;
}

// ---- ex1: width-convergence table -------------------------------------------

int reproduce_ex1(const ReproduceOptions& opts) {
  // Acceptance pins K = 1600 at both scales; widths follow the paper's table.
  const std::vector<std::size_t> widths{20, 40, 80, 160, 320};
  const std::size_t epochs = 20000;

  const ProblemSpec spec = make_ex1_turning();
  const auto data = gen_ex1(1600, opts.seed);

  struct Row {
    std::size_t width;
    double p_star, abs_err, f1, f2, sigma;
    bool converged;
  };
  std::vector<Row> rows(widths.size());

  parallel_for(widths.size(), opts.threads, [&](std::size_t i) {
    TrainConfig tc;
    tc.epochs = epochs;
    tc.hidden_dims = {widths[i]};
    tc.seed = opts.seed + 1000 * (i + 1);
    auto [net, reports] = train_best_of_k(data, spec, tc, 1);

    SearchConfig sc;
    sc.seed = opts.seed + 77;
    const BifurcationResult r = find_bifurcation(net, spec, sc);
    rows[i] = {widths[i],      r.p_star[0], std::abs(r.p_star[0]), reports[0].final_loss,
               r.f2_value,     r.sigma_min_at_p,
               r.converged};
  });

  auto out = open_csv(fs::path(opts.out_dir) / "ex1_table.csv",
                      scale_manifest(opts, "K=1600 epochs=" + std::to_string(epochs)),
                      "width,p_star,abs_err,final_f1,final_f2,sigma_min,converged");
  for (const Row& r : rows)
    out << r.width << "," << r.p_star << "," << r.abs_err << "," << r.f1 << "," << r.f2 << ","
        << r.sigma << "," << (r.converged ? 1 : 0) << "\n";
  std::printf("ex1: wrote %s\n", (fs::path(opts.out_dir) / "ex1_table.csv").string().c_str());
  for (const Row& r : rows)
    std::printf("  N=%-4zu |p*| = %.4f  f1 = %.2e  f2 = %.2e\n", r.width, r.abs_err, r.f1, r.f2);
  return kExitOk;
}

// ---- ex2: discriminant curve over b ------------------------------------------

int reproduce_ex2(const ReproduceOptions& opts) {
  const bool desk = opts.scale == "desk";
  const std::size_t n_b = desk ? 1250 : 5000;
  const std::size_t epochs = desk ? 10000 : 20000;
  const std::size_t width = 160;

  const ProblemSpec spec = make_ex2_quadratic();
  const auto data = gen_ex2(n_b, 5, opts.seed);

  TrainConfig tc;
  tc.epochs = epochs;
  tc.hidden_dims = {width};
  tc.seed = opts.seed + 1;
  auto [net, reports] = train_best_of_k(data, spec, tc, 1);

  std::vector<FrozenCoords> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back({{0, -2.0 + 0.1 * i}});

  SearchConfig sc;
  sc.seed = opts.seed + 7;
  const auto results = sweep_bifurcation(net, spec, grid, sc, opts.threads);

  auto out = open_csv(fs::path(opts.out_dir) / "ex2_curve.csv",
                      scale_manifest(opts, "K=" + std::to_string(data.size()) + " width=160 epochs=" +
                                               std::to_string(epochs)),
                      "b,c_star,c_exact,abs_err,f2,converged");
  double max_err = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double b = grid[i][0].second;
    const double c_star = results[i].p_star[1];
    const double c_exact = quadratic_curve(b);
    max_err = std::max(max_err, std::abs(c_star - c_exact));
    out << b << "," << c_star << "," << c_exact << "," << std::abs(c_star - c_exact) << ","
        << results[i].f2_value << "," << (results[i].converged ? 1 : 0) << "\n";
  }
  std::printf("ex2: f1 = %.2e, max |c*_N - b^2/4| = %.4f\n", reports[0].final_loss, max_err);
  return kExitOk;
}

// ---- ex3: cusp curve errors vs width -----------------------------------------

int reproduce_ex3(const ReproduceOptions& opts) {
  const bool desk = opts.scale == "desk";
  const std::size_t n_b = desk ? 750 : 3000;
  const std::size_t epochs = desk ? 10000 : 20000;
  const std::vector<std::size_t> widths = desk ? std::vector<std::size_t>{40, 160}
                                               : std::vector<std::size_t>{20, 40, 80, 160, 320};

  const ProblemSpec spec = make_ex3_cubic();
  const auto data = gen_ex3(n_b, 4, opts.seed);

  std::vector<double> grid_b;
  for (int i = 0; i <= 30; ++i) grid_b.push_back(0.05 * i);

  auto table = open_csv(fs::path(opts.out_dir) / "ex3_table.csv",
                        scale_manifest(opts, "K=" + std::to_string(data.size()) + " epochs=" +
                                                 std::to_string(epochs)),
                        "width,err_c,err_d");

  for (const std::size_t width : widths) {
    TrainConfig tc;
    tc.epochs = epochs;
    tc.hidden_dims = {width};
    tc.seed = opts.seed + 10 * width;
    auto [net, reports] = train_best_of_k(data, spec, tc, 1);

    std::vector<FrozenCoords> grid;
    for (double b : grid_b) grid.push_back({{0, b}});
    SearchConfig sc;
    sc.seed = opts.seed + 3;
    const auto results = sweep_bifurcation(net, spec, grid, sc, opts.threads);

    OracleCurve c_approx{Vector(grid_b.begin(), grid_b.end()), {}, "scan"};
    OracleCurve c_exact{c_approx.grid, {}, "analytic"};
    OracleCurve d_approx = c_approx;
    OracleCurve d_exact = c_exact;

    auto curve = open_csv(fs::path(opts.out_dir) / ("ex3_curve_N" + std::to_string(width) + ".csv"),
                          scale_manifest(opts, "width=" + std::to_string(width)),
                          "b,c_star,d_star,c_exact,d_exact,f2,converged");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double b = grid_b[i];
      const auto [ce, de] = cubic_curve(b);
      c_approx.values.push_back(results[i].p_star[1]);
      d_approx.values.push_back(results[i].p_star[2]);
      c_exact.values.push_back(ce);
      d_exact.values.push_back(de);
      curve << b << "," << results[i].p_star[1] << "," << results[i].p_star[2] << "," << ce << ","
            << de << "," << results[i].f2_value << "," << (results[i].converged ? 1 : 0) << "\n";
    }
    const double err_c = curve_error(c_approx, c_exact);
    const double err_d = curve_error(d_approx, d_exact);
    table << width << "," << err_c << "," << err_d << "\n";
    std::printf("ex3 N=%zu: f1 = %.2e, err_c = %.4f, err_d = %.4f\n", width,
                reports[0].final_loss, err_c, err_d);
  }
  return kExitOk;
}

// ---- ex4: BVP branch folds -----------------------------------------------------

int reproduce_ex4(const ReproduceOptions& opts) {
  const bool desk = opts.scale == "desk";
  const std::size_t points = desk ? 1900 : 7600;
  const std::size_t epochs = desk ? 25000 : 50000;
  const std::vector<std::size_t> widths = desk ? std::vector<std::size_t>{100}
                                               : std::vector<std::size_t>{10, 50, 100, 200, 500};
  const double lambdas[4] = {20.0, 100.0, 56.0, 0.3};

  const ProblemSpec spec = make_ex4_bvp();
  Ex4Options gen_opts;
  gen_opts.points_per_branch = points;
  const auto branches = gen_ex4_branches(opts.seed, gen_opts);

  // Oracle folds: the frozen fixture when provided, otherwise a live scan.
  std::vector<double> oracle_folds(4, 0.0);
  if (!opts.fixture.empty()) {
    const OracleFixture fixture = load_fixture(opts.fixture);
    oracle_folds = fixture.ex4_folds;
  } else {
    for (std::size_t i = 0; i < branches.size(); ++i) {
      const SigmaScan scan = sigma_min_scan(spec, branches[i]);
      for (const FoldEstimate& f : scan.folds)
        if (f.truncated) oracle_folds[i] = f.p_star;
    }
  }

  auto out = open_csv(fs::path(opts.out_dir) / "ex4_folds.csv",
                      scale_manifest(opts, "points=" + std::to_string(points) + " epochs=" +
                                               std::to_string(epochs) + " k=5"),
                      "branch,lambda,width,p_star,p_star_oracle,abs_err,final_f1,f2,converged");

  struct Task {
    std::size_t branch;
    std::size_t width;
  };
  std::vector<Task> tasks;
  for (std::size_t bi = 0; bi < branches.size(); ++bi)
    for (std::size_t width : widths) tasks.push_back({bi, width});

  struct Row {
    std::size_t branch, width;
    double lambda, p_star, oracle, f1, f2;
    bool converged;
  };
  std::vector<Row> rows(tasks.size());

  parallel_for(tasks.size(), opts.threads, [&](std::size_t t) {
    const auto [bi, width] = tasks[t];
    const auto& samples = branches[bi].samples;
    TrainConfig tc;
    tc.lambda = lambdas[bi];
    tc.epochs = epochs;
    tc.hidden_dims = {width};
    tc.seed = opts.seed + 100 * (bi + 1) + width;
    tc.k_models = 5;
    tc.box_aware_init = true;
    auto [net, reports] = train_best_of_k(samples, spec, tc, 1);
    double f1 = reports[0].final_loss;
    for (const TrainReport& r : reports) f1 = std::min(f1, r.final_loss);

    SearchConfig sc;
    sc.lambda = lambdas[bi];
    sc.seed = opts.seed + 13;
    sc.p_box = box_from_samples(samples);
    const BifurcationResult r = find_bifurcation(net, spec, sc);
    rows[t] = {bi + 1,     width,      lambdas[bi], r.p_star[0],
               oracle_folds[bi], f1, r.f2_value,  r.converged};
  });

  for (const Row& r : rows) {
    out << "branch" << r.branch << "," << r.lambda << "," << r.width << "," << r.p_star << ","
        << r.oracle << "," << std::abs(r.p_star - r.oracle) << "," << r.f1 << "," << r.f2 << ","
        << (r.converged ? 1 : 0) << "\n";
    std::printf("ex4 branch%zu N=%zu: p* = %.4f vs oracle %.4f (err %.4f), f1 = %.2e\n", r.branch,
                r.width, r.p_star, r.oracle, std::abs(r.p_star - r.oracle), r.f1);
  }
  return kExitOk;
}

// ---- ex5: Turing points over the (b, η) grid -----------------------------------

int reproduce_ex5(const ReproduceOptions& opts) {
  const bool desk = opts.scale == "desk";
  const std::size_t count = desk ? 75 : 300;
  const std::size_t epochs = desk ? 25000 : 50000;
  const std::vector<int> bi = desk ? std::vector<int>{0, 2, 4} : std::vector<int>{0, 1, 2, 3, 4};
  std::vector<int> bj;
  if (desk)
    bj = {0, 35, 70};
  else
    for (int j = 0; j <= 70; ++j) bj.push_back(j);

  struct Node {
    double b, eta;
  };
  std::vector<Node> nodes;
  for (int i : bi)
    for (int j : bj) nodes.push_back({2.0 / 3.0 + i / 30.0, 45.0 + j / 2.0});

  struct Row {
    double b, eta, d_star, d_oracle, f1, f2;
    bool converged, failed;
  };
  std::vector<Row> rows(nodes.size());

  parallel_for(nodes.size(), opts.threads, [&](std::size_t n) {
    const auto [b, eta] = nodes[n];
    Row row{b, eta, 0.0, 0.0, 0.0, 0.0, false, false};
    try {
      const auto d_oracle = schnakenberg_dstar(1.0 / 3.0, b, eta);
      if (!d_oracle) throw generation_error("no Turing point");
      row.d_oracle = *d_oracle;

      const auto data = gen_ex5(b, eta, count, opts.seed + n);
      const ProblemSpec spec = make_ex5_schnakenberg({1.0 / 3.0, b, eta});

      TrainConfig tc;
      tc.epochs = epochs;
      tc.hidden_dims = {100};
      tc.seed = opts.seed + 31 * (n + 1);
      tc.k_models = 10;
      tc.box_aware_init = true;
      auto [net, reports] = train_best_of_k(data, spec, tc, 1);
      row.f1 = reports[0].final_loss;
      for (const TrainReport& r : reports) row.f1 = std::min(row.f1, r.final_loss);

      SearchConfig sc;
      sc.seed = opts.seed + 5;
      sc.p_box = box_from_samples(data);
      const BifurcationResult r = find_bifurcation(net, spec, sc);
      row.d_star = r.p_star[0];
      row.f2 = r.f2_value;
      row.converged = r.converged;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "ex5 node (b=%.3f, eta=%.1f) failed: %s\n", b, eta, e.what());
      row.failed = true;
    }
    rows[n] = row;
  });

  auto out = open_csv(fs::path(opts.out_dir) / "ex5_grid.csv",
                      scale_manifest(opts, "count=" + std::to_string(count) + " epochs=" +
                                               std::to_string(epochs) + " k=10 width=100"),
                      "b,eta,d_star,d_star_oracle,rel_err,final_f1,f2,converged");
  for (const Row& r : rows) {
    if (r.failed) {
      out << r.b << "," << r.eta << ",nan," << r.d_oracle << ",nan,nan,nan,0\n";
      continue;
    }
    const double rel = std::abs(r.d_star - r.d_oracle) / r.d_oracle;
    out << r.b << "," << r.eta << "," << r.d_star << "," << r.d_oracle << "," << rel << "," << r.f1
        << "," << r.f2 << "," << (r.converged ? 1 : 0) << "\n";
    std::printf("ex5 (b=%.3f, eta=%5.1f): d* = %.4f vs oracle %.4f (rel %.3f), f1 = %.2e\n", r.b,
                r.eta, r.d_star, r.d_oracle, rel, r.f1);
  }
  return kExitOk;
}

}  // namespace

int cmd_reproduce(const ReproduceOptions& opts) {
  fs::create_directories(opts.out_dir);
  if (opts.experiment == "ex1") return reproduce_ex1(opts);
  if (opts.experiment == "ex2") return reproduce_ex2(opts);
  if (opts.experiment == "ex3") return reproduce_ex3(opts);
  if (opts.experiment == "ex4") return reproduce_ex4(opts);
  if (opts.experiment == "ex5") return reproduce_ex5(opts);
  std::fprintf(stderr, "unknown experiment: %s\n", opts.experiment.c_str());
  return kExitUsage;
}

}  // namespace bifurc::cli
