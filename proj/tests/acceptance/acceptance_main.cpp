// Acceptance suite: runs every experiment at the pinned tolerances and
// prints one PASS/FAIL line per criterion. Exit code 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bifurc/bifurcation.hpp"
#include "bifurc/datagen.hpp"
#include "bifurc/network.hpp"
#include "bifurc/oracle.hpp"
#include "bifurc/problems.hpp"
#include "bifurc/rng.hpp"
#include "bifurc/training.hpp"

using namespace bifurc;
namespace fs = std::filesystem;

namespace {

const std::string kCli = BIFURC_CLI_PATH;
const std::string kFixture = BIFURC_FIXTURE_PATH;

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

int run_cli(const std::string& args) {
  const std::string cmd = kCli + " " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Minimal CSV reader: skips '#' comments, returns header-keyed rows.
std::vector<std::map<std::string, double>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing CSV: " + path.string());
  std::vector<std::map<std::string, double>> rows;
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    if (names.empty()) {
      while (std::getline(ss, cell, ',')) names.push_back(cell);
      continue;
    }
    std::map<std::string, double> row;
    std::size_t i = 0;
    while (std::getline(ss, cell, ',') && i < names.size()) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      row[names[i++]] = (end == cell.c_str()) ? std::nan("") : v;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

// ---- criteria 1 & 2: ex1 width convergence and loss levels --------------------

void criteria_ex1(const fs::path& out_root) {
  const fs::path dir = out_root / "ex1";
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = run_cli("reproduce ex1 --scale desk --seed 0 --threads 2 --out " + dir.string());
  const double mins =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  if (rc != 0) {
    report(1, "ex1 width convergence", false, "reproduce exited " + std::to_string(rc));
    report(2, "ex1 loss levels", false, "reproduce exited " + std::to_string(rc));
    return;
  }
  const auto rows = read_csv(dir / "ex1_table.csv");
  std::map<int, std::map<std::string, double>> by_width;
  for (const auto& r : rows) by_width[static_cast<int>(r.at("width"))] = r;

  const double e20 = by_width[20].at("abs_err");
  const double e320 = by_width[320].at("abs_err");
  const bool c1 = e20 <= 0.3 && e320 <= 0.05 && e320 < e20 && mins <= 10.0;
  report(1, "ex1 width convergence",
         c1,
         "|p*|: N=20 " + fmt(e20) + " (<=0.3), N=320 " + fmt(e320) +
             " (<=0.05), decreasing=" + (e320 < e20 ? "yes" : "no") + ", runtime " + fmt(mins) +
             " min (<=10)");

  const double f1 = by_width[320].at("final_f1");
  const double f2 = by_width[320].at("final_f2");
  const bool c2 = f1 <= 1e-4 && f2 <= 1e-2;
  report(2, "ex1 loss levels", c2, "N=320 f1 = " + fmt(f1) + " (<=1e-4), f2 = " + fmt(f2) +
                                        " (<=1e-2)");
}

// ---- criterion 3: ex2 discriminant curve --------------------------------------

void criterion_ex2(const fs::path& out_root) {
  const fs::path dir = out_root / "ex2";
  const int rc = run_cli("reproduce ex2 --scale desk --seed 0 --threads 2 --out " + dir.string());
  if (rc != 0) {
    report(3, "ex2 discriminant curve", false, "reproduce exited " + std::to_string(rc));
    return;
  }
  const auto rows = read_csv(dir / "ex2_curve.csv");
  double max_err = 0.0;
  for (const auto& r : rows) max_err = std::max(max_err, r.at("abs_err"));
  report(3, "ex2 discriminant curve", rows.size() == 41 && max_err <= 0.1,
         "max |c*_N(b) - b^2/4| = " + fmt(max_err) + " over " + std::to_string(rows.size()) +
             " nodes (<=0.1)");
}

// ---- criterion 4: ex3 curve errors --------------------------------------------

void criterion_ex3(const fs::path& out_root) {
  const fs::path dir = out_root / "ex3";
  const int rc = run_cli("reproduce ex3 --scale desk --seed 0 --threads 2 --out " + dir.string());
  if (rc != 0) {
    report(4, "ex3 curve errors", false, "reproduce exited " + std::to_string(rc));
    return;
  }
  const auto rows = read_csv(dir / "ex3_table.csv");
  bool found = false;
  double err_c = 0.0, err_d = 0.0;
  for (const auto& r : rows)
    if (static_cast<int>(r.at("width")) == 160) {
      found = true;
      err_c = r.at("err_c");
      err_d = r.at("err_d");
    }
  report(4, "ex3 curve errors", found && err_c <= 0.05 && err_d <= 0.05,
         "N=160 integral errors: c " + fmt(err_c) + ", d " + fmt(err_d) + " (each <=0.05)");
}

// ---- criterion 5: ex4 folds -----------------------------------------------------

void criterion_ex4(const fs::path& out_root) {
  const fs::path dir = out_root / "ex4";
  const int rc = run_cli("reproduce ex4 --scale desk --seed 0 --threads 2 --fixture " + kFixture +
                         " --out " + dir.string());
  if (rc != 0) {
    report(5, "ex4 branch folds", false, "reproduce exited " + std::to_string(rc));
    return;
  }
  const auto rows = read_csv(dir / "ex4_folds.csv");
  bool pass = rows.size() == 4;
  std::string detail;
  for (const auto& r : rows) {
    const double err = r.at("abs_err");
    pass = pass && err <= 0.1;
    if (!detail.empty()) detail += ", ";
    detail += fmt(err);
  }
  report(5, "ex4 branch folds", pass, "|p*_N - p*_oracle| per branch: " + detail + " (each <=0.1)");
}

// ---- criterion 6: ex5 desk-scale grid -------------------------------------------

void criterion_ex5(const fs::path& out_root) {
  const fs::path dir = out_root / "ex5";
  const int rc = run_cli("reproduce ex5 --scale desk --seed 0 --threads 2 --out " + dir.string());
  if (rc != 0) {
    report(6, "ex5 Turing points", false, "reproduce exited " + std::to_string(rc));
    return;
  }
  const auto rows = read_csv(dir / "ex5_grid.csv");
  bool pass = rows.size() == 9;
  double max_rel = 0.0;
  for (const auto& r : rows) {
    const double rel = r.at("rel_err");
    if (std::isnan(rel)) pass = false;
    max_rel = std::max(max_rel, rel);
    pass = pass && rel <= 0.10;
  }
  // qualitative trend: d* monotone along η at fixed b, same direction as oracle
  std::map<double, std::vector<std::pair<double, std::pair<double, double>>>> by_b;
  for (const auto& r : rows)
    by_b[r.at("b")].push_back({r.at("eta"), {r.at("d_star"), r.at("d_star_oracle")}});
  bool trend = true;
  for (auto& [b, pts] : by_b) {
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double dn = pts[i + 1].second.first - pts[i].second.first;
      const double dor = pts[i + 1].second.second - pts[i].second.second;
      if (dn * dor <= 0.0) trend = false;
    }
  }
  report(6, "ex5 Turing points", pass && trend,
         "max rel err = " + fmt(max_rel) + " over " + std::to_string(rows.size()) +
             " nodes (<=0.1), eta-trend matches oracle: " + (trend ? "yes" : "no"));
}

// ---- criterion 7: property suite -------------------------------------------------

// (a) gradient checks across nn_core, training, bifurcation
bool prop_gradients() {
  SplitMix64 rng(1001);
  // nn_core parameter gradients and input jacobians, sigmoid, 1e-5 relative
  for (int trial = 0; trial < 20; ++trial) {
    MlpNetwork net = init_network({2, 6, 2}, Activation::sigmoid, 50 + trial);
    const Vector p{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
    const Vector upstream{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const ParamGradient grad = backward_params(net, p, upstream);

    auto objective = [&]() {
      const Vector out = forward(net, p);
      return upstream[0] * out[0] + upstream[1] * out[1];
    };
    // spot-check one weight and one bias per layer
    for (std::size_t layer = 0; layer < net.weights.size(); ++layer) {
      double* w = &net.weights[layer].data[rng.next_u64() % net.weights[layer].data.size()];
      const double* gw =
          &grad.weights[layer].data[w - &net.weights[layer].data[0]];
      const double saved = *w;
      const double h = 1e-6 * std::max(1.0, std::abs(saved));
      *w = saved + h;
      const double fp = objective();
      *w = saved - h;
      const double fm = objective();
      *w = saved;
      const double fd = (fp - fm) / (2.0 * h);
      if (std::abs(*gw - fd) / std::max({1e-8, std::abs(fd), std::abs(*gw)}) > 1e-5) return false;
    }
    const DenseMatrix jac = input_jacobian(net, p);
    for (std::size_t out_i = 0; out_i < 2; ++out_i)
      for (std::size_t in_i = 0; in_i < 2; ++in_i) {
        const double fd = central_diff(
            [&](const Vector& x) { return forward(net, x)[out_i]; }, p, in_i, 1e-6);
        if (std::abs(jac(out_i, in_i) - fd) /
                std::max({1e-8, std::abs(fd), std::abs(jac(out_i, in_i))}) >
            1e-5)
          return false;
      }
  }

  // training gradient (loss_f1) on a small ex1 set
  {
    const ProblemSpec spec = make_ex1_turning();
    const auto data = gen_ex1(5, 77);
    MlpNetwork net = init_network({1, 5, 1}, Activation::sigmoid, 7);
    const ParamGradient grad = grad_f1(net, data, spec, 1.0);
    for (std::size_t layer = 0; layer < net.weights.size(); ++layer)
      for (std::size_t k = 0; k < net.weights[layer].data.size(); ++k) {
        double* w = &net.weights[layer].data[k];
        const double saved = *w;
        const double h = 1e-6 * std::max(1.0, std::abs(saved));
        *w = saved + h;
        const double fp = loss_f1(net, data, spec, 1.0);
        *w = saved - h;
        const double fm = loss_f1(net, data, spec, 1.0);
        *w = saved;
        const double fd = (fp - fm) / (2.0 * h);
        const double g = grad.weights[layer].data[k];
        if (std::abs(g - fd) / std::max({1e-8, std::abs(fd), std::abs(g)}) > 1e-5) return false;
      }
  }

  // bifurcation gradient (grad_f2 in v) on ex4
  {
    const ProblemSpec spec = make_ex4_bvp();
    const MlpNetwork net = init_network({1, 7, 5}, Activation::sigmoid, 15);
    for (int trial = 0; trial < 20; ++trial) {
      Vector v(5);
      for (double& x : v) x = rng.uniform(-1.0, 1.0);
      const Vector p{rng.uniform(1.0, 12.0)};
      const auto [gp, gv] = grad_f2(net, spec, p, v, 1.0);
      for (std::size_t i = 0; i < 5; ++i) {
        const double fd = central_diff(
            [&](const Vector& vv) { return loss_f2(net, spec, p, vv, 1.0); }, v, i, 1e-5);
        if (std::abs(gv[i] - fd) / std::max({1e-6, std::abs(fd), std::abs(gv[i])}) > 1e-5)
          return false;
      }
    }
  }
  return true;
}

// (b) f2 nonnegativity and v-scale invariance, 1000 trials
bool prop_f2_invariances() {
  SplitMix64 rng(2002);
  const ProblemSpec ex2 = make_ex2_quadratic();
  const ProblemSpec ex4 = make_ex4_bvp();
  const MlpNetwork net2 = init_network({2, 8, 1}, Activation::sigmoid, 21);
  const MlpNetwork net4 = init_network({1, 8, 5}, Activation::relu, 22);
  for (int trial = 0; trial < 1000; ++trial) {
    const bool use4 = (trial % 2) == 0;
    const ProblemSpec& spec = use4 ? ex4 : ex2;
    const MlpNetwork& net = use4 ? net4 : net2;
    Vector p(spec.d);
    for (std::size_t k = 0; k < spec.d; ++k)
      p[k] = rng.uniform(spec.param_box[k][0], spec.param_box[k][1]);
    Vector v(spec.n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    if (norm2(v) < 1e-9) continue;
    const double f2 = loss_f2(net, spec, p, v, 1.0);
    if (!(f2 >= 0.0)) return false;
    for (double c : {-1.0, 0.1, 10.0}) {
      Vector scaled = v;
      for (double& x : scaled) x *= c;
      const double f2c = loss_f2(net, spec, p, scaled, 1.0);
      if (std::abs(f2c - f2) > 1e-9 * std::max(1.0, f2)) return false;
    }
  }
  return true;
}

// (c) Rayleigh bound of smallest_singular on 100 random matrices
bool prop_rayleigh() {
  SplitMix64 rng(3003);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.next_u64() % 10;
    DenseMatrix m(n, n);
    for (double& x : m.data) x = rng.uniform(-2.0, 2.0);
    const double sigma = smallest_singular(m).sigma_min;
    for (int j = 0; j < 100; ++j) {
      Vector v(n);
      for (double& x : v) x = rng.uniform(-1.0, 1.0);
      const double vv = dot(v, v);
      if (vv == 0.0) continue;
      const Vector mv = matvec(m, v);
      if (sigma * sigma > dot(mv, mv) / vv + 1e-10 * (1.0 + dot(mv, mv))) return false;
    }
  }
  return true;
}

// (d) oracle identities
bool prop_oracle_identities() {
  SplitMix64 rng(4004);
  for (int i = 0; i < 100; ++i) {
    const double b = rng.uniform(0.0, 2.0);
    const auto [c, d] = cubic_curve(b);
    if (std::abs(cubic_discriminant(b, c, d)) > 1e-12) return false;
  }
  const ProblemSpec spec = make_ex1_turning();
  Branch branch;
  for (double p = 2.0; p > 1e-8; p -= 0.004) branch.samples.push_back({{p}, {std::sqrt(p)}});
  const SigmaScan scan = sigma_min_scan(spec, branch);
  for (const ScanPoint& pt : scan.points) {
    const double expected = 2.0 * std::sqrt(pt.p);
    if (std::abs(pt.sigma_min - expected) > 1e-10 * std::max(1.0, expected)) return false;
  }
  return true;
}

// (e) datagen residual feasibility
bool prop_datagen_feasible() {
  const ProblemSpec ex1 = make_ex1_turning();
  for (const auto& s : gen_ex1(400, 6))
    if (norm_inf(residual(ex1, s.u, s.p)) > 1e-8) return false;
  const ProblemSpec ex2 = make_ex2_quadratic();
  for (const auto& s : gen_ex2(100, 5, 6))
    if (norm_inf(residual(ex2, s.u, s.p)) > 1e-8) return false;
  const ProblemSpec ex3 = make_ex3_cubic();
  for (const auto& s : gen_ex3(100, 4, 6))
    if (norm_inf(residual(ex3, s.u, s.p)) > 1e-8) return false;

  const ProblemSpec ex4 = make_ex4_bvp();
  Ex4Options opts;
  opts.points_per_branch = 120;
  for (const Branch& branch : gen_ex4_branches(6, opts))
    for (const auto& s : branch.samples)
      if (norm_inf(residual(ex4, s.u, s.p)) > 1e-8) return false;

  const auto data5 = gen_ex5(2.0 / 3.0, 50.0, 60, 6);
  const ProblemSpec ex5 = make_ex5_schnakenberg();
  for (const auto& s : data5)
    if (norm_inf(residual(ex5, s.u, s.p)) > 1e-8) return false;
  return true;
}

// (f) analytic vs numeric jac_u for all five problems
bool prop_jacobians() {
  SplitMix64 rng(5005);
  const std::vector<ProblemSpec> specs{make_ex1_turning(), make_ex2_quadratic(), make_ex3_cubic(),
                                       make_ex4_bvp(), make_ex5_schnakenberg()};
  for (const ProblemSpec& spec : specs) {
    for (int t = 0; t < 5; ++t) {
      Vector u(spec.n);
      for (double& x : u) x = rng.uniform(-1.0, 1.0);
      Vector p(spec.d);
      for (std::size_t k = 0; k < spec.d; ++k)
        p[k] = rng.uniform(spec.param_box[k][0], spec.param_box[k][1]);
      const DenseMatrix analytic = jac_u(spec, u, p);
      for (std::size_t j = 0; j < spec.n; ++j) {
        const double h = fd_step(u[j]);
        Vector up = u, um = u;
        up[j] += h;
        um[j] -= h;
        const Vector fp = residual(spec, up, p);
        const Vector fm = residual(spec, um, p);
        for (std::size_t i = 0; i < spec.n; ++i) {
          const double fd = (fp[i] - fm[i]) / (2.0 * h);
          const double a = analytic(i, j);
          if (std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)}) > 1e-6) return false;
        }
      }
    }
  }
  return true;
}

void criterion_properties() {
  const bool a = prop_gradients();
  const bool b = prop_f2_invariances();
  const bool c = prop_rayleigh();
  const bool d = prop_oracle_identities();
  const bool e = prop_datagen_feasible();
  const bool f = prop_jacobians();
  const bool pass = a && b && c && d && e && f;
  std::string detail;
  detail += std::string("gradients=") + (a ? "ok" : "FAIL");
  detail += std::string(" f2-invariances=") + (b ? "ok" : "FAIL");
  detail += std::string(" rayleigh=") + (c ? "ok" : "FAIL");
  detail += std::string(" oracle-identities=") + (d ? "ok" : "FAIL");
  detail += std::string(" datagen-feasible=") + (e ? "ok" : "FAIL");
  detail += std::string(" jacobians=") + (f ? "ok" : "FAIL");
  report(7, "property suite", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
  fs::path out_root = fs::temp_directory_path() / "bifurc_acceptance";
  for (int i = 1; i + 1 < argc; i += 2)
    if (std::string(argv[i]) == "--out") out_root = argv[i + 1];
  fs::create_directories(out_root);
  std::printf("acceptance artifacts under %s\n", out_root.string().c_str());

  criterion_properties();
  criteria_ex1(out_root);
  criterion_ex2(out_root);
  criterion_ex3(out_root);
  criterion_ex4(out_root);
  criterion_ex5(out_root);

  if (g_failures == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  return 1;
}
