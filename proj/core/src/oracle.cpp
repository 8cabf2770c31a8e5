#include "bifurc/oracle.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "bifurc/errors.hpp"
#include "json.hpp"

namespace bifurc {

double quadratic_curve(double b) { return b * b / 4.0; }

std::pair<double, double> cubic_curve(double b) { return {b * b / 3.0, b * b * b / 27.0}; }

double cubic_discriminant(double b, double c, double d) {
  const double q = b * c / 6.0 - b * b * b / 27.0 - d / 2.0;
  const double r = c / 3.0 - b * b / 9.0;
  return q * q + r * r * r;
}

SigmaScan sigma_min_scan(const ProblemSpec& spec, const Branch& branch, std::size_t param_index) {
  if (branch.samples.empty()) throw argument_error("sigma_min_scan: empty branch");
  if (param_index >= spec.d) throw dimension_error("sigma_min_scan: parameter index out of range");

  SigmaScan scan;
  scan.points.reserve(branch.samples.size());
  for (const SolutionSample& s : branch.samples) {
    const double sigma = smallest_singular(jac_u(spec, s.u, s.p)).sigma_min;
    scan.points.push_back({s.p[param_index], sigma});
  }

  const auto& pts = scan.points;
  const std::size_t n = pts.size();

  // Interior minima: vertex of the parabola through three neighbours.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(pts[i].sigma_min < pts[i - 1].sigma_min && pts[i].sigma_min <= pts[i + 1].sigma_min))
      continue;
    const double x0 = pts[i - 1].p, x1 = pts[i].p, x2 = pts[i + 1].p;
    const double y0 = pts[i - 1].sigma_min, y1 = pts[i].sigma_min, y2 = pts[i + 1].sigma_min;
    const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    FoldEstimate fold;
    if (denom != 0.0) {
      const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
      const double bq = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
      fold.p_star = (a != 0.0) ? -bq / (2.0 * a) : x1;
    } else {
      fold.p_star = x1;
    }
    fold.bracket_lo = std::min(x0, x2);
    fold.bracket_hi = std::max(x0, x2);
    fold.truncated = false;
    scan.folds.push_back(fold);
  }

  // Endpoint minimum (branch truncated at the fold): σ² is asymptotically
  // linear in p near a quadratic fold, so extrapolate it to zero.
  if (n >= 2) {
    const bool at_back = pts.back().sigma_min < pts.front().sigma_min;
    const ScanPoint& end = at_back ? pts[n - 1] : pts[0];
    const ScanPoint& prev = at_back ? pts[n - 2] : pts[1];
    const bool is_min = at_back ? (pts[n - 1].sigma_min < pts[n - 2].sigma_min)
                                : (pts[0].sigma_min < pts[1].sigma_min);
    if (is_min) {
      const double s2e = end.sigma_min * end.sigma_min;
      const double s2p = prev.sigma_min * prev.sigma_min;
      FoldEstimate fold;
      if (s2p > s2e) {
        fold.p_star = end.p - s2e * (prev.p - end.p) / (s2p - s2e);
      } else {
        fold.p_star = end.p;
      }
      fold.bracket_lo = std::min(fold.p_star, end.p);
      fold.bracket_hi = std::max(fold.p_star, end.p);
      fold.truncated = true;
      scan.folds.push_back(fold);
    }
  }
  return scan;
}

std::optional<TuringPoint> schnakenberg_turing(double a, double b, double eta, double h) {
  if (a + b <= 0.0) throw argument_error("schnakenberg_turing: a + b must be positive");
  const double u = a + b;
  const double fu = 2.0 * b / u - 1.0;  // ∂(a−u+u²v)/∂u at the constant state
  const double fv = u * u;
  const double gu = -2.0 * b / u;
  const double gv = -u * u;

  const int kmax = static_cast<int>(std::lround(1.0 / h));
  std::optional<TuringPoint> best;
  for (int k = 1; k <= kmax; ++k) {
    const double mu = (2.0 - 2.0 * std::cos(k * std::numbers::pi * h)) / (h * h);
    const double alpha = -mu + eta * fu;
    if (alpha == 0.0) continue;
    // det = α(−dμ + ηg_v) − η²f_v g_u = 0, linear in d
    const double d = (alpha * eta * gv - eta * eta * fv * gu) / (alpha * mu);
    if (d > 0.0 && (!best || d < best->d_star)) best = TuringPoint{d, k};
  }
  return best;
}

std::optional<double> schnakenberg_dstar(double a, double b, double eta, double h) {
  const auto t = schnakenberg_turing(a, b, eta, h);
  if (!t) return std::nullopt;
  return t->d_star;
}

std::pair<double, double> schnakenberg_mode_tangent(double a, double b, double eta, double mu_k,
                                                    double d) {
  (void)d;  // the u-equation row of the null vector does not involve d
  const double u = a + b;
  const double fu = 2.0 * b / u - 1.0;
  const double fv = u * u;
  // (−μ + ηf_u)φ + ηf_v ψ = 0 with φ = 1
  const double psi = -(-mu_k + eta * fu) / (eta * fv);
  return {1.0, psi};
}

double curve_error(const OracleCurve& approx, const OracleCurve& exact) {
  if (approx.grid.size() != exact.grid.size() || approx.grid.size() != approx.values.size() ||
      exact.grid.size() != exact.values.size())
    throw argument_error("curve_error: size mismatch");
  if (approx.grid.size() < 2) throw argument_error("curve_error: need at least two grid nodes");
  for (std::size_t i = 0; i < approx.grid.size(); ++i)
    if (std::abs(approx.grid[i] - exact.grid[i]) > 1e-12)
      throw argument_error("curve_error: grids differ");

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < approx.grid.size(); ++i) {
    const double e0 = std::abs(approx.values[i] - exact.values[i]);
    const double e1 = std::abs(approx.values[i + 1] - exact.values[i + 1]);
    total += 0.5 * (e0 + e1) * (approx.grid[i + 1] - approx.grid[i]);
  }
  return total;
}

OracleFixture make_reference_fixture() {
  OracleFixture fixture;
  fixture.version = 1;
  fixture.generated = "2026-08-10";
  fixture.args_json = "{\"ex4\":{\"p_high\":12.0,\"trace_step\":0.01},"
                      "\"ex5\":{\"a\":0.3333333333333333,\"b\":0.6666666666666666,\"eta\":50.0}}";

  // ex4: trace the four branches (coarse resampling is enough for the scan)
  Ex4Options opts;
  opts.points_per_branch = 400;
  const ProblemSpec spec = make_ex4_bvp();
  for (const Branch& branch : gen_ex4_branches(0, opts)) {
    const SigmaScan scan = sigma_min_scan(spec, branch);
    if (scan.folds.empty())
      throw generation_error("make_reference_fixture: no fold on " + branch.label);
    // the fold terminating the trace is the truncated estimate
    double p_star = scan.folds.back().p_star;
    for (const FoldEstimate& f : scan.folds)
      if (f.truncated) p_star = f.p_star;
    fixture.ex4_folds.push_back(p_star);
    fixture.ex4_branch_labels.push_back(branch.label);
  }

  fixture.ex5_params = SchnakenbergParams{};
  const auto t = schnakenberg_turing(fixture.ex5_params.a, fixture.ex5_params.b,
                                     fixture.ex5_params.eta, kEx5Step);
  if (!t) throw generation_error("make_reference_fixture: no ex5 Turing point");
  fixture.ex5_dstar = t->d_star;
  return fixture;
}

void save_fixture(const OracleFixture& fixture, const std::filesystem::path& path) {
  nlohmann::json j;
  j["version"] = fixture.version;
  j["generated"] = fixture.generated;
  j["args"] = nlohmann::json::parse(fixture.args_json);
  j["ex4_folds"] = fixture.ex4_folds;
  j["ex4_branch_labels"] = fixture.ex4_branch_labels;
  j["ex5_dstar"] = fixture.ex5_dstar;
  j["ex5_params"] = {{"a", fixture.ex5_params.a},
                     {"b", fixture.ex5_params.b},
                     {"eta", fixture.ex5_params.eta}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_fixture: cannot open " + path.string());
  out << j.dump(1) << "\n";
}

OracleFixture load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("load_fixture: cannot open " + path.string(), "file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("load_fixture: invalid JSON: ") + e.what(), "document");
  }
  OracleFixture fixture;
  try {
    fixture.version = j.at("version").get<int>();
    fixture.generated = j.at("generated").get<std::string>();
    fixture.args_json = j.value("args", nlohmann::json::object()).dump();
    fixture.ex4_folds = j.at("ex4_folds").get<std::vector<double>>();
    fixture.ex4_branch_labels = j.at("ex4_branch_labels").get<std::vector<std::string>>();
    fixture.ex5_dstar = j.at("ex5_dstar").get<double>();
    fixture.ex5_params.a = j.at("ex5_params").at("a").get<double>();
    fixture.ex5_params.b = j.at("ex5_params").at("b").get<double>();
    fixture.ex5_params.eta = j.at("ex5_params").at("eta").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("load_fixture: bad field contents: ") + e.what(), "fixture");
  }
  return fixture;
}

}  // namespace bifurc
