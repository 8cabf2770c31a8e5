#include "bifurc/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "bifurc/errors.hpp"
#include "bifurc/oracle.hpp"
#include "bifurc/rng.hpp"
#include "json.hpp"

namespace bifurc {

std::vector<SolutionSample> gen_ex1(std::size_t count, std::uint64_t seed) {
  if (count < 1) throw argument_error("gen_ex1: count must be >= 1");
  SplitMix64 rng(seed);
  std::vector<SolutionSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double p = rng.uniform(0.0, 2.0);
    out.push_back({{p}, {std::sqrt(p)}});
  }
  return out;
}

std::vector<SolutionSample> gen_ex2(std::size_t n_b, std::size_t reps, std::uint64_t seed) {
  if (n_b < 1 || reps < 1) throw argument_error("gen_ex2: counts must be >= 1");
  SplitMix64 rng(seed);
  std::vector<SolutionSample> out;
  out.reserve(n_b * reps);
  for (std::size_t i = 0; i < n_b; ++i) {
    const double b = rng.uniform(-2.0, 2.0);
    for (std::size_t r = 0; r < reps; ++r) {
      const double c = rng.uniform(b * b / 8.0, b * b / 4.0);
      const double disc = std::max(0.0, b * b - 4.0 * c);
      const double u = (-b + std::sqrt(disc)) / 2.0;
      out.push_back({{b, c}, {u}});
    }
  }
  return out;
}

std::vector<SolutionSample> gen_ex3(std::size_t n_b, std::size_t reps, std::uint64_t seed) {
  if (n_b < 1 || reps < 1) throw argument_error("gen_ex3: counts must be >= 1");
  SplitMix64 rng(seed);
  std::vector<SolutionSample> out;
  out.reserve(n_b * reps);
  for (std::size_t i = 0; i < n_b; ++i) {
    const double b = rng.uniform(0.0, 2.0);
    for (std::size_t r = 0; r < reps; ++r) {
      const double c = rng.uniform(0.0, b * b / 3.0);
      // On the vanishing-discriminant sheet: (bc/6 − b³/27 − d/2)² = (b²/9 − c/3)³.
      const double rad = std::max(0.0, b * b / 9.0 - c / 3.0);
      const double d = b * c / 3.0 - 2.0 * b * b * b / 27.0 - 2.0 * std::pow(rad, 1.5);
      const double u = -b / 3.0 + 2.0 * std::sqrt(rad);
      out.push_back({{b, c, d}, {u}});
    }
  }
  return out;
}

namespace {

Vector newton_at(const ProblemSpec& spec, const Vector& p, Vector u0, double tol,
                 std::size_t max_iter) {
  return newton_solve([&](const Vector& u) { return spec.residual_fn(u, p); },
                      [&](const Vector& u) { return spec.jac_u_fn(u, p); }, std::move(u0), tol,
                      max_iter);
}

}  // namespace

Branch trace_branch(const ProblemSpec& spec, SolutionSample start, std::size_t param_index,
                    const TraceOptions& opts) {
  if (param_index >= spec.d) throw dimension_error("trace_branch: parameter index out of range");
  if (opts.step <= 0.0) throw argument_error("trace_branch: step must be positive");
  if (opts.direction != 1 && opts.direction != -1)
    throw argument_error("trace_branch: direction must be ±1");

  Branch branch;
  try {
    start.u = newton_at(spec, start.p, start.u, opts.newton_tol, opts.newton_max_iter);
  } catch (const convergence_error& e) {
    throw generation_error("trace_branch: start point does not converge (residual " +
                           std::to_string(e.residual_norm) + ")");
  }
  branch.samples.push_back(start);
  branch.stop_reason = "max_steps";

  auto sigma_at = [&](const SolutionSample& s) {
    return smallest_singular(spec.jac_u_fn(s.u, s.p)).sigma_min;
  };
  if (opts.fold_tol > 0.0 && sigma_at(start) < opts.fold_tol) {
    branch.stop_reason = "fold";
    return branch;
  }

  double step = opts.step;
  const double min_step = opts.step * opts.min_step_factor;
  std::size_t taken = 0;
  while (taken < opts.max_steps) {
    const SolutionSample& prev = branch.samples.back();
    Vector p_next = prev.p;
    p_next[param_index] += opts.direction * step;

    bool ok = false;
    Vector u_next;
    try {
      u_next = newton_at(spec, p_next, prev.u, opts.newton_tol, opts.newton_max_iter);
      ok = true;
    } catch (const convergence_error&) {
    } catch (const nonfinite_error&) {
    }

    if (ok) {
      double jump = 0.0;
      for (std::size_t i = 0; i < u_next.size(); ++i)
        jump = std::max(jump, std::abs(u_next[i] - prev.u[i]));
      if (jump > opts.jump_tol) {
        // treat an over-large move like a failed step: refine toward the obstacle
        ok = false;
      } else {
        SolutionSample next{std::move(p_next), std::move(u_next)};
        const double sigma = sigma_at(next);
        branch.samples.push_back(std::move(next));
        ++taken;
        if (opts.fold_tol > 0.0 && sigma < opts.fold_tol) {
          branch.stop_reason = "fold";
          return branch;
        }
        continue;
      }
    }

    step *= 0.5;
    if (step < min_step) {
      branch.stop_reason = "fold";
      return branch;
    }
  }
  return branch;
}

// ---- ex4 branch hunting ------------------------------------------------------

namespace {

Vector ex4_cosine_bump(double amplitude) {
  Vector u(kEx4Unknowns, 0.0);
  for (std::size_t i = 0; i < kEx4Unknowns; ++i) {
    const double x = static_cast<double>(i) * kEx4Step;
    u[i] = amplitude * std::cos(std::numbers::pi * x / 2.0);
  }
  return u;
}

double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Uniform-in-arclength resampling of a traced branch, Newton-correcting each
// interpolated point back onto the solution manifold at its interpolated p.
std::vector<SolutionSample> resample_branch(const ProblemSpec& spec,
                                            const std::vector<SolutionSample>& nodes,
                                            std::size_t count, std::size_t param_index) {
  if (nodes.size() < 2) throw generation_error("resample_branch: need at least two nodes");
  std::vector<double> s(nodes.size(), 0.0);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    double seg = 0.0;
    const double dp = nodes[i].p[param_index] - nodes[i - 1].p[param_index];
    seg += dp * dp;
    for (std::size_t j = 0; j < nodes[i].u.size(); ++j) {
      const double du = nodes[i].u[j] - nodes[i - 1].u[j];
      seg += du * du;
    }
    s[i] = s[i - 1] + std::sqrt(seg);
  }
  const double total = s.back();

  std::vector<SolutionSample> out;
  out.reserve(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(count - 1);
    while (seg + 2 < s.size() && s[seg + 1] < target) ++seg;
    const double t = (s[seg + 1] > s[seg]) ? (target - s[seg]) / (s[seg + 1] - s[seg]) : 0.0;

    SolutionSample sample;
    sample.p = nodes[seg].p;
    sample.p[param_index] = (1.0 - t) * nodes[seg].p[param_index] +
                            t * nodes[seg + 1].p[param_index];
    sample.u.resize(nodes[seg].u.size());
    for (std::size_t j = 0; j < sample.u.size(); ++j)
      sample.u[j] = (1.0 - t) * nodes[seg].u[j] + t * nodes[seg + 1].u[j];
    try {
      sample.u = newton_at(spec, sample.p, sample.u, 1e-10, 30);
    } catch (const convergence_error&) {
      // keep the nearest traced node rather than an off-manifold interpolant
      sample = (t < 0.5) ? nodes[seg] : nodes[seg + 1];
    }
    out.push_back(std::move(sample));
  }
  return out;
}

}  // namespace

std::vector<Branch> gen_ex4_branches(std::uint64_t seed, const Ex4Options& opts) {
  (void)seed;  // hunting and resampling are fully deterministic; seed is recorded only
  const ProblemSpec spec = make_ex4_bvp();
  const Vector p_high{opts.p_high};

  // Hunt distinct solutions at p_high from cosine bumps of increasing size.
  std::vector<Vector> roots;
  for (std::size_t i = 0; i < opts.amplitude_count; ++i) {
    const double amp = opts.amplitude_lo +
                       (opts.amplitude_hi - opts.amplitude_lo) * static_cast<double>(i) /
                           static_cast<double>(opts.amplitude_count - 1);
    Vector u;
    try {
      u = newton_at(spec, p_high, ex4_cosine_bump(amp), 1e-10, 80);
    } catch (const convergence_error&) {
      continue;
    }
    if (norm_inf(u) < 1e-6) continue;  // trivial branch
    bool known = false;
    for (const Vector& r : roots)
      if (max_abs_diff(r, u) <= opts.dedupe_tol) {
        known = true;
        break;
      }
    if (!known) roots.push_back(std::move(u));
  }

  std::sort(roots.begin(), roots.end(),
            [](const Vector& a, const Vector& b) { return norm_inf(a) < norm_inf(b); });
  if (roots.size() < 4) {
    std::string msg = "gen_ex4_branches: found " + std::to_string(roots.size()) +
                      " nontrivial branches at p = " + std::to_string(opts.p_high) + ":";
    for (const Vector& r : roots) msg += " |u|=" + std::to_string(norm_inf(r));
    throw generation_error(msg);
  }
  roots.resize(4);

  std::vector<Branch> branches;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    TraceOptions topts;
    topts.step = opts.trace_step;
    topts.direction = -1;
    topts.max_steps = static_cast<std::size_t>(opts.p_high / opts.trace_step) + 10;
    topts.fold_tol = 1e-4;
    topts.jump_tol = opts.jump_tol;
    Branch b = trace_branch(spec, {p_high, roots[i]}, 0, topts);
    if (b.stop_reason != "fold")
      throw generation_error("gen_ex4_branches: " + b.label + " trace did not end at a fold (" +
                             b.stop_reason + ")");
    b.samples = resample_branch(spec, b.samples, opts.points_per_branch, 0);
    b.label = "branch" + std::to_string(i + 1);
    branches.push_back(std::move(b));
  }
  return branches;
}

// ---- ex5 pattern branch --------------------------------------------------------

std::vector<SolutionSample> gen_ex5(double b, double eta, std::size_t count, std::uint64_t seed,
                                    const Ex5Options& opts) {
  (void)seed;  // continuation is deterministic; seed is recorded only
  if (count < 2) throw argument_error("gen_ex5: count must be >= 2");
  const auto turing = schnakenberg_turing(opts.a, b, eta, kEx5Step);
  if (!turing)
    throw generation_error("gen_ex5: no Turing point for (a,b,eta) = (" + std::to_string(opts.a) +
                           "," + std::to_string(b) + "," + std::to_string(eta) + ")");
  const double d_star = turing->d_star;
  const double span = opts.step * static_cast<double>(count - 1);
  const double d_anchor = d_star + opts.anchor_fraction * span;

  SchnakenbergParams params{opts.a, b, eta};
  const ProblemSpec spec =
      make_ex5_schnakenberg(params, {d_star - span, d_star + span});

  const Vector constant = schnakenberg_constant_state(opts.a, b);
  const double mu_k = (2.0 - 2.0 * std::cos(turing->mode * std::numbers::pi * kEx5Step)) /
                      (kEx5Step * kEx5Step);
  const auto [phi, psi] = schnakenberg_mode_tangent(opts.a, b, eta, mu_k, d_anchor);

  // Anchor on the pattern branch; grow the perturbation until Newton stops
  // falling back onto the constant state.
  Vector anchor;
  bool anchored = false;
  for (double amp = opts.initial_amplitude; amp <= 100.0 * opts.initial_amplitude; amp *= 2.0) {
    Vector w = constant;
    for (std::size_t i = 0; i < kEx5Nodes; ++i) {
      const double mode = std::cos(turing->mode * std::numbers::pi * (i * kEx5Step));
      w[i] += amp * phi * mode;
      w[kEx5Nodes + i] += amp * psi * mode;
    }
    try {
      w = newton_at(spec, {d_anchor}, std::move(w), 1e-10, 80);
    } catch (const convergence_error&) {
      continue;
    }
    if (max_abs_diff(w, constant) > 1e-4) {
      anchor = std::move(w);
      anchored = true;
      break;
    }
  }
  if (!anchored)
    throw generation_error("gen_ex5: could not anchor the pattern branch at d = " +
                           std::to_string(d_anchor));

  TraceOptions topts;
  topts.step = opts.step;
  topts.direction = -1;
  topts.max_steps = count - 1;
  topts.fold_tol = 0.0;  // the trace must pass through the pitchfork
  topts.jump_tol = 1.0;
  topts.newton_tol = 1e-9;
  topts.newton_max_iter = 80;
  topts.min_step_factor = 1e-3;  // no fold expected; bail out fast if stuck
  Branch branch = trace_branch(spec, {{d_anchor}, anchor}, 0, topts);
  if (branch.samples.size() != count)
    throw generation_error("gen_ex5: continuation stopped after " +
                           std::to_string(branch.samples.size()) + " of " + std::to_string(count) +
                           " samples (" + branch.stop_reason + ")");
  return std::move(branch.samples);
}

// ---- dataset files --------------------------------------------------------------

void save_dataset(const std::filesystem::path& path, const DatasetHeader& header,
                  const std::vector<SolutionSample>& samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path.string());
  nlohmann::json h;
  h["problem"] = header.problem;
  h["seed"] = header.seed;
  h["args"] = nlohmann::json::parse(header.args_json);
  out << h.dump() << "\n";
  for (const SolutionSample& s : samples) {
    nlohmann::json row;
    row["p"] = s.p;
    row["u"] = s.u;
    out << row.dump() << "\n";
  }
}

std::pair<DatasetHeader, std::vector<SolutionSample>> load_dataset(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("load_dataset: cannot open " + path.string(), "file");
  std::string line;
  if (!std::getline(in, line)) throw parse_error("load_dataset: empty file", "header");

  DatasetHeader header;
  try {
    const nlohmann::json h = nlohmann::json::parse(line);
    header.problem = h.at("problem").get<std::string>();
    header.seed = h.at("seed").get<std::uint64_t>();
    header.args_json = h.value("args", nlohmann::json::object()).dump();
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("load_dataset: bad header: ") + e.what(), "header");
  }

  std::vector<SolutionSample> samples;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const nlohmann::json row = nlohmann::json::parse(line);
      SolutionSample s;
      s.p = row.at("p").get<Vector>();
      s.u = row.at("u").get<Vector>();
      samples.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw parse_error("load_dataset: bad record on line " + std::to_string(lineno) + ": " +
                            e.what(),
                        "p/u");
    }
  }
  return {header, samples};
}

}  // namespace bifurc
