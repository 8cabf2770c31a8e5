#include "bifurc/bifurcation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "bifurc/errors.hpp"
#include "bifurc/rng.hpp"

namespace bifurc {

namespace {

void check_search_dims(const MlpNetwork& net, const ProblemSpec& spec, const Vector& p,
                       const Vector& v) {
  if (net.input_dim() != spec.d || net.output_dim() != spec.n)
    throw dimension_error("bifurcation: network shape does not match the problem");
  if (p.size() != spec.d) throw dimension_error("bifurcation: parameter vector has wrong length");
  if (v.size() != spec.n) throw dimension_error("bifurcation: direction vector has wrong length");
}

double f2_at(const MlpNetwork& net, const ProblemSpec& spec, const Vector& p, const Vector& v,
             double lambda, double v_norm2) {
  const Vector u = forward(net, p);
  const DenseMatrix ju = spec.jac_u_fn(u, p);
  const Vector jv = matvec(ju, v);
  const Vector res = spec.residual_fn(u, p);
  return dot(jv, jv) / v_norm2 + 0.5 * lambda * dot(res, res);
}

}  // namespace

double loss_f2(const MlpNetwork& net, const ProblemSpec& spec, const Vector& p, const Vector& v,
               double lambda) {
  check_search_dims(net, spec, p, v);
  const double vv = dot(v, v);
  if (vv == 0.0) throw argument_error("loss_f2: v must be nonzero");
  return f2_at(net, spec, p, v, lambda, vv);
}

std::pair<Vector, Vector> grad_f2(const MlpNetwork& net, const ProblemSpec& spec, const Vector& p,
                                  const Vector& v, double lambda) {
  check_search_dims(net, spec, p, v);
  const double vv = dot(v, v);
  if (vv == 0.0) throw argument_error("grad_f2: v must be nonzero");

  // analytic v-gradient: 2(Av − R v)/‖v‖², A = F_uᵀF_u
  const Vector u = forward(net, p);
  const DenseMatrix ju = spec.jac_u_fn(u, p);
  const Vector jv = matvec(ju, v);
  const Vector av = matvec_t(ju, jv);
  const double rayleigh = dot(jv, jv) / vv;
  Vector gv(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) gv[i] = 2.0 * (av[i] - rayleigh * v[i]) / vv;

  // p-gradient by central differences of the full objective
  Vector gp(p.size(), 0.0);
  Vector pt = p;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double h = fd_step(p[k]);
    const double saved = pt[k];
    pt[k] = saved + h;
    const double fp = f2_at(net, spec, pt, v, lambda, vv);
    pt[k] = saved - h;
    const double fm = f2_at(net, spec, pt, v, lambda, vv);
    pt[k] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw nonfinite_error("grad_f2: non-finite objective in finite difference");
    gp[k] = (fp - fm) / (2.0 * h);
  }
  return {std::move(gp), std::move(gv)};
}

namespace {

struct SearchState {
  Vector p;
  Vector v;
  double f2 = std::numeric_limits<double>::infinity();
};

// Adam on the concatenated (p, v) with per-iteration projection of p onto
// the box, renormalization of v, and pinning of frozen coordinates.
SearchState run_restart(const MlpNetwork& net, const ProblemSpec& spec,
                        const SearchConfig& config,
                        const std::vector<std::array<double, 2>>& box,
                        const std::vector<bool>& is_frozen, Vector p0, Vector v0) {
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double eps = 1e-8;

  Vector p = std::move(p0);
  Vector v = std::move(v0);
  Vector mp(p.size(), 0.0), vp(p.size(), 0.0);
  Vector mv(v.size(), 0.0), vv_state(v.size(), 0.0);

  SearchState best;
  for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
    double f2;
    Vector gp, gv;
    try {
      f2 = loss_f2(net, spec, p, v, config.lambda);
      std::tie(gp, gv) = grad_f2(net, spec, p, v, config.lambda);
    } catch (const nonfinite_error&) {
      break;
    }
    if (!std::isfinite(f2)) break;
    if (f2 < best.f2) best = {p, v, f2};

    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(iter + 1));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(iter + 1));
    auto adam = [&](double& x, double& m, double& s, double g) {
      m = beta1 * m + (1.0 - beta1) * g;
      s = beta2 * s + (1.0 - beta2) * g * g;
      x -= config.learning_rate * (m / bc1) / (std::sqrt(s / bc2) + eps);
    };
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (is_frozen[k]) continue;
      adam(p[k], mp[k], vp[k], gp[k]);
      p[k] = std::clamp(p[k], box[k][0], box[k][1]);
    }
    for (std::size_t i = 0; i < v.size(); ++i) adam(v[i], mv[i], vv_state[i], gv[i]);
    const double nv = norm2(v);
    if (nv < 1e-14) {
      v = best.v;  // descent collapsed the direction; fall back
    } else {
      for (double& x : v) x /= nv;
    }
  }

  // final iterate may beat the best recorded one
  try {
    const double f2 = loss_f2(net, spec, p, v, config.lambda);
    if (std::isfinite(f2) && f2 < best.f2) best = {std::move(p), std::move(v), f2};
  } catch (const nonfinite_error&) {
  }
  return best;
}

}  // namespace

BifurcationResult find_bifurcation(const MlpNetwork& net, const ProblemSpec& spec,
                                   const SearchConfig& config, const FrozenCoords& frozen) {
  if (config.restarts < 1) throw argument_error("find_bifurcation: restarts must be >= 1");
  if (config.tol_f2 <= 0.0) throw argument_error("find_bifurcation: tol_f2 must be positive");

  std::vector<std::array<double, 2>> box = config.p_box.empty() ? spec.param_box : config.p_box;
  if (box.size() != spec.d) throw dimension_error("find_bifurcation: box size mismatch");

  std::vector<bool> is_frozen(spec.d, false);
  Vector frozen_value(spec.d, 0.0);
  for (const auto& [k, value] : frozen) {
    if (k >= spec.d) throw dimension_error("find_bifurcation: frozen index out of range");
    is_frozen[k] = true;
    frozen_value[k] = value;
  }

  SearchState global;
  std::size_t global_restart = 0;
  for (std::size_t r = 0; r < config.restarts; ++r) {
    SplitMix64 rng(config.seed + r);
    Vector p0(spec.d, 0.0);
    for (std::size_t k = 0; k < spec.d; ++k)
      p0[k] = is_frozen[k] ? frozen_value[k] : rng.uniform(box[k][0], box[k][1]);

    Vector v0;
    try {
      const Vector u0 = forward(net, p0);
      v0 = smallest_singular(spec.jac_u_fn(u0, p0)).right_vector;
    } catch (const std::exception&) {
      v0.assign(spec.n, 0.0);
      for (double& x : v0) x = rng.uniform(-1.0, 1.0);
      const double nv = norm2(v0);
      if (nv > 0.0)
        for (double& x : v0) x /= nv;
      else
        v0[0] = 1.0;
    }

    const SearchState state = run_restart(net, spec, config, box, is_frozen, p0, v0);
    if (state.f2 < global.f2) {
      global = state;
      global_restart = r;
    }
  }
  if (!std::isfinite(global.f2))
    throw search_error("find_bifurcation: all restarts produced non-finite objectives");

  BifurcationResult result;
  result.p_star = global.p;
  result.v_star = global.v;
  result.f2_value = global.f2;
  result.restart_index = global_restart;
  result.converged = global.f2 <= config.tol_f2;
  const Vector u = forward(net, result.p_star);
  result.sigma_min_at_p = smallest_singular(spec.jac_u_fn(u, result.p_star)).sigma_min;
  result.residual_norm = norm2(spec.residual_fn(u, result.p_star));
  return result;
}

std::vector<BifurcationResult> sweep_bifurcation(const MlpNetwork& net, const ProblemSpec& spec,
                                                 const std::vector<FrozenCoords>& grid,
                                                 const SearchConfig& config, int threads) {
  std::vector<BifurcationResult> results(grid.size());
  auto run_node = [&](std::size_t i) {
    try {
      results[i] = find_bifurcation(net, spec, config, grid[i]);
    } catch (const std::exception&) {
      results[i].f2_value = std::numeric_limits<double>::infinity();
      results[i].converged = false;
      results[i].p_star.assign(spec.d, std::numeric_limits<double>::quiet_NaN());
      for (const auto& [k, value] : grid[i])
        if (k < spec.d) results[i].p_star[k] = value;
      results[i].v_star.assign(spec.n, 0.0);
    }
  };

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(grid.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) run_node(i);
  } else {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = cursor.fetch_add(1); i < grid.size(); i = cursor.fetch_add(1))
          run_node(i);
      });
    for (std::thread& t : pool) t.join();
  }
  return results;
}

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<BifurcationResult>& results, std::size_t param_dim,
                       std::size_t solution_dim, const std::string& manifest) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_results_csv: cannot open " + path.string());
  if (!manifest.empty()) out << "# " << manifest << "\n";
  for (std::size_t k = 0; k < param_dim; ++k) out << "p" << k << ",";
  for (std::size_t i = 0; i < solution_dim; ++i) out << "v" << i << ",";
  out << "f2,sigma_min,residual_norm,restart_index,converged\n";
  out.precision(17);
  for (const BifurcationResult& r : results) {
    for (std::size_t k = 0; k < param_dim; ++k)
      out << (k < r.p_star.size() ? r.p_star[k] : std::numeric_limits<double>::quiet_NaN()) << ",";
    for (std::size_t i = 0; i < solution_dim; ++i)
      out << (i < r.v_star.size() ? r.v_star[i] : 0.0) << ",";
    out << r.f2_value << "," << r.sigma_min_at_p << "," << r.residual_norm << ","
        << r.restart_index << "," << (r.converged ? 1 : 0) << "\n";
  }
}

}  // namespace bifurc
