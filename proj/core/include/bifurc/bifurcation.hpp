#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "bifurc/network.hpp"
#include "bifurc/problems.hpp"

namespace bifurc {

struct SearchConfig {
  double lambda = 1.0;       // residual weight (defaults to the training λ)
  std::size_t restarts = 16;
  std::size_t max_iters = 5000;
  double learning_rate = 1e-2;
  /// Search box for p; empty means the problem's parameter box. The
  /// surrogate is only trustworthy over the data it was trained on, so
  /// callers with a dataset at hand should pass its p-range here. Iterates
  /// are projected onto the box (a bifurcation may sit on its boundary).
  std::vector<std::array<double, 2>> p_box;
  double tol_f2 = 1e-6;
  std::uint64_t seed = 0;
};

struct BifurcationResult {
  Vector p_star;
  Vector v_star;  // unit 2-norm
  double f2_value = 0.0;
  double sigma_min_at_p = 0.0;  // σ_min(F_u(u_N(p*), p*))
  double residual_norm = 0.0;   // ‖F(u_N(p*), p*)‖₂
  std::size_t restart_index = 0;
  bool converged = false;
};

/// Coordinates pinned during a search (excluded from descent), as
/// (parameter index, value) pairs.
using FrozenCoords = std::vector<std::pair<std::size_t, double>>;

/// Stage-2 objective with the trained network frozen:
/// f2(p, v) = vᵀF_uᵀF_u v / vᵀv + (λ/2)‖F(u_N(p), p)‖² at u = u_N(p).
/// Scale-invariant in v; throws argument_error for v = 0.
double loss_f2(const MlpNetwork& net, const ProblemSpec& spec, const Vector& p, const Vector& v,
               double lambda);

/// (∇_p f2, ∇_v f2). The v-gradient is analytic, 2(Av − R·v)/‖v‖² with
/// A = F_uᵀF_u and R the Rayleigh term; the p-gradient is a central
/// difference of p ↦ f2 holding v fixed, which transparently includes the
/// chain through u_N(p).
std::pair<Vector, Vector> grad_f2(const MlpNetwork& net, const ProblemSpec& spec, const Vector& p,
                                  const Vector& v, double lambda);

/// Multi-restart Adam descent on (p, v): p₀ uniform in the box, v₀ the right
/// singular vector of F_u at p₀; v renormalized and p projected onto the box
/// every iteration; best iterate per restart, best restart wins.
/// converged = (f2 ≤ tol_f2). Throws search_error when every restart yields
/// a non-finite objective.
BifurcationResult find_bifurcation(const MlpNetwork& net, const ProblemSpec& spec,
                                   const SearchConfig& config, const FrozenCoords& frozen = {});

/// One find_bifurcation per grid node with that node's coordinates pinned;
/// results in grid order. Node failures yield a non-converged result with
/// f2 = +inf rather than aborting the sweep. Nodes are independent and may
/// run on up to `threads` workers.
std::vector<BifurcationResult> sweep_bifurcation(const MlpNetwork& net, const ProblemSpec& spec,
                                                 const std::vector<FrozenCoords>& grid,
                                                 const SearchConfig& config, int threads = 1);

/// CSV with one row per result: p*, v*, f2, sigma_min, residual_norm,
/// restart_index, converged. `manifest` goes into a leading '#' comment.
void write_results_csv(const std::filesystem::path& path,
                       const std::vector<BifurcationResult>& results, std::size_t param_dim,
                       std::size_t solution_dim, const std::string& manifest);

}  // namespace bifurc
