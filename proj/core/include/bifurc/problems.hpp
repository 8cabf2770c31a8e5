#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "bifurc/numerics.hpp"

namespace bifurc {

/// A parametric nonlinear system F(u, p) = 0 with analytic residual and
/// Jacobian ∂F/∂u. Instances are immutable; all evaluations are pure.
struct ProblemSpec {
  std::string name;
  std::size_t n = 0;  // solution dimension
  std::size_t d = 0;  // parameter dimension
  std::vector<std::array<double, 2>> param_box;  // per-coordinate [lo, hi]

  std::function<Vector(const Vector& u, const Vector& p)> residual_fn;
  std::function<DenseMatrix(const Vector& u, const Vector& p)> jac_u_fn;
  /// Optional analytic ∂(F_u)/∂p_k holding u fixed; null means central
  /// differences of jac_u_fn.
  std::function<DenseMatrix(const Vector& u, const Vector& p, std::size_t k)> djac_dp_fn;
};

/// Dimension-checked evaluation wrappers.
Vector residual(const ProblemSpec& spec, const Vector& u, const Vector& p);
DenseMatrix jac_u(const ProblemSpec& spec, const Vector& u, const Vector& p);

/// ∂(F_u)/∂p_k holding u fixed. Analytic when the problem provides it,
/// otherwise entrywise central differences of jac_u.
DenseMatrix djac_u_dp(const ProblemSpec& spec, const Vector& u, const Vector& p, std::size_t k);

/// Diagnostic for the branching condition at a candidate bifurcation
/// (u, p, v): true iff augmenting F_u with the directional-derivative
/// columns {∂F_u/∂p_k · v} and the residual-derivative columns {∂F/∂p_k}
/// raises the rank (singular values thresholded at 1e-8·σ_max). The ∂F/∂p_k
/// columns witness the chain term of dF_u/dp along the solution path, which
/// blows up through the singular direction exactly when F_p escapes the
/// range of F_u.
bool range_space_check(const ProblemSpec& spec, const Vector& u, const Vector& p,
                       const Vector& v);

// ---- the concrete systems --------------------------------------------------

/// F(x, p) = x² − p, one unknown, p ∈ [0, 2]. Turning point at p = 0.
ProblemSpec make_ex1_turning();

/// F(x, (b, c)) = x² + bx + c, b ∈ [−2, 2], c ∈ [0, 1].
ProblemSpec make_ex2_quadratic();

/// F(x, (b, c, d)) = x³ + bx² + cx + d, b ∈ [0, 2].
ProblemSpec make_ex3_cubic();

/// u_xx = u²(u² − p) on [0, 1], u_x(0) = 0, u(1) = 0, second-order central
/// differences with h = 0.2. Unknowns u₀..u₄ at x = 0, 0.2, …, 0.8; the
/// Neumann condition enters through the symmetric ghost point u₋₁ = u₁.
ProblemSpec make_ex4_bvp();

inline constexpr double kEx4Step = 0.2;
inline constexpr std::size_t kEx4Unknowns = 5;

/// Schnakenberg steady state on [0, 1], no-flux boundaries via ghost points,
/// h = 0.1. Unknowns (u₀..u₁₀, v₀..v₁₀), n = 22.
struct SchnakenbergParams {
  double a = 1.0 / 3.0;
  double b = 2.0 / 3.0;
  double eta = 50.0;
};

/// One-parameter family in the diffusion ratio d, (a, b, η) frozen.
ProblemSpec make_ex5_schnakenberg(const SchnakenbergParams& params = {},
                                  std::array<double, 2> d_box = {30.0, 60.0});

/// Three-parameter family (d, b, η) with a frozen; for exploration.
ProblemSpec make_ex5_schnakenberg_full(double a = 1.0 / 3.0);

inline constexpr double kEx5Step = 0.1;
inline constexpr std::size_t kEx5Nodes = 11;

/// Constant steady state (u, v) = (a+b, b/(a+b)²) as a flat 22-vector.
Vector schnakenberg_constant_state(double a, double b);

/// Lookup by the external problem name:
/// ex1_turning | ex2_quadratic | ex3_cubic | ex4_bvp | ex5_schnakenberg.
/// ex5 resolves to the one-parameter family with default (a, b, η).
ProblemSpec problem_by_name(const std::string& name);
std::vector<std::string> problem_names();

}  // namespace bifurc
