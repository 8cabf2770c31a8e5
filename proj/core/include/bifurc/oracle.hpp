#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bifurc/datagen.hpp"
#include "bifurc/numerics.hpp"
#include "bifurc/problems.hpp"

namespace bifurc {

/// Ground-truth bifurcation locus on a parameter grid, either analytic or
/// obtained from a σ_min scan.
struct OracleCurve {
  Vector grid;
  Vector values;
  std::string source;  // "analytic" or "scan"
};

/// Bifurcation value of c for the quadratic x²+bx+c: c* = b²/4.
double quadratic_curve(double b);

/// Cusp of the cubic x³+bx²+cx+d: (c*, d*) = (b²/3, b³/27), where x = −b/3
/// is a triple root.
std::pair<double, double> cubic_curve(double b);

/// Δ = (bc/6 − b³/27 − d/2)² + (c/3 − b²/9)³; zero iff a repeated real root.
double cubic_discriminant(double b, double c, double d);

// ---- σ_min scans along branches ----------------------------------------------

struct ScanPoint {
  double p = 0.0;  // the scanned parameter coordinate
  double sigma_min = 0.0;
};

struct FoldEstimate {
  double p_star = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  /// true when the branch was truncated at the fold and p_star comes from
  /// endpoint extrapolation of σ² rather than an interior minimum.
  bool truncated = false;
};

struct SigmaScan {
  std::vector<ScanPoint> points;
  std::vector<FoldEstimate> folds;
};

/// σ_min(F_u) at every branch sample, with fold estimates: interior minima
/// refined by 3-point quadratic interpolation; a monotone-to-zero endpoint
/// refined by linear extrapolation of σ² and reported with its bracket.
SigmaScan sigma_min_scan(const ProblemSpec& spec, const Branch& branch,
                         std::size_t param_index = 0);

// ---- Schnakenberg dispersion relation -----------------------------------------

struct TuringPoint {
  double d_star = 0.0;
  int mode = 0;  // discrete cosine mode index k
};

/// Smallest d > 0 at which some discrete mode k makes the linearization of
/// the Schnakenberg steady state at (u,v) = (a+b, b/(a+b)²) singular:
/// det(J_r − diag(μ_k, d·μ_k)) = 0 with μ_k = (2 − 2cos(kπh))/h². The
/// condition is linear in d per mode; modes k = 1..round(1/h) are examined.
/// Empty when no positive d satisfies the condition.
std::optional<TuringPoint> schnakenberg_turing(double a, double b, double eta, double h = 0.1);
std::optional<double> schnakenberg_dstar(double a, double b, double eta, double h = 0.1);

/// Mode-k tangent direction (φ, ψ) of the nullspace at the Turing point,
/// normalized so φ = 1. Used to seed continuation onto the pattern branch.
std::pair<double, double> schnakenberg_mode_tangent(double a, double b, double eta, double mu_k,
                                                    double d);

// ---- error metric --------------------------------------------------------------

/// Composite-trapezoid approximation of ∫ |approx − exact| over the common
/// grid. Throws argument_error when the grids differ.
double curve_error(const OracleCurve& approx, const OracleCurve& exact);

// ---- frozen reference values ----------------------------------------------------

/// Derived reference values pinned before any network enters the picture:
/// ex4 fold locations under this library's discretization and the ex5
/// Turing point for the default (a, b, η).
struct OracleFixture {
  int version = 1;
  std::string generated;  // ISO date
  std::string args_json = "{}";
  std::vector<double> ex4_folds;  // ascending, one per branch label order
  std::vector<std::string> ex4_branch_labels;
  double ex5_dstar = 0.0;
  SchnakenbergParams ex5_params;
};

/// Recompute the fixture from scratch (branch tracing plus σ_min scans).
OracleFixture make_reference_fixture();

void save_fixture(const OracleFixture& fixture, const std::filesystem::path& path);
OracleFixture load_fixture(const std::filesystem::path& path);

}  // namespace bifurc
