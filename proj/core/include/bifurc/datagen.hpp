#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "bifurc/numerics.hpp"
#include "bifurc/problems.hpp"

namespace bifurc {

/// One (p, u) pair on a solution path. Newton-generated samples satisfy
/// ‖F(u,p)‖∞ ≤ 1e-8; closed-form samples are exact to rounding.
struct SolutionSample {
  Vector p;
  Vector u;
};

/// Ordered samples along one solution path, plus why tracing stopped.
struct Branch {
  std::vector<SolutionSample> samples;
  std::string label;
  std::string stop_reason;  // "fold", "max_steps", "jump", or "newton_failure"
};

// ---- closed-form dataset recipes -------------------------------------------

/// p ~ U[0,2], u = √p.
std::vector<SolutionSample> gen_ex1(std::size_t count, std::uint64_t seed);

/// n_b draws of b ~ U[−2,2]; for each, `reps` draws of c ~ U[b²/8, b²/4];
/// u = (−b + √(b²−4c))/2. The c-range keeps the discriminant nonnegative.
std::vector<SolutionSample> gen_ex2(std::size_t n_b, std::size_t reps, std::uint64_t seed);

/// n_b draws of b ~ U[0,2]; for each, `reps` draws of c ~ U[0, b²/3];
/// d chosen so the cubic discriminant vanishes (repeated-root sheet), with
/// u the simple root −b/3 + 2√(b²/9 − c/3).
std::vector<SolutionSample> gen_ex3(std::size_t n_b, std::size_t reps, std::uint64_t seed);

// ---- continuation -----------------------------------------------------------

struct TraceOptions {
  double step = 0.01;
  std::size_t max_steps = 1000;
  int direction = -1;          // ±1, applied to p[param_index]
  double fold_tol = 1e-4;      // stop when σ_min(F_u) drops below this; ≤0 disables
  double jump_tol = 1.0;       // max ‖Δu‖∞ between consecutive samples
  double newton_tol = 1e-9;
  std::size_t newton_max_iter = 60;
  /// Step-halving floor relative to `step`. Halving acts as a bisection on
  /// the solvability boundary, so a deep floor parks the final sample within
  /// σ_min ≈ fold_tol of a fold.
  double min_step_factor = 1e-12;
};

/// Natural-parameter continuation with Newton correction. Marches
/// p[param_index] by direction·step, halving the step near a failure; stops
/// at a fold (σ_min below fold_tol or no step succeeds), at a path jump, or
/// after max_steps. The starting sample is Newton-corrected and included.
Branch trace_branch(const ProblemSpec& spec, SolutionSample start, std::size_t param_index,
                    const TraceOptions& opts);

// ---- PDE problem datasets ---------------------------------------------------

struct Ex4Options {
  /// Anchor parameter where branches are hunted. Above p ≈ 15 the coarse
  /// h = 0.2 grid admits dozens of spurious high-frequency solutions; at 12
  /// the amplitude sweep finds exactly the low-lying structural ones.
  double p_high = 12.0;
  double amplitude_lo = 0.5;  // cosine-bump sweep range
  double amplitude_hi = 30.0;
  std::size_t amplitude_count = 240;
  double dedupe_tol = 0.1;  // max-norm separation between distinct branches
  double trace_step = 0.01;
  /// Tight enough that sliding onto the trivial branch past a fold counts
  /// as a path jump instead of a continuation step.
  double jump_tol = 0.25;
  std::size_t points_per_branch = 7600;
};

/// The four nontrivial solution branches of the ex4 BVP: Newton solves from
/// scaled cosine bumps A·cos(πx/2) at p_high, deduplicated, each continued
/// down to its fold and resampled to points_per_branch samples uniformly in
/// arclength (every resampled point re-corrected by Newton). Branch labels
/// are "branch1".."branch4" ordered by increasing amplitude at p_high.
/// Throws generation_error when fewer than four branches are found.
std::vector<Branch> gen_ex4_branches(std::uint64_t seed, const Ex4Options& opts = {});

struct Ex5Options {
  double a = 1.0 / 3.0;
  double step = 0.005;
  double anchor_fraction = 0.8;  // fraction of the d-span placed above d*
  double initial_amplitude = 1e-2;
};

/// `count` samples along the first nonconstant steady-state branch of the
/// Schnakenberg system for parameters (a, b, η): anchored above the Turing
/// point d* by a perturbed-constant-state Newton solve, then continued
/// downward through the pitchfork so the sampled d-range brackets d*.
std::vector<SolutionSample> gen_ex5(double b, double eta, std::size_t count,
                                    std::uint64_t seed, const Ex5Options& opts = {});

// ---- dataset files ----------------------------------------------------------

/// First line of every dataset file: problem name, seed, and the generator
/// arguments as a JSON object (serialized string here to keep JSON out of
/// public headers).
struct DatasetHeader {
  std::string problem;
  std::uint64_t seed = 0;
  std::string args_json = "{}";
};

/// JSONL: one header line, then one {"p": […], "u": […]} object per sample.
void save_dataset(const std::filesystem::path& path, const DatasetHeader& header,
                  const std::vector<SolutionSample>& samples);
std::pair<DatasetHeader, std::vector<SolutionSample>> load_dataset(
    const std::filesystem::path& path);

}  // namespace bifurc
