#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "bifurc/datagen.hpp"
#include "bifurc/network.hpp"
#include "bifurc/problems.hpp"

namespace bifurc {

struct TrainConfig {
  double lambda = 1.0;          // residual weight
  std::size_t epochs = 20000;
  double learning_rate = 1e-3;  // Adam step size
  std::uint64_t seed = 0;
  std::size_t batch = 0;        // 0 = full batch, otherwise minibatch size
  std::size_t k_models = 1;     // best-of-k selection

  // Network construction (used by train_best_of_k, which owns its networks).
  std::vector<std::size_t> hidden_dims = {320};
  Activation activation = Activation::sigmoid;
  /// Rescale the first layer at initialization to the data's parameter
  /// range (an equivalent reparameterization of the same architecture).
  /// Needed when the parameter window sits far from the origin, e.g. a
  /// narrow band of diffusion ratios around d ≈ 45.
  bool box_aware_init = false;
};

struct TrainReport {
  std::vector<double> loss_history;  // f1 per epoch, evaluated before each update
  double final_loss = 0.0;           // best f1 seen (matches the returned parameters)
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
};

/// Mean-reduced training objective:
/// f1 = (1/K) Σᵢ [ ‖u_N(pᵢ) − uᵢ‖² + (λ/2)‖F(u_N(pᵢ), pᵢ)‖² ].
double loss_f1(const MlpNetwork& net, std::span<const SolutionSample> data,
               const ProblemSpec& spec, double lambda);

/// Exact gradient of loss_f1 with respect to every network parameter. Per
/// sample the backward upstream is 2(u_N − uᵢ)/K + λ·F_uᵀF/K.
ParamGradient grad_f1(const MlpNetwork& net, std::span<const SolutionSample> data,
                      const ProblemSpec& spec, double lambda);

/// Full-batch Adam (β₁ = 0.9, β₂ = 0.999, ε = 1e-8) on f1. Returns the
/// parameters with the lowest f1 seen across all epochs, not necessarily
/// the last iterate. Deterministic for a given seed. Throws divergence_error
/// on a non-finite loss.
std::pair<MlpNetwork, TrainReport> train(const MlpNetwork& initial,
                                         std::span<const SolutionSample> data,
                                         const ProblemSpec& spec, const TrainConfig& config);

/// Trains k_models networks from seeds seed+0 … seed+k−1 and keeps the one
/// with the smallest final f1 (smallest seed wins ties). Reports come back
/// in seed order. Trainings are independent and run on up to `threads`
/// workers; the result does not depend on scheduling.
std::pair<MlpNetwork, std::vector<TrainReport>> train_best_of_k(
    std::span<const SolutionSample> data, const ProblemSpec& spec, const TrainConfig& config,
    int threads = 1);

/// Loss CSV (epoch, f1, log10_f1) next to the model file.
void write_loss_csv(const std::filesystem::path& path, const TrainReport& report,
                    const std::string& manifest);

/// TrainReport as JSON (loss history, final loss, wall time, seed).
void save_report(const TrainReport& report, const std::filesystem::path& path);
TrainReport load_report(const std::filesystem::path& path);

}  // namespace bifurc
