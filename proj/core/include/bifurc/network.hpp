#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bifurc/numerics.hpp"

namespace bifurc {

enum class Activation { relu, sigmoid };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// relu or sigmoid. relu uses the a.e.-derivative convention relu′(0) = 0 so
/// input Jacobians are deterministic.
double activate(Activation a, double x);
double activate_deriv(Activation a, double x);

/// Fully connected network: h₀ = p, hᵢ = σ(Wᵢ hᵢ₋₁ + bᵢ) for the hidden
/// layers, output = W_L h_{L−1} + b_L (affine, no activation).
struct MlpNetwork {
  std::vector<std::size_t> layer_dims;  // [d₀, d₁, …, d_L], ≥ 2 entries
  std::vector<DenseMatrix> weights;     // weights[i] is layer_dims[i+1] × layer_dims[i]
  std::vector<Vector> biases;           // biases[i] has layer_dims[i+1] entries
  Activation activation = Activation::sigmoid;

  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }
  std::size_t layer_count() const { return weights.size(); }
  std::size_t param_count() const;

  /// Throws dimension_error if weights/biases do not conform to layer_dims.
  void check_shapes() const;
};

/// Gradient with respect to every network parameter; shape-identical to the
/// network it was produced from.
struct ParamGradient {
  std::vector<DenseMatrix> weights;
  std::vector<Vector> biases;

  static ParamGradient zeros_like(const MlpNetwork& net);
  void set_zero();
  void axpy(double alpha, const ParamGradient& other);  // this += alpha*other
  void scale(double alpha);
};

/// Per-evaluation scratch: layer inputs and pre-activations. Reusable across
/// calls to avoid reallocating in training loops.
struct ForwardTrace {
  std::vector<Vector> inputs;  // inputs[i] feeds layer i; inputs[0] = p
  std::vector<Vector> pre;     // pre[i] = Wᵢ·inputs[i] + bᵢ
};

/// Glorot-style uniform(±√(6/(fan_in+fan_out))) weights, zero biases,
/// deterministic for a given seed.
MlpNetwork init_network(const std::vector<std::size_t>& layer_dims, Activation act,
                        std::uint64_t seed);

Vector forward(const MlpNetwork& net, const Vector& p);
/// forward that also fills `trace` for a following backward pass.
Vector forward(const MlpNetwork& net, const Vector& p, ForwardTrace& trace);

/// Gradient of upstreamᵀ·forward(net, p) with respect to all parameters.
ParamGradient backward_params(const MlpNetwork& net, const Vector& p, const Vector& upstream);
/// Accumulating variant reusing a forward trace: grad += d(upstreamᵀ·out)/dθ.
void backward_params_accumulate(const MlpNetwork& net, const ForwardTrace& trace,
                                const Vector& upstream, ParamGradient& grad);

/// d(forward)/dp as a d_L × d₀ matrix.
DenseMatrix input_jacobian(const MlpNetwork& net, const Vector& p);

/// JSON model file with fields layer_dims, activation, weights, biases.
/// Round-trips are bit-exact on all parameters.
void save_network(const MlpNetwork& net, const std::filesystem::path& path);
MlpNetwork load_network(const std::filesystem::path& path);

}  // namespace bifurc
