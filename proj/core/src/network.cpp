#include "bifurc/network.hpp"

#include <cmath>
#include <fstream>
#include <utility>

#include "bifurc/errors.hpp"
#include "bifurc/rng.hpp"
#include "json.hpp"

namespace bifurc {

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "sigmoid"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  throw argument_error("unknown activation: " + s);
}

double activate(Activation a, double x) {
  if (a == Activation::relu) return x > 0.0 ? x : 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

double activate_deriv(Activation a, double x) {
  if (a == Activation::relu) return x > 0.0 ? 1.0 : 0.0;
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 - s);
}

namespace {

// σ′ from the already-computed activation value: avoids re-evaluating exp in
// the backward pass, which otherwise dominates training time.
inline double deriv_from_activation(Activation a, double pre, double act) {
  if (a == Activation::relu) return pre > 0.0 ? 1.0 : 0.0;
  return act * (1.0 - act);
}

}  // namespace

std::size_t MlpNetwork::param_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) n += weights[i].data.size() + biases[i].size();
  return n;
}

void MlpNetwork::check_shapes() const {
  if (layer_dims.size() < 2) throw dimension_error("network needs at least input and output layers");
  if (weights.size() != layer_dims.size() - 1 || biases.size() != weights.size())
    throw dimension_error("layer count mismatch between dims, weights, and biases");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i].rows != layer_dims[i + 1] || weights[i].cols != layer_dims[i])
      throw dimension_error("weight matrix " + std::to_string(i) + " has wrong shape");
    if (biases[i].size() != layer_dims[i + 1])
      throw dimension_error("bias vector " + std::to_string(i) + " has wrong length");
  }
}

ParamGradient ParamGradient::zeros_like(const MlpNetwork& net) {
  ParamGradient g;
  g.weights.reserve(net.weights.size());
  g.biases.reserve(net.biases.size());
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    g.weights.emplace_back(net.weights[i].rows, net.weights[i].cols, 0.0);
    g.biases.emplace_back(net.biases[i].size(), 0.0);
  }
  return g;
}

void ParamGradient::set_zero() {
  for (auto& w : weights) std::fill(w.data.begin(), w.data.end(), 0.0);
  for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

void ParamGradient::axpy(double alpha, const ParamGradient& other) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (std::size_t k = 0; k < weights[i].data.size(); ++k)
      weights[i].data[k] += alpha * other.weights[i].data[k];
    for (std::size_t k = 0; k < biases[i].size(); ++k) biases[i][k] += alpha * other.biases[i][k];
  }
}

void ParamGradient::scale(double alpha) {
  for (auto& w : weights)
    for (double& x : w.data) x *= alpha;
  for (auto& b : biases)
    for (double& x : b) x *= alpha;
}

MlpNetwork init_network(const std::vector<std::size_t>& layer_dims, Activation act,
                        std::uint64_t seed) {
  if (layer_dims.size() < 2) throw dimension_error("init_network: need at least 2 layer dims");
  for (std::size_t d : layer_dims)
    if (d == 0) throw dimension_error("init_network: zero layer dimension");

  MlpNetwork net;
  net.layer_dims = layer_dims;
  net.activation = act;
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i + 1 < layer_dims.size(); ++i) {
    const std::size_t fan_in = layer_dims[i];
    const std::size_t fan_out = layer_dims[i + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseMatrix w(fan_out, fan_in);
    for (double& x : w.data) x = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(fan_out, 0.0);
  }
  return net;
}

Vector forward(const MlpNetwork& net, const Vector& p, ForwardTrace& trace) {
  if (p.size() != net.input_dim()) throw dimension_error("forward: input size mismatch");
  const std::size_t layers = net.layer_count();
  trace.inputs.resize(layers);
  trace.pre.resize(layers);

  trace.inputs[0] = p;
  for (std::size_t i = 0; i < layers; ++i) {
    const DenseMatrix& w = net.weights[i];
    const Vector& in = trace.inputs[i];
    Vector& z = trace.pre[i];
    z.assign(w.rows, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double* row = &w.data[r * w.cols];
      double s = net.biases[i][r];
      for (std::size_t c = 0; c < w.cols; ++c) s += row[c] * in[c];
      z[r] = s;
    }
    if (i + 1 < layers) {
      Vector& nxt = trace.inputs[i + 1];
      nxt.assign(z.size(), 0.0);
      for (std::size_t r = 0; r < z.size(); ++r) nxt[r] = activate(net.activation, z[r]);
    }
  }
  return trace.pre.back();
}

Vector forward(const MlpNetwork& net, const Vector& p) {
  ForwardTrace trace;
  return forward(net, p, trace);
}

void backward_params_accumulate(const MlpNetwork& net, const ForwardTrace& trace,
                                const Vector& upstream, ParamGradient& grad) {
  if (upstream.size() != net.output_dim())
    throw dimension_error("backward_params: upstream size mismatch");
  const std::size_t layers = net.layer_count();

  Vector delta = upstream;  // gradient wrt pre[i], starting at the top
  for (std::size_t i = layers; i-- > 0;) {
    const Vector& in = trace.inputs[i];
    DenseMatrix& gw = grad.weights[i];
    Vector& gb = grad.biases[i];
    for (std::size_t r = 0; r < gw.rows; ++r) {
      const double dr = delta[r];
      gb[r] += dr;
      if (dr == 0.0) continue;
      double* row = &gw.data[r * gw.cols];
      for (std::size_t c = 0; c < gw.cols; ++c) row[c] += dr * in[c];
    }
    if (i == 0) break;
    const DenseMatrix& w = net.weights[i];
    Vector next(w.cols, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double dr = delta[r];
      if (dr == 0.0) continue;
      const double* row = &w.data[r * w.cols];
      for (std::size_t c = 0; c < w.cols; ++c) next[c] += row[c] * dr;
    }
    const Vector& z = trace.pre[i - 1];
    const Vector& act = trace.inputs[i];
    for (std::size_t c = 0; c < next.size(); ++c)
      next[c] *= deriv_from_activation(net.activation, z[c], act[c]);
    delta = std::move(next);
  }
}

ParamGradient backward_params(const MlpNetwork& net, const Vector& p, const Vector& upstream) {
  ForwardTrace trace;
  forward(net, p, trace);
  ParamGradient grad = ParamGradient::zeros_like(net);
  backward_params_accumulate(net, trace, upstream, grad);
  return grad;
}

DenseMatrix input_jacobian(const MlpNetwork& net, const Vector& p) {
  ForwardTrace trace;
  forward(net, p, trace);
  const std::size_t layers = net.layer_count();
  DenseMatrix jac(net.output_dim(), net.input_dim(), 0.0);

  for (std::size_t out = 0; out < net.output_dim(); ++out) {
    Vector delta(net.output_dim(), 0.0);
    delta[out] = 1.0;
    for (std::size_t i = layers; i-- > 0;) {
      const DenseMatrix& w = net.weights[i];
      Vector next(w.cols, 0.0);
      for (std::size_t r = 0; r < w.rows; ++r) {
        const double dr = delta[r];
        if (dr == 0.0) continue;
        const double* row = &w.data[r * w.cols];
        for (std::size_t c = 0; c < w.cols; ++c) next[c] += row[c] * dr;
      }
      if (i > 0) {
        const Vector& z = trace.pre[i - 1];
        const Vector& act = trace.inputs[i];
        for (std::size_t c = 0; c < next.size(); ++c)
          next[c] *= deriv_from_activation(net.activation, z[c], act[c]);
      }
      delta = std::move(next);
    }
    for (std::size_t c = 0; c < net.input_dim(); ++c) jac(out, c) = delta[c];
  }
  return jac;
}

void save_network(const MlpNetwork& net, const std::filesystem::path& path) {
  net.check_shapes();
  nlohmann::json j;
  j["layer_dims"] = net.layer_dims;
  j["activation"] = to_string(net.activation);
  auto& jw = j["weights"] = nlohmann::json::array();
  for (const DenseMatrix& w : net.weights) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < w.rows; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t c = 0; c < w.cols; ++c) row.push_back(w(r, c));
      rows.push_back(std::move(row));
    }
    jw.push_back(std::move(rows));
  }
  j["biases"] = net.biases;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_network: cannot open " + path.string());
  out << j.dump(1) << "\n";
}

MlpNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("load_network: cannot open " + path.string(), "file");

  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("load_network: invalid JSON: ") + e.what(), "document");
  }

  MlpNetwork net;
  try {
    if (!j.contains("layer_dims")) throw parse_error("load_network: missing field", "layer_dims");
    net.layer_dims = j.at("layer_dims").get<std::vector<std::size_t>>();
    if (!j.contains("activation")) throw parse_error("load_network: missing field", "activation");
    net.activation = activation_from_string(j.at("activation").get<std::string>());
    if (!j.contains("weights")) throw parse_error("load_network: missing field", "weights");
    if (!j.contains("biases")) throw parse_error("load_network: missing field", "biases");

    for (const auto& jm : j.at("weights")) {
      DenseMatrix w;
      w.rows = jm.size();
      w.cols = w.rows > 0 ? jm.at(0).size() : 0;
      w.data.reserve(w.rows * w.cols);
      for (const auto& jrow : jm) {
        if (jrow.size() != w.cols) throw parse_error("load_network: ragged weight matrix", "weights");
        for (const auto& x : jrow) w.data.push_back(x.get<double>());
      }
      net.weights.push_back(std::move(w));
    }
    net.biases = j.at("biases").get<std::vector<Vector>>();
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("load_network: bad field contents: ") + e.what(), "weights/biases");
  }

  net.check_shapes();
  return net;
}

}  // namespace bifurc
