#include "bifurc/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "bifurc/errors.hpp"
#include "bifurc/rng.hpp"
#include "json.hpp"

namespace bifurc {

namespace {

void check_conformance(const MlpNetwork& net, std::span<const SolutionSample> data,
                       const ProblemSpec& spec) {
  if (data.empty()) throw argument_error("training: empty dataset");
  if (net.input_dim() != spec.d || net.output_dim() != spec.n)
    throw dimension_error("training: network shape does not match the problem");
  for (const SolutionSample& s : data)
    if (s.p.size() != spec.d || s.u.size() != spec.n)
      throw dimension_error("training: sample shape does not match the problem");
}

// One pass over `indices`: accumulates the mean-reduced loss and, when
// `grad` is non-null, its gradient. Scratch buffers are reused across calls.
struct PassScratch {
  ForwardTrace trace;
  Vector upstream;
};

double f1_pass(const MlpNetwork& net, std::span<const SolutionSample> data,
               const ProblemSpec& spec, double lambda, std::span<const std::size_t> indices,
               ParamGradient* grad, PassScratch& scratch) {
  const double inv_k = 1.0 / static_cast<double>(indices.size());
  double loss = 0.0;
  for (const std::size_t idx : indices) {
    const SolutionSample& sample = data[idx];
    const Vector u_pred = forward(net, sample.p, scratch.trace);

    double fit = 0.0;
    for (std::size_t j = 0; j < u_pred.size(); ++j) {
      const double e = u_pred[j] - sample.u[j];
      fit += e * e;
    }
    const Vector res = spec.residual_fn(u_pred, sample.p);
    loss += inv_k * (fit + 0.5 * lambda * dot(res, res));

    if (grad != nullptr) {
      const DenseMatrix ju = spec.jac_u_fn(u_pred, sample.p);
      const Vector chain = matvec_t(ju, res);  // F_uᵀ F
      scratch.upstream.assign(u_pred.size(), 0.0);
      for (std::size_t j = 0; j < u_pred.size(); ++j)
        scratch.upstream[j] = inv_k * (2.0 * (u_pred[j] - sample.u[j]) + lambda * chain[j]);
      backward_params_accumulate(net, scratch.trace, scratch.upstream, *grad);
    }
  }
  return loss;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

struct AdamState {
  ParamGradient m;
  ParamGradient v;
  std::size_t t = 0;

  explicit AdamState(const MlpNetwork& net)
      : m(ParamGradient::zeros_like(net)), v(ParamGradient::zeros_like(net)) {}

  void step(MlpNetwork& net, const ParamGradient& grad, double lr) {
    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double eps = 1e-8;
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < net.weights.size(); ++i) {
      auto update = [&](double& theta, double& mi, double& vi, double g) {
        mi = beta1 * mi + (1.0 - beta1) * g;
        vi = beta2 * vi + (1.0 - beta2) * g * g;
        theta -= lr * (mi / bc1) / (std::sqrt(vi / bc2) + eps);
      };
      double* w = net.weights[i].data.data();
      double* mw = m.weights[i].data.data();
      double* vw = v.weights[i].data.data();
      const double* gw = grad.weights[i].data.data();
      for (std::size_t k = 0; k < net.weights[i].data.size(); ++k)
        update(w[k], mw[k], vw[k], gw[k]);
      for (std::size_t k = 0; k < net.biases[i].size(); ++k)
        update(net.biases[i][k], m.biases[i][k], v.biases[i][k], grad.biases[i][k]);
    }
  }
};

}  // namespace

double loss_f1(const MlpNetwork& net, std::span<const SolutionSample> data,
               const ProblemSpec& spec, double lambda) {
  check_conformance(net, data, spec);
  PassScratch scratch;
  return f1_pass(net, data, spec, lambda, all_indices(data.size()), nullptr, scratch);
}

ParamGradient grad_f1(const MlpNetwork& net, std::span<const SolutionSample> data,
                      const ProblemSpec& spec, double lambda) {
  check_conformance(net, data, spec);
  ParamGradient grad = ParamGradient::zeros_like(net);
  PassScratch scratch;
  f1_pass(net, data, spec, lambda, all_indices(data.size()), &grad, scratch);
  return grad;
}

std::pair<MlpNetwork, TrainReport> train(const MlpNetwork& initial,
                                         std::span<const SolutionSample> data,
                                         const ProblemSpec& spec, const TrainConfig& config) {
  check_conformance(initial, data, spec);
  if (config.epochs < 1) throw argument_error("train: epochs must be >= 1");
  if (config.learning_rate <= 0.0) throw argument_error("train: learning rate must be positive");
  if (config.lambda < 0.0) throw argument_error("train: lambda must be nonnegative");

  const auto t0 = std::chrono::steady_clock::now();
  MlpNetwork net = initial;
  AdamState adam(net);
  ParamGradient grad = ParamGradient::zeros_like(net);
  PassScratch scratch;

  TrainReport report;
  report.seed = config.seed;
  report.loss_history.reserve(config.epochs);

  MlpNetwork best = net;
  double best_loss = std::numeric_limits<double>::infinity();

  const std::vector<std::size_t> full = all_indices(data.size());
  const bool minibatch = config.batch > 0 && config.batch < data.size();
  std::vector<std::size_t> order = full;
  SplitMix64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double loss;
    if (!minibatch) {
      grad.set_zero();
      loss = f1_pass(net, data, spec, config.lambda, full, &grad, scratch);
      if (!std::isfinite(loss)) throw divergence_error("train: non-finite loss", epoch);
      report.loss_history.push_back(loss);
      if (loss < best_loss) {
        best_loss = loss;
        best = net;
      }
      adam.step(net, grad, config.learning_rate);
    } else {
      loss = f1_pass(net, data, spec, config.lambda, full, nullptr, scratch);
      if (!std::isfinite(loss)) throw divergence_error("train: non-finite loss", epoch);
      report.loss_history.push_back(loss);
      if (loss < best_loss) {
        best_loss = loss;
        best = net;
      }
      // Fisher-Yates on a fresh copy each epoch, seeded once
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[shuffle_rng.next_u64() % i]);
      for (std::size_t ofs = 0; ofs < order.size(); ofs += config.batch) {
        const std::size_t len = std::min(config.batch, order.size() - ofs);
        grad.set_zero();
        f1_pass(net, data, spec, config.lambda, {order.data() + ofs, len}, &grad, scratch);
        adam.step(net, grad, config.learning_rate);
      }
    }
  }

  const double last = f1_pass(net, data, spec, config.lambda, full, nullptr, scratch);
  if (std::isfinite(last) && last < best_loss) {
    best_loss = last;
    best = std::move(net);
  }
  report.final_loss = best_loss;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(best), std::move(report)};
}

std::pair<MlpNetwork, std::vector<TrainReport>> train_best_of_k(
    std::span<const SolutionSample> data, const ProblemSpec& spec, const TrainConfig& config,
    int threads) {
  if (config.k_models < 1) throw argument_error("train_best_of_k: k_models must be >= 1");
  if (data.empty()) throw argument_error("train_best_of_k: empty dataset");

  std::vector<std::size_t> dims;
  dims.push_back(spec.d);
  dims.insert(dims.end(), config.hidden_dims.begin(), config.hidden_dims.end());
  dims.push_back(spec.n);

  // Parameter ranges actually covered by the data, for box-aware init.
  std::vector<std::array<double, 2>> box(spec.d, {0.0, 0.0});
  if (config.box_aware_init) {
    for (std::size_t k = 0; k < spec.d; ++k) box[k] = {data[0].p[k], data[0].p[k]};
    for (const SolutionSample& s : data)
      for (std::size_t k = 0; k < spec.d; ++k) {
        box[k][0] = std::min(box[k][0], s.p[k]);
        box[k][1] = std::max(box[k][1], s.p[k]);
      }
  }

  const std::size_t k = config.k_models;
  std::vector<MlpNetwork> nets(k);
  std::vector<TrainReport> reports(k);
  std::vector<bool> diverged(k, false);

  auto run_one = [&](std::size_t i) {
    TrainConfig local = config;
    local.seed = config.seed + i;
    MlpNetwork net0 = init_network(dims, config.activation, local.seed);
    if (config.box_aware_init) {
      // Equivalent affine reparameterization of the inputs: W₁ ← W₁·(2/width),
      // b₁ ← −W₁·center, mapping each parameter range onto roughly [−1, 1].
      DenseMatrix& w1 = net0.weights[0];
      Vector& b1 = net0.biases[0];
      for (std::size_t r = 0; r < w1.rows; ++r) {
        double shift = 0.0;
        for (std::size_t c = 0; c < w1.cols; ++c) {
          const double center = 0.5 * (box[c][0] + box[c][1]);
          const double width = std::max(box[c][1] - box[c][0], 1e-12);
          w1(r, c) *= 2.0 / width;
          shift += w1(r, c) * center;
        }
        b1[r] = -shift;
      }
    }
    try {
      auto [net, report] = train(net0, data, spec, local);
      nets[i] = std::move(net);
      reports[i] = std::move(report);
    } catch (const divergence_error&) {
      diverged[i] = true;
      reports[i].seed = local.seed;
      reports[i].final_loss = std::numeric_limits<double>::infinity();
    }
  };

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(k)));
  if (workers == 1) {
    for (std::size_t i = 0; i < k; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = cursor.fetch_add(1); i < k; i = cursor.fetch_add(1)) run_one(i);
      });
    for (std::thread& t : pool) t.join();
  }

  std::size_t best = k;
  for (std::size_t i = 0; i < k; ++i) {
    if (diverged[i]) continue;
    if (best == k || reports[i].final_loss < reports[best].final_loss) best = i;
  }
  if (best == k) throw divergence_error("train_best_of_k: all models diverged", 0);
  return {std::move(nets[best]), std::move(reports)};
}

void write_loss_csv(const std::filesystem::path& path, const TrainReport& report,
                    const std::string& manifest) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_loss_csv: cannot open " + path.string());
  if (!manifest.empty()) out << "# " << manifest << "\n";
  out << "epoch,f1,log10_f1\n";
  out.precision(17);
  for (std::size_t e = 0; e < report.loss_history.size(); ++e) {
    const double f1 = report.loss_history[e];
    out << e << "," << f1 << "," << (f1 > 0.0 ? std::log10(f1) : -std::numeric_limits<double>::infinity())
        << "\n";
  }
}

void save_report(const TrainReport& report, const std::filesystem::path& path) {
  nlohmann::json j;
  j["seed"] = report.seed;
  j["final_loss"] = report.final_loss;
  j["wall_time_s"] = report.wall_time_s;
  j["loss_history"] = report.loss_history;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_report: cannot open " + path.string());
  out << j.dump(1) << "\n";
}

TrainReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("load_report: cannot open " + path.string(), "file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("load_report: invalid JSON: ") + e.what(), "document");
  }
  TrainReport report;
  try {
    report.seed = j.at("seed").get<std::uint64_t>();
    report.final_loss = j.at("final_loss").get<double>();
    report.wall_time_s = j.at("wall_time_s").get<double>();
    report.loss_history = j.at("loss_history").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("load_report: bad field contents: ") + e.what(), "report");
  }
  return report;
}

}  // namespace bifurc
