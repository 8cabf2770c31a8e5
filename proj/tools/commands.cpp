#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <string>

#include "bifurc/bifurcation.hpp"
#include "bifurc/datagen.hpp"
#include "bifurc/errors.hpp"
#include "bifurc/network.hpp"
#include "bifurc/oracle.hpp"
#include "bifurc/problems.hpp"
#include "bifurc/training.hpp"
#include "json.hpp"

namespace bifurc::cli {

namespace {

// Effective-option manifest embedded in every output file.
std::string manifest_kv(std::initializer_list<std::pair<std::string, std::string>> kvs) {
  std::string s;
  for (const auto& [k, v] : kvs) {
    if (!s.empty()) s += " ";
    s += k + "=" + v;
  }
  return s;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// A dataset may pin problem constants (ex5's b and η live in its header).
ProblemSpec problem_for_dataset(const std::string& problem, const DatasetHeader& header) {
  if (problem == "ex5_schnakenberg") {
    const nlohmann::json args = nlohmann::json::parse(header.args_json);
    SchnakenbergParams params;
    params.b = args.value("b", params.b);
    params.eta = args.value("eta", params.eta);
    return make_ex5_schnakenberg(params);
  }
  return problem_by_name(problem);
}

std::vector<std::array<double, 2>> box_from_samples(const std::vector<SolutionSample>& data) {
  std::vector<std::array<double, 2>> box(data.front().p.size());
  for (std::size_t k = 0; k < box.size(); ++k) box[k] = {data.front().p[k], data.front().p[k]};
  for (const SolutionSample& s : data)
    for (std::size_t k = 0; k < box.size(); ++k) {
      box[k][0] = std::min(box[k][0], s.p[k]);
      box[k][1] = std::max(box[k][1], s.p[k]);
    }
  return box;
}

std::size_t freeze_index(const std::string& problem, const std::string& name) {
  if (problem == "ex2_quadratic") {
    if (name == "b") return 0;
    if (name == "c") return 1;
  } else if (problem == "ex3_cubic") {
    if (name == "b") return 0;
    if (name == "c") return 1;
    if (name == "d") return 2;
  } else if (name == "p" || name == "d") {
    return 0;
  }
  try {
    return std::stoul(name);
  } catch (...) {
    throw argument_error("unknown frozen coordinate: " + name);
  }
}

}  // namespace

int cmd_gen_data(const GenDataOptions& opts) {
  std::vector<SolutionSample> samples;
  nlohmann::json args;

  if (opts.problem == "ex1_turning") {
    samples = gen_ex1(opts.count, opts.seed);
    args["count"] = opts.count;
  } else if (opts.problem == "ex2_quadratic") {
    const std::size_t n_b = opts.n_b ? opts.n_b : 5000;
    const std::size_t reps = opts.reps ? opts.reps : 5;
    samples = gen_ex2(n_b, reps, opts.seed);
    args["n_b"] = n_b;
    args["reps"] = reps;
  } else if (opts.problem == "ex3_cubic") {
    const std::size_t n_b = opts.n_b ? opts.n_b : 3000;
    const std::size_t reps = opts.reps ? opts.reps : 4;
    samples = gen_ex3(n_b, reps, opts.seed);
    args["n_b"] = n_b;
    args["reps"] = reps;
  } else if (opts.problem == "ex4_bvp") {
    if (opts.branch < 1 || opts.branch > 4) {
      std::fprintf(stderr, "gen-data ex4_bvp: --branch must be 1..4\n");
      return kExitUsage;
    }
    Ex4Options ex4;
    ex4.points_per_branch = opts.points;
    const auto branches = gen_ex4_branches(opts.seed, ex4);
    samples = branches[opts.branch - 1].samples;
    args["branch"] = opts.branch;
    args["points"] = opts.points;
    args["p_high"] = ex4.p_high;
  } else if (opts.problem == "ex5_schnakenberg") {
    samples = gen_ex5(opts.b, opts.eta, opts.count ? opts.count : 300, opts.seed);
    args["count"] = opts.count ? opts.count : 300;
    args["b"] = opts.b;
    args["eta"] = opts.eta;
    args["a"] = 1.0 / 3.0;
  } else {
    std::fprintf(stderr, "unknown problem: %s\n", opts.problem.c_str());
    return kExitUsage;
  }

  DatasetHeader header;
  header.problem = opts.problem;
  header.seed = opts.seed;
  header.args_json = args.dump();
  save_dataset(opts.out, header, samples);
  std::printf("wrote %zu samples to %s\n", samples.size(), opts.out.c_str());
  return kExitOk;
}

int cmd_train(const TrainOptions& opts) {
  const auto [header, data] = load_dataset(opts.data);
  if (header.problem != opts.problem) {
    std::fprintf(stderr, "dataset %s holds problem %s, not %s\n", opts.data.c_str(),
                 header.problem.c_str(), opts.problem.c_str());
    return kExitData;
  }
  const ProblemSpec spec = problem_for_dataset(opts.problem, header);
  if (data.empty() || data.front().p.size() != spec.d || data.front().u.size() != spec.n) {
    std::fprintf(stderr, "dataset dimensions do not match problem %s\n", opts.problem.c_str());
    return kExitData;
  }

  TrainConfig config;
  config.lambda = opts.lambda;
  config.epochs = opts.epochs;
  config.learning_rate = opts.learning_rate;
  config.seed = opts.seed;
  config.k_models = opts.k_models;
  config.batch = opts.batch;
  config.hidden_dims = opts.widths;
  config.activation = activation_from_string(opts.activation);
  config.box_aware_init = opts.box_aware_init;

  auto [net, reports] = train_best_of_k(data, spec, config, opts.threads);

  save_network(net, opts.out);
  std::size_t best = 0;
  for (std::size_t i = 0; i < reports.size(); ++i)
    if (reports[i].final_loss < reports[best].final_loss) best = i;
  save_report(reports[best], opts.out + ".report.json");
  if (reports.size() > 1) {
    for (std::size_t i = 0; i < reports.size(); ++i)
      save_report(reports[i], opts.out + ".report" + std::to_string(i) + ".json");
  }
  const std::string manifest = manifest_kv({{"cmd", "train"},
                                            {"problem", opts.problem},
                                            {"data", opts.data},
                                            {"width", std::to_string(opts.widths[0])},
                                            {"activation", opts.activation},
                                            {"lambda", fmt(opts.lambda)},
                                            {"epochs", std::to_string(opts.epochs)},
                                            {"lr", fmt(opts.learning_rate)},
                                            {"k_models", std::to_string(opts.k_models)},
                                            {"seed", std::to_string(opts.seed)}});
  write_loss_csv(opts.out + ".loss.csv", reports[best], manifest);
  std::printf("final f1 = %.6e (model %s)\n", reports[best].final_loss, opts.out.c_str());
  return kExitOk;
}

int cmd_find(const FindOptions& opts) {
  const MlpNetwork net = load_network(opts.model);

  ProblemSpec spec;
  SearchConfig config;
  if (!opts.data.empty()) {
    const auto [header, data] = load_dataset(opts.data);
    spec = problem_for_dataset(header.problem, header);
    if (!data.empty()) config.p_box = box_from_samples(data);
  } else if (opts.problem == "ex5_schnakenberg") {
    spec = make_ex5_schnakenberg({1.0 / 3.0, opts.b, opts.eta});
  } else {
    spec = problem_by_name(opts.problem);
  }
  if (net.input_dim() != spec.d || net.output_dim() != spec.n) {
    std::fprintf(stderr, "model %s does not match problem %s (%zu->%zu vs %zu->%zu)\n",
                 opts.model.c_str(), opts.problem.c_str(), net.input_dim(), net.output_dim(),
                 spec.d, spec.n);
    return kExitData;
  }

  config.lambda = opts.lambda;
  config.restarts = opts.restarts;
  config.max_iters = opts.max_iters;
  config.learning_rate = opts.learning_rate;
  config.tol_f2 = opts.tol_f2;
  config.seed = opts.seed;

  FrozenCoords frozen;
  for (const std::string& entry : opts.freeze) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "--freeze expects name=value, got '%s'\n", entry.c_str());
      return kExitUsage;
    }
    try {
      frozen.emplace_back(freeze_index(opts.problem, entry.substr(0, eq)),
                          std::stod(entry.substr(eq + 1)));
    } catch (const std::exception& e) {
      std::fprintf(stderr, "bad --freeze entry '%s': %s\n", entry.c_str(), e.what());
      return kExitUsage;
    }
  }

  const BifurcationResult result = find_bifurcation(net, spec, config, frozen);

  std::string freeze_desc;
  for (const std::string& f : opts.freeze) freeze_desc += f + ";";
  const std::string manifest = manifest_kv({{"cmd", "find"},
                                            {"problem", opts.problem},
                                            {"model", opts.model},
                                            {"lambda", fmt(opts.lambda)},
                                            {"restarts", std::to_string(opts.restarts)},
                                            {"max_iters", std::to_string(opts.max_iters)},
                                            {"lr", fmt(opts.learning_rate)},
                                            {"tol_f2", fmt(opts.tol_f2)},
                                            {"freeze", freeze_desc.empty() ? "none" : freeze_desc},
                                            {"seed", std::to_string(opts.seed)}});
  write_results_csv(opts.out, {result}, spec.d, spec.n, manifest);

  std::printf("p* = [");
  for (std::size_t k = 0; k < result.p_star.size(); ++k)
    std::printf("%s%.8f", k ? ", " : "", result.p_star[k]);
  std::printf("]  f2 = %.6e  sigma_min = %.3e  converged = %d\n", result.f2_value,
              result.sigma_min_at_p, result.converged ? 1 : 0);
  return result.converged ? kExitOk : kExitNoConvergence;
}

int cmd_oracle_fixture(const std::string& out_path) {
  const OracleFixture fixture = make_reference_fixture();
  save_fixture(fixture, out_path);
  std::printf("fixture written to %s (ex4 folds:", out_path.c_str());
  for (double f : fixture.ex4_folds) std::printf(" %.6f", f);
  std::printf("; ex5 d* = %.6f)\n", fixture.ex5_dstar);
  return kExitOk;
}

}  // namespace bifurc::cli
