#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bifurc::cli {

// Exit codes are a stable scripting contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNoConvergence = 4;

struct GenDataOptions {
  std::string problem;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t count = 1600;   // ex1 / ex5 sample count
  std::size_t n_b = 0;        // ex2/ex3 outer draws (0 = paper default)
  std::size_t reps = 0;       // ex2/ex3 inner draws (0 = paper default)
  double b = 2.0 / 3.0;       // ex5 reaction parameter
  double eta = 50.0;          // ex5 reaction strength
  std::size_t branch = 0;     // ex4: which branch (1..4)
  std::size_t points = 7600;  // ex4: points per branch
};

struct TrainOptions {
  std::string problem;
  std::string data;
  std::string out;             // model file path
  std::vector<std::size_t> widths = {320};  // hidden layer widths
  std::string activation = "sigmoid";
  double lambda = 1.0;
  std::size_t epochs = 20000;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::size_t k_models = 1;
  std::size_t batch = 0;
  bool box_aware_init = false;
  int threads = 1;
};

struct FindOptions {
  std::string problem;
  std::string model;
  std::string out;  // results CSV
  double lambda = 1.0;
  std::size_t restarts = 16;
  std::size_t max_iters = 5000;
  double learning_rate = 1e-2;
  double tol_f2 = 1e-6;
  std::uint64_t seed = 0;
  std::vector<std::string> freeze;  // "name=value" or "index=value" entries
  std::string data;                 // optional dataset: search box from its p-range
  double eta = 50.0;                // ex5 instance selection
  double b = 2.0 / 3.0;
  int threads = 1;
};

struct ReproduceOptions {
  std::string experiment;  // ex1..ex5
  std::string scale = "desk";
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;
  std::string fixture;  // oracle fixture path (ex4); empty = recompute live
};

int cmd_gen_data(const GenDataOptions& opts);
int cmd_train(const TrainOptions& opts);
int cmd_find(const FindOptions& opts);
int cmd_reproduce(const ReproduceOptions& opts);
int cmd_oracle_fixture(const std::string& out_path);

}  // namespace bifurc::cli
