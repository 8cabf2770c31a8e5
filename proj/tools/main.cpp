#include <cstdio>
#include <exception>

#include "CLI11.hpp"
#include "bifurc/errors.hpp"
#include "commands.hpp"

using namespace bifurc::cli;

int main(int argc, char** argv) {
  CLI::App app{"bifurc: locate bifurcation points of parametric nonlinear systems\n"
               "via equation-driven neural-network surrogates"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file mirroring all flags");
  app.footer("Exit codes: 0 success, 2 usage error, 3 data error, 4 no convergence.");

  int threads = 1;
  app.add_option("--threads", threads, "worker threads for independent units")
      ->envname("BIFURC_THREADS")
      ->check(CLI::PositiveNumber);

  const std::vector<std::string> problems{"ex1_turning", "ex2_quadratic", "ex3_cubic", "ex4_bvp",
                                          "ex5_schnakenberg"};

  // ---- gen-data -------------------------------------------------------------
  GenDataOptions gen;
  auto* cmd_gen = app.add_subcommand("gen-data", "generate a training dataset (JSONL)");
  cmd_gen->add_option("problem", gen.problem, "problem name")
      ->required()
      ->check(CLI::IsMember(problems));
  cmd_gen->add_option("--out", gen.out, "output dataset path")->required();
  cmd_gen->add_option("--seed", gen.seed, "RNG seed");
  cmd_gen->add_option("--count", gen.count, "sample count (ex1, ex5)");
  cmd_gen->add_option("--nb", gen.n_b, "outer parameter draws (ex2, ex3)");
  cmd_gen->add_option("--reps", gen.reps, "inner draws per outer draw (ex2, ex3)");
  cmd_gen->add_option("--b", gen.b, "ex5 kinetic parameter b");
  cmd_gen->add_option("--eta", gen.eta, "ex5 reaction strength η");
  cmd_gen->add_option("--branch", gen.branch, "ex4 branch index 1..4");
  cmd_gen->add_option("--points", gen.points, "ex4 points per branch");

  // ---- train ----------------------------------------------------------------
  TrainOptions train;
  auto* cmd_tr = app.add_subcommand("train", "fit a surrogate to a dataset (stage 1)");
  cmd_tr->add_option("problem", train.problem, "problem name")
      ->required()
      ->check(CLI::IsMember(problems));
  cmd_tr->add_option("--data", train.data, "dataset path")->required()->check(CLI::ExistingFile);
  cmd_tr->add_option("--out", train.out, "model file path")->required();
  cmd_tr->add_option("--width", train.widths, "hidden layer width(s)")
      ->check(CLI::PositiveNumber);
  cmd_tr->add_option("--activation", train.activation, "relu|sigmoid")
      ->check(CLI::IsMember({"relu", "sigmoid"}));
  cmd_tr->add_option("--lambda", train.lambda, "residual weight λ")
      ->check(CLI::NonNegativeNumber);
  cmd_tr->add_option("--epochs", train.epochs, "training epochs")->check(CLI::PositiveNumber);
  cmd_tr->add_option("--lr", train.learning_rate, "Adam learning rate")
      ->check(CLI::PositiveNumber);
  cmd_tr->add_option("--seed", train.seed, "RNG seed");
  cmd_tr->add_option("--k-models", train.k_models, "best-of-k model selection")
      ->check(CLI::PositiveNumber);
  cmd_tr->add_option("--batch", train.batch, "minibatch size (0 = full batch)");
  cmd_tr->add_flag("--box-aware-init", train.box_aware_init,
                   "rescale the first layer to the data's parameter range");

  // ---- find -----------------------------------------------------------------
  FindOptions find;
  auto* cmd_fd = app.add_subcommand("find", "search for a bifurcation point (stage 2)");
  cmd_fd->add_option("problem", find.problem, "problem name")
      ->required()
      ->check(CLI::IsMember(problems));
  cmd_fd->add_option("--model", find.model, "model file")->required()->check(CLI::ExistingFile);
  cmd_fd->add_option("--out", find.out, "results CSV path")->required();
  cmd_fd->add_option("--lambda", find.lambda, "residual weight λ")
      ->check(CLI::NonNegativeNumber);
  cmd_fd->add_option("--restarts", find.restarts, "random restarts")->check(CLI::PositiveNumber);
  cmd_fd->add_option("--iters", find.max_iters, "descent iterations per restart")
      ->check(CLI::PositiveNumber);
  cmd_fd->add_option("--lr", find.learning_rate, "descent learning rate")
      ->check(CLI::PositiveNumber);
  cmd_fd->add_option("--tol", find.tol_f2, "convergence threshold on f2")
      ->check(CLI::PositiveNumber);
  cmd_fd->add_option("--seed", find.seed, "RNG seed");
  cmd_fd->add_option("--freeze", find.freeze, "pin coordinates, e.g. --freeze b=1");
  cmd_fd->add_option("--data", find.data, "dataset whose p-range bounds the search")
      ->check(CLI::ExistingFile);
  cmd_fd->add_option("--b", find.b, "ex5 kinetic parameter b");
  cmd_fd->add_option("--eta", find.eta, "ex5 reaction strength η");

  // ---- reproduce ------------------------------------------------------------
  ReproduceOptions rep;
  auto* cmd_rp = app.add_subcommand("reproduce", "run a full experiment and emit its artifacts");
  cmd_rp->add_option("experiment", rep.experiment, "ex1|ex2|ex3|ex4|ex5")
      ->required()
      ->check(CLI::IsMember({"ex1", "ex2", "ex3", "ex4", "ex5"}));
  cmd_rp->add_option("--scale", rep.scale, "desk|paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  cmd_rp->add_option("--out", rep.out_dir, "output directory");
  cmd_rp->add_option("--seed", rep.seed, "RNG seed");
  cmd_rp->add_option("--fixture", rep.fixture, "oracle fixture JSON (ex4)")
      ->check(CLI::ExistingFile);

  // ---- oracle-fixture ---------------------------------------------------------
  std::string fixture_out = "oracle_reference.json";
  auto* cmd_fx = app.add_subcommand("oracle-fixture",
                                    "recompute and write the derived reference values");
  cmd_fx->add_option("--out", fixture_out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cmd_gen->parsed()) return cmd_gen_data(gen);
    if (cmd_tr->parsed()) {
      train.threads = threads;
      return cmd_train(train);
    }
    if (cmd_fd->parsed()) {
      find.threads = threads;
      return cmd_find(find);
    }
    if (cmd_rp->parsed()) {
      rep.threads = threads;
      return cmd_reproduce(rep);
    }
    if (cmd_fx->parsed()) return cmd_oracle_fixture(fixture_out);
  } catch (const bifurc::dimension_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const bifurc::parse_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const bifurc::argument_error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const bifurc::search_error& e) {
    std::fprintf(stderr, "no convergence: %s\n", e.what());
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
