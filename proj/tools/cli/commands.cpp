#include "commands.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "io.hpp"
#include "kernelgp/errors.hpp"
#include "kernelgp/gp.hpp"
#include "kernelgp/parallel.hpp"
#include "kernelgp/train.hpp"

namespace kernelgp::cli {

namespace {

namespace fs = std::filesystem;

struct DataFlags {
  std::string data;
  std::string labels;
  int label_col = -1;

  Dataset load() const {
    std::optional<fs::path> labels_path;
    if (!labels.empty()) labels_path = labels;
    std::optional<int> col;
    if (label_col >= 0) col = label_col;
    return load_dataset(data, labels_path, col);
  }
};

struct SolverFlags {
  std::string mode = "exact";
  std::string engine = "onthefly";
  double tol = 1e-6;
  double probe_tol = 1e-2;
  Index max_iter = 500;
  Index probes = 16;
  Index precond_rank = 0;
  bool no_precond = false;
  Index block_size = EngineMode::kDefaultBlockSize;
  Index dense_budget = EngineMode::kDefaultDenseBudget;
  std::uint64_t seed = 0;
  int threads = 0;

  InferenceMode inference_mode() const {
    return mode == "iterative" ? InferenceMode::Iterative : InferenceMode::Exact;
  }

  SolverConfig config() const {
    SolverConfig c;
    c.tol = tol;
    c.probe_tol = probe_tol;
    c.max_iter = max_iter;
    c.num_probes = probes;
    c.precond_rank = precond_rank;
    c.use_precond = !no_precond;
    c.engine = engine == "dense" ? EngineMode::dense() : EngineMode::on_the_fly(block_size);
    c.engine.dense_budget = dense_budget;
    return c;
  }

  void apply_threads() const {
    if (threads > 0) {
      set_num_threads(threads);
    } else {
      configure_threads_from_env();
    }
  }
};

void add_data_flags(CLI::App& cmd, DataFlags& f) {
  cmd.add_option("--data", f.data, "Training features, headerless CSV")->required();
  auto* labels = cmd.add_option("--labels", f.labels, "Training labels, one-column CSV");
  auto* col = cmd.add_option("--label-col", f.label_col, "Take labels from this 0-based column of --data")
                  ->check(CLI::NonNegativeNumber);
  labels->excludes(col);
}

void add_solver_flags(CLI::App& cmd, SolverFlags& f) {
  cmd.add_option("--mode", f.mode, "exact or iterative")
      ->check(CLI::IsMember({"exact", "iterative"}))
      ->capture_default_str();
  cmd.add_option("--engine", f.engine, "Kernel storage for iterative mode: onthefly or dense")
      ->check(CLI::IsMember({"onthefly", "dense"}))
      ->capture_default_str();
  cmd.add_option("--tol", f.tol, "Relative residual tolerance for PCG solves")->capture_default_str();
  cmd.add_option("--probe-tol", f.probe_tol, "Relative residual tolerance for probe solves")
      ->capture_default_str();
  cmd.add_option("--max-iter", f.max_iter, "Iteration cap per solve")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--probes", f.probes, "Number of probe vectors")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--precond-rank", f.precond_rank, "Nystrom preconditioner rank (0 = automatic)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd.add_flag("--no-precond", f.no_precond, "Disable the preconditioner");
  cmd.add_option("--block-size", f.block_size, "Row block size of the on-the-fly engine")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--dense-budget", f.dense_budget, "Largest n allowed for dense kernel matrices")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--seed", f.seed, "Probe RNG seed")->capture_default_str();
  cmd.add_option("--threads", f.threads, "Worker threads (overrides KERNELGP_NUM_THREADS)")
      ->check(CLI::NonNegativeNumber);
}

fs::path default_history_path(const fs::path& model_path) {
  fs::path p = model_path;
  p.replace_extension(".history.csv");
  return p;
}

int cmd_train(const DataFlags& data, const SolverFlags& solver, const std::string& kernel,
              int max_steps, double lr, const std::string& out_path, const std::string& history,
              std::ostream& out) {
  solver.apply_threads();
  const KernelType kt = parse_kernel(kernel);
  const Dataset ds = data.load();

  TrainConfig config;
  config.learning_rate = lr;
  config.max_steps = max_steps;
  config.mode = solver.inference_mode();
  config.solver = solver.config();
  config.seed = solver.seed;
  const TrainResult result = fit(kt, ds.points, ds.labels, config);

  ModelFile model;
  model.kernel = kt;
  model.params = result.params;
  write_model(out_path, model);
  write_history(history.empty() ? default_history_path(out_path) : fs::path(history),
                result.loss_history, result.grad_norm_history);

  out << "steps " << result.loss_history.size() << '\n'
      << "final_loss " << format_double(result.loss_history.back()) << '\n'
      << "l " << format_double(result.params.l) << '\n'
      << "f " << format_double(result.params.f) << '\n'
      << "s " << format_double(result.params.s) << '\n';
  if (result.status == TrainStatus::SolverWarning) {
    out << "warning: at least one iterative solve stopped at --max-iter before reaching its "
           "tolerance\n";
  }
  return kExitOk;
}

int cmd_predict(const DataFlags& data, const SolverFlags& solver, const std::string& model_path,
                const std::string& test_path, const std::string& out_path, std::ostream& out) {
  solver.apply_threads();
  const ModelFile model = read_model(model_path);
  const Dataset ds = data.load();
  const RowMatrix test = read_csv(test_path);

  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  if (test.rows() > 0) {
    if (test.cols() != ds.points.dim()) {
      throw DataError(test_path + ": test points have " + std::to_string(test.cols()) +
                      " columns, training data has " + std::to_string(ds.points.dim()) +
                      " features");
    }
    const Prediction pred = predict(model.kernel, ds.points, ds.labels, PointSet(test),
                                    model.params, solver.inference_mode(), solver.config());
    mean = pred.mean;
    stddev = pred.stddev;
  }
  if (out_path.empty()) {
    out << "mean,stddev\n";
    for (Index i = 0; i < mean.size(); ++i) {
      out << format_double(mean[i]) << ',' << format_double(stddev[i]) << '\n';
    }
  } else {
    write_predictions(out_path, mean, stddev);
  }
  return kExitOk;
}

int cmd_eval(const DataFlags& data, const SolverFlags& solver, const std::string& model_path,
             bool grad, std::ostream& out) {
  solver.apply_threads();
  const ModelFile model = read_model(model_path);
  const Dataset ds = data.load();
  const LossGrad lg = evaluate_loss_grad(model.kernel, ds.points, ds.labels, model.params,
                                         solver.inference_mode(), solver.config(), solver.seed);
  out << "loss " << format_double(lg.loss) << '\n';
  if (grad) {
    out << "grad_l " << format_double(lg.grad_l) << '\n'
        << "grad_f " << format_double(lg.grad_f) << '\n'
        << "grad_s " << format_double(lg.grad_s) << '\n';
  }
  if (!lg.converged) out << "warning: iterative solve did not reach its tolerance\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian process regression with iterative solvers"};
  app.name(args.empty() ? "kernelgp" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);

  DataFlags data;
  SolverFlags solver;
  std::string kernel = "gaussian";
  int max_steps = 100;
  double lr = 0.1;
  std::string model_out;
  std::string history;
  std::string model_path;
  std::string test_path;
  std::string pred_out;
  bool grad = false;

  auto* train = app.add_subcommand("train", "Fit hyperparameters and write a model file");
  add_data_flags(*train, data);
  add_solver_flags(*train, solver);
  train->add_option("--kernel", kernel, "gaussian, matern32 or matern52")
      ->check(CLI::IsMember({"gaussian", "matern32", "matern52"}))
      ->capture_default_str();
  train->add_option("--max-steps", max_steps, "Adam steps")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--lr", lr, "Adam learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--out", model_out, "Model file to write")->required();
  train->add_option("--history", history, "Loss history CSV (default: <out>.history.csv)");

  auto* pred = app.add_subcommand("predict", "Predict mean and stddev at test points");
  add_data_flags(*pred, data);
  add_solver_flags(*pred, solver);
  pred->add_option("--model", model_path, "Model file from `train`")->required();
  pred->add_option("--test", test_path, "Test features, headerless CSV")->required();
  pred->add_option("--out", pred_out, "Predictions CSV (default: stdout)");

  auto* eval = app.add_subcommand("eval", "Print the loss (and gradient) at a model's hyperparameters");
  add_data_flags(*eval, data);
  add_solver_flags(*eval, solver);
  eval->add_option("--model", model_path, "Model file")->required();
  eval->add_flag("--grad", grad, "Also print dL/dl, dL/df, dL/ds");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(data, solver, kernel, max_steps, lr, model_out, history, out);
    if (*pred) return cmd_predict(data, solver, model_path, test_path, pred_out, out);
    if (*eval) return cmd_eval(data, solver, model_path, grad, out);
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ResourceLimit& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace kernelgp::cli
