// oslsp command-line driver: gen-data, train, eval, inspect-hist.

#include <cstdlib>
#include <iostream>
#include <string>

#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "oslsp/commands.hpp"
#include "oslsp/error.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("oslsp");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("OSLSP_LOG")) spdlog::cfg::helpers::load_levels(level);
}

void add_overrides(CLI::App* cmd, oslsp::cli::Overrides& o) {
  cmd->add_option("--seed", o.seed, "Root seed, overrides the config");
  cmd->add_option("--bins", o.bins, "Similarity histogram bins, overrides the config")->check(CLI::PositiveNumber);
  cmd->add_option("--sigma", o.sigma, "Gaussian expansion width, overrides the config")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Ordinal similarity-proportion learning experiments"};
  app.require_subcommand(1);

  oslsp::cli::GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset and its proportion table");
  gen_cmd->add_option("--config", gen.config, "Config file (key = value)");
  gen_cmd->add_option("--out", gen.out_dir, "Output directory")->required();
  add_overrides(gen_cmd, gen.overrides);

  oslsp::cli::TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the backbone and head, plus the baseline");
  train_cmd->add_option("--config", tr.config, "Config file (key = value)");
  train_cmd->add_option("--data", tr.data, "Training dataset CSV")->required();
  train_cmd->add_option("--proportions", tr.proportions, "Proportion table CSV (default: next to the data)");
  train_cmd->add_option("--out", tr.out_dir, "Run directory")->required();
  train_cmd->add_flag("--deterministic", tr.deterministic, "Require bit-reproducible execution");
  add_overrides(train_cmd, tr.overrides);

  oslsp::cli::EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint against instance labels");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Model checkpoint")->required();
  eval_cmd->add_option("--data", ev.data, "Labelled dataset CSV")->required();
  eval_cmd->add_option("--class-order", ev.class_order, "Comma-separated 1-based class ranks for RMSE");
  eval_cmd->add_option("--out", ev.out_dir, "Directory for metrics files");

  oslsp::cli::InspectArgs in;
  auto* inspect_cmd = app.add_subcommand("inspect-hist", "Compare predicted and target similarity histograms");
  inspect_cmd->add_option("--checkpoint", in.checkpoint, "Model checkpoint")->required();
  inspect_cmd->add_option("--data", in.data, "Dataset CSV")->required();
  inspect_cmd->add_option("--proportions", in.proportions, "Proportion table CSV (default: next to the data)");
  inspect_cmd->add_option("--config", in.config, "Config file (key = value)");
  inspect_cmd->add_option("--bags", in.bags, "Bag pair as dateA[:i],dateB[:j]")->capture_default_str();
  inspect_cmd->add_option("--out", in.out_dir, "Directory for histogram.csv and summary.txt");
  add_overrides(inspect_cmd, in.overrides);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) oslsp::cli::gen_data(gen, std::cout);
    else if (*train_cmd) oslsp::cli::train(tr, std::cout);
    else if (*eval_cmd) oslsp::cli::eval(ev, std::cout);
    else if (*inspect_cmd) oslsp::cli::inspect_hist(in, std::cout);
  } catch (const oslsp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
