#include "oslsp/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include <spdlog/spdlog.h>

#include "oslsp/error.hpp"
#include "oslsp/losses.hpp"

namespace oslsp {

ExperimentResult run_training(const Dataset& data, const ProportionTable& table, const ExperimentConfig& config,
                              const SnapshotSink& sink) {
  config.validate();
  if (data.input_dim != config.arch.input_dim || data.num_classes != config.arch.num_classes) {
    throw ConfigError("dataset is " + std::to_string(data.input_dim) + "-dimensional with " +
                      std::to_string(data.num_classes) + " classes, config expects " +
                      std::to_string(config.arch.input_dim) + " and " + std::to_string(config.arch.num_classes));
  }
  const std::vector<Bag> bags = build_bags(data, table, config.train.bag_size, derive_seed(config.seed, "bags"));
  spdlog::info("built {} bags of {} instances", bags.size(), config.train.bag_size);

  ExperimentResult result{init_params(derive_seed(config.seed, "model"), config.arch), std::nullopt, {}, {}, bags.size()};
  const ModelParams initial = result.model;

  auto emit = [&sink](const std::string& name, const ModelParams& m) {
    if (sink) sink(name, m);
  };

  if (config.train.joint) {
    result.log = train_joint(bags, result.model, config.train, [&](const std::string& stage, std::size_t epoch) {
      emit(epoch == config.train.stage1_epochs ? stage : stage + "_epoch" + std::to_string(epoch), result.model);
    });
  } else {
    result.log = train_backbone(bags, result.model.backbone, config.train, [&](const std::string& stage, std::size_t epoch) {
      emit(epoch == config.train.stage1_epochs ? stage : stage + "_epoch" + std::to_string(epoch), result.model);
    });
    const auto trend = loss_trend(result.log.losses("stage1"));
    spdlog::info("stage1 loss {:.5f} -> {:.5f} ({:.1f}% reduction)", trend.initial, trend.final, 100.0 * trend.reduction);

    TrainLog head_log = train_head(bags, result.model.backbone, result.model.head, config.train,
                                   [&](const std::string& stage, std::size_t epoch) {
                                     emit(epoch == config.train.stage2_epochs ? stage : stage + "_epoch" + std::to_string(epoch),
                                          result.model);
                                   });
    result.log.entries.insert(result.log.entries.end(), head_log.entries.begin(), head_log.entries.end());
  }

  if (config.train_baseline) {
    ModelParams baseline = initial;
    result.baseline_log = train_head(bags, baseline.backbone, baseline.head, config.train);
    for (auto& e : result.baseline_log.entries) e.stage = "baseline_" + e.stage;
    emit("baseline", baseline);
    result.baseline = std::move(baseline);
  }
  return result;
}

MetricsReport evaluate_model(const ModelParams& model, const Dataset& data, std::span<const std::size_t> class_order) {
  if (data.input_dim != model.arch.input_dim) {
    throw ConfigError("checkpoint expects input dimension " + std::to_string(model.arch.input_dim) + ", dataset has " +
                      std::to_string(data.input_dim));
  }
  if (data.num_classes != model.arch.num_classes) {
    throw ConfigError("checkpoint predicts " + std::to_string(model.arch.num_classes) + " classes, dataset has " +
                      std::to_string(data.num_classes));
  }
  const std::vector<int> predicted = predict_classes(model, data.inputs());
  const std::vector<int> truth = data.true_classes();
  return evaluate(predicted, truth, data.num_classes, class_order);
}

HistogramInspection inspect_histograms(const ModelParams& model, const Bag& a, const Bag& b,
                                       const SimPropOptions& options) {
  if (a.size() != b.size()) throw Error("inspect_histograms: bags differ in size");
  diff::Tape tape;
  diff::Var fa = model.backbone.forward_frozen(tape.constant(a.inputs));
  diff::Var fb = model.backbone.forward_frozen(tape.constant(b.inputs));
  const auto pairs = make_pairs(a.size(), options.pairing);
  const BinLayout layout(options.bins);
  diff::Var predicted = gaussian_histogram(scaled_cosine_pairs(fa, fb, pairs), layout, options.expansion);
  const SimilarityHistogram target = discretize_ground_truth(ground_truth_pdf(a.proportion, b.proportion), options.bins,
                                                             options.expansion, options.ground_truth);
  HistogramInspection out;
  for (std::size_t i = 0; i < layout.bins(); ++i) out.bin_centers.push_back(layout.center(i));
  out.predicted = predicted.value().data;
  out.target = target.values;
  out.kl = kl_predicted_to_target(predicted, target.values).scalar();
  return out;
}

void write_train_log_csv(std::ostream& out, const TrainLog& log) {
  out << "stage,step,loss\n";
  for (const auto& e : log.entries) out << e.stage << ',' << e.step << ',' << format_double(e.loss) << '\n';
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFoundError(path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 15];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace oslsp
