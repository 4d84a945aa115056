#include "oslsp/commands.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "oslsp/error.hpp"
#include "oslsp/experiment.hpp"
#include "oslsp/random.hpp"
#include "oslsp/synth.hpp"

namespace oslsp::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) throw ConfigError("output directory is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw FileNotFoundError(path.string());
}

Json config_json(const ExperimentConfig& config) {
  Json j = Json::object();
  for (const auto& [k, v] : config.to_key_values()) j[k] = v;
  return j;
}

void write_json(const fs::path& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

struct BagRef {
  std::string date;
  std::size_t index = 0;
};

BagRef parse_bag_ref(const std::string& text) {
  BagRef ref;
  const auto colon = text.find(':');
  ref.date = text.substr(0, colon);
  if (ref.date.empty()) throw ConfigError("empty date in bag selector '" + text + "'");
  if (colon != std::string::npos) {
    const std::string idx = text.substr(colon + 1);
    try {
      std::size_t used = 0;
      ref.index = std::stoul(idx, &used);
      if (used != idx.size()) throw std::invalid_argument(idx);
    } catch (const std::exception&) {
      throw ConfigError("bad bag index in '" + text + "'");
    }
  }
  return ref;
}

const Bag& select_bag(const std::vector<Bag>& bags, const BagRef& ref) {
  std::size_t seen = 0;
  for (const Bag& b : bags) {
    if (b.date != ref.date) continue;
    if (seen == ref.index) return b;
    ++seen;
  }
  if (seen == 0) throw ConfigError("no bags for date '" + ref.date + "'");
  throw ConfigError("date '" + ref.date + "' has " + std::to_string(seen) + " bags, index " +
                    std::to_string(ref.index) + " requested");
}

}  // namespace

ExperimentConfig resolve_config(const fs::path& config_path, const Overrides& overrides) {
  ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.bins) config.train.sim.bins = *overrides.bins;
  if (overrides.sigma) config.train.sim.expansion.sigma = *overrides.sigma;
  config.sync();
  config.validate();
  return config;
}

void gen_data(const GenDataArgs& args, std::ostream& report) {
  const ExperimentConfig config = resolve_config(args.config, args.overrides);
  const ProportionSchedule schedule =
      resolve_schedule(config, args.config.empty() ? fs::path{} : args.config.parent_path());
  ensure_dir(args.out_dir);

  const Dataset train_set = generate(schedule, config.manifold, config.per_date_count, derive_seed(config.seed, "data"));
  const Dataset test_set =
      generate(schedule, config.manifold, config.test_per_date_count, derive_seed(config.seed, "test"));
  write_dataset(args.out_dir / "dataset.csv", train_set);
  write_dataset(args.out_dir / "test.csv", test_set);
  write_proportions(args.out_dir / "proportions.csv", schedule);

  std::map<std::string, std::vector<std::size_t>> counts;
  for (const Instance& inst : train_set.instances) {
    auto& c = counts[inst.date];
    c.resize(train_set.num_classes, 0);
    ++c[static_cast<std::size_t>(inst.true_class)];
  }
  report << "generated " << train_set.instances.size() << " training and " << test_set.instances.size()
         << " test instances in " << args.out_dir.string() << '\n';
  for (const std::string& date : schedule.dates()) {
    const auto& c = counts[date];
    std::size_t total = 0;
    for (std::size_t n : c) total += n;
    report << date << ": " << total << " instances, empirical proportions";
    for (std::size_t n : c) report << ' ' << format_double(static_cast<double>(n) / static_cast<double>(total));
    report << '\n';
  }
}

void train(const TrainArgs& args, std::ostream& report) {
  const ExperimentConfig config = resolve_config(args.config, args.overrides);
  require_file(args.data);
  const fs::path prop_path = args.proportions.empty() ? args.data.parent_path() / "proportions.csv" : args.proportions;
  require_file(prop_path);
  ensure_dir(args.out_dir);

  const Dataset data = read_dataset(args.data);
  const ProportionTable table = read_proportions(prop_path);

  Json manifest;
  manifest["command"] = "train";
  manifest["seed"] = config.seed;
  manifest["deterministic"] = args.deterministic;
  manifest["inputs"] = {{"data", {{"path", args.data.string()}, {"checksum", file_checksum(args.data)}}},
                        {"proportions", {{"path", prop_path.string()}, {"checksum", file_checksum(prop_path)}}}};
  manifest["config"] = config_json(config);
  manifest["status"] = "running";
  write_json(args.out_dir / "manifest.json", manifest);
  {
    auto out = open_out(args.out_dir / "config.txt");
    write_config(out, config);
  }

  std::vector<std::string> written;
  auto sink = [&](const std::string& name, const ModelParams& model) {
    const std::string file = name + ".ckpt";
    save_checkpoint(args.out_dir / file, model);
    written.push_back(file);
    spdlog::debug("wrote {}", file);
  };
  const ExperimentResult result = run_training(data, table, config, sink);

  save_checkpoint(args.out_dir / "model.ckpt", result.model);
  written.push_back("model.ckpt");
  {
    auto out = open_out(args.out_dir / "train_log.csv");
    write_train_log_csv(out, result.log);
  }
  written.push_back("train_log.csv");
  if (result.baseline) {
    auto out = open_out(args.out_dir / "baseline_log.csv");
    write_train_log_csv(out, result.baseline_log);
    written.push_back("baseline_log.csv");
  }
  written.push_back("config.txt");

  Json outputs = Json::object();
  for (const std::string& f : written) outputs[f] = file_checksum(args.out_dir / f);
  manifest["bags"] = result.bag_count;
  manifest["outputs"] = outputs;
  manifest["status"] = "complete";
  write_json(args.out_dir / "manifest.json", manifest);

  report << "trained on " << data.instances.size() << " instances in " << result.bag_count << " bags\n";
  if (!config.train.joint) {
    const LossTrend t1 = loss_trend(result.log.losses("stage1"));
    report << "stage1 loss " << format_double(t1.initial) << " -> " << format_double(t1.final) << '\n';
  }
  report << "model written to " << (args.out_dir / "model.ckpt").string() << '\n';
}

void eval(const EvalArgs& args, std::ostream& report) {
  const ModelParams model = load_checkpoint(args.checkpoint);
  require_file(args.data);
  const Dataset data = read_dataset(args.data);
  const std::vector<std::size_t> order = args.class_order.empty()
                                             ? default_class_order(data.num_classes)
                                             : parse_class_order(args.class_order, data.num_classes);
  const MetricsReport metrics = evaluate_model(model, data, order);

  write_metrics_table(report, metrics);
  if (args.out_dir.empty()) return;
  ensure_dir(args.out_dir);
  {
    auto out = open_out(args.out_dir / "metrics.txt");
    write_metrics_table(out, metrics);
  }
  {
    auto out = open_out(args.out_dir / "metrics.csv");
    write_metrics_csv(out, metrics);
  }
  {
    auto out = open_out(args.out_dir / "metrics.json");
    write_metrics_json(out, metrics);
  }
  {
    auto out = open_out(args.out_dir / "confusion.csv");
    write_confusion_csv(out, metrics);
  }
}

void inspect_hist(const InspectArgs& args, std::ostream& report) {
  const ExperimentConfig config = resolve_config(args.config, args.overrides);
  const ModelParams model = load_checkpoint(args.checkpoint);
  require_file(args.data);
  const fs::path prop_path = args.proportions.empty() ? args.data.parent_path() / "proportions.csv" : args.proportions;
  require_file(prop_path);
  const Dataset data = read_dataset(args.data);
  const ProportionTable table = read_proportions(prop_path);

  const auto comma = args.bags.find(',');
  if (comma == std::string::npos) throw ConfigError("bag selector must name two bags: dateA[:i],dateB[:j]");
  const BagRef ref_a = parse_bag_ref(args.bags.substr(0, comma));
  const BagRef ref_b = parse_bag_ref(args.bags.substr(comma + 1));
  for (const BagRef* r : {&ref_a, &ref_b}) {
    if (!table.find(r->date)) throw ConfigError("unknown date '" + r->date + "'");
  }

  const std::vector<Bag> bags = build_bags(data, table, config.train.bag_size, derive_seed(config.seed, "bags"));
  const Bag& a = select_bag(bags, ref_a);
  const Bag& b = select_bag(bags, ref_b);
  const HistogramInspection h = inspect_histograms(model, a, b, config.train.sim);

  std::ostringstream csv;
  csv << "bin_center,p_hat,p\n";
  for (std::size_t i = 0; i < h.bin_centers.size(); ++i) {
    csv << format_double(h.bin_centers[i]) << ',' << format_double(h.predicted[i]) << ',' << format_double(h.target[i])
        << '\n';
  }
  const std::string summary = "kl = " + format_double(h.kl) + "\n";
  report << csv.str() << summary;
  if (args.out_dir.empty()) return;
  ensure_dir(args.out_dir);
  open_out(args.out_dir / "histogram.csv") << csv.str();
  open_out(args.out_dir / "summary.txt") << "bags = " << args.bags << '\n' << summary;
}

}  // namespace oslsp::cli
