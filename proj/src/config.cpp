#include "oslsp/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "oslsp/dataset.hpp"
#include "oslsp/error.hpp"

namespace oslsp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) { return static_cast<std::size_t>(to_u64(key, v)); }

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_size(key, trim(item)));
  return out;
}

std::string from_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

OptimizerKind to_optimizer(const std::string& key, const std::string& v) {
  if (v == "adam") return OptimizerKind::kAdam;
  if (v == "sgd") return OptimizerKind::kSgd;
  throw ConfigError(key + ": expected adam or sgd, got '" + v + "'");
}

std::string from_optimizer(OptimizerKind k) { return k == OptimizerKind::kAdam ? "adam" : "sgd"; }

struct Setting {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<Setting>& settings() {
  using C = ExperimentConfig;
  using S = std::string;
  static const std::vector<Setting> table = {
      {"seed", [](C& c, const S& v) { c.seed = to_u64("seed", v); }, [](const C& c) { return std::to_string(c.seed); }},
      {"num_classes", [](C& c, const S& v) { c.arch.num_classes = to_size("num_classes", v); },
       [](const C& c) { return std::to_string(c.arch.num_classes); }},
      {"input_dim", [](C& c, const S& v) { c.arch.input_dim = to_size("input_dim", v); },
       [](const C& c) { return std::to_string(c.arch.input_dim); }},
      {"feature_dim", [](C& c, const S& v) { c.arch.feature_dim = to_size("feature_dim", v); },
       [](const C& c) { return std::to_string(c.arch.feature_dim); }},
      {"backbone_hidden", [](C& c, const S& v) { c.arch.backbone_hidden = to_sizes("backbone_hidden", v); },
       [](const C& c) { return from_sizes(c.arch.backbone_hidden); }},
      {"head_hidden", [](C& c, const S& v) { c.arch.head_hidden = to_sizes("head_hidden", v); },
       [](const C& c) { return from_sizes(c.arch.head_hidden); }},
      {"per_date_count", [](C& c, const S& v) { c.per_date_count = to_size("per_date_count", v); },
       [](const C& c) { return std::to_string(c.per_date_count); }},
      {"test_per_date_count", [](C& c, const S& v) { c.test_per_date_count = to_size("test_per_date_count", v); },
       [](const C& c) { return std::to_string(c.test_per_date_count); }},
      {"schedule_file", [](C& c, const S& v) { c.schedule_file = v; }, [](const C& c) { return c.schedule_file; }},
      {"radius", [](C& c, const S& v) { c.manifold.radius = to_double("radius", v); },
       [](const C& c) { return format_double(c.manifold.radius); }},
      {"arc_angle", [](C& c, const S& v) { c.manifold.arc_angle = to_double("arc_angle", v); },
       [](const C& c) { return format_double(c.manifold.arc_angle); }},
      {"wiggle", [](C& c, const S& v) { c.manifold.wiggle = to_double("wiggle", v); },
       [](const C& c) { return format_double(c.manifold.wiggle); }},
      {"noise_scale", [](C& c, const S& v) { c.manifold.noise_scale = to_double("noise_scale", v); },
       [](const C& c) { return format_double(c.manifold.noise_scale); }},
      {"hard_mode", [](C& c, const S& v) { c.manifold.hard_mode = to_bool("hard_mode", v); },
       [](const C& c) { return from_bool(c.manifold.hard_mode); }},
      {"hard_jitter", [](C& c, const S& v) { c.manifold.hard_jitter = to_double("hard_jitter", v); },
       [](const C& c) { return format_double(c.manifold.hard_jitter); }},
      {"bag_size", [](C& c, const S& v) { c.train.bag_size = to_size("bag_size", v); },
       [](const C& c) { return std::to_string(c.train.bag_size); }},
      {"bins", [](C& c, const S& v) { c.train.sim.bins = to_size("bins", v); },
       [](const C& c) { return std::to_string(c.train.sim.bins); }},
      {"sigma", [](C& c, const S& v) { c.train.sim.expansion.sigma = to_double("sigma", v); },
       [](const C& c) { return format_double(c.train.sim.expansion.sigma); }},
      {"kernel",
       [](C& c, const S& v) {
         if (v == "integrated") c.train.sim.expansion.mode = KernelMode::kIntegrated;
         else if (v == "midpoint") c.train.sim.expansion.mode = KernelMode::kMidpoint;
         else throw ConfigError("kernel: expected integrated or midpoint, got '" + v + "'");
       },
       [](const C& c) { return S(c.train.sim.expansion.mode == KernelMode::kIntegrated ? "integrated" : "midpoint"); }},
      {"pairing",
       [](C& c, const S& v) {
         if (v == "aligned") c.train.sim.pairing = PairingMode::kAligned;
         else if (v == "cross") c.train.sim.pairing = PairingMode::kFullCross;
         else throw ConfigError("pairing: expected aligned or cross, got '" + v + "'");
       },
       [](const C& c) { return S(c.train.sim.pairing == PairingMode::kAligned ? "aligned" : "cross"); }},
      {"ground_truth",
       [](C& c, const S& v) {
         if (v == "smoothed") c.train.sim.ground_truth = GroundTruthBinning::kSmoothed;
         else if (v == "hard") c.train.sim.ground_truth = GroundTruthBinning::kHard;
         else throw ConfigError("ground_truth: expected smoothed or hard, got '" + v + "'");
       },
       [](const C& c) { return S(c.train.sim.ground_truth == GroundTruthBinning::kSmoothed ? "smoothed" : "hard"); }},
      {"stage1_epochs", [](C& c, const S& v) { c.train.stage1_epochs = to_size("stage1_epochs", v); },
       [](const C& c) { return std::to_string(c.train.stage1_epochs); }},
      {"stage1_steps_per_epoch",
       [](C& c, const S& v) { c.train.stage1_steps_per_epoch = to_size("stage1_steps_per_epoch", v); },
       [](const C& c) { return std::to_string(c.train.stage1_steps_per_epoch); }},
      {"pairs_per_step", [](C& c, const S& v) { c.train.pairs_per_step = to_size("pairs_per_step", v); },
       [](const C& c) { return std::to_string(c.train.pairs_per_step); }},
      {"backbone_optimizer",
       [](C& c, const S& v) { c.train.backbone_optimizer.kind = to_optimizer("backbone_optimizer", v); },
       [](const C& c) { return from_optimizer(c.train.backbone_optimizer.kind); }},
      {"backbone_lr", [](C& c, const S& v) { c.train.backbone_optimizer.learning_rate = to_double("backbone_lr", v); },
       [](const C& c) { return format_double(c.train.backbone_optimizer.learning_rate); }},
      {"freeze",
       [](C& c, const S& v) {
         if (v == "none") c.train.freeze = FreezePolicy::kNone;
         else if (v == "all_but_last") c.train.freeze = FreezePolicy::kAllButLast;
         else throw ConfigError("freeze: expected none or all_but_last, got '" + v + "'");
       },
       [](const C& c) { return S(c.train.freeze == FreezePolicy::kNone ? "none" : "all_but_last"); }},
      {"stage2_epochs", [](C& c, const S& v) { c.train.stage2_epochs = to_size("stage2_epochs", v); },
       [](const C& c) { return std::to_string(c.train.stage2_epochs); }},
      {"bags_per_step", [](C& c, const S& v) { c.train.bags_per_step = to_size("bags_per_step", v); },
       [](const C& c) { return std::to_string(c.train.bags_per_step); }},
      {"head_optimizer", [](C& c, const S& v) { c.train.head_optimizer.kind = to_optimizer("head_optimizer", v); },
       [](const C& c) { return from_optimizer(c.train.head_optimizer.kind); }},
      {"head_lr", [](C& c, const S& v) { c.train.head_optimizer.learning_rate = to_double("head_lr", v); },
       [](const C& c) { return format_double(c.train.head_optimizer.learning_rate); }},
      {"beta1",
       [](C& c, const S& v) { c.train.backbone_optimizer.beta1 = c.train.head_optimizer.beta1 = to_double("beta1", v); },
       [](const C& c) { return format_double(c.train.backbone_optimizer.beta1); }},
      {"beta2",
       [](C& c, const S& v) { c.train.backbone_optimizer.beta2 = c.train.head_optimizer.beta2 = to_double("beta2", v); },
       [](const C& c) { return format_double(c.train.backbone_optimizer.beta2); }},
      {"adam_epsilon",
       [](C& c, const S& v) {
         c.train.backbone_optimizer.epsilon = c.train.head_optimizer.epsilon = to_double("adam_epsilon", v);
       },
       [](const C& c) { return format_double(c.train.backbone_optimizer.epsilon); }},
      {"joint", [](C& c, const S& v) { c.train.joint = to_bool("joint", v); },
       [](const C& c) { return from_bool(c.train.joint); }},
      {"checkpoint_every", [](C& c, const S& v) { c.train.checkpoint_every = to_size("checkpoint_every", v); },
       [](const C& c) { return std::to_string(c.train.checkpoint_every); }},
      {"train_baseline", [](C& c, const S& v) { c.train_baseline = to_bool("train_baseline", v); },
       [](const C& c) { return from_bool(c.train_baseline); }},
      {"class_order", [](C& c, const S& v) { c.class_order = v; }, [](const C& c) { return c.class_order; }},
  };
  return table;
}

}  // namespace

void ExperimentConfig::sync() {
  manifold.input_dim = arch.input_dim;
  manifold.num_classes = arch.num_classes;
  manifold.seed = seed;
  train.seed = seed;
}

void ExperimentConfig::validate() const {
  arch.validate();
  manifold.validate();
  train.validate();
  if (per_date_count == 0 || test_per_date_count == 0) {
    throw ConfigError("per_date_count and test_per_date_count must be positive");
  }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::to_key_values() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Setting& s : settings()) out.emplace_back(s.key, s.get(*this));
  return out;
}

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value) {
  for (const Setting& s : settings()) {
    if (key == s.key) {
      s.set(config, value);
      config.sync();
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(config, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  config.sync();
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFoundError(path.string());
  return parse_config(in);
}

void write_config(std::ostream& out, const ExperimentConfig& config) {
  for (const auto& [k, v] : config.to_key_values()) out << k << " = " << v << '\n';
}

ProportionSchedule resolve_schedule(const ExperimentConfig& config, const std::filesystem::path& base_dir) {
  ProportionSchedule schedule;
  if (config.schedule_file.empty()) {
    schedule = default_schedule(config.arch.num_classes);
  } else {
    std::filesystem::path p(config.schedule_file);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    schedule = read_proportions(p);
  }
  if (schedule.num_classes() != config.arch.num_classes) {
    throw ConfigError("schedule has " + std::to_string(schedule.num_classes()) + " classes but num_classes = " +
                      std::to_string(config.arch.num_classes));
  }
  validate_schedule(schedule);
  return schedule;
}

}  // namespace oslsp
