#include "oslsp/train.hpp"

#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "oslsp/error.hpp"
#include "oslsp/random.hpp"

namespace oslsp {

namespace {

void require_finite_loss(double loss, const std::string& stage, std::size_t step) {
  if (!std::isfinite(loss)) throw NonFiniteError(stage, "loss at step " + std::to_string(step));
}

// Runs `body` and re-throws non-finite failures with the step index attached.
template <typename F>
double at_step(const std::string& stage, std::size_t step, F&& body) {
  try {
    const double loss = body();
    require_finite_loss(loss, stage, step);
    return loss;
  } catch (const NonFiniteError& e) {
    throw NonFiniteError(e.op(), std::string(e.what()) + " (" + stage + " step " + std::to_string(step) + ")");
  }
}

bool checkpoint_due(const TrainConfig& c, std::size_t epoch) {
  return c.checkpoint_every > 0 && epoch % c.checkpoint_every == 0;
}

std::vector<diff::Parameter*> trainable_backbone_params(Backbone& backbone, FreezePolicy policy) {
  return policy == FreezePolicy::kAllButLast ? backbone.last_layer_parameters() : backbone.parameters();
}

}  // namespace

Optimizer::Optimizer(OptimizerConfig config, std::vector<diff::Parameter*> params)
    : config_(config), params_(std::move(params)) {
  if (!(config_.learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  for (auto* p : params_) {
    m_.emplace_back(p->value.rows, p->value.cols);
    v_.emplace_back(p->value.rows, p->value.cols);
  }
}

void Optimizer::zero_grad() { diff::zero_grad(params_); }

void Optimizer::step() {
  ++t_;
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::kSgd) {
    for (auto* p : params_)
      for (std::size_t i = 0; i < p->value.size(); ++i) p->value.data[i] -= lr * p->grad.data[i];
    return;
  }
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = *params_[k];
    auto& m = m_[k].data;
    auto& v = v_[k].data;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad.data[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      p.value.data[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
    }
  }
}

void TrainConfig::validate() const {
  if (bag_size == 0) throw ConfigError("bag_size must be positive");
  if (sim.bins == 0) throw ConfigError("bins must be at least 1");
  if (!(sim.expansion.sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (pairs_per_step == 0 || bags_per_step == 0) throw ConfigError("pairs_per_step and bags_per_step must be positive");
  for (const auto* o : {&backbone_optimizer, &head_optimizer}) {
    if (!(o->learning_rate >= 0.0)) throw ConfigError("learning rates must be non-negative");
    if (!(o->beta1 >= 0.0 && o->beta1 < 1.0 && o->beta2 >= 0.0 && o->beta2 < 1.0)) {
      throw ConfigError("optimizer betas must be in [0, 1)");
    }
    if (!(o->epsilon > 0.0)) throw ConfigError("optimizer epsilon must be positive");
  }
}

std::vector<double> TrainLog::losses(const std::string& stage) const {
  std::vector<double> out;
  for (const auto& e : entries)
    if (e.stage == stage) out.push_back(e.loss);
  return out;
}

TrainLog train_backbone(const std::vector<Bag>& bags, Backbone& backbone, const TrainConfig& config,
                        const CheckpointHook& hook) {
  config.validate();
  BagPairSampler sampler(bags.size(), config.bag_size, derive_seed(config.seed, "stage1.pairs"));
  Optimizer opt(config.backbone_optimizer, trainable_backbone_params(backbone, config.freeze));
  const double inv_pairs = 1.0 / static_cast<double>(config.pairs_per_step);
  auto all_params = backbone.parameters();

  TrainLog log;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= config.stage1_epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t s = 0; s < config.stage1_steps_per_epoch; ++s, ++step) {
      diff::zero_grad(all_params);
      const double loss = at_step("stage1", step, [&] {
        double total = 0.0;
        for (std::size_t k = 0; k < config.pairs_per_step; ++k) {
          const BagPair pair = sampler.next();
          const Bag& a = bags[pair.first];
          const Bag& b = bags[pair.second];
          diff::Tape tape;
          diff::Var fa = backbone.forward(tape.constant(a.inputs));
          diff::Var fb = backbone.forward(tape.constant(b.inputs));
          diff::Var l = diff::scale(sim_prop_loss(fa, fb, a.proportion, b.proportion, config.sim, pair.permutation),
                                    inv_pairs);
          tape.backward(l);
          total += l.scalar();
        }
        return total;
      });
      opt.step();
      log.entries.push_back({"stage1", step, loss});
      epoch_loss += loss;
    }
    spdlog::debug("stage1 epoch {}/{} mean loss {:.6f}", epoch, config.stage1_epochs,
                  epoch_loss / static_cast<double>(std::max<std::size_t>(1, config.stage1_steps_per_epoch)));
    if (hook && checkpoint_due(config, epoch) && epoch != config.stage1_epochs) hook("stage1", epoch);
  }
  if (hook) hook("stage1", config.stage1_epochs);
  return log;
}

TrainLog train_head(const std::vector<Bag>& bags, const Backbone& backbone, ClassifierHead& head,
                    const TrainConfig& config, const CheckpointHook& hook) {
  config.validate();
  if (bags.empty()) throw Error("train_head: no bags");
  std::vector<diff::Matrix> features;
  features.reserve(bags.size());
  for (const Bag& b : bags) features.push_back(backbone.features(b.inputs));

  Optimizer opt(config.head_optimizer, head.parameters());
  Rng rng(derive_seed(config.seed, "stage2.order"));
  std::vector<std::size_t> order(bags.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainLog log;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= config.stage2_epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t epoch_steps = 0;
    for (std::size_t start = 0; start < order.size(); start += config.bags_per_step, ++step, ++epoch_steps) {
      const std::size_t end = std::min(order.size(), start + config.bags_per_step);
      const double inv = 1.0 / static_cast<double>(end - start);
      opt.zero_grad();
      const double loss = at_step("stage2", step, [&] {
        double total = 0.0;
        for (std::size_t i = start; i < end; ++i) {
          const Bag& bag = bags[order[i]];
          diff::Tape tape;
          diff::Var conf = head.forward(tape.constant(features[order[i]]));
          diff::Var l = diff::scale(prop_loss(bag.proportion, aggregate_predictions(conf)), inv);
          tape.backward(l);
          total += l.scalar();
        }
        return total;
      });
      opt.step();
      log.entries.push_back({"stage2", step, loss});
      epoch_loss += loss;
    }
    spdlog::debug("stage2 epoch {}/{} mean loss {:.6f}", epoch, config.stage2_epochs,
                  epoch_loss / static_cast<double>(std::max<std::size_t>(1, epoch_steps)));
    if (hook && checkpoint_due(config, epoch) && epoch != config.stage2_epochs) hook("stage2", epoch);
  }
  if (hook) hook("stage2", config.stage2_epochs);
  return log;
}

TrainLog train_joint(const std::vector<Bag>& bags, ModelParams& model, const TrainConfig& config,
                     const CheckpointHook& hook) {
  config.validate();
  BagPairSampler sampler(bags.size(), config.bag_size, derive_seed(config.seed, "joint.pairs"));
  Optimizer backbone_opt(config.backbone_optimizer, trainable_backbone_params(model.backbone, config.freeze));
  Optimizer head_opt(config.head_optimizer, model.head.parameters());
  auto all_params = model.parameters();
  const double inv_pairs = 1.0 / static_cast<double>(config.pairs_per_step);

  TrainLog log;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= config.stage1_epochs; ++epoch) {
    for (std::size_t s = 0; s < config.stage1_steps_per_epoch; ++s, ++step) {
      diff::zero_grad(all_params);
      const double loss = at_step("joint", step, [&] {
        double total = 0.0;
        for (std::size_t k = 0; k < config.pairs_per_step; ++k) {
          const BagPair pair = sampler.next();
          const Bag& a = bags[pair.first];
          const Bag& b = bags[pair.second];
          diff::Tape tape;
          diff::Var fa = model.backbone.forward(tape.constant(a.inputs));
          diff::Var fb = model.backbone.forward(tape.constant(b.inputs));
          diff::Var l = sim_prop_loss(fa, fb, a.proportion, b.proportion, config.sim, pair.permutation);
          l = diff::add(l, prop_loss(a.proportion, aggregate_predictions(model.head.forward(fa))));
          l = diff::add(l, prop_loss(b.proportion, aggregate_predictions(model.head.forward(fb))));
          l = diff::scale(l, inv_pairs);
          tape.backward(l);
          total += l.scalar();
        }
        return total;
      });
      backbone_opt.step();
      head_opt.step();
      log.entries.push_back({"joint", step, loss});
    }
    if (hook && checkpoint_due(config, epoch) && epoch != config.stage1_epochs) hook("joint", epoch);
  }
  if (hook) hook("joint", config.stage1_epochs);
  return log;
}

LossTrend loss_trend(const std::vector<double>& losses, double fraction) {
  if (losses.empty()) throw Error("loss_trend: empty series");
  const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(fraction * static_cast<double>(losses.size())));
  LossTrend t;
  t.initial = std::accumulate(losses.begin(), losses.begin() + static_cast<std::ptrdiff_t>(n), 0.0) / static_cast<double>(n);
  t.final = std::accumulate(losses.end() - static_cast<std::ptrdiff_t>(n), losses.end(), 0.0) / static_cast<double>(n);
  t.reduction = t.initial > 0.0 ? 1.0 - t.final / t.initial : 0.0;
  return t;
}

}  // namespace oslsp
