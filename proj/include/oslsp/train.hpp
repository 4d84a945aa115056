#pragma once

// Two-stage training: the backbone learns from the similarity-proportion loss over
// random bag pairs, then the head learns from the bag-level proportion loss on
// frozen backbone features.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "oslsp/bags.hpp"
#include "oslsp/diffcore.hpp"
#include "oslsp/losses.hpp"
#include "oslsp/model.hpp"

namespace oslsp {

enum class OptimizerKind { kAdam, kSgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected adaptive-moment update, or plain gradient descent.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, std::vector<diff::Parameter*> params);

  /// Applies one update from the parameters' current gradient slots.
  void step();
  void zero_grad();
  const std::vector<diff::Parameter*>& parameters() const noexcept { return params_; }
  std::size_t steps_taken() const noexcept { return t_; }

 private:
  OptimizerConfig config_;
  std::vector<diff::Parameter*> params_;
  std::vector<diff::Matrix> m_;
  std::vector<diff::Matrix> v_;
  std::size_t t_ = 0;
};

enum class FreezePolicy {
  kNone,
  /// Only the backbone's last layer is updated.
  kAllButLast,
};

struct TrainConfig {
  std::uint64_t seed = 1;
  std::size_t bag_size = 64;
  SimPropOptions sim;

  std::size_t stage1_epochs = 20;
  std::size_t stage1_steps_per_epoch = 50;
  /// Bag pairs averaged into one backbone update.
  std::size_t pairs_per_step = 4;
  OptimizerConfig backbone_optimizer{};
  FreezePolicy freeze = FreezePolicy::kNone;

  std::size_t stage2_epochs = 60;
  /// Bags averaged into one head update.
  std::size_t bags_per_step = 1;
  OptimizerConfig head_optimizer{};

  /// Train backbone and head together (sum of both losses) instead of two stages.
  bool joint = false;
  /// Invoke the checkpoint hook every this many epochs (0 disables periodic checkpoints).
  std::size_t checkpoint_every = 0;

  void validate() const;
};

struct TrainLog {
  struct Entry {
    std::string stage;
    std::size_t step = 0;
    double loss = 0.0;
  };
  std::vector<Entry> entries;
  std::vector<std::string> checkpoints;

  std::vector<double> losses(const std::string& stage) const;
};

/// Called with (stage, epoch) every checkpoint_every epochs and at the end of each stage
/// (epoch = number of epochs run).
using CheckpointHook = std::function<void(const std::string& stage, std::size_t epoch)>;

/// Stage 1. Each step averages sim_prop_loss over pairs_per_step sampled bag pairs.
/// Throws NonFiniteError naming the step on a non-finite loss.
TrainLog train_backbone(const std::vector<Bag>& bags, Backbone& backbone, const TrainConfig& config,
                        const CheckpointHook& hook = {});

/// Stage 2. The backbone is only read; each step averages prop_loss over bags_per_step bags.
TrainLog train_head(const std::vector<Bag>& bags, const Backbone& backbone, ClassifierHead& head,
                    const TrainConfig& config, const CheckpointHook& hook = {});

/// Ablation: one stage optimizing sim_prop_loss plus both bags' prop_loss.
TrainLog train_joint(const std::vector<Bag>& bags, ModelParams& model, const TrainConfig& config,
                     const CheckpointHook& hook = {});

/// Mean of the first and last `fraction` of a loss series, and 1 - last/first.
struct LossTrend {
  double initial = 0.0;
  double final = 0.0;
  double reduction = 0.0;
};
LossTrend loss_trend(const std::vector<double>& losses, double fraction = 0.1);

}  // namespace oslsp
