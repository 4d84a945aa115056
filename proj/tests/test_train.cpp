#include <cmath>

#include "doctest.h"
#include "oslsp/error.hpp"
#include "oslsp/experiment.hpp"
#include "oslsp/synth.hpp"
#include "oslsp/train.hpp"
#include "support.hpp"

using namespace oslsp;
using namespace oslsp::diff;

namespace {

Architecture toy_arch() {
  Architecture a;
  a.input_dim = 8;
  a.backbone_hidden = {8};
  a.feature_dim = 4;
  a.head_hidden = {6};
  a.num_classes = 3;
  return a;
}

std::vector<Bag> toy_bags(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Bag> bags;
  const std::vector<std::vector<double>> props = {{1, 0, 0}, {0.2, 0.5, 0.3}, {0, 0.3, 0.7}};
  for (std::size_t i = 0; i < 6; ++i) {
    Bag b;
    b.date = "d" + std::to_string(i % 3);
    b.members = {0, 1, 2, 3, 4, 5};
    b.inputs = testing::random_matrix(6, 8, rng);
    b.proportion = ProportionVector(props[i % 3]);
    bags.push_back(std::move(b));
  }
  return bags;
}

TrainConfig toy_config() {
  TrainConfig c;
  c.bag_size = 6;
  c.sim.bins = 10;
  c.stage1_epochs = 2;
  c.stage1_steps_per_epoch = 3;
  c.pairs_per_step = 2;
  c.stage2_epochs = 2;
  return c;
}

struct Quadratic {
  std::vector<double> curvature;
  void gradient(Parameter& w) const {
    for (std::size_t i = 0; i < curvature.size(); ++i) w.grad.data[i] = curvature[i] * w.value.data[i];
  }
  double distance(const Parameter& w) const {
    double s = 0.0;
    for (double v : w.value.data) s += v * v;
    return std::sqrt(s);
  }
};

}  // namespace

TEST_SUITE("train") {
  TEST_CASE("zero learning rate leaves the backbone unchanged") {
    ModelParams m = init_params(1, toy_arch());
    const auto before = fingerprint(m.backbone.mlp());
    TrainConfig c = toy_config();
    c.backbone_optimizer.learning_rate = 0.0;
    const TrainLog log = train_backbone(toy_bags(1), m.backbone, c);
    CHECK(fingerprint(m.backbone.mlp()) == before);
    CHECK(log.losses("stage1").size() == 6);
  }

  TEST_CASE("backbone training is reproducible") {
    ModelParams a = init_params(2, toy_arch());
    ModelParams b = init_params(2, toy_arch());
    TrainConfig c = toy_config();
    c.stage1_epochs = 1;
    c.stage1_steps_per_epoch = 1;
    const auto la = train_backbone(toy_bags(2), a.backbone, c);
    const auto lb = train_backbone(toy_bags(2), b.backbone, c);
    CHECK(fingerprint(a.backbone.mlp()) == fingerprint(b.backbone.mlp()));
    CHECK(la.losses("stage1") == lb.losses("stage1"));
    CHECK(fingerprint(a.backbone.mlp()) != fingerprint(init_params(2, toy_arch()).backbone.mlp()));
  }

  TEST_CASE("freezing trains only the last backbone layer") {
    ModelParams m = init_params(3, toy_arch());
    const auto first_before = m.backbone.mlp().layers().front().weight.value.data;
    const auto last_before = m.backbone.mlp().layers().back().weight.value.data;
    TrainConfig c = toy_config();
    c.freeze = FreezePolicy::kAllButLast;
    train_backbone(toy_bags(3), m.backbone, c);
    CHECK(m.backbone.mlp().layers().front().weight.value.data == first_before);
    CHECK(m.backbone.mlp().layers().back().weight.value.data != last_before);
  }

  TEST_CASE("head training never touches the backbone") {
    ModelParams m = init_params(4, toy_arch());
    const auto backbone_before = fingerprint(m.backbone.mlp());
    const auto head_before = fingerprint(m.head.mlp());
    const TrainLog log = train_head(toy_bags(4), m.backbone, m.head, toy_config());
    CHECK(fingerprint(m.backbone.mlp()) == backbone_before);
    CHECK(fingerprint(m.head.mlp()) != head_before);
    for (double l : log.losses("stage2")) CHECK(std::isfinite(l));

    TrainConfig frozen = toy_config();
    frozen.head_optimizer.learning_rate = 0.0;
    const auto head_now = fingerprint(m.head.mlp());
    train_head(toy_bags(4), m.backbone, m.head, frozen);
    CHECK(fingerprint(m.head.mlp()) == head_now);
  }

  TEST_CASE("checkpoint hook fires at stage ends and every M epochs") {
    ModelParams m = init_params(5, toy_arch());
    TrainConfig c = toy_config();
    c.stage1_epochs = 4;
    c.checkpoint_every = 2;
    std::vector<std::size_t> epochs;
    train_backbone(toy_bags(5), m.backbone, c, [&](const std::string& stage, std::size_t epoch) {
      CHECK(stage == "stage1");
      epochs.push_back(epoch);
    });
    CHECK(epochs == std::vector<std::size_t>{2, 4});
  }

  TEST_CASE("sgd leaves parameters alone on zero gradient") {
    Parameter w("w", Matrix::row({1.0, -2.0}));
    Optimizer opt(OptimizerConfig{OptimizerKind::kSgd, 0.5}, {&w});
    w.zero_grad();
    for (int i = 0; i < 10; ++i) opt.step();
    CHECK(w.value.data == std::vector<double>{1.0, -2.0});
  }

  TEST_CASE("descent on a quadratic bowl is monotone") {
    for (OptimizerKind kind : {OptimizerKind::kSgd, OptimizerKind::kAdam}) {
      Parameter w("w", Matrix::row({0.8, -0.6, 0.3}));
      Optimizer opt(OptimizerConfig{kind, 1e-3}, {&w});
      const Quadratic bowl{{2.0, 2.0, 2.0}};
      double previous = bowl.distance(w);
      for (int i = 0; i < 100; ++i) {
        bowl.gradient(w);
        opt.step();
        const double now = bowl.distance(w);
        CHECK(now < previous);
        previous = now;
      }
    }
  }

  TEST_CASE("adam beats sgd on an ill-conditioned quadratic") {
    const Quadratic bowl{{100.0, 0.01}};
    double result[2];
    int idx = 0;
    for (OptimizerKind kind : {OptimizerKind::kSgd, OptimizerKind::kAdam}) {
      Parameter w("w", Matrix::row({1.0, 1.0}));
      Optimizer opt(OptimizerConfig{kind, 1e-2}, {&w});
      for (int i = 0; i < 1000; ++i) {
        bowl.gradient(w);
        opt.step();
      }
      result[idx++] = bowl.distance(w);
    }
    CHECK(result[1] < 0.1 * result[0]);
  }

  TEST_CASE("loss trend averages the ends of the series") {
    std::vector<double> losses(100);
    for (std::size_t i = 0; i < losses.size(); ++i) losses[i] = i < 10 ? 2.0 : (i >= 90 ? 0.5 : 1.0);
    const LossTrend t = loss_trend(losses);
    CHECK(t.initial == 2.0);
    CHECK(t.final == 0.5);
    CHECK(t.reduction == doctest::Approx(0.75));
    CHECK_THROWS_AS(loss_trend({}), Error);
  }

  TEST_CASE("invalid training settings are rejected") {
    TrainConfig c;
    c.bag_size = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    TrainConfig s;
    s.sim.expansion.sigma = -1.0;
    CHECK_THROWS_AS(s.validate(), Error);
  }

  TEST_CASE("a model that labels its data perfectly scores 100") {
    ModelParams m = init_params(6, toy_arch());
    // Zero head weights with a dominant class-2 bias predict class 2 for every input.
    for (Parameter* p : m.head.parameters()) p->value.fill(0.0);
    m.head.mlp().layers().back().bias.value.data[2] = 5.0;
    Rng rng(6);
    Dataset d{8, 3, {}};
    for (int i = 0; i < 12; ++i) {
      const Matrix x = testing::random_matrix(1, 8, rng);
      d.instances.push_back({"d0", 2, x.data});
    }
    const MetricsReport r = evaluate_model(m, d);
    CHECK(r.accuracy == 100.0);
    CHECK(r.rmse == 0.0);
    Dataset wrong = d;
    wrong.num_classes = 4;
    CHECK_THROWS_AS(evaluate_model(m, wrong), ConfigError);
  }

  TEST_CASE("default synthetic run" * doctest::timeout(300)) {
    ExperimentConfig cfg;
    cfg.train_baseline = false;
    cfg.sync();
    const Dataset data = generate(default_schedule(), cfg.manifold, cfg.per_date_count, derive_seed(cfg.seed, "data"));
    const ExperimentResult r = run_training(data, default_schedule(), cfg);
    const auto stage1 = r.log.losses("stage1");
    const auto stage2 = r.log.losses("stage2");
    for (double l : stage1) REQUIRE(std::isfinite(l));
    for (double l : stage2) REQUIRE(std::isfinite(l));
    CHECK(loss_trend(stage1).reduction >= 0.30);
    CHECK(loss_trend(stage2).final < 0.1);
  }
}
