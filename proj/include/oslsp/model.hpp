#pragma once

// Feature extractor (backbone) and classifier head.
//
// Backbone: input -> [tanh hidden]* -> linear feature layer.
// Head: three linear layers with ReLU between them, softmax output.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oslsp/diffcore.hpp"

namespace oslsp {

struct Architecture {
  std::size_t input_dim = 32;
  std::vector<std::size_t> backbone_hidden = {64, 64};
  std::size_t feature_dim = 16;
  std::vector<std::size_t> head_hidden = {32, 32};
  std::size_t num_classes = 5;

  void validate() const;
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

enum class Activation { kIdentity, kTanh, kRelu };

struct DenseLayer {
  diff::Parameter weight;  // out x in
  diff::Parameter bias;    // 1 x out
  Activation activation = Activation::kIdentity;

  std::size_t in_dim() const { return weight.value.cols; }
  std::size_t out_dim() const { return weight.value.rows; }
  /// Registers weight and bias on the tape so gradients reach them.
  diff::Var forward(diff::Var x);
  /// Weight and bias enter the tape as constants.
  diff::Var forward_frozen(diff::Var x) const;
};

/// Stack of dense layers; parameters are owned here and referenced by tapes.
class Mlp {
 public:
  Mlp() = default;
  /// sizes = {in, h1, ..., out}; hidden layers use `hidden`, the last uses `output`.
  Mlp(const std::string& name, std::span<const std::size_t> sizes, Activation hidden, Activation output);

  std::size_t input_dim() const { return layers_.front().in_dim(); }
  std::size_t output_dim() const { return layers_.back().out_dim(); }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  diff::Var forward(diff::Var input);
  diff::Var forward_frozen(diff::Var input) const;
  std::vector<diff::Parameter*> parameters();
  std::size_t parameter_count() const;

 private:
  std::vector<DenseLayer> layers_;
};

class Backbone {
 public:
  Backbone() = default;
  explicit Backbone(const Architecture& arch);

  /// Input is n x input_dim; returns n x feature_dim.
  diff::Var forward(diff::Var input);
  diff::Var forward_frozen(diff::Var input) const;
  /// Tape-free evaluation.
  diff::Matrix features(const diff::Matrix& input) const;

  Mlp& mlp() { return mlp_; }
  const Mlp& mlp() const { return mlp_; }
  std::vector<diff::Parameter*> parameters() { return mlp_.parameters(); }
  /// Weights and bias of the last layer only.
  std::vector<diff::Parameter*> last_layer_parameters();

 private:
  Mlp mlp_;
};

class ClassifierHead {
 public:
  ClassifierHead() = default;
  explicit ClassifierHead(const Architecture& arch);

  /// Per-row class confidences summing to 1.
  diff::Var forward(diff::Var features);
  diff::Var forward_frozen(diff::Var features) const;
  diff::Matrix confidences(const diff::Matrix& features) const;

  Mlp& mlp() { return mlp_; }
  const Mlp& mlp() const { return mlp_; }
  std::vector<diff::Parameter*> parameters() { return mlp_.parameters(); }

 private:
  Mlp mlp_;
};

struct ModelParams {
  Architecture arch;
  std::uint64_t seed = 0;
  Backbone backbone;
  ClassifierHead head;

  std::vector<diff::Parameter*> parameters();
};

/// Glorot-uniform weights for tanh/identity layers, He-uniform for ReLU layers, zero biases.
ModelParams init_params(std::uint64_t seed, const Architecture& arch);

/// Hash of all parameter values, for freeze checks.
std::uint64_t fingerprint(std::span<const diff::Parameter* const> params);
std::uint64_t fingerprint(const Mlp& mlp);

/// Argmax per row, lowest index on ties.
std::vector<int> predict_classes(const ModelParams& model, const diff::Matrix& inputs);

// Checkpoint layout (all integers little-endian):
//   6 bytes  magic "OSLSP1"
//   u32      input_dim
//   u32      number of backbone hidden layers H, then H x u32 sizes
//   u32      feature_dim
//   u32      number of head hidden layers G, then G x u32 sizes
//   u32      num_classes
//   u64      seed
//   u64      number of weights W
//   W x f64  weights: backbone layers in order, then head layers in order;
//            per layer the weight matrix (row-major, out x in) followed by the bias.
void save_checkpoint(std::ostream& out, const ModelParams& model);
void save_checkpoint(const std::filesystem::path& path, const ModelParams& model);
ModelParams load_checkpoint(std::istream& in);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace oslsp
