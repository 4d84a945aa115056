#include "oslsp/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "oslsp/error.hpp"
#include "oslsp/random.hpp"

namespace oslsp {

namespace {

constexpr char kMagic[6] = {'O', 'S', 'L', 'S', 'P', '1'};

diff::Var activate(diff::Var x, Activation a) {
  switch (a) {
    case Activation::kTanh:
      return diff::tanh(x);
    case Activation::kRelu:
      return diff::relu(x);
    case Activation::kIdentity:
      break;
  }
  return x;
}

std::vector<std::size_t> layer_sizes(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_bytes(std::istream& in, int count) {
  std::uint64_t v = 0;
  for (int i = 0; i < count; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw ParseError("checkpoint truncated", 0);
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

std::uint32_t get_u32(std::istream& in) { return static_cast<std::uint32_t>(get_bytes(in, 4)); }
std::uint64_t get_u64(std::istream& in) { return get_bytes(in, 8); }

std::vector<std::size_t> get_sizes(std::istream& in) {
  const std::uint32_t n = get_u32(in);
  if (n > 64) throw ParseError("checkpoint: implausible layer count", 0);
  std::vector<std::size_t> sizes(n);
  for (auto& s : sizes) s = get_u32(in);
  return sizes;
}

void init_layer(DenseLayer& layer, Rng& rng) {
  const double fan_in = static_cast<double>(layer.in_dim());
  const double fan_out = static_cast<double>(layer.out_dim());
  const double limit =
      layer.activation == Activation::kRelu ? std::sqrt(6.0 / fan_in) : std::sqrt(6.0 / (fan_in + fan_out));
  for (double& w : layer.weight.value.data) w = (2.0 * uniform01(rng) - 1.0) * limit;
  layer.bias.value.fill(0.0);
}

}  // namespace

void Architecture::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw ConfigError(std::string("architecture: ") + what + " must be positive");
  };
  positive(input_dim, "input_dim");
  positive(feature_dim, "feature_dim");
  for (std::size_t h : backbone_hidden) positive(h, "backbone hidden size");
  for (std::size_t h : head_hidden) positive(h, "head hidden size");
  if (num_classes < 2) throw ConfigError("architecture: need at least 2 classes");
}

diff::Var DenseLayer::forward(diff::Var x) {
  diff::Tape& t = x.tape();
  return activate(diff::linear(x, t.param(weight), t.param(bias)), activation);
}

diff::Var DenseLayer::forward_frozen(diff::Var x) const {
  diff::Tape& t = x.tape();
  return activate(diff::linear(x, t.constant(weight.value), t.constant(bias.value)), activation);
}

Mlp::Mlp(const std::string& name, std::span<const std::size_t> sizes, Activation hidden, Activation output) {
  if (sizes.size() < 2) throw ConfigError("Mlp needs at least an input and an output size");
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l], out = sizes[l + 1];
    if (in == 0 || out == 0) throw ConfigError(name + ": zero-sized layer");
    const std::string prefix = name + "." + std::to_string(l);
    layers_.push_back(DenseLayer{diff::Parameter(prefix + ".weight", diff::Matrix(out, in)),
                                 diff::Parameter(prefix + ".bias", diff::Matrix(1, out)),
                                 l + 2 == sizes.size() ? output : hidden});
  }
}

diff::Var Mlp::forward(diff::Var input) {
  if (input.cols() != input_dim()) {
    throw Error("input dimension " + std::to_string(input.cols()) + " does not match expected " +
                std::to_string(input_dim()));
  }
  for (DenseLayer& l : layers_) input = l.forward(input);
  return input;
}

diff::Var Mlp::forward_frozen(diff::Var input) const {
  if (input.cols() != input_dim()) {
    throw Error("input dimension " + std::to_string(input.cols()) + " does not match expected " +
                std::to_string(input_dim()));
  }
  for (const DenseLayer& l : layers_) input = l.forward_frozen(input);
  return input;
}

std::vector<diff::Parameter*> Mlp::parameters() {
  std::vector<diff::Parameter*> out;
  for (DenseLayer& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers_) n += l.weight.value.size() + l.bias.value.size();
  return n;
}

Backbone::Backbone(const Architecture& arch)
    : mlp_("backbone", layer_sizes(arch.input_dim, arch.backbone_hidden, arch.feature_dim), Activation::kTanh,
           Activation::kIdentity) {}

diff::Var Backbone::forward(diff::Var input) { return mlp_.forward(input); }
diff::Var Backbone::forward_frozen(diff::Var input) const { return mlp_.forward_frozen(input); }

diff::Matrix Backbone::features(const diff::Matrix& input) const {
  diff::Tape tape;
  return forward_frozen(tape.constant(input)).value();
}

std::vector<diff::Parameter*> Backbone::last_layer_parameters() {
  auto& last = mlp_.layers().back();
  return {&last.weight, &last.bias};
}

ClassifierHead::ClassifierHead(const Architecture& arch)
    : mlp_("head", layer_sizes(arch.feature_dim, arch.head_hidden, arch.num_classes), Activation::kRelu,
           Activation::kIdentity) {}

diff::Var ClassifierHead::forward(diff::Var features) { return diff::softmax_rows(mlp_.forward(features)); }

diff::Var ClassifierHead::forward_frozen(diff::Var features) const {
  return diff::softmax_rows(mlp_.forward_frozen(features));
}

diff::Matrix ClassifierHead::confidences(const diff::Matrix& features) const {
  diff::Tape tape;
  return forward_frozen(tape.constant(features)).value();
}

std::vector<diff::Parameter*> ModelParams::parameters() {
  auto out = backbone.parameters();
  for (auto* p : head.parameters()) out.push_back(p);
  return out;
}

ModelParams init_params(std::uint64_t seed, const Architecture& arch) {
  arch.validate();
  ModelParams m{arch, seed, Backbone(arch), ClassifierHead(arch)};
  Rng backbone_rng(derive_seed(seed, "init.backbone"));
  for (DenseLayer& l : m.backbone.mlp().layers()) init_layer(l, backbone_rng);
  Rng head_rng(derive_seed(seed, "init.head"));
  for (DenseLayer& l : m.head.mlp().layers()) init_layer(l, head_rng);
  return m;
}

std::uint64_t fingerprint(std::span<const diff::Parameter* const> params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const diff::Parameter* p : params) {
    for (double v : p->value.data) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xff;
        h *= 0x100000001b3ULL;
      }
    }
  }
  return h;
}

std::uint64_t fingerprint(const Mlp& mlp) {
  std::vector<const diff::Parameter*> params;
  for (const DenseLayer& l : mlp.layers()) {
    params.push_back(&l.weight);
    params.push_back(&l.bias);
  }
  return fingerprint(params);
}

std::vector<int> predict_classes(const ModelParams& model, const diff::Matrix& inputs) {
  const diff::Matrix conf = model.head.confidences(model.backbone.features(inputs));
  std::vector<int> out(conf.rows);
  for (std::size_t r = 0; r < conf.rows; ++r) {
    auto row = conf.row_span(r);
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

void save_checkpoint(std::ostream& out, const ModelParams& model) {
  const Architecture& a = model.arch;
  out.write(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(a.input_dim));
  put_u32(out, static_cast<std::uint32_t>(a.backbone_hidden.size()));
  for (std::size_t h : a.backbone_hidden) put_u32(out, static_cast<std::uint32_t>(h));
  put_u32(out, static_cast<std::uint32_t>(a.feature_dim));
  put_u32(out, static_cast<std::uint32_t>(a.head_hidden.size()));
  for (std::size_t h : a.head_hidden) put_u32(out, static_cast<std::uint32_t>(h));
  put_u32(out, static_cast<std::uint32_t>(a.num_classes));
  put_u64(out, model.seed);
  put_u64(out, model.backbone.mlp().parameter_count() + model.head.mlp().parameter_count());
  for (const Mlp* mlp : {&model.backbone.mlp(), &model.head.mlp()}) {
    for (const DenseLayer& l : mlp->layers()) {
      for (double v : l.weight.value.data) put_u64(out, std::bit_cast<std::uint64_t>(v));
      for (double v : l.bias.value.data) put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  if (!out) throw Error("failed to write checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open checkpoint for writing: " + path.string());
  save_checkpoint(out, model);
}

ModelParams load_checkpoint(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kMagic)) {
    throw ParseError("not an OSLSP1 checkpoint", 0);
  }
  Architecture a;
  a.input_dim = get_u32(in);
  a.backbone_hidden = get_sizes(in);
  a.feature_dim = get_u32(in);
  a.head_hidden = get_sizes(in);
  a.num_classes = get_u32(in);
  const std::uint64_t seed = get_u64(in);
  const std::uint64_t count = get_u64(in);
  a.validate();
  ModelParams m{a, seed, Backbone(a), ClassifierHead(a)};
  if (count != m.backbone.mlp().parameter_count() + m.head.mlp().parameter_count()) {
    throw ParseError("checkpoint weight count does not match its architecture", 0);
  }
  for (Mlp* mlp : {&m.backbone.mlp(), &m.head.mlp()}) {
    for (DenseLayer& l : mlp->layers()) {
      for (double& v : l.weight.value.data) v = std::bit_cast<double>(get_u64(in));
      for (double& v : l.bias.value.data) v = std::bit_cast<double>(get_u64(in));
    }
  }
  return m;
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFoundError(path.string());
  return load_checkpoint(in);
}

}  // namespace oslsp
