#pragma once

// Reverse-mode differentiation over small dense matrices.
//
// A Tape records every operation of one forward pass. Each recorded node keeps
// its value and a closure that propagates the node's gradient to its parents.
// Parameters live outside the tape; Tape::backward() adds their gradients into
// Parameter::grad, so callers zero gradients between optimizer steps.

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oslsp::diff {

/// Row-major dense matrix of doubles. A row vector is 1 x n, a scalar 1 x 1.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values);

  static Matrix row(std::vector<double> values);
  static Matrix scalar(double v) { return Matrix(1, 1, v); }

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row_span(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row_span(std::size_t r) const { return {data.data() + r * cols, cols}; }

  std::size_t size() const noexcept { return data.size(); }
  bool same_shape(const Matrix& o) const noexcept { return rows == o.rows && cols == o.cols; }
  void fill(double v);
};

bool all_finite(const Matrix& m);

/// A trainable tensor with an additive gradient slot.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)), grad(value.rows, value.cols) {}

  void zero_grad() { grad.fill(0.0); }
};

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while its Tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  double scalar() const;
  std::size_t rows() const { return value().rows; }
  std::size_t cols() const { return value().cols; }
  std::size_t id() const noexcept { return id_; }
  Tape& tape() const noexcept { return *tape_; }
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  /// Propagates the gradient of node `self` (available via grad(self)) to its parents.
  using BackwardFn = std::function<void(Tape& tape, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Differentiable input not tied to a Parameter; its gradient is read with grad().
  Var variable(Matrix value);
  Var param(Parameter& p);

  /// Records an operation. Throws NonFiniteError naming `op` if `value` has NaN/Inf.
  Var record(std::string_view op, Matrix value, std::initializer_list<Var> parents, BackwardFn backward);

  /// Seeds d(root)/d(root) = 1 and runs the reverse sweep. Root must be 1 x 1.
  void backward(Var root);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  /// Gradient slot of a node; allocated on demand during backward().
  Matrix& grad(std::size_t id);
  const Matrix& grad(Var v) { return grad(v.id()); }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    std::string op;
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Parameter* parameter = nullptr;
    BackwardFn backward;
  };

  Var push(Node node);

  // Deque keeps value references valid while new nodes are recorded.
  std::deque<Node> nodes_;
};

// Elementwise and structural operations. Binary elementwise ops require equal shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var square(Var a);
Var exp(Var a);
Var log(Var a);
Var tanh(Var a);
Var relu(Var a);
Var sum(Var a);
/// x (n x in) * W^T (W is out x in) + b (1 x out) broadcast over rows.
Var linear(Var x, Var weight, Var bias);
/// Row-wise softmax.
Var softmax_rows(Var a);
/// Column means: n x k -> 1 x k.
Var mean_rows(Var a);

/// Zeroes every parameter's gradient slot.
void zero_grad(std::span<Parameter* const> params);

/// Builds a scalar objective on a fresh tape using tape.param(...) for each parameter.
using Objective = std::function<Var(Tape&)>;

/// Runs one forward/backward pass of `objective` and returns the parameter gradients
/// in `params` order. Parameter gradient slots are left holding exactly these values.
std::vector<Matrix> forward_backward(const Objective& objective, std::span<Parameter* const> params);

/// Max over all parameter entries of |analytic - central| / max(|analytic|, |central|, 1e-12),
/// using central differences with step h. Parameter values are restored afterwards.
double grad_check(const Objective& objective, std::span<Parameter* const> params, double h = 1e-5);

}  // namespace oslsp::diff
