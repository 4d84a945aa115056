#include "oslsp/diffcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oslsp/error.hpp"

namespace oslsp::diff {

namespace {

std::string shape_str(const Matrix& m) {
  std::ostringstream os;
  os << m.rows << "x" << m.cols;
  return os.str();
}

void require_same_shape(std::string_view op, Var a, Var b) {
  if (!a.value().same_shape(b.value())) {
    throw Error(std::string(op) + ": shape mismatch " + shape_str(a.value()) + " vs " + shape_str(b.value()));
  }
}

void add_into(Matrix& dst, const Matrix& src) {
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

// Shared machinery for y = f(x) elementwise with dy/dx = df(x, y).
template <typename F, typename DF>
Var unary(std::string_view op, Var a, F f, DF df) {
  const Matrix& x = a.value();
  Matrix y(x.rows, x.cols);
  for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = f(x.data[i]);
  const std::size_t ia = a.id();
  return a.tape().record(op, std::move(y), {a}, [ia, df](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& xv = t.value(ia);
    const Matrix& yv = t.value(self);
    Matrix& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * df(xv.data[i], yv.data[i]);
  });
}

}  // namespace

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != r * c) throw Error("Matrix: value count does not match shape");
}

Matrix Matrix::row(std::vector<double> values) {
  const std::size_t n = values.size();
  return Matrix(1, n, std::move(values));
}

void Matrix::fill(double v) { std::fill(data.begin(), data.end(), v); }

bool all_finite(const Matrix& m) {
  return std::all_of(m.data.begin(), m.data.end(), [](double v) { return std::isfinite(v); });
}

const Matrix& Var::value() const { return tape_->value(id_); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw Error("Var::scalar on non-scalar node of shape " + shape_str(v));
  return v.data[0];
}

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) {
  if (!all_finite(value)) throw NonFiniteError("constant", "input contains NaN/Inf");
  return push(Node{"constant", std::move(value), {}, false, nullptr, {}});
}

Var Tape::variable(Matrix value) {
  if (!all_finite(value)) throw NonFiniteError("variable", "input contains NaN/Inf");
  return push(Node{"variable", std::move(value), {}, true, nullptr, {}});
}

Var Tape::param(Parameter& p) {
  if (!all_finite(p.value)) throw NonFiniteError("param", "parameter '" + p.name + "' contains NaN/Inf");
  if (!p.grad.same_shape(p.value)) p.grad = Matrix(p.value.rows, p.value.cols);
  return push(Node{"param:" + p.name, p.value, {}, true, &p, {}});
}

Var Tape::record(std::string_view op, Matrix value, std::initializer_list<Var> parents, BackwardFn backward) {
  if (!all_finite(value)) throw NonFiniteError(std::string(op), "forward output of shape " + shape_str(value));
  bool needs = false;
  for (const Var& p : parents) {
    if (&p.tape() != this) throw Error(std::string(op) + ": operands belong to different tapes");
    needs = needs || nodes_[p.id()].requires_grad;
  }
  return push(Node{std::string(op), std::move(value), {}, needs, nullptr, needs ? std::move(backward) : BackwardFn{}});
}

Matrix& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.grad.same_shape(n.value)) n.grad = Matrix(n.value.rows, n.value.cols);
  return n.grad;
}

void Tape::backward(Var root) {
  if (&root.tape() != this) throw Error("backward: root belongs to a different tape");
  if (root.value().size() != 1) throw Error("backward: root must be a scalar, got " + shape_str(root.value()));
  for (Node& n : nodes_) n.grad = Matrix();
  if (!nodes_[root.id()].requires_grad) return;
  grad(root.id()).data[0] = 1.0;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (!all_finite(n.grad)) throw NonFiniteError("backward:" + n.op, "gradient of shape " + shape_str(n.grad));
    if (n.backward) n.backward(*this, i);
    if (n.parameter != nullptr) add_into(n.parameter->grad, n.grad);
  }
}

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  Matrix y = a.value();
  add_into(y, b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record("add", std::move(y), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Matrix g = t.grad(self);
    if (t.requires_grad(ia)) add_into(t.grad(ia), g);
    if (t.requires_grad(ib)) add_into(t.grad(ib), g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  Matrix y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] -= b.value().data[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record("sub", std::move(y), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Matrix g = t.grad(self);
    if (t.requires_grad(ia)) add_into(t.grad(ia), g);
    if (t.requires_grad(ib)) {
      Matrix& gb = t.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] -= g.data[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  Matrix y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] *= b.value().data[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record("mul", std::move(y), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Matrix g = t.grad(self);
    const Matrix& av = t.value(ia);
    const Matrix& bv = t.value(ib);
    if (t.requires_grad(ia)) {
      Matrix& ga = t.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * bv.data[i];
    }
    if (t.requires_grad(ib)) {
      Matrix& gb = t.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] += g.data[i] * av.data[i];
    }
  });
}

Var scale(Var a, double factor) {
  return unary("scale", a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Var square(Var a) {
  return unary("square", a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var exp(Var a) {
  return unary("exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  return unary("log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var tanh(Var a) {
  return unary("tanh", a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return unary("relu", a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data) s += v;
  const std::size_t ia = a.id();
  return a.tape().record("sum", Matrix::scalar(s), {a}, [ia](Tape& t, std::size_t self) {
    const double g = t.grad(self).data[0];
    for (double& v : t.grad(ia).data) v += g;
  });
}

Var linear(Var x, Var weight, Var bias) {
  const Matrix& xv = x.value();
  const Matrix& w = weight.value();
  const Matrix& b = bias.value();
  if (xv.cols != w.cols || b.rows != 1 || b.cols != w.rows) {
    throw Error("linear: incompatible shapes x=" + shape_str(xv) + " W=" + shape_str(w) + " b=" + shape_str(b));
  }
  const std::size_t n = xv.rows, in = w.cols, out = w.rows;
  Matrix y(n, out);
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = &xv.data[r * in];
    for (std::size_t o = 0; o < out; ++o) {
      const double* wo = &w.data[o * in];
      double acc = b.data[o];
      for (std::size_t i = 0; i < in; ++i) acc += wo[i] * xr[i];
      y.data[r * out + o] = acc;
    }
  }
  const std::size_t ix = x.id(), iw = weight.id(), ib = bias.id();
  return x.tape().record("linear", std::move(y), {x, weight, bias}, [ix, iw, ib, n, in, out](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& xv = t.value(ix);
    const Matrix& wv = t.value(iw);
    if (t.requires_grad(ix)) {
      Matrix& gx = t.grad(ix);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t o = 0; o < out; ++o) {
          const double go = g.data[r * out + o];
          if (go == 0.0) continue;
          for (std::size_t i = 0; i < in; ++i) gx.data[r * in + i] += go * wv.data[o * in + i];
        }
    }
    if (t.requires_grad(iw)) {
      Matrix& gw = t.grad(iw);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t o = 0; o < out; ++o) {
          const double go = g.data[r * out + o];
          if (go == 0.0) continue;
          for (std::size_t i = 0; i < in; ++i) gw.data[o * in + i] += go * xv.data[r * in + i];
        }
    }
    if (t.requires_grad(ib)) {
      Matrix& gb = t.grad(ib);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t o = 0; o < out; ++o) gb.data[o] += g.data[r * out + o];
    }
  });
}

Var softmax_rows(Var a) {
  const Matrix& x = a.value();
  Matrix y(x.rows, x.cols);
  for (std::size_t r = 0; r < x.rows; ++r) {
    auto xr = x.row_span(r);
    auto yr = y.row_span(r);
    const double mx = *std::max_element(xr.begin(), xr.end());
    double z = 0.0;
    for (std::size_t c = 0; c < x.cols; ++c) z += (yr[c] = std::exp(xr[c] - mx));
    for (double& v : yr) v /= z;
  }
  const std::size_t ia = a.id();
  return a.tape().record("softmax_rows", std::move(y), {a}, [ia](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& yv = t.value(self);
    Matrix& ga = t.grad(ia);
    for (std::size_t r = 0; r < yv.rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < yv.cols; ++c) dot += g(r, c) * yv(r, c);
      for (std::size_t c = 0; c < yv.cols; ++c) ga(r, c) += yv(r, c) * (g(r, c) - dot);
    }
  });
}

Var mean_rows(Var a) {
  const Matrix& x = a.value();
  if (x.rows == 0) throw Error("mean_rows: empty input");
  Matrix y(1, x.cols);
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t c = 0; c < x.cols; ++c) y.data[c] += x(r, c);
  const double inv = 1.0 / static_cast<double>(x.rows);
  for (double& v : y.data) v *= inv;
  const std::size_t ia = a.id();
  return a.tape().record("mean_rows", std::move(y), {a}, [ia, inv](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix& ga = t.grad(ia);
    for (std::size_t r = 0; r < ga.rows; ++r)
      for (std::size_t c = 0; c < ga.cols; ++c) ga(r, c) += g.data[c] * inv;
  });
}

void zero_grad(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

std::vector<Matrix> forward_backward(const Objective& objective, std::span<Parameter* const> params) {
  zero_grad(params);
  Tape tape;
  Var root = objective(tape);
  tape.backward(root);
  std::vector<Matrix> grads;
  grads.reserve(params.size());
  for (Parameter* p : params) grads.push_back(p->grad);
  return grads;
}

double grad_check(const Objective& objective, std::span<Parameter* const> params, double h) {
  if (!(h > 0.0)) throw Error("grad_check: step must be positive");
  const std::vector<Matrix> analytic = forward_backward(objective, params);

  auto evaluate = [&objective]() {
    Tape tape;
    const double v = objective(tape).scalar();
    if (!std::isfinite(v)) throw NonFiniteError("grad_check", "objective is non-finite at a perturbed point");
    return v;
  };

  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    std::vector<double>& w = params[p]->value.data;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double orig = w[i];
      w[i] = orig + h;
      const double up = evaluate();
      w[i] = orig - h;
      const double down = evaluate();
      w[i] = orig;
      const double central = (up - down) / (2.0 * h);
      const double a = analytic[p].data[i];
      const double denom = std::max({std::abs(a), std::abs(central), 1e-12});
      worst = std::max(worst, std::abs(a - central) / denom);
    }
  }
  return worst;
}

}  // namespace oslsp::diff
