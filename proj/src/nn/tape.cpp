#include "aislab/nn/tape.hpp"

#include <algorithm>
#include <cmath>

#include "aislab/error.hpp"

namespace aislab::nn {

void zero_grads(const ParamList& params) {
  for (Parameter* p : params) p->zero_grad();
}

const Matrix& Var::value() const { return tape->value(id); }

double Var::item() const {
  const Matrix& v = value();
  if (v.size() != 1) throw InputError("Var::item: node is not a scalar");
  return v(0, 0);
}

Var Tape::push(Op op, int a, int b) {
  if (size_ == nodes_.size()) nodes_.emplace_back();
  Node& n = nodes_[size_];
  n.op = op;
  n.a = a;
  n.b = b;
  n.param = nullptr;
  n.has_grad = false;
  n.needs_grad = (a >= 0 && nodes_[static_cast<std::size_t>(a)].needs_grad) ||
                 (b >= 0 && nodes_[static_cast<std::size_t>(b)].needs_grad);
  return Var{this, static_cast<int>(size_++)};
}

Var Tape::constant(const Matrix& value) {
  Var v = push(Op::leaf, -1);
  node(v.id).value = value;
  return v;
}

Var Tape::scalar(double value) {
  Var v = push(Op::leaf, -1);
  node(v.id).value.setConstant(1, 1, value);
  return v;
}

Var Tape::param(Parameter& p) {
  Var v = push(Op::leaf, -1);
  Node& n = node(v.id);
  n.value = p.value;
  n.param = &p;
  n.needs_grad = true;
  return v;
}

void Tape::accumulate(int id, const Matrix& g) {
  Node& n = node(id);
  if (!n.needs_grad) return;
  if (n.has_grad) {
    n.grad += g;
  } else {
    n.grad = g;
    n.has_grad = true;
  }
}

void Tape::backward(Var root) {
  if (root.tape != this || root.id < 0 || static_cast<std::size_t>(root.id) >= size_) {
    throw InputError("backward: root does not belong to this tape");
  }
  if (value(root.id).size() != 1) throw InputError("backward: root must be a scalar");
  for (std::size_t i = 0; i < size_; ++i) nodes_[i].has_grad = false;
  visits_ = 0;
  accumulate(root.id, Matrix::Ones(1, 1));
  for (int id = root.id; id >= 0; --id) {
    Node& n = node(id);
    if (!n.has_grad) continue;
    ++visits_;
    if (n.op == Op::leaf) {
      if (n.param) n.param->grad += n.grad;
      continue;
    }
    propagate(n);
  }
  for (std::size_t i = 0; i < size_; ++i) {
    if (!nodes_[i].has_grad) nodes_[i].grad.resize(0, 0);
  }
}

void Tape::propagate(Node& n) {
  // Copies: accumulate() may touch parents while we read n.
  const Matrix g = n.grad;
  const Matrix& y = n.value;
  const int a = n.a;
  const int b = n.b;
  auto va = [&]() -> const Matrix& { return value(a); };
  auto vb = [&]() -> const Matrix& { return value(b); };
  switch (n.op) {
    case Op::leaf:
      break;
    case Op::add:
      accumulate(a, g);
      accumulate(b, g);
      break;
    case Op::sub:
      accumulate(a, g);
      accumulate(b, -g);
      break;
    case Op::mul:
      if (needs_grad(a)) accumulate(a, g.cwiseProduct(vb()));
      if (needs_grad(b)) accumulate(b, g.cwiseProduct(va()));
      break;
    case Op::matmul:
      if (needs_grad(a)) accumulate(a, g * vb().transpose());
      if (needs_grad(b)) accumulate(b, va().transpose() * g);
      break;
    case Op::scale:
      accumulate(a, n.c0 * g);
      break;
    case Op::shift:
      accumulate(a, g);
      break;
    case Op::tanh:
      accumulate(a, g.cwiseProduct((1.0 - y.array().square()).matrix()));
      break;
    case Op::sigmoid:
      accumulate(a, g.cwiseProduct((y.array() * (1.0 - y.array())).matrix()));
      break;
    case Op::exp:
      accumulate(a, g.cwiseProduct(y));
      break;
    case Op::log: {
      Matrix d = va().cwiseInverse();
      for (Eigen::Index i = 0; i < d.size(); ++i)
        if (y(i) <= n.c0) d(i) = 0.0;
      accumulate(a, g.cwiseProduct(d));
      break;
    }
    case Op::square:
      accumulate(a, 2.0 * g.cwiseProduct(va()));
      break;
    case Op::pow: {
      const Matrix& x = va();
      Matrix d(x.rows(), x.cols());
      for (Eigen::Index i = 0; i < x.size(); ++i) d(i) = x(i) > 0.0 ? n.c0 * std::pow(x(i), n.c0 - 1.0) : 0.0;
      accumulate(a, g.cwiseProduct(d));
      break;
    }
    case Op::norm: {
      const double r = y(0, 0);
      if (r > 0.0) accumulate(a, (g(0, 0) / r) * va());
      else accumulate(a, Matrix::Zero(va().rows(), va().cols()));
      break;
    }
    case Op::sum:
      accumulate(a, Matrix::Constant(va().rows(), va().cols(), g(0, 0)));
      break;
    case Op::concat: {
      const Eigen::Index top = va().rows();
      if (needs_grad(a)) accumulate(a, g.topRows(top));
      if (needs_grad(b)) accumulate(b, g.bottomRows(g.rows() - top));
      break;
    }
    case Op::pick: {
      Matrix d = Matrix::Zero(va().rows(), va().cols());
      d(n.i0) = g(0, 0);
      accumulate(a, d);
      break;
    }
    case Op::softmax: {
      const double inner = g.cwiseProduct(y).sum();
      accumulate(a, y.cwiseProduct((g.array() - inner).matrix()));
      break;
    }
    case Op::log_softmax: {
      const Matrix p = y.array().exp().matrix();
      accumulate(a, g - g.sum() * p);
      break;
    }
    case Op::smooth_l1:
      accumulate(a, g.cwiseProduct(va().cwiseMax(-1.0).cwiseMin(1.0)));
      break;
    case Op::minimum: {
      const Matrix& x = va();
      const Matrix& z = vb();
      Matrix ga = Matrix::Zero(x.rows(), x.cols());
      Matrix gb = Matrix::Zero(x.rows(), x.cols());
      for (Eigen::Index i = 0; i < x.size(); ++i) (x(i) <= z(i) ? ga(i) : gb(i)) = g(i);
      accumulate(a, ga);
      accumulate(b, gb);
      break;
    }
    case Op::clamp: {
      const Matrix& x = va();
      Matrix d = g;
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x(i) < n.c0 || x(i) > n.c1) d(i) = 0.0;
      accumulate(a, d);
      break;
    }
  }
}

namespace {

void same_tape(Var a, Var b, const char* op) {
  if (a.tape == nullptr || a.tape != b.tape) throw InputError(std::string(op) + ": operands on different tapes");
}

void same_shape(Var a, Var b, const char* op) {
  same_tape(a, b, op);
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InputError(std::string(op) + ": shape mismatch");
}

template <typename F>
Var unary(Var a, Op op, F&& f) {
  Tape& t = *a.tape;
  Var out = t.push(op, a.id);
  t.node(out.id).value = f(t.value(a.id));
  return out;
}

}  // namespace

Var add(Var a, Var b) {
  same_shape(a, b, "add");
  Tape& t = *a.tape;
  Var out = t.push(Op::add, a.id, b.id);
  t.node(out.id).value = t.value(a.id) + t.value(b.id);
  return out;
}

Var sub(Var a, Var b) {
  same_shape(a, b, "sub");
  Tape& t = *a.tape;
  Var out = t.push(Op::sub, a.id, b.id);
  t.node(out.id).value = t.value(a.id) - t.value(b.id);
  return out;
}

Var mul(Var a, Var b) {
  same_shape(a, b, "mul");
  Tape& t = *a.tape;
  Var out = t.push(Op::mul, a.id, b.id);
  t.node(out.id).value = t.value(a.id).cwiseProduct(t.value(b.id));
  return out;
}

Var matmul(Var a, Var b) {
  same_tape(a, b, "matmul");
  if (a.cols() != b.rows()) throw InputError("matmul: inner dimensions differ");
  Tape& t = *a.tape;
  Var out = t.push(Op::matmul, a.id, b.id);
  t.node(out.id).value.noalias() = t.value(a.id) * t.value(b.id);
  return out;
}

Var scale(Var a, double c) {
  Var out = unary(a, Op::scale, [c](const Matrix& x) -> Matrix { return c * x; });
  a.tape->node(out.id).c0 = c;
  return out;
}

Var shift(Var a, double c) {
  return unary(a, Op::shift, [c](const Matrix& x) -> Matrix { return (x.array() + c).matrix(); });
}

Var tanh(Var a) {
  return unary(a, Op::tanh, [](const Matrix& x) -> Matrix { return x.array().tanh().matrix(); });
}

Var sigmoid(Var a) {
  return unary(a, Op::sigmoid, [](const Matrix& x) -> Matrix {
    Matrix y(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double v = x(i);
      if (v >= 0.0) {
        y(i) = 1.0 / (1.0 + std::exp(-v));
      } else {
        const double e = std::exp(v);
        y(i) = e / (1.0 + e);
      }
    }
    return y;
  });
}

Var exp(Var a) {
  return unary(a, Op::exp, [](const Matrix& x) -> Matrix { return x.array().exp().matrix(); });
}

Var log(Var a, double floor) {
  Var out = unary(a, Op::log, [floor](const Matrix& x) -> Matrix {
    Matrix y(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) y(i) = x(i) > 0.0 ? std::max(std::log(x(i)), floor) : floor;
    return y;
  });
  a.tape->node(out.id).c0 = floor;
  return out;
}

Var square(Var a) {
  return unary(a, Op::square, [](const Matrix& x) -> Matrix { return x.array().square().matrix(); });
}

Var pow(Var a, double p) {
  if (!(p > 0.0)) throw InputError("pow: exponent must be positive");
  if ((a.value().array() < 0.0).any()) throw InputError("pow: negative base");
  Var out = unary(a, Op::pow, [p](const Matrix& x) -> Matrix { return x.array().pow(p).matrix(); });
  a.tape->node(out.id).c0 = p;
  return out;
}

Var norm(Var a) {
  return unary(a, Op::norm, [](const Matrix& x) -> Matrix { return Matrix::Constant(1, 1, x.norm()); });
}

Var sum(Var a) {
  return unary(a, Op::sum, [](const Matrix& x) -> Matrix { return Matrix::Constant(1, 1, x.sum()); });
}

Var concat(Var a, Var b) {
  same_tape(a, b, "concat");
  if (a.cols() != b.cols()) throw InputError("concat: column counts differ");
  Tape& t = *a.tape;
  Var out = t.push(Op::concat, a.id, b.id);
  Matrix& v = t.node(out.id).value;
  const Matrix& x = t.value(a.id);
  const Matrix& y = t.value(b.id);
  v.resize(x.rows() + y.rows(), x.cols());
  v.topRows(x.rows()) = x;
  v.bottomRows(y.rows()) = y;
  return out;
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw InputError("concat: nothing to concatenate");
  Var out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out = concat(out, parts[i]);
  return out;
}

Var pick(Var a, Eigen::Index i) {
  if (i < 0 || i >= a.value().size()) throw InputError("pick: index out of range");
  Var out = unary(a, Op::pick, [i](const Matrix& x) -> Matrix { return Matrix::Constant(1, 1, x(i)); });
  a.tape->node(out.id).i0 = i;
  return out;
}

Var softmax(Var a) {
  if (a.cols() != 1) throw InputError("softmax: expects a column vector");
  return unary(a, Op::softmax, [](const Matrix& x) -> Matrix {
    const Matrix e = (x.array() - x.maxCoeff()).exp().matrix();
    return e / e.sum();
  });
}

Var log_softmax(Var a) {
  if (a.cols() != 1) throw InputError("log_softmax: expects a column vector");
  return unary(a, Op::log_softmax, [](const Matrix& x) -> Matrix {
    const double m = x.maxCoeff();
    const double lse = m + std::log((x.array() - m).exp().sum());
    return (x.array() - lse).matrix();
  });
}

double smooth_l1(double x) {
  const double ax = std::abs(x);
  return ax <= 1.0 ? 0.5 * x * x : ax - 0.5;
}

Var smooth_l1(Var a) {
  return unary(a, Op::smooth_l1, [](const Matrix& x) -> Matrix {
    Matrix y(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) y(i) = smooth_l1(x(i));
    return y;
  });
}

Var minimum(Var a, Var b) {
  same_shape(a, b, "minimum");
  Tape& t = *a.tape;
  Var out = t.push(Op::minimum, a.id, b.id);
  t.node(out.id).value = t.value(a.id).cwiseMin(t.value(b.id));
  return out;
}

Var clamp(Var a, double lo, double hi) {
  if (lo > hi) throw InputError("clamp: lo > hi");
  Var out = unary(a, Op::clamp, [lo, hi](const Matrix& x) -> Matrix { return x.cwiseMax(lo).cwiseMin(hi); });
  Tape::Node& n = a.tape->node(out.id);
  n.c0 = lo;
  n.c1 = hi;
  return out;
}

Var dot(Var a, Var b) { return sum(mul(a, b)); }

}  // namespace aislab::nn
