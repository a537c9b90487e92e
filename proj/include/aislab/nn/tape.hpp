#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace aislab::nn {

using Matrix = Eigen::MatrixXd;

/// A trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string param_name, Matrix init)
      : name(std::move(param_name)), value(std::move(init)), grad(Matrix::Zero(value.rows(), value.cols())) {}
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

using ParamList = std::vector<Parameter*>;
void zero_grads(const ParamList& params);

class Tape;

/// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  double item() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

enum class Op : std::uint8_t {
  leaf,
  add,
  sub,
  mul,
  matmul,
  scale,
  shift,
  tanh,
  sigmoid,
  exp,
  log,
  square,
  pow,
  norm,
  sum,
  concat,
  pick,
  softmax,
  log_softmax,
  smooth_l1,
  minimum,
  clamp,
};

/// Reverse-mode tape over dense matrices. Nodes are appended in evaluation
/// order, which is a topological order, so backward is one reverse sweep.
/// clear() keeps node storage so repeated passes of the same shape do not
/// allocate.
class Tape {
 public:
  Var constant(const Matrix& value);
  Var scalar(double value);
  Var param(Parameter& p);

  /// Accumulates d root / d p into every Parameter reached. Root must be 1x1.
  void backward(Var root);

  void clear() { size_ = 0; }
  std::size_t size() const { return size_; }
  /// Nodes processed by the last backward call.
  std::size_t visits() const { return visits_; }

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  /// Gradient of the last backward root w.r.t. node `id`; empty if unreached.
  const Matrix& grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }

  // Used by the op functions below.
  struct Node {
    Matrix value;
    Matrix grad;
    Op op = Op::leaf;
    int a = -1;
    int b = -1;
    double c0 = 0.0;
    double c1 = 0.0;
    Eigen::Index i0 = 0;
    Parameter* param = nullptr;
    bool needs_grad = false;
    bool has_grad = false;
  };
  Var push(Op op, int a, int b = -1);
  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }

 private:
  void accumulate(int id, const Matrix& g);
  void propagate(Node& n);

  std::vector<Node> nodes_;
  std::size_t size_ = 0;
  std::size_t visits_ = 0;
};

Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise product.
Var mul(Var a, Var b);
Var matmul(Var a, Var b);
Var scale(Var a, double c);
/// a + c elementwise.
Var shift(Var a, double c);
Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
/// log with outputs clipped below at `floor`; clipped entries pass no gradient.
Var log(Var a, double floor = -30.0);
Var square(Var a);
/// |a|^p elementwise for a >= 0.
Var pow(Var a, double p);
/// Euclidean norm of all entries, as 1x1. Gradient 0 at the origin.
Var norm(Var a);
Var sum(Var a);
/// Vertical concatenation.
Var concat(Var a, Var b);
Var concat(const std::vector<Var>& parts);
/// Entry i (column-major) as 1x1.
Var pick(Var a, Eigen::Index i);
/// Column-vector softmax with max subtraction.
Var softmax(Var a);
Var log_softmax(Var a);
/// 0.5 x^2 for |x| <= 1, |x| - 0.5 otherwise, elementwise.
Var smooth_l1(Var a);
Var minimum(Var a, Var b);
Var clamp(Var a, double lo, double hi);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(double c, Var a) { return scale(a, c); }
inline Var operator-(Var a) { return scale(a, -1.0); }
Var dot(Var a, Var b);

double smooth_l1(double x);

}  // namespace aislab::nn
