#include "aislab/nn/layers.hpp"

#include <cmath>

#include "aislab/error.hpp"

namespace aislab::nn {

namespace {

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

Eigen::VectorXd sigmoid_value(const Eigen::VectorXd& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

}  // namespace

Linear::Linear(int in, int out, Rng& rng, const std::string& name) {
  if (in < 1 || out < 1) throw InputError("Linear: dimensions must be >= 1");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight = Parameter(name + ".weight", uniform_matrix(out, in, bound, rng));
  bias = Parameter(name + ".bias", uniform_matrix(out, 1, bound, rng));
}

Var Linear::operator()(Tape& tape, Var x) { return add(matmul(tape.param(weight), x), tape.param(bias)); }

Mlp::Mlp(const std::vector<int>& sizes, Rng& rng, const std::string& name) {
  if (sizes.size() < 2) throw InputError("Mlp: need at least input and output sizes");
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    layers_.emplace_back(sizes[i], sizes[i + 1], rng, name + ".l" + std::to_string(i));
  }
}

Var Mlp::operator()(Tape& tape, Var x) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i](tape, x);
    if (i + 1 < layers_.size()) x = tanh(x);
  }
  return x;
}

ParamList Mlp::params() {
  ParamList out;
  for (auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

void Mlp::zero_output() {
  layers_.back().weight.value.setZero();
  layers_.back().bias.value.setZero();
}

Gru::Gru(int input_dim, int hidden_dim, Rng& rng, const std::string& name) {
  if (input_dim < 1 || hidden_dim < 1) throw InputError("Gru: dimensions must be >= 1");
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  auto w = [&](const char* tag, Eigen::Index rows, Eigen::Index cols) {
    return Parameter(name + "." + tag, uniform_matrix(rows, cols, bound, rng));
  };
  wu = w("wu", hidden_dim, input_dim);
  uu = w("uu", hidden_dim, hidden_dim);
  bu = w("bu", hidden_dim, 1);
  wr = w("wr", hidden_dim, input_dim);
  ur = w("ur", hidden_dim, hidden_dim);
  br = w("br", hidden_dim, 1);
  wc = w("wc", hidden_dim, input_dim);
  uc = w("uc", hidden_dim, hidden_dim);
  bc = w("bc", hidden_dim, 1);
}

void Gru::set_zero() {
  for (Parameter* p : params()) p->value.setZero();
}

Var gru_step(Tape& tape, Gru& g, Var z, Var x) {
  if (z.rows() != g.hidden_dim() || x.rows() != g.input_dim()) throw InputError("gru_step: dimension mismatch");
  auto gate = [&](Parameter& w, Parameter& u, Parameter& b, Var h) {
    return add(add(matmul(tape.param(w), x), matmul(tape.param(u), h)), tape.param(b));
  };
  Var u = sigmoid(gate(g.wu, g.uu, g.bu, z));
  Var r = sigmoid(gate(g.wr, g.ur, g.br, z));
  Var c = tanh(gate(g.wc, g.uc, g.bc, mul(r, z)));
  return add(z, mul(u, sub(c, z)));
}

Eigen::VectorXd gru_step_value(const Gru& g, const Eigen::VectorXd& z, const Eigen::VectorXd& x) {
  const Eigen::VectorXd u = sigmoid_value(g.wu.value * x + g.uu.value * z + g.bu.value);
  const Eigen::VectorXd r = sigmoid_value(g.wr.value * x + g.ur.value * z + g.br.value);
  const Eigen::VectorXd c =
      (g.wc.value * x + g.uc.value * r.cwiseProduct(z) + g.bc.value).array().tanh().matrix();
  return z + u.cwiseProduct(c - z);
}

Eigen::VectorXd Mlp::value(const Eigen::VectorXd& x) const {
  Eigen::VectorXd h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].weight.value * h + layers_[i].bias.value;
    if (i + 1 < layers_.size()) h = h.array().tanh().matrix();
  }
  return h;
}

SoftmaxHead::SoftmaxHead(int feature_dim, int n_actions, int n_outcomes, const std::vector<int>& hidden, Rng& rng,
                         const std::string& name) {
  std::vector<int> sizes{feature_dim + n_actions};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(n_outcomes);
  net_ = Mlp(sizes, rng, name);
}

Var SoftmaxHead::log_probs(Tape& tape, Var features, Var action) {
  return log_softmax(net_(tape, concat(features, action)));
}

GaussianHead::GaussianHead(int feature_dim, int action_dim, int out_dim, const std::vector<int>& hidden, Rng& rng,
                           const std::string& name, double log_std)
    : log_std_(log_std) {
  std::vector<int> sizes{feature_dim + action_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out_dim);
  net_ = Mlp(sizes, rng, name);
}

Var GaussianHead::mean(Tape& tape, Var features, Var action) { return net_(tape, concat(features, action)); }

Eigen::VectorXd one_hot(int index, int size) {
  if (index < 0 || index >= size) throw InputError("one_hot: index out of range");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size);
  v(index) = 1.0;
  return v;
}

}  // namespace aislab::nn
