#include "aislab/nn/optim.hpp"

#include <cmath>

#include "aislab/error.hpp"

namespace aislab::nn {

void check_finite_grads(const ParamList& params) {
  for (const Parameter* p : params) {
    if (!p->grad.allFinite()) throw NumericalError("optimizer: non-finite gradient in " + p->name);
  }
}

void Sgd::step(const ParamList& params, double lr) {
  check_finite_grads(params);
  for (Parameter* p : params) p->value -= lr * p->grad;
}

void Adam::step(const ParamList& params, double lr) {
  check_finite_grads(params);
  if (m_.empty()) {
    for (const Parameter* p : params) {
      m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (m_.size() != params.size()) throw InputError("Adam: parameter list changed between steps");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseAbs2();
    p.value.array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

}  // namespace aislab::nn
