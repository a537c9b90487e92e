#pragma once

#include <vector>

#include "aislab/nn/tape.hpp"

namespace aislab::nn {

/// Throws NumericalError if any gradient entry is not finite.
void check_finite_grads(const ParamList& params);

/// First-order optimizer over a fixed parameter list. step() descends.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  /// Rejects the whole step if any gradient is non-finite.
  virtual void step(const ParamList& params, double lr) = 0;
};

class Sgd final : public Optimizer {
 public:
  void step(const ParamList& params, double lr) override;
};

class Adam final : public Optimizer {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(const ParamList& params, double lr) override;
  long steps() const { return t_; }

 private:
  double beta1_;
  double beta2_;
  double eps_;
  long t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace aislab::nn
