#pragma once

#include <string>
#include <vector>

#include "aislab/mdp.hpp"
#include "aislab/nn/tape.hpp"

namespace aislab::nn {

/// y = W x + b.
struct Linear {
  Parameter weight;
  Parameter bias;

  Linear() = default;
  /// Uniform(-1/sqrt(in), 1/sqrt(in)) initialization.
  Linear(int in, int out, Rng& rng, const std::string& name);
  Var operator()(Tape& tape, Var x);
  ParamList params() { return {&weight, &bias}; }
  int in_dim() const { return static_cast<int>(weight.value.cols()); }
  int out_dim() const { return static_cast<int>(weight.value.rows()); }
};

/// tanh MLP; the last layer is linear.
class Mlp {
 public:
  Mlp() = default;
  /// sizes = {in, hidden..., out}.
  Mlp(const std::vector<int>& sizes, Rng& rng, const std::string& name);
  Var operator()(Tape& tape, Var x);
  /// Forward pass without a tape.
  Eigen::VectorXd value(const Eigen::VectorXd& x) const;
  ParamList params();
  int in_dim() const { return layers_.front().in_dim(); }
  int out_dim() const { return layers_.back().out_dim(); }
  /// Zero the output layer, e.g. for a uniform initial softmax policy.
  void zero_output();

 private:
  std::vector<Linear> layers_;
};

/// Cho-style GRU cell:
///   u = sigmoid(Wu x + Uu z + bu), r = sigmoid(Wr x + Ur z + br),
///   c = tanh(Wc x + Uc (r * z) + bc), z' = (1 - u) * z + u * c.
struct Gru {
  Parameter wu, uu, bu;
  Parameter wr, ur, br;
  Parameter wc, uc, bc;

  Gru() = default;
  Gru(int input_dim, int hidden_dim, Rng& rng, const std::string& name);
  ParamList params() { return {&wu, &uu, &bu, &wr, &ur, &br, &wc, &uc, &bc}; }
  int input_dim() const { return static_cast<int>(wu.value.cols()); }
  int hidden_dim() const { return static_cast<int>(wu.value.rows()); }
  void set_zero();
};

Var gru_step(Tape& tape, Gru& gru, Var z_prev, Var input);

/// Plain-double GRU forward, for rollouts that need no gradient.
Eigen::VectorXd gru_step_value(const Gru& gru, const Eigen::VectorXd& z_prev, const Eigen::VectorXd& input);

/// Log-probabilities over next states from (features, one-hot action).
class SoftmaxHead {
 public:
  SoftmaxHead() = default;
  SoftmaxHead(int feature_dim, int n_actions, int n_outcomes, const std::vector<int>& hidden, Rng& rng,
              const std::string& name);
  Var log_probs(Tape& tape, Var features, Var action);
  ParamList params() { return net_.params(); }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

 private:
  Mlp net_;
};

/// Mean of a Gaussian over next-state embeddings. log-std is fixed.
class GaussianHead {
 public:
  GaussianHead() = default;
  GaussianHead(int feature_dim, int action_dim, int out_dim, const std::vector<int>& hidden, Rng& rng,
               const std::string& name, double log_std = 0.0);
  Var mean(Tape& tape, Var features, Var action);
  double log_std() const { return log_std_; }
  ParamList params() { return net_.params(); }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

 private:
  Mlp net_;
  double log_std_ = 0.0;
};

Eigen::VectorXd one_hot(int index, int size);

}  // namespace aislab::nn
