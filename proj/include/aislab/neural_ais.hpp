#pragma once

#include <string>
#include <vector>

#include "aislab/env.hpp"
#include "aislab/nn/layers.hpp"
#include "aislab/nn/tape.hpp"
#include "aislab/tabular_ais.hpp"

namespace aislab {

/// Transition term of the AIS loss. tv is accepted for reporting only.
enum class AisLossKind { mmd, kl, tv };
/// Kernel behind the mmd transition term. `mean` is the closed-form
/// surrogate (m - 2 s')^T m; the others use reparameterized Gaussian samples.
enum class MmdKernel { mean, energy, gaussian, laplace };

std::string to_string(AisLossKind kind);
std::string to_string(MmdKernel kernel);

struct AisConfig {
  double lambda = 0.3;
  AisLossKind loss = AisLossKind::mmd;
  MmdKernel kernel = MmdKernel::mean;
  double kernel_param = 1.0;  // energy exponent, gaussian bandwidth or laplace scale
  int kernel_samples = 8;
  double transition_log_std = 0.0;
  int feature_dim = 8;
  std::vector<int> hidden{16};

  void validate() const;
};

/// Anything that maps histories to features and predicts reward and next state.
class AisModel {
 public:
  virtual ~AisModel() = default;
  /// Feature after observing the start state.
  virtual Eigen::VectorXd initial(const Eigen::VectorXd& s0) const = 0;
  virtual Eigen::VectorXd step(const Eigen::VectorXd& z, const Eigen::VectorXd& s_next, const Action& a) const = 0;
  virtual double reward(const Eigen::VectorXd& z, const Action& a) const = 0;
  /// One draw of the predicted next state (a raw environment state).
  virtual Eigen::VectorXd sample_next(const Eigen::VectorXd& z, const Action& a, Rng& rng) const = 0;
};

/// GRU compressor with an MLP reward head and a softmax (finite states, kl)
/// or Gaussian-mean transition head. On finite states the Gaussian mean lives
/// in one-hot space; sample_next then clips it to the simplex and draws an id.
class NeuralAisGenerator final : public AisModel {
 public:
  NeuralAisGenerator(const Environment& env, AisConfig config, Rng& rng);

  const AisConfig& config() const { return config_; }
  int feature_dim() const { return config_.feature_dim; }
  bool softmax_transitions() const { return softmax_; }

  nn::Gru& compressor() { return gru_; }
  nn::Mlp& reward_head() { return reward_; }
  nn::SoftmaxHead& softmax_head() { return softmax_head_; }
  nn::GaussianHead& gaussian_head() { return gaussian_head_; }
  nn::ParamList params();
  nn::ParamList compressor_params() { return gru_.params(); }
  nn::ParamList transition_params();

  Eigen::VectorXd encode_action(const Action& a) const;
  /// GRU input [encode(s'), encode(a)]; a default Action encodes as zeros.
  Eigen::VectorXd input(const Eigen::VectorXd& s_next, const Action& a) const;

  Eigen::VectorXd initial(const Eigen::VectorXd& s0) const override;
  Eigen::VectorXd step(const Eigen::VectorXd& z, const Eigen::VectorXd& s_next, const Action& a) const override;
  double reward(const Eigen::VectorXd& z, const Action& a) const override;
  Eigen::VectorXd sample_next(const Eigen::VectorXd& z, const Action& a, Rng& rng) const override;

  nn::Var initial(nn::Tape& tape, const Eigen::VectorXd& s0);
  nn::Var step(nn::Tape& tape, nn::Var z, const Eigen::VectorXd& s_next, const Action& a);

  const Environment& env() const { return *env_; }

 private:
  const Environment* env_;
  AisConfig config_;
  bool softmax_ = false;
  nn::Gru gru_;
  nn::Mlp reward_;
  nn::SoftmaxHead softmax_head_;
  nn::GaussianHead gaussian_head_;
};

/// Per-episode pieces of the AIS loss.
struct AisLossParts {
  nn::Var total;
  nn::Var reward;
  nn::Var transition;
  /// features[e][t] = Z_t of episode e, for t = 0..T (T+1 entries).
  std::vector<std::vector<nn::Var>> features;
  int clipped_logs = 0;
};

/// (1/T) sum_t lambda (r_hat(z_t,a_t) - r_t)^2 + (1 - lambda) L_P(z_t, a_t, s_{t+1}),
/// averaged over episodes. `noise` feeds the sampled-kernel variants.
AisLossParts ais_loss(nn::Tape& tape, NeuralAisGenerator& gen, const std::vector<Episode>& batch, Rng& noise);

/// Tabular z' = f(z, s', a) and neural z' = GRU(z, [s', a]).
/// The same loss for a tabular generator: kl uses -log P_hat(s'|z,a), mmd
/// takes m = P_hat(.|z,a) in one-hot space.
double tabular_ais_loss(const TabularAisGenerator& gen, const std::vector<Episode>& batch, double lambda,
                        AisLossKind kind);

int ais_step(const TabularAisGenerator& gen, int z, int s_next, int a);
Eigen::VectorXd ais_step(const NeuralAisGenerator& gen, const Eigen::VectorXd& z, const Eigen::VectorXd& s_next,
                         const Action& a);

/// A tabular generator seen through the AisModel interface; z holds the id.
class TabularAisModel final : public AisModel {
 public:
  TabularAisModel(const TabularAisGenerator& gen, const Environment& env) : gen_(&gen), env_(&env) {}
  Eigen::VectorXd initial(const Eigen::VectorXd& s0) const override;
  Eigen::VectorXd step(const Eigen::VectorXd& z, const Eigen::VectorXd& s_next, const Action& a) const override;
  double reward(const Eigen::VectorXd& z, const Action& a) const override;
  Eigen::VectorXd sample_next(const Eigen::VectorXd& z, const Action& a, Rng& rng) const override;

 private:
  const TabularAisGenerator* gen_;
  const Environment* env_;
};

struct EmpiricalEpsDelta {
  double eps_hat = 0.0;
  /// Max over (state bin, action bin) of the square root of the clamped
  /// energy-distance U-statistic between observed and model next states.
  double delta_hat = 0.0;
  std::size_t n_samples = 0;
  std::size_t bins_used = 0;
  std::size_t bins_excluded = 0;  // fewer than two observations
};

/// Estimates from recorded episodes.
EmpiricalEpsDelta empirical_eps_delta(const Environment& env, const AisModel& model,
                                      const std::vector<Episode>& episodes, Rng& rng);
/// Rolls out `n_rollouts` episodes with uniformly random actions, then estimates.
EmpiricalEpsDelta measure_eps_delta_empirical(const Environment& env, const AisModel& model, int n_rollouts,
                                              Rng& rng);

/// Uniform random behavior: a random index, or a value uniform in [-1, 1]^d.
Action random_action(const Environment& env, Rng& rng);

}  // namespace aislab
