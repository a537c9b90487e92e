#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aislab/env.hpp"
#include "aislab/neural_ais.hpp"
#include "aislab/nn/layers.hpp"
#include "aislab/nn/optim.hpp"

namespace aislab {

enum class AgentKind { ais_ac, ais_pg, ais_ppo, memoryless };
std::string to_string(AgentKind kind);
AgentKind agent_kind_from_string(const std::string& name);

/// What multiplies the score in the actor-critic update.
enum class CriticWeight { td_error, value };

struct TrainConfig {
  AgentKind agent = AgentKind::ais_ac;
  double ais_lr = 1.5e-3;
  double actor_lr = 3.5e-4;
  double critic_lr = 7e-4;
  /// Discount for returns and targets; the environment's default when absent.
  std::optional<double> gamma;
  int iterations = 200;
  int batch_size = 4;    // episodes per iteration
  int episode_len = 0;   // 0: the environment's horizon
  int grad_steps = 1;    // updates per iteration over minibatches of whole episodes
  int minibatch = 0;     // episodes per minibatch, 0: the whole batch
  int ppo_epochs = 12;
  double clip = 0.2;
  double ppo_value_coef = 0.5;
  double ppo_ais_weight = 1.0;
  bool ppo_shared_generator = true;  // policy and value losses also train the GRU
  /// Power-law schedules lr * i^-exp; otherwise the rates stay constant.
  bool power_law = false;
  double a_exp = 0.6;  // AIS generator
  double c_exp = 0.7;  // critic
  double b_exp = 0.9;  // actor
  AisConfig ais;
  std::vector<int> actor_hidden{32};
  std::vector<int> critic_hidden{32};
  CriticWeight critic_weight = CriticWeight::td_error;
  bool reward_to_go = false;
  /// Feature map of the memoryless agent on finite states; empty: identity.
  std::vector<int> memoryless_partition;
  double actor_log_std = -0.7;  // initial log-std of continuous policies
  int eval_episodes = 100;
  bool greedy_eval = true;
  bool record_wallclock = false;
  std::uint64_t seed = 0;

  double discount(const Environment& env) const { return gamma.value_or(env.default_discount()); }
  int horizon(const Environment& env) const { return episode_len > 0 ? episode_len : env.horizon(); }
  void validate() const;
};

/// Step size of a power-law schedule at iteration i >= 1.
double schedule_rate(double scale, double exponent, int iteration);

struct ScheduleReport {
  bool ok = true;
  std::vector<std::string> failures;
};

/// Checks the power-law family a_i = i^-a, b_i = i^-b (and c_i = i^-c):
/// every exponent in (0.5, 1] so the sums diverge and the squares converge,
/// b/a -> 0, and with a critic c/a -> 0 and b/c -> 0.
ScheduleReport validate_schedule(double a_exp, double b_exp, std::optional<double> c_exp = std::nullopt);
ScheduleReport validate_schedule(const TrainConfig& config);

/// Softmax policy over finite actions, or a Gaussian with learnable log-std.
class Actor {
 public:
  Actor() = default;
  Actor(const Environment& env, int feature_dim, const std::vector<int>& hidden, double log_std, Rng& rng);

  bool discrete() const { return discrete_; }
  nn::Var log_prob(nn::Tape& tape, nn::Var features, const Action& a);
  double log_prob(const Eigen::VectorXd& features, const Action& a) const;
  Eigen::VectorXd probs(const Eigen::VectorXd& features) const;  // discrete only
  Action sample(const Eigen::VectorXd& features, Rng& rng) const;
  Action greedy(const Eigen::VectorXd& features) const;
  nn::ParamList params();
  nn::Mlp& net() { return net_; }

 private:
  bool discrete_ = true;
  nn::Mlp net_;
  nn::Parameter log_std_;
};

class Critic {
 public:
  Critic() = default;
  Critic(int feature_dim, const std::vector<int>& hidden, Rng& rng);
  nn::Var value(nn::Tape& tape, nn::Var features) { return net_(tape, features); }
  double value(const Eigen::VectorXd& features) const { return net_.value(features)(0); }
  nn::ParamList params() { return net_.params(); }
  nn::Mlp& net() { return net_; }

 private:
  nn::Mlp net_;
};

/// An episode with the features the agent saw and the behavior log-probs.
struct Rollout {
  Episode episode;
  std::vector<Eigen::VectorXd> features;  // T+1 entries
  std::vector<double> log_probs;          // T entries
};

/// Transitions in insertion order with episode boundaries.
class ReplayBuffer {
 public:
  struct Transition {
    Eigen::VectorXd z;
    Action a;
    Eigen::VectorXd s;
    Eigen::VectorXd s_next;
    double r = 0.0;
  };

  void add(const Rollout& rollout);
  void clear();
  std::size_t size() const { return transitions_.size(); }
  std::size_t episodes() const { return starts_.size(); }
  const Transition& at(std::size_t i) const { return transitions_[i]; }
  /// [begin, end) transition range of episode e.
  std::pair<std::size_t, std::size_t> episode_range(std::size_t e) const;
  const Rollout& rollout(std::size_t e) const { return rollouts_[e]; }
  /// Shuffled minibatches of whole episodes, so unrolled gradients never
  /// cross an episode boundary.
  std::vector<std::vector<std::size_t>> episode_batches(std::size_t per_batch, Rng& rng) const;

 private:
  std::vector<Transition> transitions_;
  std::vector<std::size_t> starts_;
  std::vector<Rollout> rollouts_;
};

/// Accumulates weight * sum_t gamma^t r_t sum_{tau<=t} grad log mu(a_tau|z_tau)
/// (or, with reward_to_go, sum_tau grad log mu(a_tau|z_tau) sum_{t>=tau}
/// gamma^(t-tau) r_t) into the actor's gradients. Features are constants.
/// Returns how many log-probabilities were clipped at -30.
int reinforce_gradient(const Rollout& rollout, Actor& actor, double gamma, bool reward_to_go, double weight = 1.0);

/// One TD sample: target r + gamma sum_k p_k V(z'_k). `next` empty means terminal.
struct TdSample {
  Eigen::VectorXd z;
  double reward = 0.0;
  std::vector<std::pair<double, Eigen::VectorXd>> next;
  double weight = 1.0;
};

/// sum_i w_i smooth_l1(V(z_i) - target_i). With semi_gradient the target is a constant.
nn::Var td_loss(nn::Tape& tape, Critic& critic, const std::vector<TdSample>& samples, double gamma,
                bool semi_gradient = true);

/// min(rho A, clip(rho, 1-eps, 1+eps) A) with rho = exp(new - old) formed in log space.
nn::Var ppo_clip_objective(nn::Var new_log_prob, double old_log_prob, double advantage, double clip);

/// Descends the AIS loss with a_i and ascends the actor objective with b_i.
/// Actor gradients must hold the ascent direction. Rejects the whole update
/// if any gradient is non-finite.
void two_timescale_update(const nn::ParamList& ais, const nn::ParamList& actor, int iteration,
                          const TrainConfig& config, nn::Optimizer& ais_opt, nn::Optimizer& actor_opt);

struct MetricsRow {
  int iteration = 0;
  double mean_return = 0.0;
  double ais_loss = 0.0;
  double reward_loss = 0.0;
  double transition_loss = 0.0;
  std::optional<double> eps_hat;
  std::optional<double> delta_hat;
  double wallclock_ms = 0.0;
};

/// Learner loop: rollout, buffer, then generator, critic and actor updates.
class Trainer {
 public:
  Trainer(const Environment& env, TrainConfig config);

  const TrainConfig& config() const { return config_; }
  int iteration() const { return iteration_; }
  bool has_generator() const { return static_cast<bool>(gen_); }
  NeuralAisGenerator& generator() { return *gen_; }
  Actor& actor() { return actor_; }
  Critic& critic() { return critic_; }
  int feature_dim() const { return feature_dim_; }

  Eigen::VectorXd initial_features(const Eigen::VectorXd& s0) const;
  Eigen::VectorXd next_features(const Eigen::VectorXd& z, const Eigen::VectorXd& s_next, const Action& a) const;
  Rollout rollout(Rng& rng, bool greedy = false) const;

  /// One iteration; returns its metrics row.
  MetricsRow iterate();
  /// Mean discounted return over fresh episodes from a dedicated stream.
  double evaluate(int episodes, std::uint64_t stream, bool greedy) const;
  /// Parameter-change norms of the last iteration: {generator, actor, critic}.
  const std::array<double, 3>& last_change() const { return last_change_; }
  /// Log-probabilities clipped at -30 so far.
  int clipped_logs() const { return clipped_logs_; }

 private:
  void update_actor_critic(const std::vector<Rollout>& batch);
  void update_pg(const std::vector<Rollout>& batch);
  void update_ppo(const std::vector<Rollout>& batch);
  std::vector<Episode> episodes_of(const std::vector<Rollout>& batch) const;

  const Environment* env_;
  TrainConfig config_;
  double gamma_ = 0.0;
  int horizon_ = 0;
  int feature_dim_ = 0;
  Rng rng_;
  std::unique_ptr<NeuralAisGenerator> gen_;
  Actor actor_;
  Critic critic_;
  nn::Adam ais_opt_;
  nn::Adam actor_opt_;
  nn::Adam critic_opt_;
  int iteration_ = 0;
  int updates_ = 0;
  int clipped_logs_ = 0;
  std::array<double, 3> last_change_{0.0, 0.0, 0.0};
};

struct TrainResult {
  std::vector<MetricsRow> rows;
  double final_return = 0.0;  // evaluation after the last iteration
};

TrainResult train_loop(const Environment& env, const TrainConfig& config);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

}  // namespace aislab
