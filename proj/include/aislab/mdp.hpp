#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace aislab {

using Rng = std::mt19937_64;

/// Finite MDP <S, A, P, r, gamma> with dense tables.
///
/// transitions[a] is an n_states x n_states row-stochastic matrix, rewards is
/// n_states x n_actions. The constructor validates every invariant; a
/// constructed TabularMdp is always well formed.
class TabularMdp {
 public:
  TabularMdp(std::vector<Eigen::MatrixXd> transitions, Eigen::MatrixXd rewards, double discount);

  int n_states() const { return static_cast<int>(rewards_.rows()); }
  int n_actions() const { return static_cast<int>(rewards_.cols()); }
  double discount() const { return discount_; }

  const Eigen::MatrixXd& transitions(int action) const { return transitions_[action]; }
  const std::vector<Eigen::MatrixXd>& transitions() const { return transitions_; }
  /// P(. | s, a) as a row vector.
  Eigen::RowVectorXd row(int state, int action) const { return transitions_[action].row(state); }
  double prob(int state, int action, int next) const { return transitions_[action](state, next); }
  double reward(int state, int action) const { return rewards_(state, action); }
  const Eigen::MatrixXd& rewards() const { return rewards_; }

  /// Same dynamics with every reward multiplied by `factor`.
  TabularMdp scaled_rewards(double factor) const;

 private:
  std::vector<Eigen::MatrixXd> transitions_;
  Eigen::MatrixXd rewards_;
  double discount_;
};

/// Memoryless randomized policy: action_probs(s, a).
class StationaryPolicy {
 public:
  explicit StationaryPolicy(Eigen::MatrixXd action_probs);
  static StationaryPolicy deterministic(const std::vector<int>& actions, int n_actions);
  static StationaryPolicy uniform(int n_states, int n_actions);

  int n_states() const { return static_cast<int>(probs_.rows()); }
  int n_actions() const { return static_cast<int>(probs_.cols()); }
  double prob(int state, int action) const { return probs_(state, action); }
  const Eigen::MatrixXd& probs() const { return probs_; }
  /// Most probable action, lowest id on ties.
  int greedy_action(int state) const;

 private:
  Eigen::MatrixXd probs_;
};

/// A policy with finite internal memory. The memory record is an opaque
/// vector of integers so product chains over (state, memory) can be hashed.
class HistoryPolicy {
 public:
  using Memory = std::vector<std::int64_t>;
  virtual ~HistoryPolicy() = default;
  virtual int n_actions() const = 0;
  virtual Memory init(int start_state) const = 0;
  virtual Memory step(const Memory& memory, int prev_action, int new_state) const = 0;
  virtual Eigen::RowVectorXd act(const Memory& memory) const = 0;
};

/// Aligned rollout: states[t], actions[t], rewards[t] -> states[t+1].
struct Trajectory {
  std::vector<int> states;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<Eigen::VectorXd> features;

  std::size_t length() const { return actions.size(); }
};

struct ValueIterationResult {
  Eigen::VectorXd v_star;
  Eigen::MatrixXd q_star;
  StationaryPolicy pi_star;
  double residual = 0.0;
  int sweeps = 0;
};

/// Bellman optimality residual max_s |(T v)(s) - v(s)|.
double bellman_residual(const TabularMdp& mdp, const Eigen::VectorXd& v);

/// Q(s,a) = r(s,a) + gamma * sum_s' P(s'|s,a) v(s').
Eigen::MatrixXd q_from_v(const TabularMdp& mdp, const Eigen::VectorXd& v);

/// Greedy deterministic policy from Q with lowest-id tie breaking. Entries
/// within `tie_tol` of the row maximum count as ties.
StationaryPolicy greedy_policy(const Eigen::MatrixXd& q, double tie_tol = 1e-12);

ValueIterationResult value_iteration(const TabularMdp& mdp, double tol);

/// Exact value of a stationary policy by solving (I - gamma P_pi) v = r_pi.
Eigen::VectorXd policy_value(const TabularMdp& mdp, const StationaryPolicy& policy);

using AnyPolicy = std::variant<const StationaryPolicy*, const HistoryPolicy*>;

Trajectory sample_trajectory(const TabularMdp& mdp, AnyPolicy policy, int start_state, int horizon,
                             Rng& rng);

/// Draws an index from a discrete distribution given as a row of probabilities.
int sample_index(const Eigen::Ref<const Eigen::RowVectorXd>& probs, Rng& rng);

/// The four-state, three-action example MDP with a large negative reward at state 3.
TabularMdp toy_mdp(double k = 100.0, double gamma = 0.95);

/// The codebook finite-state controller built around `reference`.
/// Memory layout: {previous state, controller memory M_t}.
std::unique_ptr<HistoryPolicy> codebook_fsm_policy(const StationaryPolicy& reference);

/// Dirichlet(1) transition rows and uniform rewards in [reward_lo, reward_hi).
TabularMdp random_mdp(int n_states, int n_actions, std::uint64_t seed, double reward_lo = 0.0,
                      double reward_hi = 1.0, double gamma = 0.9);

// Serialization -------------------------------------------------------------

std::string mdp_to_json(const TabularMdp& mdp);
TabularMdp mdp_from_json(const std::string& text);
/// CSV with header t,state,action,reward.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace aislab
