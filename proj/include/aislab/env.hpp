#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aislab/mdp.hpp"

namespace aislab {

/// An action for either a finite (index) or continuous (value) action space.
struct Action {
  int index = -1;
  Eigen::VectorXd value;

  static Action discrete(int a) { return Action{a, {}}; }
  static Action continuous(Eigen::VectorXd v) { return Action{-1, std::move(v)}; }
};

/// One episode: states[t], actions[t], rewards[t] -> states[t+1].
struct Episode {
  std::vector<Eigen::VectorXd> states;
  std::vector<Action> actions;
  std::vector<double> rewards;

  std::size_t length() const { return actions.size(); }
};

struct StepResult {
  Eigen::VectorXd state;
  double reward = 0.0;
};

/// Episodic environment with pure step semantics: all randomness comes from
/// the caller-owned generator, so step(state, action, rng) is a function of
/// its inputs and the generator draw.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual bool discrete_actions() const = 0;
  /// Number of actions for finite action spaces, 0 otherwise.
  virtual int n_actions() const = 0;
  /// Dimension of the action vector for continuous action spaces, 0 otherwise.
  virtual int action_dim() const = 0;
  /// Dimension of encode(state).
  virtual int state_dim() const = 0;
  /// Number of finite states, 0 for continuous state spaces.
  virtual int n_states() const { return 0; }
  virtual int horizon() const = 0;
  virtual double default_discount() const = 0;

  virtual Eigen::VectorXd start(Rng& rng) const = 0;
  virtual StepResult step(const Eigen::VectorXd& state, const Action& action, Rng& rng) const = 0;

  /// Network-facing encoding (one-hot for finite states, identity otherwise).
  virtual Eigen::VectorXd encode(const Eigen::VectorXd& state) const = 0;
  /// Coarse bin id used to group observed transitions.
  virtual int bin(const Eigen::VectorXd& state) const = 0;
  /// Bin id of an action.
  virtual int action_bin(const Action& action) const = 0;
};

/// A finite MDP exposed as an episodic environment. State vectors hold the
/// state id in their single entry.
class TabularEnv final : public Environment {
 public:
  TabularEnv(TabularMdp mdp, std::vector<int> start_states, int horizon, std::string name = "tabular");

  const TabularMdp& mdp() const { return mdp_; }
  const std::vector<int>& start_states() const { return start_states_; }

  std::string name() const override { return name_; }
  bool discrete_actions() const override { return true; }
  int n_actions() const override { return mdp_.n_actions(); }
  int action_dim() const override { return 0; }
  int state_dim() const override { return mdp_.n_states(); }
  int n_states() const override { return mdp_.n_states(); }
  int horizon() const override { return horizon_; }
  double default_discount() const override { return mdp_.discount(); }

  Eigen::VectorXd start(Rng& rng) const override;
  StepResult step(const Eigen::VectorXd& state, const Action& action, Rng& rng) const override;
  Eigen::VectorXd encode(const Eigen::VectorXd& state) const override;
  int bin(const Eigen::VectorXd& state) const override;
  int action_bin(const Action& action) const override { return action.index; }

  static int id(const Eigen::VectorXd& state) { return static_cast<int>(state(0)); }
  static Eigen::VectorXd state_of(int id) { return Eigen::VectorXd::Constant(1, id); }

 private:
  TabularMdp mdp_;
  std::vector<int> start_states_;
  int horizon_;
  std::string name_;
};

/// Continuous-state stand-in environments.
class ContinuousEnv : public Environment {
 public:
  bool discrete_actions() const override { return false; }
  int n_actions() const override { return 0; }
};

/// One-dimensional point mass: s' = s + 0.1 * clip(a, -1, 1) + w with
/// w ~ N(0, noise_std^2), reward -(s - goal)^2, start s0 ~ U(-1, 1).
class PointMassEnv final : public ContinuousEnv {
 public:
  PointMassEnv(double noise_std, double goal, int horizon);

  double noise_std() const { return noise_std_; }
  double goal() const { return goal_; }

  std::string name() const override { return "pointmass"; }
  int action_dim() const override { return 1; }
  int state_dim() const override { return 1; }
  int horizon() const override { return horizon_; }
  double default_discount() const override { return 0.99; }

  Eigen::VectorXd start(Rng& rng) const override;
  StepResult step(const Eigen::VectorXd& state, const Action& action, Rng& rng) const override;
  Eigen::VectorXd encode(const Eigen::VectorXd& state) const override { return state; }
  /// 0.25-wide bins.
  int bin(const Eigen::VectorXd& state) const override;
  /// Clipped action rounded to 0.5-wide bins.
  int action_bin(const Action& action) const override;

 private:
  double noise_std_;
  double goal_;
  int horizon_;
};

PointMassEnv pointmass_env(double noise_std, double goal, int horizon);

}  // namespace aislab
