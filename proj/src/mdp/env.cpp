#include "aislab/env.hpp"

#include <algorithm>
#include <cmath>

#include "aislab/error.hpp"

namespace aislab {

TabularEnv::TabularEnv(TabularMdp mdp, std::vector<int> start_states, int horizon, std::string name)
    : mdp_(std::move(mdp)), start_states_(std::move(start_states)), horizon_(horizon), name_(std::move(name)) {
  if (start_states_.empty()) throw InputError("tabular env: need at least one start state");
  for (int s : start_states_) {
    if (s < 0 || s >= mdp_.n_states()) throw InputError("tabular env: start state out of range");
  }
  if (horizon_ < 1) throw InputError("tabular env: horizon must be >= 1");
}

Eigen::VectorXd TabularEnv::start(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, start_states_.size() - 1);
  return state_of(start_states_[pick(rng)]);
}

StepResult TabularEnv::step(const Eigen::VectorXd& state, const Action& action, Rng& rng) const {
  const int s = id(state);
  const int a = action.index;
  if (a < 0 || a >= mdp_.n_actions()) throw InputError("tabular env: action out of range");
  const int next = sample_index(mdp_.transitions(a).row(s), rng);
  return StepResult{state_of(next), mdp_.reward(s, a)};
}

Eigen::VectorXd TabularEnv::encode(const Eigen::VectorXd& state) const {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(mdp_.n_states());
  e(id(state)) = 1.0;
  return e;
}

int TabularEnv::bin(const Eigen::VectorXd& state) const { return id(state); }

PointMassEnv::PointMassEnv(double noise_std, double goal, int horizon)
    : noise_std_(noise_std), goal_(goal), horizon_(horizon) {
  if (!(noise_std_ >= 0.0)) throw InputError("pointmass: noise_std must be >= 0");
  if (horizon_ < 1) throw InputError("pointmass: horizon must be >= 1");
}

Eigen::VectorXd PointMassEnv::start(Rng& rng) const {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  return Eigen::VectorXd::Constant(1, unif(rng));
}

StepResult PointMassEnv::step(const Eigen::VectorXd& state, const Action& action, Rng& rng) const {
  if (action.value.size() != 1) throw InputError("pointmass: expected a 1-d action");
  const double s = state(0);
  const double a = std::clamp(action.value(0), -1.0, 1.0);
  double noise = 0.0;
  if (noise_std_ > 0.0) {
    std::normal_distribution<double> normal(0.0, noise_std_);
    noise = normal(rng);
  }
  const double reward = -(s - goal_) * (s - goal_);
  return StepResult{Eigen::VectorXd::Constant(1, s + 0.1 * a + noise), reward};
}

int PointMassEnv::bin(const Eigen::VectorXd& state) const {
  return static_cast<int>(std::floor(state(0) / 0.25));
}

int PointMassEnv::action_bin(const Action& action) const {
  return static_cast<int>(std::lround(std::clamp(action.value(0), -1.0, 1.0) * 2.0));
}

PointMassEnv pointmass_env(double noise_std, double goal, int horizon) {
  return PointMassEnv(noise_std, goal, horizon);
}

}  // namespace aislab
