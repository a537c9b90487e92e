#include "aislab/mdp.hpp"

#include <cmath>
#include <ostream>

#include "aislab/error.hpp"

namespace aislab {

namespace {

constexpr double kRowTol = 1e-12;

void check_distribution_row(const Eigen::Ref<const Eigen::RowVectorXd>& row, const std::string& where) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    if (!std::isfinite(row(i)) || row(i) < 0.0) {
      throw InputError(where + ": entries must be finite and nonnegative");
    }
    sum += row(i);
  }
  if (std::abs(sum - 1.0) > kRowTol) {
    throw InputError(where + ": row sums to " + std::to_string(sum) + ", expected 1");
  }
}

}  // namespace

TabularMdp::TabularMdp(std::vector<Eigen::MatrixXd> transitions, Eigen::MatrixXd rewards, double discount)
    : transitions_(std::move(transitions)), rewards_(std::move(rewards)), discount_(discount) {
  if (rewards_.rows() < 1 || rewards_.cols() < 1) throw InputError("mdp: need at least one state and action");
  if (static_cast<Eigen::Index>(transitions_.size()) != rewards_.cols()) {
    throw InputError("mdp: transitions must have one matrix per action");
  }
  if (!(discount_ > 0.0 && discount_ < 1.0)) throw InputError("mdp: discount must lie in (0, 1)");
  if (!rewards_.allFinite()) throw InputError("mdp: non-finite reward entry");
  const auto n = rewards_.rows();
  for (std::size_t a = 0; a < transitions_.size(); ++a) {
    const auto& p = transitions_[a];
    if (p.rows() != n || p.cols() != n) throw InputError("mdp: transition matrix has wrong shape");
    for (Eigen::Index s = 0; s < n; ++s) {
      check_distribution_row(p.row(s), "mdp transition (a=" + std::to_string(a) + ", s=" + std::to_string(s) + ")");
    }
  }
}

TabularMdp TabularMdp::scaled_rewards(double factor) const {
  return TabularMdp(transitions_, rewards_ * factor, discount_);
}

StationaryPolicy::StationaryPolicy(Eigen::MatrixXd action_probs) : probs_(std::move(action_probs)) {
  if (probs_.rows() < 1 || probs_.cols() < 1) throw InputError("policy: empty table");
  for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
    check_distribution_row(probs_.row(s), "policy row " + std::to_string(s));
  }
}

StationaryPolicy StationaryPolicy::deterministic(const std::vector<int>& actions, int n_actions) {
  Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(actions.size()), n_actions);
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s] < 0 || actions[s] >= n_actions) throw InputError("policy: action id out of range");
    probs(static_cast<Eigen::Index>(s), actions[s]) = 1.0;
  }
  return StationaryPolicy(std::move(probs));
}

StationaryPolicy StationaryPolicy::uniform(int n_states, int n_actions) {
  return StationaryPolicy(Eigen::MatrixXd::Constant(n_states, n_actions, 1.0 / n_actions));
}

int StationaryPolicy::greedy_action(int state) const {
  int best = 0;
  for (int a = 1; a < n_actions(); ++a) {
    if (probs_(state, a) > probs_(state, best)) best = a;
  }
  return best;
}

Eigen::MatrixXd q_from_v(const TabularMdp& mdp, const Eigen::VectorXd& v) {
  Eigen::MatrixXd q(mdp.n_states(), mdp.n_actions());
  for (int a = 0; a < mdp.n_actions(); ++a) {
    q.col(a) = mdp.rewards().col(a) + mdp.discount() * (mdp.transitions(a) * v);
  }
  return q;
}

double bellman_residual(const TabularMdp& mdp, const Eigen::VectorXd& v) {
  const Eigen::VectorXd tv = q_from_v(mdp, v).rowwise().maxCoeff();
  return (tv - v).cwiseAbs().maxCoeff();
}

StationaryPolicy greedy_policy(const Eigen::MatrixXd& q, double tie_tol) {
  std::vector<int> actions(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    const double best = q.row(s).maxCoeff();
    for (Eigen::Index a = 0; a < q.cols(); ++a) {
      if (q(s, a) >= best - tie_tol) {
        actions[static_cast<std::size_t>(s)] = static_cast<int>(a);
        break;
      }
    }
  }
  return StationaryPolicy::deterministic(actions, static_cast<int>(q.cols()));
}

ValueIterationResult value_iteration(const TabularMdp& mdp, double tol) {
  if (!(tol > 0.0)) throw InputError("value_iteration: tol must be positive");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(mdp.n_states());
  int sweeps = 0;
  double residual = 0.0;
  for (;;) {
    const Eigen::VectorXd next = q_from_v(mdp, v).rowwise().maxCoeff();
    residual = (next - v).cwiseAbs().maxCoeff();
    v = next;
    ++sweeps;
    if (residual <= tol) break;
  }
  // Polish with one exact evaluation of the greedy policy; keep it only when
  // it is at least as accurate as the iterate.
  residual = bellman_residual(mdp, v);
  StationaryPolicy pi = greedy_policy(q_from_v(mdp, v));
  const Eigen::VectorXd polished = policy_value(mdp, pi);
  const double polished_residual = bellman_residual(mdp, polished);
  if (polished_residual <= residual) {
    v = polished;
    residual = polished_residual;
  }
  Eigen::MatrixXd q = q_from_v(mdp, v);
  StationaryPolicy pi_star = greedy_policy(q);
  return ValueIterationResult{std::move(v), std::move(q), std::move(pi_star), residual, sweeps};
}

Eigen::VectorXd policy_value(const TabularMdp& mdp, const StationaryPolicy& policy) {
  const int n = mdp.n_states();
  if (policy.n_states() != n || policy.n_actions() != mdp.n_actions()) {
    throw InputError("policy_value: policy shape does not match the MDP");
  }
  Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd r_pi = Eigen::VectorXd::Zero(n);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < mdp.n_actions(); ++a) {
      const double w = policy.prob(s, a);
      if (w == 0.0) continue;
      p_pi.row(s) += w * mdp.transitions(a).row(s);
      r_pi(s) += w * mdp.reward(s, a);
    }
  }
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - mdp.discount() * p_pi;
  return system.partialPivLu().solve(r_pi);
}

int sample_index(const Eigen::Ref<const Eigen::RowVectorXd>& probs, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs(i) <= 0.0) continue;
    acc += probs(i);
    last_positive = static_cast<int>(i);
    if (u < acc) return static_cast<int>(i);
  }
  return last_positive;
}

Trajectory sample_trajectory(const TabularMdp& mdp, AnyPolicy policy, int start_state, int horizon, Rng& rng) {
  if (horizon < 1) throw InputError("sample_trajectory: horizon must be >= 1");
  if (start_state < 0 || start_state >= mdp.n_states()) throw InputError("sample_trajectory: bad start state");
  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(horizon) + 1);
  traj.states.push_back(start_state);

  HistoryPolicy::Memory memory;
  const HistoryPolicy* history = nullptr;
  const StationaryPolicy* stationary = nullptr;
  if (std::holds_alternative<const HistoryPolicy*>(policy)) {
    history = std::get<const HistoryPolicy*>(policy);
    memory = history->init(start_state);
  } else {
    stationary = std::get<const StationaryPolicy*>(policy);
  }

  int s = start_state;
  for (int t = 0; t < horizon; ++t) {
    const int a = history ? sample_index(history->act(memory), rng) : sample_index(stationary->probs().row(s), rng);
    const int next = sample_index(mdp.transitions(a).row(s), rng);
    traj.actions.push_back(a);
    traj.rewards.push_back(mdp.reward(s, a));
    traj.states.push_back(next);
    if (history) memory = history->step(memory, a, next);
    s = next;
  }
  return traj;
}

TabularMdp toy_mdp(double k, double gamma) {
  if (!(k > 0.0)) throw InputError("toy_mdp: K must be positive");
  constexpr int n = 4;
  std::vector<Eigen::MatrixXd> p(3, Eigen::MatrixXd::Zero(n, n));
  for (int s = 0; s < n; ++s) {
    const int fwd = (s + 1) % n;
    const int bwd = (s + n - 1) % n;
    p[0](s, s) += 0.5;
    p[0](s, fwd) += 0.5;
    p[1](s, s) += 0.5;
    p[1](s, bwd) += 0.5;
    p[2](s, fwd) += 0.5;
    p[2](s, bwd) += 0.5;
  }
  Eigen::MatrixXd r(n, 3);
  const double per_state[n] = {-1.0, -1.0, 1.0, -k};
  for (int s = 0; s < n; ++s) r.row(s).setConstant(per_state[s]);
  return TabularMdp(std::move(p), std::move(r), gamma);
}

TabularMdp random_mdp(int n_states, int n_actions, std::uint64_t seed, double reward_lo, double reward_hi,
                      double gamma) {
  if (n_states < 1 || n_actions < 1) throw InputError("random_mdp: counts must be >= 1");
  if (!(reward_hi >= reward_lo)) throw InputError("random_mdp: empty reward range");
  Rng rng(seed);
  std::exponential_distribution<double> gamma1(1.0);
  std::uniform_real_distribution<double> reward(reward_lo, reward_hi);
  std::vector<Eigen::MatrixXd> p(static_cast<std::size_t>(n_actions), Eigen::MatrixXd(n_states, n_states));
  for (int a = 0; a < n_actions; ++a) {
    for (int s = 0; s < n_states; ++s) {
      double sum = 0.0;
      for (int t = 0; t < n_states; ++t) {
        p[a](s, t) = gamma1(rng);
        sum += p[a](s, t);
      }
      p[a].row(s) /= sum;
      // Push the rounding residue into the largest entry so rows sum to 1.
      Eigen::Index arg = 0;
      p[a].row(s).maxCoeff(&arg);
      p[a](s, arg) += 1.0 - p[a].row(s).sum();
    }
  }
  Eigen::MatrixXd r(n_states, n_actions);
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) r(s, a) = reward(rng);
  return TabularMdp(std::move(p), std::move(r), gamma);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "t,state,action,reward\n";
  for (std::size_t t = 0; t < trajectory.length(); ++t) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", trajectory.rewards[t]);
    out << t << ',' << trajectory.states[t] << ',' << trajectory.actions[t] << ',' << buf << '\n';
  }
}

}  // namespace aislab
