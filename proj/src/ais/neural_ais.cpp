#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "aislab/error.hpp"
#include "aislab/ipm.hpp"
#include "aislab/neural_ais.hpp"

namespace aislab {

using nn::Tape;
using nn::Var;

std::string to_string(AisLossKind kind) {
  switch (kind) {
    case AisLossKind::mmd:
      return "mmd";
    case AisLossKind::kl:
      return "kl";
    case AisLossKind::tv:
      return "tv";
  }
  return "?";
}

std::string to_string(MmdKernel kernel) {
  switch (kernel) {
    case MmdKernel::mean:
      return "mean";
    case MmdKernel::energy:
      return "energy";
    case MmdKernel::gaussian:
      return "gaussian";
    case MmdKernel::laplace:
      return "laplace";
  }
  return "?";
}

void AisConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("ais: lambda must lie in [0, 1]");
  if (feature_dim < 1) throw InputError("ais: feature_dim must be positive");
  if (kernel_samples < 1) throw InputError("ais: kernel_samples must be positive");
  if (!std::isfinite(transition_log_std)) throw InputError("ais: transition_log_std must be finite");
  for (int h : hidden)
    if (h < 1) throw InputError("ais: hidden sizes must be positive");
  if (kernel == MmdKernel::energy && !(kernel_param > 0.0 && kernel_param <= 2.0)) {
    throw InputError("ais: energy exponent must lie in (0, 2]");
  }
  if (kernel != MmdKernel::energy && !(kernel_param > 0.0)) throw InputError("ais: kernel_param must be positive");
}

namespace {

int action_width(const Environment& env) { return env.discrete_actions() ? env.n_actions() : env.action_dim(); }

}  // namespace

NeuralAisGenerator::NeuralAisGenerator(const Environment& env, AisConfig config, Rng& rng)
    : env_(&env), config_(std::move(config)) {
  config_.validate();
  if (config_.loss == AisLossKind::tv) throw InputError("ais: the tv variant is report-only and cannot be trained");
  softmax_ = env.n_states() > 0 && config_.loss == AisLossKind::kl;
  const int aw = action_width(env);
  gru_ = nn::Gru(env.state_dim() + aw, config_.feature_dim, rng, "ais.gru");
  std::vector<int> sizes{config_.feature_dim + aw};
  sizes.insert(sizes.end(), config_.hidden.begin(), config_.hidden.end());
  sizes.push_back(1);
  reward_ = nn::Mlp(sizes, rng, "ais.reward");
  if (softmax_) {
    softmax_head_ = nn::SoftmaxHead(config_.feature_dim, aw, env.n_states(), config_.hidden, rng, "ais.transition");
  } else {
    gaussian_head_ = nn::GaussianHead(config_.feature_dim, aw, env.state_dim(), config_.hidden, rng, "ais.transition",
                                      config_.transition_log_std);
  }
}

nn::ParamList NeuralAisGenerator::transition_params() {
  return softmax_ ? softmax_head_.params() : gaussian_head_.params();
}

nn::ParamList NeuralAisGenerator::params() {
  nn::ParamList out = gru_.params();
  for (auto* p : reward_.params()) out.push_back(p);
  for (auto* p : transition_params()) out.push_back(p);
  return out;
}

Eigen::VectorXd NeuralAisGenerator::encode_action(const Action& a) const {
  if (env_->discrete_actions()) {
    if (a.index < 0) return Eigen::VectorXd::Zero(env_->n_actions());
    if (a.index >= env_->n_actions()) throw InputError("ais: action index out of range");
    return nn::one_hot(a.index, env_->n_actions());
  }
  if (a.value.size() == 0) return Eigen::VectorXd::Zero(env_->action_dim());
  if (a.value.size() != env_->action_dim()) throw InputError("ais: action dimension mismatch");
  return a.value;
}

Eigen::VectorXd NeuralAisGenerator::input(const Eigen::VectorXd& s_next, const Action& a) const {
  const Eigen::VectorXd s = env_->encode(s_next);
  const Eigen::VectorXd act = encode_action(a);
  Eigen::VectorXd x(s.size() + act.size());
  x << s, act;
  return x;
}

Eigen::VectorXd NeuralAisGenerator::initial(const Eigen::VectorXd& s0) const {
  return step(Eigen::VectorXd::Zero(config_.feature_dim), s0, Action{});
}

Eigen::VectorXd NeuralAisGenerator::step(const Eigen::VectorXd& z, const Eigen::VectorXd& s_next,
                                         const Action& a) const {
  return nn::gru_step_value(gru_, z, input(s_next, a));
}

double NeuralAisGenerator::reward(const Eigen::VectorXd& z, const Action& a) const {
  Eigen::VectorXd x(z.size() + action_width(*env_));
  x << z, encode_action(a);
  return reward_.value(x)(0);
}

Eigen::VectorXd NeuralAisGenerator::sample_next(const Eigen::VectorXd& z, const Action& a, Rng& rng) const {
  const Eigen::VectorXd act = encode_action(a);
  Eigen::VectorXd x(z.size() + act.size());
  x << z, act;
  if (softmax_) {
    const Eigen::VectorXd logits = softmax_head_.net().value(x);
    Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
    p /= p.sum();
    return TabularEnv::state_of(sample_index(p.transpose(), rng));
  }
  const Eigen::VectorXd m = gaussian_head_.net().value(x);
  if (env_->n_states() > 0) {
    Eigen::VectorXd p = m.cwiseMax(0.0);
    if (p.sum() <= 0.0) p.setOnes();
    p /= p.sum();
    return TabularEnv::state_of(sample_index(p.transpose(), rng));
  }
  std::normal_distribution<double> normal(0.0, std::exp(gaussian_head_.log_std()));
  Eigen::VectorXd out = m;
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += normal(rng);
  return out;
}

Var NeuralAisGenerator::initial(Tape& tape, const Eigen::VectorXd& s0) {
  return step(tape, tape.constant(Eigen::VectorXd::Zero(config_.feature_dim)), s0, Action{});
}

Var NeuralAisGenerator::step(Tape& tape, Var z, const Eigen::VectorXd& s_next, const Action& a) {
  return nn::gru_step(tape, gru_, z, tape.constant(input(s_next, a)));
}

namespace {

Var transition_term(Tape& tape, NeuralAisGenerator& gen, Var z, Var act, const Eigen::VectorXd& s_next,
                    Rng& noise, int& clipped) {
  const AisConfig& cfg = gen.config();
  const Environment& env = gen.env();
  if (gen.softmax_transitions()) {
    const Var lp = pick(gen.softmax_head().log_probs(tape, z, act), TabularEnv::id(s_next));
    if (lp.item() < -30.0) ++clipped;
    return -nn::clamp(lp, -30.0, 0.0);
  }
  const Var m = gen.gaussian_head().mean(tape, z, act);
  const Eigen::VectorXd x = env.encode(s_next);
  const Var xv = tape.constant(x);
  const double sigma = std::exp(gen.gaussian_head().log_std());
  if (cfg.loss == AisLossKind::kl) {
    return scale(nn::square(nn::norm(xv - m)), 0.5 / (sigma * sigma));
  }
  if (cfg.kernel == MmdKernel::mean) return nn::dot(m - scale(xv, 2.0), m);
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<Var> terms;
  const double k = cfg.kernel_samples;
  for (int i = 0; i < cfg.kernel_samples; ++i) {
    Eigen::VectorXd xi(x.size());
    for (Eigen::Index j = 0; j < xi.size(); ++j) xi(j) = normal(noise);
    const Var gap = nn::norm(tape.constant(x - xi) - m);
    switch (cfg.kernel) {
      case MmdKernel::energy:
        terms.push_back(scale(nn::pow(gap, cfg.kernel_param), 1.0 / k));
        break;
      case MmdKernel::gaussian:
        terms.push_back(
            scale(nn::exp(scale(nn::square(gap), -1.0 / (2.0 * cfg.kernel_param * cfg.kernel_param))), -2.0 / k));
        break;
      case MmdKernel::laplace:
        terms.push_back(scale(nn::exp(scale(gap, -1.0 / cfg.kernel_param)), -2.0 / k));
        break;
      case MmdKernel::mean:
        break;
    }
  }
  Var total = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) total = total + terms[i];
  return total;
}

}  // namespace

AisLossParts ais_loss(Tape& tape, NeuralAisGenerator& gen, const std::vector<Episode>& batch, Rng& noise) {
  if (batch.empty()) throw InputError("ais_loss: empty batch");
  const double lambda = gen.config().lambda;
  AisLossParts out;
  std::vector<Var> rewards;
  std::vector<Var> transitions;
  for (const Episode& ep : batch) {
    const std::size_t t_len = ep.length();
    if (t_len == 0 || ep.states.size() != t_len + 1 || ep.rewards.size() != t_len) {
      throw InputError("ais_loss: episode needs T >= 1 actions, T rewards and T+1 states");
    }
    std::vector<Var> feats;
    Var z = gen.initial(tape, ep.states[0]);
    feats.push_back(z);
    std::vector<Var> rl;
    std::vector<Var> tl;
    for (std::size_t t = 0; t < t_len; ++t) {
      const Var act = tape.constant(gen.encode_action(ep.actions[t]));
      const Var r_hat = gen.reward_head()(tape, concat(z, act));
      rl.push_back(nn::square(nn::shift(r_hat, -ep.rewards[t])));
      if (lambda < 1.0) tl.push_back(transition_term(tape, gen, z, act, ep.states[t + 1], noise, out.clipped_logs));
      z = gen.step(tape, z, ep.states[t + 1], ep.actions[t]);
      feats.push_back(z);
    }
    const double inv_t = 1.0 / static_cast<double>(t_len);
    rewards.push_back(scale(nn::sum(concat(rl)), inv_t));
    transitions.push_back(tl.empty() ? tape.scalar(0.0) : scale(nn::sum(concat(tl)), inv_t));
    out.features.push_back(std::move(feats));
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  out.reward = scale(nn::sum(concat(rewards)), inv_b);
  out.transition = scale(nn::sum(concat(transitions)), inv_b);
  out.total = scale(out.reward, lambda) + scale(out.transition, 1.0 - lambda);
  return out;
}

double tabular_ais_loss(const TabularAisGenerator& gen, const std::vector<Episode>& batch, double lambda,
                        AisLossKind kind) {
  if (batch.empty()) throw InputError("tabular_ais_loss: empty batch");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("tabular_ais_loss: lambda must lie in [0, 1]");
  double total = 0.0;
  for (const Episode& ep : batch) {
    const std::size_t t_len = ep.length();
    if (t_len == 0 || ep.states.size() != t_len + 1 || ep.rewards.size() != t_len) {
      throw InputError("tabular_ais_loss: malformed episode");
    }
    int z = gen.init_feature(TabularEnv::id(ep.states[0]));
    double acc = 0.0;
    for (std::size_t t = 0; t < t_len; ++t) {
      const int a = ep.actions[t].index;
      const int s_next = TabularEnv::id(ep.states[t + 1]);
      const double err = gen.r_hat(z, a) - ep.rewards[t];
      const Eigen::RowVectorXd p = gen.p_hat(z, a);
      double trans = 0.0;
      switch (kind) {
        case AisLossKind::kl:
          trans = -std::max(std::log(p(s_next)), -30.0);
          break;
        case AisLossKind::mmd:
          trans = p.squaredNorm() - 2.0 * p(s_next);
          break;
        case AisLossKind::tv:
          trans = 1.0 - p(s_next);
          break;
      }
      acc += lambda * err * err + (1.0 - lambda) * trans;
      z = gen.update(z, s_next, a);
    }
    total += acc / static_cast<double>(t_len);
  }
  return total / static_cast<double>(batch.size());
}

int ais_step(const TabularAisGenerator& gen, int z, int s_next, int a) { return gen.update(z, s_next, a); }

Eigen::VectorXd ais_step(const NeuralAisGenerator& gen, const Eigen::VectorXd& z, const Eigen::VectorXd& s_next,
                         const Action& a) {
  return gen.step(z, s_next, a);
}

Eigen::VectorXd TabularAisModel::initial(const Eigen::VectorXd& s0) const {
  return Eigen::VectorXd::Constant(1, gen_->init_feature(TabularEnv::id(s0)));
}

Eigen::VectorXd TabularAisModel::step(const Eigen::VectorXd& z, const Eigen::VectorXd& s_next, const Action& a) const {
  return Eigen::VectorXd::Constant(1, gen_->update(static_cast<int>(z(0)), TabularEnv::id(s_next), a.index));
}

double TabularAisModel::reward(const Eigen::VectorXd& z, const Action& a) const {
  return gen_->r_hat(static_cast<int>(z(0)), a.index);
}

Eigen::VectorXd TabularAisModel::sample_next(const Eigen::VectorXd& z, const Action& a, Rng& rng) const {
  return TabularEnv::state_of(sample_index(gen_->p_hat(static_cast<int>(z(0)), a.index), rng));
}

Action random_action(const Environment& env, Rng& rng) {
  if (env.discrete_actions()) {
    std::uniform_int_distribution<int> pick(0, env.n_actions() - 1);
    return Action::discrete(pick(rng));
  }
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(env.action_dim());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u(rng);
  return Action::continuous(v);
}

namespace {

constexpr std::size_t kMaxBinObservations = 1024;

}  // namespace

EmpiricalEpsDelta empirical_eps_delta(const Environment& env, const AisModel& model,
                                      const std::vector<Episode>& episodes, Rng& rng) {
  EmpiricalEpsDelta out;
  struct Bin {
    std::vector<Eigen::VectorXd> observed;
    std::vector<Eigen::VectorXd> predicted;
  };
  std::map<std::pair<int, int>, Bin> bins;
  for (const Episode& ep : episodes) {
    if (ep.states.size() != ep.length() + 1) throw InputError("empirical_eps_delta: malformed episode");
    if (ep.length() == 0) continue;
    Eigen::VectorXd z = model.initial(ep.states[0]);
    for (std::size_t t = 0; t < ep.length(); ++t) {
      const Action& a = ep.actions[t];
      out.eps_hat = std::max(out.eps_hat, std::abs(model.reward(z, a) - ep.rewards[t]));
      ++out.n_samples;
      Bin& bin = bins[{env.bin(ep.states[t]), env.action_bin(a)}];
      if (bin.observed.size() < kMaxBinObservations) {
        bin.observed.push_back(env.encode(ep.states[t + 1]));
        bin.predicted.push_back(env.encode(model.sample_next(z, a, rng)));
      }
      z = model.step(z, ep.states[t + 1], a);
    }
  }
  const ipm::KernelSpec kernel = ipm::KernelSpec::energy(1.0);
  for (const auto& [key, bin] : bins) {
    if (bin.observed.size() < 2) {
      ++out.bins_excluded;
      continue;
    }
    ++out.bins_used;
    const auto n = static_cast<Eigen::Index>(bin.observed.size());
    const auto d = bin.observed.front().size();
    ipm::SampleSet xs(n, d);
    ipm::SampleSet ys(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      xs.row(i) = bin.observed[static_cast<std::size_t>(i)].transpose();
      ys.row(i) = bin.predicted[static_cast<std::size_t>(i)].transpose();
    }
    out.delta_hat = std::max(out.delta_hat, std::sqrt(std::max(0.0, ipm::mmd_u_statistic(xs, ys, kernel))));
  }
  return out;
}

EmpiricalEpsDelta measure_eps_delta_empirical(const Environment& env, const AisModel& model, int n_rollouts, Rng& rng) {
  if (n_rollouts < 1) throw InputError("measure_eps_delta_empirical: n_rollouts must be at least 1");
  std::vector<Episode> episodes;
  episodes.reserve(static_cast<std::size_t>(n_rollouts));
  for (int i = 0; i < n_rollouts; ++i) {
    Episode ep;
    ep.states.push_back(env.start(rng));
    for (int t = 0; t < env.horizon(); ++t) {
      const Action a = random_action(env, rng);
      StepResult r = env.step(ep.states.back(), a, rng);
      ep.actions.push_back(a);
      ep.rewards.push_back(r.reward);
      ep.states.push_back(std::move(r.state));
    }
    episodes.push_back(std::move(ep));
  }
  return empirical_eps_delta(env, model, episodes, rng);
}

}  // namespace aislab
