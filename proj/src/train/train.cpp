#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "aislab/error.hpp"
#include "aislab/train.hpp"

namespace aislab {

using nn::Tape;
using nn::Var;

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::ais_ac:
      return "ais-ac";
    case AgentKind::ais_pg:
      return "ais-pg";
    case AgentKind::ais_ppo:
      return "ais-ppo";
    case AgentKind::memoryless:
      return "memoryless";
  }
  return "?";
}

AgentKind agent_kind_from_string(const std::string& name) {
  if (name == "ais-ac") return AgentKind::ais_ac;
  if (name == "ais-pg") return AgentKind::ais_pg;
  if (name == "ais-ppo") return AgentKind::ais_ppo;
  if (name == "memoryless") return AgentKind::memoryless;
  throw InputError("unknown agent '" + name + "' (expected ais-ac, ais-pg, ais-ppo or memoryless)");
}

void TrainConfig::validate() const {
  for (double lr : {ais_lr, actor_lr, critic_lr})
    if (!(lr >= 0.0 && std::isfinite(lr))) throw InputError("train: learning rates must be finite and nonnegative");
  if (gamma && !(*gamma > 0.0 && *gamma < 1.0)) throw InputError("train: gamma must lie in (0, 1)");
  if (iterations < 0) throw InputError("train: iterations must be nonnegative");
  if (batch_size < 1) throw InputError("train: batch_size must be positive");
  if (episode_len < 0) throw InputError("train: episode_len must be nonnegative");
  if (grad_steps < 1) throw InputError("train: grad_steps must be positive");
  if (minibatch < 0) throw InputError("train: minibatch must be nonnegative");
  if (ppo_epochs < 1) throw InputError("train: ppo_epochs must be positive");
  if (!(clip > 0.0 && clip < 1.0)) throw InputError("train: clip must lie in (0, 1)");
  if (eval_episodes < 0) throw InputError("train: eval_episodes must be nonnegative");
  for (int h : actor_hidden)
    if (h < 1) throw InputError("train: hidden sizes must be positive");
  for (int h : critic_hidden)
    if (h < 1) throw InputError("train: hidden sizes must be positive");
  for (int c : memoryless_partition)
    if (c < 0) throw InputError("train: memoryless partition ids must be nonnegative");
  if (power_law) {
    const ScheduleReport r = validate_schedule(*this);
    if (!r.ok) throw InputError("train: schedule rejected: " + r.failures.front());
  }
  ais.validate();
}

double schedule_rate(double scale, double exponent, int iteration) {
  if (iteration < 1) throw InputError("schedule_rate: iterations start at 1");
  return scale * std::pow(static_cast<double>(iteration), -exponent);
}

ScheduleReport validate_schedule(double a_exp, double b_exp, std::optional<double> c_exp) {
  ScheduleReport r;
  auto fail = [&](std::string why) {
    r.ok = false;
    r.failures.push_back(std::move(why));
  };
  auto check = [&](const char* name, double e) {
    if (!(e > 0.5)) fail(std::string(name) + ": exponent <= 0.5, squared steps are not summable");
    if (e > 1.0) fail(std::string(name) + ": exponent > 1, steps are summable");
  };
  check("ais", a_exp);
  check("actor", b_exp);
  if (c_exp) check("critic", *c_exp);
  if (!(b_exp > a_exp)) fail("actor/ais ratio does not vanish (need b_exp > a_exp)");
  if (c_exp) {
    if (!(*c_exp > a_exp)) fail("critic/ais ratio does not vanish (need c_exp > a_exp)");
    if (!(b_exp > *c_exp)) fail("actor/critic ratio does not vanish (need b_exp > c_exp)");
  }
  return r;
}

ScheduleReport validate_schedule(const TrainConfig& config) {
  const bool critic = config.agent != AgentKind::ais_pg;
  return validate_schedule(config.a_exp, config.b_exp, critic ? std::optional<double>(config.c_exp) : std::nullopt);
}

// ---------------------------------------------------------------- actor / critic

namespace {

constexpr double kLogFloor = -30.0;
const double kLog2Pi = std::log(2.0 * M_PI);

}  // namespace

Actor::Actor(const Environment& env, int feature_dim, const std::vector<int>& hidden, double log_std, Rng& rng)
    : discrete_(env.discrete_actions()) {
  std::vector<int> sizes{feature_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(discrete_ ? env.n_actions() : env.action_dim());
  net_ = nn::Mlp(sizes, rng, "actor");
  net_.zero_output();
  if (!discrete_) log_std_ = nn::Parameter("actor.log_std", nn::Matrix::Constant(env.action_dim(), 1, log_std));
}

nn::ParamList Actor::params() {
  nn::ParamList out = net_.params();
  if (!discrete_) out.push_back(&log_std_);
  return out;
}

Var Actor::log_prob(Tape& tape, Var features, const Action& a) {
  const Var out = net_(tape, features);
  if (discrete_) return nn::clamp(pick(nn::log_softmax(out), a.index), kLogFloor, 0.0);
  const Var ls = tape.param(log_std_);
  const Var zs = nn::mul(tape.constant(a.value) - out, nn::exp(-ls));
  const double d = static_cast<double>(a.value.size());
  return nn::shift(scale(nn::sum(nn::square(zs)), -0.5) - nn::sum(ls), -0.5 * d * kLog2Pi);
}

double Actor::log_prob(const Eigen::VectorXd& features, const Action& a) const {
  const Eigen::VectorXd out = net_.value(features);
  if (discrete_) {
    const double mx = out.maxCoeff();
    const double lse = mx + std::log((out.array() - mx).exp().sum());
    return std::max(out(a.index) - lse, kLogFloor);
  }
  const Eigen::VectorXd ls = log_std_.value.col(0);
  const Eigen::VectorXd zs = (a.value - out).array() * (-ls.array()).exp();
  return -0.5 * zs.squaredNorm() - ls.sum() - 0.5 * static_cast<double>(a.value.size()) * kLog2Pi;
}

Eigen::VectorXd Actor::probs(const Eigen::VectorXd& features) const {
  if (!discrete_) throw InputError("actor: probs() needs a finite action space");
  const Eigen::VectorXd out = net_.value(features);
  Eigen::VectorXd p = (out.array() - out.maxCoeff()).exp();
  return p / p.sum();
}

Action Actor::sample(const Eigen::VectorXd& features, Rng& rng) const {
  if (discrete_) return Action::discrete(sample_index(probs(features).transpose(), rng));
  Eigen::VectorXd a = net_.value(features);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) += std::exp(log_std_.value(i, 0)) * normal(rng);
  return Action::continuous(a);
}

Action Actor::greedy(const Eigen::VectorXd& features) const {
  const Eigen::VectorXd out = net_.value(features);
  if (!discrete_) return Action::continuous(out);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < out.size(); ++i)
    if (out(i) > out(best)) best = i;
  return Action::discrete(static_cast<int>(best));
}

Critic::Critic(int feature_dim, const std::vector<int>& hidden, Rng& rng) {
  std::vector<int> sizes{feature_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  net_ = nn::Mlp(sizes, rng, "critic");
}

// ---------------------------------------------------------------- buffer

void ReplayBuffer::add(const Rollout& rollout) {
  const Episode& ep = rollout.episode;
  if (rollout.features.size() != ep.length() + 1) throw InputError("replay buffer: features must have T+1 entries");
  starts_.push_back(transitions_.size());
  for (std::size_t t = 0; t < ep.length(); ++t) {
    transitions_.push_back(Transition{rollout.features[t], ep.actions[t], ep.states[t], ep.states[t + 1], ep.rewards[t]});
  }
  rollouts_.push_back(rollout);
}

void ReplayBuffer::clear() {
  transitions_.clear();
  starts_.clear();
  rollouts_.clear();
}

std::pair<std::size_t, std::size_t> ReplayBuffer::episode_range(std::size_t e) const {
  if (e >= starts_.size()) throw InputError("replay buffer: episode index out of range");
  const std::size_t end = e + 1 < starts_.size() ? starts_[e + 1] : transitions_.size();
  return {starts_[e], end};
}

std::vector<std::vector<std::size_t>> ReplayBuffer::episode_batches(std::size_t per_batch, Rng& rng) const {
  if (per_batch == 0) throw InputError("replay buffer: batch size must be positive");
  std::vector<std::size_t> order(starts_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < order.size(); i += per_batch) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + per_batch)));
  }
  return out;
}

// ---------------------------------------------------------------- estimators

namespace {

Var total(Tape& tape, const std::vector<Var>& terms) {
  if (terms.empty()) return tape.scalar(0.0);
  return nn::sum(concat(terms));
}

double discounted_return(const std::vector<double>& rewards, double gamma) {
  double g = 0.0;
  double w = 1.0;
  for (double r : rewards) {
    g += w * r;
    w *= gamma;
  }
  return g;
}

/// Discounted reward-to-go G_t = sum_{k>=t} gamma^(k-t) r_k.
std::vector<double> returns_to_go(const std::vector<double>& rewards, double gamma) {
  std::vector<double> g(rewards.size());
  double acc = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    acc = rewards[t] + gamma * acc;
    g[t] = acc;
  }
  return g;
}

}  // namespace

int reinforce_gradient(const Rollout& rollout, Actor& actor, double gamma, bool reward_to_go, double weight) {
  const Episode& ep = rollout.episode;
  const std::size_t t_len = ep.length();
  // Coefficient of grad log mu(a_tau | z_tau).
  std::vector<double> coef(t_len, 0.0);
  if (reward_to_go) {
    coef = returns_to_go(ep.rewards, gamma);
  } else {
    double acc = 0.0;
    double w = std::pow(gamma, static_cast<double>(t_len));
    for (std::size_t t = t_len; t-- > 0;) {
      w /= gamma;
      acc += w * ep.rewards[t];
      coef[t] = acc;
    }
  }
  Tape tape;
  std::vector<Var> terms;
  int clipped = 0;
  for (std::size_t t = 0; t < t_len; ++t) {
    if (coef[t] == 0.0) continue;
    const Var lp = actor.log_prob(tape, tape.constant(rollout.features[t]), ep.actions[t]);
    if (lp.item() <= kLogFloor) ++clipped;
    terms.push_back(scale(lp, weight * coef[t]));
  }
  if (!terms.empty()) tape.backward(total(tape, terms));
  return clipped;
}

Var td_loss(Tape& tape, Critic& critic, const std::vector<TdSample>& samples, double gamma, bool semi_gradient) {
  std::vector<Var> terms;
  for (const TdSample& s : samples) {
    const Var v = critic.value(tape, tape.constant(s.z));
    Var err = nn::shift(v, -s.reward);
    for (const auto& [p, z2] : s.next) {
      if (semi_gradient) {
        err = nn::shift(err, -gamma * p * critic.value(z2));
      } else {
        err = err - scale(critic.value(tape, tape.constant(z2)), gamma * p);
      }
    }
    terms.push_back(scale(nn::smooth_l1(err), s.weight));
  }
  return total(tape, terms);
}

Var ppo_clip_objective(Var new_log_prob, double old_log_prob, double advantage, double clip) {
  const Var ratio = nn::exp(nn::clamp(nn::shift(new_log_prob, -old_log_prob), -30.0, 30.0));
  const Var clipped = nn::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return nn::minimum(scale(ratio, advantage), scale(clipped, advantage));
}

namespace {

double rate(const TrainConfig& c, double scale, double exponent, int i) {
  return c.power_law ? schedule_rate(scale, exponent, i) : scale;
}

}  // namespace

void two_timescale_update(const nn::ParamList& ais, const nn::ParamList& actor, int iteration,
                          const TrainConfig& config, nn::Optimizer& ais_opt, nn::Optimizer& actor_opt) {
  nn::check_finite_grads(ais);
  nn::check_finite_grads(actor);
  if (!ais.empty()) ais_opt.step(ais, rate(config, config.ais_lr, config.a_exp, iteration));
  for (nn::Parameter* p : actor) p->grad = -p->grad;
  actor_opt.step(actor, rate(config, config.actor_lr, config.b_exp, iteration));
}

// ---------------------------------------------------------------- trainer

namespace {

std::vector<nn::Matrix> snapshot(const nn::ParamList& params) {
  std::vector<nn::Matrix> out;
  for (const nn::Parameter* p : params) out.push_back(p->value);
  return out;
}

double change_norm(const nn::ParamList& params, const std::vector<nn::Matrix>& before) {
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) sq += (params[i]->value - before[i]).squaredNorm();
  return std::sqrt(sq);
}

int partition_classes(const std::vector<int>& part) { return *std::max_element(part.begin(), part.end()) + 1; }

}  // namespace

Trainer::Trainer(const Environment& env, TrainConfig config)
    : env_(&env), config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  gamma_ = config_.discount(env);
  horizon_ = config_.horizon(env);
  if (config_.agent == AgentKind::memoryless) {
    if (!config_.memoryless_partition.empty()) {
      if (env.n_states() == 0) throw InputError("train: a memoryless partition needs a finite state space");
      if (static_cast<int>(config_.memoryless_partition.size()) != env.n_states()) {
        throw InputError("train: memoryless partition must list one class per state");
      }
      feature_dim_ = partition_classes(config_.memoryless_partition);
    } else {
      feature_dim_ = env.state_dim();
    }
  } else {
    AisConfig ais = config_.ais;
    ais.validate();
    gen_ = std::make_unique<NeuralAisGenerator>(env, ais, rng_);
    feature_dim_ = ais.feature_dim;
  }
  actor_ = Actor(env, feature_dim_, config_.actor_hidden, config_.actor_log_std, rng_);
  critic_ = Critic(feature_dim_, config_.critic_hidden, rng_);
}

Eigen::VectorXd Trainer::initial_features(const Eigen::VectorXd& s0) const {
  if (gen_) return gen_->initial(s0);
  return next_features(Eigen::VectorXd(), s0, Action{});
}

Eigen::VectorXd Trainer::next_features(const Eigen::VectorXd& z, const Eigen::VectorXd& s_next, const Action& a) const {
  if (gen_) return gen_->step(z, s_next, a);
  if (config_.memoryless_partition.empty()) return env_->encode(s_next);
  return nn::one_hot(config_.memoryless_partition[static_cast<std::size_t>(TabularEnv::id(s_next))], feature_dim_);
}

Rollout Trainer::rollout(Rng& rng, bool greedy) const {
  Rollout r;
  r.episode.states.push_back(env_->start(rng));
  r.features.push_back(initial_features(r.episode.states.back()));
  for (int t = 0; t < horizon_; ++t) {
    const Eigen::VectorXd& z = r.features.back();
    const Action a = greedy ? actor_.greedy(z) : actor_.sample(z, rng);
    r.log_probs.push_back(actor_.log_prob(z, a));
    StepResult step = env_->step(r.episode.states.back(), a, rng);
    r.episode.actions.push_back(a);
    r.episode.rewards.push_back(step.reward);
    r.episode.states.push_back(std::move(step.state));
    r.features.push_back(next_features(z, r.episode.states.back(), a));
  }
  return r;
}

double Trainer::evaluate(int episodes, std::uint64_t stream, bool greedy) const {
  if (episodes < 1) throw InputError("evaluate: need at least one episode");
  Rng rng(stream);
  double sum = 0.0;
  for (int e = 0; e < episodes; ++e) sum += discounted_return(rollout(rng, greedy).episode.rewards, gamma_);
  return sum / episodes;
}

std::vector<Episode> Trainer::episodes_of(const std::vector<Rollout>& batch) const {
  std::vector<Episode> out;
  out.reserve(batch.size());
  for (const Rollout& r : batch) out.push_back(r.episode);
  return out;
}

void Trainer::update_actor_critic(const std::vector<Rollout>& batch) {
  double n = 0.0;
  for (const Rollout& r : batch) n += static_cast<double>(r.episode.length());

  std::vector<TdSample> samples;
  std::vector<double> weights;
  for (const Rollout& r : batch) {
    for (std::size_t t = 0; t < r.episode.length(); ++t) {
      const double v = critic_.value(r.features[t]);
      const double v_next = critic_.value(r.features[t + 1]);
      const double td = r.episode.rewards[t] + gamma_ * v_next - v;
      weights.push_back(config_.critic_weight == CriticWeight::td_error ? td : v);
      samples.push_back(TdSample{r.features[t], r.episode.rewards[t], {{1.0, r.features[t + 1]}}, 1.0 / n});
    }
  }
  nn::zero_grads(critic_.params());
  Tape ct;
  ct.backward(td_loss(ct, critic_, samples, gamma_));

  nn::zero_grads(actor_.params());
  Tape at;
  std::vector<Var> terms;
  std::size_t k = 0;
  for (const Rollout& r : batch) {
    for (std::size_t t = 0; t < r.episode.length(); ++t, ++k) {
      const Var lp = actor_.log_prob(at, at.constant(r.features[t]), r.episode.actions[t]);
      if (lp.item() <= kLogFloor) ++clipped_logs_;
      terms.push_back(scale(lp, weights[k] / n));
    }
  }
  at.backward(total(at, terms));
}

void Trainer::update_pg(const std::vector<Rollout>& batch) {
  nn::zero_grads(actor_.params());
  for (const Rollout& r : batch) {
    clipped_logs_ += reinforce_gradient(r, actor_, gamma_, config_.reward_to_go, 1.0 / static_cast<double>(batch.size()));
  }
}

MetricsRow Trainer::iterate() {
  const auto t0 = std::chrono::steady_clock::now();
  ++iteration_;
  MetricsRow row;
  row.iteration = iteration_;

  ReplayBuffer buffer;
  for (int e = 0; e < config_.batch_size; ++e) buffer.add(rollout(rng_));
  double ret = 0.0;
  for (std::size_t e = 0; e < buffer.episodes(); ++e) ret += discounted_return(buffer.rollout(e).episode.rewards, gamma_);
  row.mean_return = ret / static_cast<double>(buffer.episodes());

  nn::ParamList gen_params = gen_ ? gen_->params() : nn::ParamList{};
  nn::ParamList actor_params = actor_.params();
  nn::ParamList critic_params = critic_.params();
  const auto before_gen = snapshot(gen_params);
  const auto before_actor = snapshot(actor_params);
  const auto before_critic = snapshot(critic_params);

  if (gen_) {
    std::vector<Rollout> all;
    for (std::size_t e = 0; e < buffer.episodes(); ++e) all.push_back(buffer.rollout(e));
    const std::vector<Episode> eps = episodes_of(all);
    Tape tape;
    const AisLossParts parts = ais_loss(tape, *gen_, eps, rng_);
    row.ais_loss = parts.total.item();
    row.reward_loss = parts.reward.item();
    row.transition_loss = parts.transition.item();
    Rng probe(config_.seed * 1000003ULL + static_cast<std::uint64_t>(iteration_));
    const EmpiricalEpsDelta ed = empirical_eps_delta(*env_, *gen_, eps, probe);
    row.eps_hat = ed.eps_hat;
    row.delta_hat = ed.delta_hat;
  }

  const std::size_t per = config_.minibatch > 0 ? static_cast<std::size_t>(config_.minibatch) : buffer.episodes();
  for (int g = 0; g < config_.grad_steps; ++g) {
    for (const auto& idx : buffer.episode_batches(per, rng_)) {
      std::vector<Rollout> batch;
      for (std::size_t e : idx) batch.push_back(buffer.rollout(e));
      ++updates_;
      if (config_.agent == AgentKind::ais_ppo) {
        update_ppo(batch);
        continue;
      }
      if (gen_) {
        nn::zero_grads(gen_params);
        Tape tape;
        tape.backward(ais_loss(tape, *gen_, episodes_of(batch), rng_).total);
      }
      if (config_.agent == AgentKind::ais_pg) {
        update_pg(batch);
      } else {
        update_actor_critic(batch);
        nn::check_finite_grads(critic_params);
      }
      two_timescale_update(gen_params, actor_params, updates_, config_, ais_opt_, actor_opt_);
      if (config_.agent != AgentKind::ais_pg) {
        critic_opt_.step(critic_params, rate(config_, config_.critic_lr, config_.c_exp, updates_));
      }
    }
  }
  last_change_ = {change_norm(gen_params, before_gen), change_norm(actor_params, before_actor),
                  change_norm(critic_params, before_critic)};
  if (config_.record_wallclock) {
    row.wallclock_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  return row;
}

void Trainer::update_ppo(const std::vector<Rollout>& batch) {
  double n = 0.0;
  for (const Rollout& r : batch) n += static_cast<double>(r.episode.length());
  std::vector<std::vector<double>> returns;
  std::vector<std::vector<double>> adv;
  for (const Rollout& r : batch) {
    returns.push_back(returns_to_go(r.episode.rewards, gamma_));
    std::vector<double> a(r.episode.length());
    for (std::size_t t = 0; t < a.size(); ++t) a[t] = returns.back()[t] - critic_.value(r.features[t]);
    adv.push_back(std::move(a));
  }
  const std::vector<Episode> eps = episodes_of(batch);
  nn::ParamList gen_params = gen_ ? gen_->params() : nn::ParamList{};
  nn::ParamList actor_params = actor_.params();
  nn::ParamList critic_params = critic_.params();
  const bool shared = gen_ && config_.ppo_shared_generator;

  if (gen_ && !shared) {
    nn::zero_grads(gen_params);
    Tape tape;
    tape.backward(ais_loss(tape, *gen_, eps, rng_).total);
    ais_opt_.step(gen_params, rate(config_, config_.ais_lr, config_.a_exp, updates_));
  }
  for (int epoch = 0; epoch < config_.ppo_epochs; ++epoch) {
    Tape tape;
    std::vector<std::vector<Var>> feats;
    Var ais_total = tape.scalar(0.0);
    if (shared) {
      AisLossParts parts = ais_loss(tape, *gen_, eps, rng_);
      ais_total = parts.total;
      feats = std::move(parts.features);
    } else {
      for (const Rollout& r : batch) {
        std::vector<Var> f;
        for (const auto& z : r.features) f.push_back(tape.constant(z));
        feats.push_back(std::move(f));
      }
    }
    std::vector<Var> surrogate;
    std::vector<Var> value_terms;
    for (std::size_t e = 0; e < batch.size(); ++e) {
      const Rollout& r = batch[e];
      for (std::size_t t = 0; t < r.episode.length(); ++t) {
        const Var lp = actor_.log_prob(tape, feats[e][t], r.episode.actions[t]);
        surrogate.push_back(ppo_clip_objective(lp, r.log_probs[t], adv[e][t], config_.clip));
        value_terms.push_back(nn::smooth_l1(nn::shift(critic_.value(tape, feats[e][t]), -returns[e][t])));
      }
    }
    Var loss = scale(total(tape, surrogate), -1.0 / n) + scale(total(tape, value_terms), config_.ppo_value_coef / n);
    if (shared) loss = loss + scale(ais_total, config_.ppo_ais_weight);
    nn::zero_grads(gen_params);
    nn::zero_grads(actor_params);
    nn::zero_grads(critic_params);
    tape.backward(loss);
    nn::check_finite_grads(gen_params);
    nn::check_finite_grads(actor_params);
    nn::check_finite_grads(critic_params);
    if (shared) ais_opt_.step(gen_params, rate(config_, config_.ais_lr, config_.a_exp, updates_));
    actor_opt_.step(actor_params, rate(config_, config_.actor_lr, config_.b_exp, updates_));
    critic_opt_.step(critic_params, rate(config_, config_.critic_lr, config_.c_exp, updates_));
  }
}

TrainResult train_loop(const Environment& env, const TrainConfig& config) {
  Trainer trainer(env, config);
  TrainResult out;
  for (int i = 0; i < config.iterations; ++i) out.rows.push_back(trainer.iterate());
  if (config.eval_episodes > 0) {
    out.final_return = trainer.evaluate(config.eval_episodes, config.seed + 0x5eed5eedULL, config.greedy_eval);
  }
  return out;
}

std::string metrics_csv_header() {
  return "iteration,mean_return,ais_loss,reward_loss,transition_loss,eps_hat,delta_hat,wallclock_ms";
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string opt_num(const std::optional<double>& x) { return x ? num(*x) : "NA"; }

}  // namespace

std::string metrics_csv_row(const MetricsRow& row) {
  std::ostringstream out;
  out << row.iteration << ',' << num(row.mean_return) << ',' << num(row.ais_loss) << ',' << num(row.reward_loss) << ','
      << num(row.transition_loss) << ',' << opt_num(row.eps_hat) << ',' << opt_num(row.delta_hat) << ','
      << num(row.wallclock_ms);
  return out.str();
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << metrics_csv_header() << '\n';
  for (const MetricsRow& r : rows) out << metrics_csv_row(r) << '\n';
}

}  // namespace aislab
