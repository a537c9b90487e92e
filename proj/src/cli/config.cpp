#include <cstdlib>
#include <set>
#include <thread>

#include "aislab/cli.hpp"
#include "aislab/error.hpp"

namespace aislab::cli {

int thread_budget() {
  if (const char* env = std::getenv("AISLAB_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) throw InputError("AISLAB_THREADS must be a positive integer");
    return static_cast<int>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

void only_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw InputError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const Json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

std::vector<BoundIpm> parse_ipms(const Json& j) {
  std::vector<BoundIpm> out;
  for (const auto& name : j.get<std::vector<std::string>>()) out.push_back(bound_ipm_from_string(name));
  if (out.empty()) throw InputError("bounds: ipms must not be empty");
  return out;
}

AisLossKind loss_from_string(const std::string& s) {
  if (s == "mmd") return AisLossKind::mmd;
  if (s == "kl") return AisLossKind::kl;
  if (s == "tv") return AisLossKind::tv;
  throw InputError("unknown ais loss '" + s + "' (expected mmd, kl or tv)");
}

MmdKernel kernel_from_string(const std::string& s) {
  if (s == "mean") return MmdKernel::mean;
  if (s == "energy") return MmdKernel::energy;
  if (s == "gaussian") return MmdKernel::gaussian;
  if (s == "laplace") return MmdKernel::laplace;
  throw InputError("unknown mmd kernel '" + s + "' (expected mean, energy, gaussian or laplace)");
}

void apply_ais_json(const Json& j, AisConfig& c) {
  only_keys(j, {"lambda", "loss", "kernel", "kernel_param", "kernel_samples", "transition_log_std", "feature_dim", "hidden"},
            "train.ais");
  read(j, "lambda", c.lambda);
  if (j.contains("loss")) c.loss = loss_from_string(j.at("loss").get<std::string>());
  if (j.contains("kernel")) c.kernel = kernel_from_string(j.at("kernel").get<std::string>());
  read(j, "kernel_param", c.kernel_param);
  read(j, "kernel_samples", c.kernel_samples);
  read(j, "transition_log_std", c.transition_log_std);
  read(j, "feature_dim", c.feature_dim);
  read(j, "hidden", c.hidden);
}

/// "kl", "mmd-energy", "energy", ... as a variant shorthand.
void apply_shorthand(const std::string& name, TrainConfig& c) {
  if (name == "kl") {
    c.ais.loss = AisLossKind::kl;
    return;
  }
  const std::string kernel = name.rfind("mmd-", 0) == 0 ? name.substr(4) : name;
  c.ais.loss = AisLossKind::mmd;
  c.ais.kernel = kernel_from_string(kernel);
}

}  // namespace

void apply_train_json(const Json& j, TrainConfig& c) {
  only_keys(j,
            {"agent", "ais_lr", "actor_lr", "critic_lr", "lr_scale", "gamma", "lambda", "iterations", "batch_size",
             "episode_len", "grad_steps", "minibatch", "ppo_epochs", "clip", "ppo_value_coef", "ppo_ais_weight",
             "ppo_shared_generator", "power_law", "a_exp", "b_exp", "c_exp", "ais", "actor_hidden", "critic_hidden",
             "critic_weight", "reward_to_go", "memoryless_partition", "actor_log_std", "eval_episodes", "greedy_eval",
             "record_wallclock"},
            "train");
  if (j.contains("agent")) c.agent = agent_kind_from_string(j.at("agent").get<std::string>());
  read(j, "ais_lr", c.ais_lr);
  read(j, "actor_lr", c.actor_lr);
  read(j, "critic_lr", c.critic_lr);
  if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
  read(j, "iterations", c.iterations);
  read(j, "batch_size", c.batch_size);
  read(j, "episode_len", c.episode_len);
  read(j, "grad_steps", c.grad_steps);
  read(j, "minibatch", c.minibatch);
  read(j, "ppo_epochs", c.ppo_epochs);
  read(j, "clip", c.clip);
  read(j, "ppo_value_coef", c.ppo_value_coef);
  read(j, "ppo_ais_weight", c.ppo_ais_weight);
  read(j, "ppo_shared_generator", c.ppo_shared_generator);
  read(j, "power_law", c.power_law);
  read(j, "a_exp", c.a_exp);
  read(j, "b_exp", c.b_exp);
  read(j, "c_exp", c.c_exp);
  if (j.contains("ais")) apply_ais_json(j.at("ais"), c.ais);
  read(j, "lambda", c.ais.lambda);
  read(j, "actor_hidden", c.actor_hidden);
  read(j, "critic_hidden", c.critic_hidden);
  if (j.contains("critic_weight")) {
    const auto w = j.at("critic_weight").get<std::string>();
    if (w == "td_error") {
      c.critic_weight = CriticWeight::td_error;
    } else if (w == "value") {
      c.critic_weight = CriticWeight::value;
    } else {
      throw InputError("train.critic_weight must be td_error or value");
    }
  }
  read(j, "reward_to_go", c.reward_to_go);
  read(j, "memoryless_partition", c.memoryless_partition);
  read(j, "actor_log_std", c.actor_log_std);
  read(j, "eval_episodes", c.eval_episodes);
  read(j, "greedy_eval", c.greedy_eval);
  read(j, "record_wallclock", c.record_wallclock);
  if (j.contains("lr_scale")) {
    const double s = j.at("lr_scale").get<double>();
    if (!(s >= 0.0)) throw InputError("train.lr_scale must be nonnegative");
    c.ais_lr *= s;
    c.actor_lr *= s;
    c.critic_lr *= s;
  }
}

EnvSpec parse_env(const Json& j) {
  EnvSpec e;
  if (j.is_string()) {
    e.name = j.get<std::string>();
  } else {
    only_keys(j, {"name", "horizon", "k", "gamma", "start_states", "noise_std", "goal"}, "env");
    read(j, "name", e.name);
    read(j, "horizon", e.horizon);
    read(j, "k", e.k);
    read(j, "gamma", e.gamma);
    read(j, "start_states", e.start_states);
    read(j, "noise_std", e.noise_std);
    read(j, "goal", e.goal);
  }
  if (e.name != "toy" && e.name != "pointmass" && e.name != "bandit") {
    throw InputError("unknown env '" + e.name + "' (expected toy, pointmass or bandit)");
  }
  return e;
}

std::unique_ptr<Environment> make_env(const EnvSpec& spec) {
  if (spec.name == "toy") {
    return std::make_unique<TabularEnv>(toy_mdp(spec.k, spec.gamma), spec.start_states,
                                        spec.horizon > 0 ? spec.horizon : 50, "toy");
  }
  if (spec.name == "pointmass") {
    return std::make_unique<PointMassEnv>(spec.noise_std, spec.goal, spec.horizon > 0 ? spec.horizon : 50);
  }
  std::vector<Eigen::MatrixXd> p(2, Eigen::MatrixXd::Ones(1, 1));
  Eigen::MatrixXd r(1, 2);
  r << 1.0, 0.0;
  return std::make_unique<TabularEnv>(TabularMdp(p, r, spec.gamma), std::vector<int>{0},
                                      spec.horizon > 0 ? spec.horizon : 1, "bandit");
}

BoundsConfig parse_bounds(const Json& j) {
  only_keys(j, {"command", "seed", "random", "preset", "partition", "ipms", "max_states", "max_actions", "slack",
                "start_states", "mdp", "generator", "out"},
            "bounds config");
  BoundsConfig c;
  read(j, "seed", c.seed);
  read(j, "random", c.random);
  read(j, "preset", c.preset);
  read(j, "partition", c.partition);
  if (j.contains("ipms")) c.ipms = parse_ipms(j.at("ipms"));
  read(j, "max_states", c.max_states);
  read(j, "max_actions", c.max_actions);
  read(j, "slack", c.slack);
  read(j, "start_states", c.start_states);
  if (j.contains("mdp")) c.mdp = j.at("mdp");
  if (j.contains("generator")) c.generator = j.at("generator");
  read(j, "out", c.out);
  if (c.random < 0) throw InputError("bounds: random must be nonnegative");
  if (!c.preset.empty() && c.preset != "toy" && c.preset != "identity") {
    throw InputError("bounds: unknown preset '" + c.preset + "' (expected toy or identity)");
  }
  if (c.mdp.is_null() != c.generator.is_null()) throw InputError("bounds: mdp and generator go together");
  if (c.max_states < 2 || c.max_actions < 1) throw InputError("bounds: need max_states >= 2 and max_actions >= 1");
  return c;
}

namespace {

void read_run_common(const Json& j, EnvSpec& env, TrainConfig& train, int& seeds, std::uint64_t& seed, std::string& out) {
  if (j.contains("env")) env = parse_env(j.at("env"));
  if (j.contains("train")) apply_train_json(j.at("train"), train);
  if (j.contains("agent")) train.agent = agent_kind_from_string(j.at("agent").get<std::string>());
  read(j, "seeds", seeds);
  read(j, "seed", seed);
  read(j, "out", out);
  if (seeds < 1) throw InputError("seeds must be positive");
}

}  // namespace

TrainRun parse_train(const Json& j) {
  only_keys(j, {"command", "env", "agent", "train", "seeds", "seed", "out"}, "train config");
  TrainRun r;
  read_run_common(j, r.env, r.train, r.seeds, r.seed, r.out);
  r.train.validate();
  return r;
}

CompareConfig parse_compare(const Json& j) {
  only_keys(j, {"command", "env", "agent", "train", "seeds", "seed", "out", "variants"}, "compare config");
  CompareConfig c;
  read_run_common(j, c.env, c.base, c.seeds, c.seed, c.out);
  if (!j.contains("variants") || !j.at("variants").is_array()) throw InputError("compare: variants must be a list");
  std::set<std::string> labels;
  for (const Json& v : j.at("variants")) {
    Variant var{"", c.base};
    if (v.is_string()) {
      var.label = v.get<std::string>();
      apply_shorthand(var.label, var.train);
    } else {
      only_keys(v, {"label", "ipm", "kernel", "train"}, "compare variant");
      read(v, "label", var.label);
      if (v.contains("ipm")) apply_shorthand(v.at("ipm").get<std::string>(), var.train);
      if (v.contains("kernel")) apply_shorthand(v.at("kernel").get<std::string>(), var.train);
      if (v.contains("train")) apply_train_json(v.at("train"), var.train);
    }
    if (var.label.empty()) throw InputError("compare: every variant needs a label");
    if (!labels.insert(var.label).second) throw InputError("compare: duplicate label '" + var.label + "'");
    var.train.validate();
    c.variants.push_back(std::move(var));
  }
  if (c.variants.size() < 2) throw InputError("compare: need at least two variants");
  return c;
}

}  // namespace aislab::cli
