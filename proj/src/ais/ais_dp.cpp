#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <sstream>

#include <json.hpp>

#include "aislab/ais_dp.hpp"
#include "aislab/error.hpp"

namespace aislab {

using nlohmann::json;

FeatureClosure feature_closure(const TabularAisGenerator& gen, const TabularMdp& mdp,
                               const std::vector<int>& start_states, std::size_t max_features) {
  if (gen.n_states() != mdp.n_states() || gen.n_actions() != mdp.n_actions()) {
    throw InputError("feature_closure: generator and MDP disagree on state or action counts");
  }
  FeatureClosure out;
  out.position.assign(static_cast<std::size_t>(gen.n_features()), -1);
  std::deque<int> queue;
  std::size_t count = 0;
  auto visit = [&](int z) {
    if (z < 0 || z >= gen.n_features()) throw ClosureError("feature_closure: feature id out of range");
    if (out.position[static_cast<std::size_t>(z)] >= 0) return;
    if (++count > max_features) {
      throw SizeError("feature_closure: closure exceeds " + std::to_string(max_features) + " features");
    }
    out.position[static_cast<std::size_t>(z)] = 0;
    queue.push_back(z);
  };
  for (int s = 0; s < gen.n_states(); ++s) visit(gen.init_feature(s));
  while (!queue.empty()) {
    const int z = queue.front();
    queue.pop_front();
    out.features.push_back(z);
    for (int s = 0; s < gen.n_states(); ++s)
      for (int a = 0; a < gen.n_actions(); ++a) visit(gen.update(z, s, a));
  }
  std::sort(out.features.begin(), out.features.end());
  for (std::size_t i = 0; i < out.features.size(); ++i) out.position[static_cast<std::size_t>(out.features[i])] = static_cast<int>(i);
  out.chain = reachable_pairs(mdp, gen, start_states);
  return out;
}

AisDpSolution solve_ais_dp(const TabularAisGenerator& gen, const TabularMdp& mdp, double tol) {
  const FeatureClosure closure = feature_closure(gen, mdp);
  const int k = static_cast<int>(closure.features.size());
  const int m = gen.n_actions();
  std::vector<Eigen::MatrixXd> trans(static_cast<std::size_t>(m), Eigen::MatrixXd::Zero(k, k));
  Eigen::MatrixXd rewards(k, m);
  for (int i = 0; i < k; ++i) {
    const int z = closure.features[static_cast<std::size_t>(i)];
    for (int a = 0; a < m; ++a) {
      rewards(i, a) = gen.r_hat(z, a);
      const Eigen::RowVectorXd p = gen.p_hat(z, a);
      for (int s = 0; s < gen.n_states(); ++s) {
        trans[static_cast<std::size_t>(a)](i, closure.position[static_cast<std::size_t>(gen.update(z, s, a))]) += p(s);
      }
    }
  }
  const TabularMdp model(std::move(trans), std::move(rewards), mdp.discount());
  const ValueIterationResult vi = value_iteration(model, tol);

  Eigen::MatrixXd q_hat = Eigen::MatrixXd::Zero(gen.n_features(), m);
  Eigen::VectorXd v_hat = Eigen::VectorXd::Zero(gen.n_features());
  std::vector<int> actions(static_cast<std::size_t>(gen.n_features()), 0);
  for (int i = 0; i < k; ++i) {
    const int z = closure.features[static_cast<std::size_t>(i)];
    q_hat.row(z) = vi.q_star.row(i);
    v_hat(z) = vi.v_star(i);
    actions[static_cast<std::size_t>(z)] = vi.pi_star.greedy_action(i);
  }
  return AisDpSolution{closure.features, std::move(q_hat), std::move(v_hat),
                       StationaryPolicy::deterministic(actions, m), vi.residual, vi.sweeps};
}

double delta_gap(const TabularMdp& mdp, const TabularAisGenerator& gen, const AisDpSolution& solution,
                 const std::vector<int>& start_states) {
  const Eigen::VectorXd v_star = value_iteration(mdp, 1e-13).v_star;
  const ProductValue pv = product_chain_value(mdp, gen, solution.mu, start_states);
  double gap = 0.0;
  for (std::size_t i = 0; i < pv.chain.nodes.size(); ++i) {
    const int s = pv.chain.nodes[i].first;
    gap = std::max(gap, std::abs(v_star(s) - pv.node_values(static_cast<Eigen::Index>(i))));
  }
  return gap;
}

namespace {

Eigen::VectorXd lifted_value(const TabularAisGenerator& gen, const AisDpSolution& sol, int z, int a) {
  Eigen::VectorXd g(gen.n_states());
  for (int s = 0; s < gen.n_states(); ++s) g(s) = sol.v_hat(gen.update(z, s, a));
  return g;
}

double span(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.maxCoeff() - v.minCoeff(); }

}  // namespace

Kappa kappa(const TabularAisGenerator& gen, const AisDpSolution& solution, const IpmSetup& setup) {
  Kappa out;
  const int n = gen.n_states();
  const Eigen::MatrixXd dist = setup.state_distances(n);
  const Eigen::MatrixXd gram = setup.ipm == BoundIpm::mmd ? setup.state_gram(n) : Eigen::MatrixXd();
  for (int z : solution.features)
    for (int a = 0; a < gen.n_actions(); ++a) {
      const Eigen::VectorXd g = lifted_value(gen, solution, z, a);
      switch (setup.ipm) {
        case BoundIpm::tv:
          out.value = std::max(out.value, 0.5 * span(g));
          break;
        case BoundIpm::wasserstein: {
          const ipm::Lipschitz l = ipm::lipschitz_fn(g, dist);
          if (l.infinite) {
            out.infinite = true;
            out.value = INFINITY;
          } else {
            out.value = std::max(out.value, l.value);
          }
          break;
        }
        case BoundIpm::mmd: {
          const ipm::RkhsNorm r = ipm::rkhs_norm_modulo_constants(g, gram);
          out.value = std::max(out.value, r.norm);
          out.rkhs_residual = std::max(out.rkhs_residual, r.residual);
          out.representable = out.representable && r.representable;
          break;
        }
      }
    }
  return out;
}

LipschitzFixpoint lipschitz_value_fixpoint(double l_r, double l_p, double l_f, double gamma) {
  if (l_r < 0.0 || l_p < 0.0 || l_f < 0.0 || !(gamma >= 0.0 && gamma < 1.0)) {
    throw InputError("lipschitz_value_fixpoint: constants must be nonnegative and gamma in [0, 1)");
  }
  const double rate = gamma * l_p * l_f;
  if (!(rate < 1.0)) return LipschitzFixpoint{INFINITY, false};
  return LipschitzFixpoint{l_r / (1.0 - rate), true};
}

std::vector<double> lipschitz_value_iterates(double l_r, double l_p, double l_f, double gamma, int n) {
  std::vector<double> out;
  double l = l_r;
  for (int t = 0; t < n; ++t) {
    out.push_back(l);
    l = l_r + gamma * l_p * l_f * l;
  }
  return out;
}

namespace {

double closure_span(const AisDpSolution& sol, const Eigen::MatrixXd& table) {
  double lo = INFINITY;
  double hi = -INFINITY;
  for (int z : sol.features) {
    lo = std::min(lo, table.row(z).minCoeff());
    hi = std::max(hi, table.row(z).maxCoeff());
  }
  return hi - lo;
}

}  // namespace

SpanCheck span_bound_check(const AisDpSolution& solution, const TabularAisGenerator& gen, double gamma) {
  SpanCheck out;
  out.span_v = closure_span(solution, solution.v_hat);
  out.bound = closure_span(solution, gen.r_hat()) / (1.0 - gamma);
  if (out.span_v > out.bound + 1e-9) {
    json doc;
    doc["span_v"] = out.span_v;
    doc["bound"] = out.bound;
    doc["generator"] = json::parse(tabular_ais_to_json(gen));
    throw BoundViolation("span(V_hat) exceeds span(r_hat)/(1-gamma)", doc.dump(2));
  }
  return out;
}

namespace {

BoundConstants model_constants(const TabularAisGenerator& gen, const AisDpSolution& sol, const IpmSetup& setup,
                               double gamma) {
  BoundConstants c;
  const int n = gen.n_states();
  const Eigen::MatrixXd dist = setup.state_distances(n);
  c.span_r = closure_span(sol, gen.r_hat());
  c.span_v = closure_span(sol, sol.v_hat);
  c.update_ignores_feature = gen.update_ignores_feature();
  for (std::size_t i = 0; i < sol.features.size(); ++i)
    for (std::size_t j = i + 1; j < sol.features.size(); ++j) {
      const int z1 = sol.features[i];
      const int z2 = sol.features[j];
      for (int a = 0; a < gen.n_actions(); ++a) {
        c.lipschitz_r = std::max(c.lipschitz_r, std::abs(gen.r_hat(z1, a) - gen.r_hat(z2, a)));
        c.lipschitz_p = std::max(c.lipschitz_p, ipm::wasserstein_exact(ipm::DiscreteDist::on_ids(gen.p_hat(z1, a).transpose()),
                                                                      ipm::DiscreteDist::on_ids(gen.p_hat(z2, a).transpose()),
                                                                      setup.metric));
      }
    }
  for (int z : sol.features)
    for (int a = 0; a < gen.n_actions(); ++a)
      for (int s1 = 0; s1 < n; ++s1)
        for (int s2 = s1 + 1; s2 < n; ++s2) {
          if (gen.update(z, s1, a) == gen.update(z, s2, a)) continue;
          c.lipschitz_f = std::max(c.lipschitz_f, dist(s1, s2) > 0.0 ? 1.0 / dist(s1, s2) : INFINITY);
        }
  const LipschitzFixpoint fix = std::isfinite(c.lipschitz_f)
                                    ? lipschitz_value_fixpoint(c.lipschitz_r, c.lipschitz_p, c.lipschitz_f, gamma)
                                    : LipschitzFixpoint{INFINITY, false};
  c.lipschitz_v = fix.value;
  c.lipschitz_assumption = fix.assumption_ok;
  Eigen::VectorXd v(static_cast<Eigen::Index>(sol.features.size()));
  for (std::size_t i = 0; i < sol.features.size(); ++i) v(static_cast<Eigen::Index>(i)) = sol.v_hat(sol.features[i]);
  const Eigen::MatrixXd feature_metric =
      Eigen::MatrixXd::Ones(v.size(), v.size()) - Eigen::MatrixXd::Identity(v.size(), v.size());
  if (v.size() >= 2) c.lipschitz_v_measured = ipm::lipschitz_fn(v, feature_metric).value;
  return c;
}

json report_json(const BoundReport& r) {
  json j;
  j["seed"] = r.seed;
  j["ipm"] = to_string(r.ipm);
  j["gamma"] = r.gamma;
  j["eps"] = r.eps;
  j["delta"] = r.delta;
  j["kappa"] = r.kappa;
  j["delta_gap"] = r.delta_gap;
  j["thm1_rhs"] = r.thm1_rhs;
  j["cor_rhs"] = r.cor_rhs ? json(*r.cor_rhs) : json(nullptr);
  j["cor_note"] = r.cor_note;
  j["violation"] = r.violation;
  const BoundConstants& c = r.constants;
  j["constants"] = {{"span_r", c.span_r},
                    {"span_v", c.span_v},
                    {"lipschitz_r", c.lipschitz_r},
                    {"lipschitz_p", c.lipschitz_p},
                    {"lipschitz_f", std::isfinite(c.lipschitz_f) ? json(c.lipschitz_f) : json("inf")},
                    {"lipschitz_v", std::isfinite(c.lipschitz_v) ? json(c.lipschitz_v) : json("inf")},
                    {"lipschitz_v_measured", c.lipschitz_v_measured},
                    {"rkhs_norm", c.rkhs_norm}};
  return j;
}

}  // namespace

std::string bound_counterexample_json(const TabularMdp& mdp, const TabularAisGenerator& gen,
                                      const BoundReport& report) {
  json doc;
  doc["mdp"] = json::parse(mdp_to_json(mdp));
  doc["generator"] = json::parse(tabular_ais_to_json(gen));
  doc["report"] = report_json(report);
  return doc.dump(2);
}

BoundReport bound_report(const TabularMdp& mdp, const TabularAisGenerator& gen, const BoundConfig& config) {
  const double gamma = mdp.discount();
  const AisDpSolution sol = solve_ais_dp(gen, mdp, config.tol);
  const EpsDelta ed = measure_eps_delta(mdp, gen, config.setup, config.start_states);
  const Kappa k = kappa(gen, sol, config.setup);

  BoundReport r;
  r.seed = config.seed;
  r.n_states = mdp.n_states();
  r.n_actions = mdp.n_actions();
  r.n_features = static_cast<int>(sol.features.size());
  r.ipm = config.setup.ipm;
  r.gamma = gamma;
  r.eps = ed.eps;
  r.delta = ed.delta;
  r.kappa = k.value;
  r.delta_gap = delta_gap(mdp, gen, sol, config.start_states);
  r.thm1_rhs = 2.0 * (ed.eps + gamma * ed.delta * k.value) / (1.0 - gamma);
  r.constants = model_constants(gen, sol, config.setup, gamma);
  if (config.setup.ipm == BoundIpm::mmd) r.constants.rkhs_norm = k.value;

  switch (config.setup.ipm) {
    case BoundIpm::tv:
      r.cor_rhs = 2.0 * ed.eps / (1.0 - gamma) + gamma * ed.delta * r.constants.span_r / ((1.0 - gamma) * (1.0 - gamma));
      break;
    case BoundIpm::wasserstein: {
      const BoundConstants& c = r.constants;
      if (!c.update_ignores_feature) {
        r.cor_note = "update depends on the feature";
      } else if (!c.lipschitz_assumption) {
        r.cor_note = "gamma L_f L_P >= 1";
      } else {
        // Lipschitz V_hat composed with f picks up L_f; the factor is 1 under discrete metrics.
        const double lf = std::max(1.0, c.lipschitz_f);
        r.cor_rhs = 2.0 * ed.eps / (1.0 - gamma) +
                    2.0 * gamma * ed.delta * lf * c.lipschitz_r / ((1.0 - gamma) * (1.0 - gamma * c.lipschitz_f * c.lipschitz_p));
      }
      break;
    }
    case BoundIpm::mmd:
      if (k.representable) {
        r.cor_rhs = r.thm1_rhs;
      } else {
        r.cor_note = "value not representable in the kernel span";
      }
      break;
  }

  std::ostringstream why;
  if (!std::isfinite(r.thm1_rhs) && !k.infinite) why << "non-finite main bound; ";
  if (r.delta_gap > r.thm1_rhs + config.slack) why << "gap " << r.delta_gap << " exceeds main bound " << r.thm1_rhs << "; ";
  if (r.cor_rhs && r.thm1_rhs > *r.cor_rhs + config.slack) {
    why << "main bound " << r.thm1_rhs << " exceeds specialized bound " << *r.cor_rhs << "; ";
  }
  r.violation = why.str();
  r.violated = !r.violation.empty();
  if (r.violated && config.throw_on_violation) {
    throw BoundViolation("bound violated (" + to_string(r.ipm) + "): " + r.violation,
                         bound_counterexample_json(mdp, gen, r));
  }
  return r;
}

BoundInstance random_bound_instance(std::uint64_t seed, int max_states, int max_actions) {
  if (max_states < 2 || max_actions < 1) throw InputError("random_bound_instance: need >= 2 states and >= 1 action");
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const int n = std::uniform_int_distribution<int>(2, max_states)(rng);
  const int m = std::uniform_int_distribution<int>(1, max_actions)(rng);
  const double gamma = std::uniform_real_distribution<double>(0.5, 0.95)(rng);
  TabularMdp mdp = random_mdp(n, m, seed, -1.0, 1.0, gamma);
  const int k = std::uniform_int_distribution<int>(1, n)(rng);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) labels[static_cast<std::size_t>(s)] = s < k ? s : std::uniform_int_distribution<int>(0, k - 1)(rng);
  std::shuffle(labels.begin(), labels.end(), rng);
  TabularAisGenerator gen = quantizer_ais(mdp, labels);
  return BoundInstance{std::move(mdp), std::move(labels), std::move(gen)};
}

std::string bound_csv_header() {
  return "seed,n_states,n_actions,n_features,ipm,eps,delta,kappa,delta_gap,thm1_rhs,cor_rhs,violated";
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string bound_csv_row(const BoundReport& r) {
  std::ostringstream out;
  out << r.seed << ',' << r.n_states << ',' << r.n_actions << ',' << r.n_features << ',' << to_string(r.ipm) << ','
      << num(r.eps) << ',' << num(r.delta) << ',' << num(r.kappa) << ',' << num(r.delta_gap) << ','
      << num(r.thm1_rhs) << ',' << (r.cor_rhs ? num(*r.cor_rhs) : "NA") << ',' << (r.violated ? 1 : 0);
  return out.str();
}

}  // namespace aislab
