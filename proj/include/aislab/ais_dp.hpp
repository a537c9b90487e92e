#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aislab/ais.hpp"

namespace aislab {

inline constexpr std::size_t kMaxClosureFeatures = 1'000'000;

/// Features the AIS dynamic program has to evaluate: every init feature and
/// everything f reaches from them over all (s', a). `chain` holds the
/// (state, feature) pairs reachable from the start states.
struct FeatureClosure {
  std::vector<int> features;  // sorted
  std::vector<int> position;  // feature id -> index in `features`, or -1
  ProductChain chain;

  bool contains(int z) const { return position[static_cast<std::size_t>(z)] >= 0; }
};

FeatureClosure feature_closure(const TabularAisGenerator& gen, const TabularMdp& mdp,
                               const std::vector<int>& start_states = {},
                               std::size_t max_features = kMaxClosureFeatures);

struct AisDpSolution {
  std::vector<int> features;  // the closure
  /// Indexed by feature id; rows of features outside the closure are zero.
  Eigen::MatrixXd q_hat;
  Eigen::VectorXd v_hat;
  /// Greedy feature policy, lowest action id among ties.
  StationaryPolicy mu;
  double residual = 0.0;
  int sweeps = 0;
};

/// Q(z,a) = r_hat(z,a) + gamma sum_s' P_hat(s'|z,a) V(f(z,s',a)) by value
/// iteration on the closure.
AisDpSolution solve_ais_dp(const TabularAisGenerator& gen, const TabularMdp& mdp, double tol = 1e-12);

/// max over reachable (s, z) of |v*(s) - v(s, z)| where v is the value of
/// the flattened policy mu(Z_t).
double delta_gap(const TabularMdp& mdp, const TabularAisGenerator& gen, const AisDpSolution& solution,
                 const std::vector<int>& start_states = {});

struct Kappa {
  double value = 0.0;
  bool infinite = false;        // Wasserstein with a zero-distance pair of distinct values
  bool representable = true;    // MMD: some g fell outside the kernel's span
  double rkhs_residual = 0.0;
};

/// sup over (z, a) of rho_F(g) with g(s') = V_hat(f(z, s', a)).
Kappa kappa(const TabularAisGenerator& gen, const AisDpSolution& solution, const IpmSetup& setup);

struct LipschitzFixpoint {
  double value = 0.0;
  bool assumption_ok = true;  // gamma L_P L_f < 1
};

/// L_V = L_r / (1 - gamma L_P L_f).
LipschitzFixpoint lipschitz_value_fixpoint(double l_r, double l_p, double l_f, double gamma);
/// L_0 = L_r, L_{t+1} = L_r + gamma L_P L_f L_t; returns L_0..L_{n-1}.
std::vector<double> lipschitz_value_iterates(double l_r, double l_p, double l_f, double gamma, int n);

struct SpanCheck {
  double span_v = 0.0;
  double bound = 0.0;
};

/// span(V_hat) against span(r_hat) / (1 - gamma), both over the closure.
/// Throws BoundViolation when span_v exceeds bound + 1e-9.
SpanCheck span_bound_check(const AisDpSolution& solution, const TabularAisGenerator& gen, double gamma);

/// Constants of the model MDP on the closure. Lipschitz constants use the
/// discrete metric on features and the setup's metric on states.
struct BoundConstants {
  double span_r = 0.0;
  double lipschitz_r = 0.0;
  double lipschitz_p = 0.0;
  double lipschitz_f = 0.0;
  double lipschitz_v = 0.0;          // fixpoint
  double lipschitz_v_measured = 0.0;  // lipschitz_fn(V_hat)
  double span_v = 0.0;
  double rkhs_norm = 0.0;            // kappa for MMD
  bool lipschitz_assumption = true;
  bool update_ignores_feature = true;
};

struct BoundConfig {
  IpmSetup setup;
  std::vector<int> start_states;  // empty: every state
  double tol = 1e-12;
  double slack = 1e-9;
  bool throw_on_violation = true;
  std::uint64_t seed = 0;
};

struct BoundReport {
  std::uint64_t seed = 0;
  int n_states = 0;
  int n_actions = 0;
  int n_features = 0;  // closure size
  BoundIpm ipm = BoundIpm::tv;
  double gamma = 0.0;
  double eps = 0.0;
  double delta = 0.0;
  double kappa = 0.0;
  double delta_gap = 0.0;
  double thm1_rhs = 0.0;
  /// Absent when the specialized bound's hypotheses fail; `cor_note` says why.
  std::optional<double> cor_rhs;
  std::string cor_note;
  BoundConstants constants;
  bool violated = false;
  std::string violation;
};

/// Assembles every constant and checks delta_gap <= thm1_rhs and
/// thm1_rhs <= cor_rhs (when present), each with `slack`. On failure throws
/// BoundViolation carrying the instance as JSON, unless disabled.
BoundReport bound_report(const TabularMdp& mdp, const TabularAisGenerator& gen, const BoundConfig& config);

/// A random (MDP, partition) pair for the bound campaign: 2..max_states
/// states, 1..max_actions actions, rewards in [-1, 1], discount in [0.5, 0.95]
/// and a uniformly drawn number of nonempty classes.
struct BoundInstance {
  TabularMdp mdp;
  std::vector<int> partition;
  TabularAisGenerator gen;
};

BoundInstance random_bound_instance(std::uint64_t seed, int max_states = 8, int max_actions = 4);

std::string bound_csv_header();
std::string bound_csv_row(const BoundReport& report);
/// Full instance plus report, for counterexample artifacts.
std::string bound_counterexample_json(const TabularMdp& mdp, const TabularAisGenerator& gen,
                                      const BoundReport& report);

}  // namespace aislab
