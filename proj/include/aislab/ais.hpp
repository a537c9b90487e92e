#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aislab/ipm.hpp"
#include "aislab/mdp.hpp"
#include "aislab/product_chain.hpp"
#include "aislab/tabular_ais.hpp"

namespace aislab {

/// IPM used when measuring delta and kappa on tabular instances.
enum class BoundIpm { tv, wasserstein, mmd };

std::string to_string(BoundIpm ipm);
BoundIpm bound_ipm_from_string(const std::string& name);

/// Ground metric and kernel on the state space of a tabular instance.
/// States are embedded as 1-d ids 0..n-1.
struct IpmSetup {
  BoundIpm ipm = BoundIpm::tv;
  ipm::MetricSpec metric = ipm::MetricSpec::discrete();
  /// Energy p = 1 over the same metric, anchored at state 0.
  ipm::KernelSpec kernel = ipm::distance_kernel(1.0, Eigen::VectorXd::Zero(1), ipm::MetricSpec::discrete());

  static IpmSetup defaults(BoundIpm ipm);
  /// d_F between two distributions over state ids.
  double distance(const Eigen::RowVectorXd& p, const Eigen::RowVectorXd& q) const;
  /// Pairwise state distances and the kernel Gram matrix on ids.
  Eigen::MatrixXd state_distances(int n_states) const;
  Eigen::MatrixXd state_gram(int n_states) const;
};

struct EpsDelta {
  double eps = 0.0;
  double delta = 0.0;
  std::size_t n_pairs = 0;  // reachable (s, z) pairs examined
};

/// eps = max |r(s,a) - r_hat(z,a)| and delta = max d_F(P(.|s,a), P_hat(.|z,a))
/// over every (s, z) reachable from a start state under any action, and every a.
/// Empty `start_states` means every state.
EpsDelta measure_eps_delta(const TabularMdp& mdp, const TabularAisGenerator& gen, const IpmSetup& setup,
                           const std::vector<int>& start_states = {});
EpsDelta measure_eps_delta(const TabularMdp& mdp, const TabularAisGenerator& gen, BoundIpm ipm,
                           const std::vector<int>& start_states = {});

/// How a quantizer summarizes the rewards of a class.
enum class RewardAggregation { mean, midrange };

/// Memoryless state aggregation as a tabular generator: z = partition(s').
/// r_hat and P_hat are weighted averages over each class (uniform weights by
/// default). With midrange aggregation r_hat is the midpoint of the class
/// reward range instead.
TabularAisGenerator quantizer_ais(const TabularMdp& mdp, const std::vector<int>& partition,
                                  const std::optional<Eigen::VectorXd>& weights = std::nullopt,
                                  RewardAggregation rewards = RewardAggregation::mean);

/// Every partition of {0..n-1} into exactly k nonempty classes, as canonical
/// labelings (first occurrence order).
std::vector<std::vector<int>> partitions_into(int n, int k);

}  // namespace aislab
