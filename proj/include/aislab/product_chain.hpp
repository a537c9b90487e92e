#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "aislab/mdp.hpp"
#include "aislab/tabular_ais.hpp"

namespace aislab {

/// Reachable (state, feature) pairs of the chain S_{t+1} ~ P(.|S_t, A_t),
/// Z_{t+1} = f(Z_t, S_{t+1}, A_t), started at (s, init_feature(s)).
struct ProductChain {
  int n_states = 0;
  int n_features = 0;
  std::vector<std::pair<int, int>> nodes;  // (state, feature) in BFS order
  std::vector<int> index;                  // s * n_features + z -> node id or -1

  int node(int s, int z) const { return index[static_cast<std::size_t>(s * n_features + z)]; }
  bool reachable(int s, int z) const { return node(s, z) >= 0; }
};

/// BFS over the product chain. With `feature_policy` null every action is
/// explored; otherwise only actions in the support of the policy at each
/// feature. Empty `start_states` means every state.
ProductChain reachable_pairs(const TabularMdp& mdp, const TabularAisGenerator& gen,
                             const std::vector<int>& start_states = {},
                             const StationaryPolicy* feature_policy = nullptr);

/// Value of the flattened history policy mu(Z_t) on every reachable pair.
struct ProductValue {
  ProductChain chain;
  Eigen::VectorXd node_values;

  std::optional<double> at(int s, int z) const {
    const int n = chain.node(s, z);
    if (n < 0) return std::nullopt;
    return node_values(n);
  }
};

/// Exact linear solve on the product chain. Pairs are those reachable from
/// `start_states` under any action, so the table also covers histories the
/// policy itself would not produce.
ProductValue product_chain_value(const TabularMdp& mdp, const TabularAisGenerator& gen,
                                 const StationaryPolicy& feature_policy, const std::vector<int>& start_states = {});

/// Reachable (state, memory) pairs of an MDP driven by a history policy.
struct HistoryReachability {
  std::vector<std::pair<int, HistoryPolicy::Memory>> nodes;
  std::vector<bool> state_visited;
};

HistoryReachability reachable_under(const TabularMdp& mdp, const HistoryPolicy& policy,
                                    const std::vector<int>& start_states);

}  // namespace aislab
