#include "aislab/product_chain.hpp"

#include <deque>
#include <map>

#include "aislab/error.hpp"

namespace aislab {

namespace {

std::vector<int> all_states_if_empty(const std::vector<int>& starts, int n) {
  if (!starts.empty()) return starts;
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) all[static_cast<std::size_t>(s)] = s;
  return all;
}

void check_compatible(const TabularMdp& mdp, const TabularAisGenerator& gen) {
  if (gen.n_states() != mdp.n_states() || gen.n_actions() != mdp.n_actions()) {
    throw InputError("product chain: generator and MDP disagree on state/action counts");
  }
}

}  // namespace

ProductChain reachable_pairs(const TabularMdp& mdp, const TabularAisGenerator& gen,
                             const std::vector<int>& start_states, const StationaryPolicy* feature_policy) {
  check_compatible(mdp, gen);
  ProductChain chain;
  chain.n_states = mdp.n_states();
  chain.n_features = gen.n_features();
  chain.index.assign(static_cast<std::size_t>(chain.n_states) * chain.n_features, -1);

  std::deque<std::pair<int, int>> queue;
  auto visit = [&](int s, int z) {
    auto& slot = chain.index[static_cast<std::size_t>(s * chain.n_features + z)];
    if (slot >= 0) return;
    slot = static_cast<int>(chain.nodes.size());
    chain.nodes.emplace_back(s, z);
    queue.emplace_back(s, z);
  };
  for (int s : all_states_if_empty(start_states, mdp.n_states())) {
    if (s < 0 || s >= mdp.n_states()) throw InputError("product chain: start state out of range");
    visit(s, gen.init_feature(s));
  }
  while (!queue.empty()) {
    const auto [s, z] = queue.front();
    queue.pop_front();
    for (int a = 0; a < mdp.n_actions(); ++a) {
      if (feature_policy && feature_policy->prob(z, a) <= 0.0) continue;
      for (int next = 0; next < mdp.n_states(); ++next) {
        if (mdp.prob(s, a, next) <= 0.0) continue;
        visit(next, gen.update(z, next, a));
      }
    }
  }
  return chain;
}

ProductValue product_chain_value(const TabularMdp& mdp, const TabularAisGenerator& gen,
                                 const StationaryPolicy& feature_policy, const std::vector<int>& start_states) {
  if (feature_policy.n_states() != gen.n_features() || feature_policy.n_actions() != mdp.n_actions()) {
    throw InputError("product_chain_value: feature policy must map every feature to an action distribution");
  }
  ProductValue out;
  out.chain = reachable_pairs(mdp, gen, start_states);
  const auto n = static_cast<Eigen::Index>(out.chain.nodes.size());
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  const double gamma = mdp.discount();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [s, z] = out.chain.nodes[static_cast<std::size_t>(i)];
    for (int a = 0; a < mdp.n_actions(); ++a) {
      const double w = feature_policy.prob(z, a);
      if (w == 0.0) continue;
      rhs(i) += w * mdp.reward(s, a);
      for (int next = 0; next < mdp.n_states(); ++next) {
        const double p = mdp.prob(s, a, next);
        if (p == 0.0) continue;
        const int j = out.chain.node(next, gen.update(z, next, a));
        system(i, j) -= gamma * w * p;
      }
    }
  }
  out.node_values = system.partialPivLu().solve(rhs);
  return out;
}

HistoryReachability reachable_under(const TabularMdp& mdp, const HistoryPolicy& policy,
                                    const std::vector<int>& start_states) {
  HistoryReachability out;
  out.state_visited.assign(static_cast<std::size_t>(mdp.n_states()), false);
  std::map<std::pair<int, HistoryPolicy::Memory>, bool> seen;
  std::deque<std::pair<int, HistoryPolicy::Memory>> queue;
  auto visit = [&](int s, HistoryPolicy::Memory m) {
    auto key = std::make_pair(s, m);
    if (seen.count(key)) return;
    seen.emplace(key, true);
    out.state_visited[static_cast<std::size_t>(s)] = true;
    out.nodes.push_back(key);
    queue.push_back(std::move(key));
  };
  for (int s : all_states_if_empty(start_states, mdp.n_states())) visit(s, policy.init(s));
  while (!queue.empty()) {
    auto [s, m] = queue.front();
    queue.pop_front();
    const Eigen::RowVectorXd act = policy.act(m);
    for (int a = 0; a < mdp.n_actions(); ++a) {
      if (act(a) <= 0.0) continue;
      for (int next = 0; next < mdp.n_states(); ++next) {
        if (mdp.prob(s, a, next) <= 0.0) continue;
        visit(next, policy.step(m, a, next));
      }
    }
  }
  return out;
}

}  // namespace aislab
