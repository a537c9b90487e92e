#include <algorithm>
#include <cmath>
#include <functional>

#include "aislab/ais.hpp"
#include "aislab/error.hpp"

namespace aislab {

std::string to_string(BoundIpm ipm) {
  switch (ipm) {
    case BoundIpm::tv:
      return "tv";
    case BoundIpm::wasserstein:
      return "w";
    case BoundIpm::mmd:
      return "mmd";
  }
  return "?";
}

BoundIpm bound_ipm_from_string(const std::string& name) {
  if (name == "tv") return BoundIpm::tv;
  if (name == "w" || name == "wasserstein") return BoundIpm::wasserstein;
  if (name == "mmd") return BoundIpm::mmd;
  throw InputError("unknown ipm '" + name + "' (expected tv, w or mmd)");
}

IpmSetup IpmSetup::defaults(BoundIpm ipm) {
  IpmSetup s;
  s.ipm = ipm;
  return s;
}

double IpmSetup::distance(const Eigen::RowVectorXd& p, const Eigen::RowVectorXd& q) const {
  const auto dp = ipm::DiscreteDist::on_ids(p.transpose());
  const auto dq = ipm::DiscreteDist::on_ids(q.transpose());
  switch (ipm) {
    case BoundIpm::tv:
      return ipm::tv_ipm(dp, dq);
    case BoundIpm::wasserstein:
      return ipm::wasserstein_exact(dp, dq, metric);
    case BoundIpm::mmd:
      return ipm::mmd_closed(dp, dq, kernel);
  }
  return 0.0;
}

namespace {

Eigen::MatrixXd id_points(int n) {
  Eigen::MatrixXd pts(n, 1);
  for (int i = 0; i < n; ++i) pts(i, 0) = i;
  return pts;
}

}  // namespace

Eigen::MatrixXd IpmSetup::state_distances(int n_states) const {
  return ipm::distance_matrix(id_points(n_states), metric);
}

Eigen::MatrixXd IpmSetup::state_gram(int n_states) const { return ipm::gram_matrix(id_points(n_states), kernel); }

EpsDelta measure_eps_delta(const TabularMdp& mdp, const TabularAisGenerator& gen, const IpmSetup& setup,
                           const std::vector<int>& start_states) {
  const ProductChain chain = reachable_pairs(mdp, gen, start_states);
  if (chain.nodes.empty()) throw InputError("measure_eps_delta: no reachable (state, feature) pairs");
  EpsDelta out;
  out.n_pairs = chain.nodes.size();
  for (const auto& [s, z] : chain.nodes) {
    for (int a = 0; a < mdp.n_actions(); ++a) {
      out.eps = std::max(out.eps, std::abs(mdp.reward(s, a) - gen.r_hat(z, a)));
      out.delta = std::max(out.delta, setup.distance(mdp.row(s, a), gen.p_hat(z, a)));
    }
  }
  return out;
}

EpsDelta measure_eps_delta(const TabularMdp& mdp, const TabularAisGenerator& gen, BoundIpm ipm,
                           const std::vector<int>& start_states) {
  return measure_eps_delta(mdp, gen, IpmSetup::defaults(ipm), start_states);
}

TabularAisGenerator quantizer_ais(const TabularMdp& mdp, const std::vector<int>& partition,
                                  const std::optional<Eigen::VectorXd>& weights, RewardAggregation rewards) {
  const int n = mdp.n_states();
  const int m = mdp.n_actions();
  if (partition.size() != static_cast<std::size_t>(n)) throw InputError("quantizer: partition must cover every state");
  const int k = *std::max_element(partition.begin(), partition.end()) + 1;
  if (*std::min_element(partition.begin(), partition.end()) < 0) throw InputError("quantizer: negative class id");
  Eigen::VectorXd w = weights.value_or(Eigen::VectorXd::Ones(n));
  if (w.size() != n || (w.array() <= 0.0).any() || !w.allFinite()) {
    throw InputError("quantizer: weights must be positive and one per state");
  }
  Eigen::VectorXd class_mass = Eigen::VectorXd::Zero(k);
  for (int s = 0; s < n; ++s) class_mass(partition[static_cast<std::size_t>(s)]) += w(s);
  for (int z = 0; z < k; ++z) {
    if (class_mass(z) == 0.0) throw InputError("quantizer: class " + std::to_string(z) + " is empty");
  }

  Eigen::MatrixXd r_hat = Eigen::MatrixXd::Zero(k, m);
  std::vector<Eigen::MatrixXd> p_hat(static_cast<std::size_t>(m), Eigen::MatrixXd::Zero(k, n));
  for (int s = 0; s < n; ++s) {
    const int z = partition[static_cast<std::size_t>(s)];
    const double share = w(s) / class_mass(z);
    for (int a = 0; a < m; ++a) {
      r_hat(z, a) += share * mdp.reward(s, a);
      p_hat[static_cast<std::size_t>(a)].row(z) += share * mdp.row(s, a);
    }
  }
  if (rewards == RewardAggregation::midrange) {
    Eigen::MatrixXd lo = Eigen::MatrixXd::Constant(k, m, INFINITY);
    Eigen::MatrixXd hi = Eigen::MatrixXd::Constant(k, m, -INFINITY);
    for (int s = 0; s < n; ++s) {
      const int z = partition[static_cast<std::size_t>(s)];
      for (int a = 0; a < m; ++a) {
        lo(z, a) = std::min(lo(z, a), mdp.reward(s, a));
        hi(z, a) = std::max(hi(z, a), mdp.reward(s, a));
      }
    }
    r_hat = 0.5 * (lo + hi);
  }
  // Rounding can leave rows a few ulps off 1; renormalize.
  for (auto& p : p_hat)
    for (int z = 0; z < k; ++z) p.row(z) /= p.row(z).sum();

  std::vector<int> update(static_cast<std::size_t>(k) * n * m);
  for (int z = 0; z < k; ++z)
    for (int s = 0; s < n; ++s)
      for (int a = 0; a < m; ++a) update[static_cast<std::size_t>((z * n + s) * m + a)] = partition[static_cast<std::size_t>(s)];
  return TabularAisGenerator(n, m, k, partition, std::move(update), std::move(r_hat), std::move(p_hat));
}

std::vector<std::vector<int>> partitions_into(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (n - i < k - used) return;
    if (i == n) {
      if (used == k) out.push_back(labels);
      return;
    }
    for (int c = 0; c <= std::min(used, k - 1); ++c) {
      labels[static_cast<std::size_t>(i)] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  if (n >= 1 && k >= 1) rec(0, 0);
  return out;
}

}  // namespace aislab
