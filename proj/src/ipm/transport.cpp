#include <algorithm>
#include <limits>
#include <numeric>

#include "aislab/error.hpp"
#include "aislab/ipm.hpp"

namespace aislab::ipm {

namespace {

/// Sorted-CDF formula: W1 = integral |F(t) - G(t)| dt on the real line.
double wasserstein_1d(const Aligned& a) {
  const auto n = a.support.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a.support(i, 0) < a.support(j, 0); });
  double cdf_gap = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    cdf_gap += a.p(order[k]) - a.q(order[k]);
    total += std::abs(cdf_gap) * (a.support(order[k + 1], 0) - a.support(order[k], 0));
  }
  return total;
}

/// Successive shortest paths on the bipartite transport network
/// source -> supply i -> demand j -> sink, with Bellman-Ford path search so
/// negative residual costs are handled without potentials.
class TransportFlow {
 public:
  TransportFlow(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand, const Eigen::MatrixXd& cost)
      : n_(static_cast<int>(supply.size())), m_(static_cast<int>(demand.size())) {
    nodes_ = n_ + m_ + 2;
    source_ = 0;
    sink_ = nodes_ - 1;
    for (int i = 0; i < n_; ++i) add_edge(source_, 1 + i, supply(i), 0.0);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < m_; ++j) add_edge(1 + i, 1 + n_ + j, kInf, cost(i, j));
    for (int j = 0; j < m_; ++j) add_edge(1 + n_ + j, sink_, demand(j), 0.0);
  }

  double solve() {
    std::vector<double> dist(static_cast<std::size_t>(nodes_));
    std::vector<int> via(static_cast<std::size_t>(nodes_));
    double total = 0.0;
    for (;;) {
      std::fill(dist.begin(), dist.end(), kInf);
      std::fill(via.begin(), via.end(), -1);
      dist[static_cast<std::size_t>(source_)] = 0.0;
      for (int round = 0; round < nodes_; ++round) {
        bool changed = false;
        for (std::size_t e = 0; e < edges_.size(); ++e) {
          const Edge& edge = edges_[e];
          const double du = dist[static_cast<std::size_t>(edge.from)];
          if (du == kInf || edge.cap <= kEps) continue;
          const double cand = du + edge.cost;
          if (cand < dist[static_cast<std::size_t>(edge.to)] - 1e-15) {
            dist[static_cast<std::size_t>(edge.to)] = cand;
            via[static_cast<std::size_t>(edge.to)] = static_cast<int>(e);
            changed = true;
          }
        }
        if (!changed) break;
      }
      if (via[static_cast<std::size_t>(sink_)] < 0) break;
      double push = kInf;
      for (int v = sink_; v != source_;) {
        const Edge& edge = edges_[static_cast<std::size_t>(via[static_cast<std::size_t>(v)])];
        push = std::min(push, edge.cap);
        v = edge.from;
      }
      for (int v = sink_; v != source_;) {
        const auto e = static_cast<std::size_t>(via[static_cast<std::size_t>(v)]);
        edges_[e].cap -= push;
        edges_[e ^ 1U].cap += push;
        total += push * edges_[e].cost;
        v = edges_[e].from;
      }
    }
    return total;
  }

 private:
  struct Edge {
    int from;
    int to;
    double cap;
    double cost;
  };
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  static constexpr double kEps = 1e-15;

  void add_edge(int u, int v, double cap, double cost) {
    edges_.push_back(Edge{u, v, cap, cost});
    edges_.push_back(Edge{v, u, 0.0, -cost});
  }

  int n_;
  int m_;
  int nodes_;
  int source_;
  int sink_;
  std::vector<Edge> edges_;
};

}  // namespace

double wasserstein_exact(const DiscreteDist& p, const DiscreteDist& q, const MetricSpec& metric) {
  if (p.dim() != q.dim()) throw InputError("wasserstein: support dimensions differ");
  if (metric.kind() == MetricSpec::Kind::euclidean && p.dim() == 1) {
    return wasserstein_1d(align(p, q));
  }
  if (p.size() > kMaxTransportSupport || q.size() > kMaxTransportSupport) {
    throw SizeError("wasserstein: general solver handles at most " + std::to_string(kMaxTransportSupport) +
                    " support points; subsample or use 1-d euclidean supports");
  }
  // Only the mass that has to move enters the flow problem.
  const Aligned a = align(p, q);
  const Eigen::VectorXd common = a.p.cwiseMin(a.q);
  std::vector<Eigen::Index> src;
  std::vector<Eigen::Index> dst;
  for (Eigen::Index i = 0; i < a.p.size(); ++i) {
    if (a.p(i) - common(i) > 0.0) src.push_back(i);
    if (a.q(i) - common(i) > 0.0) dst.push_back(i);
  }
  if (src.empty() || dst.empty()) return 0.0;
  Eigen::VectorXd supply(static_cast<Eigen::Index>(src.size()));
  Eigen::VectorXd demand(static_cast<Eigen::Index>(dst.size()));
  Eigen::MatrixXd cost(supply.size(), demand.size());
  for (std::size_t i = 0; i < src.size(); ++i) supply(static_cast<Eigen::Index>(i)) = a.p(src[i]) - common(src[i]);
  for (std::size_t j = 0; j < dst.size(); ++j) demand(static_cast<Eigen::Index>(j)) = a.q(dst[j]) - common(dst[j]);
  for (std::size_t i = 0; i < src.size(); ++i)
    for (std::size_t j = 0; j < dst.size(); ++j)
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          metric(a.support.row(src[i]).transpose(), a.support.row(dst[j]).transpose());
  TransportFlow flow(supply, demand, cost);
  return flow.solve();
}

}  // namespace aislab::ipm
