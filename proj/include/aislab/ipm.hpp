#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace aislab::ipm {

/// Finite distribution. Each row of `support` is one point; ids of finite
/// sets are stored as 1-d points 0, 1, 2, ...
struct DiscreteDist {
  Eigen::MatrixXd support;
  Eigen::VectorXd probs;

  DiscreteDist(Eigen::MatrixXd support_points, Eigen::VectorXd probabilities);
  /// Distribution over ids 0..n-1.
  static DiscreteDist on_ids(const Eigen::Ref<const Eigen::VectorXd>& probabilities);
  /// Point mass at a single point.
  static DiscreteDist dirac(const Eigen::Ref<const Eigen::VectorXd>& point);

  int size() const { return static_cast<int>(probs.size()); }
  int dim() const { return static_cast<int>(support.cols()); }
  Eigen::VectorXd point(int i) const { return support.row(i).transpose(); }
};

/// Samples as rows.
using SampleSet = Eigen::MatrixXd;

/// Ground metric on points.
class MetricSpec {
 public:
  enum class Kind { discrete, euclidean, table };

  static MetricSpec discrete() { return MetricSpec(Kind::discrete, {}); }
  static MetricSpec euclidean() { return MetricSpec(Kind::euclidean, {}); }
  /// Pairwise distances between ids. Validates symmetry, nonnegativity, zero
  /// diagonal and the triangle inequality.
  static MetricSpec from_table(Eigen::MatrixXd distances);

  Kind kind() const { return kind_; }
  const Eigen::MatrixXd& table() const { return table_; }
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) const;

 private:
  MetricSpec(Kind kind, Eigen::MatrixXd table) : kind_(kind), table_(std::move(table)) {}
  Kind kind_;
  Eigen::MatrixXd table_;
};

/// Positive semidefinite kernel on points.
///
/// energy(p) and distance_induced(p, x0) both evaluate
///   k(x, y) = 1/2 (d(x, x0)^p + d(y, x0)^p - d(x, y)^p),
/// energy using the origin as anchor. Their MMD is the energy distance and
/// does not depend on the anchor.
struct KernelSpec {
  enum class Kind { energy, gaussian, laplace, distance_induced };

  Kind kind = Kind::energy;
  double param = 1.0;          // exponent p, bandwidth or scale
  Eigen::VectorXd anchor;      // distance_induced only; empty = origin
  MetricSpec metric = MetricSpec::euclidean();

  static KernelSpec energy(double p = 1.0, MetricSpec metric = MetricSpec::euclidean());
  static KernelSpec gaussian(double bandwidth, MetricSpec metric = MetricSpec::euclidean());
  static KernelSpec laplace(double scale, MetricSpec metric = MetricSpec::euclidean());

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) const;
  /// True for kernels whose RKHS only contains functions vanishing at the anchor.
  bool anchored() const { return kind == Kind::energy || kind == Kind::distance_induced; }
};

/// k_p(x, x') = 1/2 (d(x,x0)^p + d(x',x0)^p - d(x,x')^p) for p in (0, 2].
KernelSpec distance_kernel(double p_exponent, Eigen::VectorXd anchor, MetricSpec metric = MetricSpec::euclidean());

/// Pairwise matrices over the rows of `points`.
Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& points, const MetricSpec& metric);
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& points, const KernelSpec& kernel);

/// The two distributions re-expressed on the union of their supports.
struct Aligned {
  Eigen::MatrixXd support;
  Eigen::VectorXd p;
  Eigen::VectorXd q;
};
Aligned align(const DiscreteDist& p, const DiscreteDist& q);

/// IPM over {f : span(f)/2 <= 1}, i.e. sum |p - q|.
double tv_ipm(const DiscreteDist& p, const DiscreteDist& q);
/// Classical total variation, half of tv_ipm.
double tv_std(const DiscreteDist& p, const DiscreteDist& q);

/// Largest support handled by the general transport solver.
inline constexpr int kMaxTransportSupport = 64;

/// Exact 1-Wasserstein distance. One-dimensional euclidean supports use the
/// sorted-CDF formula; everything else is solved exactly as a min-cost flow.
double wasserstein_exact(const DiscreteDist& p, const DiscreteDist& q, const MetricSpec& metric);

/// Closed-form MMD with exact expectations.
double mmd_closed(const DiscreteDist& p, const DiscreteDist& q, const KernelSpec& kernel);
double mmd_squared_closed(const DiscreteDist& p, const DiscreteDist& q, const KernelSpec& kernel);

/// Unbiased estimator of squared MMD (diagonal terms excluded). May be negative.
double mmd_u_statistic(const SampleSet& xs, const SampleSet& ys, const KernelSpec& kernel);

/// E d(X,W)^p - 1/2 E d(W,W')^p, the part of the energy distance that
/// depends on the second argument.
double energy_surrogate(const DiscreteDist& data, const DiscreteDist& model, double p_exponent,
                        const MetricSpec& metric = MetricSpec::euclidean());

struct MeanSurrogate {
  double loss = 0.0;
  Eigen::VectorXd grad;
};
/// loss = (m - 2x)^T m, grad = 2m - 2x.
MeanSurrogate mmd_mean_surrogate(const Eigen::Ref<const Eigen::VectorXd>& m, const Eigen::Ref<const Eigen::VectorXd>& x);

struct PinskerChain {
  double kl = 0.0;
  double tv_std = 0.0;
  double w_upper = 0.0;
  bool finite = true;  // false when p is not absolutely continuous w.r.t. q
};
/// KL(p||q), tv_std and the Wasserstein upper bound diameter * sqrt(KL / 2).
PinskerChain kl_and_pinsker(const DiscreteDist& p, const DiscreteDist& q, double diameter);

struct RkhsNorm {
  double norm = 0.0;
  double residual = 0.0;     // max |K c - values|
  bool representable = true;
};
inline constexpr double kRkhsRidge = 1e-10;
/// sqrt(c^T K c) with (K + ridge I) c = values.
RkhsNorm rkhs_norm(const Eigen::VectorXd& values, const Eigen::MatrixXd& gram);
/// min over constants c of rkhs_norm(values - c). IPMs ignore constant shifts,
/// so this is the smallest valid Minkowski functional for the MMD ball.
RkhsNorm rkhs_norm_modulo_constants(const Eigen::VectorXd& values, const Eigen::MatrixXd& gram);

struct Lipschitz {
  double value = 0.0;
  bool infinite = false;
};
/// max over pairs |f(i) - f(j)| / d(i, j).
Lipschitz lipschitz_fn(const Eigen::VectorXd& values, const Eigen::MatrixXd& distances);
/// max over actions and pairs W(rows[i][a], rows[j][a]) / d(i, j).
Lipschitz lipschitz_kernel(const std::vector<std::vector<DiscreteDist>>& rows, const Eigen::MatrixXd& distances,
                           const MetricSpec& support_metric);

}  // namespace aislab::ipm
