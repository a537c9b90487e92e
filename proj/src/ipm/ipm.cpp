#include "aislab/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aislab/error.hpp"

namespace aislab::ipm {

namespace {

constexpr double kProbTol = 1e-12;
constexpr double kMmdClamp = 1e-12;

bool same_point(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  return x.size() == y.size() && (x.array() == y.array()).all();
}

int table_id(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index n) {
  if (x.size() != 1) throw InputError("table metric: points must be 1-d ids");
  const double v = x(0);
  const auto id = static_cast<Eigen::Index>(std::llround(v));
  if (static_cast<double>(id) != v || id < 0 || id >= n) throw InputError("table metric: id outside the table");
  return static_cast<int>(id);
}

}  // namespace

DiscreteDist::DiscreteDist(Eigen::MatrixXd support_points, Eigen::VectorXd probabilities)
    : support(std::move(support_points)), probs(std::move(probabilities)) {
  if (support.rows() != probs.size()) throw InputError("distribution: support/probability size mismatch");
  if (probs.size() == 0) throw InputError("distribution: empty support");
  if (!probs.allFinite() || (probs.array() < 0.0).any()) throw InputError("distribution: negative or non-finite mass");
  if (std::abs(probs.sum() - 1.0) > kProbTol) throw InputError("distribution: probabilities do not sum to 1");
  for (Eigen::Index i = 0; i < support.rows(); ++i)
    for (Eigen::Index j = i + 1; j < support.rows(); ++j)
      if (same_point(support.row(i).transpose(), support.row(j).transpose()))
        throw InputError("distribution: repeated support point");
}

DiscreteDist DiscreteDist::on_ids(const Eigen::Ref<const Eigen::VectorXd>& probabilities) {
  Eigen::MatrixXd pts(probabilities.size(), 1);
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) pts(i, 0) = static_cast<double>(i);
  return DiscreteDist(std::move(pts), probabilities);
}

DiscreteDist DiscreteDist::dirac(const Eigen::Ref<const Eigen::VectorXd>& point) {
  return DiscreteDist(point.transpose(), Eigen::VectorXd::Ones(1));
}

MetricSpec MetricSpec::from_table(Eigen::MatrixXd d) {
  const auto n = d.rows();
  if (d.cols() != n || n == 0) throw InputError("metric table: must be square and nonempty");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d(i, i) != 0.0) throw InputError("metric table: nonzero diagonal");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::isfinite(d(i, j)) || d(i, j) < 0.0) throw InputError("metric table: negative or non-finite entry");
      if (d(i, j) != d(j, i)) throw InputError("metric table: not symmetric");
      for (Eigen::Index k = 0; k < n; ++k) {
        if (d(i, k) > d(i, j) + d(j, k) + 1e-12) throw InputError("metric table: triangle inequality fails");
      }
    }
  }
  return MetricSpec(Kind::table, std::move(d));
}

double MetricSpec::operator()(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) const {
  switch (kind_) {
    case Kind::discrete:
      return same_point(x, y) ? 0.0 : 1.0;
    case Kind::euclidean:
      if (x.size() != y.size()) throw InputError("euclidean metric: dimension mismatch");
      return (x - y).norm();
    case Kind::table:
      return table_(table_id(x, table_.rows()), table_id(y, table_.rows()));
  }
  return 0.0;
}

KernelSpec KernelSpec::energy(double p, MetricSpec metric) {
  if (!(p > 0.0 && p <= 2.0)) throw InputError("energy kernel: exponent must lie in (0, 2]");
  KernelSpec k;
  k.kind = Kind::energy;
  k.param = p;
  k.metric = std::move(metric);
  return k;
}

KernelSpec KernelSpec::gaussian(double bandwidth, MetricSpec metric) {
  if (!(bandwidth > 0.0)) throw InputError("gaussian kernel: bandwidth must be positive");
  KernelSpec k;
  k.kind = Kind::gaussian;
  k.param = bandwidth;
  k.metric = std::move(metric);
  return k;
}

KernelSpec KernelSpec::laplace(double scale, MetricSpec metric) {
  if (!(scale > 0.0)) throw InputError("laplace kernel: scale must be positive");
  KernelSpec k;
  k.kind = Kind::laplace;
  k.param = scale;
  k.metric = std::move(metric);
  return k;
}

KernelSpec distance_kernel(double p_exponent, Eigen::VectorXd anchor, MetricSpec metric) {
  if (!(p_exponent > 0.0 && p_exponent <= 2.0)) throw InputError("distance kernel: exponent must lie in (0, 2]");
  KernelSpec k;
  k.kind = KernelSpec::Kind::distance_induced;
  k.param = p_exponent;
  k.anchor = std::move(anchor);
  k.metric = std::move(metric);
  return k;
}

double KernelSpec::operator()(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) const {
  switch (kind) {
    case Kind::gaussian: {
      const double d = metric(x, y);
      return std::exp(-d * d / (2.0 * param * param));
    }
    case Kind::laplace:
      return std::exp(-metric(x, y) / param);
    case Kind::energy:
    case Kind::distance_induced: {
      const Eigen::VectorXd origin = anchor.size() == 0 ? Eigen::VectorXd::Zero(x.size()) : anchor;
      auto dp = [&](const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
        const double d = metric(a, b);
        return param == 1.0 ? d : std::pow(d, param);
      };
      return 0.5 * (dp(x, origin) + dp(y, origin) - dp(x, y));
    }
  }
  return 0.0;
}

Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& points, const MetricSpec& metric) {
  const auto n = points.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = metric(points.row(i).transpose(), points.row(j).transpose());
  return d;
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& points, const KernelSpec& kernel) {
  const auto n = points.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      k(i, j) = kernel(points.row(i).transpose(), points.row(j).transpose());
      k(j, i) = k(i, j);
    }
  return k;
}

Aligned align(const DiscreteDist& p, const DiscreteDist& q) {
  if (p.dim() != q.dim()) throw InputError("align: support dimensions differ");
  std::vector<Eigen::RowVectorXd> points;
  std::vector<double> pp;
  std::vector<double> qq;
  auto find_or_add = [&](const Eigen::RowVectorXd& x) -> std::size_t {
    for (std::size_t i = 0; i < points.size(); ++i)
      if ((points[i].array() == x.array()).all()) return i;
    points.push_back(x);
    pp.push_back(0.0);
    qq.push_back(0.0);
    return points.size() - 1;
  };
  for (int i = 0; i < p.size(); ++i) pp[find_or_add(p.support.row(i))] += p.probs(i);
  for (int i = 0; i < q.size(); ++i) qq[find_or_add(q.support.row(i))] += q.probs(i);
  Aligned out;
  out.support.resize(static_cast<Eigen::Index>(points.size()), p.dim());
  out.p.resize(static_cast<Eigen::Index>(points.size()));
  out.q.resize(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.support.row(r) = points[i];
    out.p(r) = pp[i];
    out.q(r) = qq[i];
  }
  return out;
}

double tv_ipm(const DiscreteDist& p, const DiscreteDist& q) {
  const Aligned a = align(p, q);
  return (a.p - a.q).cwiseAbs().sum();
}

double tv_std(const DiscreteDist& p, const DiscreteDist& q) { return 0.5 * tv_ipm(p, q); }

double mmd_squared_closed(const DiscreteDist& p, const DiscreteDist& q, const KernelSpec& kernel) {
  const Aligned a = align(p, q);
  const Eigen::MatrixXd k = gram_matrix(a.support, kernel);
  const Eigen::VectorXd diff = a.p - a.q;
  return diff.dot(k * diff);
}

double mmd_closed(const DiscreteDist& p, const DiscreteDist& q, const KernelSpec& kernel) {
  const double sq = mmd_squared_closed(p, q, kernel);
  if (sq < -kMmdClamp) {
    throw KernelValidityError("mmd: squared MMD " + std::to_string(sq) + " is negative; kernel is not PSD");
  }
  return sq <= 0.0 ? 0.0 : std::sqrt(sq);
}

double mmd_u_statistic(const SampleSet& xs, const SampleSet& ys, const KernelSpec& kernel) {
  const auto n = xs.rows();
  const auto m = ys.rows();
  if (n < 2 || m < 2) throw SizeError("mmd_u_statistic: need at least two samples on each side");
  if (xs.cols() != ys.cols()) throw InputError("mmd_u_statistic: sample dimensions differ");
  double within_x = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) within_x += kernel(xs.row(i).transpose(), xs.row(j).transpose());
  double within_y = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) within_y += kernel(ys.row(i).transpose(), ys.row(j).transpose());
  double cross = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) cross += kernel(xs.row(i).transpose(), ys.row(j).transpose());
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return 2.0 * within_x / (dn * (dn - 1.0)) + 2.0 * within_y / (dm * (dm - 1.0)) - 2.0 * cross / (dn * dm);
}

double energy_surrogate(const DiscreteDist& data, const DiscreteDist& model, double p_exponent, const MetricSpec& metric) {
  if (!(p_exponent > 0.0 && p_exponent <= 2.0)) throw InputError("energy_surrogate: exponent must lie in (0, 2]");
  auto dp = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return std::pow(metric(a, b), p_exponent); };
  double cross = 0.0;
  for (int i = 0; i < data.size(); ++i)
    for (int j = 0; j < model.size(); ++j) cross += data.probs(i) * model.probs(j) * dp(data.point(i), model.point(j));
  double within = 0.0;
  for (int i = 0; i < model.size(); ++i)
    for (int j = 0; j < model.size(); ++j) within += model.probs(i) * model.probs(j) * dp(model.point(i), model.point(j));
  return cross - 0.5 * within;
}

MeanSurrogate mmd_mean_surrogate(const Eigen::Ref<const Eigen::VectorXd>& m, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (m.size() != x.size()) throw InputError("mmd_mean_surrogate: dimension mismatch");
  MeanSurrogate out;
  out.loss = (m - 2.0 * x).dot(m);
  out.grad = 2.0 * m - 2.0 * x;
  return out;
}

PinskerChain kl_and_pinsker(const DiscreteDist& p, const DiscreteDist& q, double diameter) {
  if (!(diameter >= 0.0)) throw InputError("kl_and_pinsker: diameter must be nonnegative");
  const Aligned a = align(p, q);
  PinskerChain out;
  out.tv_std = 0.5 * (a.p - a.q).cwiseAbs().sum();
  double kl = 0.0;
  for (Eigen::Index i = 0; i < a.p.size(); ++i) {
    if (a.p(i) <= 0.0) continue;
    if (a.q(i) <= 0.0) {
      out.finite = false;
      out.kl = std::numeric_limits<double>::infinity();
      out.w_upper = std::numeric_limits<double>::infinity();
      return out;
    }
    kl += a.p(i) * std::log(a.p(i) / a.q(i));
  }
  out.kl = std::max(kl, 0.0);
  out.w_upper = diameter * std::sqrt(out.kl / 2.0);
  return out;
}

RkhsNorm rkhs_norm(const Eigen::VectorXd& values, const Eigen::MatrixXd& gram) {
  if (gram.rows() != gram.cols() || gram.rows() != values.size()) throw InputError("rkhs_norm: shape mismatch");
  RkhsNorm out;
  if (values.size() == 0 || values.cwiseAbs().maxCoeff() == 0.0) return out;
  const auto n = values.size();
  const Eigen::MatrixXd reg = gram + kRkhsRidge * Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd c = reg.ldlt().solve(values);
  out.norm = std::sqrt(std::max(0.0, c.dot(gram * c)));
  out.residual = (gram * c - values).cwiseAbs().maxCoeff();
  out.representable = out.residual <= 1e-6 * std::max(1.0, values.cwiseAbs().maxCoeff());
  return out;
}

RkhsNorm rkhs_norm_modulo_constants(const Eigen::VectorXd& values, const Eigen::MatrixXd& gram) {
  if (gram.rows() != gram.cols() || gram.rows() != values.size()) throw InputError("rkhs_norm: shape mismatch");
  const auto n = values.size();
  if (n == 0) return {};
  const Eigen::MatrixXd reg = gram + kRkhsRidge * Eigen::MatrixXd::Identity(n, n);
  const auto ldlt = reg.ldlt();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd a_ones = ldlt.solve(ones);
  const Eigen::VectorXd a_vals = ldlt.solve(values);
  const double shift = ones.dot(a_vals) / ones.dot(a_ones);
  return rkhs_norm((values.array() - shift).matrix(), gram);
}

Lipschitz lipschitz_fn(const Eigen::VectorXd& values, const Eigen::MatrixXd& distances) {
  const auto n = values.size();
  if (n < 2) throw InputError("lipschitz_fn: need at least two points");
  if (distances.rows() != n || distances.cols() != n) throw InputError("lipschitz_fn: distance matrix shape");
  Lipschitz out;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double diff = std::abs(values(i) - values(j));
      if (distances(i, j) == 0.0) {
        if (diff != 0.0) {
          out.infinite = true;
          out.value = std::numeric_limits<double>::infinity();
          return out;
        }
        continue;
      }
      out.value = std::max(out.value, diff / distances(i, j));
    }
  return out;
}

Lipschitz lipschitz_kernel(const std::vector<std::vector<DiscreteDist>>& rows, const Eigen::MatrixXd& distances,
                           const MetricSpec& support_metric) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n < 2) throw InputError("lipschitz_kernel: need at least two points");
  if (distances.rows() != n || distances.cols() != n) throw InputError("lipschitz_kernel: distance matrix shape");
  Lipschitz out;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto& ri = rows[static_cast<std::size_t>(i)];
      const auto& rj = rows[static_cast<std::size_t>(j)];
      if (ri.size() != rj.size()) throw InputError("lipschitz_kernel: action counts differ");
      for (std::size_t a = 0; a < ri.size(); ++a) {
        const double w = wasserstein_exact(ri[a], rj[a], support_metric);
        if (distances(i, j) == 0.0) {
          if (w > 1e-15) {
            out.infinite = true;
            out.value = std::numeric_limits<double>::infinity();
            return out;
          }
          continue;
        }
        out.value = std::max(out.value, w / distances(i, j));
      }
    }
  return out;
}

}  // namespace aislab::ipm
