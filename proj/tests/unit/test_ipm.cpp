#include <doctest.h>

#include <cmath>
#include <numeric>

#include "aislab/error.hpp"
#include "aislab/ipm.hpp"
#include "oracles.hpp"

using namespace aislab;
using namespace aislab::ipm;

namespace {

DiscreteDist ids(std::initializer_list<double> p) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(p.size()));
  Eigen::Index i = 0;
  for (double x : p) v(i++) = x;
  return DiscreteDist::on_ids(v);
}

DiscreteDist random_ids(int n, Rng& rng) { return DiscreteDist::on_ids(oracle::random_simplex(n, rng)); }

DiscreteDist random_points(int n, int dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd pts(n, dim);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < dim; ++d) pts(i, d) = g(rng);
  return DiscreteDist(pts, oracle::random_simplex(n, rng));
}

/// Max over all coupling vertices of the transport polytope: every basis of
/// n + m - 1 cells is tried and kept if its unique solution is feasible.
double transport_by_vertices(const Eigen::VectorXd& p, const Eigen::VectorXd& q, const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(p.size());
  const int m = static_cast<int>(q.size());
  const int cells = n * m;
  const int k = n + m - 1;
  Eigen::MatrixXd a(n + m, cells);
  a.setZero();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      a(i, i * m + j) = 1.0;
      a(n + j, i * m + j) = 1.0;
    }
  Eigen::VectorXd b(n + m);
  b << p, q;
  double best = 1e300;
  std::vector<int> pick(static_cast<std::size_t>(k));
  std::iota(pick.begin(), pick.end(), 0);
  for (;;) {
    Eigen::MatrixXd sub(n + m, k);
    for (int c = 0; c < k; ++c) sub.col(c) = a.col(pick[static_cast<std::size_t>(c)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (lu.rank() == k) {
      const Eigen::VectorXd x = lu.solve(b);
      if ((sub * x - b).cwiseAbs().maxCoeff() < 1e-10 && (x.array() >= -1e-12).all()) {
        double c = 0.0;
        for (int t = 0; t < k; ++t) {
          const int cell = pick[static_cast<std::size_t>(t)];
          c += x(t) * cost(cell / m, cell % m);
        }
        best = std::min(best, c);
      }
    }
    int i = k - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == cells - k + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

double expect(const DiscreteDist& d, const Eigen::VectorXd& f) { return d.probs.dot(f); }

}  // namespace

TEST_CASE("tv: basics and sign-pattern oracle") {
  CHECK(tv_ipm(ids({0.2, 0.8}), ids({0.2, 0.8})) == 0.0);
  CHECK(tv_ipm(ids({1, 0}), ids({0, 1})) == 2.0);
  CHECK(tv_std(ids({1, 0}), ids({0, 1})) == 1.0);
  CHECK_THROWS_AS(ids({0.5, 0.6}), InputError);
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const DiscreteDist p = random_ids(6, rng);
    const DiscreteDist q = random_ids(6, rng);
    double best = 0.0;
    for (int mask = 0; mask < 64; ++mask) {
      Eigen::VectorXd f(6);
      for (int i = 0; i < 6; ++i) f(i) = (mask >> i) & 1 ? 1.0 : -1.0;
      best = std::max(best, std::abs(expect(p, f) - expect(q, f)));
    }
    CHECK(tv_ipm(p, q) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("tv: unioned supports") {
  const DiscreteDist p(Eigen::MatrixXd::Constant(1, 1, 0.0), Eigen::VectorXd::Ones(1));
  const DiscreteDist q(Eigen::MatrixXd::Constant(1, 1, 3.0), Eigen::VectorXd::Ones(1));
  CHECK(tv_ipm(p, q) == 2.0);
}

TEST_CASE("wasserstein: basics") {
  const auto e = MetricSpec::euclidean();
  CHECK(wasserstein_exact(DiscreteDist::dirac(Eigen::VectorXd::Zero(1)), DiscreteDist::dirac(Eigen::VectorXd::Ones(1)), e) == 1.0);
  Rng rng(2);
  const DiscreteDist p = random_points(5, 2, rng);
  CHECK(wasserstein_exact(p, p, e) == 0.0);
}

TEST_CASE("wasserstein: vertex enumeration oracle on 4-point instances") {
  Rng rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    const DiscreteDist p = random_points(4, 2, rng);
    const DiscreteDist q = random_points(4, 2, rng);
    Eigen::MatrixXd cost(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) cost(i, j) = (p.point(i) - q.point(j)).norm();
    CHECK(wasserstein_exact(p, q, MetricSpec::euclidean()) ==
          doctest::Approx(transport_by_vertices(p.probs, q.probs, cost)).epsilon(1e-10));
  }
}

TEST_CASE("wasserstein: general solver agrees with the 1-d formula") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const DiscreteDist p = random_ids(7, rng);
    const DiscreteDist q = random_ids(7, rng);
    Eigen::MatrixXd d(7, 7);
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) d(i, j) = std::abs(i - j);
    CHECK(wasserstein_exact(p, q, MetricSpec::from_table(d)) ==
          doctest::Approx(wasserstein_exact(p, q, MetricSpec::euclidean())).epsilon(1e-10));
  }
}

TEST_CASE("wasserstein: discrete metric equals tv_std and size limit") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const DiscreteDist p = random_ids(8, rng);
    const DiscreteDist q = random_ids(8, rng);
    CHECK(std::abs(wasserstein_exact(p, q, MetricSpec::discrete()) - tv_std(p, q)) <= 1e-10);
  }
  const DiscreteDist big = random_points(65, 2, rng);
  const DiscreteDist other = random_points(3, 2, rng);
  CHECK_THROWS_AS(wasserstein_exact(big, other, MetricSpec::euclidean()), SizeError);
  const DiscreteDist line = random_ids(200, rng);
  CHECK_NOTHROW(wasserstein_exact(line, random_ids(200, rng), MetricSpec::euclidean()));
}

TEST_CASE("metric tables are validated") {
  Eigen::MatrixXd bad(3, 3);
  bad << 0, 1, 5, 1, 0, 1, 5, 1, 0;
  CHECK_THROWS_AS(MetricSpec::from_table(bad), InputError);
  Eigen::MatrixXd asym(2, 2);
  asym << 0, 1, 2, 0;
  CHECK_THROWS_AS(MetricSpec::from_table(asym), InputError);
}

TEST_CASE("mmd: closed form basics") {
  const auto k = KernelSpec::energy(1.0);
  const DiscreteDist d0 = DiscreteDist::dirac(Eigen::VectorXd::Zero(1));
  const DiscreteDist d1 = DiscreteDist::dirac(Eigen::VectorXd::Ones(1));
  CHECK(mmd_closed(d0, d0, k) == 0.0);
  CHECK(mmd_closed(d0, d1, k) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mmd: gaussian closed form versus sampled U-statistics") {
  Rng rng(6);
  const DiscreteDist p = random_points(4, 2, rng);
  const DiscreteDist q = random_points(4, 2, rng);
  const auto k = KernelSpec::gaussian(1.0);
  const double exact = mmd_squared_closed(p, q, k);
  const int reps = 10000;
  const int n = 10;
  double mean = 0.0;
  double sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    SampleSet xs(n, 2);
    SampleSet ys(n, 2);
    for (int i = 0; i < n; ++i) {
      xs.row(i) = p.support.row(sample_index(p.probs.transpose(), rng));
      ys.row(i) = q.support.row(sample_index(q.probs.transpose(), rng));
    }
    const double u = mmd_u_statistic(xs, ys, k);
    mean += u;
    sq += u * u;
  }
  mean /= reps;
  const double se = std::sqrt((sq / reps - mean * mean) / reps);
  CHECK(std::abs(mean - exact) <= 3 * se);
}

TEST_CASE("mmd: u-statistic edge cases") {
  const auto k = KernelSpec::energy(1.0);
  SampleSet a(2, 1);
  a << 0, 0;
  SampleSet b(2, 1);
  b << 1, 1;
  CHECK(mmd_u_statistic(a, b, k) == doctest::Approx(1.0).epsilon(1e-14));
  SampleSet xs(4, 1);
  xs << 0.1, 0.5, -0.3, 2.0;
  CHECK(mmd_u_statistic(xs, xs, k) <= 0.0);
  CHECK_THROWS_AS(mmd_u_statistic(SampleSet::Zero(1, 1), b, k), SizeError);
}

TEST_CASE("distance kernel: values, anchor invariance and energy formula") {
  const KernelSpec k1 = distance_kernel(1.0, Eigen::VectorXd::Zero(1));
  CHECK(k1(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)) == 0.0);
  CHECK(k1(Eigen::VectorXd::Constant(1, -2.5), Eigen::VectorXd::Constant(1, -2.5)) == 2.5);
  CHECK_THROWS_AS(distance_kernel(2.5, Eigen::VectorXd::Zero(1)), InputError);
  CHECK_THROWS_AS(distance_kernel(0.0, Eigen::VectorXd::Zero(1)), InputError);

  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const DiscreteDist p = random_points(5, 2, rng);
    const DiscreteDist q = random_points(5, 2, rng);
    const double a = mmd_closed(p, q, distance_kernel(1.0, Eigen::Vector2d(0.3, -1.2)));
    const double b = mmd_closed(p, q, distance_kernel(1.0, Eigen::Vector2d(4.0, 2.0)));
    CHECK(std::abs(a - b) <= 1e-12);
    double cross = 0.0;
    double within_p = 0.0;
    double within_q = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        cross += p.probs(i) * q.probs(j) * (p.point(i) - q.point(j)).norm();
        within_p += p.probs(i) * p.probs(j) * (p.point(i) - p.point(j)).norm();
        within_q += q.probs(i) * q.probs(j) * (q.point(i) - q.point(j)).norm();
      }
    CHECK(std::abs(a * a - (cross - 0.5 * within_p - 0.5 * within_q)) <= 1e-12);
    CHECK(std::abs(energy_surrogate(p, q, 1.0) - (cross - 0.5 * within_q)) <= 1e-12);
  }
}

TEST_CASE("mmd mean surrogate") {
  const Eigen::Vector3d x(0.5, -1.0, 2.0);
  const MeanSurrogate at_x = mmd_mean_surrogate(x, x);
  CHECK(at_x.loss == doctest::Approx(-x.squaredNorm()));
  CHECK(at_x.grad.norm() == 0.0);
  const MeanSurrogate at_zero = mmd_mean_surrogate(Eigen::Vector3d::Zero(), x);
  CHECK(at_zero.loss == 0.0);
  CHECK(at_zero.grad.isApprox(-2 * x));
  Rng rng(8);
  std::normal_distribution<double> g;
  const Eigen::Vector3d m(g(rng), g(rng), g(rng));
  const MeanSurrogate s = mmd_mean_surrogate(m, x);
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector3d up = m;
    Eigen::Vector3d dn = m;
    up(i) += h;
    dn(i) -= h;
    const double fd = (mmd_mean_surrogate(up, x).loss - mmd_mean_surrogate(dn, x).loss) / (2 * h);
    CHECK(oracle::rel_err(fd, s.grad(i)) < 1e-6);
  }
}

TEST_CASE("kl and pinsker chain") {
  const PinskerChain same = kl_and_pinsker(ids({0.3, 0.7}), ids({0.3, 0.7}), 1.0);
  CHECK(same.kl == 0.0);
  CHECK(same.tv_std == 0.0);
  CHECK(same.w_upper == 0.0);
  const PinskerChain c = kl_and_pinsker(ids({1, 0}), ids({0.5, 0.5}), 1.0);
  CHECK(c.kl == doctest::Approx(std::log(2.0)));
  CHECK(c.w_upper == doctest::Approx(0.5887).epsilon(1e-4));
  CHECK(wasserstein_exact(ids({1, 0}), ids({0.5, 0.5}), MetricSpec::euclidean()) <= c.w_upper);
  const PinskerChain inf = kl_and_pinsker(ids({0.5, 0.5}), ids({1, 0}), 1.0);
  CHECK_FALSE(inf.finite);
  Rng rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = u(rng);
    const double b = u(rng);
    const DiscreteDist p = ids({a, 1 - a});
    const DiscreteDist q = ids({b, 1 - b});
    const PinskerChain ch = kl_and_pinsker(p, q, 1.0);
    const double w = wasserstein_exact(p, q, MetricSpec::euclidean());
    CHECK(w <= ch.tv_std + 1e-12);
    CHECK(ch.tv_std <= ch.w_upper + 1e-12);
  }
}

TEST_CASE("rkhs norm") {
  CHECK(rkhs_norm(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3)).norm == 0.0);
  CHECK(rkhs_norm(Eigen::Vector3d(1, 0, 0), Eigen::MatrixXd::Identity(3, 3)).norm == doctest::Approx(1.0).epsilon(1e-9));
  Rng rng(10);
  std::normal_distribution<double> g;
  Eigen::MatrixXd b(5, 5);
  for (int i = 0; i < 25; ++i) b(i) = g(rng);
  const Eigen::MatrixXd k = b * b.transpose();
  Eigen::VectorXd v(5);
  for (int i = 0; i < 5; ++i) v(i) = g(rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
  perm.indices() << 3, 0, 4, 1, 2;
  const Eigen::MatrixXd kp = perm * k * perm.transpose();
  const Eigen::VectorXd vp = perm * v;
  CHECK(rkhs_norm(vp, kp).norm == doctest::Approx(rkhs_norm(v, k).norm).epsilon(1e-8));
  // A rank-one Gram cannot represent a generic vector.
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
  CHECK_FALSE(rkhs_norm(Eigen::Vector3d(1, 0, 0), w * w.transpose()).representable);
}

TEST_CASE("lipschitz constants") {
  const Eigen::MatrixXd disc = Eigen::MatrixXd::Ones(4, 4) - Eigen::MatrixXd::Identity(4, 4);
  CHECK(lipschitz_fn(Eigen::VectorXd::Constant(4, 2.0), disc).value == 0.0);
  const Eigen::Vector4d f(1.0, -2.0, 0.5, 3.0);
  CHECK(lipschitz_fn(f, disc).value == 5.0);
  Eigen::VectorXd grid(6);
  Eigen::MatrixXd d(6, 6);
  for (int i = 0; i < 6; ++i) {
    grid(i) = 3.0 * 0.2 * i;
    for (int j = 0; j < 6; ++j) d(i, j) = 0.2 * std::abs(i - j);
  }
  CHECK(lipschitz_fn(grid, d).value == doctest::Approx(3.0));
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  CHECK(lipschitz_fn(Eigen::Vector2d(0, 1), zero).infinite);
  std::vector<std::vector<DiscreteDist>> rows{{ids({1, 0})}, {ids({0.25, 0.75})}};
  CHECK(lipschitz_kernel(rows, disc.topLeftCorner(2, 2), MetricSpec::discrete()).value == doctest::Approx(0.75));
}

TEST_CASE("property: ipm implication for TV, Wasserstein and MMD") {
  Rng rng(11);
  std::normal_distribution<double> g;
  const int n = 6;
  Eigen::MatrixXd pts(n, 1);
  for (int i = 0; i < n; ++i) pts(i, 0) = g(rng);
  const Eigen::MatrixXd dist = distance_matrix(pts, MetricSpec::euclidean());
  const KernelSpec kernel = KernelSpec::energy(1.0);
  const Eigen::MatrixXd gram = gram_matrix(pts, kernel);
  for (int trial = 0; trial < 100; ++trial) {
    const DiscreteDist p(pts, oracle::random_simplex(n, rng));
    const DiscreteDist q(pts, oracle::random_simplex(n, rng));
    Eigen::VectorXd f(n);
    for (int i = 0; i < n; ++i) f(i) = g(rng);
    const double gap = std::abs(expect(p, f) - expect(q, f));
    const double span = f.maxCoeff() - f.minCoeff();
    CHECK(gap <= 0.5 * span * tv_ipm(p, q) + 1e-9);
    CHECK(gap <= lipschitz_fn(f, dist).value * wasserstein_exact(p, q, MetricSpec::euclidean()) + 1e-9);
    const RkhsNorm rn = rkhs_norm_modulo_constants(f, gram);
    CHECK(rn.representable);
    CHECK(gap <= rn.norm * mmd_closed(p, q, kernel) + 1e-9);
  }
}

TEST_CASE("property: metric axioms") {
  Rng rng(12);
  const KernelSpec kernel = KernelSpec::energy(1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const DiscreteDist a = random_points(4, 2, rng);
    const DiscreteDist b = random_points(4, 2, rng);
    const DiscreteDist c = random_points(4, 2, rng);
    const auto e = MetricSpec::euclidean();
    CHECK(wasserstein_exact(a, c, e) <= wasserstein_exact(a, b, e) + wasserstein_exact(b, c, e) + 1e-9);
    CHECK(std::abs(wasserstein_exact(a, b, e) - wasserstein_exact(b, a, e)) <= 1e-9);
    CHECK(mmd_closed(a, c, kernel) <= mmd_closed(a, b, kernel) + mmd_closed(b, c, kernel) + 1e-9);
    CHECK(std::abs(mmd_closed(a, b, kernel) - mmd_closed(b, a, kernel)) <= 1e-12);
    CHECK(tv_ipm(a, c) <= tv_ipm(a, b) + tv_ipm(b, c) + 1e-12);
    CHECK(wasserstein_exact(a, b, e) > 0.0);
    CHECK(mmd_closed(a, b, kernel) > 0.0);
  }
}
