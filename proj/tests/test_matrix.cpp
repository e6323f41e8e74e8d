#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "picres/errors.hpp"
#include "picres/matrix.hpp"
#include "test_util.hpp"

using namespace picres;

namespace {

VectorXd sorted_eigenvalues(const MatrixXd& S) {
  VectorXd e = Eigen::SelfAdjointEigenSolver<MatrixXd>(S).eigenvalues();
  std::sort(e.data(), e.data() + e.size());
  return e;
}

}  // namespace

TEST_CASE("direct_sum") {
  CHECK(direct_sum({MatrixXd::Identity(2, 2), MatrixXd::Identity(3, 3)}) == MatrixXd::Identity(5, 5));
  const MatrixXd d = direct_sum({MatrixXd::Constant(1, 1, 2.0), MatrixXd::Constant(1, 1, 3.0)});
  CHECK(d == (MatrixXd(2, 2) << 2, 0, 0, 3).finished());
  CHECK_THROWS_AS(direct_sum({}), Error);
  Rng rng = make_rng(1, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const MatrixXd A = testutil::random_spd(3, rng), B = testutil::random_spd(4, rng);
    const MatrixXd S = direct_sum({A, B});
    VectorXd both(7);
    both << sorted_eigenvalues(A), sorted_eigenvalues(B);
    std::sort(both.data(), both.data() + 7);
    CHECK((sorted_eigenvalues(S) - both).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(S.block(0, 3, 3, 4).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs(S.determinant() - A.determinant() * B.determinant()) <= 1e-8 * std::abs(S.determinant()));
  }
}

TEST_CASE("kronecker") {
  CHECK(kronecker(MatrixXd::Identity(2, 2), MatrixXd::Identity(3, 3)) == MatrixXd::Identity(6, 6));
  Rng rng = make_rng(2, 0);
  const MatrixXd B = testutil::random_spd(3, rng);
  CHECK(kronecker(MatrixXd::Constant(1, 1, 2.0), B) == 2.0 * B);
  for (int rep = 0; rep < 10; ++rep) {
    const MatrixXd A = MatrixXd::Random(2, 3), C = MatrixXd::Random(4, 2);
    const VectorXd x = VectorXd::Random(3), y = VectorXd::Random(2);
    const VectorXd lhs = kronecker(A, C) * kronecker(MatrixXd(x), MatrixXd(y));
    const VectorXd rhs = kronecker(MatrixXd(A * x), MatrixXd(C * y));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    const MatrixXd P = testutil::random_spd(3, rng), Q = testutil::random_spd(2, rng);
    CHECK(std::abs(kronecker(P, Q).trace() - P.trace() * Q.trace()) < 1e-8 * P.trace() * Q.trace());
  }
}

TEST_CASE("spectral_whiten") {
  const Whitening wi = spectral_whiten(MatrixXd::Identity(3, 3));
  CHECK((wi.transform * wi.transform.transpose() - MatrixXd::Identity(3, 3)).norm() < 1e-12);
  const MatrixXd D = (MatrixXd(2, 2) << 4, 0, 0, 9).finished();
  const Whitening wd = spectral_whiten(D);
  CHECK((wd.transform * D * wd.transform.transpose() - MatrixXd::Identity(2, 2)).norm() < 1e-12);
  VectorXd mags = wd.transform.cwiseAbs().colwise().sum().transpose();
  std::sort(mags.data(), mags.data() + 2);
  CHECK(mags(0) == doctest::Approx(1.0 / 3.0));
  CHECK(mags(1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(spectral_whiten((MatrixXd(2, 2) << 1, 2, 2, 1).finished()), Error);

  Rng rng = make_rng(3, 0);
  for (int rep = 0; rep < 10; ++rep) {
    // Condition numbers up to about 1e6.
    const MatrixXd Q = Eigen::HouseholderQR<MatrixXd>(MatrixXd::Random(6, 6)).householderQ();
    VectorXd ev(6);
    for (int k = 0; k < 6; ++k) ev(k) = std::pow(10.0, -6.0 * k / 5.0);
    const MatrixXd S = Q * ev.asDiagonal() * Q.transpose();
    const Whitening w = spectral_whiten(0.5 * (S + S.transpose()));
    CHECK((w.transform * S * w.transform.transpose() - MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((w.inverse_transform * w.transform - MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-10);
  }

  // Monte Carlo: whitened draws have identity covariance.
  const MatrixXd S = testutil::random_spd(10, rng);
  const Whitening w = spectral_whiten(S);
  const int n = 100000;
  MatrixXd acc = MatrixXd::Zero(10, 10);
  for (int t = 0; t < n; ++t) {
    const VectorXd z = w.transform * mvn_sample_psd(VectorXd::Zero(10), S, rng);
    acc += z * z.transpose();
  }
  CHECK((acc / n - MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("gaussian_condition") {
  Rng rng = make_rng(4, 0);
  const MatrixXd A = testutil::random_spd(2, rng), B = testutil::random_spd(2, rng);
  const VectorXd mu = (VectorXd(4) << 1, 2, 3, 4).finished();
  const auto g = gaussian_condition(mu, direct_sum({A, B}), {2, 3}, (VectorXd(2) << 0, 0).finished());
  CHECK((g.mean - mu.head(2)).norm() < 1e-12);
  CHECK((g.cov - A).norm() < 1e-12);

  const double rho = 0.6;
  const MatrixXd S2 = (MatrixXd(2, 2) << 1, rho, rho, 1).finished();
  const auto b = gaussian_condition((VectorXd(2) << 0.5, -1).finished(), S2, {1}, VectorXd::Constant(1, 2.0));
  CHECK(b.mean(0) == doctest::Approx(0.5 + rho * 3.0));
  CHECK(b.cov(0, 0) == doctest::Approx(1 - rho * rho));

  const auto m = gaussian_condition(mu, direct_sum({A, B}), {}, VectorXd());
  CHECK(m.mean == mu);
  CHECK((m.cov - direct_sum({A, B})).norm() == 0.0);

  // Random 6-dim case, conditional of one coordinate versus a normalized joint-density grid.
  const MatrixXd S6 = testutil::random_spd(6, rng);
  VectorXd mu6 = VectorXd::Random(6);
  const std::vector<int> obs = {0, 1, 3, 4, 5};
  const VectorXd vals = VectorXd::Random(5);
  const auto c = gaussian_condition(mu6, S6, obs, vals);
  REQUIRE(c.free_idx == std::vector<int>{2});
  const int n = 4001;
  const double lo = c.mean(0) - 8 * std::sqrt(c.cov(0, 0)), hi = c.mean(0) + 8 * std::sqrt(c.cov(0, 0));
  const double h = (hi - lo) / (n - 1);
  VectorXd x(6);
  for (int k = 0; k < 5; ++k) x(obs[k]) = vals(k);
  std::vector<double> lp(n);
  double mx = -1e300;
  for (int k = 0; k < n; ++k) {
    x(2) = lo + k * h;
    lp[k] = mvn_logpdf(x, mu6, S6);
    mx = std::max(mx, lp[k]);
  }
  double z = 0, m1 = 0, m2 = 0;
  for (int k = 0; k < n; ++k) {
    const double w = std::exp(lp[k] - mx), t = lo + k * h;
    z += w;
    m1 += w * t;
    m2 += w * t * t;
  }
  m1 /= z;
  CHECK(m1 == doctest::Approx(c.mean(0)).epsilon(1e-8));
  CHECK(m2 / z - m1 * m1 == doctest::Approx(c.cov(0, 0)).epsilon(1e-6));
}

TEST_CASE("matrix_normal_logpdf") {
  Rng rng = make_rng(5, 0);
  const MatrixXd Sigma = testutil::random_spd(3, rng), Psi = testutil::random_spd(2, rng);
  const MatrixXd M = MatrixXd::Random(3, 2);
  const double expect = -(6 / 2.0) * kLog2Pi - (2 / 2.0) * std::log(Sigma.determinant()) - (3 / 2.0) * std::log(Psi.determinant());
  CHECK(matrix_normal_logpdf(M, M, Sigma, Psi) == doctest::Approx(expect).epsilon(1e-12));
  const MatrixXd one = MatrixXd::Identity(1, 1);
  CHECK(matrix_normal_logpdf(MatrixXd::Constant(1, 1, 0.7), MatrixXd::Zero(1, 1), one, one) ==
        doctest::Approx(-0.5 * kLog2Pi - 0.5 * 0.49));
  for (int rep = 0; rep < 10; ++rep) {
    const MatrixXd X = MatrixXd::Random(3, 2);
    const MatrixXd Xt = X.transpose(), Mt = M.transpose();
    const VectorXd vx = Eigen::Map<const VectorXd>(Xt.data(), 6);
    const VectorXd vm = Eigen::Map<const VectorXd>(Mt.data(), 6);
    CHECK(std::abs(matrix_normal_logpdf(X, M, Sigma, Psi) - mvn_logpdf(vx, vm, kronecker(Sigma, Psi))) < 1e-8);
  }
}

TEST_CASE("inverse_wishart_logpdf") {
  // p = 1 is inverse-gamma with shape k/2 and scale Lambda/2.
  for (double s : {0.3, 1.0, 2.5}) {
    const double k = 5.0, L = 2.0;
    const double a = k / 2, b = L / 2;
    const double ig = a * std::log(b) - std::lgamma(a) - (a + 1) * std::log(s) - b / s;
    CHECK(inverse_wishart_logpdf(MatrixXd::Constant(1, 1, s), {MatrixXd::Constant(1, 1, L), k}) == doctest::Approx(ig));
  }
  CHECK_THROWS_AS(inverse_wishart_logpdf(MatrixXd::Identity(3, 3), {MatrixXd::Identity(3, 3), 1.5}), Error);
  CHECK_THROWS_AS(inverse_wishart_logpdf((MatrixXd(2, 2) << 1, 2, 2, 1).finished(), {MatrixXd::Identity(2, 2), 4}), Error);

  // Mode along the ray t * Lambda sits at t = 1 / (k + p + 1).
  Rng rng = make_rng(6, 0);
  const MatrixXd L = testutil::random_spd(3, rng);
  const InverseWishartParams prm{L, 7.0};
  double best_t = 0, best = -1e300;
  for (int k = 1; k <= 200000; ++k) {
    const double t = k * 1e-6;
    const double v = inverse_wishart_logpdf(t * L, prm);
    if (v > best) best = v, best_t = t;
  }
  CHECK(best_t == doctest::Approx(1.0 / (7.0 + 3 + 1)).epsilon(1e-4));

  // p = 1 normalization by quadrature on the log scale.
  const InverseWishartParams p1{MatrixXd::Constant(1, 1, 2.0), 6.0};
  double total = 0.0;
  const int n = 200000;
  const double lo = std::log(1e-6), hi = std::log(1e4), h = (hi - lo) / n;
  for (int k = 0; k <= n; ++k) {
    const double u = lo + k * h, s = std::exp(u);
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    total += w * h * s * std::exp(inverse_wishart_logpdf(MatrixXd::Constant(1, 1, s), p1));
  }
  CHECK(std::abs(total - 1.0) < 1e-6);
}

TEST_CASE("inverse_wishart_sample") {
  Rng rng = make_rng(7, 0);
  const int n = 100000;
  MatrixXd acc = MatrixXd::Zero(2, 2);
  bool all_spd = true, all_finite = true;
  const InverseWishartParams prm{MatrixXd::Identity(2, 2), 5.0};
  for (int t = 0; t < n; ++t) {
    const MatrixXd S = inverse_wishart_sample(prm, rng);
    all_spd &= Eigen::LLT<MatrixXd>(S).info() == Eigen::Success;
    if (t < 2000) all_finite &= std::isfinite(inverse_wishart_logpdf(S, prm));
    acc += S;
  }
  CHECK(all_spd);
  CHECK(all_finite);
  CHECK((acc / n - 0.5 * MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.02);
  CHECK((inverse_wishart_mean(prm) - 0.5 * MatrixXd::Identity(2, 2)).norm() < 1e-15);

  double s1 = 0.0;
  for (int t = 0; t < n; ++t) s1 += inverse_wishart_sample({MatrixXd::Constant(1, 1, 2.0), 6.0}, rng)(0, 0);
  CHECK(std::abs(s1 / n - 0.5) < 0.01);
  CHECK_THROWS_AS(inverse_wishart_sample({MatrixXd::Identity(3, 3), 1.0}, rng), Error);
}

TEST_CASE("is_spd tolerance") {
  CHECK(is_spd(MatrixXd::Identity(3, 3)));
  MatrixXd asym = MatrixXd::Identity(2, 2);
  asym(0, 1) = 1e-6;
  CHECK_FALSE(is_spd(asym));
  CHECK_FALSE(is_spd((MatrixXd(2, 2) << 1, 1, 1, 1).finished()));
}
