#include <cmath>

#include "doctest.h"
#include "picres/conjugate.hpp"
#include "picres/errors.hpp"
#include "test_util.hpp"

using namespace picres;

namespace {

DevelopmentFactors scales_for(int J) {
  DevelopmentFactors s = make_factors(J, 0.0, 0.0, 0.1, 0.1);
  for (int j = 0; j <= J; ++j) s.sigma(j) = 0.08 + 0.02 * j;
  for (int j = 0; j < J; ++j) s.tau(j) = 0.05 + 0.01 * j;
  return s;
}

double log_post(const ClaimsTriangle& tri, DevelopmentFactors th, const VectorXd& beta, const VectorXd& m,
                const VectorXd& v) {
  th.set_beta(beta);
  double out = loglik_independent(tri, th);
  for (int k = 0; k < beta.size(); ++k) out += -0.5 * (beta(k) - m(k)) * (beta(k) - m(k)) / v(k);
  return out;
}

}  // namespace

TEST_CASE("entrywise precision agrees with generalized least squares") {
  Rng rng = make_rng(31, 0);
  for (int J : {1, 2, 4, 7}) {
    const ClaimsTriangle tri = testutil::random_triangle(J, rng);
    const DevelopmentFactors sc = scales_for(J);
    VectorXd m = VectorXd::Zero(2 * J + 1), v = VectorXd::Constant(2 * J + 1, 4.0);
    for (int k = 0; k < m.size(); ++k) m(k) = 0.1 * k, v(k) = 1.0 + k;
    const DevFactorPosterior a = model_one_full_conditional(tri, sc, m, v);
    const WhitenedData wd = whiten_observations(build_observation_model(tri), ModelISpec{}, sc);
    const DevFactorPosterior b = dev_factor_full_conditional(wd, m, v);
    CHECK((a.precision - b.precision).cwiseAbs().maxCoeff() < 1e-8 * b.precision.cwiseAbs().maxCoeff());
    CHECK((a.Pi - b.Pi).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((a.Delta - b.Delta).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("dev factor posterior limits") {
  Rng rng = make_rng(32, 0);
  const ClaimsTriangle tri = testutil::random_triangle(3, rng);
  const DevelopmentFactors sc = scales_for(3);
  VectorXd m = VectorXd::LinSpaced(7, -1, 1), v = VectorXd::Constant(7, 100.0);
  v(2) = 1e-8;
  v(5) = 1e-8;
  const DevFactorPosterior p = model_one_full_conditional(tri, sc, m, v);
  CHECK(std::abs(p.Pi(2) - m(2)) < 1e-4);
  CHECK(std::abs(p.Pi(5) - m(5)) < 1e-4);
  CHECK(p.Delta(2, 2) < 1e-8);
  CHECK_THROWS_AS(model_one_full_conditional(tri, sc, m.head(5), v.head(5)), Error);
}

TEST_CASE("posterior mean is stationary") {
  Rng rng = make_rng(33, 0);
  for (int J : {1, 3}) {
    const ClaimsTriangle tri = testutil::random_triangle(J, rng);
    const DevelopmentFactors sc = scales_for(J);
    const VectorXd m = VectorXd::Zero(2 * J + 1), v = VectorXd::Constant(2 * J + 1, 10.0);
    const DevFactorPosterior p = model_one_full_conditional(tri, sc, m, v);
    const double h = 1e-3;
    for (int k = 0; k < 2 * J + 1; ++k) {
      VectorXd up = p.Pi, dn = p.Pi;
      up(k) += h;
      dn(k) -= h;
      const double g = (log_post(tri, sc, up, m, v) - log_post(tri, sc, dn, m, v)) / (2 * h);
      CHECK(std::abs(g) < 1e-8);
    }
    // Curvature matches the precision.
    VectorXd e = VectorXd::Zero(2 * J + 1);
    e(0) = h;
    const double c = -(log_post(tri, sc, p.Pi + e, m, v) - 2 * log_post(tri, sc, p.Pi, m, v) +
                       log_post(tri, sc, p.Pi - e, m, v)) /
                     (h * h);
    CHECK(c == doctest::Approx(p.precision(0, 0)).epsilon(1e-4));
  }
}

TEST_CASE("dev factor posterior against random-walk Metropolis") {
  Rng rng = make_rng(34, 0);
  const ClaimsTriangle tri = testutil::random_triangle(1, rng);
  const DevelopmentFactors sc = scales_for(1);
  const VectorXd m = VectorXd::Zero(3), v = VectorXd::Constant(3, 100.0);
  const DevFactorPosterior p = model_one_full_conditional(tri, sc, m, v);
  const int n = 400000;
  VectorXd x = p.Pi;
  double lp = log_post(tri, sc, x, m, v);
  std::vector<std::vector<double>> draws(3, std::vector<double>(n)), sq(3, std::vector<double>(n));
  const VectorXd step = p.Delta.diagonal().cwiseSqrt() * 1.2;
  for (int t = 0; t < n; ++t) {
    VectorXd y = x;
    for (int k = 0; k < 3; ++k) y(k) += step(k) * std_normal(rng);
    const double ly = log_post(tri, sc, y, m, v);
    if (std::log(uniform01(rng)) < ly - lp) x = y, lp = ly;
    for (int k = 0; k < 3; ++k) draws[k][t] = x(k), sq[k][t] = (x(k) - p.Pi(k)) * (x(k) - p.Pi(k));
  }
  for (int k = 0; k < 3; ++k) {
    const auto mm = testutil::batch_means(draws[k]);
    CHECK(std::abs(mm.mean - p.Pi(k)) < 3 * mm.se);
    const auto vv = testutil::batch_means(sq[k]);
    CHECK(std::abs(vv.mean - p.Delta(k, k)) < 3 * vv.se);
  }
}

TEST_CASE("conjugate draws have the conditional distribution") {
  Rng rng = make_rng(35, 0);
  const ClaimsTriangle tri = testutil::random_triangle(3, rng);
  const DevelopmentFactors sc = scales_for(3);
  const VectorXd m = VectorXd::Zero(7), v = VectorXd::Constant(7, 10.0);
  const DevFactorPosterior p = model_one_full_conditional(tri, sc, m, v);
  const int n = 10000;
  double s1 = 0.0, s2 = 0.0;
  for (int t = 0; t < n; ++t) {
    const VectorXd b = draw_dev_factors(p, rng);
    const double q = (b - p.Pi).dot(p.precision * (b - p.Pi));
    s1 += q;
    s2 += q * q;
    // The conditional depends only on the data and scales.
    if (t < 3) {
      const DevFactorPosterior again = model_one_full_conditional(tri, sc, m, v);
      CHECK(again.Pi == p.Pi);
      CHECK(again.Delta == p.Delta);
    }
  }
  const double mean = s1 / n, var = s2 / n - mean * mean;
  CHECK(std::abs(mean - 7.0) < 3.0 * std::sqrt(14.0 / n));
  CHECK(std::abs(var - 14.0) < 1.0);
}

TEST_CASE("transform and untransform") {
  Rng rng = make_rng(36, 0);
  const VectorXd x = VectorXd::Random(5);
  CHECK((untransform_dev_factors(x, {MatrixXd::Identity(5, 5)}) - x).norm() < 1e-15);
  CHECK((untransform_dev_factors(x, {MatrixXd(4.0 * MatrixXd::Identity(5, 5))}) - 0.5 * x).norm() < 1e-15);
  const std::vector<MatrixXd> blocks = {testutil::random_spd(3, rng), testutil::random_spd(1, rng),
                                        testutil::random_spd(2, rng)};
  for (int rep = 0; rep < 10; ++rep) {
    const VectorXd r = VectorXd::Random(6);
    CHECK((transform_dev_factors(untransform_dev_factors(r, blocks), blocks) - r).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((untransform_dev_factors(transform_dev_factors(r, blocks), blocks) - r).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(untransform_dev_factors(x, {MatrixXd(MatrixXd::Zero(5, 5))}), Error);
  CHECK_THROWS_AS(untransform_dev_factors(x, {MatrixXd::Identity(3, 3)}), Error);

  const DevelopmentFactors th = scales_for(2);
  ModelIIISpec m3{TelescopingBlockDiag::identity(2)};
  const VectorXd big = VectorXd::Random(9);
  CHECK((untransform_dev_factors(big, m3, th) - big).norm() < 1e-14);
}

TEST_CASE("covariance_full_conditional") {
  const InverseWishartParams prior{MatrixXd::Identity(3, 3) * 2.0, 6.0};
  const auto z = covariance_full_conditional(MatrixXd::Zero(3, 4), prior);
  CHECK((z.Lambda - prior.Lambda).norm() == 0.0);
  CHECK(z.k == 10.0);

  // Scalar case is the inverse-gamma update: shape k/2 + n/2, scale Lambda/2 + sum r^2 / 2.
  const MatrixXd r1 = (MatrixXd(1, 3) << 0.5, -1.0, 2.0).finished();
  const auto s = covariance_full_conditional(r1, {MatrixXd::Constant(1, 1, 1.0), 4.0});
  CHECK(s.k / 2 == doctest::Approx(2.0 + 1.5));
  CHECK(s.Lambda(0, 0) / 2 == doctest::Approx(0.5 + 0.5 * 5.25));

  Rng rng = make_rng(37, 0);
  const MatrixXd R = MatrixXd::Random(5, 7);
  const std::vector<InverseWishartParams> priors = {{testutil::random_spd(3, rng), 5.0},
                                                   {testutil::random_spd(2, rng), 4.0}};
  const auto blocks = covariance_full_conditional_blocks(R, priors);
  const auto full = covariance_full_conditional(R, {direct_sum({priors[0].Lambda, priors[1].Lambda}), 5.0});
  CHECK((blocks[0].Lambda - full.Lambda.topLeftCorner(3, 3)).norm() < 1e-14);
  CHECK((blocks[1].Lambda - full.Lambda.bottomRightCorner(2, 2)).norm() < 1e-14);
  CHECK(blocks[0].k == 12.0);
  CHECK(blocks[1].k == 11.0);
  CHECK_THROWS_AS(covariance_full_conditional_blocks(R.topRows(4), priors), Error);

  // Posterior mode approaches the residual estimate with little prior information.
  const int n = 20000;
  MatrixXd big(3, n);
  const MatrixXd S = testutil::random_spd(3, rng);
  for (int t = 0; t < n; ++t) big.col(t) = mvn_sample_psd(VectorXd::Zero(3), S, rng);
  const auto post = covariance_full_conditional(big, {1e-8 * MatrixXd::Identity(3, 3), 4.0 + 1e-6});
  const MatrixXd mode = post.Lambda / (post.k + 3 + 1);
  CHECK((mode - big * big.transpose() / n).cwiseAbs().maxCoeff() < 1e-3 * S.cwiseAbs().maxCoeff());
}

TEST_CASE("hyper_variance_full_conditional") {
  const auto z = hyper_variance_full_conditional(1.5, 1.5, 2.0, 3.0);
  CHECK(z.shape == 2.5);
  CHECK(z.scale == 3.0);
  const auto d = hyper_variance_full_conditional(1.0 + std::sqrt(2.0), 1.0, 1.0, 1.0);
  CHECK(d.shape == doctest::Approx(1.5));
  CHECK(d.scale == doctest::Approx(2.0));

  // Grid-normalized posterior over s^2.
  const double a = 2.0, b = 1.0, phi = 0.8, m = 0.0;
  const auto post = hyper_variance_full_conditional(phi, m, a, b);
  const int n = 400000;
  const double lo = std::log(1e-4), hi = std::log(1e4), h = (hi - lo) / n;
  double z0 = 0.0, z1 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double s2 = std::exp(lo + (k + 0.5) * h);
    const double w = s2 * std::exp(normal_logpdf(phi, m, s2) + inverse_gamma_logpdf(s2, a, b));
    z0 += w;
    z1 += w * s2;
  }
  CHECK(z1 / z0 == doctest::Approx(post.scale / (post.shape - 1.0)).epsilon(1e-3));
}
