// SPDX-License-Identifier: Apache-2.0
#include "dtloc/analysis.hpp"
#include "dtloc/model.hpp"
#include "dtloc/scenario.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dtloc;

namespace {

struct World {
  oracle::Case c;
  ParameterVector theta;
  AnchorLayout layout;
  NoiseSpec noise;
};

World make_world(oracle::Gen& g, int n, int m) {
  oracle::Case c = oracle::random_case(g, n, m);
  ParameterVector theta = ParameterVector::from_flat(c.x);
  AnchorLayout layout(c.anchors, c.dt);
  NoiseSpec noise{c.sigma_d, c.sigma_rho};
  return World{std::move(c), std::move(theta), std::move(layout), std::move(noise)};
}

Mat oracle_fim(const oracle::Case& c) {
  const Mat G = oracle::fd_jacobian(c.x, c.anchors, c.dt);
  return G.transpose() * oracle::weights(c.sigma_d, c.sigma_rho).asDiagonal() * G;
}

double rel_diff(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); }

// Default world: 8 anchors on a 600 m square, UD inside, sigma_rho 10 m.
World square_world() {
  ScenarioConfig cfg;
  World s{{}, ParameterVector::zeros(2), build_layout(cfg), cfg.noise()};
  s.theta.p << 250, 350;
  s.theta.v << 12, -7;
  s.theta.b = 0.3 * kSpeedOfLight;
  s.theta.k = 5e-6 * kSpeedOfLight;
  return s;
}

}  // namespace

TEST(Fim, SdtMatchesFiniteDifferenceOracle) {
  oracle::Gen g(41);
  for (int trial = 0; trial < 30; ++trial) {
    const World s = make_world(g, trial % 2 == 0 ? 2 : 3, g.integer(6, 12));
    const FimReport rep = fim_sdt(s.theta, s.layout, s.noise);
    const Mat ref = oracle_fim(s.c);
    EXPECT_LT(rel_diff(rep.fim, ref), 1e-6);
    EXPECT_LT(rel_diff(rep.crlb, Vec(ref.inverse().diagonal())), 1e-5);
  }
}

TEST(Fim, DecomposesIntoDopplerAndToaParts) {
  oracle::Gen g(42);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = trial % 2 == 0 ? 2 : 3;
    const int m = g.integer(2 * n + 2, 12);
    const World s = make_world(g, n, m);
    const Mat G = jacobian(s.theta, s.layout);
    const Vec w = s.noise.weights();
    Mat parts = Mat::Zero(G.cols(), G.cols());
    for (int half = 0; half < 2; ++half) {
      const Mat Gh = G.middleRows(half * m, m);
      parts += Gh.transpose() * w.segment(half * m, m).asDiagonal() * Gh;
    }
    const Mat F = fim_sdt(s.theta, s.layout, s.noise).fim;
    for (Eigen::Index i = 0; i < F.rows(); ++i)
      for (Eigen::Index j = 0; j < F.cols(); ++j)
        EXPECT_NEAR(F(i, j), parts(i, j), 1e-10 * std::max(std::abs(parts(i, j)), 1e-300));
    const Mat toa = G.bottomRows(m).transpose() * w.tail(m).asDiagonal() * G.bottomRows(m);
    EXPECT_LT(rel_diff(fim_lspm_uvd(s.theta, s.layout, s.noise).fim, toa), 1e-12);
  }
}

TEST(Fim, RemovingAMeasurementNeverLowersCrlbProperty) {
  oracle::Gen g(43);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = trial % 2 == 0 ? 2 : 3;
    const int m = g.integer(n + 3, 12);
    const World s = make_world(g, n, m);
    const Mat G = jacobian(s.theta, s.layout);
    const Vec w = s.noise.weights();
    const FimReport full = fim_sdt(s.theta, s.layout, s.noise);
    const int drop = g.integer(0, 2 * m - 1);
    const Mat sub = full.fim - w(drop) * G.row(drop).transpose() * G.row(drop);
    const Vec crlb_sub = sub.inverse().diagonal();
    for (Eigen::Index i = 0; i < crlb_sub.size(); ++i) EXPECT_LE(full.crlb(i), crlb_sub(i) * (1 + 1e-9));
  }
}

TEST(Fim, AidedInformationAddsPriorBlocks) {
  oracle::Gen g(44);
  const World s = make_world(g, 3, 9);
  Mat cov(3, 3);
  cov << 2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 0.5;
  const Mat F = fim_sdt(s.theta, s.layout, s.noise).fim;
  const Mat Fv = fim_sdt_v(s.theta, s.layout, s.noise, AidingVelocity{s.theta.v, cov}).fim;
  Mat diff = Fv - F;
  EXPECT_LT(rel_diff(diff.block(4, 4, 3, 3), cov.inverse()), 1e-9);
  diff.block(4, 4, 3, 3).setZero();
  EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-9 * F.cwiseAbs().maxCoeff());

  const Mat Fk = fim_sdt_k(s.theta, s.layout, s.noise, AidingDrift{s.theta.k, 0.25}).fim;
  Mat dk = Fk - F;
  EXPECT_NEAR(dk(7, 7), 16.0, 1e-9 * F(7, 7));
  dk(7, 7) = 0.0;
  EXPECT_LT(dk.cwiseAbs().maxCoeff(), 1e-9 * F.cwiseAbs().maxCoeff());
}

TEST(Fim, AugmentationOrderingProperty) {
  oracle::Gen g(45);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = trial % 2 == 0 ? 2 : 3;
    const World s = make_world(g, n, g.integer(n + 2, 12));
    const Mat F = fim_sdt(s.theta, s.layout, s.noise).fim;
    const Mat Fv = fim_sdt_v(s.theta, s.layout, s.noise, AidingVelocity::isotropic(s.theta.v, g.uniform(0.05, 5))).fim;
    const Mat Fk = fim_sdt_k(s.theta, s.layout, s.noise, AidingDrift{s.theta.k, g.uniform(0.05, 5)}).fim;
    EXPECT_GE(oracle::min_eig_inverse_gap(F, Fv), -1e-10);
    EXPECT_GE(oracle::min_eig_inverse_gap(F, Fk), -1e-10);
  }
}

TEST(Fim, GroupedRmseIsRootBlockSum) {
  oracle::Gen g(46);
  const World s = make_world(g, 2, 8);
  const FimReport rep = fim_sdt(s.theta, s.layout, s.noise);
  EXPECT_DOUBLE_EQ(rep.grouped_rmse.position, std::sqrt(rep.crlb(0) + rep.crlb(1)));
  EXPECT_DOUBLE_EQ(rep.grouped_rmse.clock_offset, std::sqrt(rep.crlb(2)));
  EXPECT_DOUBLE_EQ(rep.grouped_rmse.velocity, std::sqrt(rep.crlb(3) + rep.crlb(4)));
  EXPECT_DOUBLE_EQ(rep.grouped_rmse.clock_drift, std::sqrt(rep.crlb(5)));
}

TEST(Fim, PredictedRmseIsLinearInNoiseProperty) {
  oracle::Gen g(47);
  for (int trial = 0; trial < 30; ++trial) {
    const World s = make_world(g, trial % 2 == 0 ? 2 : 3, g.integer(8, 12));
    const double c = g.uniform(0.01, 100.0);
    const NoiseSpec scaled{s.noise.sigma_d * c, s.noise.sigma_rho * c};
    const BlockValues a = fim_sdt(s.theta, s.layout, s.noise).grouped_rmse;
    const BlockValues b = fim_sdt(s.theta, s.layout, scaled).grouped_rmse;
    EXPECT_NEAR(b.position, c * a.position, 1e-9 * c * a.position);
    EXPECT_NEAR(b.clock_offset, c * a.clock_offset, 1e-9 * c * a.clock_offset);
    EXPECT_NEAR(b.velocity, c * a.velocity, 1e-9 * c * a.velocity);
    EXPECT_NEAR(b.clock_drift, c * a.clock_drift, 1e-9 * c * a.clock_drift);
    const BlockValues l = fim_lspm_uvd(s.theta, s.layout, scaled).grouped_rmse;
    EXPECT_NEAR(l.position, c * fim_lspm_uvd(s.theta, s.layout, s.noise).grouped_rmse.position,
                1e-9 * c * l.position);
  }
}

TEST(Fim, CollinearGeometryIsSingular) {
  Mat q(2, 4);
  q << 0, 100, 200, 300, 0, 0, 0, 0;
  ParameterVector th = ParameterVector::zeros(2);
  th.p << 50, 0;
  th.v << 3, 0;
  EXPECT_THROW((void)fim_sdt(th, AnchorLayout(q, 0.05), NoiseSpec::uniform(4, 1, 1)), SingularMatrixError);
}

TEST(Bias, ZeroDeviationGivesUnbiasedRmse) {
  const World s = square_world();
  const AidingVelocity aid = AidingVelocity::isotropic(s.theta.v, 1.0);
  const BiasPrediction p = bias_deviated_velocity(s.theta, s.layout, s.noise, aid, Vec::Zero(2));
  EXPECT_TRUE(p.bias.isZero(0.0));
  const FimReport rep = fim_sdt_v(s.theta, s.layout, s.noise, aid);
  EXPECT_NEAR(p.rmse.position, rep.grouped_rmse.position, 1e-12 * rep.grouped_rmse.position);
  EXPECT_NEAR(p.rmse.clock_drift, rep.grouped_rmse.clock_drift, 1e-12 * rep.grouped_rmse.clock_drift);
}

TEST(Bias, VelocityBiasMatchesExplicitAssembly) {
  oracle::Gen g(48);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = trial % 2 == 0 ? 2 : 3;
    const int m = g.integer(n + 2, 12);
    const World s = make_world(g, n, m);
    const AidingVelocity aid = AidingVelocity::isotropic(s.theta.v, g.uniform(0.05, 5));

    // S1 = (Gv' Wv Gv)^-1 Gv' Wv, S2 = [0; I] selects the aiding rows.
    const int rows = 2 * m + n;
    const int cols = 2 * n + 2;
    Mat Gv = Mat::Zero(rows, cols);
    Gv.topRows(2 * m) = oracle::fd_jacobian(s.c.x, s.c.anchors, s.c.dt);
    Gv.bottomRows(n).middleCols(n + 1, n).setIdentity();
    Mat Wv = Mat::Zero(rows, rows);
    Wv.topLeftCorner(2 * m, 2 * m) = oracle::weights(s.c.sigma_d, s.c.sigma_rho).asDiagonal();
    Wv.bottomRightCorner(n, n) = aid.sigma_v.inverse();
    const Mat S1 = (Gv.transpose() * Wv * Gv).inverse() * Gv.transpose() * Wv;
    Mat S2 = Mat::Zero(rows, n);
    S2.bottomRows(n).setIdentity();
    const Mat S = S2.transpose() * S1.transpose() * S1 * S2;

    EXPECT_LT(rel_diff(bias_quadratic_form(s.theta, s.layout, s.noise, aid), S), 1e-5);

    const Vec dv = g.direction(n) * g.uniform(0.0, 50.0);
    const BiasPrediction p = bias_deviated_velocity(s.theta, s.layout, s.noise, aid, dv);
    const Vec ref = S1 * S2 * dv;
    EXPECT_LT((p.bias - ref).norm(), 1e-5 * ref.norm());
    EXPECT_NEAR(p.bias.squaredNorm(), dv.dot(S * dv), 1e-5 * p.bias.squaredNorm());

    const Vec rmse_sq = p.bias.array().square().matrix() + p.variance.diagonal();
    EXPECT_NEAR(p.rmse.position, std::sqrt(rmse_sq.head(n).sum()), 1e-12 * p.rmse.position);
    EXPECT_NEAR(p.rmse.clock_offset, std::sqrt(rmse_sq(n)), 1e-12 * p.rmse.clock_offset);
  }
}

TEST(Bias, VelocityBiasIsLinear) {
  const World s = square_world();
  const AidingVelocity aid = AidingVelocity::isotropic(s.theta.v, 1.0);
  Vec dv(2);
  dv << 3.0, -4.0;
  const Vec b1 = bias_deviated_velocity(s.theta, s.layout, s.noise, aid, dv).bias;
  const Vec b2 = bias_deviated_velocity(s.theta, s.layout, s.noise, aid, 2.0 * dv).bias;
  EXPECT_LT((b2 - 2.0 * b1).norm(), 1e-12 * b2.norm());
}

TEST(Bias, QuadraticLowerBoundProperty) {
  oracle::Gen g(49);
  for (int geo = 0; geo < 10; ++geo) {
    const int n = geo % 2 == 0 ? 2 : 3;
    const World s = make_world(g, n, g.integer(n + 2, 12));
    const AidingVelocity aid = AidingVelocity::isotropic(s.theta.v, g.uniform(0.05, 5));
    const Mat S = bias_quadratic_form(s.theta, s.layout, s.noise, aid);
    const double beta = Eigen::SelfAdjointEigenSolver<Mat>(S).eigenvalues().minCoeff();
    EXPECT_GT(beta, 0.0);
    for (int i = 0; i < 100; ++i) {
      const Vec dv = g.direction(n) * g.uniform(0.0, 60.0);
      const double sq = bias_deviated_velocity(s.theta, s.layout, s.noise, aid, dv).bias.squaredNorm();
      EXPECT_GE(sq, beta * dv.squaredNorm() - 1e-9);
    }
  }
}

TEST(Bias, DriftBiasMatchesExplicitAssembly) {
  oracle::Gen g(50);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = trial % 2 == 0 ? 2 : 3;
    const World s = make_world(g, n, g.integer(n + 2, 12));
    const double sigma_k = g.uniform(0.05, 5.0);
    const double dk = g.uniform(-60.0, 60.0);
    Mat Fk = oracle_fim(s.c);
    Fk(2 * n + 1, 2 * n + 1) += 1.0 / (sigma_k * sigma_k);
    const Vec ref = Fk.inverse().col(2 * n + 1) * (dk / (sigma_k * sigma_k));
    const BiasPrediction p = bias_deviated_drift(s.theta, s.layout, s.noise, AidingDrift{s.theta.k, sigma_k}, dk);
    EXPECT_LT((p.bias - ref).norm(), 1e-5 * ref.norm());
    EXPECT_LT(rel_diff(p.variance, Fk.inverse()), 1e-5);
  }
}

TEST(Bias, DriftBiasZeroAndLinear) {
  const World s = square_world();
  const AidingDrift aid{s.theta.k, 5.0};
  EXPECT_TRUE(bias_deviated_drift(s.theta, s.layout, s.noise, aid, 0.0).bias.isZero(0.0));
  const Vec b1 = bias_deviated_drift(s.theta, s.layout, s.noise, aid, 7.0).bias;
  const Vec b3 = bias_deviated_drift(s.theta, s.layout, s.noise, aid, 21.0).bias;
  EXPECT_LT((b3 - 3.0 * b1).norm(), 1e-12 * b3.norm());
}

TEST(Remarks, DefaultGeometryPassesAllChecks) {
  const World s = square_world();
  const RemarkReport r = remark_checks(s.theta, s.layout, s.noise, AidingVelocity::isotropic(s.theta.v, 1.0),
                                       AidingDrift{s.theta.k, 5.0});
  EXPECT_TRUE(r.doppler_gain);
  EXPECT_TRUE(r.velocity_gain);
  EXPECT_TRUE(r.drift_gain);
  EXPECT_TRUE(r.bias_bound);
  EXPECT_GT(r.doppler_crlb_margin, 0.0);
  EXPECT_GT(r.beta, 0.0);
  EXPECT_GE(r.min_eigen_margin(), -kPsdTolerance);
}

TEST(Remarks, HugeDopplerNoiseClosesTheGap) {
  World s = square_world();
  const AidingVelocity aid = AidingVelocity::isotropic(s.theta.v, 1.0);
  const AidingDrift aid_k{s.theta.k, 5.0};
  const double moderate = remark_checks(s.theta, s.layout, s.noise, aid, aid_k).doppler_crlb_margin;
  s.noise.sigma_d.setConstant(1e9);
  const RemarkReport r = remark_checks(s.theta, s.layout, s.noise, aid, aid_k);
  EXPECT_GE(r.doppler_info_margin, -kPsdTolerance);
  EXPECT_LT(std::abs(r.doppler_info_margin), 1e-12);
  EXPECT_LT(r.doppler_crlb_margin, 1e-6 * moderate);
}

TEST(Remarks, VagueAidingClosesTheGap) {
  const World s = square_world();
  const RemarkReport r = remark_checks(s.theta, s.layout, s.noise, AidingVelocity::isotropic(s.theta.v, 1e6),
                                       AidingDrift{s.theta.k, 1e6});
  EXPECT_TRUE(r.velocity_gain);
  EXPECT_TRUE(r.drift_gain);
  EXPECT_LT(std::abs(r.velocity_info_margin), 1e-11);
  EXPECT_LT(std::abs(r.velocity_cov_margin), 1e-6);
  EXPECT_LT(std::abs(r.drift_cov_margin), 1e-6);
}

TEST(Remarks, RandomInstancesProperty) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    RngStream rng = trial_stream(77, i);
    const RandomInstance inst = random_instance(rng, i % 2 == 0 ? 2 : 3);
    const RemarkReport r = remark_checks(inst.theta, inst.layout, inst.noise, inst.aiding_v, inst.aiding_k);
    EXPECT_TRUE(r.all_passed()) << "instance " << i;
    EXPECT_GE(r.min_eigen_margin(), -kPsdTolerance);
  }
}
