#include <gcoh/channels.hpp>
#include <gcoh/metrics.hpp>

#include "support/fock_oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace gcoh;

namespace {

const double kVs = db_to_variance(-2.95);
const double kVas = db_to_variance(4.15);

/// Full-matrix form of the channel: T V T^T + Lambda with T, Lambda embedded on one mode.
Eigen::MatrixXd channel_oracle(const Eigen::MatrixXd& v, double eta, double delta, int mode) {
  const Eigen::Index dim = v.rows();
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(dim, dim);
  for (int q = 0; q < 2; ++q) {
    t(2 * mode + q, 2 * mode + q) = std::sqrt(eta);
    lambda(2 * mode + q, 2 * mode + q) = (1.0 - eta) * (delta + 1.0);
  }
  return t * v * t.transpose() + lambda;
}

GaussianState random_state(int n_modes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> nu_dist(1.0, 3.0);
  std::normal_distribution<double> disp(0.0, 1.0);
  Eigen::VectorXd d(2 * n_modes);
  for (int k = 0; k < n_modes; ++k) d(2 * k) = d(2 * k + 1) = nu_dist(rng);
  const Eigen::MatrixXd s = oracle::random_symplectic(n_modes, rng);
  Eigen::MatrixXd v = s * d.asDiagonal() * s.transpose();
  v = 0.5 * (v + v.transpose()).eval();
  Eigen::VectorXd x(2 * n_modes);
  for (auto& xi : x) xi = disp(rng);
  return GaussianState(x, CovarianceMatrix(v));
}

}  // namespace

TEST(ThermalChannelType, ParameterChecks) {
  EXPECT_THROW(ThermalChannel(-0.1, 0.0), ParameterError);
  EXPECT_THROW(ThermalChannel(1.1, 0.0), ParameterError);
  EXPECT_THROW(ThermalChannel(0.5, -0.01), ParameterError);
  EXPECT_THROW(ThermalChannel(std::nan(""), 0.0), ParameterError);
  EXPECT_THROW(ThermalChannel::from_loss(1.5), ParameterError);
  const auto ch = ThermalChannel::from_loss(0.4, 0.74);
  EXPECT_DOUBLE_EQ(ch.eta(), 0.6);
  EXPECT_DOUBLE_EQ(ch.loss(), 0.4);
  EXPECT_DOUBLE_EQ(ch.added_noise(), 0.4 * 1.74);
}

TEST(ApplyChannel, UnitTransmissionIsIdentity) {
  std::mt19937_64 rng(1);
  for (double delta : {0.0, 0.74, 9.0}) {
    const auto st = random_state(2, rng);
    const auto out = apply_channel(st, ThermalChannel(1.0, delta), 1);
    EXPECT_EQ(out.cov(), st.cov());
    EXPECT_EQ(out.displacement(), st.displacement());
  }
}

TEST(ApplyChannel, SqueezedSourceReachesShotNoise) {
  const auto out = apply_channel(make_squeezed_state(kVs, kVas), ThermalChannel(0.6, 0.74), 0);
  EXPECT_NEAR(out.cov()(0, 0), 1.00020, 1e-5);
  EXPECT_NEAR(out.cov()(0, 0), 0.6 * kVs + 0.4 * 1.74, 1e-15);
  EXPECT_NEAR(out.cov()(1, 1), 0.6 * kVas + 0.4 * 1.74, 1e-15);
}

TEST(ApplyChannel, EprBlocksAfterLossOnSecondMode) {
  const auto st = make_epr_state(kVs, kVas);
  const auto out = apply_channel(st, ThermalChannel(0.6, 0.0), 1);
  const double a = 0.5 * (kVs + kVas);
  const double c = 0.5 * (kVs - kVas);
  const Eigen::Matrix2d z = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  EXPECT_TRUE(out.cov().block(0, 0).isApprox(st.cov().block(0, 0), 0.0));
  EXPECT_TRUE(out.cov().block(1, 1).isApprox((0.6 * a + 0.4) * Eigen::Matrix2d::Identity(), 1e-15));
  EXPECT_TRUE(out.cov().block(0, 1).isApprox(std::sqrt(0.6) * c * z, 1e-15));
  EXPECT_NEAR(out.cov()(2, 2), 0.6 * 1.55357 + 0.4, 5e-6);
  EXPECT_NEAR(out.cov()(0, 2), std::sqrt(0.6) * -1.04658, 1e-5);
}

TEST(ApplyChannel, MatchesFullMatrixProduct) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> eta(0.0, 1.0);
  std::uniform_real_distribution<double> delta(0.0, 10.0);
  for (int n_modes : {1, 2, 3}) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto st = random_state(n_modes, rng);
      const int mode = static_cast<int>(rng() % static_cast<unsigned>(n_modes));
      const double e = eta(rng), d = delta(rng);
      const auto out = apply_channel(st, ThermalChannel(e, d), static_cast<std::size_t>(mode));
      const Eigen::MatrixXd expected = channel_oracle(st.cov().matrix(), e, d, mode);
      EXPECT_LT((out.cov().matrix() - expected).cwiseAbs().maxCoeff(), 1e-12);
      Eigen::VectorXd x = st.displacement();
      x.segment(2 * mode, 2) *= std::sqrt(e);
      EXPECT_LT((out.displacement() - x).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
}

TEST(ApplyChannel, FullLossLeavesThermalMode) {
  std::mt19937_64 rng(3);
  for (double delta : {0.0, 0.5, 4.0}) {
    const auto st = random_state(2, rng);
    const auto out = apply_channel(st, ThermalChannel(0.0, delta), 0);
    EXPECT_TRUE(out.cov().block(0, 0).isApprox((delta + 1.0) * Eigen::Matrix2d::Identity(), 0.0));
    EXPECT_TRUE(out.cov().block(0, 1).isZero(0.0));
    EXPECT_TRUE(out.displacement().head(2).isZero(0.0));
  }
  const auto vac = apply_channel(make_squeezed_state(kVs, kVas), ThermalChannel(0.0, 0.0), 0);
  EXPECT_EQ(vac.cov(), CovarianceMatrix::identity(1));
}

TEST(ApplyChannel, ModeIndexOutOfRange) {
  EXPECT_THROW(apply_channel(GaussianState::vacuum(1), ThermalChannel::identity(), 1), IndexError);
  EXPECT_THROW(apply_channel(GaussianState::vacuum(2), ThermalChannel::identity(), 2), IndexError);
}

TEST(ApplyChannel, PreservesPhysicalityOnGrid) {
  std::mt19937_64 rng(4);
  const std::vector<GaussianState> inputs = {make_squeezed_state(kVs, kVas), make_epr_state(kVs, kVas),
                                             make_squeezed_state(0.05, 20.0), random_state(2, rng)};
  for (const auto& st : inputs) {
    for (int i = 0; i <= 40; ++i) {
      for (int j = 0; j <= 40; ++j) {
        const ThermalChannel ch(i / 40.0, 10.0 * j / 40.0);
        const auto out = apply_channel(st, ch, st.n_modes() - 1);
        EXPECT_TRUE(validate_physicality(out.cov()).physical) << i << "," << j;
      }
    }
  }
}

TEST(ApplyChannel, LossyChannelsCompose) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> eta(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto st = random_state(2, rng);
    const double e1 = eta(rng), e2 = eta(rng);
    const std::size_t mode = rng() % 2;
    const auto twice = apply_channel(apply_channel(st, ThermalChannel(e2, 0.0), mode), ThermalChannel(e1, 0.0), mode);
    const auto once = apply_channel(st, ThermalChannel(e1 * e2, 0.0), mode);
    EXPECT_LT((twice.cov().matrix() - once.cov().matrix()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((twice.displacement() - once.displacement()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ApplyChannel, CoherenceFallsWithExcessNoise) {
  for (const auto& st : {make_squeezed_state(kVs, kVas), make_epr_state(kVs, kVas)}) {
    for (double eta : {0.0, 0.3, 0.6, 0.9, 1.0}) {
      double prev = coherence(st).coherence_bits + 1e-12;
      for (int k = 0; k <= 10; ++k) {
        const double c = coherence(apply_channel(st, ThermalChannel(eta, 0.5 * k), st.n_modes() - 1)).coherence_bits;
        EXPECT_LE(c, prev + 1e-12) << "eta=" << eta << " delta=" << 0.5 * k;
        prev = c;
      }
    }
  }
}

TEST(ApplyTwoChannels, UnitTransmissionIsIdentity) {
  const auto st = make_epr_state(kVs, kVas);
  EXPECT_EQ(apply_two_channels(st, ThermalChannel::identity(), ThermalChannel::identity()).cov(), st.cov());
}

TEST(ApplyTwoChannels, EntanglementDiesNearReferenceNoise) {
  const ThermalChannel ch(0.6, 0.74);
  const auto report = ppt_value(apply_two_channels(make_epr_state(kVs, kVas), ch, ch));
  EXPECT_NEAR(report.ppt_value, 1.000, 0.002);
  EXPECT_NEAR(report.ppt_value, 1.000194, 1e-6);
  EXPECT_FALSE(report.entangled);
}

TEST(ApplyTwoChannels, OneNoisyModeAtReferenceNoise) {
  const auto out = apply_channel(make_epr_state(kVs, kVas), ThermalChannel(0.6, 2.14), 1);
  EXPECT_NEAR(ppt_value(out).ppt_value, 1.000, 0.002);
}

TEST(ApplyTwoChannels, OrderDoesNotMatter) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> eta(0.0, 1.0);
  std::uniform_real_distribution<double> delta(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto st = random_state(2, rng);
    const ThermalChannel a(eta(rng), delta(rng)), b(eta(rng), delta(rng));
    const auto ab = apply_two_channels(st, a, b);
    const auto ba = apply_channel(apply_channel(st, b, 1), a, 0);
    EXPECT_LT((ab.cov().matrix() - ba.cov().matrix()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ApplyTwoChannels, NeedsTwoModes) {
  EXPECT_THROW(apply_two_channels(GaussianState::vacuum(1), ThermalChannel::identity(), ThermalChannel::identity()),
               DimensionError);
}
