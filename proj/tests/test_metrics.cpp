#include <gcoh/channels.hpp>
#include <gcoh/metrics.hpp>

#include "support/fock_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace gcoh;

namespace {

const double kVs = db_to_variance(-2.95);
const double kVas = db_to_variance(4.15);

// Frozen from the truncated Fock-space evaluation (dim 60) and the closed form.
constexpr double kSqueezedCoherence = 0.5741394198148575;
constexpr double kEprCoherence = 1.148278839629715;

struct SqueezedThermal {
  double nu;
  double r;
  GaussianState state() const {
    return make_squeezed_state(nu * std::exp(-2.0 * r), nu * std::exp(2.0 * r));
  }
};

Eigen::Matrix2d rotation(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

GaussianState random_one_mode(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> nu_dist(1.0, 4.0);
  std::normal_distribution<double> disp(0.0, 1.5);
  const Eigen::MatrixXd s = oracle::random_symplectic(1, rng);
  Eigen::MatrixXd v = nu_dist(rng) * s * s.transpose();
  v = 0.5 * (v + v.transpose()).eval();
  return GaussianState(Eigen::Vector2d(disp(rng), disp(rng)), CovarianceMatrix(v));
}

double ppt_oracle(const Eigen::MatrixXd& v) {
  Eigen::Matrix4d flip = Eigen::Matrix4d::Identity();
  flip(3, 3) = -1.0;
  const auto nu = general_symplectic_eigenvalues(flip * v * flip);
  return *std::min_element(nu.begin(), nu.end());
}

}  // namespace

TEST(EntropyTerm, Values) {
  EXPECT_EQ(entropy_term(1.0), 0.0);
  EXPECT_NEAR(entropy_term(3.0), 2.0 * std::log2(2.0), 1e-15);  // 2 log2 2 - 1 log2 1
  EXPECT_NEAR(entropy_term(std::sqrt(kVs * kVas)), 0.38888042094335024, 1e-12);
  EXPECT_NEAR(entropy_term(std::sqrt(kVs * kVas)), 0.38899, 2e-4);
}

TEST(EntropyTerm, RejectsBelowVacuum) {
  EXPECT_THROW(entropy_term(0.5), DomainError);
  EXPECT_THROW(entropy_term(std::nan("")), DomainError);
  EXPECT_EQ(entropy_term(1.0 - 5e-10), 0.0);
}

TEST(EntropyTerm, StrictlyIncreasing) {
  double prev = entropy_term(1.0);
  for (double nu = 1.01; nu < 50.0; nu *= 1.07) {
    const double g = entropy_term(nu);
    EXPECT_GT(g, prev) << nu;
    prev = g;
  }
}

TEST(EntropyTerm, MatchesTruncatedThermalSpectrum) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> low(1.0, 5.0);
  std::uniform_real_distribution<double> high(5.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double nu = low(rng);
    EXPECT_NEAR(entropy_term(nu), oracle::thermal_entropy_fock(0.5 * (nu - 1.0), 60), 1e-4) << nu;
  }
  for (int trial = 0; trial < 100; ++trial) {
    const double nu = high(rng);
    EXPECT_NEAR(entropy_term(nu), oracle::thermal_entropy_fock(0.5 * (nu - 1.0), 150), 1e-4) << nu;
  }
}

TEST(ThermalReference, PreservesPhotonNumberPerMode) {
  const auto ref = thermal_reference(make_squeezed_state(kVs, kVas));
  EXPECT_DOUBLE_EQ(ref.cov()(0, 0), 0.5 * (kVs + kVas));
  EXPECT_DOUBLE_EQ(ref.cov()(1, 1), 0.5 * (kVs + kVas));
  EXPECT_EQ(ref.cov()(0, 1), 0.0);

  const GaussianState displaced(Eigen::Vector2d(1.0, 2.0), CovarianceMatrix::identity(1));
  EXPECT_DOUBLE_EQ(thermal_reference(displaced).cov()(0, 0), 3.5);
  EXPECT_TRUE(thermal_reference(displaced).displacement().isZero(0.0));

  const auto epr_ref = thermal_reference(make_epr_state(kVs, kVas));
  EXPECT_TRUE(epr_ref.cov().matrix().isApprox(1.553575135719988 * Eigen::Matrix4d::Identity(), 1e-14));
}

TEST(Coherence, VacuumIsZero) {
  EXPECT_EQ(coherence(GaussianState::vacuum(1)).coherence_bits, 0.0);
  EXPECT_EQ(coherence(GaussianState::vacuum(2)).coherence_bits, 0.0);
}

TEST(Coherence, ThermalStatesAreIncoherent) {
  for (double mu : {1.0, 1.5, 3.0, 12.0}) {
    const GaussianState th{CovarianceMatrix(Eigen::Matrix2d(mu * Eigen::Matrix2d::Identity()))};
    EXPECT_NEAR(coherence(th).coherence_bits, 0.0, 1e-13);
  }
}

TEST(Coherence, DefaultSqueezedSource) {
  const auto report = coherence(make_squeezed_state(kVs, kVas));
  EXPECT_NEAR(report.coherence_bits, kSqueezedCoherence, 1e-12);
  EXPECT_NEAR(report.coherence_bits, 0.57399, 5e-4);
  EXPECT_NEAR(report.entropy_state, 0.38888042094335024, 1e-12);
  EXPECT_TRUE(report.warnings.empty());
}

TEST(Coherence, DefaultEprSource) {
  const auto report = coherence(make_epr_state(kVs, kVas));
  EXPECT_NEAR(report.coherence_bits, kEprCoherence, 1e-12);
  EXPECT_NEAR(report.coherence_bits, 1.14797, 5e-4);
  ASSERT_EQ(report.thermal_ref_variances.size(), 2u);
}

TEST(Coherence, SqueezedSourceAgreesWithFockSpace) {
  const double r = 0.25 * std::log(kVas / kVs);
  const auto rho = oracle::squeezed_thermal_density(std::sqrt(kVs * kVas), r, 60, 120);
  EXPECT_NEAR(oracle::x_variance(rho), kVs, 1e-9);
  EXPECT_NEAR(oracle::coherence_thermal_reference_fock(rho), kSqueezedCoherence, 1e-9);
}

TEST(Coherence, FockSpaceOracleOnRandomSqueezedThermalStates) {
  // Truncation 60 resolves the photon-number tail while the antisqueezed variance
  // stays below 8; the squeezing range shrinks as nu grows toward 5.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> nu_dist(1.0, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const double nu = nu_dist(rng);
    const SqueezedThermal p{nu, unit(rng) * std::min(0.5, 0.5 * std::log(8.0 / nu))};
    const auto rho = oracle::squeezed_thermal_density(p.nu, p.r, 60, 140);
    EXPECT_NEAR(coherence(p.state()).coherence_bits, oracle::coherence_thermal_reference_fock(rho), 1e-4)
        << "nu=" << p.nu << " r=" << p.r;
    EXPECT_NEAR(von_neumann_entropy(p.state()), oracle::von_neumann_bits(rho), 1e-4);
  }
}

TEST(Coherence, FockSpaceOracleWithWideTruncation) {
  const SqueezedThermal p{4.98, 0.5};
  const auto rho = oracle::squeezed_thermal_density(p.nu, p.r, 150, 260);
  EXPECT_NEAR(coherence(p.state()).coherence_bits, oracle::coherence_thermal_reference_fock(rho), 1e-6);
}

TEST(Coherence, DephasingCoherenceIsNeverLarger) {
  // The thermal state maximizes entropy at fixed photon number, so the Fock-diagonal
  // form is bounded by the thermal-reference form.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> nu_dist(1.0, 3.0);
  std::uniform_real_distribution<double> r_dist(0.0, 0.5);
  for (int trial = 0; trial < 15; ++trial) {
    const auto rho = oracle::squeezed_thermal_density(nu_dist(rng), r_dist(rng), 60, 120);
    EXPECT_LE(oracle::coherence_fock_diagonal(rho), oracle::coherence_thermal_reference_fock(rho) + 1e-9);
  }
}

TEST(Coherence, NonNegativeOnRandomStates) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> nu_dist(1.0, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    EXPECT_GE(coherence(random_one_mode(rng)).coherence_bits, 0.0);
    Eigen::VectorXd d(4);
    d << 1, 1, 1, 1;
    d.head(2) *= nu_dist(rng);
    d.tail(2) *= nu_dist(rng);
    const Eigen::MatrixXd s = oracle::random_symplectic(2, rng);
    Eigen::MatrixXd v = s * d.asDiagonal() * s.transpose();
    v = 0.5 * (v + v.transpose()).eval();
    EXPECT_GE(coherence(GaussianState{CovarianceMatrix(v)}).coherence_bits, 0.0);
  }
}

TEST(Coherence, InvariantUnderPhaseRotation) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  for (int trial = 0; trial < 100; ++trial) {
    const auto st = random_one_mode(rng);
    const Eigen::Matrix2d r = rotation(angle(rng));
    Eigen::Matrix2d v = r * st.cov().matrix() * r.transpose();
    v = 0.5 * (v + v.transpose()).eval();
    const GaussianState rotated(r * st.displacement(), CovarianceMatrix(v));
    EXPECT_NEAR(coherence(rotated).coherence_bits, coherence(st).coherence_bits, 1e-10);
  }
}

TEST(Coherence, GrowsWithDisplacement) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto st = random_one_mode(rng);
    double prev = -1.0;
    for (double scale : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      const GaussianState shifted(scale * st.displacement(), st.cov());
      const double c = coherence(shifted).coherence_bits;
      EXPECT_GE(c, prev - 1e-12);
      prev = c;
    }
  }
}

TEST(Coherence, NonIncreasingUnderThermalChannels) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> eta(0.0, 1.0);
  std::uniform_real_distribution<double> noise(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto st = random_one_mode(rng);
    const ThermalChannel ch(eta(rng), noise(rng));
    EXPECT_LE(coherence(apply_channel(st, ch, 0)).coherence_bits, coherence(st).coherence_bits + 1e-10);
  }
}

TEST(SqueezingDb, Values) {
  const auto sq = make_squeezed_state(kVs, kVas);
  EXPECT_NEAR(squeezing_db(sq, Quadrature::X), -2.95, 1e-12);
  EXPECT_NEAR(squeezing_db(sq, 1), 4.15, 1e-12);
  EXPECT_EQ(squeezing_db(GaussianState::vacuum(1), 0), 0.0);
}

TEST(SqueezingDb, Errors) {
  EXPECT_THROW(squeezing_db(make_epr_state(kVs, kVas), 0), DimensionError);
  EXPECT_THROW(squeezing_db(GaussianState::vacuum(1), 2), IndexError);
  EXPECT_THROW(squeezing_db(GaussianState::vacuum(1), -1), IndexError);
}

TEST(PptValue, DefaultEprIsEntangled) {
  const auto report = ppt_value(make_epr_state(kVs, kVas));
  EXPECT_NEAR(report.ppt_value, 0.5069907082747044, 1e-12);
  EXPECT_NEAR(report.ppt_value, kVs, 1e-12);
  EXPECT_TRUE(report.entangled);
}

TEST(PptValue, VacuumIsSeparableAtExactlyOne) {
  const auto report = ppt_value(GaussianState::vacuum(2));
  EXPECT_EQ(report.ppt_value, 1.0);
  EXPECT_FALSE(report.entangled);
}

TEST(PptValue, NeedsTwoModes) {
  EXPECT_THROW(ppt_value(GaussianState::vacuum(1)), DimensionError);
  EXPECT_THROW(ppt_value(GaussianState::vacuum(3)), DimensionError);
}

TEST(PptValue, MatchesPartialTransposeSpectrum) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> nu_dist(1.0, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    Eigen::VectorXd d(4);
    const double n1 = nu_dist(rng), n2 = nu_dist(rng);
    d << n1, n1, n2, n2;
    const Eigen::MatrixXd s = oracle::random_symplectic(2, rng);
    Eigen::MatrixXd v = s * d.asDiagonal() * s.transpose();
    v = 0.5 * (v + v.transpose()).eval();
    const double expected = ppt_oracle(v);
    EXPECT_NEAR(ppt_value(GaussianState{CovarianceMatrix(v)}).ppt_value, expected, 1e-9 * (1.0 + expected));
  }
  for (double v : {0.1, 0.5, 0.9, 1.0, 1.5}) {
    const auto st = make_epr_state(v, 1.0 / v + 0.3);
    EXPECT_NEAR(ppt_value(st).ppt_value, ppt_oracle(st.cov().matrix()), 1e-12);
  }
}

TEST(PptValue, ProductStatesAreNeverEntangled) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::Matrix4d v = Eigen::Matrix4d::Zero();
    v.topLeftCorner(2, 2) = random_one_mode(rng).cov().matrix();
    v.bottomRightCorner(2, 2) = random_one_mode(rng).cov().matrix();
    const auto report = ppt_value(GaussianState{CovarianceMatrix(v)});
    EXPECT_GE(report.ppt_value, 1.0 - 1e-9);
  }
}
