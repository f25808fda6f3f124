#pragma once

// Information metrics on Gaussian states. Entropies and coherence are in bits.

#include <gcoh/covariance.hpp>
#include <gcoh/errors.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

namespace gcoh {

namespace detail {

inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

}  // namespace detail

/// g(nu) = ((nu+1)/2) log2((nu+1)/2) - ((nu-1)/2) log2((nu-1)/2), with 0 log 0 = 0.
///
/// Entropy in bits of a single-mode thermal state with symplectic eigenvalue nu.
inline double entropy_term(double nu) {
  if (!(nu >= 1.0 - kPhysicalTolerance)) {
    std::ostringstream os;
    os << "entropy_term needs nu >= 1, got " << nu;
    throw DomainError(os.str());
  }
  if (nu <= 1.0) return 0.0;
  return detail::xlog2x(0.5 * (nu + 1.0)) - detail::xlog2x(0.5 * (nu - 1.0));
}

/// Von Neumann entropy (bits) from the clamped symplectic spectrum.
inline double von_neumann_entropy(const GaussianState& state) {
  double s = 0.0;
  for (double nu : symplectic_eigenvalues(state).eigenvalues) s += entropy_term(nu);
  return s;
}

/// Zero-displacement thermal state with each mode's mean photon number preserved:
/// V_th = (V_XX + V_YY + xbar_X^2 + xbar_Y^2)/2 on both quadratures of every mode.
inline GaussianState thermal_reference(const GaussianState& state) {
  const std::size_t n = state.n_modes();
  const auto& v = state.cov();
  const auto& x = state.displacement();
  Eigen::VectorXd diag(static_cast<Eigen::Index>(2 * n));
  for (std::size_t k = 0; k < n; ++k) {
    const auto ix = static_cast<Eigen::Index>(2 * k);
    const double mu = 0.5 * (v(2 * k, 2 * k) + v(2 * k + 1, 2 * k + 1) + x(ix) * x(ix) +
                             x(ix + 1) * x(ix + 1));
    diag(ix) = mu;
    diag(ix + 1) = mu;
  }
  return GaussianState(CovarianceMatrix(diag.asDiagonal().toDenseMatrix()), state.origin());
}

struct CoherenceReport {
  double coherence_bits = 0.0;
  double entropy_state = 0.0;
  double entropy_thermal_ref = 0.0;
  std::vector<double> thermal_ref_variances;
  std::vector<std::string> warnings;
};

/// Relative entropy of coherence S(thermal reference) - S(state).
inline CoherenceReport coherence(const GaussianState& state) {
  CoherenceReport report;
  const auto spectrum = symplectic_eigenvalues(state);
  if (spectrum.clamped_beyond_tolerance) {
    std::ostringstream os;
    os << "symplectic eigenvalue " << spectrum.min_raw << " clamped to 1";
    report.warnings.push_back(os.str());
  }
  for (double nu : spectrum.eigenvalues) report.entropy_state += entropy_term(nu);

  const auto reference = thermal_reference(state);
  for (std::size_t k = 0; k < reference.n_modes(); ++k) {
    const double mu = reference.cov()(2 * k, 2 * k);
    report.thermal_ref_variances.push_back(mu);
    // Only a reconstructed state can get here with mu < 1; treat like the spectrum.
    report.entropy_thermal_ref += entropy_term(std::max(mu, 1.0));
  }
  const double diff = report.entropy_thermal_ref - report.entropy_state;
  if (diff < -kPhysicalTolerance) {
    std::ostringstream os;
    os << "thermal reference entropy is below state entropy by " << -diff;
    // Sampling noise can do this to a reconstructed near-incoherent state.
    if (state.origin() != StateOrigin::Reconstructed) throw NumericalFailure(os.str());
    report.warnings.push_back(os.str() + "; coherence reported as 0");
  }
  report.coherence_bits = diff > 0.0 ? diff : 0.0;
  return report;
}

/// 10 log10 of the selected quadrature variance of a single-mode state.
inline double squeezing_db(const GaussianState& state, Quadrature q) {
  if (state.n_modes() != 1) {
    std::ostringstream os;
    os << "squeezing_db needs a single-mode state, got " << state.n_modes() << " modes";
    throw DimensionError(os.str());
  }
  const auto i = static_cast<std::size_t>(q);
  return variance_to_db(state.cov()(i, i));
}

/// Quadrature index 0 selects X, 1 selects Y.
inline double squeezing_db(const GaussianState& state, int quadrature_index) {
  if (quadrature_index != 0 && quadrature_index != 1) {
    std::ostringstream os;
    os << "quadrature index must be 0 (X) or 1 (Y), got " << quadrature_index;
    throw IndexError(os.str());
  }
  return squeezing_db(state, static_cast<Quadrature>(quadrature_index));
}

struct EntanglementReport {
  double ppt_value = 1.0;
  /// Strictly ppt_value < 1.
  bool entangled = false;
};

/// Smallest symplectic eigenvalue of the partial transpose of a two-mode state,
/// from Gamma = det A + det B - 2 det C and det V.
inline EntanglementReport ppt_value(const GaussianState& state) {
  if (state.n_modes() != 2) {
    std::ostringstream os;
    os << "ppt_value needs a two-mode state, got " << state.n_modes() << " modes";
    throw DimensionError(os.str());
  }
  const auto& cov = state.cov();
  const Eigen::Matrix2d a = cov.block(0, 0);
  const Eigen::Matrix2d b = cov.block(1, 1);
  const Eigen::Matrix2d c = cov.block(0, 1);
  const double gamma = a.determinant() + b.determinant() - 2.0 * c.determinant();
  const double det_v = cov.matrix().determinant();
  // sqrt(gamma^2 - 4 det V), taken from the partial transpose to avoid cancellation.
  Eigen::Matrix4d flip = Eigen::Matrix4d::Identity();
  flip(3, 3) = -1.0;
  const double root = detail::spectral_gap(flip * cov.matrix() * flip);
  // (gamma - root)/2 == 2 det V / (gamma + root); the latter has no cancellation.
  const double big = 0.5 * (gamma + root);
  const double small_sq = big > 0.0 ? det_v / big : 0.0;

  EntanglementReport report;
  report.ppt_value = std::sqrt(std::max(0.0, small_sq));
  report.entangled = report.ppt_value < 1.0;
  return report;
}

}  // namespace gcoh
