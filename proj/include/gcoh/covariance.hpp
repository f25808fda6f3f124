#pragma once

// Covariance-matrix description of N-mode Gaussian states.
//
// Quadratures are ordered (X1, Y1, ..., XN, YN) with X = a + a^dagger and
// Y = i(a^dagger - a), so the vacuum has unit variance in every quadrature
// (shot-noise limit = 1, 0 dB).

#include <gcoh/errors.hpp>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace gcoh {

/// Symplectic eigenvalues in [1 - kPhysicalTolerance, 1) count as exactly 1.
inline constexpr double kPhysicalTolerance = 1e-9;
inline constexpr double kSymmetryTolerance = 1e-9;
/// Slack granted to covariance matrices estimated from finite samples.
inline constexpr double kReconstructedTolerance = 0.05;

enum class Quadrature { X = 0, Y = 1 };

inline char quadrature_name(Quadrature q) { return q == Quadrature::X ? 'X' : 'Y'; }

/// Index of (mode, quadrature) in the XYXY ordering.
inline std::size_t quadrature_index(std::size_t mode, Quadrature q) {
  return 2 * mode + static_cast<std::size_t>(q);
}

inline double db_to_variance(double db) { return std::pow(10.0, db / 10.0); }
inline double variance_to_db(double variance) { return 10.0 * std::log10(variance); }

/// Block-diagonal symplectic form with [[0, 1], [-1, 0]] per mode.
inline Eigen::MatrixXd symplectic_form(std::size_t n_modes) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

/// Real symmetric 2N x 2N second-moment matrix.
///
/// The constructor symmetrizes its input and rejects asymmetry beyond
/// kSymmetryTolerance or a non-positive diagonal. It does not check the
/// uncertainty relation; see validate_physicality and GaussianState.
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols() || m_.rows() % 2 != 0) {
      std::ostringstream os;
      os << "covariance matrix must be square with even nonzero dimension, got " << m_.rows() << "x"
         << m_.cols();
      throw DimensionError(os.str());
    }
    if (!m_.allFinite()) throw ParameterError("covariance matrix has non-finite entries");
    const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance) {
      std::ostringstream os;
      os << "covariance matrix is not symmetric (max |V_ij - V_ji| = " << asym << ")";
      throw ParameterError(os.str());
    }
    m_ = 0.5 * (m_ + m_.transpose()).eval();
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
      if (!(m_(i, i) > 0.0)) {
        std::ostringstream os;
        os << "covariance diagonal entry " << i << " is not positive (" << m_(i, i) << ")";
        throw UnphysicalState(os.str());
      }
    }
  }

  static CovarianceMatrix identity(std::size_t n_modes) {
    return CovarianceMatrix(Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes));
  }

  std::size_t n_modes() const { return static_cast<std::size_t>(m_.rows() / 2); }
  std::size_t dimension() const { return static_cast<std::size_t>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  /// 2x2 block coupling mode i (rows) to mode j (columns).
  Eigen::Matrix2d block(std::size_t i, std::size_t j) const {
    return m_.block<2, 2>(static_cast<Eigen::Index>(2 * i), static_cast<Eigen::Index>(2 * j));
  }

  friend bool operator==(const CovarianceMatrix& a, const CovarianceMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  Eigen::MatrixXd m_;
};

/// Moduli of the eigenvalues of i*Omega*V, one per conjugate pair, descending.
///
/// Works for any N and any real square matrix of even size; it is the
/// reference against which the one- and two-mode closed forms are checked.
inline std::vector<double> general_symplectic_eigenvalues(const Eigen::MatrixXd& v) {
  const auto n = static_cast<std::size_t>(v.rows() / 2);
  const Eigen::MatrixXd omega_v = symplectic_form(n) * v;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(omega_v, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("eigen-solver did not converge on Omega*V");
  }
  std::vector<double> moduli;
  moduli.reserve(2 * n);
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    moduli.push_back(std::abs(solver.eigenvalues()(k)));
  }
  std::sort(moduli.begin(), moduli.end(), std::greater<>());
  std::vector<double> nu;
  nu.reserve(n);
  for (std::size_t k = 0; k < n; ++k) nu.push_back(moduli[2 * k]);
  return nu;
}

namespace detail {

/// nu_+^2 - nu_-^2 for a 4x4 covariance, i.e. sqrt(Delta^2 - 4 det V). Evaluated as
/// sqrt(tr N^2) with N = M - tr(M)/4 I, M = -(Omega V)^2, which stays accurate
/// when the two eigenvalues nearly coincide.
inline double spectral_gap(const Eigen::Matrix4d& v) {
  const Eigen::Matrix4d ov = symplectic_form(2) * v;
  const Eigen::Matrix4d m = -(ov * ov);
  const Eigen::Matrix4d n = m - 0.25 * m.trace() * Eigen::Matrix4d::Identity();
  return std::sqrt(std::max(0.0, (n * n).trace()));
}

inline std::vector<double> two_mode_closed_form(const CovarianceMatrix& cov) {
  const Eigen::Matrix2d a = cov.block(0, 0);
  const Eigen::Matrix2d b = cov.block(1, 1);
  const Eigen::Matrix2d c = cov.block(0, 1);
  if (c.isZero(0.0)) {
    double nu_a = std::sqrt(a.determinant());
    double nu_b = std::sqrt(b.determinant());
    if (nu_a < nu_b) std::swap(nu_a, nu_b);
    return {nu_a, nu_b};
  }
  const double delta = a.determinant() + b.determinant() + 2.0 * c.determinant();
  const double det_v = cov.matrix().determinant();
  const double root = spectral_gap(cov.matrix());
  const double nu_plus_sq = 0.5 * (delta + root);
  // nu_-^2 = (delta - root)/2 rewritten as det V / nu_+^2 to avoid cancellation.
  const double nu_minus_sq = nu_plus_sq > 0.0 ? det_v / nu_plus_sq : 0.0;
  return {std::sqrt(nu_plus_sq), std::sqrt(std::max(0.0, nu_minus_sq))};
}

}  // namespace detail

/// Unclamped symplectic eigenvalues, descending. Closed forms for N <= 2.
inline std::vector<double> raw_symplectic_eigenvalues(const CovarianceMatrix& cov) {
  switch (cov.n_modes()) {
    case 1:
      return {std::sqrt(std::max(0.0, cov.matrix().determinant()))};
    case 2:
      return detail::two_mode_closed_form(cov);
    default:
      return general_symplectic_eigenvalues(cov.matrix());
  }
}

struct PhysicalityVerdict {
  bool physical = false;
  bool positive_definite = false;
  /// Smallest unclamped symplectic eigenvalue (NaN when V is not positive definite).
  double min_symplectic_eigenvalue = 0.0;
  std::string diagnostic;

  explicit operator bool() const { return physical; }
};

/// Checks V > 0 and nu_min >= 1 - tolerance.
inline PhysicalityVerdict validate_physicality(const CovarianceMatrix& cov,
                                               double tolerance = kPhysicalTolerance) {
  PhysicalityVerdict verdict;
  Eigen::LLT<Eigen::MatrixXd> llt(cov.matrix());
  if (llt.info() != Eigen::Success) {
    const double min_eig =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov.matrix(), Eigen::EigenvaluesOnly)
            .eigenvalues()
            .minCoeff();
    std::ostringstream os;
    os << "covariance matrix is not positive definite (smallest eigenvalue " << min_eig << ")";
    verdict.min_symplectic_eigenvalue = std::nan("");
    verdict.diagnostic = os.str();
    return verdict;
  }
  verdict.positive_definite = true;
  const auto nu = raw_symplectic_eigenvalues(cov);
  verdict.min_symplectic_eigenvalue = *std::min_element(nu.begin(), nu.end());
  verdict.physical = verdict.min_symplectic_eigenvalue >= 1.0 - tolerance;
  std::ostringstream os;
  if (verdict.physical) {
    os << "physical (min symplectic eigenvalue " << verdict.min_symplectic_eigenvalue << ")";
  } else {
    os << "symplectic eigenvalue " << verdict.min_symplectic_eigenvalue
       << " violates the uncertainty relation (nu >= 1, tolerance " << tolerance << ")";
  }
  verdict.diagnostic = os.str();
  return verdict;
}

/// Where a state came from; decides how much sub-vacuum noise is tolerated.
enum class StateOrigin { Constructed, Reconstructed };

inline double physicality_tolerance(StateOrigin origin) {
  return origin == StateOrigin::Constructed ? kPhysicalTolerance : kReconstructedTolerance;
}

/// Displacement plus covariance matrix. Immutable and physical by construction.
class GaussianState {
 public:
  GaussianState(Eigen::VectorXd displacement, CovarianceMatrix cov,
                StateOrigin origin = StateOrigin::Constructed)
      : displacement_(std::move(displacement)), cov_(std::move(cov)), origin_(origin) {
    if (static_cast<std::size_t>(displacement_.size()) != cov_.dimension()) {
      std::ostringstream os;
      os << "displacement has length " << displacement_.size() << ", expected " << cov_.dimension();
      throw DimensionError(os.str());
    }
    if (!displacement_.allFinite()) throw ParameterError("displacement has non-finite entries");
    const auto verdict = validate_physicality(cov_, physicality_tolerance(origin_));
    if (!verdict.physical) throw UnphysicalState(verdict.diagnostic);
    min_raw_nu_ = verdict.min_symplectic_eigenvalue;
  }

  explicit GaussianState(const CovarianceMatrix& cov, StateOrigin origin = StateOrigin::Constructed)
      : GaussianState(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cov.dimension())), cov, origin) {}

  static GaussianState vacuum(std::size_t n_modes) {
    return GaussianState(CovarianceMatrix::identity(n_modes));
  }

  std::size_t n_modes() const { return cov_.n_modes(); }
  const Eigen::VectorXd& displacement() const { return displacement_; }
  const CovarianceMatrix& cov() const { return cov_; }
  StateOrigin origin() const { return origin_; }
  /// Smallest symplectic eigenvalue before clamping.
  double min_raw_symplectic_eigenvalue() const { return min_raw_nu_; }

 private:
  Eigen::VectorXd displacement_;
  CovarianceMatrix cov_;
  StateOrigin origin_;
  double min_raw_nu_ = 1.0;
};

struct SymplecticSpectrum {
  /// Descending, each >= 1 after clamping.
  std::vector<double> eigenvalues;
  /// True when some raw eigenvalue sat below 1 and was raised to 1.
  bool clamped = false;
  /// True when that raw eigenvalue was below 1 - kPhysicalTolerance (only
  /// possible for reconstructed states).
  bool clamped_beyond_tolerance = false;
  double min_raw = 1.0;
};

inline SymplecticSpectrum symplectic_eigenvalues(const GaussianState& state) {
  SymplecticSpectrum spectrum;
  spectrum.eigenvalues = raw_symplectic_eigenvalues(state.cov());
  spectrum.min_raw = spectrum.eigenvalues.back();
  for (double& nu : spectrum.eigenvalues) {
    if (nu < 1.0) {
      spectrum.clamped = true;
      if (nu < 1.0 - kPhysicalTolerance) spectrum.clamped_beyond_tolerance = true;
      nu = 1.0;
    }
  }
  return spectrum;
}

/// Single-mode state with diag(v_s, v_as) covariance and zero displacement.
inline GaussianState make_squeezed_state(double v_s, double v_as) {
  if (!(v_s > 0.0) || !(v_as > 0.0)) {
    throw UnphysicalState("squeezed-state variances must be positive");
  }
  if (v_s * v_as < 1.0 - kPhysicalTolerance) {
    std::ostringstream os;
    os << "v_s * v_as = " << v_s * v_as << " violates the uncertainty relation";
    throw UnphysicalState(os.str());
  }
  Eigen::Matrix2d v = Eigen::Vector2d(v_s, v_as).asDiagonal();
  return GaussianState(CovarianceMatrix(v));
}

inline GaussianState make_squeezed_state_db(double squeezed_db, double antisqueezed_db) {
  return make_squeezed_state(db_to_variance(squeezed_db), db_to_variance(antisqueezed_db));
}

/// Two-mode EPR state [[a I, c Z], [c Z, a I]], a = (v_s + v_as)/2, c = (v_s - v_as)/2.
inline GaussianState make_epr_state(double v_s, double v_as) {
  if (!(v_s > 0.0) || !(v_as > 0.0)) {
    throw UnphysicalState("EPR source variances must be positive");
  }
  if (v_s * v_as < 1.0 - kPhysicalTolerance) {
    std::ostringstream os;
    os << "v_s * v_as = " << v_s * v_as << " violates the uncertainty relation";
    throw UnphysicalState(os.str());
  }
  const double a = 0.5 * (v_s + v_as);
  const double c = 0.5 * (v_s - v_as);
  Eigen::Matrix4d v;
  // clang-format off
  v << a,  0,  c,  0,
       0,  a,  0, -c,
       c,  0,  a,  0,
       0, -c,  0,  a;
  // clang-format on
  return GaussianState(CovarianceMatrix(v));
}

inline GaussianState make_epr_state_db(double squeezed_db, double antisqueezed_db) {
  return make_epr_state(db_to_variance(squeezed_db), db_to_variance(antisqueezed_db));
}

}  // namespace gcoh
