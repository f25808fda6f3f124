#pragma once

// Single-mode thermal-noise channel:
//   xbar -> sqrt(eta) xbar,   V -> eta V + (1 - eta)(delta + 1) I.

#include <gcoh/covariance.hpp>
#include <gcoh/errors.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <sstream>

namespace gcoh {

/// Vacuum noise entering through the loss port, in SNL units.
inline constexpr double kVacuumNoise = 1.0;

class ThermalChannel {
 public:
  /// eta: transmission in [0, 1]; delta: excess noise >= 0 (SNL units).
  ThermalChannel(double eta, double delta) : eta_(eta), delta_(delta) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
      std::ostringstream os;
      os << "transmission eta must lie in [0, 1], got " << eta;
      throw ParameterError(os.str());
    }
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
      std::ostringstream os;
      os << "excess noise delta must be finite and >= 0, got " << delta;
      throw ParameterError(os.str());
    }
  }

  static ThermalChannel from_loss(double loss, double excess_noise = 0.0) {
    if (!(loss >= 0.0 && loss <= 1.0)) {
      std::ostringstream os;
      os << "loss must lie in [0, 1], got " << loss;
      throw ParameterError(os.str());
    }
    return ThermalChannel(1.0 - loss, excess_noise);
  }

  static ThermalChannel identity() { return ThermalChannel(1.0, 0.0); }

  double eta() const { return eta_; }
  double delta() const { return delta_; }
  double loss() const { return 1.0 - eta_; }
  /// Isotropic noise (1 - eta)(delta + 1) added to the mode's variances.
  double added_noise() const { return (1.0 - eta_) * (delta_ + kVacuumNoise); }

 private:
  double eta_;
  double delta_;
};

/// Sends one mode of `state` through `channel`; the other modes are untouched.
inline GaussianState apply_channel(const GaussianState& state, const ThermalChannel& channel,
                                   std::size_t mode_index) {
  const std::size_t n = state.n_modes();
  if (mode_index >= n) {
    std::ostringstream os;
    os << "mode index " << mode_index << " out of range for " << n << "-mode state";
    throw IndexError(os.str());
  }
  const double scale = std::sqrt(channel.eta());
  const auto m = static_cast<Eigen::Index>(2 * mode_index);

  Eigen::MatrixXd v = state.cov().matrix();
  // Cross blocks pick up sqrt(eta) once, the mode's own block eta.
  v.middleRows(m, 2) *= scale;
  v.middleCols(m, 2) *= scale;
  v.block(m, m, 2, 2) = channel.eta() * state.cov().matrix().block(m, m, 2, 2);
  v(m, m) += channel.added_noise();
  v(m + 1, m + 1) += channel.added_noise();

  Eigen::VectorXd x = state.displacement();
  x.segment(m, 2) *= scale;
  return GaussianState(std::move(x), CovarianceMatrix(std::move(v)), state.origin());
}

/// Independent channels on mode 0 (ch_a) and mode 1 (ch_b) of a two-mode state.
inline GaussianState apply_two_channels(const GaussianState& state, const ThermalChannel& ch_a,
                                        const ThermalChannel& ch_b) {
  if (state.n_modes() != 2) {
    std::ostringstream os;
    os << "apply_two_channels needs a two-mode state, got " << state.n_modes() << " modes";
    throw DimensionError(os.str());
  }
  return apply_channel(apply_channel(state, ch_a, 0), ch_b, 1);
}

}  // namespace gcoh
