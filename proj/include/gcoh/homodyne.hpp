#pragma once

// Synthetic homodyne detection and covariance-matrix reconstruction.
//
// A homodyne detector reads one quadrature of one mode at a time, so a
// joint acquisition can hold X and Y of *different* modes but never both
// quadratures of the same mode. Same-mode X-Y covariances are therefore
// never measured; reconstruction fixes them to 0.

#include <gcoh/covariance.hpp>
#include <gcoh/errors.hpp>
#include <gcoh/io.hpp>
#include <gcoh/metrics.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gcoh {

/// Points recorded per acquisition in the reference experiment.
inline constexpr std::size_t kDefaultSampleCount = 500000;
inline constexpr std::size_t kDefaultBlocks = 100;

struct QuadratureLabel {
  std::size_t mode = 0;  // 0-based
  Quadrature quadrature = Quadrature::X;

  std::size_t index() const { return quadrature_index(mode, quadrature); }

  /// "X1", "Y2", ...: 1-based mode number in text.
  std::string str() const { return quadrature_name(quadrature) + std::to_string(mode + 1); }

  static QuadratureLabel parse(std::string_view text, std::size_t line = 0) {
    if (text.size() < 2 || (text[0] != 'X' && text[0] != 'Y')) {
      throw FormatError("invalid quadrature label '" + std::string(text) + "'", line);
    }
    std::size_t number = 0;
    for (char ch : text.substr(1)) {
      if (ch < '0' || ch > '9') {
        throw FormatError("invalid quadrature label '" + std::string(text) + "'", line);
      }
      number = number * 10 + static_cast<std::size_t>(ch - '0');
    }
    if (number == 0) throw FormatError("quadrature labels are 1-based: '" + std::string(text) + "'", line);
    return {number - 1, text[0] == 'X' ? Quadrature::X : Quadrature::Y};
  }

  friend auto operator<=>(const QuadratureLabel& a, const QuadratureLabel& b) {
    return a.index() <=> b.index();
  }
  friend bool operator==(const QuadratureLabel& a, const QuadratureLabel& b) {
    return a.index() == b.index();
  }
};

/// Checks that one joint row can be measured simultaneously. Returns an
/// empty string when it can, otherwise the reason.
inline std::string joint_row_problem(const std::vector<QuadratureLabel>& row, std::size_t n_modes) {
  if (row.empty()) return "joint row is empty";
  std::set<std::size_t> modes;
  for (const auto& label : row) {
    if (label.mode >= n_modes) {
      return "label " + label.str() + " refers to a mode beyond " + std::to_string(n_modes);
    }
    if (!modes.insert(label.mode).second) {
      return "joint row measures mode " + std::to_string(label.mode + 1) +
             " twice (X and Y of one mode do not commute; duplicates are redundant)";
    }
  }
  return {};
}

/// Which quadratures are recorded together. Each row is one simultaneous
/// acquisition by one detector per mode.
class AcquisitionPlan {
 public:
  AcquisitionPlan() = default;
  explicit AcquisitionPlan(std::vector<std::vector<QuadratureLabel>> rows) : rows_(std::move(rows)) {}

  /// Every entry except same-mode X-Y: all X jointly, all Y jointly, and
  /// (X_i, Y_j), (Y_i, X_j) pairs for i < j.
  static AcquisitionPlan full(std::size_t n_modes) {
    std::vector<std::vector<QuadratureLabel>> rows;
    std::vector<QuadratureLabel> xs, ys;
    for (std::size_t k = 0; k < n_modes; ++k) {
      xs.push_back({k, Quadrature::X});
      ys.push_back({k, Quadrature::Y});
    }
    rows.push_back(xs);
    rows.push_back(ys);
    for (std::size_t i = 0; i < n_modes; ++i) {
      for (std::size_t j = i + 1; j < n_modes; ++j) {
        rows.push_back({{i, Quadrature::X}, {j, Quadrature::Y}});
        rows.push_back({{i, Quadrature::Y}, {j, Quadrature::X}});
      }
    }
    return AcquisitionPlan(std::move(rows));
  }

  /// Amplitude quadratures jointly and phase quadratures jointly, nothing else.
  static AcquisitionPlan amplitude_phase(std::size_t n_modes) {
    auto plan = full(n_modes);
    plan.rows_.resize(2);
    return plan;
  }

  static AcquisitionPlan from_name(std::string_view name, std::size_t n_modes) {
    if (name == "full") return full(n_modes);
    if (name == "amplitude_phase") return amplitude_phase(n_modes);
    throw PlanError("unknown acquisition plan '" + std::string(name) +
                    "' (expected full or amplitude_phase)");
  }

  const std::vector<std::vector<QuadratureLabel>>& rows() const { return rows_; }

  void validate(std::size_t n_modes) const {
    if (rows_.empty()) throw PlanError("acquisition plan has no rows");
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (auto problem = joint_row_problem(rows_[r], n_modes); !problem.empty()) {
        throw PlanError("plan row " + std::to_string(r) + ": " + problem);
      }
    }
  }

 private:
  std::vector<std::vector<QuadratureLabel>> rows_;
};

/// One simultaneous recording; samples[c] is the time series of columns[c].
struct JointAcquisition {
  std::vector<QuadratureLabel> columns;
  std::vector<std::vector<double>> samples;

  std::size_t length() const { return samples.empty() ? 0 : samples.front().size(); }

  friend bool operator==(const JointAcquisition&, const JointAcquisition&) = default;
};

struct QuadratureSampleSet {
  std::size_t n_modes = 0;
  std::vector<JointAcquisition> acquisitions;
  std::optional<std::uint64_t> rng_seed;

  /// Length of the shortest acquisition.
  std::size_t sample_count() const {
    std::size_t n = 0;
    for (std::size_t a = 0; a < acquisitions.size(); ++a) {
      n = a == 0 ? acquisitions[a].length() : std::min(n, acquisitions[a].length());
    }
    return n;
  }

  friend bool operator==(const QuadratureSampleSet&, const QuadratureSampleSet&) = default;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Independent seed for stream `stream` (acquisition row, grid point) of a base seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return detail::splitmix64(detail::splitmix64(seed) ^ stream);
}

/// Draws `n` i.i.d. samples per plan row from N(xbar_sub, V_sub).
inline QuadratureSampleSet sample_quadratures(const GaussianState& state, std::size_t n,
                                              std::uint64_t seed, const AcquisitionPlan& plan) {
  if (n == 0) throw ParameterError("sample count must be positive");
  plan.validate(state.n_modes());

  QuadratureSampleSet set;
  set.n_modes = state.n_modes();
  set.rng_seed = seed;
  const auto& v = state.cov().matrix();
  const auto& x = state.displacement();

  for (std::size_t r = 0; r < plan.rows().size(); ++r) {
    const auto& row = plan.rows()[r];
    const auto k = static_cast<Eigen::Index>(row.size());
    Eigen::MatrixXd sub(k, k);
    Eigen::VectorXd mean(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto ii = static_cast<Eigen::Index>(row[static_cast<std::size_t>(i)].index());
      mean(i) = x(ii);
      for (Eigen::Index j = 0; j < k; ++j) {
        sub(i, j) = v(ii, static_cast<Eigen::Index>(row[static_cast<std::size_t>(j)].index()));
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success) {
      throw NumericalFailure("Cholesky factorization of plan row " + std::to_string(r) + " failed");
    }
    const Eigen::MatrixXd chol = llt.matrixL();

    std::mt19937_64 rng(derive_seed(seed, r));
    std::normal_distribution<double> normal(0.0, 1.0);
    JointAcquisition acq;
    acq.columns = row;
    acq.samples.assign(row.size(), std::vector<double>(n));
    Eigen::VectorXd z(k);
    for (std::size_t t = 0; t < n; ++t) {
      for (Eigen::Index i = 0; i < k; ++i) z(i) = normal(rng);
      const Eigen::VectorXd y = mean + chol * z;
      for (Eigen::Index i = 0; i < k; ++i) acq.samples[static_cast<std::size_t>(i)][t] = y(i);
    }
    set.acquisitions.push_back(std::move(acq));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Estimators

/// Sum form: V_ij = [Var(x_i + x_j) - Var(x_i) - Var(x_j)] / 2.
inline double covariance_from_sum_variance(double var_sum, double var_i, double var_j) {
  return 0.5 * (var_sum - var_i - var_j);
}

/// Difference form: V_ij = -[Var(x_i - x_j) - Var(x_i) - Var(x_j)] / 2.
inline double covariance_from_difference_variance(double var_diff, double var_i, double var_j) {
  return -0.5 * (var_diff - var_i - var_j);
}

namespace detail {

struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

inline double mean_of(const std::vector<double>& s, Range r) {
  double acc = 0.0;
  for (std::size_t t = r.begin; t < r.end; ++t) acc += s[t];
  return acc / static_cast<double>(r.size());
}

/// Unbiased sample variance, two-pass.
inline double variance_of(const std::vector<double>& s, Range r, double mean) {
  double acc = 0.0;
  for (std::size_t t = r.begin; t < r.end; ++t) {
    const double d = s[t] - mean;
    acc += d * d;
  }
  return acc / static_cast<double>(r.size() - 1);
}

/// Unbiased variance of s_a + sign * s_b.
inline double combined_variance(const std::vector<double>& a, const std::vector<double>& b,
                                double sign, Range r, double mean_a, double mean_b) {
  const double m = mean_a + sign * mean_b;
  double acc = 0.0;
  for (std::size_t t = r.begin; t < r.end; ++t) {
    const double d = a[t] + sign * b[t] - m;
    acc += d * d;
  }
  return acc / static_cast<double>(r.size() - 1);
}

inline double direct_covariance(const std::vector<double>& a, const std::vector<double>& b,
                                Range r, double mean_a, double mean_b) {
  double acc = 0.0;
  for (std::size_t t = r.begin; t < r.end; ++t) acc += (a[t] - mean_a) * (b[t] - mean_b);
  return acc / static_cast<double>(r.size() - 1);
}

struct Moments {
  Eigen::MatrixXd cov;
  Eigen::VectorXd mean;
  std::vector<std::pair<QuadratureLabel, QuadratureLabel>> missing;
};

/// Range of block `block` out of `blocks` for a record of `length` samples;
/// block == blocks selects the whole record.
inline Range block_range(std::size_t length, std::size_t block, std::size_t blocks) {
  if (block == blocks) return {0, length};
  return {block * length / blocks, (block + 1) * length / blocks};
}

/// Moments from every record, restricted to one block (or all samples).
/// `check_identity` verifies the sum-form and difference-form estimators against the
/// direct sample covariance.
inline Moments estimate_moments(const QuadratureSampleSet& set, std::size_t block,
                                std::size_t blocks, bool check_identity) {
  const auto dim = static_cast<Eigen::Index>(2 * set.n_modes);
  Eigen::VectorXd mean_acc = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd mean_weight = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd cov_acc = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd cov_weight = Eigen::MatrixXd::Zero(dim, dim);

  for (const auto& acq : set.acquisitions) {
    const Range r = block_range(acq.length(), block, blocks);
    const auto n = static_cast<double>(r.size());
    const std::size_t k = acq.columns.size();
    std::vector<double> means(k), vars(k);
    for (std::size_t c = 0; c < k; ++c) {
      means[c] = mean_of(acq.samples[c], r);
      vars[c] = variance_of(acq.samples[c], r, means[c]);
      const auto i = static_cast<Eigen::Index>(acq.columns[c].index());
      mean_acc(i) += n * means[c];
      mean_weight(i) += n;
      cov_acc(i, i) += (n - 1.0) * vars[c];
      cov_weight(i, i) += n - 1.0;
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t d = c + 1; d < k; ++d) {
        const double var_sum = combined_variance(acq.samples[c], acq.samples[d], +1.0, r,
                                                 means[c], means[d]);
        const double v_ij = covariance_from_sum_variance(var_sum, vars[c], vars[d]);
        if (check_identity) {
          const double direct = direct_covariance(acq.samples[c], acq.samples[d], r, means[c],
                                                  means[d]);
          const double var_diff = combined_variance(acq.samples[c], acq.samples[d], -1.0, r,
                                                    means[c], means[d]);
          const double v_ij_diff = covariance_from_difference_variance(var_diff, vars[c], vars[d]);
          const double scale = std::max({1.0, var_sum, var_diff});
          if (std::abs(v_ij - direct) > 1e-12 * scale || std::abs(v_ij_diff - direct) > 1e-12 * scale) {
            std::ostringstream os;
            os << "sum/difference-variance estimators disagree with the direct covariance for "
               << acq.columns[c].str() << "," << acq.columns[d].str() << " (" << v_ij << ", "
               << v_ij_diff << " vs " << direct << ")";
            throw NumericalFailure(os.str());
          }
        }
        const auto i = static_cast<Eigen::Index>(acq.columns[c].index());
        const auto j = static_cast<Eigen::Index>(acq.columns[d].index());
        cov_acc(i, j) += (n - 1.0) * v_ij;
        cov_weight(i, j) += n - 1.0;
      }
    }
  }

  Moments m;
  m.cov = Eigen::MatrixXd::Zero(dim, dim);
  m.mean = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (mean_weight(i) > 0.0) m.mean(i) = mean_acc(i) / mean_weight(i);
    for (Eigen::Index j = i; j < dim; ++j) {
      const double w = cov_weight(i, j) + (i == j ? 0.0 : cov_weight(j, i));
      const double acc = cov_acc(i, j) + (i == j ? 0.0 : cov_acc(j, i));
      const bool same_mode_xy = (i / 2 == j / 2) && i != j;
      if (w > 0.0) {
        m.cov(i, j) = m.cov(j, i) = acc / w;
      } else if (!same_mode_xy) {
        m.missing.emplace_back(
            QuadratureLabel{static_cast<std::size_t>(i / 2), static_cast<Quadrature>(i % 2)},
            QuadratureLabel{static_cast<std::size_t>(j / 2), static_cast<Quadrature>(j % 2)});
      }
    }
  }
  return m;
}

inline void check_blockable(const QuadratureSampleSet& set, std::size_t blocks) {
  if (blocks < 2) throw InsufficientDataError("need at least 2 blocks");
  for (const auto& acq : set.acquisitions) {
    if (acq.length() < 2 * blocks) {
      std::ostringstream os;
      os << "acquisition has " << acq.length() << " samples; " << blocks
         << " blocks need at least " << 2 * blocks;
      throw InsufficientDataError(os.str());
    }
  }
}

inline void check_sample_set(const QuadratureSampleSet& set) {
  if (set.n_modes == 0) throw MissingDataError("sample set declares zero modes");
  if (set.acquisitions.empty()) throw MissingDataError("sample set has no acquisitions");
  for (const auto& acq : set.acquisitions) {
    if (auto problem = joint_row_problem(acq.columns, set.n_modes); !problem.empty()) {
      throw PlanError(problem);
    }
    if (acq.samples.size() != acq.columns.size()) {
      throw LengthMismatchError("acquisition has " + std::to_string(acq.samples.size()) +
                                " sample vectors for " + std::to_string(acq.columns.size()) +
                                " columns");
    }
    for (const auto& s : acq.samples) {
      if (s.size() != acq.length()) {
        throw LengthMismatchError("ragged joint acquisition: columns differ in length");
      }
    }
    if (acq.length() < 2) throw InsufficientDataError("acquisition has fewer than 2 samples");
  }
}

}  // namespace detail

struct ReconstructionOptions {
  /// Zero-fill cross-mode entries no plan row measured, instead of failing.
  bool assume_zero_unmeasured = false;
  std::size_t blocks = kDefaultBlocks;
  bool with_standard_errors = true;
};

struct ReconstructedCovariance {
  GaussianState state;
  /// Per-entry standard errors from non-overlapping blocks; 0 where the
  /// entry is fixed by convention.
  Eigen::MatrixXd standard_errors;
  std::size_t n_samples = 0;
  std::vector<std::string> warnings;

  const CovarianceMatrix& cov() const { return state.cov(); }
};

namespace detail {

inline std::string describe_missing(
    const std::vector<std::pair<QuadratureLabel, QuadratureLabel>>& missing) {
  std::string out;
  for (const auto& [a, b] : missing) {
    if (!out.empty()) out += ", ";
    if (a == b) {
      out += a.str();
    } else {
      out += a.str() + "-" + b.str();
    }
  }
  return out;
}

/// Turns raw moments into a state, applying the missing-data and clamping policy.
inline GaussianState state_from_moments(Moments m, const ReconstructionOptions& options,
                                        std::vector<std::string>* warnings) {
  bool diagonal_missing = false;
  for (const auto& [a, b] : m.missing) diagonal_missing |= (a == b);
  if (!m.missing.empty() && (diagonal_missing || !options.assume_zero_unmeasured)) {
    throw MissingDataError("no joint acquisition covers: " + describe_missing(m.missing));
  }
  if (!m.missing.empty() && warnings) {
    warnings->push_back("unmeasured entries set to 0: " + describe_missing(m.missing));
  }
  GaussianState state(std::move(m.mean), CovarianceMatrix(std::move(m.cov)),
                      StateOrigin::Reconstructed);
  if (warnings && state.min_raw_symplectic_eigenvalue() < 1.0 - kPhysicalTolerance) {
    std::ostringstream os;
    os << "reconstructed matrix has symplectic eigenvalue " << state.min_raw_symplectic_eigenvalue()
       << " < 1; clamped to 1 for entropies";
    warnings->push_back(os.str());
  }
  return state;
}

}  // namespace detail

/// Covariance matrix from homodyne records: diagonal = sample variances,
/// off-diagonal = sum form on jointly acquired rows, errors from blocking.
inline ReconstructedCovariance reconstruct_covariance(const QuadratureSampleSet& samples,
                                                      const ReconstructionOptions& options = {}) {
  detail::check_sample_set(samples);
  if (options.with_standard_errors) detail::check_blockable(samples, options.blocks);

  std::vector<std::string> warnings;
  auto full = detail::estimate_moments(samples, options.blocks, options.blocks, true);
  const auto dim = full.cov.rows();
  auto state = detail::state_from_moments(std::move(full), options, &warnings);

  Eigen::MatrixXd se = Eigen::MatrixXd::Zero(dim, dim);
  if (options.with_standard_errors) {
    const auto b = static_cast<double>(options.blocks);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t k = 0; k < options.blocks; ++k) {
      const auto m = detail::estimate_moments(samples, k, options.blocks, false);
      sum += m.cov;
      sum_sq += m.cov.cwiseProduct(m.cov);
    }
    const Eigen::MatrixXd mean = sum / b;
    const Eigen::MatrixXd var = ((sum_sq - b * mean.cwiseProduct(mean)) / (b - 1.0)).cwiseMax(0.0);
    se = var.cwiseSqrt() / std::sqrt(b);
  }
  return {std::move(state), std::move(se), samples.sample_count(), std::move(warnings)};
}

// ---------------------------------------------------------------------------
// Error bars

enum class MetricKind { Variance, Covariance, SqueezingDb, Coherence, Ppt };

struct MetricSelector {
  MetricKind kind = MetricKind::Coherence;
  QuadratureLabel first{};
  QuadratureLabel second{};

  static MetricSelector variance(QuadratureLabel q) { return {MetricKind::Variance, q, q}; }
  static MetricSelector covariance(QuadratureLabel a, QuadratureLabel b) {
    return {MetricKind::Covariance, a, b};
  }
  static MetricSelector squeezing_db(QuadratureLabel q) { return {MetricKind::SqueezingDb, q, q}; }
  static MetricSelector coherence() { return {MetricKind::Coherence, {}, {}}; }
  static MetricSelector ppt() { return {MetricKind::Ppt, {}, {}}; }
};

struct ErrorBar {
  double value = 0.0;
  /// One standard deviation: sd(block estimates) / sqrt(blocks).
  double sigma = 0.0;
};

namespace detail {

inline double metric_from_moments(const Moments& m, const MetricSelector& metric,
                                  const ReconstructionOptions& options) {
  const auto entry = [&](QuadratureLabel a, QuadratureLabel b) {
    const auto n_modes = static_cast<std::size_t>(m.cov.rows() / 2);
    if (a.mode >= n_modes || b.mode >= n_modes) {
      throw IndexError("metric refers to a mode outside the sample set");
    }
    for (const auto& [p, q] : m.missing) {
      if ((p == a && q == b) || (p == b && q == a)) {
        throw MissingDataError("no joint acquisition covers " + a.str() + "-" + b.str());
      }
    }
    return m.cov(static_cast<Eigen::Index>(a.index()), static_cast<Eigen::Index>(b.index()));
  };
  switch (metric.kind) {
    case MetricKind::Variance:
      return entry(metric.first, metric.first);
    case MetricKind::Covariance:
      return entry(metric.first, metric.second);
    case MetricKind::SqueezingDb:
      return variance_to_db(entry(metric.first, metric.first));
    case MetricKind::Coherence:
      return coherence(state_from_moments(m, options, nullptr)).coherence_bits;
    case MetricKind::Ppt:
      return ppt_value(state_from_moments(m, options, nullptr)).ppt_value;
  }
  throw ParameterError("unknown metric");
}

}  // namespace detail

/// Metric on the full record plus its blocking standard deviation.
inline ErrorBar estimate_error_bars(const QuadratureSampleSet& samples, const MetricSelector& metric,
                                    const ReconstructionOptions& options = {}) {
  detail::check_sample_set(samples);
  detail::check_blockable(samples, options.blocks);
  ErrorBar bar;
  bar.value = detail::metric_from_moments(
      detail::estimate_moments(samples, options.blocks, options.blocks, false), metric, options);
  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<double> estimates(options.blocks);
  for (std::size_t k = 0; k < options.blocks; ++k) {
    estimates[k] = detail::metric_from_moments(
        detail::estimate_moments(samples, k, options.blocks, false), metric, options);
    sum += estimates[k];
  }
  const auto b = static_cast<double>(options.blocks);
  const double mean = sum / b;
  for (double e : estimates) sum_sq += (e - mean) * (e - mean);
  bar.sigma = std::sqrt(sum_sq / (b - 1.0)) / std::sqrt(b);
  return bar;
}

// ---------------------------------------------------------------------------
// CSV sample files
//
//   # modes=2 ordering=XYXY columns=X1,X2 seed=42
//   0.8134,-1.2201
//   ...
//
// Each header line opens one joint acquisition; a file may hold several.

inline void write_samples(std::ostream& out, const QuadratureSampleSet& set) {
  for (const auto& acq : set.acquisitions) {
    out << "# modes=" << set.n_modes << " ordering=" << kOrdering << " columns=";
    for (std::size_t c = 0; c < acq.columns.size(); ++c) {
      out << (c ? "," : "") << acq.columns[c].str();
    }
    if (set.rng_seed) out << " seed=" << *set.rng_seed;
    out << '\n';
    std::string line;
    for (std::size_t t = 0; t < acq.length(); ++t) {
      line.clear();
      for (std::size_t c = 0; c < acq.columns.size(); ++c) {
        if (c) line += ',';
        line += format_double(acq.samples[c][t]);
      }
      line += '\n';
      out << line;
    }
  }
}

inline void write_samples(const std::filesystem::path& path, const QuadratureSampleSet& set) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_samples(out, set);
  if (!out) throw IoError("write failed for " + path.string());
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                     : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline std::uint64_t parse_unsigned(std::string_view text, std::size_t line, const char* what) {
  std::uint64_t value = 0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || result.ec != std::errc{} || result.ptr != text.data() + text.size()) {
    throw FormatError(std::string("invalid ") + what + " '" + std::string(text) + "'", line);
  }
  return value;
}

}  // namespace detail

inline QuadratureSampleSet parse_samples(std::istream& in) {
  QuadratureSampleSet set;
  bool have_header = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    if (line.front() == '#') {
      std::optional<std::size_t> modes;
      std::optional<std::string> ordering;
      std::optional<std::string> columns;
      std::optional<std::uint64_t> seed;
      std::istringstream fields{std::string(line.substr(1))};
      std::string field;
      while (fields >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) throw FormatError("header field without '=': " + field, line_no);
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "modes") {
          modes = detail::parse_unsigned(value, line_no, "mode count");
        } else if (key == "ordering") {
          ordering = value;
        } else if (key == "columns") {
          columns = value;
        } else if (key == "seed") {
          seed = detail::parse_unsigned(value, line_no, "seed");
        } else {
          throw FormatError("unknown header field '" + key + "'", line_no);
        }
      }
      if (!modes || *modes == 0) throw FormatError("header needs modes=<positive int>", line_no);
      if (!ordering) throw FormatError("header needs ordering=XYXY", line_no);
      if (*ordering != kOrdering) {
        throw FormatError("unsupported ordering '" + *ordering + "', expected XYXY",
                          line_no);
      }
      if (!columns) throw FormatError("header needs columns=<label,...>", line_no);
      if (have_header && *modes != set.n_modes) {
        throw FormatError("mode count differs from earlier header", line_no);
      }
      if (have_header && seed != set.rng_seed) {
        throw FormatError("seed differs from earlier header", line_no);
      }
      if (!set.acquisitions.empty() && set.acquisitions.back().length() == 0) {
        throw FormatError("acquisition without samples", line_no);
      }
      set.n_modes = *modes;
      set.rng_seed = seed;
      have_header = true;
      JointAcquisition acq;
      for (auto label : detail::split(*columns, ',')) {
        acq.columns.push_back(QuadratureLabel::parse(label, line_no));
      }
      if (auto problem = joint_row_problem(acq.columns, set.n_modes); !problem.empty()) {
        throw FormatError(problem, line_no);
      }
      acq.samples.resize(acq.columns.size());
      set.acquisitions.push_back(std::move(acq));
      continue;
    }

    if (!have_header) throw FormatError("data before the '# modes=...' header", line_no);
    auto& acq = set.acquisitions.back();
    const auto cells = detail::split(line, ',');
    if (cells.size() != acq.columns.size()) {
      throw LengthMismatchError("expected " + std::to_string(acq.columns.size()) +
                                    " values, found " + std::to_string(cells.size()),
                                line_no);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      acq.samples[c].push_back(parse_double(cells[c], line_no));
    }
  }
  if (!have_header) throw FormatError("no '# modes=...' header found", line_no);
  if (set.acquisitions.back().length() == 0) throw FormatError("acquisition without samples", line_no);
  return set;
}

inline QuadratureSampleSet ingest_samples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_samples(in);
}

inline nlohmann::json to_json(const ReconstructedCovariance& rec) {
  auto j = state_to_json(rec.state);
  j["standard_errors"] = matrix_to_json(rec.standard_errors);
  j["n_samples"] = rec.n_samples;
  j["warnings"] = rec.warnings;
  return j;
}

}  // namespace gcoh
