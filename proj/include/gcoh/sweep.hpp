#pragma once

// Decoherence sweeps: propagate a squeezed or EPR source through lossy and
// noisy channels, tabulate squeezing / PPT / coherence, and locate the excess
// noise at which squeezing or entanglement disappears.

#include <gcoh/channels.hpp>
#include <gcoh/covariance.hpp>
#include <gcoh/errors.hpp>
#include <gcoh/homodyne.hpp>
#include <gcoh/io.hpp>
#include <gcoh/metrics.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace gcoh {

/// Source levels of the reference experiment, dB relative to the SNL.
inline constexpr double kDefaultSqueezedDb = -2.95;
inline constexpr double kDefaultAntisqueezedDb = 4.15;
inline constexpr double kDefaultFixedLoss = 0.4;
inline constexpr std::size_t kDefaultGridPoints = 41;
inline constexpr double kMaxLossGrid = 1.0;
inline constexpr double kMaxNoiseGrid = 5.0;

/// Which modes carry a channel.
enum class Topology {
  Squeezed,     ///< single-mode source, channel on mode 0
  EprOneMode,   ///< EPR source, channel on mode 1 only
  EprTwoModes,  ///< EPR source, identical channels on both modes
};

enum class SweepParameter { Loss, ExcessNoise };

enum class Scenario {
  SqueezedLoss,
  EprLoss,
  SqueezedNoise,
  EprNoiseOneMode,
  EprNoiseTwoModes,
  EprLossTwoModes,
};

inline constexpr Scenario kAllScenarios[] = {
    Scenario::SqueezedLoss,     Scenario::EprLoss,          Scenario::SqueezedNoise,
    Scenario::EprNoiseOneMode,  Scenario::EprNoiseTwoModes, Scenario::EprLossTwoModes,
};

inline std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::SqueezedLoss: return "squeezed_loss";
    case Scenario::EprLoss: return "epr_loss";
    case Scenario::SqueezedNoise: return "squeezed_noise";
    case Scenario::EprNoiseOneMode: return "epr_noise_one_mode";
    case Scenario::EprNoiseTwoModes: return "epr_noise_two_modes";
    case Scenario::EprLossTwoModes: return "epr_loss_two_modes";
  }
  return "unknown";
}

inline Scenario parse_scenario(std::string_view name) {
  for (auto s : kAllScenarios) {
    if (scenario_name(s) == name) return s;
  }
  throw ParameterError("unknown scenario '" + std::string(name) + "'");
}

inline Topology topology(Scenario s) {
  switch (s) {
    case Scenario::SqueezedLoss:
    case Scenario::SqueezedNoise: return Topology::Squeezed;
    case Scenario::EprLoss:
    case Scenario::EprNoiseOneMode: return Topology::EprOneMode;
    case Scenario::EprNoiseTwoModes:
    case Scenario::EprLossTwoModes: return Topology::EprTwoModes;
  }
  return Topology::Squeezed;
}

inline std::string_view topology_name(Topology t) {
  switch (t) {
    case Topology::Squeezed: return "squeezed";
    case Topology::EprOneMode: return "epr_one_mode";
    case Topology::EprTwoModes: return "epr_two_modes";
  }
  return "unknown";
}

inline SweepParameter swept_parameter(Scenario s) {
  switch (s) {
    case Scenario::SqueezedLoss:
    case Scenario::EprLoss:
    case Scenario::EprLossTwoModes: return SweepParameter::Loss;
    default: return SweepParameter::ExcessNoise;
  }
}

inline std::string_view parameter_name(SweepParameter p) {
  return p == SweepParameter::Loss ? "loss" : "excess_noise";
}

struct Grid {
  double start = 0.0;
  double stop = 1.0;
  std::size_t points = kDefaultGridPoints;

  void validate() const {
    if (points < 2) throw ParameterError("grid needs at least 2 points");
    if (!std::isfinite(start) || !std::isfinite(stop) || !(stop > start)) {
      throw ParameterError("grid must be finite and increasing (start < stop)");
    }
  }

  /// Evenly spaced; the last value is exactly `stop`.
  std::vector<double> values() const {
    validate();
    std::vector<double> v(points);
    const double step = (stop - start) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) v[i] = start + static_cast<double>(i) * step;
    v.back() = stop;
    return v;
  }
};

inline Grid default_grid(Scenario s) {
  return swept_parameter(s) == SweepParameter::Loss ? Grid{0.0, kMaxLossGrid, kDefaultGridPoints}
                                                    : Grid{0.0, kMaxNoiseGrid, kDefaultGridPoints};
}

/// Homodyne round trip settings for sampling-enabled sweeps.
struct Sampling {
  std::size_t n = kDefaultSampleCount;
  std::uint64_t seed = 0;
  std::size_t blocks = kDefaultBlocks;
};

struct SweepConfig {
  Scenario scenario = Scenario::SqueezedLoss;
  double squeezed_db = kDefaultSqueezedDb;
  double antisqueezed_db = kDefaultAntisqueezedDb;
  /// Loss held fixed during excess-noise sweeps.
  double fixed_loss = kDefaultFixedLoss;
  Grid grid = default_grid(Scenario::SqueezedLoss);
  std::optional<Sampling> sampling;

  static SweepConfig for_scenario(Scenario s) {
    SweepConfig c;
    c.scenario = s;
    c.grid = default_grid(s);
    return c;
  }

  void validate() const {
    grid.validate();
    if (!(fixed_loss >= 0.0 && fixed_loss <= 1.0)) throw ParameterError("fixed_loss must lie in [0, 1]");
    if (swept_parameter(scenario) == SweepParameter::Loss && (grid.start < 0.0 || grid.stop > 1.0)) {
      throw ParameterError("loss grid must lie within [0, 1]");
    }
    if (swept_parameter(scenario) == SweepParameter::ExcessNoise && grid.start < 0.0) {
      throw ParameterError("excess-noise grid must be nonnegative");
    }
    if (sampling && sampling->n < 2 * sampling->blocks) {
      throw ParameterError("sampling.n must be at least 2 * sampling.blocks");
    }
  }
};

inline GaussianState source_state(Topology t, double squeezed_db, double antisqueezed_db) {
  return t == Topology::Squeezed ? make_squeezed_state_db(squeezed_db, antisqueezed_db)
                                 : make_epr_state_db(squeezed_db, antisqueezed_db);
}

inline GaussianState propagate(Topology t, const GaussianState& source, const ThermalChannel& channel) {
  switch (t) {
    case Topology::Squeezed: return apply_channel(source, channel, 0);
    case Topology::EprOneMode: return apply_channel(source, channel, 1);
    case Topology::EprTwoModes: return apply_two_channels(source, channel, channel);
  }
  throw ParameterError("unknown topology");
}

/// Channel for one grid value of a scenario.
inline ThermalChannel channel_at(const SweepConfig& config, double parameter) {
  return swept_parameter(config.scenario) == SweepParameter::Loss
             ? ThermalChannel::from_loss(parameter, 0.0)
             : ThermalChannel::from_loss(config.fixed_loss, parameter);
}

/// Metrics a scenario reports; absent ones stay empty (written as null).
struct MetricValues {
  std::optional<double> squeezing_db_x;
  std::optional<double> squeezing_db_y;
  std::optional<double> ppt_value;
  std::optional<double> coherence_bits;

  friend bool operator==(const MetricValues&, const MetricValues&) = default;
};

struct SampledMetrics {
  std::optional<ErrorBar> squeezing_db_x;
  std::optional<ErrorBar> squeezing_db_y;
  std::optional<ErrorBar> ppt_value;
  std::optional<ErrorBar> coherence_bits;
};

inline bool operator==(const ErrorBar& a, const ErrorBar& b) {
  return a.value == b.value && a.sigma == b.sigma;
}
inline bool operator==(const SampledMetrics& a, const SampledMetrics& b) {
  return a.squeezing_db_x == b.squeezing_db_x && a.squeezing_db_y == b.squeezing_db_y &&
         a.ppt_value == b.ppt_value && a.coherence_bits == b.coherence_bits;
}

inline MetricValues analytic_metrics(const GaussianState& state) {
  MetricValues m;
  if (state.n_modes() == 1) {
    m.squeezing_db_x = squeezing_db(state, Quadrature::X);
    m.squeezing_db_y = squeezing_db(state, Quadrature::Y);
  }
  if (state.n_modes() == 2) m.ppt_value = ppt_value(state).ppt_value;
  m.coherence_bits = coherence(state).coherence_bits;
  return m;
}

inline SampledMetrics sampled_metrics(const GaussianState& state, const Sampling& sampling,
                                      std::uint64_t seed) {
  const auto samples =
      sample_quadratures(state, sampling.n, seed, AcquisitionPlan::full(state.n_modes()));
  ReconstructionOptions options;
  options.blocks = sampling.blocks;
  SampledMetrics m;
  if (state.n_modes() == 1) {
    m.squeezing_db_x = estimate_error_bars(samples, MetricSelector::squeezing_db({0, Quadrature::X}), options);
    m.squeezing_db_y = estimate_error_bars(samples, MetricSelector::squeezing_db({0, Quadrature::Y}), options);
  }
  if (state.n_modes() == 2) m.ppt_value = estimate_error_bars(samples, MetricSelector::ppt(), options);
  m.coherence_bits = estimate_error_bars(samples, MetricSelector::coherence(), options);
  return m;
}

struct SweepRow {
  double parameter = 0.0;
  MetricValues analytic;
  std::optional<SampledMetrics> sampled;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
  Scenario scenario = Scenario::SqueezedLoss;
  /// Present for excess-noise sweeps.
  std::optional<double> fixed_loss;
  bool sampling_enabled = false;
  std::vector<SweepRow> rows;

  SweepParameter parameter() const { return swept_parameter(scenario); }

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// A grid point failed; `cause` holds the original module error.
class GridPointError : public Error {
 public:
  GridPointError(std::size_t index, double parameter, std::exception_ptr cause, const std::string& what)
      : Error(what), index_(index), parameter_(parameter), cause_(std::move(cause)) {}

  std::size_t index() const { return index_; }
  double parameter() const { return parameter_; }
  [[noreturn]] void rethrow_cause() const { std::rethrow_exception(cause_); }

 private:
  std::size_t index_;
  double parameter_;
  std::exception_ptr cause_;
};

/// Seed of grid point `index`: base_seed XOR index.
inline std::uint64_t grid_point_seed(std::uint64_t base_seed, std::size_t index) {
  return base_seed ^ static_cast<std::uint64_t>(index);
}

namespace detail {

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Rethrows the
/// failure with the lowest index.
inline void parallel_for(std::size_t count, std::size_t workers,
                         const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

inline SweepResult run_sweep(const SweepConfig& config, std::size_t workers = 0) {
  config.validate();
  const auto grid = config.grid.values();
  const Topology topo = topology(config.scenario);
  const auto source = source_state(topo, config.squeezed_db, config.antisqueezed_db);

  SweepResult result;
  result.scenario = config.scenario;
  if (swept_parameter(config.scenario) == SweepParameter::ExcessNoise) result.fixed_loss = config.fixed_loss;
  result.sampling_enabled = config.sampling.has_value();
  result.rows.resize(grid.size());

  if (workers == 0) workers = config.sampling ? std::max(1u, std::thread::hardware_concurrency()) : 1;
  detail::parallel_for(grid.size(), workers, [&](std::size_t i) {
    try {
      const auto state = propagate(topo, source, channel_at(config, grid[i]));
      SweepRow row;
      row.parameter = grid[i];
      row.analytic = analytic_metrics(state);
      if (config.sampling) {
        row.sampled = sampled_metrics(state, *config.sampling, grid_point_seed(config.sampling->seed, i));
      }
      result.rows[i] = std::move(row);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "grid point " << i << " (" << parameter_name(swept_parameter(config.scenario)) << " = "
         << grid[i] << "): " << e.what();
      throw GridPointError(i, grid[i], std::current_exception(), os.str());
    }
  });
  return result;
}

// ---------------------------------------------------------------------------
// Thresholds

enum class ThresholdMetric { SqueezingCrossesSnl, PptCrossesOne };

inline std::string_view threshold_metric_name(ThresholdMetric m) {
  return m == ThresholdMetric::SqueezingCrossesSnl ? "squeezing_crosses_snl" : "ppt_crosses_one";
}

inline ThresholdMetric parse_threshold_metric(std::string_view name) {
  if (name == "squeezing_crosses_snl") return ThresholdMetric::SqueezingCrossesSnl;
  if (name == "ppt_crosses_one") return ThresholdMetric::PptCrossesOne;
  throw ParameterError("unknown threshold metric '" + std::string(name) + "'");
}

inline constexpr double kThresholdBracketHigh = 100.0;
inline constexpr double kThresholdTolerance = 1e-6;

/// Excess noise at which the metric reaches its classical boundary at fixed
/// loss, by bisection on [0, 100].
inline double find_threshold(Scenario scenario, ThresholdMetric metric, double fixed_loss,
                             double squeezed_db = kDefaultSqueezedDb,
                             double antisqueezed_db = kDefaultAntisqueezedDb,
                             double tolerance = kThresholdTolerance) {
  const Topology topo = topology(scenario);
  if (metric == ThresholdMetric::SqueezingCrossesSnl && topo != Topology::Squeezed) {
    throw ParameterError("squeezing_crosses_snl needs a squeezed-state scenario");
  }
  if (metric == ThresholdMetric::PptCrossesOne && topo == Topology::Squeezed) {
    throw ParameterError("ppt_crosses_one needs an EPR scenario");
  }
  if (!(fixed_loss >= 0.0 && fixed_loss <= 1.0)) throw ParameterError("fixed_loss must lie in [0, 1]");
  if (!(tolerance > 0.0)) throw ParameterError("tolerance must be positive");

  const auto source = source_state(topo, squeezed_db, antisqueezed_db);
  // Negative while squeezing / entanglement survives.
  const auto excess = [&](double delta) {
    const auto out = propagate(topo, source, ThermalChannel::from_loss(fixed_loss, delta));
    return metric == ThresholdMetric::SqueezingCrossesSnl ? out.cov()(0, 0) - 1.0
                                                          : ppt_value(out).ppt_value - 1.0;
  };

  double lo = 0.0;
  double hi = kThresholdBracketHigh;
  const double f_lo = excess(lo);
  const double f_hi = excess(hi);
  if (!(f_lo < 0.0)) {
    std::ostringstream os;
    os << threshold_metric_name(metric) << ": no crossing, lower endpoint delta = 0 is already at or"
       << " beyond the boundary (metric - 1 = " << f_lo << ")";
    throw NoCrossingError(os.str());
  }
  if (!(f_hi >= 0.0)) {
    std::ostringstream os;
    os << threshold_metric_name(metric) << ": no crossing, upper endpoint delta = " << hi
       << " is still inside the boundary (metric - 1 = " << f_hi << ")";
    throw NoCrossingError(os.str());
  }
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Solves eta V_s + (1 - eta)(delta + 1) = 1 for delta.
inline double squeezing_threshold_closed_form(double v_s, double fixed_loss) {
  const double eta = 1.0 - fixed_loss;
  if (!(fixed_loss > 0.0)) throw ParameterError("closed form needs nonzero loss");
  return (1.0 - eta * v_s) / (1.0 - eta) - 1.0;
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("null");
}

inline std::optional<double> parse_optional(std::string_view cell, std::size_t line) {
  if (cell == "null") return std::nullopt;
  return parse_double(cell, line);
}

inline std::vector<std::string> sweep_columns(SweepParameter p, bool sampled) {
  std::vector<std::string> cols{std::string(parameter_name(p)), "squeezing_db_x", "squeezing_db_y",
                                "ppt_value", "coherence_bits"};
  if (sampled) {
    for (const char* m : {"squeezing_db_x", "squeezing_db_y", "ppt_value", "coherence_bits"}) {
      cols.push_back(std::string("sampled_") + m);
      cols.push_back(std::string("sigma_") + m);
    }
  }
  return cols;
}

}  // namespace detail

/// CSV: a '# scenario=...' line, the column header, one row per grid point.
inline void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "# scenario=" << scenario_name(result.scenario)
      << " parameter=" << parameter_name(result.parameter());
  if (result.fixed_loss) out << " fixed_loss=" << format_double(*result.fixed_loss);
  out << '\n';
  const auto cols = detail::sweep_columns(result.parameter(), result.sampling_enabled);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (const auto& row : result.rows) {
    out << format_double(row.parameter) << ',' << detail::format_optional(row.analytic.squeezing_db_x)
        << ',' << detail::format_optional(row.analytic.squeezing_db_y) << ','
        << detail::format_optional(row.analytic.ppt_value) << ','
        << detail::format_optional(row.analytic.coherence_bits);
    if (result.sampling_enabled) {
      const SampledMetrics s = row.sampled.value_or(SampledMetrics{});
      for (const auto* bar : {&s.squeezing_db_x, &s.squeezing_db_y, &s.ppt_value, &s.coherence_bits}) {
        if (*bar) {
          out << ',' << format_double((*bar)->value) << ',' << format_double((*bar)->sigma);
        } else {
          out << ",null,null";
        }
      }
    }
    out << '\n';
  }
}

inline SweepResult read_sweep_csv(std::istream& in) {
  SweepResult result;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw FormatError("empty sweep CSV");
  ++line_no;
  if (line.rfind("# ", 0) != 0) throw FormatError("expected '# scenario=...' line", line_no);
  {
    std::istringstream fields(line.substr(2));
    std::string field;
    bool have_scenario = false;
    std::string parameter;
    while (fields >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw FormatError("malformed header field '" + field + "'", line_no);
      const auto key = field.substr(0, eq);
      const auto value = field.substr(eq + 1);
      if (key == "scenario") {
        result.scenario = parse_scenario(value);
        have_scenario = true;
      } else if (key == "parameter") {
        parameter = value;
      } else if (key == "fixed_loss") {
        result.fixed_loss = parse_double(value, line_no);
      } else {
        throw FormatError("unknown header field '" + key + "'", line_no);
      }
    }
    if (!have_scenario) throw FormatError("header lacks scenario=", line_no);
    if (parameter != parameter_name(result.parameter())) {
      throw FormatError("parameter '" + parameter + "' does not match the scenario", line_no);
    }
  }
  if (!std::getline(in, line)) throw FormatError("missing column header", line_no + 1);
  ++line_no;
  const auto header = detail::split(line, ',');
  bool matched = false;
  for (bool sampled : {false, true}) {
    const auto cols = detail::sweep_columns(result.parameter(), sampled);
    if (header.size() == cols.size() && std::equal(header.begin(), header.end(), cols.begin())) {
      result.sampling_enabled = sampled;
      matched = true;
      break;
    }
  }
  if (!matched) throw FormatError("unexpected column header '" + line + "'", line_no);
  const std::size_t ncols = detail::sweep_columns(result.parameter(), result.sampling_enabled).size();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != ncols) {
      throw LengthMismatchError("expected " + std::to_string(ncols) + " columns, found " +
                                    std::to_string(cells.size()),
                                line_no);
    }
    SweepRow row;
    row.parameter = parse_double(cells[0], line_no);
    row.analytic.squeezing_db_x = detail::parse_optional(cells[1], line_no);
    row.analytic.squeezing_db_y = detail::parse_optional(cells[2], line_no);
    row.analytic.ppt_value = detail::parse_optional(cells[3], line_no);
    row.analytic.coherence_bits = detail::parse_optional(cells[4], line_no);
    if (result.sampling_enabled) {
      SampledMetrics s;
      std::optional<ErrorBar>* bars[] = {&s.squeezing_db_x, &s.squeezing_db_y, &s.ppt_value,
                                         &s.coherence_bits};
      for (std::size_t k = 0; k < 4; ++k) {
        const auto value = detail::parse_optional(cells[5 + 2 * k], line_no);
        const auto sigma = detail::parse_optional(cells[6 + 2 * k], line_no);
        if (value.has_value() != sigma.has_value()) {
          throw FormatError("value and sigma must both be null or both present", line_no);
        }
        if (value) *bars[k] = ErrorBar{*value, *sigma};
      }
      row.sampled = s;
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

inline std::string sweep_csv_string(const SweepResult& result) {
  std::ostringstream os;
  write_sweep_csv(os, result);
  return os.str();
}

inline nlohmann::json config_to_json(const SweepConfig& c) {
  nlohmann::json j = {{"scenario", scenario_name(c.scenario)},
                      {"source", {{"squeezed_db", c.squeezed_db}, {"antisqueezed_db", c.antisqueezed_db}}},
                      {"fixed_loss", c.fixed_loss},
                      {"grid", {{"start", c.grid.start}, {"stop", c.grid.stop}, {"points", c.grid.points}}}};
  if (c.sampling) {
    j["sampling"] = {{"n", c.sampling->n}, {"seed", c.sampling->seed}, {"blocks", c.sampling->blocks}};
  }
  return j;
}

/// Path of the JSON metadata written next to a report CSV.
inline std::filesystem::path metadata_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

/// Writes the CSV and a companion `<stem>.meta.json` (config echo, version, seeds).
inline void emit_report(const SweepResult& result, const SweepConfig& config,
                        const std::filesystem::path& path) {
  write_text_file(path, sweep_csv_string(result));
  nlohmann::json meta = {{"tool", "gcoh"},
                         {"version", kToolVersion},
                         {"ordering", kOrdering},
                         {"config", config_to_json(config)},
                         {"columns", detail::sweep_columns(result.parameter(), result.sampling_enabled)},
                         {"rows", result.rows.size()}};
  if (config.sampling) {
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
      seeds.push_back(grid_point_seed(config.sampling->seed, i));
    }
    meta["seeds"] = seeds;
  } else {
    meta["seeds"] = nullptr;
  }
  write_text_file(metadata_path(path), meta.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Loss x excess-noise surfaces

struct SurfacePoint {
  double loss = 0.0;
  double excess_noise = 0.0;
  double coherence_bits = 0.0;
};

/// Coherence on the (loss, excess noise) grid; loss varies slowest.
inline std::vector<SurfacePoint> coherence_surface(Topology topo, const Grid& loss_grid,
                                                   const Grid& noise_grid,
                                                   double squeezed_db = kDefaultSqueezedDb,
                                                   double antisqueezed_db = kDefaultAntisqueezedDb) {
  const auto source = source_state(topo, squeezed_db, antisqueezed_db);
  std::vector<SurfacePoint> points;
  for (double loss : loss_grid.values()) {
    for (double delta : noise_grid.values()) {
      const auto out = propagate(topo, source, ThermalChannel::from_loss(loss, delta));
      points.push_back({loss, delta, coherence(out).coherence_bits});
    }
  }
  return points;
}

inline std::string surface_csv_string(Topology topo, const std::vector<SurfacePoint>& points) {
  std::ostringstream os;
  os << "# surface=" << topology_name(topo) << '\n' << "loss,excess_noise,coherence_bits\n";
  for (const auto& p : points) {
    os << format_double(p.loss) << ',' << format_double(p.excess_noise) << ','
       << format_double(p.coherence_bits) << '\n';
  }
  return os.str();
}

struct ThresholdEntry {
  Scenario scenario;
  ThresholdMetric metric;
  double fixed_loss;
  double threshold;
  double closed_form;
};

/// The three death thresholds of the reference setup at the given loss.
inline std::vector<ThresholdEntry> standard_thresholds(double fixed_loss = kDefaultFixedLoss,
                                                       double squeezed_db = kDefaultSqueezedDb,
                                                       double antisqueezed_db = kDefaultAntisqueezedDb) {
  const double v_s = db_to_variance(squeezed_db);
  const double closed = squeezing_threshold_closed_form(v_s, fixed_loss);
  std::vector<ThresholdEntry> out;
  out.push_back({Scenario::SqueezedNoise, ThresholdMetric::SqueezingCrossesSnl, fixed_loss,
                 find_threshold(Scenario::SqueezedNoise, ThresholdMetric::SqueezingCrossesSnl,
                                fixed_loss, squeezed_db, antisqueezed_db),
                 closed});
  out.push_back({Scenario::EprNoiseOneMode, ThresholdMetric::PptCrossesOne, fixed_loss,
                 find_threshold(Scenario::EprNoiseOneMode, ThresholdMetric::PptCrossesOne, fixed_loss,
                                squeezed_db, antisqueezed_db),
                 std::nan("")});
  // Identical channels keep the EPR form, so PPT = eta V_s + (1 - eta)(delta + 1).
  out.push_back({Scenario::EprNoiseTwoModes, ThresholdMetric::PptCrossesOne, fixed_loss,
                 find_threshold(Scenario::EprNoiseTwoModes, ThresholdMetric::PptCrossesOne, fixed_loss,
                                squeezed_db, antisqueezed_db),
                 closed});
  return out;
}

/// Writes every sweep, surface and threshold file into `outdir`; returns the paths.
inline std::vector<std::filesystem::path> run_all_figures(const std::filesystem::path& outdir,
                                                          double squeezed_db = kDefaultSqueezedDb,
                                                          double antisqueezed_db = kDefaultAntisqueezedDb) {
  std::vector<std::filesystem::path> written;
  for (auto s : kAllScenarios) {
    auto config = SweepConfig::for_scenario(s);
    config.squeezed_db = squeezed_db;
    config.antisqueezed_db = antisqueezed_db;
    const auto path = outdir / (std::string(scenario_name(s)) + ".csv");
    emit_report(run_sweep(config), config, path);
    written.push_back(path);
    written.push_back(metadata_path(path));
  }

  const Grid loss_grid{0.0, kMaxLossGrid, kDefaultGridPoints};
  const Grid noise_grid{0.0, kMaxNoiseGrid, kDefaultGridPoints};
  for (auto topo : {Topology::Squeezed, Topology::EprOneMode, Topology::EprTwoModes}) {
    const auto path = outdir / ("surface_" + std::string(topology_name(topo)) + ".csv");
    write_text_file(path, surface_csv_string(
                              topo, coherence_surface(topo, loss_grid, noise_grid, squeezed_db, antisqueezed_db)));
    written.push_back(path);
  }

  auto thresholds = nlohmann::json::array();
  for (const auto& t : standard_thresholds(kDefaultFixedLoss, squeezed_db, antisqueezed_db)) {
    nlohmann::json entry = {{"scenario", scenario_name(t.scenario)},
                            {"metric", threshold_metric_name(t.metric)},
                            {"fixed_loss", t.fixed_loss},
                            {"threshold", t.threshold}};
    entry["closed_form"] = std::isnan(t.closed_form) ? nlohmann::json(nullptr) : nlohmann::json(t.closed_form);
    thresholds.push_back(std::move(entry));
  }
  const auto tpath = outdir / "thresholds.json";
  write_text_file(tpath, nlohmann::json{{"tool", "gcoh"}, {"version", kToolVersion}, {"thresholds", thresholds}}
                             .dump(2) + "\n");
  written.push_back(tpath);
  return written;
}

}  // namespace gcoh
