#pragma once

// JSON state files, report serialization and exact number formatting.

#include <gcoh/covariance.hpp>
#include <gcoh/errors.hpp>
#include <gcoh/metrics.hpp>

#include <Eigen/Dense>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

namespace gcoh {

inline constexpr std::string_view kOrdering = "XYXY";
inline constexpr std::string_view kToolVersion = "1.0.0";

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  if (result.ec != std::errc{}) throw Error("failed to format number");
  return std::string(buf, result.ptr);
}

/// Parses a finite decimal number; `line` is reported in the FormatError.
inline double parse_double(std::string_view text, std::size_t line = 0) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || result.ec != std::errc{} || result.ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    throw FormatError("invalid number '" + std::string(text) + "'", line);
  }
  return value;
}

/// FNV-1a (64 bit) over the row-major IEEE-754 bytes of the matrix; hex string.
inline std::string matrix_hash(const Eigen::MatrixXd& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
  mix(&rows, sizeof rows);
  mix(&cols, sizeof cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j) == 0.0 ? 0.0 : m(i, j);  // fold -0.0 into +0.0
      mix(&v, sizeof v);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json state_to_json(const GaussianState& state) {
  auto disp = nlohmann::json::array();
  for (Eigen::Index i = 0; i < state.displacement().size(); ++i) {
    disp.push_back(state.displacement()(i));
  }
  nlohmann::json j = {{"n_modes", state.n_modes()},
                      {"ordering", kOrdering},
                      {"matrix", matrix_to_json(state.cov().matrix())},
                      {"displacement", std::move(disp)}};
  if (state.origin() == StateOrigin::Reconstructed) j["origin"] = "reconstructed";
  return j;
}

/// Reads {"n_modes", "ordering", "matrix", "displacement", "origin"}; displacement
/// may be omitted, and "origin": "reconstructed" overrides `origin`.
inline GaussianState state_from_json(const nlohmann::json& j,
                                     StateOrigin origin = StateOrigin::Constructed) {
  try {
    if (!j.is_object()) throw FormatError("state JSON must be an object");
    if (j.contains("origin")) {
      const auto o = j.at("origin").get<std::string>();
      if (o == "reconstructed") {
        origin = StateOrigin::Reconstructed;
      } else if (o == "constructed") {
        origin = StateOrigin::Constructed;
      } else {
        throw FormatError("unknown state origin '" + o + "'");
      }
    }
    const auto n = j.at("n_modes").get<std::size_t>();
    if (n == 0) throw FormatError("n_modes must be positive");
    const auto ordering = j.value("ordering", std::string(kOrdering));
    if (ordering != kOrdering) {
      throw FormatError("unsupported quadrature ordering '" + ordering + "', expected XYXY");
    }
    const auto& rows = j.at("matrix");
    const auto dim = static_cast<Eigen::Index>(2 * n);
    if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != dim) {
      throw FormatError("matrix must have 2*n_modes rows");
    }
    Eigen::MatrixXd m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
        throw FormatError("matrix row " + std::to_string(r) + " must have 2*n_modes entries");
      }
      for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
    if (j.contains("displacement")) {
      const auto& d = j.at("displacement");
      if (!d.is_array() || static_cast<Eigen::Index>(d.size()) != dim) {
        throw FormatError("displacement must have 2*n_modes entries");
      }
      for (Eigen::Index i = 0; i < dim; ++i) x(i) = d[static_cast<std::size_t>(i)].get<double>();
    }
    return GaussianState(std::move(x), CovarianceMatrix(std::move(m)), origin);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed state JSON: ") + e.what());
  }
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

inline GaussianState read_state_file(const std::filesystem::path& path) {
  return state_from_json(read_json_file(path));
}

inline void write_state_file(const std::filesystem::path& path, const GaussianState& state) {
  write_text_file(path, state_to_json(state).dump(2) + "\n");
}

inline nlohmann::json to_json(const CoherenceReport& report, const GaussianState& input) {
  return {{"coherence_bits", report.coherence_bits},
          {"entropy_state", report.entropy_state},
          {"entropy_thermal_ref", report.entropy_thermal_ref},
          {"thermal_ref_variances", report.thermal_ref_variances},
          {"warnings", report.warnings},
          {"matrix_hash", matrix_hash(input.cov().matrix())}};
}

inline nlohmann::json to_json(const EntanglementReport& report, const GaussianState& input) {
  return {{"ppt_value", report.ppt_value},
          {"entangled", report.entangled},
          {"matrix_hash", matrix_hash(input.cov().matrix())}};
}

}  // namespace gcoh
