// gcoh: command-line front end for the Gaussian coherence toolkit.

#include <gcoh/config.hpp>
#include <gcoh/gcoh.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

void warn_all(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-state coherence, squeezing and entanglement toolkit"};
  app.set_version_flag("--version", std::string(gcoh::kToolVersion));
  app.require_subcommand(1);

  // state
  std::string state_kind;
  double sq_db = gcoh::kDefaultSqueezedDb;
  double asq_db = gcoh::kDefaultAntisqueezedDb;
  std::string state_out;
  auto* state_cmd = app.add_subcommand("state", "Write a squeezed or EPR source state as JSON");
  state_cmd->add_option("kind", state_kind, "squeezed or epr")->required()->check(CLI::IsMember({"squeezed", "epr"}));
  state_cmd->add_option("--squeezed-db", sq_db, "Squeezed-quadrature level, dB re SNL");
  state_cmd->add_option("--antisqueezed-db", asq_db, "Antisqueezed-quadrature level, dB re SNL");
  state_cmd->add_option("--out", state_out, "Output path (stdout when omitted)");

  // coherence / ppt
  std::string state_path;
  auto* coh_cmd = app.add_subcommand("coherence", "Relative entropy of coherence of a state file");
  coh_cmd->add_option("state", state_path, "State JSON")->required();
  auto* ppt_cmd = app.add_subcommand("ppt", "PPT value of a two-mode state file");
  ppt_cmd->add_option("state", state_path, "State JSON")->required();

  // sweep / threshold
  std::string config_path;
  std::string sweep_out;
  std::size_t workers = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a channel-parameter sweep from a config file");
  sweep_cmd->add_option("config", config_path, "YAML config")->required();
  sweep_cmd->add_option("--out", sweep_out, "CSV path; writes <stem>.meta.json alongside");
  sweep_cmd->add_option("--workers", workers, "Threads for sampling sweeps (0 = hardware)");

  std::string metric_override;
  auto* thr_cmd = app.add_subcommand("threshold", "Excess noise at which squeezing or entanglement dies");
  thr_cmd->add_option("config", config_path, "YAML config")->required();
  thr_cmd->add_option("--metric", metric_override, "squeezing_crosses_snl or ppt_crosses_one");

  // simulate / reconstruct
  std::size_t n_samples = gcoh::kDefaultSampleCount;
  std::uint64_t seed = 0;
  std::string plan_name = "full";
  std::string samples_out;
  auto* sim_cmd = app.add_subcommand("simulate", "Sample homodyne records from a state");
  sim_cmd->add_option("state", state_path, "State JSON")->required();
  sim_cmd->add_option("--n", n_samples, "Samples per joint acquisition");
  sim_cmd->add_option("--seed", seed, "RNG seed");
  sim_cmd->add_option("--plan", plan_name, "full or amplitude_phase")->check(CLI::IsMember({"full", "amplitude_phase"}));
  sim_cmd->add_option("--out", samples_out, "CSV path (stdout when omitted)");

  std::string samples_path;
  bool assume_zero = false;
  std::size_t blocks = gcoh::kDefaultBlocks;
  std::string recon_out;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Reconstruct a covariance matrix from sample CSV");
  rec_cmd->add_option("samples", samples_path, "Sample CSV")->required();
  rec_cmd->add_flag("--assume-zero-unmeasured", assume_zero, "Zero-fill entries no acquisition covers");
  rec_cmd->add_option("--blocks", blocks, "Blocks for standard errors");
  rec_cmd->add_option("--out", recon_out, "JSON path (stdout when omitted)");

  std::string outdir = "figures";
  auto* fig_cmd = app.add_subcommand("figures", "Write every sweep, surface and threshold file");
  fig_cmd->add_option("--outdir", outdir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*state_cmd) {
      const auto st = state_kind == "squeezed" ? gcoh::make_squeezed_state_db(sq_db, asq_db)
                                               : gcoh::make_epr_state_db(sq_db, asq_db);
      if (state_out.empty()) {
        print_json(gcoh::state_to_json(st));
      } else {
        gcoh::write_state_file(state_out, st);
      }
    } else if (*coh_cmd) {
      const auto st = gcoh::read_state_file(state_path);
      const auto report = gcoh::coherence(st);
      warn_all(report.warnings);
      print_json(gcoh::to_json(report, st));
    } else if (*ppt_cmd) {
      const auto st = gcoh::read_state_file(state_path);
      print_json(gcoh::to_json(gcoh::ppt_value(st), st));
    } else if (*sweep_cmd) {
      const auto rc = gcoh::load_run_config(config_path);
      const auto result = gcoh::run_sweep(rc.sweep, workers);
      if (sweep_out.empty()) {
        gcoh::write_sweep_csv(std::cout, result);
      } else {
        gcoh::emit_report(result, rc.sweep, sweep_out);
        std::cerr << "wrote " << sweep_out << " and " << gcoh::metadata_path(sweep_out).string() << '\n';
      }
    } else if (*thr_cmd) {
      const auto rc = gcoh::load_run_config(config_path);
      std::optional<gcoh::ThresholdMetric> metric = rc.threshold_metric;
      if (!metric_override.empty()) metric = gcoh::parse_threshold_metric(metric_override);
      if (!metric) {
        throw gcoh::ParameterError("threshold needs threshold_metric in the config or --metric");
      }
      const auto& c = rc.sweep;
      const double delta = gcoh::find_threshold(c.scenario, *metric, c.fixed_loss, c.squeezed_db, c.antisqueezed_db);
      nlohmann::json out = {{"scenario", gcoh::scenario_name(c.scenario)},
                            {"metric", gcoh::threshold_metric_name(*metric)},
                            {"fixed_loss", c.fixed_loss},
                            {"threshold", delta}};
      const bool closed_form_applies = gcoh::topology(c.scenario) != gcoh::Topology::EprOneMode;
      if (closed_form_applies && c.fixed_loss > 0.0) {
        out["closed_form"] = gcoh::squeezing_threshold_closed_form(gcoh::db_to_variance(c.squeezed_db), c.fixed_loss);
      }
      print_json(out);
    } else if (*sim_cmd) {
      const auto st = gcoh::read_state_file(state_path);
      const auto samples = gcoh::sample_quadratures(st, n_samples, seed, gcoh::AcquisitionPlan::from_name(plan_name, st.n_modes()));
      if (samples_out.empty()) {
        gcoh::write_samples(std::cout, samples);
      } else {
        gcoh::write_samples(std::filesystem::path(samples_out), samples);
      }
    } else if (*rec_cmd) {
      const auto samples = gcoh::ingest_samples(samples_path);
      gcoh::ReconstructionOptions options;
      options.assume_zero_unmeasured = assume_zero;
      options.blocks = blocks;
      const auto rec = gcoh::reconstruct_covariance(samples, options);
      warn_all(rec.warnings);
      if (recon_out.empty()) {
        print_json(gcoh::to_json(rec));
      } else {
        gcoh::write_text_file(recon_out, gcoh::to_json(rec).dump(2) + "\n");
      }
    } else if (*fig_cmd) {
      for (const auto& p : gcoh::run_all_figures(outdir)) std::cout << p.string() << '\n';
    }
  } catch (const gcoh::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
