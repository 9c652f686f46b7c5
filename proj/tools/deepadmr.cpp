// deepadmr: train a routing policy, calibrate and run the TD-error anomaly detector,
// compute ROC curves and render reports.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deepadmr/experiments/commands.hpp"

namespace ex = deepadmr::experiments;

namespace {

constexpr int exit_usage = 1;
constexpr int exit_runtime = 2;

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    out.push_back(deepadmr::parse_double(cell));
  }
  if (out.empty()) throw CLI::ValidationError("--h-grid", "expected a comma-separated list of numbers");
  return out;
}

// CLI11 binds plain values; these copy into the optional fields when the flag was given.
template <class T>
void bind_optional(CLI::Option* opt, std::optional<T>& dst, const T& value) {
  if (opt->count() > 0) dst = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TD-error anomaly detection for DRL-routed MANETs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "deepadmr 1.0");

  // train
  ex::TrainOptions train;
  std::uint64_t train_seed = 0;
  std::size_t train_iters = 0;
  std::string train_log;
  bool quiet = false;
  auto* t = app.add_subcommand("train", "Train the shared routing policy on nominal episodes");
  t->add_option("-c,--config", train.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  t->add_option("-o,--output", train.output, "Checkpoint to write")->required();
  auto* t_log = t->add_option("--log", train_log, "Training log (JSON lines); default <output>.log");
  auto* t_seed = t->add_option("--seed", train_seed, "Override training.seed");
  auto* t_iters = t->add_option("--iterations", train_iters, "Override training.iterations");
  t->add_flag("-q,--quiet", quiet, "No per-iteration progress");

  // calibrate
  ex::CalibrateOptions cal;
  std::uint64_t cal_seed = 0;
  std::size_t cal_k = 0, cal_window = 0;
  auto* c = app.add_subcommand("calibrate", "Collect nominal TD errors and build the calibration set");
  c->add_option("--checkpoint", cal.checkpoint, "Trained checkpoint")->required()->check(CLI::ExistingFile);
  c->add_option("-c,--config", cal.config, "Nominal scenario config")->required()->check(CLI::ExistingFile);
  c->add_option("-o,--output", cal.output, "Calibration file to write")->required();
  c->add_option("-e,--episodes", cal.episodes, "Nominal episodes to collect")->capture_default_str();
  auto* c_seed = c->add_option("--seed", cal_seed, "Override scenario.seed");
  auto* c_k = c->add_option("-k", cal_k, "Neighbour rank k (default: detector.k)");
  auto* c_w = c->add_option("--window", cal_window, "TD-error window length (default: detector.window)");

  // detect
  ex::DetectCommandOptions det;
  std::uint64_t det_seed = 0;
  std::size_t det_k = 0;
  double det_alpha = 0, det_h = 0;
  std::string det_id;
  bool no_trace = false;
  auto* d = app.add_subcommand("detect", "Run the frozen policy with per-node detectors");
  d->add_option("--checkpoint", det.checkpoint, "Trained checkpoint")->required()->check(CLI::ExistingFile);
  d->add_option("--calibration", det.calibration, "Calibration file")->required()->check(CLI::ExistingFile);
  d->add_option("-c,--config", det.config, "Scenario config, possibly anomalous")->required()->check(CLI::ExistingFile);
  d->add_option("-o,--output", det.output, "Run records to write (JSON lines)")->required();
  d->add_option("-e,--episodes", det.episodes, "Episodes to run")->capture_default_str();
  auto* d_seed = d->add_option("--seed", det_seed, "Override scenario.seed");
  auto* d_k = d->add_option("-k", det_k, "Neighbour rank k (must match the calibration)");
  auto* d_alpha = d->add_option("--alpha", det_alpha, "Significance level alpha");
  auto* d_h = d->add_option("--threshold", det_h, "CUSUM threshold h");
  auto* d_id = d->add_option("--scenario-id", det_id, "Scenario id stored in records (default: config stem)");
  d->add_flag("--no-trace", no_trace, "Omit per-row detector traces from the records");

  // roc
  ex::RocOptions roc;
  std::string grid_text;
  auto* r = app.add_subcommand("roc", "Episode-level ROC and AUC from run records");
  r->add_option("--nominal", roc.nominal, "Nominal run-record files")->required()->check(CLI::ExistingFile);
  r->add_option("--anomalous", roc.anomalous, "Anomalous run-record files")->required()->check(CLI::ExistingFile);
  r->add_option("--h-grid", grid_text, "Comma-separated thresholds (default: every distinct score)");
  r->add_option("-o,--output", roc.output, "ROC CSV to write")->required();

  // report
  ex::ReportOptions rep;
  std::string rep_roc;
  auto* p = app.add_subcommand("report", "Write trace/aggregate/ROC CSVs and SVG plots");
  p->add_option("--records", rep.records, "Run-record files")->required()->check(CLI::ExistingFile);
  auto* p_roc = p->add_option("--roc", rep_roc, "ROC CSV from `roc`")->check(CLI::ExistingFile);
  p->add_option("-o,--output-dir", rep.output_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
    if (!grid_text.empty()) roc.h_grid = parse_grid(grid_text);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return exit_usage;
  }

  try {
    if (*t) {
      bind_optional(t_log, train.log, train_log);
      bind_optional(t_seed, train.seed, train_seed);
      bind_optional(t_iters, train.iterations, train_iters);
      ex::cmd_train(train, quiet ? nullptr : &std::cerr);
      std::cout << "checkpoint written to " << train.output << '\n';
    } else if (*c) {
      bind_optional(c_seed, cal.seed, cal_seed);
      bind_optional(c_k, cal.k, cal_k);
      bind_optional(c_w, cal.window, cal_window);
      const auto calib = ex::cmd_calibrate(cal);
      std::cout << "calibration of " << calib.size() << " points (k=" << calib.k() << ", window=" << calib.window()
                << ") written to " << cal.output << '\n';
    } else if (*d) {
      bind_optional(d_seed, det.seed, det_seed);
      bind_optional(d_k, det.k, det_k);
      bind_optional(d_alpha, det.alpha, det_alpha);
      bind_optional(d_h, det.h, det_h);
      bind_optional(d_id, det.scenario_id, det_id);
      det.keep_trace = !no_trace;
      const auto records = ex::cmd_detect(det);
      std::size_t alarms = 0;
      for (const auto& rec : records) alarms += rec.aggregate_alarm.has_value();
      std::cout << records.size() << " run record(s), " << alarms << " with an aggregate alarm, written to " << det.output
                << '\n';
    } else if (*r) {
      const auto res = ex::cmd_roc(roc);
      std::cout << "AUC " << deepadmr::format_double(res.auc) << " over " << res.points.size() << " thresholds; ROC written to "
                << roc.output << '\n';
    } else if (*p) {
      if (p_roc->count() > 0) rep.roc = rep_roc;
      const auto files = ex::cmd_report(rep);
      std::cout << files.size() << " file(s) written to " << rep.output_dir << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_runtime;
  }
  return 0;
}
