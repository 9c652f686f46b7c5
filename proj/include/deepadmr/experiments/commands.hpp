#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepadmr/experiments/config.hpp"
#include "deepadmr/experiments/pipeline.hpp"
#include "deepadmr/experiments/report.hpp"
#include "deepadmr/experiments/roc.hpp"
#include "deepadmr/experiments/run_record.hpp"
#include "deepadmr/policy/checkpoint.hpp"
#include "deepadmr/policy/train.hpp"

namespace deepadmr::experiments {

namespace fs = std::filesystem;

/// Any failure of a command once its arguments parsed.
class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::ifstream open_in(const fs::path& p, const char* what) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CommandError(std::string("cannot open ") + what + " '" + p.string() + "'");
  return in;
}

inline void write_file(const fs::path& p, const std::string& content) {
  if (p.has_parent_path() && !fs::exists(p.parent_path()))
    throw CommandError("output directory '" + p.parent_path().string() + "' does not exist");
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw CommandError("cannot write '" + p.string() + "'");
  out << content;
  out.flush();
  if (!out) throw CommandError("failed writing '" + p.string() + "'");
}

inline policy::Checkpoint load_checkpoint(const fs::path& p) {
  auto in = open_in(p, "checkpoint");
  return policy::read_checkpoint(in);
}

inline monitor::CalibrationSet load_calibration(const fs::path& p) {
  auto in = open_in(p, "calibration");
  return monitor::CalibrationSet::read(in);
}

inline std::vector<RunRecord> load_records(const std::vector<std::string>& paths) {
  std::vector<RunRecord> out;
  for (const auto& p : paths) {
    auto in = open_in(p, "run records");
    auto recs = read_records(in);
    out.insert(out.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::string config;
  std::string output;                 // checkpoint path
  std::optional<std::string> log;     // JSON lines, one per iteration; default <output>.log
  std::optional<std::uint64_t> seed;  // overrides training.seed
  std::optional<std::size_t> iterations;
};

inline policy::Checkpoint cmd_train(const TrainOptions& opt, std::ostream* progress = nullptr) {
  auto cfg = load_config(opt.config);
  if (!cfg.scenario.nominal())
    throw CommandError("train: the scenario carries a " + std::string(sim::to_string(cfg.scenario.anomaly.kind)) +
                       " anomaly; training runs must be anomaly-free");
  if (opt.seed) cfg.training.seed = *opt.seed;
  if (opt.iterations) cfg.training.iterations = *opt.iterations;

  std::ostringstream log;
  auto on_iteration = [&](const policy::IterationLog& it) {
    nlohmann::json j = {{"iteration", it.iteration},
                        {"transitions", it.transitions},
                        {"mean_reward", it.mean_reward},
                        {"mean_episode_reward", it.mean_episode_reward},
                        {"delivery_ratio", it.delivery_ratio},
                        {"overhead", it.overhead},
                        {"policy_loss", it.update.policy_loss},
                        {"value_loss", it.update.value_loss},
                        {"entropy", it.update.entropy},
                        {"approx_kl", it.update.approx_kl}};
    log << j.dump() << '\n';
    if (progress)
      *progress << "iteration " << it.iteration << "  delivery " << format_double(std::round(it.delivery_ratio * 1000) / 1000)
                << "  reward/decision " << format_double(std::round(it.mean_reward * 1000) / 1000) << '\n';
  };
  policy::Checkpoint ck;
  ck.routing = cfg.routing;
  ck.training = cfg.training;
  ck.model = policy::train(cfg.scenario, cfg.routing, cfg.training, on_iteration);

  std::ostringstream out;
  policy::write_checkpoint(out, ck);
  detail::write_file(opt.output, out.str());
  detail::write_file(opt.log.value_or(opt.output + ".log"), log.str());
  return ck;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateOptions {
  std::string checkpoint;
  std::string config;  // nominal scenario (only "scenario" and "detector" blocks are used)
  std::string output;
  std::size_t episodes = 50;
  std::optional<std::uint64_t> seed;  // overrides scenario.seed; also seeds the policy stream
  std::optional<std::size_t> k;
  std::optional<std::size_t> window;
};

inline monitor::CalibrationSet cmd_calibrate(const CalibrateOptions& opt) {
  const auto ck = detail::load_checkpoint(opt.checkpoint);
  auto cfg = load_config(opt.config);
  if (opt.seed) cfg.scenario.seed = *opt.seed;
  const std::size_t k = opt.k.value_or(cfg.detector.k);
  const std::size_t window = opt.window.value_or(cfg.detector.window);
  if (!cfg.scenario.nominal())
    throw CommandError("calibrate: the scenario carries a " + std::string(sim::to_string(cfg.scenario.anomaly.kind)) +
                       " anomaly; calibration needs nominal runs");
  if (opt.episodes == 0) throw CommandError("calibrate: episodes must be >= 1");
  auto calib = calibrate(ck, cfg.scenario, opt.episodes, cfg.scenario.seed, k, window);
  std::ostringstream out;
  calib.write(out);
  detail::write_file(opt.output, out.str());
  return calib;
}

// ---------------------------------------------------------------- detect

struct DetectCommandOptions {
  std::string checkpoint;
  std::string calibration;
  std::string config;  // scenario (possibly anomalous) plus detector block
  std::string output;  // run records, JSON lines
  std::size_t episodes = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k;
  std::optional<double> alpha;
  std::optional<double> h;
  std::optional<std::string> scenario_id;  // default: config file stem
  bool keep_trace = true;
};

inline std::vector<RunRecord> cmd_detect(const DetectCommandOptions& opt) {
  const auto ck = detail::load_checkpoint(opt.checkpoint);
  const auto calib = detail::load_calibration(opt.calibration);
  auto cfg = load_config(opt.config);
  if (opt.seed) cfg.scenario.seed = *opt.seed;
  auto det = cfg.detector;
  if (opt.k) det.k = *opt.k;
  if (opt.alpha) det.alpha = *opt.alpha;
  if (opt.h) det.h = *opt.h;
  det.window = calib.window();
  if (det.k != calib.k())
    throw CommandError("detect: detector k=" + std::to_string(det.k) + " does not match the calibration's k=" +
                       std::to_string(calib.k()));
  if (opt.episodes == 0) throw CommandError("detect: episodes must be >= 1");
  DetectOptions d;
  d.scenario_id = opt.scenario_id.value_or(fs::path(opt.config).stem().string());
  d.policy_seed = cfg.scenario.seed;
  d.keep_trace = opt.keep_trace;
  auto records = detect(ck, calib, cfg.scenario, det, opt.episodes, d);
  std::ostringstream out;
  write_records(out, records);
  detail::write_file(opt.output, out.str());
  return records;
}

// ---------------------------------------------------------------- roc

struct RocOptions {
  std::vector<std::string> nominal;    // run-record files
  std::vector<std::string> anomalous;
  std::vector<double> h_grid;          // empty: every distinct score plus one above
  std::string output;                  // ROC CSV
};

struct RocResult {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

inline RocResult cmd_roc(const RocOptions& opt) {
  const auto nominal = detail::load_records(opt.nominal);
  const auto anomalous = detail::load_records(opt.anomalous);
  if (nominal.empty()) throw CommandError("roc: no nominal run records");
  if (anomalous.empty()) throw CommandError("roc: no anomalous run records");
  std::vector<double> s0, s1;
  for (const auto& r : nominal) {
    if (r.label != Label::Nominal) throw CommandError("roc: record '" + r.scenario_id + "' in the nominal set is labelled anomalous");
    s0.push_back(r.episode_score);
  }
  for (const auto& r : anomalous) {
    if (r.label != Label::Anomalous) throw CommandError("roc: record '" + r.scenario_id + "' in the anomalous set is labelled nominal");
    s1.push_back(r.episode_score);
  }
  RocResult res;
  res.points = compute_roc(s0, s1, opt.h_grid.empty() ? default_h_grid(s0, s1) : opt.h_grid);
  res.auc = auc(res.points);
  std::ostringstream out;
  write_roc_csv(out, res.points);
  detail::write_file(opt.output, out.str());
  return res;
}

// ---------------------------------------------------------------- report

struct ReportOptions {
  std::vector<std::string> records;
  std::optional<std::string> roc;  // ROC CSV from `roc`
  std::string output_dir;
};

/// Files written, relative to the output directory.
inline std::vector<std::string> cmd_report(const ReportOptions& opt) {
  const fs::path dir(opt.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw CommandError("cannot create output directory '" + opt.output_dir + "'");
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    detail::write_file(dir / name, content);
    written.push_back(name);
  };
  auto read_back = [&](const std::string& name, const std::vector<std::string>& cols) {
    auto in = detail::open_in(dir / name, "CSV");
    return read_csv(in, cols);
  };

  const auto records = detail::load_records(opt.records);
  std::ostringstream summary;
  summary << "scenario_id,episode,label,anomaly,N,seed,episode_score,aggregate_alarm,delivery_ratio,mean_hops,overhead\n";
  for (const auto& r : records) {
    const std::string stem = r.scenario_id + "_e" + std::to_string(r.episode);
    std::ostringstream trace, agg;
    write_trace_csv(trace, r.trace);
    write_aggregate_csv(agg, r.aggregate);
    emit(stem + "_trace.csv", trace.str());
    emit(stem + "_aggregate.csv", agg.str());
    const auto agg_t = read_back(stem + "_aggregate.csv", aggregate_columns);
    const auto trace_t = read_back(stem + "_trace.csv", trace_columns);
    emit(stem + "_trace.svg", trace_svg(agg_t, trace_t, stem + " (" + to_string(r.label) + ")"));
    summary << r.scenario_id << ',' << r.episode << ',' << to_string(r.label) << ',' << r.anomaly << ',' << r.n_nodes << ','
            << r.seed << ',' << format_double(r.episode_score) << ','
            << (r.aggregate_alarm ? std::to_string(*r.aggregate_alarm) : std::string()) << ','
            << format_double(r.metrics.delivery_ratio) << ',' << format_double(r.metrics.mean_hops) << ','
            << format_double(r.metrics.overhead) << '\n';
  }
  emit("summary.csv", summary.str());

  if (opt.roc) {
    auto in = detail::open_in(*opt.roc, "ROC CSV");
    const auto table = read_csv(in, roc_columns);
    std::ostringstream roc;
    write_roc_csv(roc, roc_from_csv(table));
    emit("roc.csv", roc.str());
    emit("roc.svg", roc_svg(read_back("roc.csv", roc_columns), "episode-level ROC"));
  }
  return written;
}

}  // namespace deepadmr::experiments
