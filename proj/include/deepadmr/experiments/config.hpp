#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "deepadmr/common/json_util.hpp"
#include "deepadmr/monitor/cusum.hpp"
#include "deepadmr/policy/train.hpp"
#include "deepadmr/sim/scenario.hpp"

namespace deepadmr::experiments {

/// Full experiment description; every block is optional and falls back to library defaults.
///
///   {"scenario": {...}, "routing": {"k_max", "cq": {"beta_q","beta_c","gamma_q","c_init"}},
///    "reward": {"w1","w2","w3","w4"},
///    "training": {"iterations","episodes_per_iteration","hidden","seed",
///                 "ppo": {"gamma","lambda","clip","epochs","minibatch","lr_actor","lr_critic",
///                         "entropy_coef","max_grad_norm"}},
///    "detector": {"k","alpha","h","p_floor","window"}}
struct ExperimentConfig {
  sim::ScenarioConfig scenario;
  policy::RoutingConfig routing;
  policy::TrainingConfig training;
  monitor::DetectorConfig detector;
};

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using json_util::read_if_present;
  using json_util::require_known_keys;
  require_known_keys(j, {"scenario", "routing", "reward", "training", "detector"}, "config");
  ExperimentConfig cfg;
  try {
    if (j.contains("scenario")) cfg.scenario = sim::scenario_from_json(j.at("scenario"));
    if (j.contains("routing")) {
      const auto& r = j.at("routing");
      require_known_keys(r, {"k_max", "cq"}, "routing");
      read_if_present(r, "k_max", cfg.routing.k_max, "routing");
      if (r.contains("cq")) {
        const auto& c = r.at("cq");
        require_known_keys(c, {"beta_q", "beta_c", "gamma_q", "c_init"}, "routing.cq");
        read_if_present(c, "beta_q", cfg.routing.cq.beta_q, "routing.cq");
        read_if_present(c, "beta_c", cfg.routing.cq.beta_c, "routing.cq");
        read_if_present(c, "gamma_q", cfg.routing.cq.gamma_q, "routing.cq");
        read_if_present(c, "c_init", cfg.routing.cq.c_init, "routing.cq");
      }
    }
    if (j.contains("reward")) {
      const auto& w = j.at("reward");
      require_known_keys(w, {"w1", "w2", "w3", "w4"}, "reward");
      read_if_present(w, "w1", cfg.routing.reward.w1, "reward");
      read_if_present(w, "w2", cfg.routing.reward.w2, "reward");
      read_if_present(w, "w3", cfg.routing.reward.w3, "reward");
      read_if_present(w, "w4", cfg.routing.reward.w4, "reward");
    }
    if (j.contains("training")) {
      const auto& t = j.at("training");
      require_known_keys(t, {"iterations", "episodes_per_iteration", "hidden", "seed", "ppo"}, "training");
      read_if_present(t, "iterations", cfg.training.iterations, "training");
      read_if_present(t, "episodes_per_iteration", cfg.training.episodes_per_iteration, "training");
      read_if_present(t, "hidden", cfg.training.hidden, "training");
      read_if_present(t, "seed", cfg.training.seed, "training");
      if (t.contains("ppo")) {
        const auto& p = t.at("ppo");
        auto& hp = cfg.training.ppo;
        require_known_keys(p, {"gamma", "lambda", "clip", "epochs", "minibatch", "lr_actor", "lr_critic", "entropy_coef",
                               "max_grad_norm"},
                           "training.ppo");
        read_if_present(p, "gamma", hp.gamma, "training.ppo");
        read_if_present(p, "lambda", hp.lambda, "training.ppo");
        read_if_present(p, "clip", hp.clip, "training.ppo");
        read_if_present(p, "epochs", hp.epochs, "training.ppo");
        read_if_present(p, "minibatch", hp.minibatch, "training.ppo");
        read_if_present(p, "lr_actor", hp.lr_actor, "training.ppo");
        read_if_present(p, "lr_critic", hp.lr_critic, "training.ppo");
        read_if_present(p, "entropy_coef", hp.entropy_coef, "training.ppo");
        read_if_present(p, "max_grad_norm", hp.max_grad_norm, "training.ppo");
      }
    }
    if (j.contains("detector")) {
      const auto& d = j.at("detector");
      require_known_keys(d, {"k", "alpha", "h", "p_floor", "window"}, "detector");
      read_if_present(d, "k", cfg.detector.k, "detector");
      read_if_present(d, "alpha", cfg.detector.alpha, "detector");
      read_if_present(d, "h", cfg.detector.h, "detector");
      read_if_present(d, "window", cfg.detector.window, "detector");
      if (d.contains("p_floor") && !d.at("p_floor").is_null()) cfg.detector.p_floor = d.at("p_floor").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    cfg.routing.validate();
    cfg.training.validate();
    cfg.detector.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace deepadmr::experiments
