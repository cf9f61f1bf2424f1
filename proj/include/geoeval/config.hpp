#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "geoeval/depth_clean.hpp"
#include "geoeval/error.hpp"
#include "geoeval/io/scene_index.hpp"
#include "geoeval/metrics_depth.hpp"
#include "geoeval/metrics_pose.hpp"
#include "geoeval/metrics_recon.hpp"
#include "geoeval/sampling.hpp"

namespace geoeval {

/// Everything the CLI reads from its --config file. Every field has a
/// default, so `{}` is a valid configuration.
struct EvalConfig {
  SamplerConfig sampler;
  ReconConfig recon;
  CleanConfig clean;
  PoseMetricOptions pose;
  DepthOptions depth;
  unsigned threads = 1;

  void validate() const {
    sampler.validate();
    recon.validate();
    clean.validate();
    for (const double x : pose.accuracy_thresholds) {
      if (!(x > 0.0)) throw InvalidArgument("pose thresholds must be positive");
    }
    for (const double x : pose.auc_caps) {
      if (!(x > 0.0)) throw InvalidArgument("AUC caps must be positive");
    }
    if (!(pose.auc_step > 0.0)) throw InvalidArgument("AUC step must be positive");
    for (const double t : depth.delta_thresholds) {
      if (!(t > 1.0)) throw InvalidArgument("delta thresholds must exceed 1");
    }
    if (threads < 1) throw InvalidArgument("threads must be >= 1");
  }
};

namespace detail {

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(where + "." + key + ": wrong type");
  }
}

inline const nlohmann::json* section(const nlohmann::json& root, const char* key) {
  if (!root.contains(key)) return nullptr;
  const auto& s = root.at(key);
  if (!s.is_object()) throw ParseError(std::string("config.") + key + ": expected an object");
  return &s;
}

inline BudgetRule budget_from_json(const nlohmann::json& j, BudgetRule rule, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  reject_unknown_keys(j, {"lower", "upper", "divisor"}, where);
  read_field(j, "lower", rule.lower, where);
  read_field(j, "upper", rule.upper, where);
  read_field(j, "divisor", rule.divisor, where);
  return rule;
}

inline nlohmann::json budget_to_json(const BudgetRule& r) {
  return {{"lower", r.lower}, {"upper", r.upper}, {"divisor", r.divisor}};
}

}  // namespace detail

inline EvalConfig config_from_json(const nlohmann::json& root) {
  using detail::read_field;
  if (!root.is_object()) throw ParseError("config: expected a JSON object");
  detail::reject_unknown_keys(root, {"sampler", "recon", "clean", "pose", "depth", "threads"}, "config");
  EvalConfig cfg;
  read_field(root, "threads", cfg.threads, "config");

  if (const auto* s = detail::section(root, "sampler")) {
    const std::string w = "config.sampler";
    detail::reject_unknown_keys(*s,
                                {"sparse_voxel_size", "medium_coarsening", "sparse_budget",
                                 "medium_min", "medium_max", "dense_budget"},
                                w);
    read_field(*s, "sparse_voxel_size", cfg.sampler.sparse_voxel_size, w);
    read_field(*s, "medium_coarsening", cfg.sampler.medium_coarsening, w);
    read_field(*s, "sparse_budget", cfg.sampler.sparse_budget, w);
    read_field(*s, "dense_budget", cfg.sampler.dense_budget, w);
    if (s->contains("medium_min")) {
      cfg.sampler.medium_min = detail::budget_from_json(s->at("medium_min"), cfg.sampler.medium_min, w + ".medium_min");
    }
    if (s->contains("medium_max")) {
      cfg.sampler.medium_max = detail::budget_from_json(s->at("medium_max"), cfg.sampler.medium_max, w + ".medium_max");
    }
  }
  if (const auto* s = detail::section(root, "recon")) {
    const std::string w = "config.recon";
    detail::reject_unknown_keys(*s, {"distance_threshold", "voxel_size", "crop_inflation", "crop", "align_to_gt"}, w);
    read_field(*s, "distance_threshold", cfg.recon.distance_threshold, w);
    read_field(*s, "voxel_size", cfg.recon.voxel_size, w);
    read_field(*s, "crop_inflation", cfg.recon.crop_inflation, w);
    read_field(*s, "crop", cfg.recon.crop, w);
    read_field(*s, "align_to_gt", cfg.recon.align_to_gt, w);
  }
  if (const auto* s = detail::section(root, "clean")) {
    const std::string w = "config.clean";
    detail::reject_unknown_keys(*s,
                                {"d_min", "d_max", "flying_threshold", "erosion_radius", "bilateral_window",
                                 "sigma_spatial", "sigma_color", "min_component_area", "connectivity"},
                                w);
    read_field(*s, "d_min", cfg.clean.d_min, w);
    read_field(*s, "d_max", cfg.clean.d_max, w);
    read_field(*s, "flying_threshold", cfg.clean.flying_threshold, w);
    read_field(*s, "erosion_radius", cfg.clean.erosion_radius, w);
    read_field(*s, "bilateral_window", cfg.clean.bilateral_window, w);
    read_field(*s, "sigma_spatial", cfg.clean.sigma_spatial, w);
    read_field(*s, "sigma_color", cfg.clean.sigma_color, w);
    read_field(*s, "min_component_area", cfg.clean.min_component_area, w);
    read_field(*s, "connectivity", cfg.clean.connectivity, w);
  }
  if (const auto* s = detail::section(root, "pose")) {
    const std::string w = "config.pose";
    detail::reject_unknown_keys(*s, {"accuracy_thresholds", "auc_caps", "auc_step"}, w);
    read_field(*s, "accuracy_thresholds", cfg.pose.accuracy_thresholds, w);
    read_field(*s, "auc_caps", cfg.pose.auc_caps, w);
    read_field(*s, "auc_step", cfg.pose.auc_step, w);
  }
  if (const auto* s = detail::section(root, "depth")) {
    const std::string w = "config.depth";
    detail::reject_unknown_keys(*s, {"delta_thresholds"}, w);
    read_field(*s, "delta_thresholds", cfg.depth.delta_thresholds, w);
  }
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return cfg;
}

inline nlohmann::json to_json(const EvalConfig& c) {
  return {
      {"threads", c.threads},
      {"sampler",
       {{"sparse_voxel_size", c.sampler.sparse_voxel_size},
        {"medium_coarsening", c.sampler.medium_coarsening},
        {"sparse_budget", c.sampler.sparse_budget},
        {"medium_min", detail::budget_to_json(c.sampler.medium_min)},
        {"medium_max", detail::budget_to_json(c.sampler.medium_max)},
        {"dense_budget", c.sampler.dense_budget}}},
      {"recon",
       {{"distance_threshold", c.recon.distance_threshold},
        {"voxel_size", c.recon.voxel_size},
        {"crop_inflation", c.recon.crop_inflation},
        {"crop", c.recon.crop},
        {"align_to_gt", c.recon.align_to_gt}}},
      {"clean",
       {{"d_min", c.clean.d_min},
        {"d_max", c.clean.d_max},
        {"flying_threshold", c.clean.flying_threshold},
        {"erosion_radius", c.clean.erosion_radius},
        {"bilateral_window", c.clean.bilateral_window},
        {"sigma_spatial", c.clean.sigma_spatial},
        {"sigma_color", c.clean.sigma_color},
        {"min_component_area", c.clean.min_component_area},
        {"connectivity", c.clean.connectivity}}},
      {"pose",
       {{"accuracy_thresholds", c.pose.accuracy_thresholds},
        {"auc_caps", c.pose.auc_caps},
        {"auc_step", c.pose.auc_step}}},
      {"depth", {{"delta_thresholds", c.depth.delta_thresholds}}},
  };
}

inline EvalConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": malformed JSON: " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace geoeval
