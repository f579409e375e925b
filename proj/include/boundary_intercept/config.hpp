#ifndef BOUNDARY_INTERCEPT_CONFIG_HPP
#define BOUNDARY_INTERCEPT_CONFIG_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dgp.hpp"
#include "montecarlo.hpp"

namespace boundary_intercept {

/// Raised for a malformed simulation config; `pointer` names the offending key
/// as a JSON pointer.
class config_error : public std::runtime_error {
public:
  config_error(std::string pointer, const std::string &message)
      : std::runtime_error(pointer + ": " + message), pointer_(std::move(pointer)) {}
  const std::string &pointer() const { return pointer_; }

private:
  std::string pointer_;
};

struct DesignBlock {
  std::string name;
  SimulationDesign design; // n is overwritten per sample size
  std::vector<long> sample_sizes;
};

struct SimulationConfig {
  std::string name = "simulation";
  long replications = 1000;
  std::uint64_t seed = 20240601;
  std::vector<DesignBlock> designs;
  std::vector<EstimatorConfig> roster = default_roster();
  RunOptions options;
};

namespace detail {

template <class T>
T get_field(const nlohmann::json &obj, const std::string &key, const std::string &where) {
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception &e) {
    throw config_error(where + "/" + key, e.what());
  }
}

template <class T>
T get_field_or(const nlohmann::json &obj, const std::string &key, const std::string &where, T fallback) {
  if (!obj.contains(key)) return fallback;
  return get_field<T>(obj, key, where);
}

inline DesignBlock parse_design(const nlohmann::json &j, const std::string &where, std::uint64_t seed) {
  if (!j.is_object()) throw config_error(where, "design must be an object");
  DesignBlock block;
  block.name = get_field<std::string>(j, "name", where);
  try {
    block.design.eps_dist = parse_eps_dist(get_field_or<std::string>(j, "eps_dist", where, "normal"));
  } catch (const std::invalid_argument &e) {
    throw config_error(where + "/eps_dist", e.what());
  }
  block.design.selection_prob = get_field_or<double>(j, "selection_prob", where, 0.5);
  if (!(block.design.selection_prob > 0.0 && block.design.selection_prob < 1.0))
    throw config_error(where + "/selection_prob", "must lie in (0, 1)");
  if (j.contains("c0")) block.design.c0 = get_field<double>(j, "c0", where);
  block.design.mu0 = get_field_or<double>(j, "mu0", where, 0.0);
  block.design.base_seed = seed;
  block.sample_sizes = get_field<std::vector<long>>(j, "sample_sizes", where);
  if (block.sample_sizes.empty()) throw config_error(where + "/sample_sizes", "must not be empty");
  for (std::size_t i = 0; i < block.sample_sizes.size(); ++i)
    if (block.sample_sizes[i] < 50)
      throw config_error(where + "/sample_sizes/" + std::to_string(i), "sample size must be >= 50");
  return block;
}

} // namespace detail

/// Parses a simulation config. Either a top-level "designs" array or a single
/// design object at the top level.
inline SimulationConfig parse_simulation_config(const nlohmann::json &j) {
  if (!j.is_object()) throw config_error("", "config must be a JSON object");
  SimulationConfig cfg;
  cfg.name = detail::get_field_or<std::string>(j, "name", "", cfg.name);
  cfg.replications = detail::get_field_or<long>(j, "replications", "", cfg.replications);
  if (cfg.replications < 2) throw config_error("/replications", "must be >= 2");
  cfg.seed = detail::get_field_or<std::uint64_t>(j, "seed", "", cfg.seed);
  cfg.options.ade_bandwidth_multiplier =
      detail::get_field_or<double>(j, "ade_bandwidth_multiplier", "", 1.0);
  if (!(cfg.options.ade_bandwidth_multiplier > 0.0))
    throw config_error("/ade_bandwidth_multiplier", "must be > 0");
  if (j.contains("pilot_multipliers")) {
    const auto m = detail::get_field<std::vector<double>>(j, "pilot_multipliers", "");
    if (m.size() != 2 || !(m[0] > 0.0) || !(m[1] > 0.0))
      throw config_error("/pilot_multipliers", "expected two positive numbers");
    cfg.options.pilots = {m[0], m[1]};
  }

  if (j.contains("designs")) {
    const auto &arr = j.at("designs");
    if (!arr.is_array() || arr.empty()) throw config_error("/designs", "must be a non-empty array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      cfg.designs.push_back(detail::parse_design(arr[i], "/designs/" + std::to_string(i), cfg.seed));
  } else {
    cfg.designs.push_back(detail::parse_design(j, "", cfg.seed));
  }

  if (j.contains("estimators")) {
    const auto labels = detail::get_field<std::vector<std::string>>(j, "estimators", "");
    const auto all = default_roster();
    std::vector<EstimatorConfig> roster;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto it = std::find_if(all.begin(), all.end(),
                                   [&](const EstimatorConfig &e) { return e.label == labels[i]; });
      if (it == all.end())
        throw config_error("/estimators/" + std::to_string(i), "unknown estimator '" + labels[i] + "'");
      roster.push_back(*it);
    }
    if (std::none_of(roster.begin(), roster.end(),
                     [](const EstimatorConfig &e) { return e.method == Method::TwoStep; }))
      throw config_error("/estimators", "the twostep baseline is required for RMSE ratios");
    cfg.roster = std::move(roster);
  }
  return cfg;
}

} // namespace boundary_intercept

#endif // BOUNDARY_INTERCEPT_CONFIG_HPP
