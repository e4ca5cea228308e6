#include "shiftbai/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "shiftbai/errors.hpp"

namespace shiftbai {

namespace {

using nlohmann::json;

ShiftSpec parse_shift(const json& node) {
  if (!node.is_object() || !node.contains("kind"))
    throw config_error("shift: expected an object with a 'kind' key");
  const std::string kind = node.at("kind").get<std::string>();
  if (kind == "zero") return ShiftSpec::zero();
  if (kind == "uniform-continuous") {
    if (!node.contains("lo") || !node.contains("hi"))
      throw config_error("shift: uniform-continuous requires 'lo' and 'hi'");
    return ShiftSpec::uniform(node.at("lo").get<double>(), node.at("hi").get<double>());
  }
  if (kind == "fixed-sequence") {
    if (!node.contains("values")) throw config_error("shift: fixed-sequence requires 'values'");
    return ShiftSpec::fixed(node.at("values").get<std::vector<double>>());
  }
  throw config_error("shift: unknown kind '" + kind + "'");
}

ScenarioSpec parse_scenario(const json& node) {
  if (node.is_string()) {
    const std::string s = node.get<std::string>();
    if (s == "worst-case") return ScenarioSpec::named(Scenario::WorstCase);
    if (s == "cannot-sample-all-arms") return ScenarioSpec::named(Scenario::CannotSampleAllArms);
    if (s == "sample-1to10-per-arm") return ScenarioSpec::named(Scenario::Sample1To10PerArm);
    if (s == "general") return ScenarioSpec::named(Scenario::General);
    throw config_error("scenario: unknown name '" + s + "'");
  }
  if (node.is_object()) {
    if (!node.contains("kind") || node.at("kind").get<std::string>() != "custom")
      throw config_error("scenario: object form must have kind 'custom'");
    if (!node.contains("cp_min") || !node.contains("cp_max"))
      throw config_error("scenario: custom requires 'cp_min' and 'cp_max'");
    return ScenarioSpec::custom(node.at("cp_min").get<long>(), node.at("cp_max").get<long>());
  }
  throw config_error("scenario: expected a name or a custom object");
}

PolicySpec parse_policy(const json& node) {
  if (!node.is_object() || !node.contains("kind"))
    throw config_error("policies: each entry needs a 'kind' key");
  PolicySpec spec = parse_policy_kind(node.at("kind").get<std::string>());
  if (node.contains("n0")) spec.n0 = node.at("n0").get<int>();
  if (node.contains("sigma_mode")) {
    const std::string m = node.at("sigma_mode").get<std::string>();
    if (m == "known")
      spec.sigma_mode = SigmaMode::Known;
    else if (m == "estimated")
      spec.sigma_mode = SigmaMode::Estimated;
    else
      throw config_error("sigma_mode must be 'known' or 'estimated', got '" + m + "'");
  }
  return spec;
}

template <typename T>
T require(const json& root, const char* key) {
  if (!root.contains(key)) throw config_error(std::string("missing config key '") + key + "'");
  try {
    return root.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw config_error("config root must be an object");

  ExperimentConfig cfg;
  const std::string conf = require<std::string>(root, "configuration");
  if (conf == "MDM")
    cfg.configuration = Configuration::MDM;
  else if (conf == "SC")
    cfg.configuration = Configuration::SC;
  else
    throw config_error("configuration must be 'MDM' or 'SC', got '" + conf + "'");

  cfg.K = require<int>(root, "K");
  cfg.delta = require<double>(root, "delta");
  cfg.sigma = require<double>(root, "sigma");
  if (!root.contains("shift")) throw config_error("missing config key 'shift'");
  cfg.shift = parse_shift(root.at("shift"));
  if (!root.contains("scenario")) throw config_error("missing config key 'scenario'");
  cfg.scenario = parse_scenario(root.at("scenario"));
  cfg.budgets = require<std::vector<long>>(root, "budgets");
  cfg.replications = require<long>(root, "replications");
  cfg.base_seed = require<std::uint64_t>(root, "base_seed");
  if (!root.contains("policies") || !root.at("policies").is_array())
    throw config_error("missing config key 'policies' (array)");
  for (const auto& p : root.at("policies")) cfg.policies.push_back(parse_policy(p));

  validate(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
  json root;
  root["configuration"] = configuration_string(config.configuration);
  root["K"] = config.K;
  root["delta"] = config.delta;
  root["sigma"] = config.sigma;
  json shift;
  switch (config.shift.kind) {
    case ShiftSpec::Kind::Zero:
      shift["kind"] = "zero";
      break;
    case ShiftSpec::Kind::UniformContinuous:
      shift["kind"] = "uniform-continuous";
      shift["lo"] = config.shift.lo;
      shift["hi"] = config.shift.hi;
      break;
    case ShiftSpec::Kind::FixedSequence:
      shift["kind"] = "fixed-sequence";
      shift["values"] = config.shift.values;
      break;
  }
  root["shift"] = shift;
  if (config.scenario.kind == Scenario::Custom) {
    root["scenario"] = {{"kind", "custom"},
                        {"cp_min", config.scenario.cp_min},
                        {"cp_max", config.scenario.cp_max}};
  } else {
    root["scenario"] = scenario_string(config.scenario);
  }
  root["budgets"] = config.budgets;
  root["replications"] = config.replications;
  root["base_seed"] = config.base_seed;
  json pols = json::array();
  for (const auto& p : config.policies) {
    json node;
    node["kind"] = policy_kind_string(p);
    node["n0"] = p.n0;
    node["sigma_mode"] = p.sigma_mode == SigmaMode::Known ? "known" : "estimated";
    pols.push_back(node);
  }
  root["policies"] = pols;
  return root.dump(2);
}

}  // namespace shiftbai
