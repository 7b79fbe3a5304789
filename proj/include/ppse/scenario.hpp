#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppse/channel.hpp"
#include "ppse/codec.hpp"
#include "ppse/system.hpp"

namespace ppse {

enum class MechanismKind { Ppm, Ssc1, Ssc2, SmFsmc, None };

std::string mechanism_name(MechanismKind kind);
MechanismKind mechanism_from_name(const std::string& name);

struct MechanismConfig {
  MechanismKind kind = MechanismKind::Ppm;
  PpmParams ppm;
  double lambda_hat = 0.7;
};

struct ScenarioConfig {
  SystemModel system;
  ChannelModel channel_user;
  ChannelModel channel_eve;
  MechanismConfig mechanism;
  int horizon = 150;
  int trials = 500;
  std::uint64_t seed = 1;
  std::vector<std::string> outputs;  // subset of {user_mse, eve_mse, kf_gap, events}

  bool wants(const std::string& output) const;
};

// Parsed scenario together with its (override-resolved) source document.
struct LoadedScenario {
  nlohmann::json doc;
  ScenarioConfig config;
  std::string path;
};

nlohmann::json read_json_file(const std::string& path);
ScenarioConfig parse_scenario(const nlohmann::json& doc);
LoadedScenario load_scenario(const std::string& path,
                             const std::vector<std::string>& overrides = {});

// Dotted-path override "a.b.c=value"; value parsed as JSON, falling back to string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Every violated invariant, one message each; empty means valid.
std::vector<std::string> collect_violations(const ScenarioConfig& cfg,
                                            const NumericsConfig& ncfg = {});
void validate_scenario(const ScenarioConfig& cfg, const NumericsConfig& ncfg = {});

std::string canonical_dump(const nlohmann::json& doc);
std::uint64_t config_digest(const nlohmann::json& doc);  // FNV-1a 64 of canonical dump

}  // namespace ppse
