#include "ppse/scenario.hpp"

#include <fstream>
#include <sstream>

namespace ppse {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

const json& member(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(where + ": missing key '" + key + "'");
  return obj.at(key);
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where + ": expected a number");
  return v.get<double>();
}

Eigen::MatrixXd as_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where + ": expected a nonempty 2-D array");
  const auto& first = v.front();
  if (!first.is_array() || first.empty()) fail(where + ": expected rows as arrays");
  Eigen::MatrixXd m(v.size(), first.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& row = v.at(i);
    if (!row.is_array() || row.size() != first.size())
      fail(where + ": ragged rows in matrix");
    for (std::size_t j = 0; j < row.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          as_number(row.at(j), where);
  }
  return m;
}

Eigen::VectorXd as_vector(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where + ": expected a nonempty array");
  Eigen::VectorXd x(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    x(static_cast<Eigen::Index>(i)) = as_number(v.at(i), where);
  return x;
}

SystemModel parse_system(const json& doc) {
  SystemModel m;
  m.A = as_matrix(member(doc, "A", "system"), "system.A");
  m.C = as_matrix(member(doc, "C", "system"), "system.C");
  m.Q = as_matrix(member(doc, "Q", "system"), "system.Q");
  m.R = as_matrix(member(doc, "R", "system"), "system.R");
  m.x0_mean = as_vector(member(doc, "x0", "system"), "system.x0");
  m.P0 = as_matrix(member(doc, "P0", "system"), "system.P0");
  if (doc.contains("B")) m.B = as_matrix(doc.at("B"), "system.B");
  if (doc.contains("D")) m.D = as_matrix(doc.at("D"), "system.D");
  if (doc.contains("E")) m.E = as_matrix(doc.at("E"), "system.E");
  if (doc.contains("u")) m.u = as_vector(doc.at("u"), "system.u");
  return m;
}

ChannelModel parse_channel(const json& doc, const std::string& where) {
  ChannelModel c;
  c.transition = as_matrix(member(doc, "transition", where), where + ".transition");
  c.dropout = as_vector(member(doc, "dropout", where), where + ".dropout");
  if (doc.contains("initial")) c.initial = as_vector(doc.at("initial"), where + ".initial");
  if (doc.contains("shared_state")) {
    if (!doc.at("shared_state").is_boolean()) fail(where + ".shared_state: expected a boolean");
    c.shared_state = doc.at("shared_state").get<bool>();
  }
  return c;
}

MechanismConfig parse_mechanism(const json& doc) {
  MechanismConfig m;
  const json& type = member(doc, "type", "mechanism");
  if (!type.is_string()) fail("mechanism.type: expected a string");
  m.kind = mechanism_from_name(type.get<std::string>());
  if (doc.contains("ppm")) {
    const json& p = doc.at("ppm");
    m.ppm.a = as_number(member(p, "a", "mechanism.ppm"), "mechanism.ppm.a");
    m.ppm.s = as_number(member(p, "s", "mechanism.ppm"), "mechanism.ppm.s");
    m.ppm.delta = as_number(member(p, "delta", "mechanism.ppm"), "mechanism.ppm.delta");
  } else if (m.kind == MechanismKind::Ppm) {
    fail("mechanism: type 'ppm' requires a 'ppm' parameter block");
  }
  if (doc.contains("smfsmc"))
    m.lambda_hat =
        as_number(member(doc.at("smfsmc"), "lambda_hat", "mechanism.smfsmc"),
                  "mechanism.smfsmc.lambda_hat");
  return m;
}

}  // namespace

std::string mechanism_name(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::Ppm: return "ppm";
    case MechanismKind::Ssc1: return "ssc1";
    case MechanismKind::Ssc2: return "ssc2";
    case MechanismKind::SmFsmc: return "smfsmc";
    case MechanismKind::None: return "none";
  }
  throw ConfigError("mechanism: unknown kind");
}

MechanismKind mechanism_from_name(const std::string& name) {
  if (name == "ppm") return MechanismKind::Ppm;
  if (name == "ssc1") return MechanismKind::Ssc1;
  if (name == "ssc2") return MechanismKind::Ssc2;
  if (name == "smfsmc") return MechanismKind::SmFsmc;
  if (name == "none") return MechanismKind::None;
  throw ConfigError("mechanism: unknown type '" + name + "'");
}

bool ScenarioConfig::wants(const std::string& output) const {
  if (outputs.empty()) return true;  // default: everything
  for (const auto& o : outputs)
    if (o == output) return true;
  return false;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
  return doc;
}

ScenarioConfig parse_scenario(const json& doc) {
  if (!doc.is_object()) throw ConfigError("scenario: top level must be an object");
  ScenarioConfig cfg;
  cfg.system = parse_system(member(doc, "system", "scenario"));
  cfg.channel_user = parse_channel(member(doc, "channel_user", "scenario"), "channel_user");
  cfg.channel_eve = parse_channel(member(doc, "channel_eve", "scenario"), "channel_eve");
  cfg.mechanism = parse_mechanism(member(doc, "mechanism", "scenario"));
  const json& h = member(doc, "horizon", "scenario");
  if (!h.is_number_integer() || h.get<long long>() < 1)
    throw ConfigError("scenario.horizon: expected a positive integer");
  cfg.horizon = h.get<int>();
  const json& t = member(doc, "trials", "scenario");
  if (!t.is_number_integer() || t.get<long long>() < 1)
    throw ConfigError("scenario.trials: expected a positive integer");
  cfg.trials = t.get<int>();
  const json& s = member(doc, "seed", "scenario");
  if (!s.is_number_integer() || s.get<long long>() < 0)
    throw ConfigError("scenario.seed: expected a nonnegative integer");
  cfg.seed = s.get<std::uint64_t>();
  if (doc.contains("outputs")) {
    const json& outs = doc.at("outputs");
    if (!outs.is_array()) throw ConfigError("scenario.outputs: expected an array of strings");
    for (const auto& o : outs) {
      if (!o.is_string()) throw ConfigError("scenario.outputs: expected an array of strings");
      const std::string name = o.get<std::string>();
      if (name != "user_mse" && name != "eve_mse" && name != "kf_gap" && name != "events")
        throw ConfigError("scenario.outputs: unknown selector '" + name + "'");
      cfg.outputs.push_back(name);
    }
  }
  return cfg;
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like dotted.path=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;  // unquoted strings (e.g. mechanism.type=ppm)
  }

  json* node = &doc;
  std::stringstream keys(path);
  std::string key;
  std::vector<std::string> parts;
  while (std::getline(keys, key, '.')) {
    if (key.empty()) throw ConfigError("override has an empty path segment: " + assignment);
    parts.push_back(key);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ConfigError("override path crosses a non-object: " + path);
    node = &(*node)[parts[i]];
  }
  if (!node->is_object()) throw ConfigError("override path crosses a non-object: " + path);
  (*node)[parts.back()] = value;
}

LoadedScenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
  LoadedScenario ls;
  ls.path = path;
  ls.doc = read_json_file(path);
  for (const auto& o : overrides) apply_override(ls.doc, o);
  ls.config = parse_scenario(ls.doc);
  return ls;
}

std::vector<std::string> collect_violations(const ScenarioConfig& cfg,
                                            const NumericsConfig& ncfg) {
  std::vector<std::string> out;
  try {
    cfg.system.validate(ncfg);
  } catch (const Error& e) {
    out.push_back(e.what());
  }
  try {
    cfg.channel_user.validate(ncfg);
  } catch (const Error& e) {
    out.push_back(std::string("channel_user: ") + e.what());
  }
  try {
    cfg.channel_eve.validate(ncfg);
  } catch (const Error& e) {
    out.push_back(std::string("channel_eve: ") + e.what());
  }
  if (cfg.mechanism.kind == MechanismKind::Ppm) {
    try {
      cfg.mechanism.ppm.validate();
    } catch (const Error& e) {
      out.push_back(e.what());
    }
  }
  if (cfg.mechanism.kind == MechanismKind::Ssc2) {
    try {
      if (spectral_radius(cfg.system.A) >= 1.0)
        out.push_back("mechanism: ssc2 requires a stable system matrix");
    } catch (const Error& e) {
      out.push_back(e.what());
    }
  }
  if (cfg.mechanism.kind == MechanismKind::SmFsmc &&
      (cfg.mechanism.lambda_hat < 0.0 || cfg.mechanism.lambda_hat > 1.0))
    out.push_back("mechanism: smfsmc lambda_hat must lie in [0, 1]");
  if (cfg.horizon < 1) out.push_back("scenario: horizon must be at least 1");
  if (cfg.trials < 1) out.push_back("scenario: trials must be at least 1");
  return out;
}

void validate_scenario(const ScenarioConfig& cfg, const NumericsConfig& ncfg) {
  const auto violations = collect_violations(cfg, ncfg);
  if (violations.empty()) return;
  std::string msg = "scenario invalid:";
  for (const auto& v : violations) msg += "\n  - " + v;
  throw ConfigError(msg);
}

std::string canonical_dump(const nlohmann::json& doc) {
  return doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

std::uint64_t config_digest(const nlohmann::json& doc) {
  const std::string s = canonical_dump(doc);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace ppse
