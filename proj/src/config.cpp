#include "lowlight/config.hpp"

#include "lowlight/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace lowlight {

using nlohmann::json;

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key))
      throw ConfigError("config: unknown key '" + key + "' in " + where);
  }
}

double get_num(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("config: " + where + "." + key + " must be a number");
  return v.get<double>();
}

UniformRange get_range(const json& obj, const char* key, UniformRange fallback,
                       const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  const std::string loc = where + "." + key;
  if (!v.is_object()) throw ConfigError("config: " + loc + " must be an object");
  check_keys(v, {"min", "max"}, loc);
  return {get_num(v, "min", fallback.lo, loc), get_num(v, "max", fallback.hi, loc)};
}

json range_json(const UniformRange& r) {
  return json{{"min", r.lo}, {"max", r.hi}};
}

json ccm_json(const CcmSet& set) {
  json mats = json::array();
  for (const auto& e : set.entries) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r)
      rows.push_back(json::array({e.forward(r, 0), e.forward(r, 1), e.forward(r, 2)}));
    mats.push_back(json{{"name", e.name}, {"rows", rows}});
  }
  return json{{"matrices", mats}};
}

CcmSet parse_ccm_json(const json& doc, const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + ": expected an object");
  check_keys(doc, {"matrices"}, where);
  if (!doc.contains("matrices") || !doc.at("matrices").is_array())
    throw ConfigError(where + ": missing 'matrices' array");
  CcmSet set;
  for (const auto& m : doc.at("matrices")) {
    check_keys(m, {"name", "rows"}, where + ".matrices[]");
    CcmEntry e;
    e.name = m.value("name", std::string("unnamed"));
    if (!m.contains("rows") || !m.at("rows").is_array() || m.at("rows").size() != 3)
      throw ConfigError(where + ": CCM '" + e.name + "' must have exactly 3 rows");
    for (int r = 0; r < 3; ++r) {
      const json& row = m.at("rows")[r];
      if (!row.is_array() || row.size() != 3)
        throw ConfigError(where + ": CCM '" + e.name + "' row " + std::to_string(r) +
                          " must have 3 entries");
      for (int c = 0; c < 3; ++c) {
        if (!row[c].is_number())
          throw ConfigError(where + ": CCM '" + e.name + "' row " + std::to_string(r) +
                            " entry " + std::to_string(c) + " must be a number");
        e.forward(r, c) = row[c].get<double>();
      }
    }
    try {
      e.inverse = e.forward.inverse();
    } catch (const ParamError&) {
      throw ConfigError(where + ": CCM '" + e.name + "' is singular");
    }
    set.entries.push_back(std::move(e));
  }
  set.validate();
  return set;
}

json parse_json_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(std::string(what) + ": cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports "at line L, column C" in the message.
    throw ConfigError(std::string(what) + " " + path.string() + ": " + e.what());
  }
}

}  // namespace

AppConfig AppConfig::defaults() {
  AppConfig cfg;
  cfg.ccms = CcmSet::builtin_defaults();
  cfg.rehash();
  return cfg;
}

void AppConfig::rehash() {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                (unsigned long long)fnv1a64(canonical_config_json(*this)));
  config_hash = buf;
}

std::string canonical_config_json(const AppConfig& cfg) {
  json bits = json::array();
  for (int b : cfg.ranges.bit_choices) bits.push_back(b);
  json doc{
      {"ranges",
       {{"k", {{"mean", cfg.ranges.k_mean}, {"std", cfg.ranges.k_std},
               {"min", cfg.ranges.k_bounds.lo}, {"max", cfg.ranges.k_bounds.hi}}},
        {"log10_delta_s", range_json(cfg.ranges.log10_delta_s)},
        {"read_noise_law", {{"slope", cfg.ranges.read_law_slope},
                            {"intercept", cfg.ranges.read_law_intercept},
                            {"std", cfg.ranges.read_law_std}}},
        {"bits", bits},
        {"g_r", range_json(cfg.ranges.g_r)},
        {"g_b", range_json(cfg.ranges.g_b)},
        {"gamma", range_json(cfg.ranges.gamma)},
        {"epsilon", cfg.ranges.epsilon}}},
      {"ccm", ccm_json(cfg.ccms)},
      {"pipeline",
       {{"quant_mode", to_string(cfg.pipeline.quant_mode)},
        {"ccm_mode", to_string(cfg.pipeline.ccm_mode)},
        {"tone_remap", cfg.pipeline.tone_remap},
        {"mosaic", cfg.pipeline.mosaic},
        {"quant_enabled", cfg.pipeline.quant_enabled}}},
      {"baseline",
       {{"poisson_scale", cfg.baseline.poisson_scale},
        {"gaussian_std", cfg.baseline.gaussian_std}}},
  };
  return doc.dump();
}

CcmSet load_ccm_file(const std::filesystem::path& path) {
  return parse_ccm_json(parse_json_file(path, "ccm file"), "ccm file " + path.string());
}

AppConfig load_config(const std::filesystem::path& path) {
  AppConfig cfg;
  cfg.ccms = CcmSet::builtin_defaults();
  if (path.empty()) {
    cfg.rehash();
    return cfg;
  }

  const json doc = parse_json_file(path, "config");
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(doc, {"ranges", "ccm_file", "pipeline", "baseline", "log_level"}, "top level");

  if (doc.contains("ranges")) {
    const json& r = doc.at("ranges");
    check_keys(r, {"k", "log10_delta_s", "read_noise_law", "bits", "g_r", "g_b", "gamma",
                   "epsilon"},
               "ranges");
    if (r.contains("k")) {
      const json& k = r.at("k");
      check_keys(k, {"mean", "std", "min", "max"}, "ranges.k");
      cfg.ranges.k_mean = get_num(k, "mean", cfg.ranges.k_mean, "ranges.k");
      cfg.ranges.k_std = get_num(k, "std", cfg.ranges.k_std, "ranges.k");
      cfg.ranges.k_bounds.lo = get_num(k, "min", cfg.ranges.k_bounds.lo, "ranges.k");
      cfg.ranges.k_bounds.hi = get_num(k, "max", cfg.ranges.k_bounds.hi, "ranges.k");
    }
    cfg.ranges.log10_delta_s =
        get_range(r, "log10_delta_s", cfg.ranges.log10_delta_s, "ranges");
    if (r.contains("read_noise_law")) {
      const json& law = r.at("read_noise_law");
      check_keys(law, {"slope", "intercept", "std"}, "ranges.read_noise_law");
      cfg.ranges.read_law_slope =
          get_num(law, "slope", cfg.ranges.read_law_slope, "ranges.read_noise_law");
      cfg.ranges.read_law_intercept =
          get_num(law, "intercept", cfg.ranges.read_law_intercept, "ranges.read_noise_law");
      cfg.ranges.read_law_std =
          get_num(law, "std", cfg.ranges.read_law_std, "ranges.read_noise_law");
    }
    if (r.contains("bits")) {
      if (!r.at("bits").is_array()) throw ConfigError("config: ranges.bits must be an array");
      cfg.ranges.bit_choices.clear();
      for (const auto& b : r.at("bits")) {
        if (!b.is_number_integer())
          throw ConfigError("config: ranges.bits entries must be integers");
        cfg.ranges.bit_choices.push_back(b.get<int>());
      }
    }
    cfg.ranges.g_r = get_range(r, "g_r", cfg.ranges.g_r, "ranges");
    cfg.ranges.g_b = get_range(r, "g_b", cfg.ranges.g_b, "ranges");
    cfg.ranges.gamma = get_range(r, "gamma", cfg.ranges.gamma, "ranges");
    cfg.ranges.epsilon = get_num(r, "epsilon", cfg.ranges.epsilon, "ranges");
  }

  if (doc.contains("ccm_file")) {
    if (!doc.at("ccm_file").is_string())
      throw ConfigError("config: ccm_file must be a string path");
    std::filesystem::path ccm_path = doc.at("ccm_file").get<std::string>();
    if (ccm_path.is_relative()) ccm_path = path.parent_path() / ccm_path;
    cfg.ccms = load_ccm_file(ccm_path);
    cfg.ccm_source = ccm_path.string();
  }

  if (doc.contains("pipeline")) {
    const json& p = doc.at("pipeline");
    check_keys(p, {"quant_mode", "ccm_mode", "tone_remap", "mosaic", "quant_enabled"},
               "pipeline");
    if (p.contains("quant_mode"))
      cfg.pipeline.quant_mode = quant_mode_from_string(p.at("quant_mode").get<std::string>());
    if (p.contains("ccm_mode"))
      cfg.pipeline.ccm_mode = ccm_mode_from_string(p.at("ccm_mode").get<std::string>());
    if (p.contains("tone_remap")) cfg.pipeline.tone_remap = p.at("tone_remap").get<bool>();
    if (p.contains("mosaic")) cfg.pipeline.mosaic = p.at("mosaic").get<bool>();
    if (p.contains("quant_enabled"))
      cfg.pipeline.quant_enabled = p.at("quant_enabled").get<bool>();
  }

  if (doc.contains("baseline")) {
    const json& b = doc.at("baseline");
    check_keys(b, {"poisson_scale", "gaussian_std"}, "baseline");
    cfg.baseline.poisson_scale =
        get_num(b, "poisson_scale", cfg.baseline.poisson_scale, "baseline");
    cfg.baseline.gaussian_std = get_num(b, "gaussian_std", cfg.baseline.gaussian_std, "baseline");
    if (!(cfg.baseline.poisson_scale > 0.0))
      throw ConfigError("config: baseline.poisson_scale must be positive");
    if (cfg.baseline.gaussian_std < 0.0)
      throw ConfigError("config: baseline.gaussian_std must be nonnegative");
  }

  if (doc.contains("log_level")) {
    if (!doc.at("log_level").is_string())
      throw ConfigError("config: log_level must be a string");
    cfg.log_level = doc.at("log_level").get<std::string>();
  }

  cfg.ranges.validate();
  cfg.ccms.validate();
  cfg.rehash();
  return cfg;
}

}  // namespace lowlight
