#include "lowlight/record.hpp"

#include "lowlight/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lowlight {

using nlohmann::json;

const char* to_string(SynthMethod m) {
  switch (m) {
    case SynthMethod::Ours: return "ours";
    case SynthMethod::Retinex: return "retinex";
    case SynthMethod::InvGamma: return "invgamma";
    case SynthMethod::InvGammaPoisson: return "invgamma-poisson";
    case SynthMethod::InvGammaMixed: return "invgamma-mixed";
    case SynthMethod::LinearScale: return "linear";
    case SynthMethod::OursMosaic: return "ours-mosaic";
  }
  return "?";
}

SynthMethod synth_method_from_string(const std::string& s) {
  for (SynthMethod m : {SynthMethod::Ours, SynthMethod::Retinex, SynthMethod::InvGamma,
                        SynthMethod::InvGammaPoisson, SynthMethod::InvGammaMixed,
                        SynthMethod::LinearScale, SynthMethod::OursMosaic}) {
    if (s == to_string(m)) return m;
  }
  throw ConfigError("unknown synthesis method '" + s + "'");
}

namespace {

struct Span01 {
  double lo, hi;
  double norm(double x) const { return hi == lo ? 0.0 : (x - lo) / (hi - lo); }
  double denorm(double n) const { return lo + n * (hi - lo); }
};

Span01 inv_bits_span(const ParamRanges& r) {
  const auto [mn, mx] = std::minmax_element(r.bit_choices.begin(), r.bit_choices.end());
  return {1.0 / double(*mx), 1.0 / double(*mn)};
}

}  // namespace

std::array<double, 5> normalize_targets(const DegradationParams& p, const ParamRanges& r) {
  const Span01 k_span{r.k_bounds.lo, r.k_bounds.hi};
  const Span01 b_span = inv_bits_span(r);
  const Span01 gr_span{1.0 / r.g_r.hi, 1.0 / r.g_r.lo};
  const Span01 gb_span{1.0 / r.g_b.hi, 1.0 / r.g_b.lo};
  const Span01 gm_span{1.0 / r.gamma.hi, 1.0 / r.gamma.lo};
  return {k_span.norm(p.k), b_span.norm(1.0 / double(p.bits)), gr_span.norm(1.0 / p.g_r),
          gb_span.norm(1.0 / p.g_b), gm_span.norm(1.0 / p.gamma)};
}

std::array<double, 5> denormalize_targets(const std::array<double, 5>& n,
                                          const ParamRanges& r) {
  const Span01 k_span{r.k_bounds.lo, r.k_bounds.hi};
  const Span01 b_span = inv_bits_span(r);
  const Span01 gr_span{1.0 / r.g_r.hi, 1.0 / r.g_r.lo};
  const Span01 gb_span{1.0 / r.g_b.hi, 1.0 / r.g_b.lo};
  const Span01 gm_span{1.0 / r.gamma.hi, 1.0 / r.gamma.lo};
  return {k_span.denorm(n[0]), 1.0 / b_span.denorm(n[1]), 1.0 / gr_span.denorm(n[2]),
          1.0 / gb_span.denorm(n[3]), 1.0 / gm_span.denorm(n[4])};
}

namespace {

json ccm_selection_json(const CcmSelection& sel) {
  json j{{"mode", to_string(sel.mode)}};
  if (sel.mode == CcmMode::PickOne) {
    j["index"] = sel.index;
  } else {
    j["weights"] = sel.weights;
  }
  return j;
}

CcmSelection ccm_selection_from_json(const json& j) {
  CcmSelection sel;
  sel.mode = ccm_mode_from_string(j.at("mode").get<std::string>());
  if (sel.mode == CcmMode::PickOne) {
    sel.index = j.at("index").get<int>();
  } else {
    sel.index = -1;
    const auto w = j.at("weights");
    if (!w.is_array() || w.size() != 4)
      throw ConfigError("sidecar: ccm weights must have 4 entries");
    for (int i = 0; i < 4; ++i) sel.weights[i] = w[i].get<double>();
  }
  return sel;
}

bool uses_full_params(SynthMethod m) {
  return m == SynthMethod::Ours || m == SynthMethod::OursMosaic;
}

}  // namespace

json record_to_json(const DegradationRecord& rec) {
  json doc;
  doc["schema_version"] = rec.schema_version;
  doc["method"] = to_string(rec.method);
  doc["source"] = rec.source_id;
  doc["seed"] = rec.seed;
  doc["stream"] = rec.stream;
  doc["config_hash"] = rec.config_hash;
  doc["options"] = json{{"quant_mode", to_string(rec.options.quant_mode)},
                        {"ccm_mode", to_string(rec.options.ccm_mode)},
                        {"tone_remap", rec.options.tone_remap},
                        {"mosaic", rec.options.mosaic},
                        {"quant_enabled", rec.options.quant_enabled}};
  doc["stats"] = json{{"clipped_pixels", rec.clipped_pixels},
                      {"tone_clamped", rec.tone_clamped}};
  switch (rec.method) {
    case SynthMethod::Ours:
    case SynthMethod::OursMosaic: {
      const auto& p = rec.params;
      doc["params"] = json{{"k", p.k},
                           {"delta_s", p.delta_s},
                           {"delta_r", p.delta_r},
                           {"bits", p.bits},
                           {"g_r", p.g_r},
                           {"g_b", p.g_b},
                           {"gamma", p.gamma},
                           {"epsilon", p.epsilon},
                           {"ccm", ccm_selection_json(p.ccm)}};
      doc["normalized_targets"] = rec.normalized_targets;
      break;
    }
    case SynthMethod::Retinex:
      doc["params"] = json{{"L", rec.baseline_illumination}};
      break;
    case SynthMethod::LinearScale:
      doc["params"] = json{{"k", rec.baseline_scale}};
      break;
    case SynthMethod::InvGamma:
      doc["params"] = json{{"gamma", rec.baseline_gamma}};
      break;
    case SynthMethod::InvGammaPoisson:
      doc["params"] = json{{"gamma", rec.baseline_gamma}, {"poisson_scale", rec.poisson_scale}};
      break;
    case SynthMethod::InvGammaMixed:
      doc["params"] = json{{"gamma", rec.baseline_gamma},
                           {"poisson_scale", rec.poisson_scale},
                           {"gaussian_std", rec.gaussian_std}};
      break;
  }
  return doc;
}

DegradationRecord record_from_json(const json& doc) {
  DegradationRecord rec;
  try {
    rec.schema_version = doc.at("schema_version").get<int>();
    if (rec.schema_version > kSidecarSchemaVersion)
      throw ConfigError("sidecar: schema version " + std::to_string(rec.schema_version) +
                        " is newer than supported version " +
                        std::to_string(kSidecarSchemaVersion));
    rec.method = synth_method_from_string(doc.at("method").get<std::string>());
    rec.source_id = doc.at("source").get<std::string>();
    rec.seed = doc.at("seed").get<uint64_t>();
    rec.stream = doc.at("stream").get<uint64_t>();
    rec.config_hash = doc.at("config_hash").get<std::string>();
    const json& o = doc.at("options");
    rec.options.quant_mode = quant_mode_from_string(o.at("quant_mode").get<std::string>());
    rec.options.ccm_mode = ccm_mode_from_string(o.at("ccm_mode").get<std::string>());
    rec.options.tone_remap = o.at("tone_remap").get<bool>();
    rec.options.mosaic = o.at("mosaic").get<bool>();
    rec.options.quant_enabled = o.at("quant_enabled").get<bool>();
    if (doc.contains("stats")) {
      rec.clipped_pixels = doc.at("stats").value("clipped_pixels", 0L);
      rec.tone_clamped = doc.at("stats").value("tone_clamped", 0L);
    }
    const json& p = doc.at("params");
    if (uses_full_params(rec.method)) {
      rec.params.k = p.at("k").get<double>();
      rec.params.delta_s = p.at("delta_s").get<double>();
      rec.params.delta_r = p.at("delta_r").get<double>();
      rec.params.bits = p.at("bits").get<int>();
      rec.params.g_r = p.at("g_r").get<double>();
      rec.params.g_b = p.at("g_b").get<double>();
      rec.params.gamma = p.at("gamma").get<double>();
      rec.params.epsilon = p.at("epsilon").get<double>();
      rec.params.ccm = ccm_selection_from_json(p.at("ccm"));
      const auto nt = doc.at("normalized_targets");
      if (!nt.is_array() || nt.size() != 5)
        throw ConfigError("sidecar: normalized_targets must have 5 entries");
      for (int i = 0; i < 5; ++i) rec.normalized_targets[i] = nt[i].get<double>();
    } else {
      rec.baseline_illumination = p.value("L", 0.0);
      rec.baseline_scale = p.value("k", 0.0);
      rec.baseline_gamma = p.value("gamma", 0.0);
      rec.poisson_scale = p.value("poisson_scale", 0.0);
      rec.gaussian_std = p.value("gaussian_std", 0.0);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sidecar: ") + e.what());
  }
  return rec;
}

}  // namespace lowlight
