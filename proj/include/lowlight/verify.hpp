#pragma once

#include "lowlight/config.hpp"
#include "lowlight/sensor_noise.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lowlight {

struct CheckEntry {
  std::string name;
  double expected = 0.0;
  double observed = 0.0;
  double tolerance = 0.0;
  std::optional<double> p_value;
  bool pass = false;
  std::string note;
};

struct VerificationReport {
  int schema_version = 1;
  uint64_t seed = 0;
  std::string config_hash;
  std::vector<CheckEntry> entries;

  bool overall_pass() const;
};

// Mean/variance conformance of the shot+read noise law at a constant
// intensity: mean within 4 standard errors of k*x0, variance within 2%.
std::vector<CheckEntry> verify_noise_law(const DegradationParams& p, double x0, long long n,
                                         uint64_t seed);

// Grid-based forward/inverse identities for gamma, tone, white balance and
// CCM, plus the degenerate full-pipeline identity in tone-remap mode.
std::vector<CheckEntry> verify_roundtrips(const AppConfig& cfg, double tol);

// Range containment and distribution tests over n parameter draws.
std::vector<CheckEntry> verify_sampling(const AppConfig& cfg, long long n, uint64_t seed);

// Runs a 20-image batch twice (1 worker vs 8) in a scratch directory,
// compares all output bytes, and replays every record.
std::vector<CheckEntry> verify_determinism(const AppConfig& cfg, uint64_t seed,
                                           const std::filesystem::path& scratch);

VerificationReport run_verification(const AppConfig& cfg, uint64_t seed,
                                    const std::filesystem::path& scratch);

nlohmann::json report_to_json(const VerificationReport& report);

}  // namespace lowlight
