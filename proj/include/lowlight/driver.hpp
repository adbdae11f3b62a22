#pragma once

#include "lowlight/baseline.hpp"
#include "lowlight/config.hpp"
#include "lowlight/degrade_pipeline.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace lowlight {

// Per-image RNG substreams derived from (master seed, image index).
inline constexpr uint64_t kParamSubstream = 0;
inline constexpr uint64_t kNoiseSubstream = 1;

// Samples method parameters on substream 0 and runs the degradation with
// noise on substream 1. The returned record replays bit-exactly.
DegradeOutput run_method(SynthMethod method, const PlanarImage& srgb, const AppConfig& cfg,
                         uint64_t seed, uint64_t image_index);

// Re-derives the degraded image from the source and its record.
PlanarImage replay_record(const PlanarImage& src, const DegradationRecord& rec,
                          const AppConfig& cfg);

// Effective config hash for a record: the loaded config with the record's
// pipeline options swapped in. Replay refuses records whose stored hash
// does not match.
std::string effective_config_hash(const AppConfig& cfg, const PipelineOptions& options);

struct FileEntry {
  std::string source;
  std::string output;
  std::string sidecar;
  bool ok = false;
  std::string error;
  std::string warning;
  DegradationRecord record;
};

struct Histogram {
  double lo = 0.0, hi = 1.0;
  std::vector<long> counts;

  void add(double x);
};

struct BatchManifest {
  int schema_version = kSidecarSchemaVersion;
  SynthMethod method = SynthMethod::Ours;
  uint64_t seed = 0;
  std::string config_hash;
  std::vector<FileEntry> entries;  // sorted by source name
  long files_ok = 0;
  long files_failed = 0;
  long clipped_pixels_total = 0;
  Histogram k_hist, gamma_hist, g_r_hist, g_b_hist;
  std::vector<std::pair<int, long>> bits_counts;
};

nlohmann::json manifest_to_json(const BatchManifest& m);

// Lists decodable inputs in sorted order, degrades each on its own stream,
// writes PNG + sidecar per input plus a manifest file. Output is
// independent of the parallelism level. Unreadable images become per-file
// error entries; an unwritable output directory aborts.
BatchManifest degrade_batch(const std::filesystem::path& in_dir,
                            const std::filesystem::path& out_dir, const AppConfig& cfg,
                            uint64_t seed, int jobs, SynthMethod method = SynthMethod::Ours);

struct ReplayOutcome {
  int checked = 0;
  int mismatched = 0;
  int failed = 0;  // unreadable/missing/refused
  std::vector<std::string> messages;
};

// Verifies every sidecar in deg_dir against the sources in src_dir:
// recomputes the degraded image and compares the quantized pixels with the
// stored output bit for bit.
ReplayOutcome replay_batch(const std::filesystem::path& src_dir,
                           const std::filesystem::path& deg_dir, const AppConfig& cfg);

std::vector<std::filesystem::path> list_input_images(const std::filesystem::path& dir);

}  // namespace lowlight
