#include "lowlight/driver.hpp"

#include "lowlight/errors.hpp"
#include "lowlight/image_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

namespace lowlight {

using nlohmann::json;

namespace {

DegradeOutput run_ours(SynthMethod method, const PlanarImage& srgb, const AppConfig& cfg,
                       StreamRng& param_rng, StreamRng& noise_rng) {
  DegradationParams p = sample_params(param_rng, cfg.ranges, cfg.ccms, cfg.pipeline.ccm_mode);
  if (method == SynthMethod::OursMosaic)
    return degrade_with_mosaic(srgb, p, cfg.pipeline, cfg.ccms, cfg.ranges, noise_rng);
  return degrade_full(srgb, p, cfg.pipeline, cfg.ccms, cfg.ranges, noise_rng);
}

BaselineNoise noise_for(SynthMethod m) {
  switch (m) {
    case SynthMethod::InvGammaPoisson: return BaselineNoise::Poisson;
    case SynthMethod::InvGammaMixed: return BaselineNoise::GaussianPoisson;
    default: return BaselineNoise::None;
  }
}

}  // namespace

DegradeOutput run_method(SynthMethod method, const PlanarImage& srgb, const AppConfig& cfg,
                         uint64_t seed, uint64_t image_index) {
  StreamRng param_rng(seed, {image_index, kParamSubstream});
  StreamRng noise_rng(seed, {image_index, kNoiseSubstream});

  SynthMethod effective = method;
  if (method == SynthMethod::Ours && cfg.pipeline.mosaic) effective = SynthMethod::OursMosaic;

  DegradeOutput out;
  switch (effective) {
    case SynthMethod::Ours:
    case SynthMethod::OursMosaic:
      out = run_ours(effective, srgb, cfg, param_rng, noise_rng);
      break;
    case SynthMethod::Retinex: {
      // L shares the attenuation parameter's distribution and range.
      const double L = param_rng.truncated_normal(cfg.ranges.k_mean, cfg.ranges.k_std,
                                                  cfg.ranges.k_bounds.lo, cfg.ranges.k_bounds.hi);
      out.image = retinex_degrade(srgb, L);
      out.record.method = effective;
      out.record.baseline_illumination = L;
      break;
    }
    case SynthMethod::LinearScale: {
      const double k = param_rng.truncated_normal(cfg.ranges.k_mean, cfg.ranges.k_std,
                                                  cfg.ranges.k_bounds.lo, cfg.ranges.k_bounds.hi);
      out.image = linear_scale_degrade(srgb, k);
      out.record.method = effective;
      out.record.baseline_scale = k;
      break;
    }
    case SynthMethod::InvGamma:
    case SynthMethod::InvGammaPoisson:
    case SynthMethod::InvGammaMixed: {
      const double gamma = param_rng.uniform(cfg.ranges.gamma.lo, cfg.ranges.gamma.hi);
      out.image = gamma_noise_degrade(srgb, gamma, noise_for(effective),
                                      cfg.baseline.poisson_scale, cfg.baseline.gaussian_std,
                                      noise_rng);
      out.record.method = effective;
      out.record.baseline_gamma = gamma;
      if (effective != SynthMethod::InvGamma)
        out.record.poisson_scale = cfg.baseline.poisson_scale;
      if (effective == SynthMethod::InvGammaMixed)
        out.record.gaussian_std = cfg.baseline.gaussian_std;
      break;
    }
  }
  out.record.options = cfg.pipeline;
  out.record.options.mosaic = effective == SynthMethod::OursMosaic;
  out.record.seed = seed;
  out.record.stream = image_index;
  out.record.config_hash = effective_config_hash(cfg, out.record.options);
  return out;
}

PlanarImage replay_record(const PlanarImage& src, const DegradationRecord& rec,
                          const AppConfig& cfg) {
  StreamRng noise_rng(rec.seed, {rec.stream, kNoiseSubstream});
  switch (rec.method) {
    case SynthMethod::Ours:
      return degrade_full(src, rec.params, rec.options, cfg.ccms, cfg.ranges, noise_rng).image;
    case SynthMethod::OursMosaic:
      return degrade_with_mosaic(src, rec.params, rec.options, cfg.ccms, cfg.ranges, noise_rng)
          .image;
    case SynthMethod::Retinex:
      return retinex_degrade(src, rec.baseline_illumination);
    case SynthMethod::LinearScale:
      return linear_scale_degrade(src, rec.baseline_scale);
    case SynthMethod::InvGamma:
    case SynthMethod::InvGammaPoisson:
    case SynthMethod::InvGammaMixed:
      return gamma_noise_degrade(src, rec.baseline_gamma, noise_for(rec.method),
                                 rec.poisson_scale, rec.gaussian_std, noise_rng);
  }
  throw Error("replay_record: unhandled method");
}

std::string effective_config_hash(const AppConfig& cfg, const PipelineOptions& options) {
  AppConfig effective = cfg;
  effective.pipeline = options;
  effective.rehash();
  return effective.config_hash;
}

void Histogram::add(double x) {
  if (counts.empty()) return;
  int b = int(std::floor((x - lo) / (hi - lo) * double(counts.size())));
  b = std::clamp(b, 0, int(counts.size()) - 1);
  ++counts[b];
}

std::vector<std::filesystem::path> list_input_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw IoError("input directory does not exist: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && is_supported_image(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  return files;
}

namespace {

json histogram_json(const Histogram& h) {
  return json{{"min", h.lo}, {"max", h.hi}, {"counts", h.counts}};
}

void run_parallel(size_t count, int jobs, const std::function<void(size_t)>& work) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  const int n_threads = int(std::min<size_t>(size_t(jobs), count));
  pool.reserve(size_t(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= count) return;
        work(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

json manifest_to_json(const BatchManifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    json je{{"source", e.source}, {"ok", e.ok}};
    if (e.ok) {
      je["output"] = e.output;
      je["sidecar"] = e.sidecar;
      je["clipped_pixels"] = e.record.clipped_pixels;
      je["tone_clamped"] = e.record.tone_clamped;
    } else {
      je["error"] = e.error;
    }
    if (!e.warning.empty()) je["warning"] = e.warning;
    entries.push_back(std::move(je));
  }
  json bits = json::object();
  for (const auto& [b, c] : m.bits_counts) bits[std::to_string(b)] = c;
  return json{
      {"schema_version", m.schema_version},
      {"method", to_string(m.method)},
      {"seed", m.seed},
      {"config_hash", m.config_hash},
      {"entries", entries},
      {"aggregate",
       {{"files_ok", m.files_ok},
        {"files_failed", m.files_failed},
        {"clipped_pixels_total", m.clipped_pixels_total},
        {"histograms",
         {{"k", histogram_json(m.k_hist)},
          {"gamma", histogram_json(m.gamma_hist)},
          {"g_r", histogram_json(m.g_r_hist)},
          {"g_b", histogram_json(m.g_b_hist)},
          {"bits", bits}}}}},
  };
}

BatchManifest degrade_batch(const std::filesystem::path& in_dir,
                            const std::filesystem::path& out_dir, const AppConfig& cfg,
                            uint64_t seed, int jobs, SynthMethod method) {
  const auto files = list_input_images(in_dir);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw IoError("cannot create output directory " + out_dir.string());

  BatchManifest manifest;
  manifest.method = method;
  manifest.seed = seed;
  manifest.config_hash = cfg.config_hash;
  manifest.entries.resize(files.size());
  const int hist_bins = 20;
  manifest.k_hist = {cfg.ranges.k_bounds.lo, cfg.ranges.k_bounds.hi,
                     std::vector<long>(hist_bins, 0)};
  manifest.gamma_hist = {cfg.ranges.gamma.lo, cfg.ranges.gamma.hi,
                         std::vector<long>(hist_bins, 0)};
  manifest.g_r_hist = {cfg.ranges.g_r.lo, cfg.ranges.g_r.hi, std::vector<long>(hist_bins, 0)};
  manifest.g_b_hist = {cfg.ranges.g_b.lo, cfg.ranges.g_b.hi, std::vector<long>(hist_bins, 0)};

  std::atomic<bool> io_failure{false};
  std::mutex io_mutex;
  std::string io_message;

  run_parallel(files.size(), jobs, [&](size_t i) {
    FileEntry& entry = manifest.entries[i];
    entry.source = files[i].filename().string();

    // Unreadable or undecodable inputs are per-file failures; the batch
    // carries on.
    PlanarImage src;
    try {
      std::string warning;
      src = read_image(files[i], &warning);
      entry.warning = warning;
    } catch (const std::exception& e) {
      entry.ok = false;
      entry.error = e.what();
      return;
    }

    try {
      DegradeOutput out = run_method(method, src, cfg, seed, i);
      out.record.source_id = entry.source;
      const std::string stem = files[i].stem().string();
      const auto out_png = out_dir / (stem + ".png");
      const auto out_sidecar = out_dir / (stem + ".deg.json");
      write_image(out.image, out_png);
      std::ofstream sc(out_sidecar);
      if (!sc) throw IoError("cannot write sidecar " + out_sidecar.string());
      sc << record_to_json(out.record).dump(2) << "\n";
      if (!sc) throw IoError("failed writing sidecar " + out_sidecar.string());
      entry.output = out_png.filename().string();
      entry.sidecar = out_sidecar.filename().string();
      entry.record = std::move(out.record);
      entry.ok = true;
    } catch (const IoError& e) {
      // Output-side failure: record it and abort once the workers drain.
      std::lock_guard<std::mutex> lock(io_mutex);
      if (io_message.empty()) io_message = e.what();
      io_failure = true;
      entry.ok = false;
      entry.error = e.what();
    } catch (const std::exception& e) {
      entry.ok = false;
      entry.error = e.what();
    }
  });
  if (io_failure) throw IoError(io_message);

  for (const auto& e : manifest.entries) {
    if (!e.ok) {
      ++manifest.files_failed;
      continue;
    }
    ++manifest.files_ok;
    manifest.clipped_pixels_total += e.record.clipped_pixels;
    if (e.record.method == SynthMethod::Ours || e.record.method == SynthMethod::OursMosaic) {
      manifest.k_hist.add(e.record.params.k);
      manifest.gamma_hist.add(e.record.params.gamma);
      manifest.g_r_hist.add(e.record.params.g_r);
      manifest.g_b_hist.add(e.record.params.g_b);
      auto it = std::find_if(manifest.bits_counts.begin(), manifest.bits_counts.end(),
                             [&](const auto& p) { return p.first == e.record.params.bits; });
      if (it == manifest.bits_counts.end()) {
        manifest.bits_counts.emplace_back(e.record.params.bits, 1);
      } else {
        ++it->second;
      }
    }
  }
  std::sort(manifest.bits_counts.begin(), manifest.bits_counts.end());

  std::ofstream mf(out_dir / "manifest.json");
  if (!mf) throw IoError("cannot write manifest in " + out_dir.string());
  mf << manifest_to_json(manifest).dump(2) << "\n";
  if (!mf) throw IoError("failed writing manifest in " + out_dir.string());
  return manifest;
}

ReplayOutcome replay_batch(const std::filesystem::path& src_dir,
                           const std::filesystem::path& deg_dir, const AppConfig& cfg) {
  ReplayOutcome outcome;
  std::vector<std::filesystem::path> sidecars;
  if (!std::filesystem::is_directory(deg_dir))
    throw IoError("degraded directory does not exist: " + deg_dir.string());
  for (const auto& e : std::filesystem::directory_iterator(deg_dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > 9 && name.ends_with(".deg.json"))
      sidecars.push_back(e.path());
  }
  std::sort(sidecars.begin(), sidecars.end());

  for (const auto& sc_path : sidecars) {
    ++outcome.checked;
    try {
      std::ifstream in(sc_path);
      if (!in) throw IoError("cannot open sidecar " + sc_path.string());
      const DegradationRecord rec = record_from_json(json::parse(in));

      const std::string expect_hash = effective_config_hash(cfg, rec.options);
      if (rec.config_hash != expect_hash)
        throw ConfigError("config hash mismatch for " + sc_path.filename().string() +
                          " (sidecar " + rec.config_hash + ", current " + expect_hash + ")");

      const PlanarImage src = read_image(src_dir / rec.source_id);
      const PlanarImage replayed = replay_record(src, rec, cfg);

      std::string stem = sc_path.filename().string();
      stem.resize(stem.size() - 9);  // strip ".deg.json"
      const PlanarImage stored = read_image(deg_dir / (stem + ".png"));

      if (quantize8(replayed) != quantize8(stored)) {
        ++outcome.mismatched;
        outcome.messages.push_back(sc_path.filename().string() + ": replay mismatch");
      }
    } catch (const std::exception& e) {
      ++outcome.failed;
      outcome.messages.push_back(e.what());
    }
  }
  return outcome;
}

}  // namespace lowlight
