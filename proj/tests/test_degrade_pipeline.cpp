#include "lowlight/degrade_pipeline.hpp"
#include "lowlight/driver.hpp"
#include "lowlight/errors.hpp"
#include "lowlight/image_io.hpp"
#include "lowlight/stats.hpp"
#include "lowlight/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>

#include "test_util.hpp"

using namespace lowlight;
using testutil::TempDir;

namespace {

DegradationParams degenerate_params(double epsilon = 1e-5) {
  DegradationParams p;
  p.k = 1.0;
  p.delta_s = 0.0;
  p.delta_r = 0.0;
  p.bits = 14;
  p.g_r = 1.0;
  p.g_b = 1.0;
  p.gamma = 1.0;  // neutralizes the gamma stage
  p.epsilon = epsilon;
  p.ccm = {CcmMode::PickOne, 0, {}};
  return p;
}

CcmSet identity_ccm() {
  CcmSet set;
  set.entries.push_back({"identity", Mat3::identity(), Mat3::identity()});
  return set;
}

PlanarImage intensity_grid_image() {
  PlanarImage img(40, 25, ColorState::SrgbEncoded);
  for (int y = 0; y < 25; ++y)
    for (int x = 0; x < 40; ++x) {
      const double v = double(y * 40 + x) / 999.0;
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = v;
    }
  return img;
}

}  // namespace

TEST_CASE("unprocess maps constant white to the inverse gains") {
  const AppConfig cfg = AppConfig::defaults();
  StreamRng rng(3, {0, 0});
  const DegradationParams p = sample_params(rng, cfg.ranges, cfg.ccms, CcmMode::PickOne);
  const PlanarImage white = PlanarImage::constant(4, 4, 1.0, 1.0, 1.0, ColorState::SrgbEncoded);
  const PlanarImage raw = unprocess(white, p, cfg.ccms);
  CHECK(raw.state == ColorState::LinearCamera);
  CHECK(raw.at(0, 0, 0) == doctest::Approx(1.0 / p.g_r).epsilon(1e-9));
  CHECK(raw.at(1, 0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(raw.at(2, 0, 0) == doctest::Approx(1.0 / p.g_b).epsilon(1e-9));
}

TEST_CASE("unprocess with identity ccm and unit gains is the scalar chain") {
  DegradationParams p = degenerate_params();
  p.gamma = 2.4;
  const CcmSet ident = identity_ccm();
  const PlanarImage img = intensity_grid_image();
  const PlanarImage raw = unprocess(img, p, ident);
  const GammaParams g = p.gamma_params();
  for (size_t i = 0; i < img.data.size(); ++i) {
    const double expect = gamma_invert_value(tone_invert_value(img.data[i]), g);
    CHECK(std::fabs(raw.data[i] - expect) <= 1e-12);
  }
}

TEST_CASE("unprocess output is almost everywhere nonnegative on a 100-image corpus") {
  const AppConfig cfg = AppConfig::defaults();
  long long total = 0;
  long long negative = 0;
  for (int i = 0; i < 100; ++i) {
    StreamRng img_rng(77, {uint64_t(i), 0});
    StreamRng par_rng(77, {uint64_t(i), 1});
    const PlanarImage img = make_test_image(64, 48, img_rng);
    const DegradationParams p = sample_params(par_rng, cfg.ranges, cfg.ccms, CcmMode::PickOne);
    const PlanarImage raw = unprocess(img, p, cfg.ccms);
    for (double v : raw.data) {
      ++total;
      if (v < 0.0) ++negative;
    }
  }
  CHECK(double(negative) / double(total) <= 0.001);
}

TEST_CASE("reprocess of a zero image is the epsilon-clamped gamma output") {
  const AppConfig cfg = AppConfig::defaults();
  StreamRng rng(5, {0, 0});
  DegradationParams p = sample_params(rng, cfg.ranges, cfg.ccms, CcmMode::PickOne);
  PipelineOptions opt;
  opt.quant_enabled = false;
  const PlanarImage zero = PlanarImage::constant(4, 4, 0.0, 0.0, 0.0, ColorState::LinearCamera);
  StreamRng noise(5, {0, 1});
  const PlanarImage out = reprocess(zero, p, cfg.ccms, opt, noise);
  const double expect = std::pow(p.epsilon, 1.0 / p.gamma);
  for (double v : out.data) CHECK(v == doctest::Approx(expect).epsilon(1e-9));
  CHECK(out.state == ColorState::SrgbEncoded);
}

TEST_CASE("tone-remap composition undoes unprocess on the intensity grid") {
  DegradationParams p = degenerate_params();
  p.gamma = 1.0;
  const CcmSet ident = identity_ccm();
  PipelineOptions opt;
  opt.quant_enabled = false;
  opt.tone_remap = true;

  const PlanarImage img = intensity_grid_image();
  const PlanarImage raw = unprocess(img, p, ident);
  StreamRng noise(1, {0, 1});
  const PlanarImage back = reprocess(raw, p, ident, opt, noise);
  CHECK(max_abs_diff(img, back) <= 1e-5);
}

TEST_CASE("degenerate degrade_full is the identity in tone-remap mode") {
  const AppConfig cfg = AppConfig::defaults();
  const DegradationParams p = degenerate_params();
  const CcmSet ident = identity_ccm();
  PipelineOptions opt;
  opt.quant_enabled = false;
  opt.tone_remap = true;

  const PlanarImage img = intensity_grid_image();
  StreamRng noise(1, {0, 1});
  const DegradeOutput out = degrade_full(img, p, opt, ident, cfg.ranges, noise);
  CHECK(max_abs_diff(img, out.image) <= 1e-5);
  CHECK(out.record.normalized_targets[0] == doctest::Approx(1.0));  // k = 1
}

TEST_CASE("stage trace records the expected state sequence") {
  const AppConfig cfg = AppConfig::defaults();
  StreamRng rng(5, {1, 0});
  const DegradationParams p = sample_params(rng, cfg.ranges, cfg.ccms, CcmMode::PickOne);
  PipelineOptions opt;
  opt.tone_remap = true;
  StreamRng noise(5, {1, 1});
  std::vector<ColorState> trace;
  const PlanarImage img = PlanarImage::constant(4, 4, 0.4, 0.5, 0.6, ColorState::SrgbEncoded);
  degrade_full(img, p, opt, cfg.ccms, cfg.ranges, noise, &trace);

  const std::vector<ColorState> expected{
      ColorState::SrgbEncoded,   // input
      ColorState::SrgbEncoded,   // after tone_invert
      ColorState::LinearSrgb,    // after gamma_invert
      ColorState::LinearCamera,  // after inverse ccm
      ColorState::LinearCamera,  // after inverse white balance
      ColorState::LinearCamera,  // after quantization noise
      ColorState::LinearCamera,  // after white balance
      ColorState::LinearSrgb,    // after ccm
      ColorState::SrgbEncoded,   // after gamma
      ColorState::SrgbEncoded,   // after tone remap
  };
  CHECK(trace == expected);
}

TEST_CASE("mean luminance decreases under attenuation and is monotone in k") {
  const AppConfig cfg = AppConfig::defaults();
  const PlanarImage gray = PlanarImage::constant(16, 16, 0.5, 0.5, 0.5, ColorState::SrgbEncoded);
  StreamRng rng(6, {0, 0});
  DegradationParams p = sample_params(rng, cfg.ranges, cfg.ccms, CcmMode::PickOne);
  PipelineOptions opt;

  p.k = 0.05;
  StreamRng noise_a(6, {0, 1});
  const DegradeOutput dim = degrade_full(gray, p, opt, cfg.ccms, cfg.ranges, noise_a);
  CHECK(mean_intensity(dim.image) < mean_intensity(gray));

  double prev = -1.0;
  for (double k : {0.01, 0.05, 0.1, 0.5, 1.0}) {
    p.k = k;
    StreamRng noise(6, {0, 1});  // identical draws for every k
    const DegradeOutput out = degrade_full(gray, p, opt, cfg.ccms, cfg.ranges, noise);
    const double lum = mean_intensity(out.image);
    CHECK(lum >= prev);
    prev = lum;
  }
}

TEST_CASE("degrade_full reruns bit-identically under the same stream") {
  const AppConfig cfg = AppConfig::defaults();
  StreamRng rng(9, {4, 0});
  const DegradationParams p = sample_params(rng, cfg.ranges, cfg.ccms, CcmMode::PickOne);
  StreamRng img_rng(9, {5});
  const PlanarImage img = make_test_image(32, 24, img_rng);
  PipelineOptions opt;
  StreamRng noise_a(9, {4, 1});
  StreamRng noise_b(9, {4, 1});
  const DegradeOutput a = degrade_full(img, p, opt, cfg.ccms, cfg.ranges, noise_a);
  const DegradeOutput b = degrade_full(img, p, opt, cfg.ccms, cfg.ranges, noise_b);
  CHECK(a.image.data == b.image.data);
}

TEST_CASE("batch on an empty directory yields an empty manifest") {
  const AppConfig cfg = AppConfig::defaults();
  TempDir in("batch-empty-in");
  TempDir out("batch-empty-out");
  const BatchManifest m = degrade_batch(in.path, out.path, cfg, 11, 2);
  CHECK(m.entries.empty());
  CHECK(m.files_ok == 0);
  CHECK(m.files_failed == 0);
  CHECK(std::filesystem::exists(out.path / "manifest.json"));
}

TEST_CASE("batch output is independent of parallelism and replays bit-exactly") {
  const AppConfig cfg = AppConfig::defaults();
  TempDir in("batch-in");
  write_test_corpus(in.path, 12, 48, 36, 1234);
  // One deliberately broken input becomes a per-file error entry.
  std::ofstream(in.path / "broken.png") << "junk";

  TempDir out1("batch-out1");
  TempDir out8("batch-out8");
  const BatchManifest m1 = degrade_batch(in.path, out1.path, cfg, 99, 1);
  const BatchManifest m8 = degrade_batch(in.path, out8.path, cfg, 99, 8);

  CHECK(m1.files_ok == 12);
  CHECK(m1.files_failed == 1);

  long hist_total = 0;
  for (long c : m1.k_hist.counts) hist_total += c;
  CHECK(hist_total == m1.files_ok);

  for (const auto& e : std::filesystem::directory_iterator(out1.path)) {
    const auto other = out8.path / e.path().filename();
    REQUIRE(std::filesystem::exists(other));
    std::ifstream fa(e.path(), std::ios::binary), fb(other, std::ios::binary);
    const std::string a((std::istreambuf_iterator<char>(fa)), {});
    const std::string b((std::istreambuf_iterator<char>(fb)), {});
    CHECK(a == b);
  }

  const ReplayOutcome replay = replay_batch(in.path, out1.path, cfg);
  CHECK(replay.checked == 12);
  CHECK(replay.mismatched == 0);
  CHECK(replay.failed == 0);

  // Every sidecar carries the effective config hash.
  for (const auto& e : m1.entries)
    if (e.ok) CHECK(e.record.config_hash == cfg.config_hash);
}

TEST_CASE("replay refuses a mismatched config hash") {
  const AppConfig cfg = AppConfig::defaults();
  TempDir in("replay-in");
  write_test_corpus(in.path, 2, 32, 24, 555);
  TempDir out("replay-out");
  degrade_batch(in.path, out.path, cfg, 5, 1);

  AppConfig other = cfg;
  other.ranges.k_mean = 0.2;
  other.rehash();
  const ReplayOutcome outcome = replay_batch(in.path, out.path, other);
  CHECK(outcome.failed == outcome.checked);
  REQUIRE(!outcome.messages.empty());
  CHECK(outcome.messages[0].find("hash mismatch") != std::string::npos);
}

TEST_CASE("sampled attenuation over a batch follows the truncated gaussian") {
  const AppConfig cfg = AppConfig::defaults();
  TempDir in("batch-ks-in");
  write_test_corpus(in.path, 1000, 8, 8, 777);
  TempDir out("batch-ks-out");
  const BatchManifest m = degrade_batch(in.path, out.path, cfg, 31, 8);
  REQUIRE(m.files_ok == 1000);
  std::vector<double> ks;
  ks.reserve(1000);
  for (const auto& e : m.entries) ks.push_back(e.record.params.k);
  const TruncatedGaussian tg{0.1, 0.08, 0.01, 1.0};
  const KsResult res = ks_test(ks, [&tg](double x) { return tg.cdf(x); });
  CHECK(res.p_value > 0.01);
}
