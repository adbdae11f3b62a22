#include "lowlight/verify.hpp"

#include "lowlight/degrade_pipeline.hpp"
#include "lowlight/driver.hpp"
#include "lowlight/errors.hpp"
#include "lowlight/stats.hpp"
#include "lowlight/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace lowlight {

using nlohmann::json;

bool VerificationReport::overall_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const CheckEntry& e) { return e.pass; });
}

namespace {

CheckEntry tolerance_entry(std::string name, double expected, double observed, double tol,
                           std::string note = {}) {
  CheckEntry e;
  e.name = std::move(name);
  e.expected = expected;
  e.observed = observed;
  e.tolerance = tol;
  e.pass = std::fabs(observed - expected) <= tol;
  e.note = std::move(note);
  return e;
}

CheckEntry p_value_entry(std::string name, double p, double threshold, std::string note = {}) {
  CheckEntry e;
  e.name = std::move(name);
  e.expected = threshold;
  e.observed = p;
  e.tolerance = 0.0;
  e.p_value = p;
  e.pass = p > threshold;
  e.note = std::move(note);
  return e;
}

}  // namespace

std::vector<CheckEntry> verify_noise_law(const DegradationParams& p, double x0, long long n,
                                         uint64_t seed) {
  if (n < 100000) throw ParamError("verify_noise_law: n must be at least 1e5");
  StreamRng rng(seed, {0x401eULL});
  const double signal = p.k * x0;
  const double expected_var = p.delta_r * p.delta_r + p.delta_s * signal;
  RunningMoments mom;
  for (long long i = 0; i < n; ++i) {
    mom.add(signal + std::sqrt(expected_var) * rng.normal());
  }
  const double mean_tol = 4.0 * std::sqrt(expected_var) / std::sqrt(double(n));
  std::vector<CheckEntry> entries;
  entries.push_back(tolerance_entry("noise_law.mean", signal, mom.mean, mean_tol,
                                    "sample mean of k*x0 + N(0, dr^2 + ds*k*x0)"));
  entries.push_back(tolerance_entry("noise_law.variance", expected_var, mom.variance(),
                                    0.02 * expected_var, "sample variance within 2%"));
  return entries;
}

std::vector<CheckEntry> verify_roundtrips(const AppConfig& cfg, double tol) {
  std::vector<CheckEntry> entries;

  // Gamma pair on [1e-4, 1] (the epsilon clamp floors values below that).
  double worst = 0.0;
  for (double gamma : {2.0, 2.75, 3.5}) {
    const GammaParams g{gamma, cfg.ranges.epsilon};
    for (int i = 0; i < 1000; ++i) {
      const double x = 1e-4 + (1.0 - 1e-4) * double(i) / 999.0;
      const double y = gamma_invert_value(gamma_correct_value(x, g), g);
      worst = std::max(worst, std::fabs(y - x));
    }
  }
  entries.push_back(tolerance_entry("roundtrip.gamma", 0.0, worst, tol,
                                    "gamma_invert(gamma_correct(x)) over [1e-4,1], 1000 points"));

  worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = double(i) / 999.0;
    worst = std::max(worst, std::fabs(tone_invert_value(tone_map_value(x)) - x));
  }
  entries.push_back(tolerance_entry("roundtrip.tone", 0.0, worst, tol,
                                    "tone_invert(tone_map(x)) over [0,1], 1000 points"));

  {
    StreamRng rng(7, {0x3bULL});
    PlanarImage img(25, 40, ColorState::LinearCamera);
    for (double& v : img.data) v = rng.uniform();
    const PlanarImage back = white_balance(white_balance(img, 2.0, 1.5), 1.0 / 2.0, 1.0 / 1.5);
    entries.push_back(tolerance_entry("roundtrip.white_balance", 0.0, max_abs_diff(img, back),
                                      1e-7, "reciprocal gains restore the image"));
  }

  {
    StreamRng rng(7, {0x3cULL});
    PlanarImage img(25, 40, ColorState::LinearCamera);
    for (double& v : img.data) v = rng.uniform();
    double worst_ccm = 0.0;
    for (const auto& entry : cfg.ccms.entries) {
      const PlanarImage back = apply_ccm(apply_ccm(img, entry.forward), entry.inverse);
      worst_ccm = std::max(worst_ccm, max_abs_diff(img, back));
    }
    entries.push_back(tolerance_entry("roundtrip.ccm", 0.0, worst_ccm, tol,
                                      "forward then inverse CCM over all devices"));
  }

  {
    // Degenerate full pipeline: k=1, no noise, unit gains, identity CCM,
    // gamma stage neutralized, tone remap on.
    CcmSet identity_set;
    identity_set.entries.push_back({"identity", Mat3::identity(), Mat3::identity()});
    DegradationParams p;
    p.k = 1.0;
    p.delta_s = 0.0;
    p.delta_r = 0.0;
    p.g_r = 1.0;
    p.g_b = 1.0;
    p.gamma = 1.0;
    p.epsilon = cfg.ranges.epsilon;
    p.ccm = {CcmMode::PickOne, 0, {}};
    PipelineOptions opt;
    opt.quant_enabled = false;
    opt.tone_remap = true;

    PlanarImage grid(40, 25, ColorState::SrgbEncoded);
    for (int y = 0; y < 25; ++y)
      for (int x = 0; x < 40; ++x) {
        const double v = double(y * 40 + x) / 999.0;
        for (int c = 0; c < 3; ++c) grid.at(c, y, x) = v;
      }
    StreamRng rng(1, {0});
    const DegradeOutput out = degrade_full(grid, p, opt, identity_set, cfg.ranges, rng);
    entries.push_back(tolerance_entry("roundtrip.full_degenerate", 0.0,
                                      max_abs_diff(grid, out.image), 1e-5,
                                      "tone-remap pipeline identity on a 1000-point grid"));
  }
  return entries;
}

std::vector<CheckEntry> verify_sampling(const AppConfig& cfg, long long n, uint64_t seed) {
  if (n < 100000) throw ParamError("verify_sampling: n must be at least 1e5");
  const ParamRanges& r = cfg.ranges;
  StreamRng rng(seed, {0x5a11ULL});

  std::vector<double> ks, gammas, grs, gbs;
  ks.reserve(size_t(n));
  gammas.reserve(size_t(n));
  grs.reserve(size_t(n));
  gbs.reserve(size_t(n));
  std::vector<long long> bit_counts(r.bit_choices.size(), 0);
  long long violations = 0;

  const double ds_lo = std::pow(10.0, r.log10_delta_s.lo);
  const double ds_hi = std::pow(10.0, r.log10_delta_s.hi);

  for (long long i = 0; i < n; ++i) {
    const DegradationParams p = sample_params(rng, r, cfg.ccms, cfg.pipeline.ccm_mode);
    ks.push_back(p.k);
    gammas.push_back(p.gamma);
    grs.push_back(p.g_r);
    gbs.push_back(p.g_b);
    bool ok = p.k >= r.k_bounds.lo && p.k <= r.k_bounds.hi;
    ok = ok && p.delta_s >= ds_lo * (1 - 1e-12) && p.delta_s <= ds_hi * (1 + 1e-12);
    ok = ok && p.delta_r > 0.0;
    ok = ok && p.g_r >= r.g_r.lo && p.g_r <= r.g_r.hi;
    ok = ok && p.g_b >= r.g_b.lo && p.g_b <= r.g_b.hi;
    ok = ok && p.gamma >= r.gamma.lo && p.gamma <= r.gamma.hi;
    const auto it = std::find(r.bit_choices.begin(), r.bit_choices.end(), p.bits);
    ok = ok && it != r.bit_choices.end();
    if (it != r.bit_choices.end()) ++bit_counts[size_t(it - r.bit_choices.begin())];
    if (!ok) ++violations;
  }

  std::vector<CheckEntry> entries;
  entries.push_back(tolerance_entry("sampling.range_violations", 0.0, double(violations), 0.0,
                                    "all draws inside the configured parameter table"));

  entries.push_back(tolerance_entry(
      "sampling.k_mean", r.k_mean, std::accumulate(ks.begin(), ks.end(), 0.0) / double(n), 0.02,
      "truncation shifts the mean slightly above the nominal value"));

  const TruncatedGaussian tg{r.k_mean, r.k_std, r.k_bounds.lo, r.k_bounds.hi};
  const KsResult ks_res = ks_test(ks, [&tg](double x) { return tg.cdf(x); });
  entries.push_back(p_value_entry("sampling.k_ks", ks_res.p_value, 0.01,
                                  "KS against the truncated Gaussian, D=" +
                                      std::to_string(ks_res.d)));

  const double even_share = 1.0 / double(r.bit_choices.size());
  double worst_freq_dev = 0.0;
  for (size_t i = 0; i < bit_counts.size(); ++i)
    worst_freq_dev =
        std::max(worst_freq_dev, std::fabs(double(bit_counts[i]) / double(n) - even_share));
  entries.push_back(tolerance_entry("sampling.bits_frequencies", 0.0, worst_freq_dev, 0.02,
                                    "worst |frequency - 1/choices| over the bit choices"));

  entries.push_back(p_value_entry(
      "sampling.gamma_uniform", chi2_uniform_test(gammas, r.gamma.lo, r.gamma.hi, 20).p_value,
      0.01, "20-bin chi-square"));
  entries.push_back(p_value_entry(
      "sampling.g_r_uniform", chi2_uniform_test(grs, r.g_r.lo, r.g_r.hi, 20).p_value, 0.01,
      "20-bin chi-square"));
  entries.push_back(p_value_entry(
      "sampling.g_b_uniform", chi2_uniform_test(gbs, r.g_b.lo, r.g_b.hi, 20).p_value, 0.01,
      "20-bin chi-square"));

  {
    std::vector<double> q(size_t(n), 0.0);
    StreamRng qrng(seed, {0x9a41ULL});
    add_quantization_noise_values(q, 14, QuantMode::Literal, qrng);
    const double h = quant_halfwidth(14, QuantMode::Literal);
    long long outside = 0;
    for (double v : q)
      if (v < -h || v > h) ++outside;
    entries.push_back(tolerance_entry("sampling.quant_support", 0.0, double(outside), 0.0,
                                      "all quantization noise inside [-1/(2B), 1/(2B)]"));
    entries.push_back(p_value_entry("sampling.quant_uniform",
                                    chi2_uniform_test(q, -h, h, 20).p_value, 0.01,
                                    "20-bin chi-square, B=14 literal"));
  }
  return entries;
}

namespace {

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

std::vector<CheckEntry> verify_determinism(const AppConfig& cfg, uint64_t seed,
                                           const std::filesystem::path& scratch) {
  const auto corpus = scratch / "corpus";
  const auto run_a = scratch / "run_a";
  const auto run_b = scratch / "run_b";
  std::filesystem::remove_all(run_a);
  std::filesystem::remove_all(run_b);
  write_test_corpus(corpus, 20, 96, 72, seed ^ 0xC0FFEEULL);

  degrade_batch(corpus, run_a, cfg, seed, 1);
  degrade_batch(corpus, run_b, cfg, seed, 8);

  long long mismatched_bytes = 0;
  long long files = 0;
  for (const auto& e : std::filesystem::directory_iterator(run_a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto other = run_b / e.path().filename();
    if (!std::filesystem::exists(other) || slurp(e.path()) != slurp(other)) ++mismatched_bytes;
  }

  std::vector<CheckEntry> entries;
  CheckEntry bytes_entry = tolerance_entry("determinism.parallel_bytes", 0.0,
                                           double(mismatched_bytes), 0.0,
                                           std::to_string(files) +
                                               " files compared between 1 and 8 workers");
  bytes_entry.pass = bytes_entry.pass && files > 0;
  entries.push_back(bytes_entry);

  const ReplayOutcome replay = replay_batch(corpus, run_a, cfg);
  CheckEntry replay_entry = tolerance_entry(
      "determinism.replay", 0.0, double(replay.mismatched + replay.failed), 0.0,
      std::to_string(replay.checked) + " records replayed bit-exactly");
  replay_entry.pass = replay_entry.pass && replay.checked > 0;
  entries.push_back(replay_entry);
  return entries;
}

VerificationReport run_verification(const AppConfig& cfg, uint64_t seed,
                                    const std::filesystem::path& scratch) {
  VerificationReport report;
  report.seed = seed;
  report.config_hash = cfg.config_hash;

  DegradationParams noise_params;
  noise_params.k = 0.1;
  noise_params.delta_r = 0.01;
  noise_params.delta_s = 0.001;
  auto add = [&report](std::vector<CheckEntry> entries) {
    for (auto& e : entries) report.entries.push_back(std::move(e));
  };
  add(verify_noise_law(noise_params, 0.5, 1000000, seed));
  add(verify_roundtrips(cfg, 1e-6));
  add(verify_sampling(cfg, 100000, seed));
  add(verify_determinism(cfg, seed, scratch));
  return report;
}

json report_to_json(const VerificationReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    json je{{"name", e.name},     {"expected", e.expected},   {"observed", e.observed},
            {"tolerance", e.tolerance}, {"pass", e.pass}};
    je["p_value"] = e.p_value ? json(*e.p_value) : json(nullptr);
    if (!e.note.empty()) je["note"] = e.note;
    entries.push_back(std::move(je));
  }
  return json{{"schema_version", report.schema_version},
              {"seed", report.seed},
              {"config_hash", report.config_hash},
              {"checks", entries},
              {"overall_pass", report.overall_pass()}};
}

}  // namespace lowlight
