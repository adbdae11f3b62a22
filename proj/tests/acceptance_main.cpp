// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Runs everything from library entry points with fixed seeds.

#include "lowlight/baseline.hpp"
#include "lowlight/config.hpp"
#include "lowlight/degrade_pipeline.hpp"
#include "lowlight/driver.hpp"
#include "lowlight/image_io.hpp"
#include "lowlight/maet.hpp"
#include "lowlight/stats.hpp"
#include "lowlight/synth.hpp"
#include "lowlight/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

using namespace lowlight;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void run(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = body();
  } catch (const std::exception& e) {
    outcome.pass = false;
    outcome.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!outcome.pass) ++failures;
  std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", outcome.pass ? "PASS" : "FAIL", id,
              name.c_str(), secs, outcome.detail.empty() ? "" : " - ",
              outcome.detail.c_str());
  std::fflush(stdout);
}

Outcome from_entries(const std::vector<CheckEntry>& entries) {
  Outcome o;
  std::ostringstream detail;
  for (const auto& e : entries) {
    if (!e.pass) {
      o.pass = false;
      detail << e.name << " observed=" << e.observed << " expected=" << e.expected
             << " tol=" << e.tolerance << "; ";
    }
  }
  if (o.pass) {
    detail << entries.size() << " checks";
  }
  o.detail = detail.str();
  return o;
}

std::filesystem::path scratch_dir(const char* tag) {
  const auto p = std::filesystem::temp_directory_path() /
                 (std::string("lowlight-acceptance-") + tag);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

int main() {
  const AppConfig cfg = AppConfig::defaults();

  run(1, "inverse-pair suite (1e-6; degenerate pipeline 1e-5)",
      [&]() { return from_entries(verify_roundtrips(cfg, 1e-6)); });

  run(2, "noise law at k=0.1, x0=0.5, dr=0.01, ds=0.001, n=1e6", [&]() {
    DegradationParams p;
    p.k = 0.1;
    p.delta_r = 0.01;
    p.delta_s = 0.001;
    return from_entries(verify_noise_law(p, 0.5, 1000000, 2024));
  });

  run(3, "sampling suite over 1e5 draws", [&]() {
    return from_entries(verify_sampling(cfg, 100000, 2024));
  });

  run(4, "determinism and replay on a 20-image batch", [&]() {
    const auto scratch = scratch_dir("determinism");
    const Outcome o = from_entries(verify_determinism(cfg, 2024, scratch));
    std::filesystem::remove_all(scratch);
    return o;
  });

  run(5, "analytic gradients vs central differences (< 1e-4)", [&]() {
    const auto samples = maet::make_toy_dataset(10, 555, cfg, 1);
    const maet::Model model = maet::Model::init(maet::ModelConfig{}, 555);
    const maet::GradCheckReport full =
        maet::grad_check(model, samples, maet::GradCheckLoss::Total, 1e-5, 20, 555, true);
    const maet::GradCheckReport deg =
        maet::grad_check(model, {samples[0]}, maet::GradCheckLoss::DegOnly, 1e-5, 20, 556);
    Outcome o;
    o.pass = full.max_rel_err < 1e-4 && deg.max_rel_err < 1e-6;
    std::ostringstream detail;
    detail << "total max rel err " << full.max_rel_err << ", deg-only " << deg.max_rel_err;
    o.detail = detail.str();
    return o;
  });

  run(6, "orthogonality property suite", [&]() {
    using Rows = std::vector<std::vector<double>>;
    Outcome o;
    std::ostringstream why;

    const Rows e1{{1.0, 0.0}}, e2{{0.0, 1.0}}, diag{{1.0, 1.0}};
    if (maet::loss_ort(e1, e2) != 0.0) {
      o.pass = false;
      why << "orthogonal pair not 0; ";
    }
    if (maet::loss_ort(e1, e1) != 1.0) {
      o.pass = false;
      why << "parallel pair not 1; ";
    }
    if (std::fabs(maet::loss_ort(e1, diag) - 1.0 / std::sqrt(2.0)) > 1e-15) {
      o.pass = false;
      why << "45-degree pair not 1/sqrt(2); ";
    }

    StreamRng rng(606, {0});
    Rows u(5, std::vector<double>(16)), v(6, std::vector<double>(16));
    for (auto& row : u)
      for (double& x : row) x = rng.uniform(-1, 1);
    for (auto& row : v)
      for (double& x : row) x = rng.uniform(-1, 1);
    const double base = maet::loss_ort(u, v);
    if (!(base >= 0.0 && base <= 30.0)) {
      o.pass = false;
      why << "bound violated; ";
    }
    Rows us = u;
    for (double& x : us[2]) x *= 1234.5;
    if (std::fabs(maet::loss_ort(us, v) - base) > 1e-9) {
      o.pass = false;
      why << "rescaling changed the value; ";
    }
    Rows vf = v;
    for (double& x : vf[3]) x = -x;
    if (std::fabs(maet::loss_ort(u, vf) - base) > 1e-9) {
      o.pass = false;
      why << "sign flip changed the value; ";
    }
    Rows pu(2, std::vector<double>{0.5, 0.5}), pv(3, std::vector<double>{-2.0, -2.0});
    if (std::fabs(maet::loss_ort(pu, pv) - 6.0) > 1e-12) {
      o.pass = false;
      why << "parallel maximum not #pairs; ";
    }
    o.detail = o.pass ? "exact values, invariances and bounds hold" : why.str();
    return o;
  });

  run(7, "toy MAET training: deg loss, k correlation, tangent disentangling", [&]() {
    const uint64_t seed = 2024;
    const auto t0 = std::chrono::steady_clock::now();
    const auto dataset = maet::make_toy_dataset(5500, seed, cfg, 1);
    const std::vector<maet::Sample> train_set(dataset.begin(), dataset.begin() + 5000);
    const std::vector<maet::Sample> holdout(dataset.begin() + 5000, dataset.end());

    maet::TrainConfig tc;
    tc.steps = 2000;
    tc.batch = 8;
    tc.lr = 5e-4;
    tc.seed = seed;

    tc.use_ort = true;
    maet::TrainResult with_ort =
        maet::train(train_set, maet::Model::init(maet::ModelConfig{}, seed), tc);
    tc.use_ort = false;
    maet::TrainResult no_ort =
        maet::train(train_set, maet::Model::init(maet::ModelConfig{}, seed), tc);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const maet::EvalMetrics train_m = maet::evaluate(with_ort.model, train_set);
    const maet::EvalMetrics hold_m = maet::evaluate(with_ort.model, holdout);
    const maet::EvalMetrics no_ort_m = maet::evaluate(no_ort.model, train_set);

    Outcome o;
    std::ostringstream detail;
    detail << "L_deg " << train_m.loss_deg << " (<0.05), r(k) " << hold_m.pearson_k
           << " (>0.8), |cos| " << train_m.mean_abs_cos << " vs " << no_ort_m.mean_abs_cos
           << " w/o ort (<0.15, lower), " << secs << "s";
    o.pass = train_m.loss_deg < 0.05 && hold_m.pearson_k > 0.8 &&
             train_m.mean_abs_cos < no_ort_m.mean_abs_cos && train_m.mean_abs_cos < 0.15;
    o.detail = detail.str();
    return o;
  });

  run(8, "baseline parity: every method valid and replayable; demosaic bounds", [&]() {
    const auto scratch = scratch_dir("baselines");
    const auto corpus = scratch / "corpus";
    write_test_corpus(corpus, 20, 64, 48, 909);

    Outcome o;
    std::ostringstream detail;
    for (SynthMethod method :
         {SynthMethod::Retinex, SynthMethod::InvGamma, SynthMethod::InvGammaPoisson,
          SynthMethod::InvGammaMixed, SynthMethod::LinearScale, SynthMethod::OursMosaic}) {
      AppConfig run_cfg = cfg;
      if (method == SynthMethod::OursMosaic) {
        run_cfg.pipeline.mosaic = true;
        run_cfg.rehash();
      }
      const auto out_dir = scratch / to_string(method);
      const BatchManifest manifest = degrade_batch(corpus, out_dir, run_cfg, 909, 4, method);
      const ReplayOutcome replay = replay_batch(corpus, out_dir, run_cfg);
      if (manifest.files_ok != 20 || manifest.files_failed != 0 || replay.checked != 20 ||
          replay.mismatched + replay.failed != 0) {
        o.pass = false;
        detail << to_string(method) << " failed (ok=" << manifest.files_ok
               << ", replay problems=" << replay.mismatched + replay.failed << "); ";
      }
    }

    // Demosaic bounds: exact on constants, < 0.02 on smooth gradients.
    const PlanarImage flat =
        PlanarImage::constant(32, 32, 0.37, 0.37, 0.37, ColorState::LinearCamera);
    const double const_err = max_abs_diff(flat, demosaic(mosaic(flat), flat.state));
    PlanarImage grad(64, 48, ColorState::LinearCamera);
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 64; ++x) {
        grad.at(0, y, x) = 0.2 + 0.5 * x / 63.0;
        grad.at(1, y, x) = 0.3 + 0.4 * y / 47.0;
        grad.at(2, y, x) = 0.25 + 0.25 * (x / 63.0 + y / 47.0) / 2.0;
      }
    const double grad_err = max_abs_diff(grad, demosaic(mosaic(grad), grad.state));
    if (const_err != 0.0) {
      o.pass = false;
      detail << "constant demosaic not exact (" << const_err << "); ";
    }
    if (grad_err >= 0.02) {
      o.pass = false;
      detail << "gradient demosaic error " << grad_err << " >= 0.02; ";
    }
    if (o.pass) {
      detail << "6 methods x 20 images replayed; demosaic errors " << const_err << " / "
             << grad_err;
    }
    o.detail = detail.str();
    std::filesystem::remove_all(scratch);
    return o;
  });

  std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
              failures);
  return failures == 0 ? 0 : 1;
}
