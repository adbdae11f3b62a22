#include "lowlight/cli.hpp"

#include "lowlight/config.hpp"
#include "lowlight/driver.hpp"
#include "lowlight/errors.hpp"
#include "lowlight/maet.hpp"
#include "lowlight/record.hpp"
#include "lowlight/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace lowlight {

namespace {

using nlohmann::json;

std::filesystem::path default_config_path(const std::string& explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return env;
  return {};
}

struct PipelineFlags {
  std::string quant_mode;
  std::string ccm_mode;
  bool tone_remap = false;
  bool mosaic = false;
  bool no_quant = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--quant-mode", quant_mode, "Quantization mode (literal|bitdepth)")
        ->check(CLI::IsMember({"literal", "bitdepth"}));
    cmd->add_option("--ccm-mode", ccm_mode, "CCM selection mode (pick|mix)")
        ->check(CLI::IsMember({"pick", "mix"}));
    cmd->add_flag("--tone-remap", tone_remap, "Reapply tone mapping after the final gamma");
    cmd->add_flag("--mosaic", mosaic, "Route through the Bayer mosaic/demosaic variant");
    cmd->add_flag("--no-quant", no_quant, "Disable quantization noise");
  }

  void apply(AppConfig& cfg) const {
    if (!quant_mode.empty()) cfg.pipeline.quant_mode = quant_mode_from_string(quant_mode);
    if (!ccm_mode.empty()) cfg.pipeline.ccm_mode = ccm_mode_from_string(ccm_mode);
    if (tone_remap) cfg.pipeline.tone_remap = true;
    if (mosaic) cfg.pipeline.mosaic = true;
    if (no_quant) cfg.pipeline.quant_enabled = false;
    cfg.rehash();
  }
};

int finish_batch(const BatchManifest& manifest) {
  std::cout << "processed " << manifest.files_ok << " file(s), " << manifest.files_failed
            << " failure(s)\n";
  for (const auto& e : manifest.entries) {
    if (!e.warning.empty()) std::cerr << "warning: " << e.warning << "\n";
    if (!e.ok) std::cerr << "error: " << e.source << ": " << e.error << "\n";
  }
  return manifest.files_failed == 0 ? 0 : 1;
}

json metrics_json(const maet::EvalMetrics& m) {
  return json{{"loss_deg", m.loss_deg},
              {"loss_obj", m.loss_obj},
              {"pearson_k", m.pearson_k},
              {"mean_abs_cos", m.mean_abs_cos},
              {"zero_norm_warning", m.zero_norm_warning}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Low-light image synthesis pipeline and toy multitask trainer"};
  app.set_version_flag("--version", std::string("lowlight ") + kVersion + " (sidecar schema " +
                                        std::to_string(kSidecarSchemaVersion) + ")");
  app.require_subcommand(0, 1);

  std::string config_path;
  app.add_option("--config", config_path, "Config file (or set $" + std::string(kConfigEnvVar) + ")");

  // degrade
  auto* degrade = app.add_subcommand("degrade", "Degrade a directory of images");
  std::string deg_in, deg_out;
  uint64_t deg_seed = 1;
  int deg_jobs = 1;
  PipelineFlags deg_flags;
  degrade->add_option("--in", deg_in, "Input directory (PNG/PPM)")->required();
  degrade->add_option("--out", deg_out, "Output directory")->required();
  degrade->add_option("--seed", deg_seed, "Master seed")->required();
  degrade->add_option("--jobs", deg_jobs, "Worker threads")->check(CLI::PositiveNumber);
  deg_flags.add_to(degrade);

  // baseline
  auto* baseline = app.add_subcommand("baseline", "Run an alternative synthesis method");
  std::string bl_method, bl_in, bl_out;
  uint64_t bl_seed = 1;
  int bl_jobs = 1;
  PipelineFlags bl_flags;
  baseline
      ->add_option("--method", bl_method,
                   "retinex|invgamma|invgamma-poisson|invgamma-mixed|linear|ours-mosaic")
      ->required()
      ->check(CLI::IsMember({"retinex", "invgamma", "invgamma-poisson", "invgamma-mixed",
                             "linear", "ours-mosaic"}));
  baseline->add_option("--in", bl_in, "Input directory (PNG/PPM)")->required();
  baseline->add_option("--out", bl_out, "Output directory")->required();
  baseline->add_option("--seed", bl_seed, "Master seed")->required();
  baseline->add_option("--jobs", bl_jobs, "Worker threads")->check(CLI::PositiveNumber);
  bl_flags.add_to(baseline);

  // verify
  auto* verify = app.add_subcommand("verify", "Run the statistical conformance suite");
  uint64_t vf_seed = 1;
  std::string vf_report, vf_scratch;
  verify->add_option("--seed", vf_seed, "Master seed")->required();
  verify->add_option("--report", vf_report, "Report output file (JSON)")->required();
  verify->add_option("--scratch", vf_scratch, "Scratch directory for the determinism check");

  // replay
  auto* replay = app.add_subcommand("replay", "Re-derive degraded images from sidecars");
  std::string rp_src, rp_deg;
  replay->add_option("--src", rp_src, "Directory with the source images")->required();
  replay->add_option("--deg", rp_deg, "Directory with degraded images + sidecars")->required();

  // maet-train
  auto* mt = app.add_subcommand("maet-train", "Train the toy multitask model");
  int mt_n = 5000, mt_steps = 2000, mt_batch = 8, mt_jobs = 1, mt_holdout = 500;
  double mt_lr = 5e-4;
  uint64_t mt_seed = 1;
  bool mt_no_ort = false;
  std::string mt_out;
  mt->add_option("--n", mt_n, "Training samples")->check(CLI::PositiveNumber);
  mt->add_option("--steps", mt_steps, "SGD steps")->check(CLI::PositiveNumber);
  mt->add_option("--lr", mt_lr, "Learning rate");
  mt->add_option("--batch", mt_batch, "Batch size")->check(CLI::PositiveNumber);
  mt->add_option("--holdout", mt_holdout, "Held-out samples")->check(CLI::PositiveNumber);
  mt->add_option("--seed", mt_seed, "Master seed")->required();
  mt->add_option("--jobs", mt_jobs, "Dataset generation threads")->check(CLI::PositiveNumber);
  mt->add_flag("--no-ort", mt_no_ort, "Ablation: drop the orthogonality term");
  mt->add_option("--out", mt_out, "Output directory")->required();

  // maet-eval
  auto* me = app.add_subcommand("maet-eval", "Evaluate a checkpoint on a regenerated dataset");
  std::string me_ckpt, me_out;
  uint64_t me_seed = 1;
  int me_n = 500;
  me->add_option("--checkpoint", me_ckpt, "Model checkpoint")->required();
  me->add_option("--seed", me_seed, "Dataset seed")->required();
  me->add_option("--n", me_n, "Evaluation samples")->check(CLI::PositiveNumber);
  me->add_option("--out", me_out, "Metrics output file (JSON; stdout when omitted)");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << app.version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (app.get_subcommands().empty()) {
      std::cerr << "missing subcommand\n" << app.help();
      return 2;
    }

    AppConfig cfg = load_config(default_config_path(config_path));

    if (degrade->parsed()) {
      deg_flags.apply(cfg);
      return finish_batch(degrade_batch(deg_in, deg_out, cfg, deg_seed, deg_jobs));
    }

    if (baseline->parsed()) {
      bl_flags.apply(cfg);
      const SynthMethod method = synth_method_from_string(bl_method);
      if (method == SynthMethod::OursMosaic) {
        cfg.pipeline.mosaic = true;
        cfg.rehash();
      }
      return finish_batch(degrade_batch(bl_in, bl_out, cfg, bl_seed, bl_jobs, method));
    }

    if (verify->parsed()) {
      std::filesystem::path scratch = vf_scratch.empty()
                                          ? std::filesystem::temp_directory_path() /
                                                ("lowlight-verify-" + std::to_string(vf_seed))
                                          : std::filesystem::path(vf_scratch);
      const VerificationReport report = run_verification(cfg, vf_seed, scratch);
      std::ofstream out(vf_report);
      if (!out) throw IoError("cannot write report " + vf_report);
      out << report_to_json(report).dump(2) << "\n";
      for (const auto& e : report.entries)
        std::cout << (e.pass ? "[PASS] " : "[FAIL] ") << e.name << "\n";
      if (vf_scratch.empty()) std::filesystem::remove_all(scratch);
      std::cout << (report.overall_pass() ? "verification passed" : "verification FAILED")
                << "\n";
      return report.overall_pass() ? 0 : 1;
    }

    if (replay->parsed()) {
      const ReplayOutcome outcome = replay_batch(rp_src, rp_deg, cfg);
      for (const auto& msg : outcome.messages) std::cerr << msg << "\n";
      std::cout << "replayed " << outcome.checked << " record(s), "
                << outcome.mismatched + outcome.failed << " problem(s)\n";
      return outcome.mismatched + outcome.failed == 0 ? 0 : 1;
    }

    if (mt->parsed()) {
      std::filesystem::create_directories(mt_out);
      std::cout << "generating " << mt_n << "+" << mt_holdout << " samples...\n";
      const auto dataset = maet::make_toy_dataset(mt_n + mt_holdout, mt_seed, cfg, mt_jobs);
      const std::vector<maet::Sample> train_set(dataset.begin(), dataset.begin() + mt_n);
      const std::vector<maet::Sample> holdout_set(dataset.begin() + mt_n, dataset.end());

      maet::Model model = maet::Model::init(maet::ModelConfig{}, mt_seed);
      maet::TrainConfig tc;
      tc.steps = mt_steps;
      tc.batch = mt_batch;
      tc.lr = mt_lr;
      tc.seed = mt_seed;
      tc.use_ort = !mt_no_ort;
      std::cout << "training for " << tc.steps << " steps...\n";
      maet::TrainResult result = maet::train(train_set, std::move(model), tc);

      const std::filesystem::path out_dir(mt_out);
      maet::save_curve_csv(result.curve, out_dir / "curve.csv");
      maet::save_checkpoint(result.model, out_dir / "model.ckpt");
      const maet::EvalMetrics train_metrics = maet::evaluate(result.model, train_set);
      const maet::EvalMetrics holdout_metrics = maet::evaluate(result.model, holdout_set);
      json doc{{"seed", mt_seed},
               {"steps", mt_steps},
               {"lr", mt_lr},
               {"batch", mt_batch},
               {"ort_enabled", tc.use_ort},
               {"config_hash", cfg.config_hash},
               {"train", metrics_json(train_metrics)},
               {"holdout", metrics_json(holdout_metrics)}};
      std::ofstream metrics(out_dir / "metrics.json");
      if (!metrics) throw IoError("cannot write metrics.json");
      metrics << doc.dump(2) << "\n";
      std::cout << "final train loss_deg " << train_metrics.loss_deg << ", holdout pearson(k) "
                << holdout_metrics.pearson_k << ", mean |cos| "
                << train_metrics.mean_abs_cos << "\n";
      return 0;
    }

    if (me->parsed()) {
      const maet::Model model = maet::load_checkpoint(me_ckpt);
      const auto dataset = maet::make_toy_dataset(me_n, me_seed, cfg, 1);
      const maet::EvalMetrics metrics = maet::evaluate(model, dataset);
      const json doc = metrics_json(metrics);
      if (me_out.empty()) {
        std::cout << doc.dump(2) << "\n";
      } else {
        std::ofstream out(me_out);
        if (!out) throw IoError("cannot write " + me_out);
        out << doc.dump(2) << "\n";
      }
      return 0;
    }

    std::cerr << "missing subcommand\n" << app.help();
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lowlight
