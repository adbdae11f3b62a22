#pragma once

#include "lowlight/config.hpp"
#include "lowlight/rng.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lowlight::maet {

// omega1/omega2 balance the object and degradation losses; deg holds the
// per-parameter weights for (k, 1/B, 1/g_r, 1/g_b, 1/gamma).
struct LossWeights {
  double omega1 = 1.0;
  double omega2 = 10.0;
  std::array<double, 5> deg{5.0, 1.0, 1.0, 1.0, 1.0};
};

struct Linear {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // row-major [out][in]
  std::vector<double> b;  // [out]

  void resize(int in_dim, int out_dim);
  void init_xavier(StreamRng& rng, double gain = 1.0);
};

struct ModelConfig {
  int patch = 32;
  int hidden1 = 256;
  int hidden2 = 128;
  int features = 64;
  int num_classes = 2;

  int input_dim() const { return patch * patch * 3; }
  int obj_dim() const { return 4 + num_classes; }
};

// Siamese encoder (flatten -> two tanh hidden layers -> features, one
// shared weight set for both paths) with two affine task heads. Affine
// heads make the decoder tangents exactly the weight rows.
struct Model {
  ModelConfig cfg;
  Linear enc1;
  Linear enc2;
  Linear enc3;
  Linear deg_head;  // concat(f_clean, f_dark) -> 5
  Linear obj_head;  // f_dark -> 4 box values + C class scores
  LossWeights weights;

  static Model init(const ModelConfig& cfg, uint64_t seed);
};

struct Sample {
  std::vector<double> clean;  // flattened planar patch
  std::vector<double> dark;
  std::array<double, 5> targets;  // normalized degradation parameters
  std::array<double, 4> box;      // cx, cy, w, h in [0,1]
  int label = 0;
};

// Bright axis-aligned shape (square or disc, class = shape type) on a dark
// gray background; the dark patch comes from the full degrading pipeline.
std::vector<Sample> make_toy_dataset(int n, uint64_t seed, const AppConfig& cfg, int jobs = 1);

std::vector<double> encode(const Model& m, std::span<const double> patch);
std::array<double, 5> decode_deg(const Model& m, std::span<const double> f_clean,
                                 std::span<const double> f_dark);
std::vector<double> decode_obj(const Model& m, std::span<const double> f_dark);

double loss_deg(const std::array<double, 5>& pred, const std::array<double, 5>& target,
                const LossWeights& w);

// Tangent rows of the decoder outputs with respect to the shared dark-path
// feature: for the deg head these are the dark halves of the weight rows,
// for the obj head the full weight rows.
std::vector<std::vector<double>> deg_tangents(const Model& m);
std::vector<std::vector<double>> obj_tangents(const Model& m);

// Sum over all (deg row, obj row) pairs of |cos|. A zero-norm row makes its
// pairs contribute 0 and raises *zero_norm_warning.
double loss_ort(const std::vector<std::vector<double>>& t_deg,
                const std::vector<std::vector<double>>& t_obj,
                bool* zero_norm_warning = nullptr);

struct LossBreakdown {
  double total = 0.0;
  double ort = 0.0;
  double obj = 0.0;
  double deg = 0.0;
};

// L_total = L_ort + omega1 * L_obj + omega2 * L_deg (L_ort dropped when
// use_ort is false).
LossBreakdown total_loss(const Model& m, const Sample& s, bool use_ort = true);

struct TrainConfig {
  int steps = 2000;
  int batch = 8;
  double lr = 5e-4;
  // The degradation decoder trains at a tenth of the base rate, which
  // keeps the heavily weighted degradation loss stable.
  double deg_head_lr_scale = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  // Linear warmup over the first steps, then step decay: multiply the
  // rate by decay_factor at each fraction of the run.
  int warmup_steps = 100;
  std::array<double, 2> decay_milestones{0.8, 0.9};
  double decay_factor = 0.1;
  uint64_t seed = 1;
  bool use_ort = true;
};

struct CurvePoint {
  int step = 0;
  double total = 0.0, ort = 0.0, obj = 0.0, deg = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<CurvePoint> curve;
};

// Plain SGD with momentum and weight decay (decay on weights, not biases).
// Deterministic under a fixed seed; throws on divergence.
TrainResult train(const std::vector<Sample>& train_set, Model model, const TrainConfig& cfg);

struct EvalMetrics {
  double loss_deg = 0.0;
  double loss_obj = 0.0;
  double pearson_k = 0.0;      // predicted vs true normalized k
  double mean_abs_cos = 0.0;   // mean pairwise |cos| between head tangents
  bool zero_norm_warning = false;
};

EvalMetrics evaluate(const Model& m, const std::vector<Sample>& set);

struct GradCheckGroup {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckGroup> groups;
  double max_rel_err = 0.0;
};

// Compares analytic gradients of the selected loss against central finite
// differences on a deterministic subset of coordinates per parameter group.
// Relative error uses |a - n| / max(1, |a|, |n|).
enum class GradCheckLoss { Total, DegOnly, OrtOnly };
GradCheckReport grad_check(const Model& m, const std::vector<Sample>& samples,
                           GradCheckLoss which = GradCheckLoss::Total, double fd_step = 1e-5,
                           int coords_per_group = 24, uint64_t seed = 1234,
                           bool use_ort = true);

void save_checkpoint(const Model& m, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

void save_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path);

}  // namespace lowlight::maet
