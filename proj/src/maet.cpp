#include "lowlight/maet.hpp"

#include "lowlight/degrade_pipeline.hpp"
#include "lowlight/errors.hpp"
#include "lowlight/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

namespace lowlight::maet {

void Linear::resize(int in_dim, int out_dim) {
  in = in_dim;
  out = out_dim;
  w.assign(size_t(in) * out, 0.0);
  b.assign(size_t(out), 0.0);
}

void Linear::init_xavier(StreamRng& rng, double gain) {
  const double limit = gain * std::sqrt(6.0 / double(in + out));
  for (double& x : w) x = rng.uniform(-limit, limit);
  for (double& x : b) x = 0.0;
}

Model Model::init(const ModelConfig& cfg, uint64_t seed) {
  Model m;
  m.cfg = cfg;
  m.enc1.resize(cfg.input_dim(), cfg.hidden1);
  m.enc2.resize(cfg.hidden1, cfg.hidden2);
  m.enc3.resize(cfg.hidden2, cfg.features);
  m.deg_head.resize(2 * cfg.features, 5);
  m.obj_head.resize(cfg.features, cfg.obj_dim());
  StreamRng rng(seed, {0x1417ULL});
  m.enc1.init_xavier(rng);
  m.enc2.init_xavier(rng);
  m.enc3.init_xavier(rng);
  // Small head init keeps the first steps of SGD well inside the stable
  // region of the heavily weighted degradation loss.
  m.deg_head.init_xavier(rng, 0.1);
  m.obj_head.init_xavier(rng, 0.1);
  return m;
}

namespace {

void affine(const Linear& L, const double* x, double* y) {
  for (int i = 0; i < L.out; ++i) {
    const double* row = L.w.data() + size_t(i) * L.in;
    double s = L.b[i];
    for (int j = 0; j < L.in; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

// g.w += gy (x)^T, g.b += gy
void accumulate_outer(Linear& g, const double* gy, const double* x) {
  for (int i = 0; i < g.out; ++i) {
    const double gi = gy[i];
    if (gi == 0.0) continue;
    double* row = g.w.data() + size_t(i) * g.in;
    for (int j = 0; j < g.in; ++j) row[j] += gi * x[j];
  }
  for (int i = 0; i < g.out; ++i) g.b[i] += gy[i];
}

// gx += W^T gy
void transpose_accumulate(const Linear& L, const double* gy, double* gx) {
  for (int i = 0; i < L.out; ++i) {
    const double gi = gy[i];
    if (gi == 0.0) continue;
    const double* row = L.w.data() + size_t(i) * L.in;
    for (int j = 0; j < L.in; ++j) gx[j] += gi * row[j];
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Forward {
  std::vector<double> xc, h1c, h2c, fc;
  std::vector<double> xd, h1d, h2d, fd;
  std::array<double, 5> deg_out{};
  std::vector<double> obj_raw;
  std::array<double, 4> box_pred{};
  std::vector<double> probs;
  double l_deg = 0.0;
  double l_obj = 0.0;
};

// Patches are centered before the first affine stage; this is part of the
// encoder definition (the backward pass uses the centered input).
constexpr double kInputShift = 0.5;

void encode_path(const Model& m, const double* x, std::vector<double>& centered,
                 std::vector<double>& h1, std::vector<double>& h2, std::vector<double>& f) {
  const int n = m.cfg.input_dim();
  centered.resize(size_t(n));
  for (int i = 0; i < n; ++i) centered[i] = x[i] - kInputShift;
  h1.resize(size_t(m.cfg.hidden1));
  h2.resize(size_t(m.cfg.hidden2));
  f.resize(size_t(m.cfg.features));
  affine(m.enc1, centered.data(), h1.data());
  for (double& v : h1) v = std::tanh(v);
  affine(m.enc2, h1.data(), h2.data());
  for (double& v : h2) v = std::tanh(v);
  affine(m.enc3, h2.data(), f.data());
}

void run_forward(const Model& m, const Sample& s, Forward& fw) {
  if (int(s.clean.size()) != m.cfg.input_dim() || int(s.dark.size()) != m.cfg.input_dim())
    throw ParamError("maet::forward: patch size does not match the model input");
  encode_path(m, s.clean.data(), fw.xc, fw.h1c, fw.h2c, fw.fc);
  encode_path(m, s.dark.data(), fw.xd, fw.h1d, fw.h2d, fw.fd);

  std::vector<double> z(size_t(2 * m.cfg.features));
  std::copy(fw.fc.begin(), fw.fc.end(), z.begin());
  std::copy(fw.fd.begin(), fw.fd.end(), z.begin() + m.cfg.features);
  affine(m.deg_head, z.data(), fw.deg_out.data());

  fw.obj_raw.resize(size_t(m.cfg.obj_dim()));
  affine(m.obj_head, fw.fd.data(), fw.obj_raw.data());
  for (int j = 0; j < 4; ++j) fw.box_pred[j] = sigmoid(fw.obj_raw[j]);

  const int c = m.cfg.num_classes;
  fw.probs.resize(size_t(c));
  double mx = fw.obj_raw[4];
  for (int j = 1; j < c; ++j) mx = std::max(mx, fw.obj_raw[4 + j]);
  double denom = 0.0;
  for (int j = 0; j < c; ++j) denom += std::exp(fw.obj_raw[4 + j] - mx);
  for (int j = 0; j < c; ++j) fw.probs[j] = std::exp(fw.obj_raw[4 + j] - mx) / denom;

  fw.l_deg = loss_deg(fw.deg_out, s.targets, m.weights);
  double box_term = 0.0;
  for (int j = 0; j < 4; ++j) {
    const double d = fw.box_pred[j] - s.box[j];
    box_term += d * d;
  }
  if (s.label < 0 || s.label >= c) throw ParamError("maet::forward: class label out of range");
  fw.l_obj = box_term - std::log(std::max(fw.probs[s.label], 1e-300));
}

struct Grads {
  Linear enc1, enc2, enc3, deg_head, obj_head;

  void init_like(const Model& m) {
    enc1.resize(m.enc1.in, m.enc1.out);
    enc2.resize(m.enc2.in, m.enc2.out);
    enc3.resize(m.enc3.in, m.enc3.out);
    deg_head.resize(m.deg_head.in, m.deg_head.out);
    obj_head.resize(m.obj_head.in, m.obj_head.out);
  }
  void zero() {
    auto z = [](Linear& l) {
      std::fill(l.w.begin(), l.w.end(), 0.0);
      std::fill(l.b.begin(), l.b.end(), 0.0);
    };
    z(enc1);
    z(enc2);
    z(enc3);
    z(deg_head);
    z(obj_head);
  }
};

// Gradient of obj_scale * L_obj + deg_scale * L_deg for one sample.
void backward_sample(const Model& m, const Sample& s, const Forward& fw, double obj_scale,
                     double deg_scale, Grads& g) {
  const int d = m.cfg.features;

  // Head output gradients.
  std::array<double, 5> g_deg{};
  for (int i = 0; i < 5; ++i)
    g_deg[i] = deg_scale * 2.0 * m.weights.deg[i] * (fw.deg_out[i] - s.targets[i]);

  std::vector<double> g_obj(size_t(m.cfg.obj_dim()), 0.0);
  for (int j = 0; j < 4; ++j) {
    const double p = fw.box_pred[j];
    g_obj[j] = obj_scale * 2.0 * (p - s.box[j]) * p * (1.0 - p);
  }
  for (int j = 0; j < m.cfg.num_classes; ++j) {
    const double onehot = j == s.label ? 1.0 : 0.0;
    g_obj[4 + j] = obj_scale * (fw.probs[j] - onehot);
  }

  // Heads.
  std::vector<double> z(size_t(2 * d));
  std::copy(fw.fc.begin(), fw.fc.end(), z.begin());
  std::copy(fw.fd.begin(), fw.fd.end(), z.begin() + d);
  accumulate_outer(g.deg_head, g_deg.data(), z.data());
  accumulate_outer(g.obj_head, g_obj.data(), fw.fd.data());

  // Feature gradients.
  std::vector<double> gz(size_t(2 * d), 0.0);
  transpose_accumulate(m.deg_head, g_deg.data(), gz.data());
  std::vector<double> gfc(gz.begin(), gz.begin() + d);
  std::vector<double> gfd(gz.begin() + d, gz.end());
  transpose_accumulate(m.obj_head, g_obj.data(), gfd.data());

  // Encoder, both paths into the single shared parameter set.
  auto encoder_backward = [&](const std::vector<double>& gf, const std::vector<double>& h1,
                              const std::vector<double>& h2, const double* centered) {
    accumulate_outer(g.enc3, gf.data(), h2.data());
    std::vector<double> gh2(size_t(m.cfg.hidden2), 0.0);
    transpose_accumulate(m.enc3, gf.data(), gh2.data());
    for (int i = 0; i < m.cfg.hidden2; ++i) gh2[i] *= 1.0 - h2[i] * h2[i];
    accumulate_outer(g.enc2, gh2.data(), h1.data());
    std::vector<double> gh1(size_t(m.cfg.hidden1), 0.0);
    transpose_accumulate(m.enc2, gh2.data(), gh1.data());
    for (int i = 0; i < m.cfg.hidden1; ++i) gh1[i] *= 1.0 - h1[i] * h1[i];
    accumulate_outer(g.enc1, gh1.data(), centered);
  };
  encoder_backward(gfc, fw.h1c, fw.h2c, fw.xc.data());
  encoder_backward(gfd, fw.h1d, fw.h2d, fw.xd.data());
}

// Tangent-orthogonality value and (optionally) its gradient with respect
// to the head weights. The tangents are weight rows, so the encoder gets
// no gradient from this term.
double ort_value_and_grad(const Model& m, double scale, Grads* g, bool* warning) {
  const int d = m.cfg.features;
  const int nd = 5;
  const int no = m.cfg.obj_dim();
  double total = 0.0;
  for (int i = 0; i < nd; ++i) {
    const double* u = m.deg_head.w.data() + size_t(i) * (2 * d) + d;  // dark half
    double uu = 0.0;
    for (int t = 0; t < d; ++t) uu += u[t] * u[t];
    for (int j = 0; j < no; ++j) {
      const double* v = m.obj_head.w.data() + size_t(j) * d;
      double vv = 0.0, uv = 0.0;
      for (int t = 0; t < d; ++t) {
        vv += v[t] * v[t];
        uv += u[t] * v[t];
      }
      if (uu <= 0.0 || vv <= 0.0) {
        if (warning) *warning = true;
        continue;  // cosine undefined; the pair contributes 0
      }
      const double nu = std::sqrt(uu), nv = std::sqrt(vv);
      const double c = uv / (nu * nv);
      total += std::fabs(c);
      if (g) {
        const double sgn = c > 0.0 ? 1.0 : (c < 0.0 ? -1.0 : 0.0);
        const double f = scale * sgn / (nu * nv);
        double* gu = g->deg_head.w.data() + size_t(i) * (2 * d) + d;
        double* gv = g->obj_head.w.data() + size_t(j) * d;
        for (int t = 0; t < d; ++t) {
          gu[t] += f * (v[t] - uv / uu * u[t]);
          gv[t] += f * (u[t] - uv / vv * v[t]);
        }
      }
    }
  }
  return total;
}

}  // namespace

std::vector<double> encode(const Model& m, std::span<const double> patch) {
  if (int(patch.size()) != m.cfg.input_dim())
    throw ParamError("encode: patch size does not match the model input");
  std::vector<double> centered, a1, h1, f;
  encode_path(m, patch.data(), centered, a1, h1, f);
  for (double v : f)
    if (!std::isfinite(v)) throw Error("encode: non-finite feature");
  return f;
}

std::array<double, 5> decode_deg(const Model& m, std::span<const double> f_clean,
                                 std::span<const double> f_dark) {
  const int d = m.cfg.features;
  if (int(f_clean.size()) != d || int(f_dark.size()) != d)
    throw ParamError("decode_deg: feature dimension mismatch");
  std::vector<double> z(size_t(2 * d));
  std::copy(f_clean.begin(), f_clean.end(), z.begin());
  std::copy(f_dark.begin(), f_dark.end(), z.begin() + d);
  std::array<double, 5> out{};
  affine(m.deg_head, z.data(), out.data());
  return out;
}

std::vector<double> decode_obj(const Model& m, std::span<const double> f_dark) {
  if (int(f_dark.size()) != m.cfg.features)
    throw ParamError("decode_obj: feature dimension mismatch");
  std::vector<double> out(size_t(m.cfg.obj_dim()));
  affine(m.obj_head, f_dark.data(), out.data());
  return out;
}

double loss_deg(const std::array<double, 5>& pred, const std::array<double, 5>& target,
                const LossWeights& w) {
  double s = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double d = pred[i] - target[i];
    s += w.deg[i] * d * d;
  }
  return s;
}

std::vector<std::vector<double>> deg_tangents(const Model& m) {
  const int d = m.cfg.features;
  std::vector<std::vector<double>> rows(5, std::vector<double>(size_t(d)));
  for (int i = 0; i < 5; ++i) {
    const double* src = m.deg_head.w.data() + size_t(i) * (2 * d) + d;
    std::copy(src, src + d, rows[i].begin());
  }
  return rows;
}

std::vector<std::vector<double>> obj_tangents(const Model& m) {
  const int d = m.cfg.features;
  std::vector<std::vector<double>> rows(size_t(m.cfg.obj_dim()), std::vector<double>(size_t(d)));
  for (int j = 0; j < m.cfg.obj_dim(); ++j) {
    const double* src = m.obj_head.w.data() + size_t(j) * d;
    std::copy(src, src + d, rows[j].begin());
  }
  return rows;
}

double loss_ort(const std::vector<std::vector<double>>& t_deg,
                const std::vector<std::vector<double>>& t_obj, bool* zero_norm_warning) {
  double total = 0.0;
  for (const auto& u : t_deg) {
    double uu = 0.0;
    for (double x : u) uu += x * x;
    for (const auto& v : t_obj) {
      if (u.size() != v.size()) throw ParamError("loss_ort: tangent dimension mismatch");
      double vv = 0.0, uv = 0.0;
      for (size_t t = 0; t < v.size(); ++t) {
        vv += v[t] * v[t];
        uv += u[t] * v[t];
      }
      if (uu <= 0.0 || vv <= 0.0) {
        if (zero_norm_warning) *zero_norm_warning = true;
        continue;
      }
      total += std::fabs(uv) / (std::sqrt(uu) * std::sqrt(vv));
    }
  }
  return total;
}

LossBreakdown total_loss(const Model& m, const Sample& s, bool use_ort) {
  Forward fw;
  run_forward(m, s, fw);
  LossBreakdown b;
  b.deg = fw.l_deg;
  b.obj = fw.l_obj;
  b.ort = use_ort ? ort_value_and_grad(m, 0.0, nullptr, nullptr) : 0.0;
  b.total = b.ort + m.weights.omega1 * b.obj + m.weights.omega2 * b.deg;
  return b;
}

std::vector<Sample> make_toy_dataset(int n, uint64_t seed, const AppConfig& cfg, int jobs) {
  if (n < 1) throw ParamError("make_toy_dataset: n must be >= 1");
  const int patch = 32;
  std::vector<Sample> samples{size_t(n)};

  auto make_one = [&](size_t i) {
    StreamRng patch_rng(seed, {uint64_t(i), 0});
    StreamRng param_rng(seed, {uint64_t(i), 1});
    StreamRng noise_rng(seed, {uint64_t(i), 2});

    Sample& s = samples[i];
    s.label = int(patch_rng.uniform_index(2));  // 0 = square, 1 = disc
    const double size = patch_rng.uniform(0.25, 0.55);
    const double cx = patch_rng.uniform(size / 2.0, 1.0 - size / 2.0);
    const double cy = patch_rng.uniform(size / 2.0, 1.0 - size / 2.0);

    const double base = patch_rng.uniform(0.08, 0.20);
    double bg[3];
    for (double& c : bg) c = std::clamp(base + patch_rng.uniform(-0.02, 0.02), 0.01, 1.0);
    const double bright = patch_rng.uniform(0.65, 0.95);
    double fg[3];
    for (double& c : fg) c = std::clamp(bright + patch_rng.uniform(-0.05, 0.05), 0.0, 1.0);

    PlanarImage img(patch, patch, ColorState::SrgbEncoded);
    const double half = size / 2.0;
    for (int y = 0; y < patch; ++y) {
      for (int x = 0; x < patch; ++x) {
        const double u = (x + 0.5) / patch, v = (y + 0.5) / patch;
        bool inside;
        if (s.label == 0) {
          inside = std::fabs(u - cx) <= half && std::fabs(v - cy) <= half;
        } else {
          inside = (u - cx) * (u - cx) + (v - cy) * (v - cy) <= half * half;
        }
        const double* col = inside ? fg : bg;
        for (int c = 0; c < 3; ++c) img.at(c, y, x) = col[c];
      }
    }
    s.box = {cx, cy, size, size};

    const DegradationParams p =
        sample_params(param_rng, cfg.ranges, cfg.ccms, cfg.pipeline.ccm_mode);
    const DegradeOutput out =
        degrade_full(img, p, cfg.pipeline, cfg.ccms, cfg.ranges, noise_rng);
    s.targets = out.record.normalized_targets;
    s.clean = img.data;
    s.dark = out.image.data;
  };

  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (size_t i = 0; i < size_t(n); ++i) make_one(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          const size_t i = next.fetch_add(1);
          if (i >= size_t(n)) return;
          make_one(i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  return samples;
}

TrainResult train(const std::vector<Sample>& train_set, Model model, const TrainConfig& cfg) {
  if (cfg.steps < 1) throw ParamError("train: steps must be >= 1");
  if (cfg.batch < 1) throw ParamError("train: batch must be >= 1");
  if (train_set.empty()) throw ParamError("train: empty dataset");

  Grads grads, vel;
  grads.init_like(model);
  vel.init_like(model);

  StreamRng batch_rng(cfg.seed, {0xb47c4ULL});
  TrainResult result;
  result.curve.reserve(size_t(cfg.steps));

  const double w1 = model.weights.omega1;
  const double w2 = model.weights.omega2;

  for (int step = 1; step <= cfg.steps; ++step) {
    grads.zero();
    double sum_obj = 0.0, sum_deg = 0.0;
    Forward fw;
    for (int b = 0; b < cfg.batch; ++b) {
      const auto& s = train_set[batch_rng.uniform_index(uint32_t(train_set.size()))];
      run_forward(model, s, fw);
      sum_obj += fw.l_obj;
      sum_deg += fw.l_deg;
      backward_sample(model, s, fw, w1 / cfg.batch, w2 / cfg.batch, grads);
    }
    double ort = 0.0;
    if (cfg.use_ort) ort = ort_value_and_grad(model, 1.0, &grads, nullptr);

    const double mean_obj = sum_obj / cfg.batch;
    const double mean_deg = sum_deg / cfg.batch;
    const double total = ort + w1 * mean_obj + w2 * mean_deg;
    if (!std::isfinite(total))
      throw Error("train: loss diverged (non-finite) at step " + std::to_string(step));
    result.curve.push_back({step, total, ort, mean_obj, mean_deg});

    double lr = cfg.lr;
    if (cfg.warmup_steps > 0 && step <= cfg.warmup_steps)
      lr *= double(step) / double(cfg.warmup_steps);
    for (double milestone : cfg.decay_milestones)
      if (double(step) > milestone * cfg.steps) lr *= cfg.decay_factor;

    auto sgd = [&](Linear& p, Linear& g, Linear& v, double rate) {
      for (size_t i = 0; i < p.w.size(); ++i) {
        const double gi = g.w[i] + cfg.weight_decay * p.w[i];
        v.w[i] = cfg.momentum * v.w[i] + gi;
        p.w[i] -= rate * v.w[i];
      }
      for (size_t i = 0; i < p.b.size(); ++i) {
        v.b[i] = cfg.momentum * v.b[i] + g.b[i];
        p.b[i] -= rate * v.b[i];
      }
    };
    sgd(model.enc1, grads.enc1, vel.enc1, lr);
    sgd(model.enc2, grads.enc2, vel.enc2, lr);
    sgd(model.enc3, grads.enc3, vel.enc3, lr);
    sgd(model.deg_head, grads.deg_head, vel.deg_head, lr * cfg.deg_head_lr_scale);
    sgd(model.obj_head, grads.obj_head, vel.obj_head, lr);
  }

  result.model = std::move(model);
  return result;
}

EvalMetrics evaluate(const Model& m, const std::vector<Sample>& set) {
  if (set.empty()) throw ParamError("evaluate: empty dataset");
  EvalMetrics metrics;
  std::vector<double> pred_k, true_k;
  pred_k.reserve(set.size());
  true_k.reserve(set.size());
  Forward fw;
  for (const auto& s : set) {
    run_forward(m, s, fw);
    metrics.loss_deg += fw.l_deg;
    metrics.loss_obj += fw.l_obj;
    pred_k.push_back(fw.deg_out[0]);
    true_k.push_back(s.targets[0]);
  }
  metrics.loss_deg /= double(set.size());
  metrics.loss_obj /= double(set.size());
  metrics.pearson_k = pearson_r(pred_k, true_k);
  bool warn = false;
  const double ort = loss_ort(deg_tangents(m), obj_tangents(m), &warn);
  metrics.mean_abs_cos = ort / double(5 * m.cfg.obj_dim());
  metrics.zero_norm_warning = warn;
  return metrics;
}

namespace {

double eval_loss(const Model& m, const Sample& s, GradCheckLoss which, bool use_ort) {
  switch (which) {
    case GradCheckLoss::Total: {
      const LossBreakdown b = total_loss(m, s, use_ort);
      return b.total;
    }
    case GradCheckLoss::DegOnly: {
      Forward fw;
      run_forward(m, s, fw);
      return fw.l_deg;
    }
    case GradCheckLoss::OrtOnly:
      return ort_value_and_grad(m, 0.0, nullptr, nullptr);
  }
  return 0.0;
}

void analytic_grads(const Model& m, const Sample& s, GradCheckLoss which, bool use_ort,
                    Grads& g) {
  g.zero();
  Forward fw;
  switch (which) {
    case GradCheckLoss::Total:
      run_forward(m, s, fw);
      backward_sample(m, s, fw, m.weights.omega1, m.weights.omega2, g);
      if (use_ort) ort_value_and_grad(m, 1.0, &g, nullptr);
      break;
    case GradCheckLoss::DegOnly:
      run_forward(m, s, fw);
      backward_sample(m, s, fw, 0.0, 1.0, g);
      break;
    case GradCheckLoss::OrtOnly:
      ort_value_and_grad(m, 1.0, &g, nullptr);
      break;
  }
}

}  // namespace

GradCheckReport grad_check(const Model& m, const std::vector<Sample>& samples,
                           GradCheckLoss which, double fd_step, int coords_per_group,
                           uint64_t seed, bool use_ort) {
  if (samples.empty()) throw ParamError("grad_check: no samples");
  GradCheckReport report;
  report.groups = {{"enc1.w", 0}, {"enc1.b", 0}, {"enc2.w", 0}, {"enc2.b", 0},
                   {"enc3.w", 0}, {"enc3.b", 0}, {"deg_head.w", 0}, {"deg_head.b", 0},
                   {"obj_head.w", 0}, {"obj_head.b", 0}};

  Model probe = m;  // mutated in place for the numeric evaluations
  Grads analytic;
  analytic.init_like(m);
  StreamRng pick(seed, {0x6cadULL});

  auto group_params = [](Model& mm, int gi) -> std::vector<double>& {
    switch (gi) {
      case 0: return mm.enc1.w;
      case 1: return mm.enc1.b;
      case 2: return mm.enc2.w;
      case 3: return mm.enc2.b;
      case 4: return mm.enc3.w;
      case 5: return mm.enc3.b;
      case 6: return mm.deg_head.w;
      case 7: return mm.deg_head.b;
      case 8: return mm.obj_head.w;
      default: return mm.obj_head.b;
    }
  };
  auto group_grads = [&](int gi) -> std::vector<double>& {
    switch (gi) {
      case 0: return analytic.enc1.w;
      case 1: return analytic.enc1.b;
      case 2: return analytic.enc2.w;
      case 3: return analytic.enc2.b;
      case 4: return analytic.enc3.w;
      case 5: return analytic.enc3.b;
      case 6: return analytic.deg_head.w;
      case 7: return analytic.deg_head.b;
      case 8: return analytic.obj_head.w;
      default: return analytic.obj_head.b;
    }
  };

  for (const Sample& s : samples) {
    analytic_grads(m, s, which, use_ort, analytic);
    for (int gi = 0; gi < 10; ++gi) {
      std::vector<double>& params = group_params(probe, gi);
      const std::vector<double>& grads = group_grads(gi);
      const int count = std::min<int>(coords_per_group, int(params.size()));
      for (int c = 0; c < count; ++c) {
        const size_t idx = pick.uniform_index(uint32_t(params.size()));
        const double saved = params[idx];
        params[idx] = saved + fd_step;
        const double fp = eval_loss(probe, s, which, use_ort);
        params[idx] = saved - fd_step;
        const double fm = eval_loss(probe, s, which, use_ort);
        params[idx] = saved;
        const double numeric = (fp - fm) / (2.0 * fd_step);
        const double a = grads[idx];
        const double rel =
            std::fabs(a - numeric) / std::max({1.0, std::fabs(a), std::fabs(numeric)});
        report.groups[gi].max_rel_err = std::max(report.groups[gi].max_rel_err, rel);
      }
    }
  }
  for (const auto& g : report.groups) report.max_rel_err = std::max(report.max_rel_err, g.max_rel_err);
  return report;
}

namespace {

constexpr uint32_t kCheckpointMagic = 0x4c4c4d54;  // "LLMT"
constexpr uint32_t kCheckpointVersion = 1;

void write_block(std::ofstream& out, const std::vector<double>& v) {
  const uint64_t n = v.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(n * sizeof(double)));
}

std::vector<double> read_block(std::ifstream& in, size_t expected) {
  uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || n != expected) throw IoError("checkpoint: block size mismatch");
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(double)));
  if (!in) throw IoError("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const Model& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_checkpoint: cannot open " + path.string());
  const uint32_t header[2] = {kCheckpointMagic, kCheckpointVersion};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  const int32_t dims[5] = {m.cfg.patch, m.cfg.hidden1, m.cfg.hidden2, m.cfg.features,
                           m.cfg.num_classes};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  const double weights[7] = {m.weights.omega1, m.weights.omega2, m.weights.deg[0],
                             m.weights.deg[1], m.weights.deg[2], m.weights.deg[3],
                             m.weights.deg[4]};
  out.write(reinterpret_cast<const char*>(weights), sizeof weights);
  for (const Linear* l : {&m.enc1, &m.enc2, &m.enc3, &m.deg_head, &m.obj_head}) {
    write_block(out, l->w);
    write_block(out, l->b);
  }
  if (!out) throw IoError("save_checkpoint: failed writing " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_checkpoint: cannot open " + path.string());
  uint32_t header[2];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in || header[0] != kCheckpointMagic)
    throw IoError("load_checkpoint: not a model checkpoint: " + path.string());
  if (header[1] != kCheckpointVersion)
    throw IoError("load_checkpoint: unsupported checkpoint version");
  int32_t dims[5];
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  double weights[7];
  in.read(reinterpret_cast<char*>(weights), sizeof weights);
  if (!in) throw IoError("load_checkpoint: truncated header");

  Model m;
  m.cfg = {dims[0], dims[1], dims[2], dims[3], dims[4]};
  m.weights.omega1 = weights[0];
  m.weights.omega2 = weights[1];
  for (int i = 0; i < 5; ++i) m.weights.deg[i] = weights[2 + i];
  m.enc1.resize(m.cfg.input_dim(), m.cfg.hidden1);
  m.enc2.resize(m.cfg.hidden1, m.cfg.hidden2);
  m.enc3.resize(m.cfg.hidden2, m.cfg.features);
  m.deg_head.resize(2 * m.cfg.features, 5);
  m.obj_head.resize(m.cfg.features, m.cfg.obj_dim());
  for (Linear* l : {&m.enc1, &m.enc2, &m.enc3, &m.deg_head, &m.obj_head}) {
    l->w = read_block(in, l->w.size());
    l->b = read_block(in, l->b.size());
  }
  return m;
}

void save_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_curve_csv: cannot open " + path.string());
  out << "step,total,ort,obj,deg\n";
  char line[160];
  for (const auto& p : curve) {
    std::snprintf(line, sizeof line, "%d,%.10g,%.10g,%.10g,%.10g\n", p.step, p.total, p.ort,
                  p.obj, p.deg);
    out << line;
  }
  if (!out) throw IoError("save_curve_csv: failed writing " + path.string());
}

}  // namespace lowlight::maet
