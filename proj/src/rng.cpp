#include "lowlight/rng.hpp"

#include "lowlight/errors.hpp"

#include <cmath>
#include <vector>

namespace lowlight {

namespace {

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

uint64_t splitmix64(uint64_t& s) {
  s += kGolden;
  uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

uint64_t mix_seed(uint64_t master, std::span<const uint64_t> path) {
  uint64_t s = master;
  uint64_t out = splitmix64(s);
  for (uint64_t p : path) {
    s ^= (p + kGolden) * 0x2545f4914f6cdd1dULL;
    out = splitmix64(s);
  }
  return out;
}

StreamRng::StreamRng(uint64_t master, std::initializer_list<uint64_t> path) {
  std::vector<uint64_t> p(path);
  eng_.seed(mix_seed(master, p));
}

double StreamRng::uniform() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double StreamRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

uint32_t StreamRng::uniform_index(uint32_t n) {
  if (n == 0) throw ParamError("uniform_index: n must be >= 1");
  const uint64_t limit = ~uint64_t(0) - (~uint64_t(0)) % n;
  uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return uint32_t(r % n);
}

double StreamRng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = 1.0 - uniform();  // (0,1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * M_PI * u2;
  cached_ = r * std::sin(t);
  has_cached_ = true;
  return r * std::cos(t);
}

double StreamRng::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

double StreamRng::truncated_normal(double mean, double stddev, double lo, double hi) {
  if (!(lo < hi)) throw ParamError("truncated_normal: empty interval");
  if (stddev <= 0.0) throw ParamError("truncated_normal: stddev must be positive");
  for (;;) {
    const double x = normal(mean, stddev);
    if (x >= lo && x <= hi) return x;
  }
}

long long StreamRng::poisson(double lambda) {
  if (lambda < 0.0 || !std::isfinite(lambda))
    throw ParamError("poisson: lambda must be finite and nonnegative");
  if (lambda == 0.0) return 0;

  if (lambda <= 30.0) {
    // Knuth: multiply uniforms until the product drops below exp(-lambda).
    const double l = std::exp(-lambda);
    long long k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > l);
    return k - 1;
  }

  // PTRS transformed rejection (Hormann 1993).
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  const double log_lambda = std::log(lambda);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return (long long)kf;
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    const double rhs = kf * log_lambda - lambda - std::lgamma(kf + 1.0);
    if (lhs <= rhs) return (long long)kf;
  }
}

std::array<double, 4> StreamRng::dirichlet4() {
  std::array<double, 4> w{};
  double sum = 0.0;
  for (double& wi : w) {
    wi = -std::log(1.0 - uniform());  // Exp(1)
    sum += wi;
  }
  for (double& wi : w) wi /= sum;
  return w;
}

}  // namespace lowlight
