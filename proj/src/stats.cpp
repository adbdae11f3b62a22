#include "lowlight/stats.hpp"

#include "lowlight/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lowlight {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

namespace {

// Series representation of P(a,x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  const double gln = std::lgamma(a);
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - gln);
}

// Continued fraction for Q(a,x), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double gln = std::lgamma(a);
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw ParamError("gamma_p: requires a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw ParamError("gamma_q: requires a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_sf(double stat, int df) {
  if (df <= 0) throw ParamError("chi2_sf: df must be positive");
  if (stat <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * stat);
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * double(j) * double(j) * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double TruncatedGaussian::cdf(double x) const {
  const double a = (lo - mean) / stddev;
  const double b = (hi - mean) / stddev;
  const double z = normal_cdf(b) - normal_cdf(a);
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  return (normal_cdf((x - mean) / stddev) - normal_cdf(a)) / z;
}

double TruncatedGaussian::distribution_mean() const {
  const double a = (lo - mean) / stddev;
  const double b = (hi - mean) / stddev;
  const double z = normal_cdf(b) - normal_cdf(a);
  return mean + stddev * (normal_pdf(a) - normal_pdf(b)) / z;
}

double TruncatedGaussian::distribution_var() const {
  const double a = (lo - mean) / stddev;
  const double b = (hi - mean) / stddev;
  const double z = normal_cdf(b) - normal_cdf(a);
  const double d = (normal_pdf(a) - normal_pdf(b)) / z;
  const double e = (a * normal_pdf(a) - b * normal_pdf(b)) / z;
  return stddev * stddev * (1.0 + e - d * d);
}

KsResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw ParamError("ks_test: empty sample");
  std::vector<double> xs(sample.begin(), sample.end());
  std::sort(xs.begin(), xs.end());
  const double n = double(xs.size());
  double d = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::fabs(double(i + 1) / n - f));
    d = std::max(d, std::fabs(f - double(i) / n));
  }
  const double en = std::sqrt(n);
  const double lambda = (en + 0.12 + 0.11 / en) * d;
  return {d, kolmogorov_q(lambda)};
}

Chi2Result chi2_uniform_test(std::span<const double> sample, double lo, double hi, int bins) {
  if (bins < 2) throw ParamError("chi2_uniform_test: need at least 2 bins");
  if (!(lo < hi)) throw ParamError("chi2_uniform_test: empty interval");
  if (sample.empty()) throw ParamError("chi2_uniform_test: empty sample");
  std::vector<long long> counts(bins, 0);
  for (double x : sample) {
    int b = int(std::floor((x - lo) / (hi - lo) * bins));
    b = std::clamp(b, 0, bins - 1);
    ++counts[b];
  }
  const double expected = double(sample.size()) / bins;
  double stat = 0.0;
  for (long long c : counts) {
    const double d = double(c) - expected;
    stat += d * d / expected;
  }
  const int df = bins - 1;
  return {stat, df, chi2_sf(stat, df)};
}

double pearson_r(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw ParamError("pearson_r: size mismatch or too small");
  const double n = double(a.size());
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace lowlight
