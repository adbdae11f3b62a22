#pragma once

#include <functional>
#include <span>
#include <vector>

namespace lowlight {

// Standard normal CDF.
double normal_cdf(double x);
// Standard normal density.
double normal_pdf(double x);

// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Upper tail of the chi-square distribution with df degrees of freedom.
double chi2_sf(double stat, int df);

// Kolmogorov distribution tail Q(lambda) = 2 sum_j (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda);

// Gaussian restricted to [lo, hi] and renormalized.
struct TruncatedGaussian {
  double mean = 0.0;
  double stddev = 1.0;
  double lo = 0.0;
  double hi = 1.0;

  double cdf(double x) const;
  double distribution_mean() const;
  double distribution_var() const;
};

struct KsResult {
  double d = 0.0;
  double p_value = 0.0;
};

// One-sample Kolmogorov-Smirnov test against a given CDF. Sorts a copy of
// the sample; p-value uses the finite-n corrected asymptotic form.
KsResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf);

struct Chi2Result {
  double stat = 0.0;
  int df = 0;
  double p_value = 0.0;
};

// Chi-square goodness-of-fit against a uniform distribution on [lo, hi)
// using equal-width bins. Samples outside [lo, hi] count as failures and
// are binned into the nearest edge bin.
Chi2Result chi2_uniform_test(std::span<const double> sample, double lo, double hi, int bins);

// Streaming mean/variance (Welford).
struct RunningMoments {
  long long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / double(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
};

double pearson_r(std::span<const double> a, std::span<const double> b);

}  // namespace lowlight
