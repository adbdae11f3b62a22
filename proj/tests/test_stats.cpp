#include "lowlight/rng.hpp"
#include "lowlight/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace lowlight;

// Reference values computed independently with scipy.stats / scipy.special.

TEST_CASE("normal cdf matches reference values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(normal_cdf(-2.0) == doctest::Approx(0.022750131948179).epsilon(1e-10));
  CHECK(normal_cdf(-1.125) == doctest::Approx(0.130294517136809).epsilon(1e-10));
  CHECK(normal_cdf(0.5) == doctest::Approx(0.691462461274013).epsilon(1e-10));
  CHECK(normal_cdf(3.0) == doctest::Approx(0.998650101968370).epsilon(1e-10));
}

TEST_CASE("regularized incomplete gamma matches reference values") {
  CHECK(gamma_q(0.5, 0.5) == doctest::Approx(0.317310507862911).epsilon(1e-10));
  CHECK(gamma_q(1.0, 2.0) == doctest::Approx(0.135335283236613).epsilon(1e-10));
  CHECK(gamma_q(9.5, 9.5) == doctest::Approx(0.456836125591962).epsilon(1e-10));
  CHECK(gamma_q(9.5, 15.0) == doctest::Approx(0.051798458893024).epsilon(1e-10));
  CHECK(gamma_q(2.5, 0.3) == doctest::Approx(0.988003242794094).epsilon(1e-10));
  CHECK(gamma_p(2.5, 0.3) == doctest::Approx(1.0 - 0.988003242794094).epsilon(1e-8));
}

TEST_CASE("chi-square survival function") {
  CHECK(chi2_sf(25.0, 19) == doctest::Approx(0.160542221361068).epsilon(1e-10));
  CHECK(chi2_sf(10.0, 19) == doctest::Approx(0.952945797586622).epsilon(1e-10));
  CHECK(chi2_sf(0.0, 19) == doctest::Approx(1.0));
}

TEST_CASE("kolmogorov tail matches reference values") {
  CHECK(kolmogorov_q(0.5) == doctest::Approx(0.963945243664875).epsilon(1e-10));
  CHECK(kolmogorov_q(0.8) == doctest::Approx(0.544142411574198).epsilon(1e-10));
  CHECK(kolmogorov_q(1.0) == doctest::Approx(0.269999671677355).epsilon(1e-10));
  CHECK(kolmogorov_q(1.36) == doctest::Approx(0.049485876755378).epsilon(1e-10));
  CHECK(kolmogorov_q(2.0) == doctest::Approx(0.000670925255780).epsilon(1e-8));
}

TEST_CASE("truncated gaussian moments for the attenuation law") {
  const TruncatedGaussian tg{0.1, 0.08, 0.01, 1.0};
  CHECK(tg.distribution_mean() == doctest::Approx(0.119489507651).epsilon(1e-9));
  CHECK(tg.distribution_var() == doctest::Approx(4.266103402979e-3).epsilon(1e-9));
  CHECK(tg.cdf(0.1) == doctest::Approx(0.425092735585).epsilon(1e-9));
  CHECK(tg.cdf(0.25) == doctest::Approx(0.965049821619).epsilon(1e-9));
  CHECK(tg.cdf(0.005) == 0.0);
  CHECK(tg.cdf(1.5) == 1.0);
}

TEST_CASE("ks test accepts matching samples and rejects shifted ones") {
  StreamRng rng(99, {1});
  std::vector<double> u(20000);
  for (double& x : u) x = rng.uniform();
  auto uniform_cdf = [](double x) { return x < 0 ? 0.0 : (x > 1 ? 1.0 : x); };
  const KsResult ok = ks_test(u, uniform_cdf);
  CHECK(ok.p_value > 0.01);

  for (double& x : u) x = 0.5 + 0.5 * x;  // wrong distribution
  const KsResult bad = ks_test(u, uniform_cdf);
  CHECK(bad.p_value < 1e-6);
}

TEST_CASE("chi-square uniformity test behaves on both hypotheses") {
  StreamRng rng(7, {2});
  std::vector<double> u(50000);
  for (double& x : u) x = rng.uniform(-3.0, 4.5);
  CHECK(chi2_uniform_test(u, -3.0, 4.5, 20).p_value > 0.01);

  for (double& x : u) x = x * x;  // clearly non-uniform
  CHECK(chi2_uniform_test(u, 0.0, 20.25, 20).p_value < 1e-6);
}

TEST_CASE("pearson correlation") {
  std::vector<double> a{1, 2, 3, 4, 5};
  std::vector<double> b{2, 4, 6, 8, 10};
  CHECK(pearson_r(a, b) == doctest::Approx(1.0));
  std::vector<double> c{5, 4, 3, 2, 1};
  CHECK(pearson_r(a, c) == doctest::Approx(-1.0));
  std::vector<double> flat{1, 1, 1, 1, 1};
  CHECK(pearson_r(a, flat) == 0.0);
}

TEST_CASE("running moments match direct computation") {
  RunningMoments m;
  const std::vector<double> xs{0.1, 0.4, 0.3, 0.9, 0.7, 0.2};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= double(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= double(xs.size() - 1);
  for (double x : xs) m.add(x);
  CHECK(m.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(m.variance() == doctest::Approx(var).epsilon(1e-12));
}
