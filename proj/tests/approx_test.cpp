#include <doctest.h>

#include <cmath>

#include "fringetrees/approx.hpp"
#include "fringetrees/exactstats.hpp"
#include "test_support.hpp"

using namespace fringetrees;
using namespace fringetrees::approx;
using treecore::DegreeStatistic;
using treecore::PlaneTree;

namespace {

// slowly converging but independent series for erf, good to ~1e-14 for small x
double erf_series(double x) {
  double term = x;
  double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    sum += term / (2 * n + 1);
  }
  return sum * 2.0 / std::sqrt(M_PI);
}

}  // namespace

TEST_CASE("poisson pmf") {
  CHECK(poisson_pmf(2.5, 0) == doctest::Approx(std::exp(-2.5)));
  CHECK(poisson_pmf(0, 0) == 1.0);
  CHECK(poisson_pmf(0, 3) == 0.0);
  CHECK(poisson_pmf(1, 1) == doctest::Approx(0.36787944117144233));
  for (double lambda : {0.3, 1.0, 7.5, 40.0, 300.0}) {
    double tail = 0;
    auto table = poisson_pmf_table(lambda, 1e-12, &tail);
    double mass = tail;
    for (const auto& [k, p] : table) {
      (void)k;
      mass += p;
    }
    CHECK(std::abs(mass - 1.0) < 1e-9);
  }
}

TEST_CASE("normal density and cdf") {
  auto at_mu = normal_density_cdf(3.0, 2.0, 3.0);
  CHECK(at_mu.pdf == doctest::Approx(1.0 / (2.0 * std::sqrt(2 * M_PI))));
  CHECK(at_mu.cdf == doctest::Approx(0.5));
  for (double t : {0.1, 0.9, 2.2}) {
    CHECK(normal_density_cdf(1.0, 0.7, 1.0 + t).cdf +
              normal_density_cdf(1.0, 0.7, 1.0 - t).cdf ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(normal_density_cdf(0, 1, 1.96).cdf ==
        doctest::Approx(0.5 * (1 + erf_series(1.96 / std::sqrt(2.0)))).epsilon(1e-12));
  CHECK(normal_density_cdf(0, 1, 1.96).cdf == doctest::Approx(0.9750021048517795));
  CHECK_THROWS_WITH_AS(normal_density_cdf(0, 0, 1), doctest::Contains("NonpositiveSigma"),
                       Error);
}

TEST_CASE("total variation distance") {
  std::map<long long, long long> hist{{0, 50}, {1, 50}};
  CHECK(tv_distance(hist, {{0, 0.5}, {1, 0.5}}) == doctest::Approx(0.0));
  CHECK(tv_distance(hist, {{5, 1.0}}) == doctest::Approx(1.0));
  CHECK(tv_distance(hist, {{0, 1.0}}) == doctest::Approx(0.5));
  CHECK_THROWS_WITH_AS(tv_distance({}, {{0, 1.0}}), doctest::Contains("EmptyHistogram"), Error);
}

TEST_CASE("total variation is a metric on finite laws") {
  samplers::RandomStream rng(3, 9);
  auto random_hist = [&](long long total) {
    std::map<long long, long long> h;
    for (long long i = 0; i < total; ++i) ++h[static_cast<long long>(rng.uniform_below(6))];
    return h;
  };
  auto as_pmf = [](const std::map<long long, long long>& h) {
    long long total = 0;
    for (const auto& [k, c] : h) {
      (void)k;
      total += c;
    }
    std::vector<std::pair<long long, double>> pmf;
    for (const auto& [k, c] : h) {
      pmf.emplace_back(k, static_cast<double>(c) / static_cast<double>(total));
    }
    return pmf;
  };
  for (int iter = 0; iter < 50; ++iter) {
    auto a = random_hist(40), b = random_hist(40), c = random_hist(40);
    double ab = tv_distance(a, as_pmf(b));
    double ba = tv_distance(b, as_pmf(a));
    double ac = tv_distance(a, as_pmf(c));
    double cb = tv_distance(c, as_pmf(b));
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab <= ac + cb + 1e-12);
    CHECK(tv_distance(a, as_pmf(a)) == doctest::Approx(0.0));
  }
}

TEST_CASE("stein delta worked examples") {
  DegreeStatistic bn = DegreeStatistic::parse("0:4,2:3");
  // leaf target: lambda = n(0), delta = 1 by cancellation
  auto leaf_rep = stein_delta(bn, PlaneTree::parse("0"));
  CHECK(leaf_rep.lambda.rational() == 4);
  CHECK(leaf_rep.delta.rational() == 1);

  // impossible target: both vanish
  auto zero_rep = stein_delta(bn, PlaneTree::parse("1,0"));
  CHECK(zero_rep.lambda.rational() == 0);
  CHECK(zero_rep.delta.rational() == 0);

  auto cherry_rep = stein_delta(bn, PlaneTree::parse("2,0,0"));
  CHECK(cherry_rep.lambda.rational() == rat(6, 5));
  CHECK(cherry_rep.delta.rational() == rat(6, 5) * (rat(4, 4) + rat(1, 3)));
  CHECK(cherry_rep.class_size == 1);
  CHECK(cherry_rep.rny0_sum > 0.125);

  CHECK_THROWS_WITH_AS(stein_delta(DegreeStatistic::parse("0:1"), PlaneTree::parse("2,0,0")),
                       doctest::Contains("TargetTooLarge"), Error);
}

TEST_CASE("the rny0 chain holds on every enumerable instance") {
  for (long long s = 2; s <= 7; ++s) {
    for (const DegreeStatistic& bn : ftt::all_statistics(s)) {
      for (long long ts = 1; ts <= s; ++ts) {
        for (const PlaneTree& t : ftt::all_trees(ts)) {
          auto rep = stein_delta(bn, t);
          if (rep.lambda.rational() > 0) {
            // exact rational comparison of the rny0 sum against 1/8
            Rational sum(0);
            for (const auto& [deg, mult] : t.statistic().entries()) {
              Rational pt = rat(mult, t.size());
              Rational pn = rat(bn.count(deg), bn.size());
              sum += pt * pt / pn;
            }
            CHECK(sum > rat(1, 8));
          }
        }
      }
    }
  }
}

TEST_CASE("cai-devroye bound") {
  DegreeStatistic bn = DegreeStatistic::parse("0:4,2:3");
  PlaneTree cherry = PlaneTree::parse("2,0,0");
  auto cd = cai_devroye(bn, cherry);
  // Var - E = 4/25 - 6/5 < 0: clamped, bound = 2/sqrt(1)
  CHECK(cd.clamped);
  CHECK(cd.bound == doctest::Approx(2.0));

  auto zero = cai_devroye(bn, PlaneTree::parse("1,0"));
  CHECK(zero.zero_mean);
  CHECK(zero.bound == 1.0);

  DegreeStatistic big = DegreeStatistic::parse("0:5,1:2,3:2");  // 9 = 1 + 2 + 6
  auto rep = stein_delta(big, PlaneTree::parse("1,0"));
  CHECK(rep.cai_devroye_bound.has_value());
}

TEST_CASE("statistic tv bound") {
  DegreeStatistic bn = DegreeStatistic::parse("0:4,2:3");
  auto leaf_rep = statistic_tv_bound(bn, DegreeStatistic::parse("0:1"));
  CHECK(leaf_rep.lambda.rational() == 4);
  CHECK(leaf_rep.delta.rational() == 1);

  auto self_rep = statistic_tv_bound(bn, bn);
  CHECK(self_rep.lambda.rational() == 1);  // exactly the root
  CHECK(self_rep.delta.rational() == rat(4, 4) * rat(4) + rat(9, 3));  // sum n(i) = 7
  CHECK(self_rep.vacuous);

  auto sub = statistic_tv_bound(bn, DegreeStatistic::parse("0:2,2:1"));
  CHECK(sub.delta.rational() == sub.lambda.rational() * (rat(4, 4) + rat(1, 3)));
}

TEST_CASE("size expectation asymptotics") {
  auto v = size_expectation_asymptotic(1000, 100, 1.0);
  CHECK(v.value == doctest::Approx(0.42050).epsilon(1e-3));
  CHECK(!v.outside_regime);
  CHECK(size_expectation_asymptotic(1000, 999, 1.0).outside_regime);
  CHECK_THROWS_WITH_AS(size_expectation_asymptotic(1000, 1000, 1.0),
                       doctest::Contains("DegenerateRange"), Error);
  CHECK_THROWS_AS(size_expectation_asymptotic(1000, 0, 1.0), Error);
}

TEST_CASE("ts lambda") {
  CHECK(ts_lambda(1.0, 1.0) == doctest::Approx(0.3989422804014327));
  CHECK(ts_lambda(4.0, 1.3) == doctest::Approx(ts_lambda(1.0, 1.3) / 8.0));
  CHECK_THROWS_WITH_AS(ts_lambda(0.0, 1.0), doctest::Contains("NonpositiveInput"), Error);
  // matches the m ~ a n^{2/3} limit of the finite-n formula; the remaining
  // gap is the (1 - m/n)^{-1/2} factor, 2.4% at n = 1e4 and shrinking
  double prev_gap = 1.0;
  for (double n : {1e4, 1e5, 1e6}) {
    long long m = static_cast<long long>(std::llround(std::pow(n, 2.0 / 3.0)));
    auto fin = size_expectation_asymptotic(static_cast<long long>(n), m, 1.7);
    double a = static_cast<double>(m) / std::pow(n, 2.0 / 3.0);
    double gap = std::abs(fin.value / ts_lambda(a, 1.7) - 1.0);
    CHECK(gap < (n < 5e4 ? 0.03 : 0.02));
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("llt prediction") {
  std::vector<long long> d;
  for (int i = 0; i < 60; ++i) {
    d.push_back(0);
    d.push_back(2);
  }
  const long long m = 30;  // m * dbar = 30 integral
  auto center = llt_prediction(d, m, 30);
  CHECK(center.mu_hat == doctest::Approx(30.0));
  CHECK(center.predicted_prob ==
        doctest::Approx(1.0 / std::sqrt(2 * M_PI * center.sigma_hat2)));
  for (long long t : {1LL, 5LL, 9LL}) {
    CHECK(llt_prediction(d, m, 30 + t).predicted_prob ==
          doctest::Approx(llt_prediction(d, m, 30 - t).predicted_prob).epsilon(1e-12));
  }
  CHECK_THROWS_WITH_AS(llt_prediction(std::vector<long long>(10, 3), 5, 15),
                       doctest::Contains("DegenerateSpread"), Error);
}

TEST_CASE("llt prediction mass is close to one") {
  // sigma_hat >= 5 makes the lattice sum a good Riemann sum of the density
  std::vector<long long> d;
  samplers::RandomStream rng(12, 0);
  for (int i = 0; i < 400; ++i) d.push_back(static_cast<long long>(rng.uniform_below(5)));
  for (long long m : {60LL, 150LL}) {
    auto base = llt_prediction(d, m, 0);
    REQUIRE(std::sqrt(base.sigma_hat2) >= 5.0);
    double mass = 0;
    const double sd = std::sqrt(base.sigma_hat2);
    for (long long k = static_cast<long long>(base.mu_hat - 8 * sd);
         k <= static_cast<long long>(base.mu_hat + 8 * sd); ++k) {
      mass += llt_prediction(d, m, k).predicted_prob;
    }
    CHECK(mass > 0.99);
    CHECK(mass < 1.01);
  }
}

TEST_CASE("lindeberg diagnostic") {
  std::vector<long long> bounded{0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
  CHECK(lindeberg_diagnostic(bounded, 5, 10.0) == 0.0);
  // all deviation mass at the extremes
  std::vector<long long> extremes;
  for (int i = 0; i < 10; ++i) extremes.push_back(i % 2 == 0 ? 0 : 10);
  CHECK(lindeberg_diagnostic(extremes, 5, 0.1) == doctest::Approx(1.0));

  // heavy-outlier family: a vanishing fraction of huge values carries
  // almost all of Q
  const long long kappa = 10'000;
  std::vector<long long> heavy;
  long long spike = static_cast<long long>(std::pow(static_cast<double>(kappa), 0.75));
  long long nspike = static_cast<long long>(std::sqrt(static_cast<double>(kappa)));
  for (long long i = 0; i < kappa; ++i) {
    heavy.push_back(0);
    heavy.push_back(1);
    heavy.push_back(-1);
  }
  for (long long i = 0; i < nspike; ++i) {
    heavy.push_back(2 * spike);
    heavy.push_back(-2 * spike);
  }
  double diag = lindeberg_diagnostic(heavy, static_cast<long long>(heavy.size()) / 2, 0.01);
  CHECK(diag > 0.99);
}

TEST_CASE("regime classification") {
  // star family: |n| pi = (1 - 1/kappa)^{kappa-1}
  RegimeScenario star;
  for (long long kappa : {2LL, 10LL, 100LL}) {
    std::map<int, long long> counts;
    counts[0] = kappa - 1;
    counts[static_cast<int>(kappa - 1)] += 1;
    star.statistics.push_back(DegreeStatistic::validate(counts));
    treecore::DegreeSequence dfs{static_cast<int>(kappa - 1)};
    dfs.insert(dfs.end(), static_cast<std::size_t>(kappa - 1), 0);
    star.target_trees.push_back(PlaneTree::from_degree_sequence(dfs));
  }
  auto pred = classify_regime(star);
  bool found_half = false;
  for (const auto& [name, value] : pred.diagnostics) {
    if (name.find("n_pi") != std::string::npos && std::abs(value - 0.5) < 1e-12) {
      found_half = true;  // kappa = 2: 2 * (1/2) * (1/2)
    }
  }
  CHECK(found_half);
  CHECK(pred.lambda.has_value());

  // fixed leaf target over growing hosts: diverging mean
  RegimeScenario normal;
  for (long long s : {11LL, 101LL, 1001LL}) {
    normal.statistics.push_back(
        DegreeStatistic::validate(std::map<int, long long>{{0, (s + 1) / 2}, {2, s / 2}}));
  }
  normal.target_trees.push_back(PlaneTree::parse("0"));
  auto pred2 = classify_regime(normal);
  CHECK(pred2.regime == Regime::normal_diverging);
  CHECK(pred2.mu_sigma.has_value());

  CHECK_THROWS_WITH_AS(classify_regime(RegimeScenario{}),
                       doctest::Contains("UnderspecifiedScenario"), Error);
}

TEST_CASE("kolmogorov and chi-square reference values") {
  CHECK(kolmogorov_q(1.3581) == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(kolmogorov_q(1.6276) == doctest::Approx(0.01).epsilon(2e-2));
  CHECK(chi2_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(chi2_sf(23.209251158954356, 10) == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("ks statistic from integer histograms") {
  samplers::RandomStream rng(4, 4);
  std::map<long long, long long> hist;
  const int reps = 5'000;
  for (int i = 0; i < reps; ++i) {
    // binomial(10^4, 1/2) is close to N(5000, 50^2) and finely latticed
    long long s = 0;
    for (int b = 0; b < 10'000; ++b) s += rng.uniform_below(2);
    ++hist[s];
  }
  double d_good = ks_statistic_normal(hist, 5000.0, 50.0);
  CHECK(std::sqrt(static_cast<double>(reps)) * d_good < 1.9);
  double d_bad = ks_statistic_normal(hist, 5035.0, 50.0);
  CHECK(d_bad > 0.2);
}
