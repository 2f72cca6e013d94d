#include <doctest.h>
#include "fringetrees/exactstats.hpp"

#include <algorithm>
#include <numeric>

#include "test_support.hpp"

using namespace fringetrees;
using namespace fringetrees::oracle;
using treecore::DegreeSequence;
using treecore::DegreeStatistic;
using treecore::PlaneTree;

namespace {

// Exhaustive law of S_m over all distinct value-sequences of the multiset;
// distinct sequences are equally likely under a uniform permutation.
std::map<long long, Rational> swor_brute(std::vector<long long> d, long long m) {
  std::sort(d.begin(), d.end());
  std::map<long long, long long> tally;
  long long total = 0;
  do {
    long long s = std::accumulate(d.begin(), d.begin() + m, 0LL);
    ++tally[s];
    ++total;
  } while (std::next_permutation(d.begin(), d.end()));
  std::map<long long, Rational> pmf;
  for (auto& [s, c] : tally) pmf[s] = rat(c, total);
  return pmf;
}

}  // namespace

TEST_CASE("enumerate_trees worked examples") {
  auto one = enumerate_trees(DegreeStatistic::parse("0:2,2:1"), 10);
  REQUIRE(one.trees.size() == 1);
  CHECK(one.trees[0].to_string() == "2,0,0");
  CHECK(one.cardinality == 1);

  auto leaf = enumerate_trees(DegreeStatistic::parse("0:1"), 10);
  REQUIRE(leaf.trees.size() == 1);
  CHECK(leaf.trees[0].to_string() == "0");

  auto four = enumerate_trees(DegreeStatistic::parse("0:3,1:1,3:1"), 10);
  CHECK(four.trees.size() == 4);
  CHECK(four.cardinality == 4);
  // lexicographic order of the DFS sequences, all distinct, same statistic
  for (std::size_t i = 0; i < four.trees.size(); ++i) {
    CHECK(four.trees[i].statistic() == four.statistic);
    if (i > 0) CHECK(four.trees[i - 1].degrees() < four.trees[i].degrees());
  }
  CHECK_THROWS_WITH_AS(enumerate_trees(DegreeStatistic::parse("0:3,1:1,3:1"), 3),
                       doctest::Contains("LimitExceeded"), Error);
}

TEST_CASE("exact count distributions") {
  DegreeStatistic small = DegreeStatistic::parse("0:2,2:1");
  PlaneTree cherry = PlaneTree::parse("2,0,0");
  auto pm = exact_count_distribution(small, CountTarget(cherry), 100);
  REQUIRE(pm.size() == 1);
  CHECK(pm.at(1) == 1);

  DegreeStatistic bn = DegreeStatistic::parse("0:4,2:3");
  auto leaf_pm = exact_count_distribution(bn, CountTarget(PlaneTree::parse("0")), 100);
  REQUIRE(leaf_pm.size() == 1);
  CHECK(leaf_pm.at(4) == 1);  // point mass at n(0)

  auto cherry_pm = exact_count_distribution(bn, CountTarget(cherry), 100);
  Rational mean(0);
  Rational mass(0);
  for (const auto& [count, prob] : cherry_pm) {
    mean += rat(count) * prob;
    mass += prob;
  }
  CHECK(mass == 1);
  CHECK(mean == rat(6, 5));
  for (const auto& [count, prob] : cherry_pm) {
    (void)prob;
    CHECK(count >= 0);
    CHECK(count <= 3);
  }
}

TEST_CASE("swor pmf worked examples") {
  auto pm = swor_sum_pmf(std::vector<long long>{0, 0, 2}, 2);
  CHECK(pm.exact);
  CHECK(pm.prob_at(0).rational() == rat(1, 3));
  CHECK(pm.prob_at(2).rational() == rat(2, 3));
  CHECK(pm.prob_at(1).rational() == 0);

  auto zero = swor_sum_pmf(std::vector<long long>{3, 1, 4}, 0);
  REQUIRE(zero.pmf.size() == 1);
  CHECK(zero.prob_at(0).rational() == 1);

  auto all = swor_sum_pmf(std::vector<long long>{3, 1, 4}, 3);
  REQUIRE(all.pmf.size() == 1);
  CHECK(all.prob_at(8).rational() == 1);

  CHECK_THROWS_WITH_AS(swor_sum_pmf(std::vector<long long>{1, 2}, 3),
                       doctest::Contains("CountOutOfRange"), Error);
}

TEST_CASE("swor pmf agrees with exhaustive permutations") {
  samplers::RandomStream rng(23, 0);
  for (int iter = 0; iter < 40; ++iter) {
    const long long n = 2 + static_cast<long long>(rng.uniform_below(6));
    std::vector<long long> d;
    for (long long i = 0; i < n; ++i) {
      d.push_back(static_cast<long long>(rng.uniform_below(4)));
    }
    const long long m = static_cast<long long>(rng.uniform_below(n + 1));
    auto pm = swor_sum_pmf(d, m);
    auto brute = swor_brute(d, m);
    REQUIRE(pm.pmf.size() == brute.size());
    Rational mass(0);
    for (const auto& [s, prob] : pm.pmf) {
      CHECK(prob.rational() == brute.at(s));
      mass += prob.rational();
    }
    CHECK(mass == 1);  // exact unit mass
  }
}

TEST_CASE("swor log mode tracks rational mode") {
  std::vector<std::pair<long long, long long>> vc{{0, 40}, {1, 17}, {2, 12}, {5, 6}};
  auto exact = swor_sum_pmf(vc, 20, ArithmeticMode::rational);
  auto logs = swor_sum_pmf(vc, 20, ArithmeticMode::logspace);
  REQUIRE(exact.pmf.size() == logs.pmf.size());
  for (std::size_t i = 0; i < exact.pmf.size(); ++i) {
    CHECK(exact.pmf[i].first == logs.pmf[i].first);
    double le = exact.pmf[i].second.log_value();
    double ll = logs.pmf[i].second.log_value();
    CHECK(std::abs(le - ll) <= 1e-10 * std::max(1.0, std::abs(le)));
  }
}

TEST_CASE("swor window restriction") {
  std::vector<std::pair<long long, long long>> vc{{0, 5}, {2, 4}, {3, 2}};
  auto full = swor_sum_pmf(vc, 5);
  auto window = swor_sum_pmf_window(vc, 5, 4, 8);
  for (const auto& [s, p] : window.pmf) {
    CHECK(s >= 4);
    CHECK(s <= 8);
    CHECK(p.rational() == full.prob_at(s).rational());
  }
  CHECK(swor_sum_prob(vc, 5, 6).rational() == full.prob_at(6).rational());
}

TEST_CASE("joint block probability") {
  DegreeStatistic bn = DegreeStatistic::parse("0:4,1:2,2:1,3:1");  // size 8
  // r = 1 reduces to the swor pmf at m-1
  for (long long m = 1; m <= 4; ++m) {
    auto pm = swor_sum_pmf(degree_multiset(bn), m);
    CHECK(joint_block_probability(bn, m, 1).rational() == pm.prob_at(m - 1).rational());
  }
  // m = 1, r = 2: ordered pairs of leading leaves
  Rational expect = rat(4, 8) * rat(3, 7);
  CHECK(joint_block_probability(bn, 1, 2).rational() == expect);
  // no window of length 2 sums to 1 without 1-degrees
  CHECK(joint_block_probability(DegreeStatistic::parse("0:2,2:1"), 2, 1).rational() == 0);
  CHECK_THROWS_WITH_AS(joint_block_probability(bn, 3, 3), doctest::Contains("SizeOutOfRange"),
                       Error);
}

TEST_CASE("joint block probability against brute force") {
  samplers::RandomStream rng(29, 0);
  int done = 0;
  while (done < 12) {
    DegreeStatistic bn = ftt::random_statistic(rng, 4, 3);
    if (bn.size() > 7) continue;
    ++done;
    std::vector<long long> d;
    for (const auto& [deg, mult] : bn.entries()) {
      d.insert(d.end(), static_cast<std::size_t>(mult), deg);
    }
    std::sort(d.begin(), d.end());
    for (long long m = 1; 2 * m <= bn.size(); ++m) {
      // brute force over distinct permutations: both blocks must sum to m-1
      long long hits = 0, total = 0;
      std::vector<long long> perm = d;
      do {
        ++total;
        long long s1 = std::accumulate(perm.begin(), perm.begin() + m, 0LL);
        long long s2 = std::accumulate(perm.begin() + m, perm.begin() + 2 * m, 0LL);
        if (s1 == m - 1 && s2 == m - 1) ++hits;
      } while (std::next_permutation(perm.begin(), perm.end()));
      CHECK(joint_block_probability(bn, m, 2).rational() == rat(hits, total));
    }
  }
}

TEST_CASE("iid sum log prob against a dense convolution") {
  auto p = treecore::DegreeDistribution::from_real({{0, 0.5}, {1, 0.2}, {2, 0.3}});
  const long long n = 40;
  std::vector<double> dist{1.0};
  for (long long step = 0; step < n; ++step) {
    std::vector<double> next(dist.size() + 2, 0.0);
    for (std::size_t s = 0; s < dist.size(); ++s) {
      next[s] += dist[s] * 0.5;
      next[s + 1] += dist[s] * 0.2;
      next[s + 2] += dist[s] * 0.3;
    }
    dist.swap(next);
  }
  for (long long k : {0LL, 10LL, 39LL, 40LL, 80LL}) {
    double got = std::exp(iid_sum_log_prob(p, n, k));
    CHECK(got == doctest::Approx(dist[static_cast<std::size_t>(k)]).epsilon(1e-10));
  }
  // support size 4 exercises the free-index recursion
  auto p4 = treecore::DegreeDistribution::from_real({{0, 0.4}, {1, 0.3}, {2, 0.2}, {5, 0.1}});
  std::vector<double> dist4{1.0};
  for (long long step = 0; step < 12; ++step) {
    std::vector<double> next(dist4.size() + 5, 0.0);
    for (std::size_t s = 0; s < dist4.size(); ++s) {
      next[s] += dist4[s] * 0.4;
      next[s + 1] += dist4[s] * 0.3;
      next[s + 2] += dist4[s] * 0.2;
      next[s + 5] += dist4[s] * 0.1;
    }
    dist4.swap(next);
  }
  for (long long k : {0LL, 7LL, 11LL, 23LL}) {
    double got = std::exp(iid_sum_log_prob(p4, 12, k));
    CHECK(got == doctest::Approx(dist4[static_cast<std::size_t>(k)]).epsilon(1e-9));
  }
}

TEST_CASE("master cross-check: enumeration pmf mean equals the formulas") {
  // The repository's anchor identity at small scale; the acceptance suite
  // runs the full |bn| <= 9 version.
  for (long long s = 2; s <= 6; ++s) {
    for (const DegreeStatistic& bn : ftt::all_statistics(s)) {
      for (long long m = 1; m <= s; ++m) {
        auto pm = exact_count_distribution(bn, CountTarget(m), 5000);
        Rational mean(0);
        for (const auto& [count, prob] : pm) mean += rat(count) * prob;
        CHECK(exactstats::expected_count_size(bn, m).rational() == mean);
      }
    }
  }
}
