#include <doctest.h>

#include "fringetrees/exactstats.hpp"
#include "test_support.hpp"

using namespace fringetrees;
using namespace fringetrees::exactstats;
using treecore::DegreeDistribution;
using treecore::DegreeSequence;
using treecore::DegreeStatistic;
using treecore::PlaneTree;

namespace {

PlaneTree cherry() { return PlaneTree::parse("2,0,0"); }
PlaneTree leaf() { return PlaneTree::parse("0"); }

Rational pmf_mean(const std::map<long long, Rational>& pmf) {
  Rational mean(0);
  for (const auto& [k, p] : pmf) mean += rat(k) * p;
  return mean;
}

Rational pmf_falling_moment(const std::map<long long, Rational>& pmf, long long q) {
  Rational acc(0);
  for (const auto& [k, p] : pmf) acc += Rational(falling_factorial(k, q)) * p;
  return acc;
}

}  // namespace

TEST_CASE("pi_p on trees and statistics") {
  DegreeDistribution point = DegreeDistribution::from_rational({{0, Rational(1)}});
  CHECK(pi_p_tree(point, leaf()).rational() == 1);

  DegreeDistribution half =
      DegreeDistribution::from_rational({{0, Rational(1, 2)}, {2, Rational(1, 2)}});
  CHECK(pi_p_tree(half, cherry()).rational() == rat(1, 8));
  CHECK(pi_p_tree(half, PlaneTree::parse("1,0")).rational() == 0);  // p_1 = 0

  // t = leaf gives exactly p_0
  DegreeDistribution p = treecore::empirical_distribution(DegreeStatistic::parse("0:3,1:1,3:1"));
  CHECK(pi_p_tree(p, leaf()).rational() == rat(3, 5));

  auto ps = pi_p_statistic(half, DegreeStatistic::parse("0:1"));
  CHECK(ps.per_tree.rational() == rat(1, 2));
  CHECK(ps.class_total.rational() == rat(1, 2));

  auto ps2 = pi_p_statistic(half, DegreeStatistic::parse("0:2,2:1"));
  CHECK(ps2.per_tree.rational() == rat(1, 8));
  CHECK(ps2.class_total.rational() == rat(1, 8));  // |T_bm| = 1

  auto ps4 = pi_p_statistic(p, DegreeStatistic::parse("0:3,1:1,3:1"));
  CHECK(ps4.class_total.rational() == rat(4) * ps4.per_tree.rational());
}

TEST_CASE("expected fringe count formula") {
  DegreeStatistic bn = DegreeStatistic::parse("0:4,2:3");
  CHECK(expected_count_tree(bn, leaf()).rational() == 4);  // always n(0) leaves
  CHECK(expected_count_tree(bn, PlaneTree::parse("1,0")).rational() == 0);
  CHECK(expected_count_tree(DegreeStatistic::parse("0:2,2:1"), cherry()).rational() == 1);
  CHECK_THROWS_WITH_AS(expected_count_tree(DegreeStatistic::parse("0:1"), cherry()),
                       doctest::Contains("TargetTooLarge"), Error);
}

TEST_CASE("expectation upper bound dominates") {
  DegreeStatistic small = DegreeStatistic::parse("0:2,2:1");
  CHECK(expected_count_tree_upper(small, leaf()).rational() == 2);  // tight at |T| = 1
  CHECK(expected_count_tree_upper(small, cherry()).rational() == 2);
  CHECK(expected_count_tree_upper(small, PlaneTree::parse("1,0")).rational() == 0);

  for (long long s = 2; s <= 7; ++s) {
    for (const DegreeStatistic& bn : ftt::all_statistics(s)) {
      for (long long ts = 1; ts <= s; ++ts) {
        for (const PlaneTree& t : ftt::all_trees(ts)) {
          CHECK(expected_count_tree(bn, t).rational() <=
                expected_count_tree_upper(bn, t).rational());
        }
      }
    }
  }
}

TEST_CASE("factorial moments of tree counts") {
  DegreeStatistic bn = DegreeStatistic::parse("0:4,2:3");
  CHECK(factorial_moment_tree(bn, cherry(), 1).value.rational() ==
        expected_count_tree(bn, cherry()).rational());
  // q n_T(i) > n(i) kills the product
  CHECK(factorial_moment_tree(bn, cherry(), 4).value.rational() == 0);
  CHECK(factorial_moment_tree(bn, cherry(), 2).value.rational() == rat(2, 5));
  CHECK_THROWS_WITH_AS(factorial_moment_tree(bn, cherry(), 0),
                       doctest::Contains("InvalidOrder"), Error);

  // the 0/0 convention: |bn| < q|T| - q + 1 gives exact zero
  CHECK(factorial_moment_tree(DegreeStatistic::parse("0:2,2:1"), cherry(), 2).value.rational() ==
        0);
}

TEST_CASE("factorial moments of statistic counts") {
  DegreeStatistic bn = DegreeStatistic::parse("0:4,1:2,2:3");  // size 9
  DegreeStatistic bm = DegreeStatistic::parse("0:2,1:1,2:1");
  CHECK(treecore::count_trees(bm) == 3);
  CHECK(factorial_moment_statistic(bn, bm, 1).value.rational() ==
        rat(3) * factorial_moment_tree(bn, canonical_tree(bm), 1).value.rational());

  DegreeStatistic singleton = DegreeStatistic::parse("0:2,2:1");
  CHECK(factorial_moment_statistic(bn, singleton, 2).value.rational() ==
        factorial_moment_tree(bn, cherry(), 2).value.rational());
  CHECK(factorial_moment_statistic(bn, DegreeStatistic::parse("0:3,1:1,3:1"), 1).value.rational() ==
        0);  // no 3-degrees available
}

TEST_CASE("expected size counts via the swor oracle") {
  DegreeStatistic bn = DegreeStatistic::parse("0:4,2:3");
  CHECK(expected_count_size(bn, bn.size()).rational() == 1);  // the whole tree
  CHECK(expected_count_size(bn, 1).rational() == 4);
  CHECK(expected_count_size(DegreeStatistic::parse("0:2,2:1"), 2).rational() == 0);
  CHECK_THROWS_WITH_AS(expected_count_size(bn, 8), doctest::Contains("SizeOutOfRange"), Error);
}

TEST_CASE("factorial moments of size counts") {
  DegreeStatistic bn = DegreeStatistic::parse("0:4,1:2,2:3");
  CHECK(factorial_moment_size(bn, 3, 1).value.rational() ==
        expected_count_size(bn, 3).rational());
  CHECK(factorial_moment_size(bn, 1, 2).value.rational() == rat(4 * 3));  // ordered leaf pairs
  CHECK_THROWS_WITH_AS(factorial_moment_size(bn, 5, 2), doctest::Contains("SizeOutOfRange"),
                       Error);
}

TEST_CASE("variance from factorial moments") {
  // deterministic count
  auto det = variance_from_factorial(ExactScalar::from_rational(rat(7)),
                                     ExactScalar::from_rational(rat(42)));
  CHECK(*det.rational == 0);
  // Poisson-like: m2 = m1^2
  auto poi = variance_from_factorial(ExactScalar::from_rational(rat(3, 2)),
                                     ExactScalar::from_rational(rat(9, 4)));
  CHECK(*poi.rational == rat(3, 2));

  DegreeStatistic bn = DegreeStatistic::parse("0:4,2:3");
  auto var = variance_from_factorial(expected_count_tree(bn, cherry()),
                                     factorial_moment_tree(bn, cherry(), 2).value);
  CHECK(*var.rational == rat(2, 5) + rat(6, 5) - rat(36, 25));
}

TEST_CASE("variance relations between statistic and tree counts") {
  // degenerate class: both relations collapse
  auto rel0 = variance_relation_statistic(DegreeStatistic::parse("0:4,2:3"), cherry());
  CHECK(rel0.class_size == 1);
  CHECK(rel0.mean_lhs.rational() == rel0.mean_rhs.rational());
  CHECK(*rel0.var_lhs.rational == *rel0.var_rhs.rational);

  // all enumerable hosts against every tree target
  for (long long s = 2; s <= 7; ++s) {
    for (const DegreeStatistic& bn : ftt::all_statistics(s)) {
      for (long long ts = 1; ts <= s; ++ts) {
        for (const PlaneTree& t : ftt::all_trees(ts)) {
          auto rel = variance_relation_statistic(bn, t);
          CHECK(rel.mean_lhs.rational() == rel.mean_rhs.rational());
          CHECK(*rel.var_lhs.rational == *rel.var_rhs.rational);
        }
      }
    }
  }
}

TEST_CASE("degree moments") {
  for (const char* text : {"0:2,2:1", "0:3,1:1,3:1", "0:4,1:2,2:3"}) {
    DegreeStatistic bn = DegreeStatistic::parse(text);
    auto mom = degree_moments(treecore::empirical_distribution(bn));
    CHECK(*mom.exact_mean == Rational(1) - rat(1, bn.size()));
  }
  auto point = degree_moments(DegreeDistribution::from_rational({{1, Rational(1)}}));
  CHECK(*point.exact_variance == 0);
  auto half = degree_moments(
      DegreeDistribution::from_rational({{0, Rational(1, 2)}, {2, Rational(1, 2)}}));
  CHECK(*half.exact_mean == 1);
  CHECK(*half.exact_variance == 1);  // sum (i-1)^2 p_i for mean-1 laws
}

TEST_CASE("canonical tree realizes the statistic") {
  for (long long s = 1; s <= 8; ++s) {
    for (const DegreeStatistic& bm : ftt::all_statistics(s)) {
      CHECK(canonical_tree(bm).statistic() == bm);
    }
  }
}

TEST_CASE("moments agree exactly with enumeration, |bn| <= 7") {
  for (long long s = 1; s <= 7; ++s) {
    for (const DegreeStatistic& bn : ftt::all_statistics(s)) {
      // trees, q <= 3
      for (long long ts = 1; ts <= s; ++ts) {
        for (const PlaneTree& t : ftt::all_trees(ts)) {
          auto pmf = oracle::exact_count_distribution(bn, oracle::CountTarget(t), 5000);
          for (long long q = 1; q <= 3; ++q) {
            CHECK(factorial_moment_tree(bn, t, q).value.rational() ==
                  pmf_falling_moment(pmf, q));
          }
        }
        // statistics, q <= 3
        for (const DegreeStatistic& bm : ftt::all_statistics(ts)) {
          auto pmf = oracle::exact_count_distribution(bn, oracle::CountTarget(bm), 5000);
          for (long long q = 1; q <= 3; ++q) {
            CHECK(factorial_moment_statistic(bn, bm, q).value.rational() ==
                  pmf_falling_moment(pmf, q));
          }
        }
        // sizes, r <= 2
        auto pmf = oracle::exact_count_distribution(bn, oracle::CountTarget(ts), 5000);
        CHECK(expected_count_size(bn, ts).rational() == pmf_mean(pmf));
        if (2 * ts <= s) {
          CHECK(factorial_moment_size(bn, ts, 2).value.rational() ==
                pmf_falling_moment(pmf, 2));
        }
      }
    }
  }
}

TEST_CASE("log mode tracks rational arithmetic") {
  // past the rational threshold the formulas run in log space; compare with
  // a test-side rational evaluation
  std::map<int, long long> counts{{0, 6001}, {1, 3999}, {2, 2000}};
  counts[0] = 1 + 2000;  // identity: n(0) = 1 + n(2)
  counts[1] = 12000 - counts[0] - 2000;
  DegreeStatistic bn = DegreeStatistic::validate(counts);
  REQUIRE(bn.size() == 12000);
  PlaneTree t = PlaneTree::parse("2,1,0,0");
  ExactScalar got = expected_count_tree(bn, t);
  CHECK(!got.exact());

  Rational want = rat(bn.size());
  want /= Rational(falling_factorial(bn.size(), t.size()));
  for (const auto& [deg, mult] : t.statistic().entries()) {
    want *= Rational(falling_factorial(bn.count(deg), mult));
  }
  CHECK(std::abs(got.log_value() - ln(want)) <= 1e-10 * std::max(1.0, std::abs(ln(want))));
}

TEST_CASE("conditioned GW moments against direct weighting") {
  DegreeDistribution p = DegreeDistribution::from_rational(
      {{0, Rational(2, 5)}, {1, Rational(1, 5)}, {2, Rational(2, 5)}});
  const long long n = 6;
  // direct: weight every tree of size n by pi_p and condition
  double normalizer = 0;
  std::map<std::string, double> weights;
  double mean = 0, second = 0;
  PlaneTree target = cherry();
  for (const PlaneTree& t : ftt::all_trees(n)) {
    double w = pi_p_tree(p, t).value();
    normalizer += w;
    long long c = treecore::fringe_count_tree(t, target);
    mean += w * static_cast<double>(c);
    second += w * static_cast<double>(c) * static_cast<double>(c - 1);
  }
  mean /= normalizer;
  second /= normalizer;
  CHECK(gw_factorial_moment(p, n, target, 1).value() == doctest::Approx(mean).epsilon(1e-10));
  CHECK(gw_factorial_moment(p, n, target, 2).value() == doctest::Approx(second).epsilon(1e-10));
}
