#pragma once

#include <map>
#include <variant>
#include <vector>

#include "fringetrees/exact.hpp"
#include "fringetrees/treecore.hpp"

namespace fringetrees::oracle {

using treecore::DegreeDistribution;
using treecore::DegreeStatistic;
using treecore::PlaneTree;

struct EnumerationResult {
  std::vector<PlaneTree> trees;  // lexicographic in DFS degree sequences
  DegreeStatistic statistic;
  BigInt cardinality;
};

// All of T_bn by backtracking over permutations of the degree multiset with
// the D_n prefix constraint as pruning. LimitExceeded when |T_bn| > limit.
EnumerationResult enumerate_trees(const DegreeStatistic& bn, long long limit);

// Counter selector: a concrete tree, a degree statistic, or a size.
using CountTarget = std::variant<PlaneTree, DegreeStatistic, long long>;

// Exact pmf of the selected fringe count over uniform T_bn, by full
// enumeration; probabilities have denominator |T_bn|.
std::map<long long, Rational> exact_count_distribution(const DegreeStatistic& bn,
                                                       const CountTarget& target,
                                                       long long limit);

enum class ArithmeticMode { automatic, rational, logspace };

struct Budget {
  long long max_nodes = 300'000'000;  // profile-recursion node visits
};

// Law of S_m, the sum of m values drawn without replacement from a fixed
// integer multiset. Exact rationals in rational mode, log-space doubles
// otherwise.
struct SworPmf {
  std::vector<std::pair<long long, ExactScalar>> pmf;  // ascending by sum
  bool exact = false;
  ExactScalar prob_at(long long k) const;
};

SworPmf swor_sum_pmf(const std::vector<long long>& d, long long m,
                     ArithmeticMode mode = ArithmeticMode::automatic, const Budget& budget = {});
SworPmf swor_sum_pmf(const std::vector<std::pair<long long, long long>>& value_counts, long long m,
                     ArithmeticMode mode = ArithmeticMode::automatic, const Budget& budget = {});

// Restriction of the pmf to sums in [k_min, k_max]; same law, cheaper.
SworPmf swor_sum_pmf_window(const std::vector<std::pair<long long, long long>>& value_counts,
                            long long m, long long k_min, long long k_max,
                            ArithmeticMode mode = ArithmeticMode::automatic,
                            const Budget& budget = {});

// Single-point query P(S_m = k).
ExactScalar swor_sum_prob(const std::vector<std::pair<long long, long long>>& value_counts,
                          long long m, long long k,
                          ArithmeticMode mode = ArithmeticMode::automatic,
                          const Budget& budget = {});

// P(each of r disjoint length-m blocks of a uniform permutation of the
// degree multiset sums to m-1), by sequential conditioning on the value
// profile of each block. Exact rational.
ExactScalar joint_block_probability(const DegreeStatistic& bn, long long m, long long r,
                                    const Budget& budget = {});

// ln P(X_1 + ... + X_n = target) for i.i.d. X ~ p with finite support.
double iid_sum_log_prob(const DegreeDistribution& p, long long n, long long target,
                        const Budget& budget = {});

// Degree multiset of a statistic as (value, count) pairs.
std::vector<std::pair<long long, long long>> degree_multiset(const DegreeStatistic& bn);

}  // namespace fringetrees::oracle
