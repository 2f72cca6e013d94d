#pragma once

// Shared generators and small independent oracles used across the suites.

#include <map>
#include <vector>

#include "fringetrees/oracle.hpp"
#include "fringetrees/samplers.hpp"
#include "fringetrees/treecore.hpp"

namespace ftt {

using namespace fringetrees;
using treecore::DegreeSequence;
using treecore::DegreeStatistic;
using treecore::PlaneTree;

// All degree statistics of a given size: partitions of size-1 padded with
// leaves.
inline void partitions_rec(long long remaining, long long max_part, std::vector<long long>& cur,
                           std::vector<std::vector<long long>>& out) {
  if (remaining == 0) {
    out.push_back(cur);
    return;
  }
  for (long long part = std::min(remaining, max_part); part >= 1; --part) {
    cur.push_back(part);
    partitions_rec(remaining - part, part, cur, out);
    cur.pop_back();
  }
}

inline std::vector<DegreeStatistic> all_statistics(long long size) {
  std::vector<DegreeStatistic> stats;
  std::vector<std::vector<long long>> parts;
  std::vector<long long> cur;
  partitions_rec(size - 1, std::max<long long>(size - 1, 1), cur, parts);
  for (const auto& part : parts) {
    std::map<int, long long> counts;
    long long heavy = static_cast<long long>(part.size());
    if (size - heavy < 1) continue;  // at least one leaf is forced
    counts[0] = size - heavy;
    for (long long d : part) ++counts[static_cast<int>(d)];
    stats.push_back(DegreeStatistic::validate(counts));
  }
  return stats;
}

inline std::vector<PlaneTree> all_trees(long long size, long long limit = 1'000'000) {
  std::vector<PlaneTree> trees;
  for (const DegreeStatistic& bn : all_statistics(size)) {
    auto res = oracle::enumerate_trees(bn, limit);
    trees.insert(trees.end(), res.trees.begin(), res.trees.end());
  }
  return trees;
}

// Random statistic: a handful of internal degrees plus the leaves the tree
// identity forces.
inline DegreeStatistic random_statistic(samplers::RandomStream& rng, int max_internal = 8,
                                        int max_degree = 5) {
  long long internal = static_cast<long long>(rng.uniform_below(max_internal + 1));
  std::map<int, long long> counts;
  long long weighted = 0;
  for (long long i = 0; i < internal; ++i) {
    int d = 1 + static_cast<int>(rng.uniform_below(max_degree));
    ++counts[d];
    weighted += d;
  }
  counts[0] = 1 + weighted - internal;
  return DegreeStatistic::validate(counts);
}

inline BigInt catalan(long long n) {
  BigInt c;
  mpz_bin_uiui(c.get_mpz_t(), static_cast<unsigned long>(2 * n), static_cast<unsigned long>(n));
  return c / big(n + 1);
}

}  // namespace ftt
