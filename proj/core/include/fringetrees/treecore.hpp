#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fringetrees/exact.hpp"

namespace fringetrees::treecore {

// Ordered list of out-degrees. Indices are cyclic by convention: position
// ell means ell mod n wherever a window runs off the end.
using DegreeSequence = std::vector<int>;

// Multiset of out-degrees satisfying the tree identity
//   sum_i n(i) = 1 + sum_i i*n(i).
// Only nonzero multiplicities are stored, sorted by degree, which makes
// equality and hashing canonical.
class DegreeStatistic {
public:
  using Entry = std::pair<int, long long>;  // degree -> multiplicity (> 0)

  static DegreeStatistic validate(const std::vector<Entry>& counts);
  static DegreeStatistic validate(const std::map<int, long long>& counts);
  static DegreeStatistic of_sequence(const DegreeSequence& d);

  long long size() const { return size_; }        // |n|
  long long count(int degree) const;               // n(i), zero when absent
  const std::vector<Entry>& entries() const { return entries_; }
  int max_degree() const { return entries_.empty() ? 0 : entries_.back().first; }

  // Canonical text form "deg:count,deg:count" with degrees ascending.
  std::string to_string() const;
  static DegreeStatistic parse(std::string_view text);

  bool operator==(const DegreeStatistic&) const = default;
  bool operator<(const DegreeStatistic& o) const { return entries_ < o.entries_; }

private:
  std::vector<Entry> entries_;
  long long size_ = 0;
};

// Probability distribution on nonnegative integers; optionally carries an
// exact rational pmf alongside the double one.
class DegreeDistribution {
public:
  static DegreeDistribution from_rational(std::vector<std::pair<int, Rational>> pmf);
  static DegreeDistribution from_real(std::vector<std::pair<int, double>> pmf,
                                      double tolerance = 1e-9);

  const std::vector<int>& support() const { return support_; }
  double prob(int i) const;
  bool exact() const { return !exact_.empty(); }
  Rational exact_prob(int i) const;  // zero when absent

  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double second_moment() const { return second_moment_; }
  const std::optional<Rational>& exact_mean() const { return exact_mean_; }
  const std::optional<Rational>& exact_variance() const { return exact_variance_; }

  // gcd of pairwise support differences; nullopt encodes an infinite span
  // (single-point support).
  std::optional<long long> span() const;

private:
  std::vector<int> support_;
  std::vector<double> probs_;
  std::vector<Rational> exact_;
  double mean_ = 0, variance_ = 0, second_moment_ = 0;
  std::optional<Rational> exact_mean_, exact_variance_;
  void finalize();
};

// Rooted plane tree in canonical form: its depth-first degree sequence,
// an element of D_n. Tree equality is sequence equality.
class PlaneTree {
public:
  static PlaneTree from_degree_sequence(DegreeSequence d);

  const DegreeSequence& degrees() const { return dfs_; }
  long long size() const { return static_cast<long long>(dfs_.size()); }
  const DegreeStatistic& statistic() const { return stat_; }

  std::vector<int> parents() const;  // parent index per DFS position, -1 at root

  std::string to_string() const;  // comma-separated DFS degrees
  static PlaneTree parse(std::string_view text);

  bool operator==(const PlaneTree& o) const { return dfs_ == o.dfs_; }
  bool operator<(const PlaneTree& o) const { return dfs_ < o.dfs_; }

private:
  DegreeSequence dfs_;
  DegreeStatistic stat_;
};

// --- operations ---------------------------------------------------------

DegreeStatistic validate_degree_statistic(const std::vector<DegreeStatistic::Entry>& counts);
DegreeDistribution empirical_distribution(const DegreeStatistic& bn);

// |T_bn| = (1/|n|) |n|! / prod n(i)!.
BigInt count_trees(const DegreeStatistic& bn);

bool is_bridge(const DegreeSequence& d);               // sum d_i = n-1
bool is_valid_degree_sequence(const DegreeSequence& d);  // membership in D_n

// Offset of the unique cyclic shift of a bridge lying in D_n: one past the
// first minimum of the partial sums of (d_i - 1).
std::size_t cycle_rotation_offset(const DegreeSequence& d);
DegreeSequence cycle_rotate(const DegreeSequence& d);

PlaneTree tree_from_degree_sequence(DegreeSequence d);
DegreeSequence degree_sequence_of_tree(const PlaneTree& t);

// N_target(host): occurrences of the target's DFS sequence as a non-wrapping
// window of the host's DFS sequence.
long long fringe_count_tree(const PlaneTree& host, const PlaneTree& target);
long long fringe_count_statistic(const PlaneTree& host, const DegreeStatistic& bm);
long long fringe_count_size(const PlaneTree& host, long long m);

struct FringeEntry {
  long long vertex;  // DFS index
  long long size;
  DegreeStatistic statistic;
};
// One entry per vertex in DFS order. Materializes per-vertex statistics, so
// it is meant for small hosts; the counters above stay O(n).
std::vector<FringeEntry> fringe_decomposition(const PlaneTree& host);

// Size of the fringe subtree at every DFS position, O(n), for dfs in D_n.
std::vector<long long> fringe_sizes(const DegreeSequence& dfs);

std::optional<long long> span_of(const DegreeDistribution& dist);

// Shared text helpers for the canonical encodings.
std::string format_degree_sequence(const DegreeSequence& d);
DegreeSequence parse_degree_sequence(std::string_view text);

}  // namespace fringetrees::treecore
