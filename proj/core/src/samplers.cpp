#include "fringetrees/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace fringetrees::samplers {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_(master_seed), stream_(stream_index) {
  std::uint64_t x = master_seed ^ (0x632BE59BD9B4E019ULL * (stream_index + 1));
  for (auto& w : s_) w = splitmix64(x);
  if (!(s_[0] | s_[1] | s_[2] | s_[3])) s_[0] = 1;
}

std::uint64_t RandomStream::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  ++pos_;
  return result;
}

double RandomStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::uniform_below(std::uint64_t n) {
  // Lemire's unbiased multiply-shift rejection.
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    std::uint64_t threshold = (-n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next_u64()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

void shuffle(std::vector<int>& values, RandomStream& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(values[i - 1], values[j]);
  }
}

DegreeSequence degree_layout(const DegreeStatistic& bn) {
  DegreeSequence d;
  d.reserve(static_cast<std::size_t>(bn.size()));
  for (const auto& [deg, mult] : bn.entries()) {
    d.insert(d.end(), static_cast<std::size_t>(mult), deg);
  }
  return d;
}

DegreeSequence sample_uniform_bridge(const DegreeStatistic& bn, RandomStream& rng) {
  DegreeSequence d = degree_layout(bn);
  shuffle(d, rng);
  return d;
}

PlaneTree sample_uniform_tree(const DegreeStatistic& bn, RandomStream& rng) {
  return PlaneTree::from_degree_sequence(treecore::cycle_rotate(sample_uniform_bridge(bn, rng)));
}

long long sample_swor_sum(const std::vector<long long>& d, long long m, RandomStream& rng) {
  const long long n = static_cast<long long>(d.size());
  if (m < 0 || m > n) raise(errc::count_out_of_range, "draw count outside [0, n]");
  std::vector<long long> pool = d;
  long long sum = 0;
  for (long long i = 0; i < m; ++i) {
    long long j = i + static_cast<long long>(rng.uniform_below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    sum += pool[static_cast<std::size_t>(i)];
  }
  return sum;
}

// --- conditioned Galton-Watson ---------------------------------------------

ConditionedGwSampler::ConditionedGwSampler(DegreeDistribution p, long long n)
    : p_(std::move(p)), n_(n) {
  if (n_ < 1) raise(errc::size_out_of_range, "tree size must be >= 1");
  if (p_.prob(0) <= 0) {
    raise(errc::incompatible_size, "offspring law needs p_0 > 0 for finite trees");
  }
  auto span = p_.span();
  if (span) {
    if ((n_ - 1) % *span != 0) {
      raise(errc::incompatible_size,
            "no tree of size " + std::to_string(n_) + " (span " + std::to_string(*span) + ")");
    }
  } else if (n_ != 1) {
    // point mass at 0: only the single-node tree exists
    raise(errc::incompatible_size, "offspring law concentrated at 0 only allows n = 1");
  }
  for (int v : p_.support()) {
    values_.push_back(v);
    probs_.push_back(p_.prob(v));
  }
  use_multinomial_ = values_.size() <= 64;
  if (!use_multinomial_) {
    // Walker alias table for the direct i.i.d. path.
    const std::size_t k = values_.size();
    alias_prob_.assign(k, 0.0);
    alias_idx_.assign(k, 0);
    std::vector<double> scaled(k);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < k; ++i) {
      scaled[i] = probs_[i] * static_cast<double>(k);
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      std::uint32_t s = small.back();
      small.pop_back();
      std::uint32_t l = large.back();
      alias_prob_[s] = scaled[s];
      alias_idx_[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::uint32_t i : large) alias_prob_[i] = 1.0;
    for (std::uint32_t i : small) alias_prob_[i] = 1.0;
  }
}

bool ConditionedGwSampler::attempt_counts(std::vector<long long>& counts,
                                          RandomStream& rng) const {
  // Multinomial counts of an n-sample drawn as a binomial chain; identical in
  // law to drawing the n i.i.d. degrees and tallying them.
  counts.assign(values_.size(), 0);
  long long remaining = n_;
  double rest = 1.0;
  long long sum = 0;
  for (std::size_t i = 0; i + 1 < values_.size() && remaining > 0; ++i) {
    double q = probs_[i] / rest;
    if (q > 1.0) q = 1.0;
    std::binomial_distribution<long long> bin(remaining, q);
    long long c = bin(rng);
    counts[i] = c;
    remaining -= c;
    rest -= probs_[i];
    sum += static_cast<long long>(values_[i]) * c;
    if (sum > n_ - 1) return false;  // already too heavy; finish cheaply
  }
  counts.back() += remaining;
  sum += static_cast<long long>(values_.back()) * remaining;
  return sum == n_ - 1;
}

bool ConditionedGwSampler::attempt_direct(DegreeSequence& out, RandomStream& rng) const {
  out.clear();
  long long sum = 0;
  const std::size_t k = values_.size();
  for (long long i = 0; i < n_; ++i) {
    std::size_t slot = static_cast<std::size_t>(rng.uniform_below(k));
    if (rng.next_double() >= alias_prob_[slot]) slot = alias_idx_[slot];
    int v = values_[slot];
    sum += v;
    if (sum > n_ - 1) return false;
    out.push_back(v);
  }
  return sum == n_ - 1;
}

void ConditionedGwSampler::sample_bridge(DegreeSequence& out, RandomStream& rng,
                                         long long max_attempts) const {
  std::vector<long long> counts;
  for (long long attempt = 1; attempt <= max_attempts; ++attempt) {
    bool ok;
    if (use_multinomial_) {
      ok = attempt_counts(counts, rng);
      if (ok) {
        out.clear();
        for (std::size_t i = 0; i < values_.size(); ++i) {
          out.insert(out.end(), static_cast<std::size_t>(counts[i]), values_[i]);
        }
        shuffle(out, rng);
      }
    } else {
      ok = attempt_direct(out, rng);
      // the i.i.d. draw is already exchangeable; no shuffle needed
    }
    if (ok) {
      last_attempts_ = attempt;
      return;
    }
  }
  raise(errc::attempts_exhausted,
        "no accepted sample in " + std::to_string(max_attempts) + " attempts");
}

PlaneTree ConditionedGwSampler::sample(RandomStream& rng, long long max_attempts) const {
  DegreeSequence bridge;
  sample_bridge(bridge, rng, max_attempts);
  return PlaneTree::from_degree_sequence(treecore::cycle_rotate(bridge));
}

PlaneTree sample_conditioned_gw(const DegreeDistribution& p, long long n, RandomStream& rng,
                                long long max_attempts) {
  return ConditionedGwSampler(p, n).sample(rng, max_attempts);
}

// --- exchangeable pair -------------------------------------------------------

PlaneTree exchangeable_pair_step(const PlaneTree& host, const DegreeStatistic& target,
                                 RandomStream& rng) {
  const auto& dfs = host.degrees();
  const std::size_t v = static_cast<std::size_t>(rng.uniform_below(dfs.size()));
  std::vector<long long> sizes = treecore::fringe_sizes(dfs);
  if (sizes[v] != target.size()) return host;

  std::map<int, long long> tally;
  for (std::size_t j = v; j < v + static_cast<std::size_t>(sizes[v]); ++j) ++tally[dfs[j]];
  for (const auto& [deg, mult] : target.entries()) {
    auto it = tally.find(deg);
    if (it == tally.end() || it->second != mult) return host;
  }
  if (tally.size() != target.entries().size()) return host;

  PlaneTree replacement = sample_uniform_tree(target, rng);
  DegreeSequence out;
  out.reserve(dfs.size());
  out.insert(out.end(), dfs.begin(), dfs.begin() + static_cast<std::ptrdiff_t>(v));
  out.insert(out.end(), replacement.degrees().begin(), replacement.degrees().end());
  out.insert(out.end(), dfs.begin() + static_cast<std::ptrdiff_t>(v + sizes[v]), dfs.end());
  return PlaneTree::from_degree_sequence(std::move(out));
}

// --- Stein coupling ----------------------------------------------------------

CoupledPair stein_coupled_pair(const DegreeStatistic& bn, const PlaneTree& t, long long k,
                               RandomStream& rng) {
  const long long n = bn.size();
  const long long m = t.size();
  for (const auto& [deg, mult] : t.statistic().entries()) {
    if (bn.count(deg) < mult) {
      raise(errc::infeasible_target, "target needs more degree-" + std::to_string(deg) +
                                         " vertices than the statistic has");
    }
  }
  if (k < 0 || k >= n) raise(errc::size_out_of_range, "anchor must lie in [0, |bn|)");

  CoupledPair pair;
  pair.anchor = k;
  pair.base = sample_uniform_bridge(bn, rng);

  // Step 1: for each degree value, mark n_T(i) of its occurrences uniformly.
  std::vector<char> marked(static_cast<std::size_t>(n), 0);
  {
    std::vector<std::vector<long long>> positions_by_value;
    std::vector<long long> want;
    std::map<int, std::size_t> slot;
    for (const auto& [deg, mult] : t.statistic().entries()) {
      slot[deg] = positions_by_value.size();
      positions_by_value.emplace_back();
      want.push_back(mult);
    }
    for (long long pos = 0; pos < n; ++pos) {
      auto it = slot.find(pair.base[static_cast<std::size_t>(pos)]);
      if (it != slot.end()) positions_by_value[it->second].push_back(pos);
    }
    for (std::size_t s = 0; s < positions_by_value.size(); ++s) {
      auto& list = positions_by_value[s];
      for (long long j = 0; j < want[s]; ++j) {
        std::size_t pick = static_cast<std::size_t>(j) +
                           static_cast<std::size_t>(rng.uniform_below(list.size() - j));
        std::swap(list[static_cast<std::size_t>(j)], list[pick]);
        marked[static_cast<std::size_t>(list[static_cast<std::size_t>(j)])] = 1;
        pair.marked_positions.push_back(list[static_cast<std::size_t>(j)]);
      }
    }
    std::sort(pair.marked_positions.begin(), pair.marked_positions.end());
  }

  // Step 2: the window I_k goes to the storage room.
  std::vector<char> in_window(static_cast<std::size_t>(n), 0);
  for (long long j = 0; j < m; ++j) {
    in_window[static_cast<std::size_t>((k + j) % n)] = 1;
  }

  pair.coupled = pair.base;

  // Step 3: all marked degrees move into the window, spelling d_T. When two
  // marked degrees share a value, which copy lands in which slot does not
  // change the sequence; original index order is as good as any.
  const DegreeSequence& pattern = t.degrees();
  for (long long j = 0; j < m; ++j) {
    pair.coupled[static_cast<std::size_t>((k + j) % n)] = pattern[static_cast<std::size_t>(j)];
  }

  // Step 4: unmarked storage degrees fill the holes left by step 3 in
  // uniformly random order.
  std::vector<int> storage_unmarked;
  for (long long j = 0; j < m; ++j) {
    std::size_t pos = static_cast<std::size_t>((k + j) % n);
    if (!marked[pos]) storage_unmarked.push_back(pair.base[pos]);
  }
  shuffle(storage_unmarked, rng);
  std::size_t next = 0;
  for (long long pos = 0; pos < n; ++pos) {
    auto p = static_cast<std::size_t>(pos);
    if (marked[p] && !in_window[p]) {
      pair.coupled[p] = storage_unmarked[next++];
    }
  }
  if (next != storage_unmarked.size()) {
    raise(errc::infeasible_target, "coupling bookkeeping mismatch");
  }
  return pair;
}

}  // namespace fringetrees::samplers
