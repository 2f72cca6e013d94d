#pragma once

#include <cstdint>
#include <vector>

#include "fringetrees/treecore.hpp"

namespace fringetrees::samplers {

using treecore::DegreeDistribution;
using treecore::DegreeSequence;
using treecore::DegreeStatistic;
using treecore::PlaneTree;

// Seedable stream family: distinct (master_seed, stream_index) pairs give
// independent streams, identical pairs replay identical sequences. Replicate
// r of an experiment always runs on stream r, so aggregation is independent
// of worker scheduling.
class RandomStream {
public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_; }
  std::uint64_t stream_index() const { return stream_; }
  std::uint64_t position() const { return pos_; }

  std::uint64_t next_u64();
  double next_double();                        // uniform in [0,1)
  std::uint64_t uniform_below(std::uint64_t n);  // unbiased uniform in [0,n)

  // UniformRandomBitGenerator interface
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~static_cast<result_type>(0); }
  result_type operator()() { return next_u64(); }

private:
  std::uint64_t s_[4];
  std::uint64_t master_, stream_;
  std::uint64_t pos_ = 0;
};

// In-place Fisher-Yates; uniform over permutations of the current contents.
void shuffle(std::vector<int>& values, RandomStream& rng);

// Degree multiset of bn laid out in one vector (ascending degree blocks).
DegreeSequence degree_layout(const DegreeStatistic& bn);

// Uniform element of B_bn.
DegreeSequence sample_uniform_bridge(const DegreeStatistic& bn, RandomStream& rng);

// Exact uniform sample from T_bn: shuffled layout, cycle rotation, decode.
PlaneTree sample_uniform_tree(const DegreeStatistic& bn, RandomStream& rng);

// S_m: sum of m values drawn without replacement from d.
long long sample_swor_sum(const std::vector<long long>& d, long long m, RandomStream& rng);

// Size-conditioned Galton-Watson sampler: rejection on the i.i.d. degree sum
// (drawn in collapsed multinomial form for small supports), then cycle
// rotation. Exact law of T_{p,n}.
class ConditionedGwSampler {
public:
  ConditionedGwSampler(DegreeDistribution p, long long n);

  // Appends nothing; fills `out` with a uniform-given-statistic bridge whose
  // decoded tree is distributed as T_{p,n}.
  void sample_bridge(DegreeSequence& out, RandomStream& rng, long long max_attempts) const;
  PlaneTree sample(RandomStream& rng, long long max_attempts) const;
  long long size() const { return n_; }
  long long last_attempts() const { return last_attempts_; }

private:
  DegreeDistribution p_;
  long long n_;
  std::vector<int> values_;
  std::vector<double> probs_;
  // alias table for large supports
  std::vector<double> alias_prob_;
  std::vector<std::uint32_t> alias_idx_;
  bool use_multinomial_ = true;
  mutable long long last_attempts_ = 0;

  bool attempt_counts(std::vector<long long>& counts, RandomStream& rng) const;
  bool attempt_direct(DegreeSequence& out, RandomStream& rng) const;
};

PlaneTree sample_conditioned_gw(const DegreeDistribution& p, long long n, RandomStream& rng,
                                long long max_attempts);

// One step of the fringe-resampling exchangeable pair: pick a uniform vertex;
// if its fringe has the target statistic, replace that fringe by a fresh
// uniform element of the class.
PlaneTree exchangeable_pair_step(const PlaneTree& host, const DegreeStatistic& target,
                                 RandomStream& rng);

// Stein coupling output: `coupled` is distributed as `base` conditioned on
// the length-|T| window at `anchor` spelling the target's DFS sequence.
struct CoupledPair {
  DegreeSequence base;
  DegreeSequence coupled;
  long long anchor = 0;                       // window start, 0-based, cyclic
  std::vector<long long> marked_positions;    // positions marked in step 1
};

CoupledPair stein_coupled_pair(const DegreeStatistic& bn, const PlaneTree& t, long long k,
                               RandomStream& rng);

}  // namespace fringetrees::samplers
