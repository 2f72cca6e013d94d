#pragma once

#include <string>

#include "fringetrees/exact.hpp"
#include "fringetrees/oracle.hpp"
#include "fringetrees/treecore.hpp"

namespace fringetrees::exactstats {

using treecore::DegreeDistribution;
using treecore::DegreeStatistic;
using treecore::PlaneTree;

// Arithmetic policy: exact rationals while they stay affordable, log-space
// floats beyond. Falling-factorial products overflow doubles early and
// rationals blow up late; the thresholds sit between.
bool use_rational(long long n, long long qm);

struct MomentReport {
  long long order = 1;               // q
  ExactScalar value;
  std::string statistic;             // echo of bn
  std::string target;                // echo of the target descriptor
  std::string formula;               // which formula produced the value
  std::string to_json() const;
};

// pi_p(T) = prod_i p_i^{n_T(i)}; zero iff a needed p_i vanishes.
ExactScalar pi_p_tree(const DegreeDistribution& p, const PlaneTree& t);

struct PiStatistic {
  ExactScalar per_tree;     // prod p_i^{m(i)}
  ExactScalar class_total;  // |T_bm| * per_tree
};
PiStatistic pi_p_statistic(const DegreeDistribution& p, const DegreeStatistic& bm);

// E N_T(T_bn) = |n| / (|n|)_{|T|} * prod_i (n(i))_{n_T(i)}.
ExactScalar expected_count_tree(const DegreeStatistic& bn, const PlaneTree& t);

// Upper bound |n|^{|T|+1} / (|n|)_{|T|} * pi_{p(n)}(T); always >= the exact value.
ExactScalar expected_count_tree_upper(const DegreeStatistic& bn, const PlaneTree& t);

// E (N_T)_q = |n| / (|n|)_{q|T|-q+1} * prod_i (n(i))_{q n_T(i)},
// with 0/0 read as 0 when |n| < q|T|-q+1.
MomentReport factorial_moment_tree(const DegreeStatistic& bn, const PlaneTree& t, long long q);

// E (N_bm)_q = |T_bm|^q * (tree-level moment for any tree with statistic bm).
MomentReport factorial_moment_statistic(const DegreeStatistic& bn, const DegreeStatistic& bm,
                                        long long q);

// E N_m = (|n|/m) P(S_m = m-1), S_m drawn without replacement from the degrees.
ExactScalar expected_count_size(const DegreeStatistic& bn, long long m);

// E (N_m)_r = |n| (|n|-rm+r-1)_{r-1} / m^r * P(r disjoint blocks each sum to m-1).
MomentReport factorial_moment_size(const DegreeStatistic& bn, long long m, long long r);

// Var = m2 + m1 - m1^2 from the first two factorial moments.
SignedValue variance_from_factorial(const ExactScalar& m1, const ExactScalar& m2);

// Both sides of the statistic-vs-tree mean and variance relations; exact
// equality is the contract.
struct VarianceRelation {
  ExactScalar mean_lhs, mean_rhs;
  SignedValue var_lhs, var_rhs;
  BigInt class_size;
};
VarianceRelation variance_relation_statistic(const DegreeStatistic& bn, const PlaneTree& t);

struct DegreeMoments {
  double mean = 0, variance = 0, second_moment = 0;
  std::optional<Rational> exact_mean, exact_variance;
};
DegreeMoments degree_moments(const DegreeDistribution& dist);

// Deterministic representative of T_bm: degrees in descending order (a valid
// DFS degree sequence for any statistic).
PlaneTree canonical_tree(const DegreeStatistic& bm);

// Unconditional factorial moment of N_T over a Galton-Watson tree conditioned
// to size n: n * prod p_i^{q n_T(i)} * (n)_{qm} / (n)_{qm-q+1}
//            * P(S_{n-qm} = n-1-q(m-1)) / P(S_n = n-1).
ExactScalar gw_factorial_moment(const DegreeDistribution& p, long long n, const PlaneTree& t,
                                long long q);

}  // namespace fringetrees::exactstats
