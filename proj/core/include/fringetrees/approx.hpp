#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fringetrees/exact.hpp"
#include "fringetrees/treecore.hpp"

namespace fringetrees::approx {

using treecore::DegreeDistribution;
using treecore::DegreeStatistic;
using treecore::PlaneTree;

// --- reference laws ---------------------------------------------------------

double poisson_log_pmf(double lambda, long long k);
double poisson_pmf(double lambda, long long k);

// pmf table covering all but `coverage` of the mass; *tail receives the rest.
std::vector<std::pair<long long, double>> poisson_pmf_table(double lambda,
                                                            double coverage = 1e-12,
                                                            double* tail = nullptr);

struct NormalEval {
  double pdf = 0, cdf = 0;
};
NormalEval normal_density_cdf(double mu, double sigma, double x);
double normal_cdf(double z);

// --- distances ---------------------------------------------------------------

// Half the l1 distance between the empirical law of an integer histogram and
// a target pmf given as a table; `target_tail` is mass the table omits and is
// counted against the distance in full.
double tv_distance(const std::map<long long, long long>& histogram,
                   const std::vector<std::pair<long long, double>>& target_pmf,
                   double target_tail = 0.0);
double tv_distance_poisson(const std::map<long long, long long>& histogram, double lambda);

// Kolmogorov-Smirnov statistic of an integer histogram against N(mu, sigma^2),
// and the asymptotic Kolmogorov tail Q(x) = 2 sum (-1)^{j-1} exp(-2 j^2 x^2).
double ks_statistic_normal(const std::map<long long, long long>& histogram, double mu,
                           double sigma);
double kolmogorov_q(double x);

// Regularized incomplete gamma Q(a, x) and the chi-square survival function.
double regularized_gamma_q(double a, double x);
double chi2_sf(double x, double dof);

// --- bounds -------------------------------------------------------------------

struct CaiDevroye {
  double bound = 1.0;
  bool clamped = false;    // negative radicand clamped to zero
  bool zero_mean = false;  // E N = 0: bound undefined, reported as 1
};
CaiDevroye cai_devroye(const DegreeStatistic& bn, const PlaneTree& t);
double cai_devroye_bound(const DegreeStatistic& bn, const PlaneTree& t);

struct TVBoundReport {
  ExactScalar lambda;              // E N
  ExactScalar delta;               // lambda * sum n_T(i)^2 / n(i)
  std::optional<double> cai_devroye_bound;
  bool cai_clamped = false;
  BigInt class_size;               // |T_{n_T}|
  double rny0_sum = 0;             // sum p_i(n_T)^2 / p_i(n), strictly > 1/8
  bool vacuous = false;            // bound >= 1, trivially true
  std::string notes;
  std::string to_json() const;
};

TVBoundReport stein_delta(const DegreeStatistic& bn, const PlaneTree& t);
TVBoundReport statistic_tv_bound(const DegreeStatistic& bn, const DegreeStatistic& bm);

// --- size-count asymptotics ---------------------------------------------------

struct SizeAsymptotic {
  double value = 0;
  bool outside_regime = false;  // m or n-m too small for the limit to speak
};
SizeAsymptotic size_expectation_asymptotic(long long n, long long m, double sigma2);

double ts_lambda(double a, double sigma2);

struct LltPrediction {
  double predicted_prob = 0;
  double mu_hat = 0;
  double sigma_hat2 = 0;
};
LltPrediction llt_prediction(const std::vector<long long>& d, long long m, long long k);

double lindeberg_diagnostic(const std::vector<long long>& d, long long m, double eps);

// --- regime classification -----------------------------------------------------

enum class Regime { poisson_fixed, normal_diverging, size_poisson, gw_poisson, gw_normal };
const char* regime_name(Regime r);

struct RegimeScenario {
  // Fixed-statistic families list statistics; Galton-Watson families give the
  // offspring law plus a size grid.
  std::vector<DegreeStatistic> statistics;
  std::optional<DegreeDistribution> offspring;
  std::vector<long long> sizes;
  // Exactly one target family; a single entry is reused across the grid.
  std::vector<PlaneTree> target_trees;
  std::vector<DegreeStatistic> target_statistics;
  std::vector<long long> target_sizes;
};

struct RegimePrediction {
  Regime regime = Regime::poisson_fixed;
  std::optional<double> lambda;
  std::optional<std::pair<double, double>> mu_sigma;
  std::vector<std::pair<std::string, double>> diagnostics;
  bool open_problem = false;  // the lambda -> 0 corner the theory leaves open
  std::string to_json() const;
};

RegimePrediction classify_regime(const RegimeScenario& scenario);

}  // namespace fringetrees::approx
