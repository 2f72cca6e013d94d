#include "fringetrees/approx.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fringetrees/exactstats.hpp"

namespace fringetrees::approx {

// --- reference laws -----------------------------------------------------------

double poisson_log_pmf(double lambda, long long k) {
  if (lambda < 0) raise(errc::nonpositive_input, "lambda must be >= 0");
  if (k < 0) return kNegInf;
  if (lambda == 0) return k == 0 ? 0.0 : kNegInf;
  return static_cast<double>(k) * std::log(lambda) - lambda -
         std::lgamma(static_cast<double>(k) + 1);
}

double poisson_pmf(double lambda, long long k) { return std::exp(poisson_log_pmf(lambda, k)); }

std::vector<std::pair<long long, double>> poisson_pmf_table(double lambda, double coverage,
                                                            double* tail) {
  std::vector<std::pair<long long, double>> table;
  double cum = 0;
  long long k = 0;
  const long long hard_cap =
      static_cast<long long>(lambda + 15 * std::sqrt(lambda + 1.0) + 64);
  while (cum < 1.0 - coverage && k <= hard_cap) {
    double p = poisson_pmf(lambda, k);
    table.emplace_back(k, p);
    cum += p;
    ++k;
  }
  if (tail) *tail = std::max(0.0, 1.0 - cum);
  return table;
}

NormalEval normal_density_cdf(double mu, double sigma, double x) {
  if (!(sigma > 0)) raise(errc::nonpositive_sigma, "sigma must be positive");
  const double z = (x - mu) / sigma;
  NormalEval out;
  out.pdf = std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
  out.cdf = normal_cdf(z);
  return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// --- distances ------------------------------------------------------------------

double tv_distance(const std::map<long long, long long>& histogram,
                   const std::vector<std::pair<long long, double>>& target_pmf,
                   double target_tail) {
  long long total = 0;
  for (const auto& [k, c] : histogram) {
    (void)k;
    total += c;
  }
  if (total <= 0) raise(errc::empty_histogram, "histogram has no mass");

  std::map<long long, double> diff;
  for (const auto& [k, c] : histogram) {
    diff[k] += static_cast<double>(c) / static_cast<double>(total);
  }
  for (const auto& [k, p] : target_pmf) diff[k] -= p;
  double l1 = 0;
  for (const auto& [k, d] : diff) {
    (void)k;
    l1 += std::abs(d);
  }
  return 0.5 * (l1 + target_tail);
}

double tv_distance_poisson(const std::map<long long, long long>& histogram, double lambda) {
  double tail = 0;
  auto table = poisson_pmf_table(lambda, 1e-12, &tail);
  return tv_distance(histogram, table, tail);
}

double ks_statistic_normal(const std::map<long long, long long>& histogram, double mu,
                           double sigma) {
  if (!(sigma > 0)) raise(errc::nonpositive_sigma, "sigma must be positive");
  long long total = 0;
  for (const auto& [k, c] : histogram) {
    (void)k;
    total += c;
  }
  if (total <= 0) raise(errc::empty_histogram, "histogram has no mass");
  double d = 0;
  double cum = 0;
  for (const auto& [k, c] : histogram) {
    double f = normal_cdf((static_cast<double>(k) - mu) / sigma);
    d = std::max(d, std::abs(f - cum));  // just below the atom
    cum += static_cast<double>(c) / static_cast<double>(total);
    d = std::max(d, std::abs(f - cum));  // at the atom
  }
  return d;
}

double kolmogorov_q(double x) {
  if (x <= 0) return 1.0;
  double q = 0;
  for (int j = 1; j <= 101; ++j) {
    double term = 2.0 * std::exp(-2.0 * j * j * x * x);
    q += (j % 2 == 1) ? term : -term;
    if (term < 1e-16) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

// Incomplete gamma by series / continued fraction (Lentz), standard numerics.
namespace {

double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 1; n < 500; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (x < 0 || a <= 0) raise(errc::nonpositive_input, "gamma_q needs a > 0, x >= 0");
  if (x == 0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

double chi2_sf(double x, double dof) { return regularized_gamma_q(dof / 2.0, x / 2.0); }

// --- bounds ----------------------------------------------------------------------

CaiDevroye cai_devroye(const DegreeStatistic& bn, const PlaneTree& t) {
  CaiDevroye out;
  ExactScalar mean = exactstats::expected_count_tree(bn, t);
  BigInt class_size = treecore::count_trees(t.statistic());
  const double two_over_sqrt_class = 2.0 * std::exp(-0.5 * ln(class_size));
  if (mean.is_zero()) {
    out.zero_mean = true;
    out.bound = 1.0;
    return out;
  }
  ExactScalar m2 = exactstats::factorial_moment_tree(bn, t, 2).value;
  double radicand;
  try {
    SignedValue var = exactstats::variance_from_factorial(mean, m2);
    if (var.rational && mean.exact()) {
      Rational r = (*var.rational - mean.rational()) / mean.rational();
      radicand = r.get_d();
    } else {
      radicand = (var.value - mean.value()) / mean.value();
    }
  } catch (const Error& e) {
    if (e.code() != errc::precision_loss) throw;
    radicand = 0;
    out.clamped = true;
  }
  if (radicand < 0) {
    radicand = 0;
    out.clamped = true;
  }
  out.bound = std::sqrt(radicand) + two_over_sqrt_class;
  return out;
}

double cai_devroye_bound(const DegreeStatistic& bn, const PlaneTree& t) {
  return cai_devroye(bn, t).bound;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

// delta = lambda * sum n_T(i)^2/n(i); also evaluated as
// m^2 (lambda/n) sum p_i(n_T)^2/p_i(n) and checked for agreement.
ExactScalar delta_from(const DegreeStatistic& bn, const DegreeStatistic& nt,
                       const ExactScalar& lambda, double* rny0_sum) {
  const long long n = bn.size();
  const long long m = nt.size();
  if (lambda.is_zero()) {
    if (rny0_sum) *rny0_sum = 0;
    return lambda.exact() ? ExactScalar::from_rational(Rational(0)) : ExactScalar::zero();
  }
  // lambda > 0 forces n(i) >= n_T(i) >= 1 on the target's support
  double rsum = 0;
  for (const auto& [deg, mult] : nt.entries()) {
    double pt = static_cast<double>(mult) / static_cast<double>(m);
    double pn = static_cast<double>(bn.count(deg)) / static_cast<double>(n);
    rsum += pt * pt / pn;
  }
  if (rny0_sum) *rny0_sum = rsum;

  if (lambda.exact()) {
    Rational s1(0), s2(0);
    for (const auto& [deg, mult] : nt.entries()) {
      Rational mm = rat(mult);
      s1 += mm * mm / rat(bn.count(deg));
      Rational pt = rat(mult, m);
      Rational pn = rat(bn.count(deg), n);
      s2 += pt * pt / pn;
    }
    Rational d1 = lambda.rational() * s1;
    Rational d2 = rat(m) * rat(m) * (lambda.rational() / rat(n)) * s2;
    if (d1 != d2) raise(errc::precision_loss, "the two forms of delta disagree");
    return ExactScalar::from_rational(d1);
  }
  double s1 = 0;
  for (const auto& [deg, mult] : nt.entries()) {
    s1 += static_cast<double>(mult) * static_cast<double>(mult) /
          static_cast<double>(bn.count(deg));
  }
  double d1 = lambda.log_value() + std::log(s1);
  double d2 = lambda.log_value() + 2 * std::log(static_cast<double>(m)) -
              std::log(static_cast<double>(n)) + std::log(rsum);
  if (std::abs(d1 - d2) > 1e-9 * std::max(1.0, std::abs(d1))) {
    raise(errc::precision_loss, "the two forms of delta disagree");
  }
  return ExactScalar::from_log(d1);
}

}  // namespace

std::string TVBoundReport::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"lambda\":" << lambda.value() << ",\"delta\":" << delta.value();
  if (lambda.exact()) os << ",\"lambda_rational\":\"" << lambda.rational().get_str() << "\"";
  if (delta.exact()) os << ",\"delta_rational\":\"" << delta.rational().get_str() << "\"";
  if (cai_devroye_bound) os << ",\"cai_devroye\":" << *cai_devroye_bound;
  os << ",\"cai_clamped\":" << (cai_clamped ? "true" : "false")
     << ",\"class_size\":\"" << class_size.get_str() << "\""
     << ",\"rny0_sum\":" << rny0_sum << ",\"vacuous\":" << (vacuous ? "true" : "false")
     << ",\"notes\":\"" << json_escape(notes) << "\"}";
  return os.str();
}

TVBoundReport stein_delta(const DegreeStatistic& bn, const PlaneTree& t) {
  if (t.size() > bn.size()) {
    raise(errc::target_too_large, "target tree larger than the host statistic");
  }
  TVBoundReport rep;
  rep.lambda = exactstats::expected_count_tree(bn, t);
  rep.delta = delta_from(bn, t.statistic(), rep.lambda, &rep.rny0_sum);
  rep.class_size = treecore::count_trees(t.statistic());
  CaiDevroye cd = cai_devroye(bn, t);
  rep.cai_devroye_bound = cd.bound;
  rep.cai_clamped = cd.clamped;
  if (cd.zero_mean) rep.notes = "zero mean: Cai-Devroye bound undefined, reported as 1";
  rep.vacuous = rep.delta.value() >= 1.0;
  if (rep.vacuous) {
    rep.notes += rep.notes.empty() ? "" : "; ";
    rep.notes += "delta >= 1, bound trivial (TV <= 1 always)";
  }
  return rep;
}

TVBoundReport statistic_tv_bound(const DegreeStatistic& bn, const DegreeStatistic& bm) {
  if (bm.size() > bn.size()) {
    raise(errc::target_too_large, "target statistic larger than the host");
  }
  TVBoundReport rep;
  rep.lambda = exactstats::factorial_moment_statistic(bn, bm, 1).value;
  rep.delta = delta_from(bn, bm, rep.lambda, &rep.rny0_sum);
  rep.class_size = treecore::count_trees(bm);
  rep.vacuous = rep.delta.value() >= 1.0;
  if (rep.vacuous) rep.notes = "delta >= 1, bound trivial (TV <= 1 always)";
  return rep;
}

// --- size-count asymptotics ---------------------------------------------------

SizeAsymptotic size_expectation_asymptotic(long long n, long long m, double sigma2) {
  if (m < 1 || m >= n) raise(errc::degenerate_range, "need 1 <= m < n");
  if (!(sigma2 > 0)) raise(errc::nonpositive_input, "sigma^2 must be positive");
  SizeAsymptotic out;
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  out.value = nn / (std::sqrt(2.0 * M_PI * sigma2) * std::sqrt(1.0 - mm / nn) *
                    std::pow(mm, 1.5));
  out.outside_regime = (m < 30) || (n - m < 30);
  return out;
}

double ts_lambda(double a, double sigma2) {
  if (!(a > 0) || !(sigma2 > 0)) raise(errc::nonpositive_input, "need a > 0, sigma^2 > 0");
  return 1.0 / std::sqrt(2.0 * M_PI * sigma2 * a * a * a);
}

LltPrediction llt_prediction(const std::vector<long long>& d, long long m, long long k) {
  const long long n = static_cast<long long>(d.size());
  if (m <= 0 || m >= n) raise(errc::count_out_of_range, "need 0 < m < |d|");
  double mean = 0;
  for (long long v : d) mean += static_cast<double>(v);
  mean /= static_cast<double>(n);
  double q = 0;
  for (long long v : d) {
    double dev = static_cast<double>(v) - mean;
    q += dev * dev;
  }
  if (q == 0) raise(errc::degenerate_spread, "all values equal");
  LltPrediction out;
  const double f = static_cast<double>(m) / static_cast<double>(n);
  out.sigma_hat2 = f * (1.0 - f) * q;
  out.mu_hat = static_cast<double>(m) * mean;
  const double dev = static_cast<double>(k) - out.mu_hat;
  out.predicted_prob =
      std::exp(-dev * dev / (2.0 * out.sigma_hat2)) / std::sqrt(2.0 * M_PI * out.sigma_hat2);
  return out;
}

double lindeberg_diagnostic(const std::vector<long long>& d, long long m, double eps) {
  const long long n = static_cast<long long>(d.size());
  if (m <= 0 || m > n) raise(errc::count_out_of_range, "need 0 < m <= |d|");
  if (!(eps > 0)) raise(errc::nonpositive_input, "eps must be positive");
  double mean = 0;
  for (long long v : d) mean += static_cast<double>(v);
  mean /= static_cast<double>(n);
  double q = 0;
  for (long long v : d) {
    double dev = static_cast<double>(v) - mean;
    q += dev * dev;
  }
  if (q == 0) raise(errc::degenerate_spread, "all values equal");
  const double f = static_cast<double>(m) / static_cast<double>(n);
  const double sigma_hat = std::sqrt(f * (1.0 - f) * q);
  double acc = 0;
  for (long long v : d) {
    double dev = std::abs(static_cast<double>(v) - mean);
    if (dev > eps * sigma_hat) acc += dev * dev;
  }
  return acc / q;
}

// --- regime classification -------------------------------------------------------

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::poisson_fixed: return "PoissonFixed";
    case Regime::normal_diverging: return "NormalDiverging";
    case Regime::size_poisson: return "SizePoisson";
    case Regime::gw_poisson: return "GWPoisson";
    case Regime::gw_normal: return "GWNormal";
  }
  return "?";
}

std::string RegimePrediction::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"regime\":\"" << regime_name(regime) << "\"";
  if (lambda) os << ",\"lambda\":" << *lambda;
  if (mu_sigma) os << ",\"mu\":" << mu_sigma->first << ",\"sigma\":" << mu_sigma->second;
  os << ",\"open_problem\":" << (open_problem ? "true" : "false") << ",\"diagnostics\":{";
  bool first = true;
  for (const auto& [name, val] : diagnostics) {
    if (!first) os << ",";
    first = false;
    os << "\"" << json_escape(name) << "\":" << val;
  }
  os << "}}";
  return os.str();
}

RegimePrediction classify_regime(const RegimeScenario& scenario) {
  const bool fixed = !scenario.statistics.empty();
  const bool gw = scenario.offspring.has_value();
  if (fixed == gw) {
    raise(errc::underspecified_scenario,
          "need exactly one of a statistic family or an offspring law");
  }
  const std::size_t points = fixed ? scenario.statistics.size() : scenario.sizes.size();
  if (points == 0) raise(errc::underspecified_scenario, "empty grid");
  int target_kinds = (!scenario.target_trees.empty()) + (!scenario.target_statistics.empty()) +
                     (!scenario.target_sizes.empty());
  if (target_kinds != 1) raise(errc::underspecified_scenario, "need exactly one target family");

  auto pick = [&](const auto& v, std::size_t i) -> const auto& {
    if (v.size() == 1) return v[0];
    if (v.size() != points) {
      raise(errc::underspecified_scenario, "target grid does not match the family grid");
    }
    return v[i];
  };

  RegimePrediction out;
  std::vector<double> lambdas;
  double last_sigma2 = 0;
  double last_a = 0;

  for (std::size_t i = 0; i < points; ++i) {
    const long long n = fixed ? scenario.statistics[i].size() : scenario.sizes[i];
    std::string tag = "kappa" + std::to_string(i) + "(n=" + std::to_string(n) + "):";
    DegreeDistribution p = fixed ? treecore::empirical_distribution(scenario.statistics[i])
                                 : *scenario.offspring;
    if (!scenario.target_sizes.empty()) {
      long long m = pick(scenario.target_sizes, i);
      double sigma2 = p.variance();
      double a = static_cast<double>(m) / std::pow(static_cast<double>(n), 2.0 / 3.0);
      last_sigma2 = sigma2;
      last_a = a;
      double lam = ts_lambda(a, sigma2);
      lambdas.push_back(lam);
      out.diagnostics.emplace_back(tag + "a", a);
      out.diagnostics.emplace_back(tag + "sigma2", sigma2);
      out.diagnostics.emplace_back(tag + "ts_lambda", lam);
      auto sp = p.span();
      out.diagnostics.emplace_back(tag + "span",
                                   sp ? static_cast<double>(*sp)
                                      : std::numeric_limits<double>::infinity());
    } else {
      ExactScalar pi;
      double rny2 = 0;
      long long m = 0;
      if (!scenario.target_trees.empty()) {
        const PlaneTree& t = pick(scenario.target_trees, i);
        m = t.size();
        pi = exactstats::pi_p_tree(p, t);
        double s = 0;
        for (const auto& [deg, mult] : t.statistic().entries()) {
          double pt = static_cast<double>(mult) / static_cast<double>(m);
          double pn = p.prob(deg);
          if (pn == 0) {
            s = std::numeric_limits<double>::infinity();
            break;
          }
          s += pt * pt / pn;
        }
        rny2 = static_cast<double>(m) * static_cast<double>(m) * pi.value() * s;
      } else {
        const DegreeStatistic& bm = pick(scenario.target_statistics, i);
        m = bm.size();
        auto pis = exactstats::pi_p_statistic(p, bm);
        pi = pis.class_total;
        double s = 0;
        for (const auto& [deg, mult] : bm.entries()) {
          double pt = static_cast<double>(mult) / static_cast<double>(m);
          double pn = p.prob(deg);
          if (pn == 0) {
            s = std::numeric_limits<double>::infinity();
            break;
          }
          s += pt * pt / pn;
        }
        rny2 = static_cast<double>(m) * static_cast<double>(m) * pi.value() * s;
      }
      double lam = static_cast<double>(n) * pi.value();
      lambdas.push_back(lam);
      out.diagnostics.emplace_back(tag + "n_pi", lam);
      out.diagnostics.emplace_back(tag + "rny2_product", rny2);
      out.diagnostics.emplace_back(tag + "m", static_cast<double>(m));
    }
  }

  const double lam_last = lambdas.back();
  const bool growing = lambdas.size() >= 2 && lambdas.back() > 1.5 * lambdas.front();
  if (!scenario.target_sizes.empty()) {
    out.regime = Regime::size_poisson;
    out.lambda = ts_lambda(last_a, last_sigma2);
  } else if (lam_last > 30.0 || (growing && lam_last > 10.0)) {
    out.regime = gw ? Regime::gw_normal : Regime::normal_diverging;
    out.mu_sigma = std::make_pair(lam_last, std::sqrt(lam_last));
  } else {
    out.regime = gw ? Regime::gw_poisson : Regime::poisson_fixed;
    out.lambda = lam_last;
    if (lam_last < 1e-3 && lambdas.size() >= 2 && lambdas.back() < 0.5 * lambdas.front()) {
      out.open_problem = true;  // vanishing-lambda corner: reported, never asserted
    }
  }
  return out;
}

}  // namespace fringetrees::approx
