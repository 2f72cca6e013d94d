#include "fringetrees/exactstats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fringetrees::exactstats {

bool use_rational(long long n, long long qm) { return n <= 10'000 && qm <= 1'000; }

namespace {

// Compensated (Kahan) sum for the log-space products.
struct LogProduct {
  double sum = 0, comp = 0;
  bool zero = false;
  void mul_ln(double lnterm) {
    if (lnterm == kNegInf) {
      zero = true;
      return;
    }
    double y = lnterm - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  ExactScalar done() const { return zero ? ExactScalar::zero() : ExactScalar::from_log(sum); }
};

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string MomentReport::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"order\":" << order << ",\"value\":" << value.value()
     << ",\"log_value\":" << value.log_value();
  if (value.exact()) {
    os << ",\"rational\":\"" << value.rational().get_str() << "\"";
  }
  os << ",\"statistic\":\"" << json_escape(statistic) << "\""
     << ",\"target\":\"" << json_escape(target) << "\""
     << ",\"formula\":\"" << json_escape(formula) << "\"}";
  return os.str();
}

ExactScalar pi_p_tree(const DegreeDistribution& p, const PlaneTree& t) {
  const DegreeStatistic& nt = t.statistic();
  if (p.exact()) {
    Rational out(1);
    for (const auto& [deg, mult] : nt.entries()) {
      Rational pi = p.exact_prob(deg);
      if (sgn(pi) == 0) return ExactScalar::from_rational(Rational(0));
      Rational pw;
      mpz_pow_ui(pw.get_num_mpz_t(), pi.get_num_mpz_t(), static_cast<unsigned long>(mult));
      mpz_pow_ui(pw.get_den_mpz_t(), pi.get_den_mpz_t(), static_cast<unsigned long>(mult));
      out *= pw;
    }
    return ExactScalar::from_rational(out);
  }
  LogProduct lp;
  for (const auto& [deg, mult] : nt.entries()) {
    double pi = p.prob(deg);
    lp.mul_ln(pi == 0 ? kNegInf : static_cast<double>(mult) * std::log(pi));
  }
  return lp.done();
}

PiStatistic pi_p_statistic(const DegreeDistribution& p, const DegreeStatistic& bm) {
  PiStatistic out;
  out.per_tree = pi_p_tree(p, canonical_tree(bm));
  BigInt trees = treecore::count_trees(bm);
  if (out.per_tree.exact()) {
    out.class_total = ExactScalar::from_rational(Rational(trees) * out.per_tree.rational());
  } else {
    out.class_total = out.per_tree * ExactScalar::from_log(ln(trees));
  }
  return out;
}

namespace {

// Shared evaluator for (le1a) and (eq4G): |n| / (|n|)_{q m - q + 1} * prod (n(i))_{q n_T(i)}.
ExactScalar moment_formula(const DegreeStatistic& bn,
                           const std::vector<std::pair<int, long long>>& target_counts,
                           long long m, long long q) {
  const long long n = bn.size();
  const long long denom_len = q * m - q + 1;
  if (n < denom_len) return ExactScalar::from_rational(Rational(0));  // 0/0 convention
  const bool rational = use_rational(n, q * m);

  // vanishing factor anywhere -> exact zero
  for (const auto& [deg, mult] : target_counts) {
    if (bn.count(deg) < q * mult) {
      return rational ? ExactScalar::from_rational(Rational(0)) : ExactScalar::zero();
    }
  }

  if (rational) {
    Rational out = rat(n);
    out /= Rational(falling_factorial(n, denom_len));
    for (const auto& [deg, mult] : target_counts) {
      out *= Rational(falling_factorial(bn.count(deg), q * mult));
    }
    return ExactScalar::from_rational(out);
  }
  LogProduct lp;
  lp.mul_ln(std::log(static_cast<double>(n)));
  lp.mul_ln(-ln_falling_factorial(n, denom_len));
  for (const auto& [deg, mult] : target_counts) {
    lp.mul_ln(ln_falling_factorial(bn.count(deg), q * mult));
  }
  return lp.done();
}

std::vector<std::pair<int, long long>> entries_of(const DegreeStatistic& s) {
  return {s.entries().begin(), s.entries().end()};
}

}  // namespace

ExactScalar expected_count_tree(const DegreeStatistic& bn, const PlaneTree& t) {
  if (t.size() > bn.size()) {
    raise(errc::target_too_large, "target tree larger than the host statistic");
  }
  return moment_formula(bn, entries_of(t.statistic()), t.size(), 1);
}

ExactScalar expected_count_tree_upper(const DegreeStatistic& bn, const PlaneTree& t) {
  if (t.size() > bn.size()) {
    raise(errc::target_too_large, "target tree larger than the host statistic");
  }
  const long long n = bn.size();
  const long long m = t.size();
  // |n|^{m+1} / (|n|)_m * pi_{p(n)}(T) = |n| * prod n(i)^{n_T(i)} / (|n|)_m.
  if (use_rational(n, m)) {
    Rational out = rat(n);
    for (const auto& [deg, mult] : t.statistic().entries()) {
      long long ni = bn.count(deg);
      if (ni == 0) return ExactScalar::from_rational(Rational(0));
      BigInt pw;
      mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(ni),
                    static_cast<unsigned long>(mult));
      out *= Rational(pw);
    }
    out /= Rational(falling_factorial(n, m));
    return ExactScalar::from_rational(out);
  }
  LogProduct lp;
  lp.mul_ln(std::log(static_cast<double>(n)));
  lp.mul_ln(-ln_falling_factorial(n, m));
  for (const auto& [deg, mult] : t.statistic().entries()) {
    long long ni = bn.count(deg);
    lp.mul_ln(ni == 0 ? kNegInf
                      : static_cast<double>(mult) * std::log(static_cast<double>(ni)));
  }
  return lp.done();
}

MomentReport factorial_moment_tree(const DegreeStatistic& bn, const PlaneTree& t, long long q) {
  if (q < 1) raise(errc::invalid_order, "factorial moment order must be >= 1");
  MomentReport rep;
  rep.order = q;
  rep.statistic = bn.to_string();
  rep.target = "tree:" + t.to_string();
  rep.formula = "factorial-moment-tree";
  rep.value = moment_formula(bn, entries_of(t.statistic()), t.size(), q);
  return rep;
}

MomentReport factorial_moment_statistic(const DegreeStatistic& bn, const DegreeStatistic& bm,
                                        long long q) {
  if (q < 1) raise(errc::invalid_order, "factorial moment order must be >= 1");
  MomentReport rep;
  rep.order = q;
  rep.statistic = bn.to_string();
  rep.target = "statistic:" + bm.to_string();
  rep.formula = "factorial-moment-statistic";
  ExactScalar tree_part = moment_formula(bn, entries_of(bm), bm.size(), q);
  BigInt trees = treecore::count_trees(bm);
  BigInt trees_q;
  mpz_pow_ui(trees_q.get_mpz_t(), trees.get_mpz_t(), static_cast<unsigned long>(q));
  if (tree_part.exact()) {
    rep.value = ExactScalar::from_rational(Rational(trees_q) * tree_part.rational());
  } else {
    rep.value = tree_part * ExactScalar::from_log(ln(trees_q));
  }
  return rep;
}

ExactScalar expected_count_size(const DegreeStatistic& bn, long long m) {
  if (m < 1 || m > bn.size()) {
    raise(errc::size_out_of_range, "fringe size must lie in [1, |bn|]");
  }
  const long long n = bn.size();
  auto mode = use_rational(n, m) ? oracle::ArithmeticMode::rational
                                 : oracle::ArithmeticMode::logspace;
  ExactScalar prob = oracle::swor_sum_prob(oracle::degree_multiset(bn), m, m - 1, mode);
  if (prob.exact()) {
    return ExactScalar::from_rational(rat(n, m) * prob.rational());
  }
  return prob * ExactScalar::from_value(static_cast<double>(n) / static_cast<double>(m));
}

MomentReport factorial_moment_size(const DegreeStatistic& bn, long long m, long long r) {
  if (r < 1) raise(errc::invalid_order, "factorial moment order must be >= 1");
  if (m < 1 || r * m > bn.size()) {
    raise(errc::size_out_of_range, "need r*m <= |bn|");
  }
  MomentReport rep;
  rep.order = r;
  rep.statistic = bn.to_string();
  rep.target = "size:" + std::to_string(m);
  rep.formula = "factorial-moment-size";
  if (r == 1) {
    rep.value = expected_count_size(bn, m);
    return rep;
  }
  const long long n = bn.size();
  ExactScalar prob = oracle::joint_block_probability(bn, m, r);
  Rational factor = rat(n);
  factor *= Rational(falling_factorial(n - r * m + r - 1, r - 1));
  BigInt mr;
  mpz_ui_pow_ui(mr.get_mpz_t(), static_cast<unsigned long>(m), static_cast<unsigned long>(r));
  factor /= Rational(mr);
  rep.value = ExactScalar::from_rational(factor * prob.rational());
  return rep;
}

SignedValue variance_from_factorial(const ExactScalar& m1, const ExactScalar& m2) {
  SignedValue out;
  if (m1.exact() && m2.exact()) {
    Rational v = m2.rational() + m1.rational() - m1.rational() * m1.rational();
    out.value = v.get_d();
    out.rational = std::move(v);
    return out;
  }
  const double a = m2.value();
  const double b = m1.value();
  const double v = a + b - b * b;
  const double err = 4e-15 * (std::abs(a) + std::abs(b) + b * b);
  if (v < -10 * err) {
    raise(errc::precision_loss,
          "log-only moments too large for a stable variance subtraction");
  }
  out.value = std::max(v, 0.0);
  return out;
}

VarianceRelation variance_relation_statistic(const DegreeStatistic& bn, const PlaneTree& t) {
  VarianceRelation rel;
  const DegreeStatistic& nt = t.statistic();
  rel.class_size = treecore::count_trees(nt);

  ExactScalar mean_tree = expected_count_tree(bn, t);
  ExactScalar m2_tree = factorial_moment_tree(bn, t, 2).value;
  ExactScalar mean_stat = factorial_moment_statistic(bn, nt, 1).value;
  ExactScalar m2_stat = factorial_moment_statistic(bn, nt, 2).value;

  rel.mean_lhs = mean_stat;
  if (mean_tree.exact()) {
    rel.mean_rhs = ExactScalar::from_rational(Rational(rel.class_size) * mean_tree.rational());
  } else {
    rel.mean_rhs = mean_tree * ExactScalar::from_log(ln(rel.class_size));
  }

  rel.var_lhs = variance_from_factorial(mean_stat, m2_stat);
  SignedValue var_tree = variance_from_factorial(mean_tree, m2_tree);
  if (var_tree.rational && mean_tree.exact()) {
    Rational ts(rel.class_size);
    Rational v = ts * ts * (*var_tree.rational - mean_tree.rational()) +
                 ts * mean_tree.rational();
    rel.var_rhs.value = v.get_d();
    rel.var_rhs.rational = std::move(v);
  } else {
    double ts = BigInt(rel.class_size).get_d();
    rel.var_rhs.value = ts * ts * (var_tree.value - mean_tree.value()) + ts * mean_tree.value();
  }
  return rel;
}

DegreeMoments degree_moments(const DegreeDistribution& dist) {
  DegreeMoments out;
  out.mean = dist.mean();
  out.variance = dist.variance();
  out.second_moment = dist.second_moment();
  if (dist.exact()) {
    out.exact_mean = dist.exact_mean();
    out.exact_variance = dist.exact_variance();
  }
  return out;
}

PlaneTree canonical_tree(const DegreeStatistic& bm) {
  treecore::DegreeSequence d;
  d.reserve(static_cast<std::size_t>(bm.size()));
  for (auto it = bm.entries().rbegin(); it != bm.entries().rend(); ++it) {
    for (long long c = 0; c < it->second; ++c) d.push_back(it->first);
  }
  return PlaneTree::from_degree_sequence(std::move(d));
}

ExactScalar gw_factorial_moment(const DegreeDistribution& p, long long n, const PlaneTree& t,
                                long long q) {
  if (q < 1) raise(errc::invalid_order, "factorial moment order must be >= 1");
  const long long m = t.size();
  if (n < q * m - q + 1) return ExactScalar::zero();

  ExactScalar pi_q = pi_p_tree(p, t).pow(q);
  if (pi_q.is_zero()) return ExactScalar::zero();

  LogProduct lp;
  lp.mul_ln(std::log(static_cast<double>(n)));
  lp.mul_ln(pi_q.log_value());
  lp.mul_ln(ln_falling_factorial(n, q * m));
  lp.mul_ln(-ln_falling_factorial(n, q * m - q + 1));

  const long long rest = n - q * m;
  const long long rest_target = n - 1 - q * (m - 1);
  double ln_num = rest == 0 ? (rest_target == 0 ? 0.0 : kNegInf)
                            : oracle::iid_sum_log_prob(p, rest, rest_target);
  lp.mul_ln(ln_num);
  lp.mul_ln(-oracle::iid_sum_log_prob(p, n, n - 1));
  return lp.done();
}

}  // namespace fringetrees::exactstats
