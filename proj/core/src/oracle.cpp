#include "fringetrees/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace fringetrees::oracle {

using treecore::DegreeSequence;

// --- enumeration ----------------------------------------------------------

namespace {

void enumerate_rec(std::vector<std::pair<int, long long>>& remaining, DegreeSequence& prefix,
                   long long partial, long long positions_left,
                   std::vector<PlaneTree>& out) {
  if (positions_left == 0) {
    out.push_back(PlaneTree::from_degree_sequence(prefix));
    return;
  }
  for (auto& [deg, cnt] : remaining) {
    if (cnt == 0) continue;
    long long next = partial + deg - 1;
    // Every proper prefix must keep the partial sums of (d_i - 1) >= 0;
    // the final position lands on -1 automatically.
    if (positions_left > 1 && next < 0) continue;
    --cnt;
    prefix.push_back(deg);
    enumerate_rec(remaining, prefix, next, positions_left - 1, out);
    prefix.pop_back();
    ++cnt;
  }
}

}  // namespace

EnumerationResult enumerate_trees(const DegreeStatistic& bn, long long limit) {
  BigInt card = treecore::count_trees(bn);
  if (card > big(limit)) {
    raise(errc::limit_exceeded,
          "|T_bn| = " + card.get_str() + " exceeds limit " + std::to_string(limit));
  }
  EnumerationResult res;
  res.statistic = bn;
  res.cardinality = card;
  std::vector<std::pair<int, long long>> remaining(bn.entries().begin(), bn.entries().end());
  DegreeSequence prefix;
  prefix.reserve(static_cast<std::size_t>(bn.size()));
  enumerate_rec(remaining, prefix, 0, bn.size(), res.trees);
  return res;
}

std::map<long long, Rational> exact_count_distribution(const DegreeStatistic& bn,
                                                       const CountTarget& target,
                                                       long long limit) {
  EnumerationResult enumr = enumerate_trees(bn, limit);
  std::map<long long, long long> tally;
  for (const PlaneTree& host : enumr.trees) {
    long long c = 0;
    if (std::holds_alternative<PlaneTree>(target)) {
      c = treecore::fringe_count_tree(host, std::get<PlaneTree>(target));
    } else if (std::holds_alternative<DegreeStatistic>(target)) {
      c = treecore::fringe_count_statistic(host, std::get<DegreeStatistic>(target));
    } else {
      c = treecore::fringe_count_size(host, std::get<long long>(target));
    }
    ++tally[c];
  }
  std::map<long long, Rational> pmf;
  Rational denom(enumr.cardinality);
  for (const auto& [count, hits] : tally) {
    pmf[count] = rat(hits) / denom;
  }
  return pmf;
}

// --- sampling without replacement ----------------------------------------

std::vector<std::pair<long long, long long>> degree_multiset(const DegreeStatistic& bn) {
  std::vector<std::pair<long long, long long>> vc;
  vc.reserve(bn.entries().size());
  for (const auto& [deg, mult] : bn.entries()) vc.emplace_back(deg, mult);
  return vc;
}

ExactScalar SworPmf::prob_at(long long k) const {
  auto it = std::lower_bound(pmf.begin(), pmf.end(), k,
                             [](const auto& e, long long key) { return e.first < key; });
  if (it == pmf.end() || it->first != k) {
    return exact ? ExactScalar::from_rational(Rational(0)) : ExactScalar::zero();
  }
  return it->second;
}

namespace {

struct ValueClass {
  long long value = 0;
  long long count = 0;
};

struct ProfileScan {
  std::vector<ValueClass> classes;
  long long n = 0;
  long long m = 0;
  bool rational = false;
  long long k_min = 0, k_max = 0;
  Budget budget;
  long long nodes = 0;

  // suffix extremes of achievable added sum for j items from classes t..end
  std::vector<std::vector<long long>> min_add, max_add;

  // per-class binomial tables
  std::vector<std::vector<BigInt>> binom;         // rational mode
  std::vector<std::vector<double>> ln_binom;      // log mode

  std::map<long long, BigInt> acc_big;
  std::map<long long, double> acc_log;  // running max-free log-sum-exp below

  void prepare() {
    std::sort(classes.begin(), classes.end(),
              [](const ValueClass& a, const ValueClass& b) { return a.value < b.value; });
    const std::size_t K = classes.size();
    min_add.assign(K + 1, {});
    max_add.assign(K + 1, {});
    min_add[K] = {0};
    max_add[K] = {0};
    for (std::size_t t = K; t-- > 0;) {
      // taking j items from classes t.. : cheapest takes small values first,
      // dearest takes large values first
      long long cap = classes[t].count + (min_add[t + 1].size() ? static_cast<long long>(min_add[t + 1].size()) - 1 : 0);
      long long take_cap = std::min(cap, m);
      min_add[t].assign(static_cast<std::size_t>(take_cap) + 1, 0);
      max_add[t].assign(static_cast<std::size_t>(take_cap) + 1, 0);
      for (long long j = 1; j <= take_cap; ++j) {
        long long from_here_min = std::min(j, classes[t].count);
        long long rest_min = j - from_here_min;
        min_add[t][static_cast<std::size_t>(j)] =
            from_here_min * classes[t].value + min_add[t + 1][static_cast<std::size_t>(rest_min)];
        // for max, defer to later (larger) classes first
        long long rest_cap = static_cast<long long>(max_add[t + 1].size()) - 1;
        long long rest_max = std::min(j, rest_cap);
        long long from_here_max = j - rest_max;
        max_add[t][static_cast<std::size_t>(j)] =
            from_here_max * classes[t].value + max_add[t + 1][static_cast<std::size_t>(rest_max)];
      }
    }
    binom.clear();
    ln_binom.clear();
    for (std::size_t t = 0; t < K; ++t) {
      long long jcap = std::min(classes[t].count, m);
      if (rational) {
        std::vector<BigInt> row(static_cast<std::size_t>(jcap) + 1);
        row[0] = 1;
        for (long long j = 1; j <= jcap; ++j) {
          row[static_cast<std::size_t>(j)] = row[static_cast<std::size_t>(j - 1)] *
                                             big(classes[t].count - j + 1) /
                                             big(j);
        }
        binom.push_back(std::move(row));
      } else {
        std::vector<double> row(static_cast<std::size_t>(jcap) + 1);
        row[0] = 0.0;
        double lc = std::lgamma(static_cast<double>(classes[t].count) + 1);
        for (long long j = 1; j <= jcap; ++j) {
          row[static_cast<std::size_t>(j)] =
              lc - std::lgamma(static_cast<double>(j) + 1) -
              std::lgamma(static_cast<double>(classes[t].count - j) + 1);
        }
        ln_binom.push_back(std::move(row));
      }
    }
  }

  void run() {
    if (window_miss(0, 0, 0)) return;
    if (rational) {
      BigInt w(1);
      recurse_big(0, 0, 0, w);
    } else {
      recurse_log(0, 0, 0, 0.0);
    }
  }

  bool window_miss(std::size_t t, long long drawn, long long sum) const {
    long long left = m - drawn;
    if (left > static_cast<long long>(min_add[t].size()) - 1) return true;  // not enough items
    long long lo = sum + min_add[t][static_cast<std::size_t>(left)];
    long long hi = sum + max_add[t][static_cast<std::size_t>(left)];
    return hi < k_min || lo > k_max;
  }

  void bump() {
    if (++nodes > budget.max_nodes) {
      raise(errc::budget_exceeded, "profile enumeration exceeded node budget");
    }
  }

  void recurse_big(std::size_t t, long long drawn, long long sum, const BigInt& weight) {
    if (t == classes.size()) {
      acc_big[sum] += weight;  // drawn == m and window fit guaranteed by pruning
      return;
    }
    long long jcap = std::min(classes[t].count, m - drawn);
    for (long long j = 0; j <= jcap; ++j) {
      bump();
      long long d2 = drawn + j;
      long long s2 = sum + j * classes[t].value;
      if (window_miss(t + 1, d2, s2)) continue;  // prune before the bigint multiply
      BigInt w = weight * binom[t][static_cast<std::size_t>(j)];
      recurse_big(t + 1, d2, s2, w);
    }
  }

  void recurse_log(std::size_t t, long long drawn, long long sum, double lweight) {
    if (t == classes.size()) {
      auto [it, inserted] = acc_log.try_emplace(sum, lweight);
      if (!inserted) it->second = ExactScalar::log_add(it->second, lweight);
      return;
    }
    long long jcap = std::min(classes[t].count, m - drawn);
    for (long long j = 0; j <= jcap; ++j) {
      bump();
      long long d2 = drawn + j;
      long long s2 = sum + j * classes[t].value;
      if (window_miss(t + 1, d2, s2)) continue;
      recurse_log(t + 1, d2, s2, lweight + ln_binom[t][static_cast<std::size_t>(j)]);
    }
  }
};

bool choose_rational(long long n, long long m, ArithmeticMode mode) {
  if (mode == ArithmeticMode::rational) return true;
  if (mode == ArithmeticMode::logspace) return false;
  return n <= 10'000 && m <= 2'000;
}

SworPmf run_profile_scan(const std::vector<std::pair<long long, long long>>& value_counts,
                         long long m, long long k_min, long long k_max, ArithmeticMode mode,
                         const Budget& budget) {
  ProfileScan scan;
  scan.budget = budget;
  long long n = 0;
  for (const auto& [v, c] : value_counts) {
    if (c <= 0) raise(errc::invalid_encoding, "value counts must be positive");
    scan.classes.push_back(ValueClass{v, c});
    n += c;
  }
  if (m < 0 || m > n) raise(errc::count_out_of_range, "draw count outside [0, n]");
  scan.n = n;
  scan.m = m;
  scan.k_min = k_min;
  scan.k_max = k_max;
  scan.rational = choose_rational(n, m, mode);
  scan.prepare();
  scan.run();

  SworPmf out;
  out.exact = scan.rational;
  if (scan.rational) {
    BigInt denom;
    mpz_bin_uiui(denom.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(m));
    for (auto& [sum, w] : scan.acc_big) {
      out.pmf.emplace_back(sum, ExactScalar::from_rational(Rational(w) / Rational(denom)));
    }
  } else {
    double ln_denom = std::lgamma(static_cast<double>(n) + 1) -
                      std::lgamma(static_cast<double>(m) + 1) -
                      std::lgamma(static_cast<double>(n - m) + 1);
    for (auto& [sum, lw] : scan.acc_log) {
      out.pmf.emplace_back(sum, ExactScalar::from_log(lw - ln_denom));
    }
  }
  return out;
}

constexpr long long kNoBound = std::numeric_limits<long long>::max() / 4;

}  // namespace

SworPmf swor_sum_pmf(const std::vector<std::pair<long long, long long>>& value_counts, long long m,
                     ArithmeticMode mode, const Budget& budget) {
  return run_profile_scan(value_counts, m, -kNoBound, kNoBound, mode, budget);
}

SworPmf swor_sum_pmf(const std::vector<long long>& d, long long m, ArithmeticMode mode,
                     const Budget& budget) {
  std::map<long long, long long> tally;
  for (long long v : d) ++tally[v];
  std::vector<std::pair<long long, long long>> vc(tally.begin(), tally.end());
  return swor_sum_pmf(vc, m, mode, budget);
}

SworPmf swor_sum_pmf_window(const std::vector<std::pair<long long, long long>>& value_counts,
                            long long m, long long k_min, long long k_max, ArithmeticMode mode,
                            const Budget& budget) {
  return run_profile_scan(value_counts, m, k_min, k_max, mode, budget);
}

ExactScalar swor_sum_prob(const std::vector<std::pair<long long, long long>>& value_counts,
                          long long m, long long k, ArithmeticMode mode, const Budget& budget) {
  return run_profile_scan(value_counts, m, k, k, mode, budget).prob_at(k);
}

// --- joint block probability ----------------------------------------------

namespace {

struct BlockScan {
  std::vector<ValueClass> classes;
  long long m = 0;
  Budget budget;
  long long nodes = 0;

  void bump() {
    if (++nodes > budget.max_nodes) {
      raise(errc::budget_exceeded, "joint block enumeration exceeded node budget");
    }
  }

  // Sum over profiles of block `depth` of profile-weight times the
  // recursive probability on the depleted multiset.
  Rational recurse_blocks(long long blocks_left) {
    if (blocks_left == 0) return Rational(1);
    long long remaining = 0;
    for (const auto& c : classes) remaining += c.count;
    BigInt denom;
    mpz_bin_uiui(denom.get_mpz_t(), static_cast<unsigned long>(remaining),
                 static_cast<unsigned long>(m));
    Rational total(0);
    std::vector<long long> profile(classes.size(), 0);
    profile_rec(0, 0, 0, BigInt(1), profile, blocks_left, total);
    return total / Rational(denom);
  }

  void profile_rec(std::size_t t, long long drawn, long long sum, const BigInt& weight,
                   std::vector<long long>& profile, long long blocks_left, Rational& total) {
    bump();
    if (drawn > m || sum > m - 1) return;
    if (t == classes.size()) {
      if (drawn != m || sum != m - 1) return;
      Rational tail = recurse_blocks_with(profile, blocks_left - 1);
      total += Rational(weight) * tail;
      return;
    }
    long long jcap = std::min(classes[t].count, m - drawn);
    BigInt b(1);
    for (long long j = 0; j <= jcap; ++j) {
      if (j > 0) b = b * big(classes[t].count - j + 1) / big(j);
      profile[t] = j;
      profile_rec(t + 1, drawn + j, sum + j * classes[t].value, weight * b, profile, blocks_left,
                  total);
    }
    profile[t] = 0;
  }

  Rational recurse_blocks_with(const std::vector<long long>& profile, long long blocks_left) {
    for (std::size_t t = 0; t < classes.size(); ++t) classes[t].count -= profile[t];
    Rational r = recurse_blocks(blocks_left);
    for (std::size_t t = 0; t < classes.size(); ++t) classes[t].count += profile[t];
    return r;
  }
};

}  // namespace

ExactScalar joint_block_probability(const DegreeStatistic& bn, long long m, long long r,
                                    const Budget& budget) {
  if (m < 1 || r < 1 || r * m > bn.size()) {
    raise(errc::size_out_of_range, "need 1 <= m and r*m <= |bn|");
  }
  if (r > 3) raise(errc::budget_exceeded, "joint block probability capped at r <= 3");
  if (bn.entries().size() > 12) {
    raise(errc::budget_exceeded, "joint block probability capped at 12 distinct degrees");
  }
  BlockScan scan;
  scan.budget = budget;
  scan.m = m;
  for (const auto& [deg, mult] : bn.entries()) scan.classes.push_back(ValueClass{deg, mult});
  return ExactScalar::from_rational(scan.recurse_blocks(r));
}

// --- i.i.d. sums ------------------------------------------------------------

double iid_sum_log_prob(const DegreeDistribution& p, long long n, long long target,
                        const Budget& budget) {
  const auto& support = p.support();
  const std::size_t K = support.size();
  if (K == 0) raise(errc::empty_input, "empty distribution");
  if (n < 1) raise(errc::size_out_of_range, "need n >= 1");

  std::vector<double> ln_p(K);
  for (std::size_t t = 0; t < K; ++t) ln_p[t] = std::log(p.prob(support[t]));
  const double ln_fact_n = std::lgamma(static_cast<double>(n) + 1);
  auto ln_fact = [](long long x) { return std::lgamma(static_cast<double>(x) + 1); };

  // Multinomial profile scan; the final two classes are pinned by the two
  // linear constraints, so the scan is over K-2 free indices.
  double acc = kNegInf;
  long long nodes = 0;
  std::vector<long long> profile(K, 0);

  auto close_profile = [&](long long used, long long sum_used) {
    long long left = n - used;
    long long s_left = target - sum_used;
    if (left < 0) return;
    if (K == 1) {
      if (left != 0 || s_left != 0) return;
    } else {
      long long va = support[K - 2], vb = support[K - 1];
      // ja + jb = left, va*ja + vb*jb = s_left
      long long num = vb * left - s_left;
      long long den = vb - va;
      if (num % den != 0) return;
      long long ja = num / den;
      long long jb = left - ja;
      if (ja < 0 || jb < 0) return;
      profile[K - 2] = ja;
      profile[K - 1] = jb;
    }
    double lw = ln_fact_n;
    for (std::size_t t = 0; t < K; ++t) {
      lw += profile[t] * ln_p[t] - ln_fact(profile[t]);
    }
    acc = ExactScalar::log_add(acc, lw);
  };

  if (K == 1) {
    close_profile(0, 0);
    return acc;
  }

  std::function<void(std::size_t, long long, long long)> rec =
      [&](std::size_t t, long long used, long long sum_used) {
        if (++nodes > budget.max_nodes) {
          raise(errc::budget_exceeded, "iid sum enumeration exceeded node budget");
        }
        if (t == K - 2) {
          close_profile(used, sum_used);
          return;
        }
        for (long long j = 0; j + used <= n; ++j) {
          profile[t] = j;
          rec(t + 1, used + j, sum_used + j * support[t]);
        }
        profile[t] = 0;
      };
  rec(0, 0, 0);
  return acc;
}

}  // namespace fringetrees::oracle
