#include "fringetrees/treecore.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

namespace fringetrees::treecore {

// --- DegreeStatistic -----------------------------------------------------

DegreeStatistic DegreeStatistic::validate(const std::vector<Entry>& counts) {
  std::map<int, long long> merged;
  for (const auto& [deg, mult] : counts) {
    if (deg < 0) raise(errc::invalid_encoding, "negative degree");
    if (mult <= 0) raise(errc::invalid_encoding, "multiplicities must be positive");
    merged[deg] += mult;
  }
  return validate(merged);
}

DegreeStatistic DegreeStatistic::validate(const std::map<int, long long>& counts) {
  if (counts.empty()) raise(errc::empty_input, "degree statistic has no entries");
  long long total = 0;
  long long weighted = 0;
  for (const auto& [deg, mult] : counts) {
    if (deg < 0) raise(errc::invalid_encoding, "negative degree");
    if (mult <= 0) raise(errc::invalid_encoding, "multiplicities must be positive");
    total += mult;
    weighted += static_cast<long long>(deg) * mult;
  }
  if (total != 1 + weighted) {
    raise(errc::identity_violation,
          "sum n(i) = " + std::to_string(total) + " but 1 + sum i*n(i) = " +
              std::to_string(1 + weighted));
  }
  DegreeStatistic bn;
  bn.entries_.assign(counts.begin(), counts.end());
  bn.size_ = total;
  return bn;
}

DegreeStatistic DegreeStatistic::of_sequence(const DegreeSequence& d) {
  std::map<int, long long> counts;
  for (int deg : d) ++counts[deg];
  return validate(counts);
}

long long DegreeStatistic::count(int degree) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), degree,
                             [](const Entry& e, int deg) { return e.first < deg; });
  if (it == entries_.end() || it->first != degree) return 0;
  return it->second;
}

std::string DegreeStatistic::to_string() const {
  std::string out;
  for (const auto& [deg, mult] : entries_) {
    if (!out.empty()) out += ',';
    out += std::to_string(deg) + ':' + std::to_string(mult);
  }
  return out;
}

namespace {

long long parse_ll(std::string_view token) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    raise(errc::invalid_encoding, "bad integer '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

DegreeStatistic DegreeStatistic::parse(std::string_view text) {
  std::map<int, long long> counts;
  std::size_t pos = 0;
  if (text.empty()) raise(errc::empty_input, "empty degree statistic");
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string_view item = text.substr(pos, comma == std::string_view::npos ? comma : comma - pos);
    std::size_t colon = item.find(':');
    if (colon == std::string_view::npos) {
      raise(errc::invalid_encoding, "expected deg:count in '" + std::string(item) + "'");
    }
    int deg = static_cast<int>(parse_ll(item.substr(0, colon)));
    long long mult = parse_ll(item.substr(colon + 1));
    counts[deg] += mult;
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return validate(counts);
}

// --- DegreeDistribution ---------------------------------------------------

void DegreeDistribution::finalize() {
  mean_ = 0;
  second_moment_ = 0;
  for (std::size_t j = 0; j < support_.size(); ++j) {
    mean_ += support_[j] * probs_[j];
    second_moment_ += static_cast<double>(support_[j]) * support_[j] * probs_[j];
  }
  variance_ = second_moment_ - mean_ * mean_;
  if (variance_ < 0) variance_ = 0;
  if (!exact_.empty()) {
    Rational m(0), m2(0);
    for (std::size_t j = 0; j < support_.size(); ++j) {
      m += Rational(support_[j]) * exact_[j];
      m2 += Rational(support_[j]) * Rational(support_[j]) * exact_[j];
    }
    exact_mean_ = m;
    exact_variance_ = m2 - m * m;
  }
}

DegreeDistribution DegreeDistribution::from_rational(std::vector<std::pair<int, Rational>> pmf) {
  std::sort(pmf.begin(), pmf.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  DegreeDistribution p;
  Rational total(0);
  for (auto& [i, q] : pmf) {
    if (i < 0) raise(errc::invalid_encoding, "negative support point");
    if (sgn(q) < 0) raise(errc::invalid_encoding, "negative probability");
    if (sgn(q) == 0) continue;
    if (!p.support_.empty() && p.support_.back() == i) {
      raise(errc::invalid_encoding, "duplicate support point");
    }
    p.support_.push_back(i);
    p.probs_.push_back(q.get_d());
    p.exact_.push_back(q);
    total += q;
  }
  if (p.support_.empty()) raise(errc::empty_input, "empty pmf");
  if (total != 1) raise(errc::invalid_encoding, "rational pmf must sum to exactly 1");
  p.finalize();
  return p;
}

DegreeDistribution DegreeDistribution::from_real(std::vector<std::pair<int, double>> pmf,
                                                 double tolerance) {
  std::sort(pmf.begin(), pmf.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  DegreeDistribution p;
  double total = 0;
  for (auto& [i, q] : pmf) {
    if (i < 0) raise(errc::invalid_encoding, "negative support point");
    if (q < 0) raise(errc::invalid_encoding, "negative probability");
    if (q == 0) continue;
    if (!p.support_.empty() && p.support_.back() == i) {
      raise(errc::invalid_encoding, "duplicate support point");
    }
    p.support_.push_back(i);
    p.probs_.push_back(q);
    total += q;
  }
  if (p.support_.empty()) raise(errc::empty_input, "empty pmf");
  if (std::abs(total - 1.0) > tolerance) {
    raise(errc::invalid_encoding, "pmf sums to " + std::to_string(total));
  }
  p.finalize();
  return p;
}

double DegreeDistribution::prob(int i) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), i);
  if (it == support_.end() || *it != i) return 0.0;
  return probs_[static_cast<std::size_t>(it - support_.begin())];
}

Rational DegreeDistribution::exact_prob(int i) const {
  if (exact_.empty()) raise(errc::precision_loss, "pmf has no rational companion");
  auto it = std::lower_bound(support_.begin(), support_.end(), i);
  if (it == support_.end() || *it != i) return Rational(0);
  return exact_[static_cast<std::size_t>(it - support_.begin())];
}

std::optional<long long> DegreeDistribution::span() const {
  if (support_.size() <= 1) return std::nullopt;
  long long g = 0;
  for (std::size_t j = 1; j < support_.size(); ++j) {
    g = std::gcd(g, static_cast<long long>(support_[j] - support_[0]));
  }
  return g;
}

std::optional<long long> span_of(const DegreeDistribution& dist) { return dist.span(); }

// --- PlaneTree ------------------------------------------------------------

PlaneTree PlaneTree::from_degree_sequence(DegreeSequence d) {
  if (!is_valid_degree_sequence(d)) {
    raise(errc::invalid_encoding, "sequence is not in D_n");
  }
  PlaneTree t;
  t.stat_ = DegreeStatistic::of_sequence(d);
  t.dfs_ = std::move(d);
  return t;
}

std::vector<int> PlaneTree::parents() const {
  std::vector<int> parent(dfs_.size(), -1);
  std::vector<std::pair<int, int>> stack;  // (vertex, children still expected)
  for (std::size_t v = 0; v < dfs_.size(); ++v) {
    if (!stack.empty()) {
      parent[v] = stack.back().first;
      if (--stack.back().second == 0) {
        while (!stack.empty() && stack.back().second == 0) stack.pop_back();
      }
    }
    if (dfs_[v] > 0) stack.emplace_back(static_cast<int>(v), dfs_[v]);
  }
  return parent;
}

std::string PlaneTree::to_string() const { return format_degree_sequence(dfs_); }

PlaneTree PlaneTree::parse(std::string_view text) {
  return from_degree_sequence(parse_degree_sequence(text));
}

std::string format_degree_sequence(const DegreeSequence& d) {
  std::string out;
  for (int x : d) {
    if (!out.empty()) out += ',';
    out += std::to_string(x);
  }
  return out;
}

DegreeSequence parse_degree_sequence(std::string_view text) {
  DegreeSequence d;
  if (text.empty()) raise(errc::empty_input, "empty degree sequence");
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string_view item = text.substr(pos, comma == std::string_view::npos ? comma : comma - pos);
    d.push_back(static_cast<int>(parse_ll(item)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return d;
}

// --- operations -----------------------------------------------------------

DegreeStatistic validate_degree_statistic(const std::vector<DegreeStatistic::Entry>& counts) {
  return DegreeStatistic::validate(counts);
}

DegreeDistribution empirical_distribution(const DegreeStatistic& bn) {
  std::vector<std::pair<int, Rational>> pmf;
  pmf.reserve(bn.entries().size());
  for (const auto& [deg, mult] : bn.entries()) {
    pmf.emplace_back(deg, rat(mult, bn.size()));
  }
  return DegreeDistribution::from_rational(std::move(pmf));
}

BigInt count_trees(const DegreeStatistic& bn) {
  // (|n|-1)! / prod n(i)! after cancelling one |n|.
  BigInt num;
  mpz_fac_ui(num.get_mpz_t(), static_cast<unsigned long>(bn.size() - 1));
  for (const auto& [deg, mult] : bn.entries()) {
    (void)deg;
    BigInt f;
    mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(mult));
    mpz_divexact(num.get_mpz_t(), num.get_mpz_t(), f.get_mpz_t());
  }
  return num;
}

bool is_bridge(const DegreeSequence& d) {
  if (d.empty()) return false;
  long long sum = 0;
  for (int x : d) {
    if (x < 0) return false;
    sum += x;
  }
  return sum == static_cast<long long>(d.size()) - 1;
}

bool is_valid_degree_sequence(const DegreeSequence& d) {
  if (d.empty()) return false;
  long long sum = 0;
  const long long n = static_cast<long long>(d.size());
  for (long long k = 0; k < n; ++k) {
    if (d[static_cast<std::size_t>(k)] < 0) return false;
    sum += d[static_cast<std::size_t>(k)];
    if (k < n - 1 && sum < k + 1) return false;
  }
  return sum == n - 1;
}

std::size_t cycle_rotation_offset(const DegreeSequence& d) {
  if (!is_bridge(d)) {
    raise(errc::not_a_bridge, "degree sum must equal n-1");
  }
  long long sum = 0;
  long long min_sum = 0;
  std::size_t argmin = d.size();  // position of first minimum of partial sums of (d_i - 1)
  for (std::size_t i = 0; i < d.size(); ++i) {
    sum += d[i] - 1;
    if (sum < min_sum) {
      min_sum = sum;
      argmin = i;
    }
  }
  // total is -1, so min_sum <= -1 and argmin is set
  return (argmin + 1) % d.size();
}

DegreeSequence cycle_rotate(const DegreeSequence& d) {
  std::size_t start = cycle_rotation_offset(d);
  DegreeSequence out(d.size());
  std::rotate_copy(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(start), d.end(), out.begin());
  if (!is_valid_degree_sequence(out)) {
    raise(errc::not_a_bridge, "cycle rotation failed to land in D_n");
  }
  return out;
}

PlaneTree tree_from_degree_sequence(DegreeSequence d) {
  return PlaneTree::from_degree_sequence(std::move(d));
}

DegreeSequence degree_sequence_of_tree(const PlaneTree& t) { return t.degrees(); }

namespace {

// KMP failure table; degree alphabets are small but unbounded, so no
// bitmask tricks.
std::vector<int> kmp_failure(const DegreeSequence& pat) {
  std::vector<int> fail(pat.size(), 0);
  for (std::size_t i = 1; i < pat.size(); ++i) {
    int j = fail[i - 1];
    while (j > 0 && pat[i] != pat[static_cast<std::size_t>(j)]) {
      j = fail[static_cast<std::size_t>(j - 1)];
    }
    if (pat[i] == pat[static_cast<std::size_t>(j)]) ++j;
    fail[i] = j;
  }
  return fail;
}

}  // namespace

long long fringe_count_tree(const PlaneTree& host, const PlaneTree& target) {
  const DegreeSequence& text = host.degrees();
  const DegreeSequence& pat = target.degrees();
  if (pat.size() > text.size()) return 0;
  // Windows never wrap: a wrapping window cannot be a degree sequence.
  std::vector<int> fail = kmp_failure(pat);
  long long count = 0;
  int j = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    while (j > 0 && text[i] != pat[static_cast<std::size_t>(j)]) {
      j = fail[static_cast<std::size_t>(j - 1)];
    }
    if (text[i] == pat[static_cast<std::size_t>(j)]) ++j;
    if (j == static_cast<int>(pat.size())) {
      ++count;
      j = fail[static_cast<std::size_t>(j - 1)];
    }
  }
  return count;
}

long long fringe_count_statistic(const PlaneTree& host, const DegreeStatistic& bm) {
  const long long m = bm.size();
  if (m > host.size()) return 0;
  std::vector<long long> sizes = fringe_sizes(host.degrees());
  const DegreeSequence& dfs = host.degrees();
  long long count = 0;
  for (std::size_t v = 0; v < dfs.size(); ++v) {
    if (sizes[v] != m) continue;
    // The window is a fringe of the right size; test its degree multiset.
    std::map<int, long long> tally;
    for (std::size_t j = v; j < v + static_cast<std::size_t>(m); ++j) ++tally[dfs[j]];
    bool match = tally.size() == bm.entries().size();
    if (match) {
      for (const auto& [deg, mult] : bm.entries()) {
        auto it = tally.find(deg);
        if (it == tally.end() || it->second != mult) {
          match = false;
          break;
        }
      }
    }
    if (match) ++count;
  }
  return count;
}

long long fringe_count_size(const PlaneTree& host, long long m) {
  if (m < 1) raise(errc::size_out_of_range, "fringe size must be >= 1");
  if (m > host.size()) return 0;
  std::vector<long long> sizes = fringe_sizes(host.degrees());
  long long count = 0;
  for (long long s : sizes) {
    if (s == m) ++count;
  }
  return count;
}

std::vector<long long> fringe_sizes(const DegreeSequence& dfs) {
  // Right-to-left pass: each vertex pops the sizes of its children.
  std::vector<long long> sizes(dfs.size(), 0);
  std::vector<long long> stack;
  for (std::size_t i = dfs.size(); i-- > 0;) {
    long long s = 1;
    for (int c = 0; c < dfs[i]; ++c) {
      s += stack.back();
      stack.pop_back();
    }
    sizes[i] = s;
    stack.push_back(s);
  }
  return sizes;
}

std::vector<FringeEntry> fringe_decomposition(const PlaneTree& host) {
  std::vector<long long> sizes = fringe_sizes(host.degrees());
  const DegreeSequence& dfs = host.degrees();
  std::vector<FringeEntry> out;
  out.reserve(dfs.size());
  for (std::size_t v = 0; v < dfs.size(); ++v) {
    std::map<int, long long> tally;
    for (std::size_t j = v; j < v + static_cast<std::size_t>(sizes[v]); ++j) ++tally[dfs[j]];
    out.push_back(FringeEntry{static_cast<long long>(v), sizes[v],
                              DegreeStatistic::validate(tally)});
  }
  return out;
}

}  // namespace fringetrees::treecore
