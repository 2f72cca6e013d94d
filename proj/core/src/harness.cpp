#include "fringetrees/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "fringetrees/exactstats.hpp"
#include "fringetrees/oracle.hpp"

namespace fringetrees::harness {

using json = nlohmann::ordered_json;

// --- small helpers -------------------------------------------------------------

std::uint64_t combine_seed(std::uint64_t master, std::uint64_t salt) {
  std::uint64_t x = master + 0xD1B54A32D192ED03ULL * (salt + 1);
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

long long apply_size_rule(const SizeRule& rule, long long n) {
  const double x = rule.a * std::pow(static_cast<double>(n), rule.exponent);
  long long m = static_cast<long long>(std::nearbyint(x));  // nearest, ties to even
  if (rule.parity >= 0 && (m % 2 + 2) % 2 != rule.parity) {
    // move to the requested parity, staying closest to the rule value
    long long lo = m - 1, hi = m + 1;
    m = std::abs(static_cast<double>(lo) - x) <= std::abs(static_cast<double>(hi) - x) ? lo : hi;
  }
  return std::max<long long>(1, std::min(m, n));
}

double Histogram::mean() const {
  if (total == 0) return 0;
  double s = 0;
  for (const auto& [k, c] : counts) s += static_cast<double>(k) * static_cast<double>(c);
  return s / static_cast<double>(total);
}

double Histogram::variance() const {
  if (total == 0) return 0;
  const double mu = mean();
  double s = 0;
  for (const auto& [k, c] : counts) {
    double d = static_cast<double>(k) - mu;
    s += d * d * static_cast<double>(c);
  }
  return s / static_cast<double>(total);
}

std::string Histogram::to_string() const {
  std::string out;
  for (const auto& [k, c] : counts) {
    if (!out.empty()) out += ';';
    out += std::to_string(k) + ':' + std::to_string(c);
  }
  return out;
}

// --- degree families -------------------------------------------------------------

DegreeStatistic scale_law_to_statistic(const DegreeDistribution& p, long long n) {
  if (n < 1) raise(errc::config_error, "statistic size must be >= 1");
  std::map<int, long long> counts;
  for (int i : p.support()) {
    if (i >= 2) {
      long long c = std::llround(p.prob(i) * static_cast<double>(n));
      if (c > 0) counts[i] = c;
    }
  }
  auto weighted = [&]() {
    long long w = 0;
    for (const auto& [i, c] : counts) w += static_cast<long long>(i - 1) * c;
    return w;
  };
  auto others = [&]() {
    long long s = 0;
    for (const auto& [i, c] : counts) s += c;
    return s;
  };
  // n(0) is pinned by the identity; n(1) absorbs the remainder.
  long long n1 = n - (1 + weighted()) - others();
  while (n1 < 0 && !counts.empty()) {
    auto it = std::prev(counts.end());
    if (--it->second == 0) counts.erase(it);
    n1 = n - (1 + weighted()) - others();
  }
  if (p.prob(1) == 0.0 && !counts.empty()) {
    // law without 1-degrees: push the remainder into the smallest heavy degree
    const int i = counts.begin()->first;
    while (n1 >= i) {
      ++counts[i];
      n1 -= i;  // each extra i-degree vertex also adds (i-1) leaves
    }
  }
  if (n1 < 0) raise(errc::config_error, "law cannot be scaled to this size");
  long long n0 = 1 + weighted();
  if (n1 > 0) counts[1] = n1;
  counts[0] = n0;
  return DegreeStatistic::validate(counts);
}

DegreeDistribution power_tail_distribution(const PowerTail& spec) {
  if (!(spec.alpha > 1.0) || spec.truncation < 2) {
    raise(errc::config_error, "power tail needs alpha > 1 and truncation >= 2");
  }
  // p_i = beta i^{-alpha-1} for i >= 1 with beta chosen so the mean is 1.
  double norm = 0;
  for (long long i = 1; i <= spec.truncation; ++i) {
    norm += std::pow(static_cast<double>(i), -spec.alpha);
  }
  const double beta = 1.0 / norm;
  std::vector<std::pair<int, double>> pmf;
  double tail_mass = 0;
  for (long long i = 1; i <= spec.truncation; ++i) {
    double q = beta * std::pow(static_cast<double>(i), -spec.alpha - 1.0);
    pmf.emplace_back(static_cast<int>(i), q);
    tail_mass += q;
  }
  pmf.emplace_back(0, 1.0 - tail_mass);
  return DegreeDistribution::from_real(std::move(pmf), 1e-6);
}

DegreeStatistic star_statistic(long long kappa) {
  if (kappa < 2) raise(errc::config_error, "star family needs kappa >= 2");
  std::map<int, long long> counts;
  counts[0] = kappa - 1;
  counts[static_cast<int>(kappa - 1)] += 1;
  return DegreeStatistic::validate(counts);
}

DegreeStatistic periodic_statistic(double b, long long n) {
  if (n < 5) raise(errc::config_error, "periodic family needs n >= 5");
  long long n1 = std::llround(b * std::pow(static_cast<double>(n), 1.0 / 3.0));
  if ((n - n1 + 1) % 2 != 0) ++n1;  // parity so that n(0) is integral
  n1 = std::max<long long>(1, std::min(n1, n - 3));
  if ((n - n1 + 1) % 2 != 0) ++n1;
  long long n0 = (n - n1 + 1) / 2;
  std::map<int, long long> counts{{0, n0}, {1, n1}, {2, n0 - 1}};
  return DegreeStatistic::validate(counts);
}

PlaneTree broom_tree(long long chain) {
  DegreeSequence d;
  d.reserve(static_cast<std::size_t>(chain) + 3);
  d.insert(d.end(), static_cast<std::size_t>(chain), 1);
  d.push_back(2);
  d.push_back(0);
  d.push_back(0);
  return PlaneTree::from_degree_sequence(std::move(d));
}

// --- bridge counters ---------------------------------------------------------------

long long count_tree_on_bridge(const DegreeSequence& bridge, const DegreeSequence& target_dfs) {
  const std::size_t n = bridge.size();
  const std::size_t m = target_dfs.size();
  if (m > n) return 0;
  // KMP over the cyclic extension; window starts 0..n-1.
  std::vector<int> fail(m, 0);
  for (std::size_t i = 1; i < m; ++i) {
    int j = fail[i - 1];
    while (j > 0 && target_dfs[i] != target_dfs[static_cast<std::size_t>(j)]) {
      j = fail[static_cast<std::size_t>(j - 1)];
    }
    if (target_dfs[i] == target_dfs[static_cast<std::size_t>(j)]) ++j;
    fail[i] = j;
  }
  long long count = 0;
  int j = 0;
  const std::size_t limit = n + m - 1;
  for (std::size_t i = 0; i < limit; ++i) {
    const int c = bridge[i < n ? i : i - n];
    while (j > 0 && c != target_dfs[static_cast<std::size_t>(j)]) {
      j = fail[static_cast<std::size_t>(j - 1)];
    }
    if (c == target_dfs[static_cast<std::size_t>(j)]) ++j;
    if (j == static_cast<int>(m)) {
      ++count;  // match ending at i starts at i-m+1 <= n-1 by construction
      j = fail[static_cast<std::size_t>(j - 1)];
    }
  }
  return count;
}

namespace {

thread_local DegreeSequence t_rotated;

const DegreeSequence& rotate_bridge(const DegreeSequence& bridge) {
  const std::size_t start = treecore::cycle_rotation_offset(bridge);
  t_rotated.resize(bridge.size());
  std::rotate_copy(bridge.begin(), bridge.begin() + static_cast<std::ptrdiff_t>(start),
                   bridge.end(), t_rotated.begin());
  return t_rotated;
}

}  // namespace

long long count_statistic_on_bridge(const DegreeSequence& bridge, const DegreeStatistic& bm) {
  const DegreeSequence& rot = rotate_bridge(bridge);
  const long long m = bm.size();
  if (m > static_cast<long long>(rot.size())) return 0;
  std::vector<long long> sizes = treecore::fringe_sizes(rot);
  long long count = 0;
  std::map<int, long long> tally;
  for (std::size_t v = 0; v < rot.size(); ++v) {
    if (sizes[v] != m) continue;
    tally.clear();
    for (std::size_t j = v; j < v + static_cast<std::size_t>(m); ++j) ++tally[rot[j]];
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

long long count_size_on_bridge(const DegreeSequence& bridge, long long m) {
  const DegreeSequence& rot = rotate_bridge(bridge);
  std::vector<long long> sizes = treecore::fringe_sizes(rot);
  long long count = 0;
  for (long long s : sizes) {
    if (s == m) ++count;
  }
  return count;
}

// --- config ---------------------------------------------------------------------------

void ScenarioConfig::validate() const {
  if (schema_version != 1) raise(errc::config_error, "unsupported schema_version");
  if (grid.empty()) raise(errc::config_error, "grid must be nonempty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) raise(errc::config_error, "grid must be strictly increasing");
  }
  if (replicates < 1) raise(errc::config_error, "replicates must be >= 1");
  if (family == Family::gw_conditioned) {
    if (std::holds_alternative<DegreeStatistic>(degrees) ||
        std::holds_alternative<StarFamily>(degrees) ||
        std::holds_alternative<PeriodicFamily>(degrees)) {
      raise(errc::config_error, "gw_conditioned needs an offspring law");
    }
    if (std::holds_alternative<SelfStatisticRule>(target)) {
      raise(errc::config_error, "self-statistic targets need a fixed-statistic family");
    }
  }
  if (std::holds_alternative<DegreeStatistic>(degrees) && grid.size() != 1) {
    raise(errc::config_error, "an explicit statistic fixes the grid to one point");
  }
}

namespace {

json target_to_json(const TargetSpec& t) {
  json j;
  if (const auto* tree = std::get_if<PlaneTree>(&t)) {
    j["tree"] = tree->to_string();
  } else if (const auto* st = std::get_if<DegreeStatistic>(&t)) {
    j["statistic"] = st->to_string();
  } else if (const auto* size = std::get_if<long long>(&t)) {
    j["size"] = *size;
  } else if (const auto* rule = std::get_if<SizeRule>(&t)) {
    j["size_rule"] = {{"a", rule->a},
                      {"exponent", rule->exponent},
                      {"parity", rule->parity == -1  ? "none"
                                 : rule->parity == 0 ? "even"
                                                     : "odd"}};
  } else if (const auto* br = std::get_if<BroomRule>(&t)) {
    j["broom_rule"] = {{"lambda", br->lambda}};
  } else if (const auto* bs = std::get_if<BroomStatisticRule>(&t)) {
    j["broom_statistic_rule"] = {{"lambda", bs->lambda}};
  } else {
    j["self_statistic"] = true;
  }
  return j;
}

TargetSpec target_from_json(const json& j) {
  if (j.contains("tree")) return PlaneTree::parse(j.at("tree").get<std::string>());
  if (j.contains("statistic")) {
    return DegreeStatistic::parse(j.at("statistic").get<std::string>());
  }
  if (j.contains("size")) return j.at("size").get<long long>();
  if (j.contains("size_rule")) {
    const json& r = j.at("size_rule");
    SizeRule rule;
    rule.a = r.value("a", 1.0);
    rule.exponent = r.value("exponent", 2.0 / 3.0);
    std::string parity = r.value("parity", "none");
    rule.parity = parity == "even" ? 0 : parity == "odd" ? 1 : -1;
    return rule;
  }
  if (j.contains("broom_rule")) {
    return BroomRule{j.at("broom_rule").value("lambda", 1.0)};
  }
  if (j.contains("broom_statistic_rule")) {
    return BroomStatisticRule{j.at("broom_statistic_rule").value("lambda", 1.0)};
  }
  if (j.contains("self_statistic")) return SelfStatisticRule{};
  raise(errc::config_error, "unrecognized target spec");
}

json degrees_to_json(const DegreeSpec& d) {
  json j;
  if (const auto* st = std::get_if<DegreeStatistic>(&d)) {
    j["statistic"] = st->to_string();
  } else if (const auto* law = std::get_if<DegreeDistribution>(&d)) {
    json m = json::object();
    for (int i : law->support()) m[std::to_string(i)] = law->prob(i);
    j["law"] = m;
  } else if (const auto* pt = std::get_if<PowerTail>(&d)) {
    j["power_tail"] = {{"alpha", pt->alpha}, {"truncation", pt->truncation}};
  } else if (std::holds_alternative<StarFamily>(d)) {
    j["star_family"] = true;
  } else if (const auto* pf = std::get_if<PeriodicFamily>(&d)) {
    j["periodic_family"] = {{"b", pf->b}};
  }
  return j;
}

DegreeSpec degrees_from_json(const json& j) {
  if (j.contains("statistic")) {
    return DegreeStatistic::parse(j.at("statistic").get<std::string>());
  }
  if (j.contains("law")) {
    std::vector<std::pair<int, double>> pmf;
    for (const auto& [key, val] : j.at("law").items()) {
      pmf.emplace_back(std::stoi(key), val.get<double>());
    }
    return DegreeDistribution::from_real(std::move(pmf), 1e-6);
  }
  if (j.contains("power_tail")) {
    const json& p = j.at("power_tail");
    return PowerTail{p.value("alpha", 1.5), p.value("truncation", 1'000'000LL)};
  }
  if (j.contains("star_family")) return StarFamily{};
  if (j.contains("periodic_family")) {
    return PeriodicFamily{j.at("periodic_family").value("b", 2.0)};
  }
  raise(errc::config_error, "unrecognized degree spec");
}

}  // namespace

std::string ScenarioConfig::to_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["name"] = name;
  j["family"] = family == Family::fixed_statistic ? "fixed_statistic" : "gw_conditioned";
  j["degrees"] = degrees_to_json(degrees);
  j["grid"] = grid;
  j["target"] = target_to_json(target);
  j["replicates"] = replicates;
  j["master_seed"] = master_seed;
  // workers is a scheduling knob, not part of the experiment's identity
  j["max_attempts"] = max_attempts;
  j["include_timings"] = include_timings;
  if (expected_regime) j["expected_regime"] = *expected_regime;
  return j.dump();
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    raise(errc::config_error, std::string("config parse failure: ") + e.what());
  }
  ScenarioConfig c;
  try {
    c.schema_version = j.value("schema_version", 1);
    c.name = j.value("name", std::string("scenario"));
    std::string fam = j.value("family", std::string("fixed_statistic"));
    if (fam == "fixed_statistic") {
      c.family = Family::fixed_statistic;
    } else if (fam == "gw_conditioned") {
      c.family = Family::gw_conditioned;
    } else {
      raise(errc::config_error, "unknown family '" + fam + "'");
    }
    c.degrees = degrees_from_json(j.at("degrees"));
    c.grid = j.at("grid").get<std::vector<long long>>();
    c.target = target_from_json(j.at("target"));
    c.replicates = j.value("replicates", 2000LL);
    c.master_seed = j.value("master_seed", static_cast<std::uint64_t>(20240817));
    c.workers = j.value("workers", 0);
    c.max_attempts = j.value("max_attempts", 2'000'000LL);
    c.include_timings = j.value("include_timings", false);
    if (j.contains("expected_regime")) {
      c.expected_regime = j.at("expected_regime").get<std::string>();
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    raise(errc::config_error, std::string("config field failure: ") + e.what());
  }
  c.validate();
  return c;
}

ScenarioConfig ScenarioConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::io_failure, "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

// --- scenario runner ---------------------------------------------------------------------

namespace {

struct ResolvedTarget {
  enum class Kind { tree, statistic, size } kind;
  std::optional<PlaneTree> tree;
  std::optional<DegreeStatistic> stat;
  long long m = 0;
  std::string text;
};

long long tune_broom_chain(const DegreeDistribution& p, long long n, double lambda) {
  const double p0 = p.prob(0), p1 = p.prob(1), p2 = p.prob(2);
  if (p0 <= 0 || p1 <= 0 || p2 <= 0) {
    raise(errc::config_error, "broom targets need mass on degrees 0, 1 and 2");
  }
  double L = (std::log(static_cast<double>(n) * p0 * p0 * p2) - std::log(lambda)) /
             std::log(1.0 / p1);
  return std::max<long long>(0, std::llround(L));
}

long long tune_broom_statistic_chain(const DegreeDistribution& p, long long n, double lambda) {
  const double p0 = p.prob(0), p1 = p.prob(1), p2 = p.prob(2);
  if (p0 <= 0 || p1 <= 0 || p2 <= 0) {
    raise(errc::config_error, "broom targets need mass on degrees 0, 1 and 2");
  }
  double best = std::numeric_limits<double>::infinity();
  long long best_l = 0;
  for (long long l = 0; l <= 4000; ++l) {
    double classes = (static_cast<double>(l) + 2) * (static_cast<double>(l) + 1) / 2.0;
    double lam = static_cast<double>(n) * p0 * p0 * p2 *
                 std::pow(p1, static_cast<double>(l)) * classes;
    double err = std::abs(std::log(lam) - std::log(lambda));
    if (err < best) {
      best = err;
      best_l = l;
    }
  }
  return best_l;
}

ResolvedTarget resolve_target(const TargetSpec& spec, const DegreeDistribution& p,
                              const DegreeStatistic* bn, long long n) {
  ResolvedTarget out{ResolvedTarget::Kind::size, {}, {}, 0, ""};
  if (const auto* tree = std::get_if<PlaneTree>(&spec)) {
    out.kind = ResolvedTarget::Kind::tree;
    out.tree = *tree;
  } else if (const auto* st = std::get_if<DegreeStatistic>(&spec)) {
    out.kind = ResolvedTarget::Kind::statistic;
    out.stat = *st;
  } else if (const auto* size = std::get_if<long long>(&spec)) {
    out.kind = ResolvedTarget::Kind::size;
    out.m = *size;
  } else if (const auto* rule = std::get_if<SizeRule>(&spec)) {
    out.kind = ResolvedTarget::Kind::size;
    out.m = apply_size_rule(*rule, n);
  } else if (const auto* br = std::get_if<BroomRule>(&spec)) {
    out.kind = ResolvedTarget::Kind::tree;
    out.tree = broom_tree(tune_broom_chain(p, n, br->lambda));
  } else if (const auto* bs = std::get_if<BroomStatisticRule>(&spec)) {
    out.kind = ResolvedTarget::Kind::statistic;
    out.stat = broom_tree(tune_broom_statistic_chain(p, n, bs->lambda)).statistic();
  } else {
    if (!bn) raise(errc::config_error, "self-statistic target without a statistic family");
    out.kind = ResolvedTarget::Kind::statistic;
    out.stat = *bn;
  }
  switch (out.kind) {
    case ResolvedTarget::Kind::tree:
      out.m = out.tree->size();
      out.text = "tree:" + out.tree->to_string();
      break;
    case ResolvedTarget::Kind::statistic:
      out.m = out.stat->size();
      out.text = "statistic:" + out.stat->to_string();
      break;
    case ResolvedTarget::Kind::size:
      out.text = "size:" + std::to_string(out.m);
      break;
  }
  if (out.m < 1 || out.m > n) raise(errc::config_error, "target does not fit the grid point");
  return out;
}

long long count_on_bridge(const DegreeSequence& bridge, const ResolvedTarget& target) {
  switch (target.kind) {
    case ResolvedTarget::Kind::tree:
      return count_tree_on_bridge(bridge, target.tree->degrees());
    case ResolvedTarget::Kind::statistic:
      return count_statistic_on_bridge(bridge, *target.stat);
    case ResolvedTarget::Kind::size:
      return count_size_on_bridge(bridge, target.m);
  }
  return 0;
}

struct WorkerResult {
  Histogram histogram;
  long long attempts = 0;
};

}  // namespace

ExperimentReport run_scenario(const ScenarioConfig& config) {
  config.validate();
  ExperimentReport report;
  report.scenario = config.name;
  report.config_json = config.to_json();
  report.include_timings = config.include_timings;

  approx::RegimeScenario regime;
  const bool gw = config.family == Family::gw_conditioned;

  for (std::size_t gi = 0; gi < config.grid.size(); ++gi) {
    const long long n = config.grid[gi];
    GridPointReport point;
    point.grid_value = n;
    point.replicates = config.replicates;
    point.point_seed = combine_seed(config.master_seed, gi);

    // resolve the degree family at this grid point
    std::optional<DegreeStatistic> bn;
    DegreeDistribution p = [&]() -> DegreeDistribution {
      if (const auto* st = std::get_if<DegreeStatistic>(&config.degrees)) {
        if (st->size() != n) raise(errc::config_error, "grid must equal the statistic size");
        bn = *st;
      } else if (const auto* law = std::get_if<DegreeDistribution>(&config.degrees)) {
        if (gw) return *law;
        bn = scale_law_to_statistic(*law, n);
      } else if (const auto* pt = std::get_if<PowerTail>(&config.degrees)) {
        DegreeDistribution d = power_tail_distribution(*pt);
        if (gw) return d;
        bn = scale_law_to_statistic(d, n);
      } else if (std::holds_alternative<StarFamily>(config.degrees)) {
        bn = star_statistic(n);
      } else if (const auto* pf = std::get_if<PeriodicFamily>(&config.degrees)) {
        bn = periodic_statistic(pf->b, n);
      }
      return treecore::empirical_distribution(*bn);
    }();
    if (bn) point.statistic = bn->to_string();

    ResolvedTarget target = resolve_target(config.target, p, bn ? &*bn : nullptr, n);
    point.target = target.text;
    point.resolved_m = target.m;

    // regime bookkeeping
    if (gw) {
      regime.offspring = p;
      regime.sizes.push_back(n);
    } else {
      regime.statistics.push_back(*bn);
    }
    switch (target.kind) {
      case ResolvedTarget::Kind::tree: regime.target_trees.push_back(*target.tree); break;
      case ResolvedTarget::Kind::statistic:
        regime.target_statistics.push_back(*target.stat);
        break;
      case ResolvedTarget::Kind::size: regime.target_sizes.push_back(target.m); break;
    }

    const auto t0 = std::chrono::steady_clock::now();

    // Monte Carlo: replicate r always runs on stream r of the point seed, so
    // the merged histogram does not depend on the worker count.
    int workers = config.workers > 0
                      ? config.workers
                      : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<int>(
        std::min<long long>(workers, std::max<long long>(1, config.replicates)));
    std::vector<WorkerResult> results(static_cast<std::size_t>(workers));
    std::optional<samplers::ConditionedGwSampler> gw_sampler;
    DegreeSequence layout;
    if (gw) {
      gw_sampler.emplace(p, n);
    } else {
      layout = samplers::degree_layout(*bn);
    }

    auto body = [&](int w) {
      WorkerResult& res = results[static_cast<std::size_t>(w)];
      DegreeSequence bridge = layout;  // private copy; GW fills it per replicate
      const long long lo = config.replicates * w / workers;
      const long long hi = config.replicates * (w + 1) / workers;
      for (long long r = lo; r < hi; ++r) {
        samplers::RandomStream rng(point.point_seed, static_cast<std::uint64_t>(r));
        if (gw) {
          gw_sampler->sample_bridge(bridge, rng, config.max_attempts);
          res.attempts += gw_sampler->last_attempts();
        } else {
          // restart from the canonical layout so replicate r sees the same
          // arrangement no matter which worker ran before it
          std::copy(layout.begin(), layout.end(), bridge.begin());
          samplers::shuffle(bridge, rng);
        }
        res.histogram.add(count_on_bridge(bridge, target));
      }
    };
    if (workers == 1) {
      body(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) pool.emplace_back(body, w);
      for (auto& th : pool) th.join();
    }
    long long attempts = 0;
    for (const auto& res : results) {
      point.histogram.merge(res.histogram);
      attempts += res.attempts;
    }
    point.empirical_mean = point.histogram.mean();
    point.empirical_variance = point.histogram.variance();

    // exact moments where the formulas reach
    try {
      if (!gw) {
        if (target.kind == ResolvedTarget::Kind::tree) {
          ExactScalar mean = exactstats::expected_count_tree(*bn, *target.tree);
          ExactScalar m2 = exactstats::factorial_moment_tree(*bn, *target.tree, 2).value;
          point.exact_mean = mean.value();
          point.exact_variance = exactstats::variance_from_factorial(mean, m2).as_double();
        } else if (target.kind == ResolvedTarget::Kind::statistic) {
          ExactScalar mean = exactstats::factorial_moment_statistic(*bn, *target.stat, 1).value;
          ExactScalar m2 = exactstats::factorial_moment_statistic(*bn, *target.stat, 2).value;
          point.exact_mean = mean.value();
          point.exact_variance = exactstats::variance_from_factorial(mean, m2).as_double();
        } else {
          ExactScalar mean = exactstats::expected_count_size(*bn, target.m);
          point.exact_mean = mean.value();
          if (bn->size() <= 2'500 && 2 * target.m <= bn->size()) {
            ExactScalar m2 = exactstats::factorial_moment_size(*bn, target.m, 2).value;
            point.exact_variance = exactstats::variance_from_factorial(mean, m2).as_double();
          } else {
            point.exact_degraded = true;
          }
        }
      } else if (target.kind == ResolvedTarget::Kind::tree &&
                 (p.support().size() <= 3 || n <= 3'000)) {
        ExactScalar mean = exactstats::gw_factorial_moment(p, n, *target.tree, 1);
        ExactScalar m2 = exactstats::gw_factorial_moment(p, n, *target.tree, 2);
        point.exact_mean = mean.value();
        point.exact_variance = exactstats::variance_from_factorial(mean, m2).as_double();
      } else {
        point.exact_degraded = true;
      }
    } catch (const Error& e) {
      if (e.code() != errc::budget_exceeded && e.code() != errc::precision_loss) throw;
      point.exact_degraded = true;
    }

    // predictions and bounds
    double lambda_pred = 0;
    if (target.kind == ResolvedTarget::Kind::size) {
      auto asym = approx::size_expectation_asymptotic(n, target.m, p.variance());
      lambda_pred = asym.value;
      point.diagnostics.emplace_back("lm1_outside_regime", asym.outside_regime ? 1.0 : 0.0);
    } else if (target.kind == ResolvedTarget::Kind::tree) {
      lambda_pred = static_cast<double>(n) * exactstats::pi_p_tree(p, *target.tree).value();
    } else {
      lambda_pred =
          static_cast<double>(n) * exactstats::pi_p_statistic(p, *target.stat).class_total.value();
    }
    if (lambda_pred > 30.0) {
      point.predicted_mu = lambda_pred;
      point.predicted_sigma = std::sqrt(lambda_pred);
    } else {
      point.predicted_lambda = lambda_pred;
    }

    const double mu_ref = point.exact_mean.value_or(lambda_pred);
    point.tv_poisson = approx::tv_distance_poisson(point.histogram.counts, mu_ref);
    double var_ref = point.exact_variance.value_or(lambda_pred);
    if (var_ref > 9.0) {
      double d = approx::ks_statistic_normal(point.histogram.counts, mu_ref, std::sqrt(var_ref));
      point.ks_normal = d;
      point.diagnostics.emplace_back(
          "ks_pvalue",
          approx::kolmogorov_q(std::sqrt(static_cast<double>(point.histogram.total)) * d));
    }

    if (!gw && target.kind == ResolvedTarget::Kind::tree) {
      approx::TVBoundReport bounds = approx::stein_delta(*bn, *target.tree);
      point.delta_bound = bounds.delta.value();
      point.cai_devroye = bounds.cai_devroye_bound;
      point.diagnostics.emplace_back("rny0_sum", bounds.rny0_sum);
    } else if (!gw && target.kind == ResolvedTarget::Kind::statistic) {
      approx::TVBoundReport bounds = approx::statistic_tv_bound(*bn, *target.stat);
      point.delta_bound = bounds.delta.value();
      point.diagnostics.emplace_back("rny0_sum", bounds.rny0_sum);
    }

    // family diagnostics
    auto span = p.span();
    point.diagnostics.emplace_back("span", span ? static_cast<double>(*span) : -1.0);
    point.diagnostics.emplace_back("sigma2", p.variance());
    point.diagnostics.emplace_back("mean_p", p.mean());
    double maxp = 0;
    for (int i : p.support()) maxp = std::max(maxp, p.prob(i));
    point.diagnostics.emplace_back("max_p", maxp);
    if (!gw) {
      std::vector<long long> degs;
      degs.reserve(static_cast<std::size_t>(n));
      for (const auto& [deg, mult] : bn->entries()) {
        degs.insert(degs.end(), static_cast<std::size_t>(mult), deg);
      }
      if (target.m < n) {
        point.diagnostics.emplace_back("lindeberg@1",
                                       approx::lindeberg_diagnostic(degs, target.m, 1.0));
      }
      if (target.kind == ResolvedTarget::Kind::size && target.m < n && n <= 400'000) {
        // local-limit check along the 6-sigma window, exact vs Gaussian
        try {
          auto vc = oracle::degree_multiset(*bn);
          auto pred0 = approx::llt_prediction(degs, target.m, 0);
          const double sd = std::sqrt(pred0.sigma_hat2);
          const long long klo =
              std::max<long long>(0, static_cast<long long>(pred0.mu_hat - 6 * sd));
          const long long khi = static_cast<long long>(pred0.mu_hat + 6 * sd) + 1;
          auto window = oracle::swor_sum_pmf_window(vc, target.m, klo, khi,
                                                    oracle::ArithmeticMode::logspace);
          double sup_err = 0;
          for (long long k = klo; k <= khi; ++k) {
            auto pred = approx::llt_prediction(degs, target.m, k);
            double scaled = std::sqrt(2 * M_PI * pred.sigma_hat2) *
                            window.prob_at(k).value();
            double gauss = pred.predicted_prob * std::sqrt(2 * M_PI * pred.sigma_hat2);
            sup_err = std::max(sup_err, std::abs(scaled - gauss));
          }
          point.diagnostics.emplace_back("llt_sup_err", sup_err);
        } catch (const Error& e) {
          if (e.code() != errc::budget_exceeded) throw;
        }
      }
    }
    if (gw && attempts > 0) {
      point.diagnostics.emplace_back(
          "gw_mean_attempts",
          static_cast<double>(attempts) / static_cast<double>(config.replicates));
    }

    point.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              t0)
                        .count();
    report.points.push_back(std::move(point));
  }

  approx::RegimePrediction prediction = approx::classify_regime(regime);
  report.regime_flag = prediction.open_problem ? "open-problem"
                                               : approx::regime_name(prediction.regime);
  return report;
}

// --- condition diagnostics -----------------------------------------------------------------

std::vector<ConditionRow> condition_diagnostics(const std::vector<DegreeStatistic>& stats) {
  if (stats.empty()) raise(errc::empty_input, "no statistics given");
  const DegreeDistribution ref = treecore::empirical_distribution(stats.back());
  std::vector<ConditionRow> rows;
  rows.reserve(stats.size());
  for (const DegreeStatistic& bn : stats) {
    DegreeDistribution p = treecore::empirical_distribution(bn);
    ConditionRow row;
    row.size = bn.size();
    double sup = 0;
    for (int i : p.support()) sup = std::max(sup, std::abs(p.prob(i) - ref.prob(i)));
    for (int i : ref.support()) sup = std::max(sup, std::abs(p.prob(i) - ref.prob(i)));
    row.sup_p_delta = sup;
    row.second_moment = p.second_moment();
    row.variance = p.variance();
    auto span = p.span();
    row.span = span ? static_cast<double>(*span) : std::numeric_limits<double>::infinity();
    {
      // limit-span proxy: ignore support points carrying < 1% of the mass
      long long g = 0;
      int base = -1;
      for (int i : p.support()) {
        if (p.prob(i) < 0.01) continue;
        if (base < 0) {
          base = i;
        } else {
          g = std::gcd(g, static_cast<long long>(i - base));
        }
      }
      row.dominant_span = base < 0 ? row.span
                          : g == 0 ? std::numeric_limits<double>::infinity()
                                   : static_cast<double>(g);
    }
    double maxp = 0;
    for (int i : p.support()) maxp = std::max(maxp, p.prob(i));
    row.max_p = maxp;
    rows.push_back(row);
  }
  return rows;
}

// --- report serialization --------------------------------------------------------------------

namespace {

json point_to_json(const GridPointReport& p, bool include_timings) {
  json j;
  j["grid_value"] = p.grid_value;
  j["statistic"] = p.statistic;
  j["target"] = p.target;
  j["m"] = p.resolved_m;
  j["replicates"] = p.replicates;
  json hist = json::array();
  for (const auto& [k, c] : p.histogram.counts) hist.push_back({k, c});
  j["histogram"] = hist;
  j["empirical_mean"] = p.empirical_mean;
  j["empirical_variance"] = p.empirical_variance;
  if (p.exact_mean) j["exact_mean"] = *p.exact_mean;
  if (p.exact_variance) j["exact_variance"] = *p.exact_variance;
  j["exact_degraded"] = p.exact_degraded;
  if (p.predicted_lambda) j["predicted_lambda"] = *p.predicted_lambda;
  if (p.predicted_mu) j["predicted_mu"] = *p.predicted_mu;
  if (p.predicted_sigma) j["predicted_sigma"] = *p.predicted_sigma;
  if (p.tv_poisson) j["tv_poisson"] = *p.tv_poisson;
  if (p.ks_normal) j["ks_normal"] = *p.ks_normal;
  if (p.delta_bound) j["delta"] = *p.delta_bound;
  if (p.cai_devroye) j["cai_devroye"] = *p.cai_devroye;
  json diag = json::object();
  for (const auto& [name, value] : p.diagnostics) diag[name] = value;
  j["diagnostics"] = diag;
  if (include_timings) j["wall_ms"] = p.wall_ms;
  j["point_seed"] = p.point_seed;
  return j;
}

GridPointReport point_from_json(const json& j) {
  GridPointReport p;
  p.grid_value = j.at("grid_value").get<long long>();
  p.statistic = j.value("statistic", std::string());
  p.target = j.value("target", std::string());
  p.resolved_m = j.value("m", 0LL);
  p.replicates = j.value("replicates", 0LL);
  for (const auto& kv : j.at("histogram")) {
    p.histogram.add(kv.at(0).get<long long>(), kv.at(1).get<long long>());
  }
  p.empirical_mean = j.value("empirical_mean", 0.0);
  p.empirical_variance = j.value("empirical_variance", 0.0);
  if (j.contains("exact_mean")) p.exact_mean = j.at("exact_mean").get<double>();
  if (j.contains("exact_variance")) p.exact_variance = j.at("exact_variance").get<double>();
  p.exact_degraded = j.value("exact_degraded", false);
  if (j.contains("predicted_lambda")) {
    p.predicted_lambda = j.at("predicted_lambda").get<double>();
  }
  if (j.contains("predicted_mu")) p.predicted_mu = j.at("predicted_mu").get<double>();
  if (j.contains("predicted_sigma")) p.predicted_sigma = j.at("predicted_sigma").get<double>();
  if (j.contains("tv_poisson")) p.tv_poisson = j.at("tv_poisson").get<double>();
  if (j.contains("ks_normal")) p.ks_normal = j.at("ks_normal").get<double>();
  if (j.contains("delta")) p.delta_bound = j.at("delta").get<double>();
  if (j.contains("cai_devroye")) p.cai_devroye = j.at("cai_devroye").get<double>();
  for (const auto& [name, value] : j.at("diagnostics").items()) {
    p.diagnostics.emplace_back(name, value.get<double>());
  }
  p.wall_ms = j.value("wall_ms", 0.0);
  p.point_seed = j.value("point_seed", static_cast<std::uint64_t>(0));
  return p;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

template <typename T>
std::string opt_str(const std::optional<T>& v) {
  if (!v) return "";
  std::ostringstream os;
  os.precision(17);
  os << *v;
  return os.str();
}

}  // namespace

std::string ExperimentReport::to_json() const {
  json j;
  j["scenario"] = scenario;
  j["regime_flag"] = regime_flag;
  j["config"] = json::parse(config_json);
  json pts = json::array();
  for (const auto& p : points) pts.push_back(point_to_json(p, include_timings));
  j["points"] = pts;
  return j.dump(2);
}

std::string ExperimentReport::csv_header() {
  return "scenario,grid_value,statistic,target,m,replicates,emp_mean,emp_variance,"
         "exact_mean,exact_variance,predicted_lambda,predicted_mu,predicted_sigma,"
         "tv_poisson,ks_normal,delta,cai_devroye,wall_ms,point_seed,histogram";
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << csv_header() << "\n";
  for (const auto& p : points) {
    os << csv_escape(scenario) << ',' << p.grid_value << ',' << csv_escape(p.statistic) << ','
       << csv_escape(p.target) << ',' << p.resolved_m << ',' << p.replicates << ','
       << p.empirical_mean << ',' << p.empirical_variance << ',' << opt_str(p.exact_mean) << ','
       << opt_str(p.exact_variance) << ',' << opt_str(p.predicted_lambda) << ','
       << opt_str(p.predicted_mu) << ',' << opt_str(p.predicted_sigma) << ','
       << opt_str(p.tv_poisson) << ',' << opt_str(p.ks_normal) << ',' << opt_str(p.delta_bound)
       << ',' << opt_str(p.cai_devroye) << ',' << p.wall_ms << ',' << p.point_seed << ','
       << p.histogram.to_string() << "\n";
  }
  return os.str();
}

ExperimentReport ExperimentReport::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    raise(errc::io_failure, std::string("report parse failure: ") + e.what());
  }
  ExperimentReport rep;
  rep.scenario = j.value("scenario", std::string());
  rep.regime_flag = j.value("regime_flag", std::string());
  rep.config_json = j.at("config").dump();
  rep.include_timings = j.at("config").value("include_timings", false);
  for (const auto& pj : j.at("points")) rep.points.push_back(point_from_json(pj));
  return rep;
}

std::vector<std::string> emit_report(const ExperimentReport& report, ReportFormat format,
                                     const std::string& out_base) {
  std::vector<std::string> written;
  const std::string path = out_base + (format == ReportFormat::json ? ".json" : ".csv");
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::io_failure, "cannot open " + path + " for writing");
  out << (format == ReportFormat::json ? report.to_json() : report.to_csv());
  if (!out) raise(errc::io_failure, "short write to " + path);
  written.push_back(path);
  return written;
}

}  // namespace fringetrees::harness
