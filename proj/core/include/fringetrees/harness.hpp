#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fringetrees/approx.hpp"
#include "fringetrees/samplers.hpp"
#include "fringetrees/treecore.hpp"

namespace fringetrees::harness {

using treecore::DegreeDistribution;
using treecore::DegreeSequence;
using treecore::DegreeStatistic;
using treecore::PlaneTree;

// --- scenario configuration ---------------------------------------------------

// m(n) = round(a * n^exponent), nearest with ties to even; optional parity pin.
struct SizeRule {
  double a = 1.0;
  double exponent = 2.0 / 3.0;
  int parity = -1;  // -1 none, 0 even, 1 odd
};
long long apply_size_rule(const SizeRule& rule, long long n);

// Truncated power tail p_i ~ i^{-alpha-1}, normalized to offspring mean 1.
struct PowerTail {
  double alpha = 1.5;
  long long truncation = 1'000'000;
};

// Targets that grow with the grid: a broom is a 1-chain ending in a cherry;
// the chain length is tuned per grid point so |n| pi stays near `lambda`.
struct BroomRule {
  double lambda = 1.0;
};
struct BroomStatisticRule {
  double lambda = 1.0;
};
// The host's own statistic (the whole-tree count; Example EX1's target).
struct SelfStatisticRule {};

using TargetSpec = std::variant<PlaneTree, DegreeStatistic, long long, SizeRule, BroomRule,
                                BroomStatisticRule, SelfStatisticRule>;

// Star statistics {0: k-1, k-1: 1} indexed by the grid.
struct StarFamily {};
// Degrees on {0,1,2} with n(1) ~ b n^{1/3} (the periodic-size-count family).
struct PeriodicFamily {
  double b = 2.0;
};

using DegreeSpec =
    std::variant<DegreeStatistic, DegreeDistribution, PowerTail, StarFamily, PeriodicFamily>;

enum class Family { fixed_statistic, gw_conditioned };

struct ScenarioConfig {
  int schema_version = 1;
  std::string name = "scenario";
  Family family = Family::fixed_statistic;
  DegreeSpec degrees;
  std::vector<long long> grid;  // statistic sizes (kappa grid) or GW sizes (n grid)
  TargetSpec target;
  long long replicates = 2000;
  std::uint64_t master_seed = 20240817;
  int workers = 0;  // 0 = hardware concurrency
  long long max_attempts = 2'000'000;
  bool include_timings = false;  // wall times in JSON break byte-identity
  std::optional<std::string> expected_regime;

  void validate() const;
  static ScenarioConfig from_json_text(const std::string& text);
  static ScenarioConfig from_json_file(const std::string& path);
  std::string to_json() const;
};

// --- reports --------------------------------------------------------------------

struct Histogram {
  std::map<long long, long long> counts;
  long long total = 0;

  void add(long long k, long long c = 1) {
    counts[k] += c;
    total += c;
  }
  void merge(const Histogram& o) {
    for (const auto& [k, c] : o.counts) counts[k] += c;
    total += o.total;
  }
  double mean() const;
  double variance() const;
  std::string to_string() const;  // "k:count;k:count"
};

struct GridPointReport {
  long long grid_value = 0;
  std::string statistic;  // realized degree statistic (empty for GW families)
  std::string target;
  long long resolved_m = 0;  // window length of the resolved target
  long long replicates = 0;
  Histogram histogram;
  double empirical_mean = 0;
  double empirical_variance = 0;
  std::optional<double> exact_mean;
  std::optional<double> exact_variance;
  bool exact_degraded = false;  // a budget or model limit left exact fields absent
  std::optional<double> predicted_lambda;
  std::optional<double> predicted_mu;
  std::optional<double> predicted_sigma;
  std::optional<double> tv_poisson;
  std::optional<double> ks_normal;
  std::optional<double> delta_bound;
  std::optional<double> cai_devroye;
  std::vector<std::pair<std::string, double>> diagnostics;
  double wall_ms = 0;
  std::uint64_t point_seed = 0;  // master seed combined with the grid index
};

struct ExperimentReport {
  std::string scenario;
  std::string config_json;
  std::string regime_flag;  // classify_regime outcome or "open-problem"
  bool include_timings = false;
  std::vector<GridPointReport> points;

  std::string to_json() const;
  static ExperimentReport from_json_text(const std::string& text);
  static std::string csv_header();
  std::string to_csv() const;
};

ExperimentReport run_scenario(const ScenarioConfig& config);

// --- diagnostics ------------------------------------------------------------------

struct ConditionRow {
  long long size = 0;
  double sup_p_delta = 0;     // sup_i |p_i(n_kappa) - p_i(n_last)|
  double second_moment = 0;   // sum i^2 p_i(n_kappa)
  double variance = 0;        // Var D_kappa
  double span = 0;            // inf encodes a single-point support
  double dominant_span = 0;   // span of the >= 1% support (limit-span proxy)
  double max_p = 0;           // max_i p_i(n_kappa)
};
std::vector<ConditionRow> condition_diagnostics(const std::vector<DegreeStatistic>& stats);

enum class ReportFormat { json, csv };
// Writes <out_base>.json or <out_base>.csv; returns the paths written.
std::vector<std::string> emit_report(const ExperimentReport& report, ReportFormat format,
                                     const std::string& out_base);

// --- built-in scenario suite --------------------------------------------------------

std::vector<std::string> preset_names();
ScenarioConfig preset(const std::string& name);

// --- helpers (exposed for tests and the CLI) -----------------------------------------

// Integer counts approximating p at total size n, nudged onto the tree identity.
DegreeStatistic scale_law_to_statistic(const DegreeDistribution& p, long long n);
DegreeDistribution power_tail_distribution(const PowerTail& spec);
DegreeStatistic star_statistic(long long kappa);
DegreeStatistic periodic_statistic(double b, long long n);
PlaneTree broom_tree(long long chain);

// Cyclic-window counters on a bridge; each equals the corresponding counter
// on the decoded tree.
long long count_tree_on_bridge(const DegreeSequence& bridge, const DegreeSequence& target_dfs);
long long count_statistic_on_bridge(const DegreeSequence& bridge, const DegreeStatistic& bm);
long long count_size_on_bridge(const DegreeSequence& bridge, long long m);

std::uint64_t combine_seed(std::uint64_t master, std::uint64_t salt);

}  // namespace fringetrees::harness
