// fringetrees: exact statistics and seeded experiments for fringe subtree
// counts in random plane trees with a given degree statistic.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "fringetrees/approx.hpp"
#include "fringetrees/exactstats.hpp"
#include "fringetrees/harness.hpp"
#include "fringetrees/oracle.hpp"
#include "fringetrees/samplers.hpp"
#include "fringetrees/treecore.hpp"

using namespace fringetrees;
using treecore::DegreeDistribution;
using treecore::DegreeStatistic;
using treecore::PlaneTree;

namespace {

int exit_code_for(errc code) {
  switch (code) {
    case errc::budget_exceeded:
    case errc::limit_exceeded:
    case errc::attempts_exhausted:
      return 3;
    case errc::io_failure:
      return 4;
    default:
      return 2;  // configuration / input errors
  }
}

DegreeDistribution parse_law(const std::string& text) {
  // "deg:prob,deg:prob" with probabilities summing to 1
  std::vector<std::pair<int, double>> pmf;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string item = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    std::size_t colon = item.find(':');
    if (colon == std::string::npos) {
      raise(errc::config_error, "law entries look like deg:prob, got '" + item + "'");
    }
    pmf.emplace_back(std::stoi(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return DegreeDistribution::from_real(std::move(pmf), 1e-6);
}

struct TargetFlags {
  std::string tree, statistic;
  long long size = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--target-tree", tree, "target tree as a DFS degree sequence");
    cmd->add_option("--target-statistic", statistic, "target degree statistic, deg:count pairs");
    cmd->add_option("--target-size", size, "target fringe size");
  }
  int kinds() const { return !tree.empty() + !statistic.empty() + (size > 0); }
};

void print_moment(const exactstats::MomentReport& report, const std::string& format) {
  if (format == "csv") {
    std::cout << "order,value,log_value,rational,statistic,target,formula\n"
              << report.order << ',' << report.value.value() << ',' << report.value.log_value()
              << ',' << (report.value.exact() ? report.value.rational().get_str() : "") << ",\""
              << report.statistic << "\",\"" << report.target << "\"," << report.formula
              << "\n";
  } else {
    std::cout << report.to_json() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fringe subtree statistics for random plane trees"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::uint64_t seed = 20240817;
  long long replicates = 0;
  int workers = 0;
  std::string format = "json";
  long long budget = 0;
  app.add_option("--seed", seed, "master seed for all randomized commands")->capture_default_str();
  app.add_option("--replicates", replicates, "override replicate counts");
  app.add_option("--workers", workers, "worker threads (0 = hardware)");
  app.add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--budget", budget, "oracle budget (enumeration limit / DP nodes)");

  // --- sample ---------------------------------------------------------------
  auto* sample = app.add_subcommand("sample", "draw random trees");
  std::string sample_stat, sample_law;
  long long sample_size = 0, sample_count = 10, sample_attempts = 2'000'000;
  sample->add_option("--statistic", sample_stat, "degree statistic for uniform sampling");
  sample->add_option("--gw-law", sample_law, "offspring law deg:prob,... for conditioned GW");
  sample->add_option("--size", sample_size, "tree size for conditioned GW");
  sample->add_option("--count", sample_count, "number of trees")->capture_default_str();
  sample->add_option("--max-attempts", sample_attempts, "GW rejection cap")
      ->capture_default_str();

  // --- count ----------------------------------------------------------------
  auto* count = app.add_subcommand("count", "fringe counts in a given host tree");
  std::string count_host;
  TargetFlags count_target;
  count->add_option("--host", count_host, "host tree as a DFS degree sequence")->required();
  count_target.attach(count);

  // --- moments ----------------------------------------------------------------
  auto* moments = app.add_subcommand("moments", "exact expectations and factorial moments");
  std::string moments_stat;
  TargetFlags moments_target;
  long long moments_order = 1;
  moments->add_option("--statistic", moments_stat, "host degree statistic")->required();
  moments_target.attach(moments);
  moments->add_option("--order", moments_order, "factorial moment order")->capture_default_str();

  // --- bounds -----------------------------------------------------------------
  auto* bounds = app.add_subcommand("bounds", "Poisson-approximation bound reports");
  std::string bounds_stat;
  TargetFlags bounds_target;
  bounds->add_option("--statistic", bounds_stat, "host degree statistic")->required();
  bounds_target.attach(bounds);

  // --- enumerate ---------------------------------------------------------------
  auto* enumerate = app.add_subcommand("enumerate", "list every tree with a statistic");
  std::string enum_stat;
  enumerate->add_option("--statistic", enum_stat, "degree statistic")->required();

  // --- llt ----------------------------------------------------------------------
  auto* llt = app.add_subcommand(
      "llt", "exact drawing-without-replacement law vs its local-limit prediction");
  std::string llt_stat;
  long long llt_draw = 0;
  double llt_halfwidth = 6.0;
  llt->add_option("--statistic", llt_stat, "degree statistic supplying the multiset")
      ->required();
  llt->add_option("--draw", llt_draw, "number of values drawn without replacement")->required();
  llt->add_option("--half-width", llt_halfwidth, "window half-width in sigma units")
      ->capture_default_str();

  // --- scenario -------------------------------------------------------------------
  auto* scenario = app.add_subcommand("scenario", "Monte Carlo experiment runner");
  auto* scenario_run = scenario->add_subcommand("run", "run a scenario config");
  std::string scenario_path, scenario_preset, scenario_out = "report";
  scenario_run->add_option("config", scenario_path, "path to a scenario JSON file");
  scenario_run->add_option("--preset", scenario_preset, "built-in scenario name");
  scenario_run->add_option("--out", scenario_out, "output base path")->capture_default_str();
  bool scenario_timings = false;
  scenario_run->add_flag("--timings", scenario_timings, "include wall times in the JSON report");
  auto* scenario_list = scenario->add_subcommand("list", "list built-in scenario presets");

  // --- diagnose ----------------------------------------------------------------------
  auto* diagnose = app.add_subcommand("diagnose", "degree-statistic condition diagnostics");
  std::vector<std::string> diag_stats;
  diagnose->add_option("--statistic", diag_stats, "statistics, repeatable, kappa order")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) {
      samplers::RandomStream rng(seed, 0);
      long long n = replicates > 0 ? replicates : sample_count;
      if (!sample_stat.empty()) {
        DegreeStatistic bn = DegreeStatistic::parse(sample_stat);
        for (long long i = 0; i < n; ++i) {
          std::cout << samplers::sample_uniform_tree(bn, rng).to_string() << "\n";
        }
      } else if (!sample_law.empty() && sample_size > 0) {
        samplers::ConditionedGwSampler sampler(parse_law(sample_law), sample_size);
        for (long long i = 0; i < n; ++i) {
          std::cout << sampler.sample(rng, sample_attempts).to_string() << "\n";
        }
      } else {
        raise(errc::config_error, "need --statistic, or --gw-law with --size");
      }
    } else if (*count) {
      PlaneTree host = PlaneTree::parse(count_host);
      if (count_target.kinds() != 1) {
        raise(errc::config_error, "need exactly one of --target-tree/-statistic/-size");
      }
      long long value = 0;
      if (!count_target.tree.empty()) {
        value = treecore::fringe_count_tree(host, PlaneTree::parse(count_target.tree));
      } else if (!count_target.statistic.empty()) {
        value = treecore::fringe_count_statistic(
            host, DegreeStatistic::parse(count_target.statistic));
      } else {
        value = treecore::fringe_count_size(host, count_target.size);
      }
      std::cout << value << "\n";
    } else if (*moments) {
      DegreeStatistic bn = DegreeStatistic::parse(moments_stat);
      if (moments_target.kinds() != 1) {
        raise(errc::config_error, "need exactly one of --target-tree/-statistic/-size");
      }
      exactstats::MomentReport report;
      if (!moments_target.tree.empty()) {
        report = exactstats::factorial_moment_tree(bn, PlaneTree::parse(moments_target.tree),
                                                   moments_order);
      } else if (!moments_target.statistic.empty()) {
        report = exactstats::factorial_moment_statistic(
            bn, DegreeStatistic::parse(moments_target.statistic), moments_order);
      } else {
        report = exactstats::factorial_moment_size(bn, moments_target.size, moments_order);
      }
      print_moment(report, format);
    } else if (*bounds) {
      DegreeStatistic bn = DegreeStatistic::parse(bounds_stat);
      approx::TVBoundReport report;
      if (!bounds_target.tree.empty()) {
        report = approx::stein_delta(bn, PlaneTree::parse(bounds_target.tree));
      } else if (!bounds_target.statistic.empty()) {
        report = approx::statistic_tv_bound(bn, DegreeStatistic::parse(bounds_target.statistic));
      } else {
        raise(errc::config_error, "need --target-tree or --target-statistic");
      }
      std::cout << report.to_json() << "\n";
    } else if (*enumerate) {
      DegreeStatistic bn = DegreeStatistic::parse(enum_stat);
      auto res = oracle::enumerate_trees(bn, budget > 0 ? budget : 1'000'000);
      for (const PlaneTree& t : res.trees) std::cout << t.to_string() << "\n";
    } else if (*llt) {
      DegreeStatistic bn = DegreeStatistic::parse(llt_stat);
      auto vc = oracle::degree_multiset(bn);
      std::vector<long long> degrees;
      for (const auto& [v, c] : vc) {
        degrees.insert(degrees.end(), static_cast<std::size_t>(c), v);
      }
      auto base = approx::llt_prediction(degrees, llt_draw, 0);
      const double sd = std::sqrt(base.sigma_hat2);
      const long long lo =
          std::max<long long>(0, static_cast<long long>(base.mu_hat - llt_halfwidth * sd));
      const long long hi = static_cast<long long>(base.mu_hat + llt_halfwidth * sd) + 1;
      oracle::Budget ob;
      if (budget > 0) ob.max_nodes = budget;
      auto window = oracle::swor_sum_pmf_window(vc, llt_draw, lo, hi,
                                                oracle::ArithmeticMode::automatic, ob);
      std::cout << "k,exact,predicted,scaled_abs_err\n";
      std::cout.precision(12);
      for (long long k = lo; k <= hi; ++k) {
        auto pred = approx::llt_prediction(degrees, llt_draw, k);
        double exact = window.prob_at(k).value();
        double scale = std::sqrt(2 * M_PI * pred.sigma_hat2);
        std::cout << k << ',' << exact << ',' << pred.predicted_prob << ','
                  << std::abs(scale * exact - scale * pred.predicted_prob) << "\n";
      }
    } else if (*scenario_list) {
      for (const std::string& name : harness::preset_names()) std::cout << name << "\n";
    } else if (*scenario_run) {
      harness::ScenarioConfig config;
      if (!scenario_preset.empty()) {
        config = harness::preset(scenario_preset);
      } else if (!scenario_path.empty()) {
        config = harness::ScenarioConfig::from_json_file(scenario_path);
      } else {
        raise(errc::config_error, "scenario run needs a config path or --preset");
      }
      if (replicates > 0) config.replicates = replicates;
      if (workers > 0) config.workers = workers;
      if (app.count("--seed") > 0) config.master_seed = seed;
      if (scenario_timings) config.include_timings = true;
      harness::ExperimentReport report = harness::run_scenario(config);
      auto paths = harness::emit_report(
          report, format == "csv" ? harness::ReportFormat::csv : harness::ReportFormat::json,
          scenario_out);
      for (const auto& path : paths) std::cerr << "wrote " << path << "\n";
      for (const auto& point : report.points) {
        std::cerr << config.name << " n=" << point.grid_value << " target=" << point.target
                  << " mean=" << point.empirical_mean;
        if (point.exact_mean) std::cerr << " exact=" << *point.exact_mean;
        if (point.tv_poisson) std::cerr << " tv=" << *point.tv_poisson;
        std::cerr << " [" << report.regime_flag << "]\n";
      }
    } else if (*diagnose) {
      std::vector<DegreeStatistic> stats;
      for (const std::string& text : diag_stats) stats.push_back(DegreeStatistic::parse(text));
      auto rows = harness::condition_diagnostics(stats);
      std::cout << "size,sup_p_delta,second_moment,variance,span,dominant_span,max_p\n";
      std::cout.precision(12);
      for (const auto& row : rows) {
        std::cout << row.size << ',' << row.sup_p_delta << ',' << row.second_moment << ','
                  << row.variance << ',' << row.span << ',' << row.dominant_span << ','
                  << row.max_p << "\n";
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
