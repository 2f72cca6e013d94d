#include "fringetrees/harness.hpp"

namespace fringetrees::harness {

// Built-in scenarios reproducing each limit regime at desk scale. Replicate
// counts are engineering choices: large enough for the effects to stand out
// of Monte Carlo noise on a laptop-minute budget.

namespace {

DegreeDistribution law_mixed() {
  // mean-1 law with a heavy-ish degree; nonlattice, sigma^2 = 2.3
  return DegreeDistribution::from_rational({{0, Rational(11, 20)},
                                            {1, Rational(1, 5)},
                                            {2, Rational(3, 20)},
                                            {5, Rational(1, 10)}});
}

DegreeDistribution law_012() {
  // mean-1 law on {0,1,2}; nonlattice
  return DegreeDistribution::from_rational(
      {{0, Rational(7, 20)}, {1, Rational(3, 10)}, {2, Rational(7, 20)}});
}

DegreeDistribution law_binary() {
  return DegreeDistribution::from_rational({{0, Rational(1, 2)}, {2, Rational(1, 2)}});
}

DegreeDistribution law_gw012() {
  return DegreeDistribution::from_rational(
      {{0, Rational(3, 10)}, {1, Rational(2, 5)}, {2, Rational(3, 10)}});
}

PlaneTree cherry() { return PlaneTree::parse("2,0,0"); }

}  // namespace

std::vector<std::string> preset_names() {
  return {"the01-poisson", "the01-normal",  "thpo2-poisson", "ts-size-poisson",
          "tllt-window",   "theogw1-poisson", "theogw1-normal", "theogw1-heavytail",
          "theogw2-size",  "ex1-star",      "eperiodic-even", "eperiodic-odd"};
}

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  c.name = name;

  if (name == "the01-poisson") {
    // growing broom target with |n| pi pinned near 1: Poisson regime
    c.family = Family::fixed_statistic;
    c.degrees = law_012();
    c.grid = {1'000, 10'000, 100'000};
    c.target = BroomRule{1.0};
    c.replicates = 4'000;
    c.expected_regime = "PoissonFixed";
  } else if (name == "the01-normal") {
    // fixed small target, diverging mean: normal regime
    c.family = Family::fixed_statistic;
    c.degrees = law_012();
    c.grid = {1'000, 10'000, 100'000};
    c.target = cherry();
    c.replicates = 5'000;
    c.expected_regime = "NormalDiverging";
  } else if (name == "thpo2-poisson") {
    c.family = Family::fixed_statistic;
    c.degrees = law_012();
    c.grid = {1'000, 10'000, 100'000};
    c.target = BroomStatisticRule{1.0};
    c.replicates = 4'000;
    c.expected_regime = "PoissonFixed";
  } else if (name == "ts-size-poisson") {
    c.family = Family::fixed_statistic;
    c.degrees = law_mixed();
    c.grid = {250'000};
    c.target = SizeRule{1.0, 2.0 / 3.0, -1};
    c.replicates = 2'000;
    c.expected_regime = "SizePoisson";
  } else if (name == "tllt-window") {
    // fixed moderate window; the llt_sup_err diagnostic is the payload
    c.family = Family::fixed_statistic;
    c.degrees = law_mixed();
    c.grid = {250'000};
    c.target = static_cast<long long>(1'000);
    c.replicates = 500;
    c.expected_regime = "SizePoisson";
  } else if (name == "theogw1-poisson") {
    c.family = Family::gw_conditioned;
    c.degrees = law_gw012();
    c.grid = {1'000, 10'000, 100'000};
    c.target = BroomRule{1.0};
    c.replicates = 2'000;
    c.expected_regime = "GWPoisson";
  } else if (name == "theogw1-normal") {
    c.family = Family::gw_conditioned;
    c.degrees = law_gw012();
    c.grid = {1'000, 10'000, 100'000};
    c.target = cherry();
    c.replicates = 5'000;
    c.expected_regime = "GWNormal";
  } else if (name == "theogw1-heavytail") {
    // infinite-variance offspring: truncated power tail, alpha = 1.5
    c.family = Family::gw_conditioned;
    c.degrees = PowerTail{1.5, 1'000'000};
    c.grid = {10'000, 30'000};
    c.target = BroomRule{1.0};
    c.replicates = 800;
    c.max_attempts = 10'000'000;
    c.expected_regime = "GWPoisson";
  } else if (name == "theogw2-size") {
    c.family = Family::gw_conditioned;
    c.degrees = law_binary();
    c.grid = {99'999};
    c.target = SizeRule{1.0, 2.0 / 3.0, -1};
    c.replicates = 2'000;
    c.expected_regime = "SizePoisson";
  } else if (name == "ex1-star") {
    // the star family: |n| pi -> 1/e while the count is constantly 1
    c.family = Family::fixed_statistic;
    c.degrees = StarFamily{};
    c.grid = {10, 100, 1'000, 10'000};
    c.target = SelfStatisticRule{};
    c.replicates = 200;
    c.expected_regime = "PoissonFixed";
  } else if (name == "eperiodic-even" || name == "eperiodic-odd") {
    c.family = Family::fixed_statistic;
    c.degrees = PeriodicFamily{2.0};
    c.grid = {100'001};
    c.target = SizeRule{1.0, 2.0 / 3.0, name == "eperiodic-even" ? 0 : 1};
    c.replicates = 20'000;
    c.expected_regime = "SizePoisson";
  } else {
    raise(errc::config_error, "unknown preset '" + name + "'");
  }
  return c;
}

}  // namespace fringetrees::harness
