#include "hricci/monitors.hpp"
#include "support/battery.hpp"

#include <gtest/gtest.h>

using namespace hricci;

namespace {

Trajectory run(const StructureConstants &sc, const Matrix &g0, FlowKind kind, double t_end,
               double stride) {
  IntegratorConfig cfg;
  cfg.t_end = t_end;
  return integrate(sc, LeftInvariantMetric(g0), 1.0, kind, cfg, {stride, {}});
}

Trajectory run(const std::string &name, FlowKind kind, double t_end, double stride) {
  const Geometry geo = preset(name);
  return run(geo.sc, geo.metric.matrix(), kind, t_end, stride);
}

} // namespace

TEST(FiniteDifference, ExactOnQuadraticsOverUnevenGrid) {
  const std::vector<double> t{0.0, 0.1, 0.35, 0.4, 0.9};
  std::vector<double> f;
  for (double x : t)
    f.push_back(3.0 * x * x - 2.0 * x + 0.5);
  for (std::size_t k = 1; k + 1 < t.size(); ++k)
    EXPECT_NEAR(fd::centered(t, f, k), 6.0 * t[k] - 2.0, 1e-13);
  EXPECT_THROW(fd::centered(t, f, 0), std::out_of_range);
  EXPECT_THROW(fd::centered(t, f, 4), std::out_of_range);
}

TEST(Lemma, HeisenbergBothFlows) {
  const auto l1 = lemma1_check(run("heisenberg", FlowKind::normalized, 1.0, 2.5e-4));
  const auto l2 = lemma2_check(run("heisenberg", FlowKind::unnormalized, 1.0, 2.5e-4));
  EXPECT_LT(l1.max_relative_residual, 1e-5);
  EXPECT_LT(l2.max_relative_residual, 1e-5);
  EXPECT_EQ(l1.lemma, "lemma1");
  EXPECT_EQ(l2.lemma, "lemma2");
  EXPECT_NEAR(l1.step_sq, 6.25e-8, 1e-12 * 6.25e-8);
}

TEST(Lemma, ResidualIsSecondOrderInStride) {
  for (auto kind : {FlowKind::normalized, FlowKind::unnormalized}) {
    const Trajectory fine = run("sol", kind, 0.5, 2.5e-4);
    const Trajectory coarse = hricci::testing::every_other(fine);
    const auto check = [&](const Trajectory &t) {
      return kind == FlowKind::normalized ? lemma1_check(t) : lemma2_check(t);
    };
    const double ratio = hricci::testing::halving_ratio(check(coarse), check(fine));
    EXPECT_GT(ratio, 3.9);
    EXPECT_LT(ratio, 4.1);
  }
}

TEST(Lemma, EinsteinAndFlatAreZero) {
  for (const std::string name : {"su2_round", "abelian3"}) {
    const auto l1 = lemma1_check(run(name, FlowKind::normalized, 0.2, 1e-3));
    const auto l2 = lemma2_check(run(name, FlowKind::unnormalized, 0.2, 1e-3));
    EXPECT_LT(l1.max_relative_residual, 1e-5) << name;
    EXPECT_LT(l2.max_relative_residual, 1e-5) << name;
  }
}

TEST(Lemma, WrongFlowOrTooFewSamples) {
  EXPECT_THROW(lemma1_check(run("sol", FlowKind::unnormalized, 0.1, 0.01)), InvalidStateError);
  EXPECT_THROW(lemma2_check(run("sol", FlowKind::normalized, 0.1, 0.01)), InvalidStateError);
  EXPECT_THROW(lemma1_check(run("sol", FlowKind::normalized, 0.1, 0.05)), InvalidStateError);
}

TEST(Lemma, CorruptedSampleIsCaught) {
  Trajectory traj = run("heisenberg", FlowKind::normalized, 1.0, 2.5e-4);
  traj.points[1000].monitor.R -= 1e-3;
  const auto rep = lemma1_check(traj);
  EXPECT_GT(rep.max_relative_residual, 1.0);
  // Centered differences at k never read sample k; the neighbours see it.
  EXPECT_TRUE(rep.worst_index == 999 || rep.worst_index == 1001) << rep.worst_index;
}

TEST(Monotone, HeisenbergStrictlyIncreasing) {
  const auto v = monotone_assert(run("heisenberg", FlowKind::unnormalized, 1.0, 1e-3),
                                 MonotoneQuantity::RV2n);
  EXPECT_TRUE(v.passed());
  EXPECT_LT(v.worst_violation, 0.0);
  EXPECT_LT(v.initial_value, 0.0);
  const auto w = monotone_assert(run("heisenberg", FlowKind::normalized, 1.0, 1e-3),
                                 MonotoneQuantity::R_normalized);
  EXPECT_TRUE(w.passed());
}

TEST(Monotone, EinsteinIsStationary) {
  for (const std::string name : {"su2_round", "abelian3"}) {
    const auto v =
        monotone_assert(run(name, FlowKind::unnormalized, 0.2, 1e-3), MonotoneQuantity::RV2n);
    EXPECT_TRUE(v.monotone) << name;
    EXPECT_TRUE(v.einstein_consistent) << name;
    EXPECT_TRUE(v.strictness) << name;
  }
}

TEST(Monotone, DetectsDecrease) {
  Trajectory traj = run("heisenberg", FlowKind::unnormalized, 0.5, 1e-2);
  traj.points[20].monitor.RV2n -= 0.1;
  const auto v = monotone_assert(traj, MonotoneQuantity::RV2n);
  EXPECT_FALSE(v.monotone);
  EXPECT_EQ(v.worst_index, 19u);
  EXPECT_FALSE(v.passed());
}

TEST(Monotone, DetectsFalseStationarity) {
  // A non-Einstein trajectory whose quantity is flattened must fail strictness.
  Trajectory traj = run("heisenberg", FlowKind::unnormalized, 0.5, 1e-2);
  for (auto &p : traj.points)
    p.monitor.RV2n = traj.points.front().monitor.RV2n;
  EXPECT_FALSE(monotone_assert(traj, MonotoneQuantity::RV2n).strictness);
}

TEST(Monotone, DetectsMovingEinsteinSample) {
  Trajectory traj = run("su2_round", FlowKind::unnormalized, 0.2, 1e-2);
  traj.points[5].monitor.RV2n += 1e-4;
  EXPECT_FALSE(monotone_assert(traj, MonotoneQuantity::RV2n).einstein_consistent);
}

TEST(Monotone, WrongFlow) {
  EXPECT_THROW(monotone_assert(run("sol", FlowKind::normalized, 0.1, 0.01), MonotoneQuantity::RV2n),
               InvalidStateError);
  EXPECT_THROW(monotone_assert(run("sol", FlowKind::unnormalized, 0.1, 0.01),
                               MonotoneQuantity::R_normalized),
               InvalidStateError);
}

TEST(Monotone, RandomDrawsAreMonotone) {
  std::mt19937_64 rng(42);
  const std::vector<std::string> names{"heisenberg", "sol", "sl2r_diag", "su2_round"};
  for (int draw = 0; draw < 50; ++draw) {
    const std::string &name = names[static_cast<std::size_t>(draw) % names.size()];
    const Geometry geo = preset(name);
    const Matrix g0 = name == "su2_round" ? hricci::testing::random_diagonal(rng, 3, 0.7, 1.5)
                                          : hricci::testing::random_spd(rng, 3);
    const double t_end = name == "su2_round" ? 0.1 : 0.5;
    const Trajectory un = run(geo.sc, g0, FlowKind::unnormalized, t_end, 2e-3);
    const auto v = monotone_assert(un, MonotoneQuantity::RV2n);
    EXPECT_TRUE(v.passed()) << name << " draw " << draw;
    const Trajectory no = run(geo.sc, g0, FlowKind::normalized, t_end, 2e-3);
    EXPECT_TRUE(monotone_assert(no, MonotoneQuantity::R_normalized).passed()) << name;
  }
}

TEST(MonitorSample, RV2nIsScaleInvariant) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> uni(0.1, 10.0);
  for (int draw = 0; draw < 20; ++draw) {
    const StructureConstants sc = hricci::testing::random_unimodular3(rng);
    const Matrix g = hricci::testing::random_spd(rng, 3);
    const double alpha = uni(rng), v = uni(rng);
    const MonitorSample a = make_monitor_sample(0.0, curvature(sc, LeftInvariantMetric(g)), v);
    const MonitorSample b = make_monitor_sample(0.0, curvature(sc, LeftInvariantMetric(alpha * g)),
                                                v * std::pow(alpha, 1.5));
    EXPECT_NEAR(a.RV2n, b.RV2n, 1e-12 * std::max(1.0, std::abs(a.RV2n)));
  }
}

TEST(BreatherPrecondition, SignOfInitialR) {
  const auto su2 = breather_precondition(run("su2_round", FlowKind::unnormalized, 0.01, 0.01).points[0].monitor);
  EXPECT_EQ(su2.classification, BreatherExclusion::steady_expanding_excluded);
  EXPECT_EQ(su2.margin, 6.0);
  const auto flat = breather_precondition(run("abelian3", FlowKind::unnormalized, 0.01, 0.01).points[0].monitor);
  EXPECT_EQ(flat.classification, BreatherExclusion::steady_expanding_excluded);
  const auto heis = breather_precondition(run("heisenberg", FlowKind::unnormalized, 0.01, 0.01).points[0].monitor);
  EXPECT_EQ(heis.classification, BreatherExclusion::possible);
  EXPECT_EQ(heis.margin, -0.5);
  EXPECT_EQ(to_string(heis.classification), "possible");
}
