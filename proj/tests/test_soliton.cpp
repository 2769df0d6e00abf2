#include "support/battery.hpp"

#include <gtest/gtest.h>

using namespace hricci;

namespace {

Trajectory run(const Geometry &geo, double t_end, double stride) {
  IntegratorConfig cfg;
  cfg.t_end = t_end;
  return integrate(geo.sc, geo.metric, geo.volume0, FlowKind::unnormalized, cfg, {stride, {}});
}

} // namespace

TEST(Derivations, Dimensions) {
  EXPECT_EQ(derivation_space(StructureConstants(3)).size(), 9u);
  EXPECT_EQ(derivation_space(preset("su2_round").sc).size(), 3u);
  EXPECT_EQ(derivation_space(preset("heisenberg").sc).size(), 6u);
  EXPECT_EQ(derivation_space(preset("sol").sc).size(), 4u);
  EXPECT_EQ(derivation_space(preset("sl2r_diag").sc).size(), 3u);
}

TEST(Derivations, BasisSatisfiesLeibniz) {
  std::mt19937_64 rng(8);
  for (int draw = 0; draw < 10; ++draw) {
    const StructureConstants sc = draw % 2 ? hricci::testing::random_solvable(rng, 3)
                                           : hricci::testing::random_unimodular3(rng);
    for (const Matrix &d : derivation_space(sc))
      EXPECT_LT(derivation_defect(sc, d), 1e-10);
  }
  // ad(x) is always a derivation.
  const StructureConstants sc = preset("sl2r_diag").sc;
  EXPECT_LT(derivation_defect(sc, sc.ad(0)), 1e-15);
  EXPECT_GT(derivation_defect(sc, Matrix::Identity(3, 3)), 0.5);
}

TEST(SolitonFit, Su2RoundIsShrinkingEinstein) {
  const Geometry geo = preset("su2_round");
  const SolitonReport r = soliton_fit(geo.sc, geo.metric);
  EXPECT_EQ(r.classification, SolitonClass::einstein);
  EXPECT_EQ(r.type, SolitonType::shrinking);
  EXPECT_NEAR(r.epsilon, -2.0, 1e-12);
  EXPECT_LT(r.D.norm(), 1e-10);
  EXPECT_LT(r.residual, 1e-10);
}

TEST(SolitonFit, AbelianIsSteady) {
  const SolitonReport r = soliton_fit(StructureConstants(3), preset("abelian3").metric);
  EXPECT_EQ(r.classification, SolitonClass::einstein);
  EXPECT_EQ(r.type, SolitonType::steady);
  EXPECT_EQ(r.epsilon, 0.0);
  EXPECT_EQ(r.D.norm(), 0.0);
  EXPECT_EQ(r.residual, 0.0);
}

TEST(SolitonFit, HeisenbergIsExpandingSoliton) {
  const Geometry geo = preset("heisenberg");
  const SolitonReport r = soliton_fit(geo.sc, geo.metric);
  EXPECT_EQ(r.classification, SolitonClass::algebraic_soliton_candidate);
  EXPECT_EQ(r.type, SolitonType::expanding);
  EXPECT_NEAR(r.epsilon, 1.5, 1e-12);
  // The fitted pair reproduces -2 Ric on its own.
  EXPECT_LT(soliton_residual(geo.sc, geo.metric, r.epsilon, r.D), 1e-8);
  EXPECT_LT(derivation_defect(geo.sc, r.D), 1e-10);
  EXPECT_GT(r.lie_derivative_norm, 1.0);
}

TEST(SolitonFit, SolIsExpandingSoliton) {
  const Geometry geo = preset("sol");
  const SolitonReport r = soliton_fit(geo.sc, geo.metric);
  EXPECT_EQ(r.classification, SolitonClass::algebraic_soliton_candidate);
  EXPECT_EQ(r.type, SolitonType::expanding);
  EXPECT_NEAR(r.epsilon, 2.0, 1e-12);
}

TEST(SolitonFit, Sl2rDiagIsNotASoliton) {
  const Geometry geo = preset("sl2r_diag");
  const SolitonReport r = soliton_fit(geo.sc, geo.metric);
  EXPECT_EQ(r.classification, SolitonClass::none);
  EXPECT_GT(r.relative_residual, 1e-3);
}

TEST(SolitonFit, BergerIsNotASoliton) {
  const Geometry geo = preset("su2_berger");
  EXPECT_EQ(soliton_fit(geo.sc, geo.metric).classification, SolitonClass::none);
}

TEST(SolitonFit, ScalingLaw) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> uni(0.1, 10.0);
  for (const std::string name : {"su2_round", "heisenberg", "sol"}) {
    const Geometry geo = preset(name);
    const SolitonReport base = soliton_fit(geo.sc, geo.metric);
    for (int k = 0; k < 10; ++k) {
      const double alpha = uni(rng);
      const SolitonReport r = soliton_fit(geo.sc, LeftInvariantMetric(alpha * geo.metric.matrix()));
      EXPECT_NEAR(r.epsilon, base.epsilon / alpha, 1e-8 * std::abs(base.epsilon / alpha));
      EXPECT_EQ(r.classification, base.classification);
      EXPECT_EQ(r.type, base.type);
    }
  }
}

TEST(SolitonFit, ResidualScalesInversely) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> uni(0.1, 10.0);
  for (const std::string name : {"sl2r_diag", "su2_berger"}) {
    const Geometry geo = preset(name);
    const SolitonReport base = soliton_fit(geo.sc, geo.metric);
    for (int k = 0; k < 10; ++k) {
      const double alpha = uni(rng);
      const SolitonReport r = soliton_fit(geo.sc, LeftInvariantMetric(alpha * geo.metric.matrix()));
      EXPECT_NEAR(r.residual, base.residual / alpha, 1e-8 * base.residual / alpha) << name;
      EXPECT_EQ(r.classification, base.classification);
    }
  }
}

TEST(SolitonFit, OptimalAgainstPerturbations) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> normal;
  for (const std::string name : {"sl2r_diag", "su2_berger", "heisenberg"}) {
    const Geometry geo = preset(name);
    const SolitonReport r = soliton_fit(geo.sc, geo.metric);
    EXPECT_NEAR(soliton_residual(geo.sc, geo.metric, r.epsilon, r.D), r.residual, 1e-10);
    const auto basis = derivation_space(geo.sc);
    for (int k = 0; k < 20; ++k) {
      // Random admissible direction of norm 1e-4 in (eps, D) space.
      Matrix dir = Matrix::Zero(3, 3);
      for (const Matrix &b : basis)
        dir += normal(rng) * b;
      double de = normal(rng);
      const double scale = 1e-4 / std::sqrt(dir.squaredNorm() + de * de);
      const Matrix d = r.D + scale * dir;
      const double eps = r.epsilon + scale * de;
      EXPECT_GE(soliton_residual(geo.sc, geo.metric, eps, d), r.residual - 1e-12) << name;
    }
  }
}

TEST(SolitonFit, FrameInvariance) {
  std::mt19937_64 rng(14);
  for (const std::string name : {"heisenberg", "sol", "sl2r_diag"}) {
    const Geometry geo = preset(name);
    const SolitonReport a = soliton_fit(geo.sc, geo.metric);
    const Matrix p = hricci::testing::random_spd(rng, 3);
    const Matrix g2 = linalg::symmetrize(p.transpose() * geo.metric.matrix() * p);
    const SolitonReport b = soliton_fit(change_frame(geo.sc, p), LeftInvariantMetric(g2));
    EXPECT_NEAR(a.epsilon, b.epsilon, 1e-9);
    EXPECT_NEAR(a.residual, b.residual, 1e-8);
    EXPECT_EQ(a.classification, b.classification);
  }
}

TEST(CanonicalForm, EinsteinHomothety) {
  const Geometry su2 = preset("su2_round");
  EXPECT_LT(canonical_form_check(su2.sc, su2.metric, run(su2, 0.2, 1e-3)), 1e-9);
  const Geometry flat = preset("abelian3");
  EXPECT_EQ(canonical_form_check(flat.sc, flat.metric, run(flat, 1.0, 0.1)), 0.0);
  const Geometry heis = preset("heisenberg");
  EXPECT_THROW(canonical_form_check(heis.sc, heis.metric, run(heis, 0.1, 0.01)), UnsupportedError);
}

TEST(BreatherScan, EinsteinRecurs) {
  for (const std::string name : {"su2_round", "abelian3"}) {
    const Geometry geo = preset(name);
    const auto r = breather_scan(run(geo, geo.suggested_t_end, 1e-2), geo.metric);
    EXPECT_EQ(r.verdict, BreatherVerdict::einstein_recurrence) << name;
    EXPECT_EQ(r.candidates.size(), r.samples_scanned);
  }
}

TEST(BreatherScan, NonEinsteinPresetsFindNothing) {
  for (const std::string name : {"heisenberg", "sol", "sl2r_diag", "su2_berger"}) {
    const Geometry geo = preset(name);
    const auto r = breather_scan(run(geo, geo.suggested_t_end, 1e-2), geo.metric);
    EXPECT_EQ(r.verdict, BreatherVerdict::none_found) << name;
    EXPECT_GT(r.min_distance, 1e-3) << name;
  }
}

TEST(BreatherScan, RandomCatalogDrawsNeverFlag) {
  std::mt19937_64 rng(16);
  const std::vector<std::string> names{"abelian3", "su2_round", "su2_berger", "heisenberg", "sol",
                                       "sl2r_diag"};
  for (int draw = 0; draw < 50; ++draw) {
    const std::string &name = names[static_cast<std::size_t>(draw) % names.size()];
    Geometry geo = preset(name);
    const bool su2 = name.starts_with("su2");
    geo.metric = LeftInvariantMetric(su2 ? hricci::testing::random_diagonal(rng, 3, 0.7, 1.5)
                                         : hricci::testing::random_spd(rng, 3));
    const double t_end = su2 ? 0.1 : 0.5;
    const Trajectory traj = run(geo, t_end, 5e-3);
    const auto r = breather_scan(traj, geo.metric, 1e-6, 0.05 * traj.t_final());
    EXPECT_NE(r.verdict, BreatherVerdict::violation_flag) << name << " draw " << draw;
    const bool einstein = curvature(geo.sc, geo.metric).einstein_dev < 1e-10;
    EXPECT_EQ(r.verdict == BreatherVerdict::einstein_recurrence, einstein) << name << " " << draw;
  }
}

TEST(BreatherScan, PlantedRecurrenceIsFlagged) {
  const Geometry geo = preset("heisenberg");
  Trajectory traj = run(geo, 1.0, 1e-2);
  // Replace a late sample by a rescaled copy of the initial metric.
  auto &p = traj.points[70];
  const double scale = 3.0;
  p.state.g = LeftInvariantMetric(scale * geo.metric.matrix());
  p.curvature = curvature(geo.sc, p.state.g);
  p.monitor = make_monitor_sample(p.state.t, p.curvature,
                                  volume_of(p.state.g, geo.metric, geo.volume0));
  const auto r = breather_scan(traj, geo.metric);
  EXPECT_EQ(r.verdict, BreatherVerdict::violation_flag);
  ASSERT_EQ(r.candidates.size(), 1u);
  EXPECT_NEAR(r.candidates[0].alpha, 1.0 / scale, 1e-12);
}

TEST(BreatherScan, Preconditions) {
  const Geometry geo = preset("heisenberg");
  EXPECT_THROW(breather_scan(run(geo, 0.05, 1e-2), geo.metric), InvalidStateError);
  EXPECT_THROW(breather_scan(run(geo, 1.0, 1e-2), geo.metric, 1e-6, 0.95), InvalidStateError);
  IntegratorConfig cfg;
  cfg.t_end = 0.5;
  const Trajectory norm = integrate(geo.sc, geo.metric, 1.0, FlowKind::normalized, cfg, {0.01, {}});
  EXPECT_THROW(breather_scan(norm, geo.metric), InvalidStateError);
}
