#include "support.hpp"

using namespace stokesmor;
using namespace stokesmor::testing;

namespace {

ParticleConfig single(double radius = 1.0) {
  ParticleConfig cfg;
  cfg.particles = {{Vec3(0.5, -1.0, 2.0), radius}};
  return cfg;
}

SolverOptions converged_options() {
  SolverOptions o;
  o.tolerance = 1e-13;
  o.max_iterations = 200;
  o.keep_history = true;
  return o;
}

}  // namespace

TEST(InteractionMatrix, SingleParticleIsIdentity) {
  const SphereQuadrature quad(17, 8);
  const auto m = build_interaction_matrix(single(0.7), quad);
  ASSERT_EQ(m.matrix.rows(), 5);
  EXPECT_LE((m.matrix - Eigen::MatrixXd::Identity(5, 5)).norm(), 1e-13);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(5);
  EXPECT_LE((m.matrix * ones - ones).norm(), 1e-13);
}

TEST(InteractionMatrix, SelfBlocksAreIdentityInLattice) {
  const SphereQuadrature quad(17, 8);
  const auto m = build_interaction_matrix(generate_lattice(3, 1.0, 0.25), quad);
  for (Eigen::Index i = 0; i < 27; ++i)
    EXPECT_LE((m.matrix.block(5 * i, 5 * i, 5, 5) - Eigen::MatrixXd::Identity(5, 5)).norm(), 1e-12) << i;
}

TEST(InteractionMatrix, OffDiagonalBlockMatchesBallAverageOracle) {
  ParticleConfig cfg;
  cfg.particles = {{Vec3::Zero(), 0.6}, {Vec3(1.7, 0.4, -0.3), 0.4}};
  const SphereQuadrature quad(17, 8);
  const auto m = build_interaction_matrix(cfg, quad);
  for (int b = 0; b < 5; ++b) {
    const TracelessSym3 s = TracelessSym3::basis(b);
    const Mat3 avg = quad.ball_average(cfg[0].center, cfg[0].radius, [&](const Vec3& x) -> Mat3 {
      return sym(dipole_gradient(s, cfg[1].center, cfg[1].radius, x));
    });
    const Eigen::VectorXd expect = TracelessSym3::project(avg).components();
    EXPECT_LE((m.matrix.block(0, 5 + b, 5, 1) - expect).norm(), 1e-12 * (1 + expect.norm())) << b;
  }
}

TEST(InteractionMatrix, SymmetricInEnergyPairing) {
  const SphereQuadrature quad(17, 8);
  const auto cfg = generate_poisson_disk(30, Box{Vec3::Zero(), Vec3::Constant(6)}, 1.0, 0.3, 21);
  const auto m = build_interaction_matrix(cfg, quad);
  EXPECT_LE(energy_asymmetry(m), 1e-8);
}

TEST(InteractionMatrix, RayleighQuotientsNonnegative) {
  const SphereQuadrature quad(17, 8);
  const auto cfg = generate_poisson_disk(30, Box{Vec3::Zero(), Vec3::Constant(6)}, 1.0, 0.4, 22);
  const Eigen::MatrixXd a = symmetrized_energy_form(build_interaction_matrix(cfg, quad));
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8);
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd v(a.rows());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = g(rng);
    EXPECT_GE(v.dot(a * v) / v.squaredNorm(), -1e-8);
  }
}

TEST(InteractionMatrix, ThreadCountDoesNotChangeEntries) {
  const SphereQuadrature quad(11, 4);
  const auto cfg = generate_lattice(3, 1.0, 0.2);
  EXPECT_EQ(build_interaction_matrix(cfg, quad, 1).matrix, build_interaction_matrix(cfg, quad, 3).matrix);
}

TEST(OperatorNorm, SingleParticleBothQuotientsOne) {
  const auto s = operator_norm_estimate(single(), SphereQuadrature(17, 8));
  EXPECT_NEAR(s.largest, 1.0, 1e-10);
  EXPECT_NEAR(s.smallest, 1.0, 1e-10);
}

TEST(OperatorNorm, FarApartPairNearIdentity) {
  ParticleConfig cfg;
  cfg.particles = {{Vec3::Zero(), 1.0}, {Vec3(100, 0, 0), 1.0}};
  const auto s = operator_norm_estimate(cfg, SphereQuadrature(17, 8));
  EXPECT_GE(s.smallest, 1 - 1e-3);
  EXPECT_LE(s.largest, 1 + 1e-3);
  // off-diagonal strain is O(R^3 / d^3)
  EXPECT_GT(s.largest, 1.0);
  EXPECT_LT(s.smallest, 1.0);
}

TEST(OperatorNorm, MatchesDenseEigenSolver) {
  const SphereQuadrature quad(11, 4);
  const auto cfg = generate_lattice(3, 1.0, 0.35);
  const auto s = operator_norm_estimate(cfg, quad);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized_energy_form(build_interaction_matrix(cfg, quad)));
  EXPECT_LE(rel_diff(s.largest, eig.eigenvalues().maxCoeff()), 1e-9);
  EXPECT_LE(rel_diff(s.smallest, eig.eigenvalues().minCoeff()), 1e-9);
}

TEST(OperatorNorm, LatticeBoundsStableInN) {
  const SphereQuadrature quad(11, 4);
  const auto small = operator_norm_estimate(generate_lattice(4, 1.0, 0.25), quad);
  const auto large = operator_norm_estimate(generate_lattice(6, 1.0, 0.25), quad);
  for (const auto& s : {small, large}) {
    EXPECT_GE(s.smallest, 0.2);
    EXPECT_LE(s.largest, 5.0);
  }
  EXPECT_LT(std::abs(large.largest - small.largest) / small.largest, 0.1);
  EXPECT_LT(std::abs(large.smallest - small.smallest) / small.smallest, 0.1);
}

TEST(OperatorNorm, ScaleInvariant) {
  const SphereQuadrature quad(11, 4);
  const auto cfg = generate_poisson_disk(20, Box{Vec3::Zero(), Vec3::Constant(5)}, 1.0, 0.35, 24);
  const auto a = operator_norm_estimate(cfg, quad);
  const auto b = operator_norm_estimate(scaled(cfg, 13.0), quad);
  EXPECT_LE(rel_diff(a.largest, b.largest), 1e-10);
  EXPECT_LE(rel_diff(a.smallest, b.smallest), 1e-10);
}

TEST(OperatorNorm, OverlapRejected) {
  ParticleConfig cfg;
  cfg.particles = {{Vec3::Zero(), 1.0}, {Vec3(1.5, 0, 0), 1.0}};
  EXPECT_THROW(operator_norm_estimate(cfg, SphereQuadrature(11, 4)), Error);
}

TEST(OperatorNorm, BudgetExhaustionReportsIterates) {
  try {
    operator_norm_estimate(generate_lattice(3, 1.0, 0.4), SphereQuadrature(11, 4), 1, 1e-15);
    FAIL() << "expected non-convergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::non_convergence);
    EXPECT_NE(std::string(e.what()).find("last iterates"), std::string::npos);
  }
}

TEST(DecaySlope, DipoleVelocityAndGradient) {
  const auto f = decay_slope_check(DecayKind::dipole);
  EXPECT_FALSE(f.zero);
  EXPECT_NEAR(f.velocity_slope, -2.0, 0.01);
  EXPECT_NEAR(f.gradient_slope, -3.0, 0.01);
}

TEST(DecaySlope, CollocationRemainder) {
  const auto f = decay_slope_check(DecayKind::collocation);
  EXPECT_LE(f.velocity_slope, -3.0 + 0.02);
  EXPECT_LE(f.gradient_slope, -4.0 + 0.02);
}

TEST(DecaySlope, ZeroCoefficientReportsExactZero) {
  const auto d = decay_slope_check(DecayKind::dipole, 10, 1e4, 25, TracelessSym3{});
  EXPECT_TRUE(d.zero);
  EXPECT_TRUE(std::isnan(d.velocity_slope));
  const auto c = decay_slope_check(DecayKind::collocation, 10, 1e4, 25, std::nullopt, CollocationCoefficients::Zero());
  EXPECT_TRUE(c.zero);
}

TEST(DecaySlope, WindowOutsideRangeRejected) {
  EXPECT_THROW(decay_slope_check(DecayKind::dipole, 5, 100), Error);
  EXPECT_THROW(decay_slope_check(DecayKind::dipole, 10, 1e5), Error);
}

TEST(BoundaryAverage, IdenticalFieldsGiveZero) {
  const auto cfg = generate_lattice(2, 1.0, 0.2);
  const AmbientField amb = LinearStrain{shear()};
  const auto r = run(cfg, amb, SolverOptions{});
  const auto e = boundary_average_error(r.field, r.field, cfg, SphereQuadrature(17, 8));
  EXPECT_EQ(e.sup, 0.0);
  EXPECT_EQ(e.per_particle.size(), cfg.size());
}

TEST(BoundaryAverage, RigidAmbientZeroAtEveryIterate) {
  const auto cfg = generate_lattice(2, 1.0, 0.3);
  const AmbientField amb = RigidMotion{Vec3(1, 2, 3), Vec3(0.5, -0.2, 0.1), Vec3::Zero()};
  SolverOptions o;
  o.max_iterations = 3;
  o.keep_history = true;
  const auto r = run(cfg, amb, o);
  const SphereQuadrature quad(17, 8);
  for (const auto& snap : r.report.history) {
    const auto e = boundary_average_error(field_from_snapshot(amb, cfg, snap), r.field, cfg, quad);
    EXPECT_EQ(e.sup, 0.0);
  }
}

TEST(BoundaryAverage, SmallerThanPointwiseErrorOnDiluteLattice) {
  const auto cfg = generate_lattice(3, 1.0, std::cbrt(1e-2));
  const AmbientField amb = LinearStrain{shear()};
  const auto ref = run(cfg, amb, converged_options());
  ASSERT_EQ(ref.report.terminated, Termination::tolerance);
  const SphereQuadrature quad(17, 8);
  const FlowField v0 = field_from_snapshot(amb, cfg, ref.report.history.front());
  const double avg = boundary_average_error(v0, ref.field, cfg, quad).sup;
  const double ball = ball_velocity_error(v0, ref.field, cfg, quad);
  // frozen from the converged reference run
  EXPECT_LE(rel_diff(avg / ball, 0.17808616717921807), 1e-6);
  EXPECT_LT(avg, ball);
}

TEST(BoundaryAverage, MismatchedConfigRejected) {
  const auto cfg = generate_lattice(2, 1.0, 0.2);
  const auto r = run(cfg, LinearStrain{shear()}, SolverOptions{});
  try {
    boundary_average_error(r.field, r.field, generate_lattice(3, 1.0, 0.2), SphereQuadrature(11, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::mismatched_config);
  }
}

TEST(Einstein, SingleParticleIsFiveHalves) {
  const auto cfg = single(0.8);
  const AmbientField amb = LinearStrain{shear()};
  SolverOptions o;
  o.max_iterations = 1;
  const auto r = run(cfg, amb, o);
  const auto est = einstein_viscosity_estimate(r.field, cfg, amb);
  EXPECT_NEAR(est.normalized, 2.5, 1e-10);
  EXPECT_EQ(est.particles, 1u);
}

TEST(Einstein, SingleParticleAnyStrain) {
  std::mt19937_64 rng(25);
  for (int k = 0; k < 5; ++k) {
    const auto cfg = single(0.3 + k);
    const AmbientField amb = LinearStrain{random_strain(rng)};
    const auto r = run(cfg, amb, SolverOptions{});
    EXPECT_NEAR(einstein_viscosity_estimate(r.field, cfg, amb).normalized, 2.5, 1e-10);
  }
}

TEST(Einstein, RigidAmbientUndefined) {
  const auto cfg = single();
  const AmbientField amb = RigidMotion{Vec3(1, 0, 0), Vec3::Zero(), Vec3::Zero()};
  const auto r = run(cfg, amb, SolverOptions{});
  try {
    einstein_viscosity_estimate(r.field, cfg, amb);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::undefined_normalization);
  }
}

TEST(Einstein, ZeroStrainUndefined) {
  const auto cfg = single();
  const AmbientField amb = LinearStrain{TracelessSym3{}};
  const auto r = run(cfg, amb, SolverOptions{});
  try {
    einstein_viscosity_estimate(r.field, cfg, amb);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::undefined_normalization);
  }
}

TEST(Einstein, NonLinearAmbientRejected) {
  const auto cfg = single();
  const AmbientField amb = Stokeslet{Vec3(1, 0, 0), Vec3(10, 0, 0)};
  const auto r = run(cfg, amb, SolverOptions{});
  EXPECT_THROW(einstein_viscosity_estimate(r.field, cfg, amb), Error);
}

TEST(Einstein, SampleInsideBoundaryLayerRejected) {
  const auto cfg = generate_lattice(5, 1.0, 0.1);
  const AmbientField amb = LinearStrain{shear()};
  const auto r = run(cfg, amb, SolverOptions{});
  EXPECT_THROW(einstein_viscosity_estimate(r.field, cfg, amb, cloud_bounds(cfg)), Error);
  const auto est = einstein_viscosity_estimate(r.field, cfg, amb);
  EXPECT_GT(est.particles, 0u);
  EXPECT_LT(est.particles, cfg.size());
}

TEST(Einstein, ScaleInvariant) {
  const auto cfg = generate_lattice(5, 1.0, 0.15);
  const AmbientField amb = LinearStrain{shear()};
  const auto a = einstein_viscosity_estimate(run(cfg, amb, SolverOptions{}).field, cfg, amb);
  const auto big = scaled(cfg, 7.0);
  const auto b = einstein_viscosity_estimate(run(big, amb, SolverOptions{}).field, big, amb);
  EXPECT_LE(rel_diff(a.normalized, b.normalized), 1e-10);
}

TEST(Sweep, EmptyListRejected) {
  EXPECT_THROW(contraction_sweep(SweepFamily{}, {}, SolverOptions{}), Error);
}

TEST(Sweep, SingleParticleFamilyExcluded) {
  SweepFamily f;
  f.n_per_side = 1;
  const auto r = contraction_sweep(f, {1e-3, 1e-2}, SolverOptions{});
  for (const auto& p : r.points) {
    EXPECT_TRUE(p.excluded);
    EXPECT_EQ(p.rho, 0.0);
  }
  EXPECT_FALSE(r.fit.has_value());
}

TEST(Sweep, SlopeRecomputableFromStoredPairs) {
  SweepFamily f;
  f.n_per_side = 3;
  const auto r = contraction_sweep(f, {1e-3, 1e-2, 3e-2}, SolverOptions{});
  ASSERT_TRUE(r.fit.has_value());
  std::vector<double> x, y;
  for (const auto& p : r.points) {
    EXPECT_FALSE(p.excluded);
    EXPECT_LE(rel_diff(p.phi0, p.target_phi0), 1e-12);
    x.push_back(std::log(p.phi0));
    y.push_back(std::log(p.rho));
  }
  const LineFit again = fit_line(x, y);
  EXPECT_LE(std::abs(again.slope - r.fit->slope), 1e-12);
  EXPECT_LE(std::abs(again.intercept - r.fit->intercept), 1e-12);
  EXPECT_GT(r.fit->slope, 0.5);
}

TEST(Sweep, DivergentPointFlaggedAndExcluded) {
  SweepFamily f;
  f.kind = SweepFamily::Kind::fcc;
  f.n_per_side = 5;
  f.ambient = LinearStrain{TracelessSym3(1, -1, 0, 0, 0)};
  SolverOptions o;
  o.truncation = 2;
  o.quad_degree = 11;
  o.radial_nodes = 4;
  o.max_iterations = 200;
  const double theta = 1.02;
  const auto r = contraction_sweep(f, {1e-3, 1e-2, 1.0 / (8 * theta * theta * theta)}, o);
  ASSERT_EQ(r.points.size(), 3u);
  EXPECT_FALSE(r.points[0].excluded);
  EXPECT_FALSE(r.points[1].excluded);
  EXPECT_TRUE(r.points[2].excluded);
  EXPECT_EQ(r.points[2].terminated, Termination::divergence);
  EXPECT_EQ(r.points[2].note, "diverged");
  EXPECT_NEAR(r.points[2].theta_max, theta, 1e-12);
  ASSERT_TRUE(r.fit.has_value());
  const double direct = (std::log(r.points[1].rho) - std::log(r.points[0].rho)) /
                        (std::log(r.points[1].phi0) - std::log(r.points[0].phi0));
  EXPECT_LE(std::abs(r.fit->slope - direct), 1e-12);
}

TEST(Sweep, RateUniformInLatticeSize) {
  std::vector<double> rho;
  for (int n : {3, 5, 7}) {
    SweepFamily f;
    f.n_per_side = n;
    const auto r = contraction_sweep(f, {1e-2}, SolverOptions{});
    rho.push_back(r.points[0].rho);
  }
  const auto [lo, hi] = std::minmax_element(rho.begin(), rho.end());
  EXPECT_LT(*hi / *lo, 2.0);
}

TEST(Sweep, DeterministicAcrossThreadCounts) {
  SweepFamily f;
  f.kind = SweepFamily::Kind::random;
  f.count = 20;
  f.box_side = 6;
  f.seed = 31;
  SolverOptions a, b;
  b.threads = 3;
  const auto ra = contraction_sweep(f, {1e-3, 1e-2}, a);
  const auto rb = contraction_sweep(f, {1e-3, 1e-2}, b);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(ra.points[k].rho, rb.points[k].rho);
}
