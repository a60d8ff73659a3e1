#include "support.hpp"

#include <filesystem>
#include <sstream>

using namespace stokesmor;
using namespace stokesmor::testing;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string c; std::getline(in, c, ',');) out.push_back(c);
  return out;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("stokesmor_io_" + name);
  std::filesystem::remove_all(p);
  return p;
}

const char* kShearAmbient = R"("ambient": {"type": "linear_strain", "strain": [[0, 0.5, 0], [0.5, 0, 0], [0, 0, 0]]})";

}  // namespace

TEST(Scenario, InlineParticles) {
  const auto s = parse_scenario(std::string(R"({"particles": [{"center": [0, 0, 0], "radius": 1},
    {"center": [4, 0, 0], "radius": 1}], )") + kShearAmbient + R"(, "solver": {"gamma": 0.5, "max_iterations": 7}})");
  ASSERT_EQ(s.config.size(), 2u);
  EXPECT_EQ(s.config[1].center, Vec3(4, 0, 0));
  EXPECT_EQ(s.solver.gamma, 0.5);
  EXPECT_EQ(s.solver.max_iterations, 7);
  ASSERT_TRUE(s.ambient.has_value());
  EXPECT_LE((s.ambient->velocity(Vec3(1, 2, 3)) - shear_matrix() * Vec3(1, 2, 3)).norm(), 1e-16);
  EXPECT_FALSE(s.seed.has_value());
}

TEST(Scenario, LatticeGeneratorMatchesDirectCall) {
  const auto s = parse_scenario(R"({"generator": {"kind": "lattice", "n_per_side": 3, "spacing": 1.0, "radius": 0.2},
                                    "seed": 0})");
  const auto direct = generate_lattice(3, 1.0, 0.2);
  ASSERT_EQ(s.config.size(), direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_EQ(s.config[i].center, direct[i].center);
}

TEST(Scenario, PoissonGeneratorUsesSeed) {
  const auto s = parse_scenario(R"({"generator": {"kind": "poisson", "count": 64, "min_gap": 1.0, "radius": 0.2,
                                    "box": {"lo": [0, 0, 0], "hi": [10, 10, 10]}}, "seed": 7})");
  ASSERT_EQ(s.config.size(), 64u);
  EXPECT_EQ(s.config[0].center, Vec3(7.4420989198674379, 9.3132915477693849, 1.3271770979313731));
}

TEST(Scenario, GeneratorWithoutSeedRejected) {
  EXPECT_THROW(parse_scenario(R"({"generator": {"kind": "lattice", "n_per_side": 2, "spacing": 1, "radius": 0.1}})"),
               Error);
}

TEST(Scenario, SweepWithoutSeedRejected) {
  EXPECT_THROW(
      parse_scenario(R"({"sweep": {"family": {"kind": "lattice", "n_per_side": 3, "spacing": 1}, "phi0": [0.01]}})"),
      Error);
}

TEST(Scenario, SweepTakesSeedAndAmbient) {
  const auto s = parse_scenario(std::string(R"({"seed": 4, "sweep": {"family": {"kind": "fcc", "n_per_side": 5,
    "spacing": 1}, "phi0": [0.001, 0.01]}, )") + kShearAmbient + "}");
  ASSERT_TRUE(s.sweep.has_value());
  EXPECT_EQ(s.sweep->family.kind, SweepFamily::Kind::fcc);
  EXPECT_EQ(s.sweep->family.seed, 4u);
  EXPECT_EQ(s.sweep->phi0.size(), 2u);
  EXPECT_LE((s.sweep->family.ambient.velocity(Vec3(0, 1, 0)) - Vec3(0.5, 0, 0)).norm(), 1e-16);
}

TEST(Scenario, UnknownKeysRejectedAtEveryLevel) {
  for (const char* text : {R"({"particles": [], "colour": 1})",
                           R"({"particles": [{"center": [0, 0, 0], "radius": 1, "mass": 2}]})",
                           R"({"particles": [], "solver": {"gama": 0.5}})",
                           R"({"particles": [], "ambient": {"type": "rigid", "spin": [0, 0, 1]}})"}) {
    try {
      parse_scenario(text);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
      EXPECT_NE(std::string(e.what()).find("unknown key"), std::string::npos) << e.what();
    }
  }
}

TEST(Scenario, ParticlesAndGeneratorExclusive) {
  EXPECT_THROW(parse_scenario(R"({"seed": 1, "particles": [],
    "generator": {"kind": "lattice", "n_per_side": 2, "spacing": 1, "radius": 0.1}})"),
               Error);
}

TEST(Scenario, StrainMustBeSymmetricAndTraceless) {
  EXPECT_THROW(parse_scenario(R"({"ambient": {"type": "linear_strain", "strain": [[0, 1, 0], [0, 0, 0], [0, 0, 0]]}})"),
               Error);
  EXPECT_THROW(parse_scenario(R"({"ambient": {"type": "linear_strain", "strain": [[1, 0, 0], [0, 0, 0], [0, 0, 0]]}})"),
               Error);
}

TEST(Scenario, SolverOptionsValidated) {
  EXPECT_THROW(parse_scenario(R"({"solver": {"gamma": 0}})"), Error);
  EXPECT_THROW(parse_scenario(R"({"solver": {"gamma": 1.5}})"), Error);
  EXPECT_THROW(parse_scenario(R"({"solver": {"truncation": 3}})"), Error);
  EXPECT_THROW(parse_scenario(R"({"solver": {"max_iterations": 2.5}})"), Error);
}

TEST(Scenario, NegativeSeedRejected) {
  EXPECT_THROW(parse_scenario(R"({"seed": -1})"), Error);
}

TEST(Parse, ErrorCarriesLineAndColumn) {
  try {
    parse_json("{\n  \"particles\": [\n    {\"center\": [0, 0, 0] \"radius\": 1}\n  ]\n}");
    FAIL();
  } catch (const ParseError& e) {
    // the column is that of the last character of the unexpected token
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 33u);
    EXPECT_NE(std::string(e.what()).find("line 3, column 33"), std::string::npos) << e.what();
  }
}

TEST(Parse, ConfigOnlyDocument) {
  const auto cfg = parse_config(R"({"particles": [{"center": [1, 2, 3], "radius": 0.5}]})");
  ASSERT_EQ(cfg.size(), 1u);
  EXPECT_EQ(cfg[0].radius, 0.5);
  EXPECT_THROW(parse_config(R"({"particles": [], "ambient": {}})"), Error);
}

TEST(Files, AtomicWriteCreatesDirectoriesAndLeavesNoTemp) {
  const auto dir = scratch_dir("atomic");
  const auto target = dir / "nested" / "out.txt";
  write_atomic(target, "first");
  write_atomic(target, "second");
  EXPECT_EQ(read_file(target), "second");
  EXPECT_FALSE(std::filesystem::exists(target.string() + ".tmp"));
  std::filesystem::remove_all(dir);
}

TEST(Files, ErrorsNameThePath) {
  try {
    read_file("/nonexistent/stokesmor/file.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/stokesmor/file.json"), std::string::npos);
  }
  const auto dir = scratch_dir("blocked");
  write_atomic(dir / "file", "x");
  try {
    write_atomic(dir / "file" / "below.txt", "y");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
    EXPECT_NE(std::string(e.what()).find((dir / "file").string()), std::string::npos) << e.what();
  }
  std::filesystem::remove_all(dir);
}

TEST(Format, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) EXPECT_EQ(std::stod(fmt(v)), v);
}

TEST(Report, RoundTripRestoresField) {
  const auto cfg = generate_lattice(2, 1.0, 0.25);
  const AmbientField amb = LinearStrain{shear()};
  SolverOptions o;
  o.truncation = 2;
  const auto r = run(cfg, amb, o);
  const Json doc = parse_json(report_json(r.report, &r.field, false).dump());
  EXPECT_EQ(doc.at("terminated"), "tol");
  EXPECT_EQ(doc.at("residuals").size(), r.report.residuals.size());
  EXPECT_EQ(doc.at("rho").get<double>(), r.report.rho);
  EXPECT_FALSE(doc.contains("wall_seconds"));
  const FlowField back = field_from_report(doc, cfg, amb);
  for (const Vec3& x : {Vec3(0.5, 0.5, 0.5), Vec3(3, -1, 2), Vec3(0.1, 0.05, 0)})
    EXPECT_LE((back.velocity(x) - r.field.velocity(x)).norm(), 1e-15 * (1 + r.field.velocity(x).norm()));
}

TEST(Report, DivergedReportOmitsCoefficients) {
  IterationReport rep;
  rep.residuals = {1.0, 20.0};
  rep.resolved_residuals = {1.0, 20.0};
  rep.terminated = Termination::divergence;
  const Json doc = report_json(rep, nullptr, true);
  EXPECT_FALSE(doc.contains("coefficients"));
  EXPECT_TRUE(doc.contains("wall_seconds"));
  EXPECT_EQ(doc.at("terminated"), "div");
}

TEST(Report, CoefficientCountMismatchRejected) {
  const auto cfg = generate_lattice(2, 1.0, 0.25);
  const AmbientField amb = LinearStrain{shear()};
  const auto r = run(cfg, amb, SolverOptions{});
  const Json doc = report_json(r.report, &r.field, false);
  try {
    field_from_report(doc, generate_lattice(3, 1.0, 0.25), amb);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::mismatched_config);
  }
}

TEST(ResidualCsv, HeaderAndRows) {
  IterationReport rep;
  rep.residuals = {1.0, 0.5};
  rep.resolved_residuals = {1.0, 0.25};
  rep.max_updates = {0.75};
  const auto l = lines(residual_csv(rep, false));
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0], "k,residual,resolved_residual,max_update");
  EXPECT_EQ(l[1], "0,1,1,0.75");
  EXPECT_EQ(l[2], "1,0.5,0.25,");
  EXPECT_EQ(lines(residual_csv(rep, true))[0], "k,residual,resolved_residual,max_update,wall_seconds");
}

TEST(SweepCsv, HeaderAndExclusionNote) {
  SweepResult s;
  SweepPoint a;
  a.phi0 = 0.01;
  a.rho = 0.1;
  a.n = 27;
  a.seed = 3;
  a.theta_max = 2.5;
  a.iterations = 9;
  SweepPoint b = a;
  b.excluded = true;
  b.note = "diverged";
  s.points = {a, b};
  const auto l = lines(sweep_csv(s));
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0], "phi0,rho,N,seed,theta_max,iterations,excluded");
  EXPECT_EQ(l[1], "0.01,0.10000000000000001,27,3,2.5,9,");
  EXPECT_EQ(split(l[2]).back(), "diverged");
  EXPECT_TRUE(sweep_json(s).at("slope").is_null());
}

TEST(Grid, TwoByTwoByTwoMatchesDirectEvaluation) {
  ParticleConfig cfg;
  cfg.particles = {{Vec3::Zero(), 1.0}};
  const AmbientField amb = LinearStrain{shear()};
  const auto r = run(cfg, amb, SolverOptions{});
  GridSpec g;
  g.lo = Vec3(1.5, -2, 2);
  g.hi = Vec3(3, 2, 2.5);
  g.counts = {2, 2, 2};
  const auto l = lines(grid_csv(r.field, g, false));
  ASSERT_EQ(l.size(), 9u);
  EXPECT_EQ(l[0], "x,y,z,ux,uy,uz,flag");
  int row = 1;
  for (double x : {1.5, 3.0})
    for (double y : {-2.0, 2.0})
      for (double z : {2.0, 2.5}) {
        const auto c = split(l[row++]);
        ASSERT_EQ(c.size(), 7u);
        EXPECT_EQ(std::stod(c[0]), x);
        EXPECT_EQ(std::stod(c[1]), y);
        EXPECT_EQ(std::stod(c[2]), z);
        const Vec3 p(x, y, z);
        const Vec3 expect = shear_matrix() * p + dipole_velocity(-1.0 * shear(), Vec3::Zero(), 1.0, p);
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(std::stod(c[3 + k]), expect(k), 1e-15);
        EXPECT_EQ(c[6], "ok");
      }
}

TEST(Grid, InteriorPointsCarryRigidValues) {
  ParticleConfig cfg;
  cfg.particles = {{Vec3::Zero(), 1.0}};
  const AmbientField amb = LinearStrain{shear()};
  const auto r = run(cfg, amb, SolverOptions{});
  GridSpec g;
  g.lo = Vec3(-0.4, -0.4, -0.4);
  g.hi = Vec3(0.4, 0.4, 0.4);
  g.counts = {3, 3, 3};
  g.strain = true;
  const auto l = lines(grid_csv(r.field, g, true));
  ASSERT_EQ(l.size(), 28u);
  for (std::size_t k = 1; k < l.size(); ++k) {
    const auto c = split(l[k]);
    ASSERT_EQ(c.size(), 12u);
    for (int m = 3; m < 11; ++m) EXPECT_NEAR(std::stod(c[m]), 0.0, 1e-15) << l[k];
    EXPECT_EQ(c[11], "ok");
  }
}

TEST(Grid, StrainColumnsOnlyOnRequest) {
  ParticleConfig cfg;
  cfg.particles = {{Vec3::Zero(), 1.0}};
  const auto r = run(cfg, LinearStrain{shear()}, SolverOptions{});
  GridSpec g;
  g.lo = Vec3(2, 2, 2);
  g.hi = Vec3(3, 3, 3);
  EXPECT_EQ(split(lines(grid_csv(r.field, g, false))[1]).size(), 7u);
  EXPECT_EQ(lines(grid_csv(r.field, g, true))[0], "x,y,z,ux,uy,uz,exx,exy,exz,eyy,eyz,flag");
}

TEST(Grid, SingularAndSurfaceRowsFlagged) {
  ParticleConfig cfg;
  cfg.particles = {{Vec3::Zero(), 1.0}};
  const AmbientField amb = Stokeslet{Vec3(1, 0, 0), Vec3(3, 0, 0)};
  const auto r = run(cfg, amb, SolverOptions{});
  GridSpec g;
  g.lo = Vec3(1, 0, 0);
  g.hi = Vec3(3, 0, 0);
  g.counts = {3, 1, 1};
  const auto l = lines(grid_csv(r.field, g, true));
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(split(l[1]).back(), "surface");
  EXPECT_EQ(split(l[1])[6], "nan");
  EXPECT_EQ(split(l[2]).back(), "ok");
  EXPECT_EQ(split(l[3]).back(), "singular");
  EXPECT_EQ(split(l[3])[3], "nan");
}
