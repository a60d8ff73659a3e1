// JSON scenarios and reports, CSV exports, atomic file output.
#pragma once

#include "stokesmor/analysis.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace stokesmor {

using Json = nlohmann::json;

/// Malformed input text; line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(ErrorKind::invalid_input, what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct GeneratorSpec {
  enum class Kind { lattice, poisson };
  Kind kind = Kind::lattice;
  int n_per_side = 1;
  double spacing = 1.0;
  std::size_t count = 0;
  Box box;
  double min_gap = 1.0;
  double radius = 1.0;
};

struct GridSpec {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  std::array<int, 3> counts{1, 1, 1};
  bool strain = false;
};

struct SweepSpec {
  SweepFamily family;
  std::vector<double> phi0;
};

struct Scenario {
  ParticleConfig config;
  std::optional<GeneratorSpec> generator;
  std::optional<std::uint64_t> seed;
  std::optional<AmbientField> ambient;
  SolverOptions solver;
  std::optional<GridSpec> grid;
  std::optional<SweepSpec> sweep;
};

namespace detail {

inline std::string where(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& path) {
  if (!j.is_object()) throw Error(ErrorKind::invalid_input, (path.empty() ? "document" : path) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorKind::invalid_input, "unknown key '" + where(path, key) + "'");
  }
}

inline const Json& require(const Json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw Error(ErrorKind::invalid_input, "missing key '" + where(path, key) + "'");
  return j.at(key);
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw Error(ErrorKind::invalid_input, path + " must be a number");
  return j.get<double>();
}

inline long long integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw Error(ErrorKind::invalid_input, path + " must be an integer");
  return j.get<long long>();
}

inline bool boolean(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw Error(ErrorKind::invalid_input, path + " must be true or false");
  return j.get<bool>();
}

inline Vec3 vec3(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::invalid_input, path + " must be an array of 3 numbers");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]")};
}

inline TracelessSym3 strain(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::invalid_input, path + " must be a 3x3 array");
  Mat3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = vec3(j[r], path + "[" + std::to_string(r) + "]").transpose();
  const double scale = std::max(1.0, m.norm());
  if ((m - m.transpose()).norm() > 1e-12 * scale || std::abs(m.trace()) > 1e-12 * scale) {
    throw Error(ErrorKind::invalid_input, path + " must be symmetric and traceless");
  }
  return TracelessSym3::project(m);
}

inline Box box(const Json& j, const std::string& path) {
  check_keys(j, {"lo", "hi"}, path);
  Box b{vec3(require(j, "lo", path), path + ".lo"), vec3(require(j, "hi", path), path + ".hi")};
  if (!(b.hi.array() > b.lo.array()).all()) throw Error(ErrorKind::invalid_input, path + " must have hi > lo");
  return b;
}

inline AmbientField ambient(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw Error(ErrorKind::invalid_input, path + " needs a string 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "linear_strain") {
    check_keys(j, {"type", "strain"}, path);
    return LinearStrain{strain(require(j, "strain", path), path + ".strain")};
  }
  if (type == "rigid") {
    check_keys(j, {"type", "velocity", "omega", "center"}, path);
    RigidMotion r;
    if (j.contains("velocity")) r.velocity = vec3(j.at("velocity"), path + ".velocity");
    if (j.contains("omega")) r.omega = vec3(j.at("omega"), path + ".omega");
    if (j.contains("center")) r.center = vec3(j.at("center"), path + ".center");
    return r;
  }
  if (type == "stokeslet") {
    check_keys(j, {"type", "force", "location"}, path);
    return Stokeslet{vec3(require(j, "force", path), path + ".force"),
                     vec3(require(j, "location", path), path + ".location")};
  }
  if (type == "superposition") {
    check_keys(j, {"type", "parts"}, path);
    const Json& parts = require(j, "parts", path);
    if (!parts.is_array()) throw Error(ErrorKind::invalid_input, path + ".parts must be an array");
    Superposition s;
    for (std::size_t k = 0; k < parts.size(); ++k) s.parts.push_back(ambient(parts[k], path + ".parts[" + std::to_string(k) + "]"));
    return s;
  }
  throw Error(ErrorKind::invalid_input, path + ".type '" + type + "' is not one of linear_strain, rigid, stokeslet, superposition");
}

inline SolverOptions solver(const Json& j, const std::string& path) {
  check_keys(j,
             {"truncation", "gamma", "max_iterations", "tolerance", "residual_exponent", "quad_degree", "radial_nodes",
              "fit_window", "keep_history"},
             path);
  SolverOptions o;
  if (j.contains("truncation")) o.truncation = int(integer(j.at("truncation"), path + ".truncation"));
  if (j.contains("gamma")) o.gamma = number(j.at("gamma"), path + ".gamma");
  if (j.contains("max_iterations")) o.max_iterations = int(integer(j.at("max_iterations"), path + ".max_iterations"));
  if (j.contains("tolerance")) o.tolerance = number(j.at("tolerance"), path + ".tolerance");
  if (j.contains("residual_exponent")) o.residual_exponent = number(j.at("residual_exponent"), path + ".residual_exponent");
  if (j.contains("quad_degree")) o.quad_degree = int(integer(j.at("quad_degree"), path + ".quad_degree"));
  if (j.contains("radial_nodes")) o.radial_nodes = int(integer(j.at("radial_nodes"), path + ".radial_nodes"));
  if (j.contains("fit_window")) o.fit_window = int(integer(j.at("fit_window"), path + ".fit_window"));
  if (j.contains("keep_history")) o.keep_history = boolean(j.at("keep_history"), path + ".keep_history");
  o.validate();
  if (o.gamma == 0.0) throw Error(ErrorKind::invalid_input, path + ".gamma must be positive");
  return o;
}

inline std::vector<Particle> particles(const Json& j, const std::string& path) {
  if (!j.is_array()) throw Error(ErrorKind::invalid_input, path + " must be an array");
  std::vector<Particle> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string p = path + "[" + std::to_string(k) + "]";
    check_keys(j[k], {"center", "radius"}, p);
    out.push_back({vec3(require(j[k], "center", p), p + ".center"), number(require(j[k], "radius", p), p + ".radius")});
  }
  return out;
}

inline GeneratorSpec generator(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw Error(ErrorKind::invalid_input, path + " needs a string 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  GeneratorSpec g;
  if (kind == "lattice") {
    check_keys(j, {"kind", "n_per_side", "spacing", "radius"}, path);
    g.kind = GeneratorSpec::Kind::lattice;
    g.n_per_side = int(integer(require(j, "n_per_side", path), path + ".n_per_side"));
    g.spacing = number(require(j, "spacing", path), path + ".spacing");
    g.radius = number(require(j, "radius", path), path + ".radius");
  } else if (kind == "poisson") {
    check_keys(j, {"kind", "count", "box", "min_gap", "radius"}, path);
    g.kind = GeneratorSpec::Kind::poisson;
    const long long c = integer(require(j, "count", path), path + ".count");
    if (c < 0) throw Error(ErrorKind::invalid_input, path + ".count must be non-negative");
    g.count = std::size_t(c);
    g.box = box(require(j, "box", path), path + ".box");
    g.min_gap = number(require(j, "min_gap", path), path + ".min_gap");
    g.radius = number(require(j, "radius", path), path + ".radius");
  } else {
    throw Error(ErrorKind::invalid_input, path + ".kind '" + kind + "' is not one of lattice, poisson");
  }
  return g;
}

inline SweepSpec sweep(const Json& j, const std::string& path) {
  check_keys(j, {"family", "phi0"}, path);
  SweepSpec s;
  const Json& f = require(j, "family", path);
  const std::string fp = path + ".family";
  if (!f.is_object() || !f.contains("kind") || !f.at("kind").is_string()) {
    throw Error(ErrorKind::invalid_input, fp + " needs a string 'kind'");
  }
  const std::string kind = f.at("kind").get<std::string>();
  if (kind == "lattice" || kind == "fcc") {
    check_keys(f, {"kind", "n_per_side", "spacing"}, fp);
    s.family.kind = kind == "fcc" ? SweepFamily::Kind::fcc : SweepFamily::Kind::lattice;
    s.family.n_per_side = int(integer(require(f, "n_per_side", fp), fp + ".n_per_side"));
    s.family.spacing = number(require(f, "spacing", fp), fp + ".spacing");
  } else if (kind == "random") {
    check_keys(f, {"kind", "count", "box_side", "min_gap"}, fp);
    s.family.kind = SweepFamily::Kind::random;
    const long long c = integer(require(f, "count", fp), fp + ".count");
    if (c < 0) throw Error(ErrorKind::invalid_input, fp + ".count must be non-negative");
    s.family.count = std::size_t(c);
    s.family.box_side = number(require(f, "box_side", fp), fp + ".box_side");
    s.family.min_gap = number(require(f, "min_gap", fp), fp + ".min_gap");
  } else {
    throw Error(ErrorKind::invalid_input, fp + ".kind '" + kind + "' is not one of lattice, fcc, random");
  }
  const Json& list = require(j, "phi0", path);
  if (!list.is_array()) throw Error(ErrorKind::invalid_input, path + ".phi0 must be an array");
  for (std::size_t k = 0; k < list.size(); ++k) s.phi0.push_back(number(list[k], path + ".phi0[" + std::to_string(k) + "]"));
  return s;
}

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // byte is the 1-based offset of the offending character
    const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                         e.what(),
                     line, col);
  }
}

/// Builds a scenario from parsed JSON. Keys: particles | generator (+ seed),
/// box, ambient, solver, grid, sweep, seed. Unknown keys are rejected; a seed
/// is required whenever a generator or sweep is present.
inline Scenario scenario_from_json(const Json& j) {
  detail::check_keys(j, {"particles", "box", "generator", "seed", "ambient", "solver", "grid", "sweep"}, "");
  Scenario s;
  if (j.contains("seed")) {
    const Json& sd = j.at("seed");
    if (!sd.is_number_unsigned() && !(sd.is_number_integer() && sd.get<long long>() >= 0)) {
      throw Error(ErrorKind::invalid_input, "seed must be a non-negative integer");
    }
    s.seed = sd.get<std::uint64_t>();
  }
  if (j.contains("particles") && j.contains("generator")) {
    throw Error(ErrorKind::invalid_input, "give either 'particles' or 'generator', not both");
  }
  if (j.contains("particles")) s.config.particles = detail::particles(j.at("particles"), "particles");
  if (j.contains("box")) s.config.box = detail::box(j.at("box"), "box");
  if (j.contains("generator")) {
    if (!s.seed) throw Error(ErrorKind::invalid_input, "a seed is required when a generator is used");
    s.generator = detail::generator(j.at("generator"), "generator");
    const GeneratorSpec& g = *s.generator;
    if (g.kind == GeneratorSpec::Kind::lattice) {
      s.config = generate_lattice(g.n_per_side, g.spacing, g.radius);
    } else {
      s.config = generate_poisson_disk(g.count, g.box, g.min_gap, g.radius, *s.seed);
    }
  }
  if (j.contains("ambient")) s.ambient = detail::ambient(j.at("ambient"), "ambient");
  if (j.contains("solver")) s.solver = detail::solver(j.at("solver"), "solver");
  if (j.contains("grid")) {
    const Json& g = j.at("grid");
    detail::check_keys(g, {"lo", "hi", "counts", "strain"}, "grid");
    GridSpec gs;
    gs.lo = detail::vec3(detail::require(g, "lo", "grid"), "grid.lo");
    gs.hi = detail::vec3(detail::require(g, "hi", "grid"), "grid.hi");
    const Json& c = detail::require(g, "counts", "grid");
    if (!c.is_array() || c.size() != 3) throw Error(ErrorKind::invalid_input, "grid.counts must be 3 integers");
    for (int k = 0; k < 3; ++k) {
      const long long n = detail::integer(c[k], "grid.counts");
      if (n < 1) throw Error(ErrorKind::invalid_input, "grid.counts must be positive");
      gs.counts[k] = int(n);
    }
    if (g.contains("strain")) gs.strain = detail::boolean(g.at("strain"), "grid.strain");
    s.grid = gs;
  }
  if (j.contains("sweep")) {
    s.sweep = detail::sweep(j.at("sweep"), "sweep");
    if (!s.seed) throw Error(ErrorKind::invalid_input, "a seed is required when a sweep generator is used");
    s.sweep->family.seed = *s.seed;
    if (s.ambient) s.sweep->family.ambient = *s.ambient;
  }
  return s;
}

inline Scenario parse_scenario(const std::string& text) { return scenario_from_json(parse_json(text)); }

/// Configuration only: {"particles":[{"center":[x,y,z],"radius":r},...],"box":{"lo":[..],"hi":[..]}}.
inline ParticleConfig parse_config(const std::string& text) {
  const Json j = parse_json(text);
  detail::check_keys(j, {"particles", "box"}, "");
  ParticleConfig cfg;
  cfg.particles = detail::particles(detail::require(j, "particles", ""), "particles");
  if (j.contains("box")) cfg.box = detail::box(j.at("box"), "box");
  return cfg;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary file in the same directory and renames it over
/// the target, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorKind::io, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::io, "cannot move output into place at " + path.string());
  }
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const Vec3& v) { return Json::array({v(0), v(1), v(2)}); }

inline Json to_json(const TracelessSym3& s) {
  const Mat3 m = s.matrix();
  Json out = Json::array();
  for (int r = 0; r < 3; ++r) out.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return out;
}

inline Json to_json(const ValidationReport& r, std::size_t n) {
  Json pairs = Json::array();
  for (const auto& [a, b] : r.overlapping_pairs) pairs.push_back(Json::array({a, b}));
  return Json{{"particles", n},
              {"disjoint", r.disjoint},
              {"separated", r.separated()},
              {"d_min", finite_or_null(r.d_min)},
              {"r_max", r.r_max},
              {"phi0", r.phi0},
              {"theta_max", finite_or_null(r.theta_max)},
              {"overlapping_pairs", pairs}};
}

inline Json to_json(const SolverOptions& o) {
  return Json{{"truncation", o.truncation},     {"gamma", o.gamma},
              {"max_iterations", o.max_iterations}, {"tolerance", o.tolerance},
              {"residual_exponent", o.residual_exponent}, {"quad_degree", o.quad_degree},
              {"radial_nodes", o.radial_nodes}, {"fit_window", o.fit_window},
              {"keep_history", o.keep_history}};
}

inline Json coefficients_json(const FlowField& f) {
  Json dip = Json::array(), col = Json::array();
  for (const auto& t : f.terms()) {
    dip.push_back(to_json(t.dipole.coefficient));
    Json c = Json::array();
    if (t.collocation) {
      for (int m = 0; m < kCollocationSize; ++m) c.push_back(t.collocation->coefficients()(m));
    }
    col.push_back(c);
  }
  return Json{{"dipoles", dip}, {"collocation", col}};
}

/// Report document. Wall times are included only on request so that repeated
/// runs produce identical bytes. Coefficients are omitted when `field` is null
/// (a diverged run).
inline Json report_json(const IterationReport& r, const FlowField* field, bool timings) {
  Json j{{"operator_scope", "dipole subspace shadow of sum_i Q_i"},
         {"residuals", r.residuals},
         {"resolved_residuals", r.resolved_residuals},
         {"max_updates", r.max_updates},
         {"rho", r.rho},
         {"iterations", r.iterations},
         {"terminated", to_string(r.terminated)},
         {"phi0", r.phi0},
         {"options", to_json(r.options)}};
  if (field) j["coefficients"] = coefficients_json(*field);
  if (timings) j["wall_seconds"] = r.wall_seconds;
  return j;
}

inline std::string residual_csv(const IterationReport& r, bool timings) {
  std::string out = timings ? "k,residual,resolved_residual,max_update,wall_seconds\n"
                            : "k,residual,resolved_residual,max_update\n";
  for (std::size_t k = 0; k < r.residuals.size(); ++k) {
    out += std::to_string(k) + "," + fmt(r.residuals[k]) + "," + fmt(r.resolved_residuals[k]) + ",";
    out += k < r.max_updates.size() ? fmt(r.max_updates[k]) : std::string();
    if (timings) out += "," + (k < r.wall_seconds.size() ? fmt(r.wall_seconds[k]) : std::string());
    out += "\n";
  }
  return out;
}

/// Restores the radiated terms stored by report_json onto `cfg`.
inline FlowField field_from_report(const Json& report, const ParticleConfig& cfg, const AmbientField& ambient) {
  const Json& coeffs = detail::require(report, "coefficients", "report");
  const Json& dip = detail::require(coeffs, "dipoles", "report.coefficients");
  const Json& col = detail::require(coeffs, "collocation", "report.coefficients");
  if (!dip.is_array() || dip.size() != cfg.size() || !col.is_array() || col.size() != cfg.size()) {
    throw Error(ErrorKind::mismatched_config, "report coefficients do not match the configuration size");
  }
  CoefficientSnapshot snap;
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    snap.dipoles.push_back(detail::strain(dip[i], "report.coefficients.dipoles"));
    CollocationCoefficients c = CollocationCoefficients::Zero();
    if (!col[i].empty()) {
      if (col[i].size() != std::size_t(kCollocationSize)) {
        throw Error(ErrorKind::invalid_input, "collocation coefficient list has the wrong length");
      }
      for (int m = 0; m < kCollocationSize; ++m) c(m) = detail::number(col[i][m], "report.coefficients.collocation");
    }
    snap.collocation.push_back(c);
  }
  return field_from_snapshot(ambient, cfg, snap);
}

inline std::string sweep_csv(const SweepResult& s) {
  std::string out = "phi0,rho,N,seed,theta_max,iterations,excluded\n";
  for (const auto& p : s.points) {
    out += fmt(p.phi0) + "," + fmt(p.rho) + "," + std::to_string(p.n) + "," + std::to_string(p.seed) + "," +
           fmt(p.theta_max) + "," + std::to_string(p.iterations) + "," + (p.excluded ? p.note : std::string()) + "\n";
  }
  return out;
}

inline Json sweep_json(const SweepResult& s) {
  Json pts = Json::array();
  for (const auto& p : s.points) {
    pts.push_back(Json{{"phi0", p.phi0},
                       {"target_phi0", p.target_phi0},
                       {"rho", p.rho},
                       {"n", p.n},
                       {"seed", p.seed},
                       {"theta_max", finite_or_null(p.theta_max)},
                       {"iterations", p.iterations},
                       {"terminated", to_string(p.terminated)},
                       {"excluded", p.excluded},
                       {"note", p.note}});
  }
  Json j{{"points", pts}};
  if (s.fit) {
    j["slope"] = s.fit->slope;
    j["intercept"] = s.fit->intercept;
    j["slope_stderr"] = s.fit->slope_stderr;
  } else {
    j["slope"] = nullptr;
  }
  return j;
}

/// Row-major grid (x slowest). The last column flags rows: ok, singular (on a
/// point force; values are nan) or surface (on a sphere, strain is nan).
inline std::string grid_csv(const FlowField& field, const GridSpec& g, bool with_strain) {
  std::string out = with_strain ? "x,y,z,ux,uy,uz,exx,exy,exz,eyy,eyz,flag\n" : "x,y,z,ux,uy,uz,flag\n";
  const auto singular = field.ambient().singular_points();
  auto coord = [&](int axis, int k) {
    return g.counts[axis] == 1 ? g.lo(axis)
                               : g.lo(axis) + (g.hi(axis) - g.lo(axis)) * double(k) / double(g.counts[axis] - 1);
  };
  const std::string nan = "nan";
  for (int ix = 0; ix < g.counts[0]; ++ix) {
    for (int iy = 0; iy < g.counts[1]; ++iy) {
      for (int iz = 0; iz < g.counts[2]; ++iz) {
        const Vec3 x(coord(0, ix), coord(1, iy), coord(2, iz));
        std::string row = fmt(x(0)) + "," + fmt(x(1)) + "," + fmt(x(2));
        bool on_force = false;
        for (const Vec3& s : singular) on_force = on_force || (x - s).norm() == 0.0;
        if (on_force) {
          row += "," + nan + "," + nan + "," + nan;
          if (with_strain) row += "," + nan + "," + nan + "," + nan + "," + nan + "," + nan;
          out += row + ",singular\n";
          continue;
        }
        const Vec3 u = field.velocity(x);
        row += "," + fmt(u(0)) + "," + fmt(u(1)) + "," + fmt(u(2));
        std::string flag = "ok";
        if (with_strain) {
          try {
            const TracelessSym3 e = field.strain(x);
            row += "," + fmt(e.xx()) + "," + fmt(e.xy()) + "," + fmt(e.xz()) + "," + fmt(e.yy()) + "," + fmt(e.yz());
          } catch (const Error& err) {
            if (err.kind() != ErrorKind::on_surface) throw;
            row += "," + nan + "," + nan + "," + nan + "," + nan + "," + nan;
            flag = "surface";
          }
        }
        out += row + "," + flag + "\n";
      }
    }
  }
  return out;
}

}  // namespace stokesmor
