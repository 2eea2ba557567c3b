#pragma once

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "dhym/config.hpp"
#include "dhym/expr.hpp"
#include "dhym/functionals.hpp"
#include "dhym/output.hpp"

namespace dhym::lab {

namespace fs = std::filesystem;

enum Exit : int { kOk = 0, kVerifyFailed = 1, kInputError = 2, kObstructed = 10, kAngleUndefined = 11, kSolverFailure = 20 };

struct RunOptions {
  fs::path config;
  fs::path out;
  int jobs = 1;
  bool svg = false;
  fs::path ring_override;  // verify reruns against the copy kept in the run directory
  std::ostream* log = &std::cout;
};

struct RunResult {
  int code = kOk;
  std::string message;
};

inline Expr parse_at(const Config& c, const std::string& sec, const std::string& key, const std::string& text) {
  try {
    return Expr::parse(text);
  } catch (const Error& err) {
    c.fail_at(sec, key, err.what());
  }
}

inline double const_expr(const Config& c, const std::string& sec, const std::string& key, const std::string& text) {
  Expr e = parse_at(c, sec, key, text);
  if (e.arity() != 0) c.fail_at(sec, key, "expected a constant, got '" + text + "'");
  return e({0, 0, 0, 0});
}

// numeric keys accept constant expressions such as tan(0.6) or 2*pi
inline double cnum(const Config& c, const std::string& sec, const std::string& key) {
  return const_expr(c, sec, key, c.str(sec, key));
}
inline double cnum(const Config& c, const std::string& sec, const std::string& key, double def) {
  return c.has(sec, key) ? cnum(c, sec, key) : def;
}
inline std::vector<double> cnums(const Config& c, const std::string& sec, const std::string& key) {
  std::vector<double> out;
  for (const auto& t : split_list(c.str(sec, key))) out.push_back(const_expr(c, sec, key, t));
  if (out.empty()) c.fail_at(sec, key, "empty list");
  return out;
}

inline Expr expr_at(const Config& c, const std::string& sec, const std::string& key) {
  return parse_at(c, sec, key, c.str(sec, key));
}

// [fiber] n, grid, omega, alpha | theta, background
inline FiberGeometry parse_fiber(const Config& c) {
  const int n = c.integer("fiber", "n", 1);
  if (n < 1 || n > 2) c.fail_at("fiber", "n", "fiber dimension must be 1 or 2");
  auto grid = cnums(c, "fiber", "grid");
  std::vector<int> dims;
  if (grid.size() == 1) dims.assign(static_cast<size_t>(2 * n), static_cast<int>(grid[0]));
  else if (static_cast<int>(grid.size()) == 2 * n)
    for (double g : grid) dims.push_back(static_cast<int>(g));
  else c.fail_at("fiber", "grid", "grid needs one size or one per real axis");
  for (size_t k = 0; k < dims.size(); ++k)
    if (static_cast<double>(dims[k]) != grid[std::min(k, grid.size() - 1)])
      c.fail_at("fiber", "grid", "grid sizes must be integers");

  auto diag = [&](const std::string& key, double def) {
    CMat m = CMat::Zero(n, n);
    std::vector<double> v = c.has("fiber", key) ? cnums(c, "fiber", key) : std::vector<double>(static_cast<size_t>(n), def);
    if (static_cast<int>(v.size()) != n) c.fail_at("fiber", key, "need one diagonal entry per complex dimension");
    for (int k = 0; k < n; ++k) m(k, k) = v[static_cast<size_t>(k)];
    return m;
  };
  CMat omega = diag("omega", 1.0), alpha;
  if (c.has("fiber", "theta")) {
    if (c.has("fiber", "alpha")) c.fail_at("fiber", "theta", "give alpha or theta, not both");
    if (n != 1) c.fail_at("fiber", "theta", "theta shorthand is for n = 1");
    alpha = omega * std::tan(cnum(c, "fiber", "theta"));
  } else {
    alpha = diag("alpha", 0.0);
  }
  FiberGeometry g;
  g.n = n;
  g.grid = dims;
  g.omega0 = omega;
  g.alpha0 = alpha;
  try {
    g.validate();
  } catch (const Error& e) {
    c.fail_at("fiber", c.has("fiber", "alpha") ? "alpha" : "grid", e.what());
  }
  if (c.has("fiber", "background")) {
    Expr b = expr_at(c, "fiber", "background");
    if (b.arity() > 2 * n) c.fail_at("fiber", "background", "uses a coordinate beyond the fiber");
    SpectralTorus t(g.grid);
    g.background.resize(static_cast<Eigen::Index>(t.size()));
    for (size_t p = 0; p < t.size(); ++p) {
      Expr::Vars x{0, 0, 0, 0};
      for (int a = 0; a < t.rank(); ++a) x[static_cast<size_t>(a)] = t.coord(p, a);
      g.background(static_cast<Eigen::Index>(p)) = b(x);
    }
  }
  return g;
}

// field sampled from an expression on the fiber grid
inline PotentialField sample_field(const FiberGeometry& g, const Expr& e) {
  SpectralTorus t(g.grid);
  PotentialField f(static_cast<Eigen::Index>(t.size()));
  for (size_t p = 0; p < t.size(); ++p) {
    Expr::Vars x{0, 0, 0, 0};
    for (int a = 0; a < t.rank(); ++a) x[static_cast<size_t>(a)] = t.coord(p, a);
    f(static_cast<Eigen::Index>(p)) = e(x);
  }
  return f;
}

inline OutputTable field_table(const FiberGeometry& g, const PotentialField& f, const std::string& name = "phi") {
  SpectralTorus t(g.grid);
  std::vector<std::string> cols;
  for (int a = 0; a < t.rank(); ++a) cols.push_back("x" + std::to_string(a + 1));
  cols.push_back(name);
  OutputTable tab(cols);
  for (size_t p = 0; p < t.size(); ++p) {
    std::vector<double> r;
    for (int a = 0; a < t.rank(); ++a) r.push_back(t.coord(p, a));
    r.push_back(f(static_cast<Eigen::Index>(p)));
    tab.add_numbers(r);
  }
  return tab;
}

inline void prepare_out(const RunOptions& o) {
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + o.out.string() + ": " + ec.message());
}

// copies the config into the run directory and records both hashes
inline void record_config(const RunOptions& o, RunManifest& m, const Config& c) {
  const std::string text = read_file(o.config);
  write_file(o.out / "config", text);
  m.set("inputs", "config_source", fs::absolute(o.config).lexically_normal().string());
  m.set("inputs", "config_hash", hash_hex(fnv1a(text)));
  m.set("inputs", "seed", std::to_string(lab_seed()));
  (void)c;
}

inline void record_conventions(RunManifest& m) {
  m.set("conventions", "ddbar", "i ddbar phi has matrix 2 d_j d_kbar phi; no 2pi factors");
  m.set("conventions", "fiber_integrals", "int (omega + i alpha)^n = int det(omega + i alpha) dV, torus volume 1");
  m.set("conventions", "gauge", "potentials stored with zero grid mean");
  m.set("conventions", "csv_digits", "12 significant");
}

inline void record_fiber(RunManifest& m, const FiberGeometry& g) {
  std::string grid;
  for (int d : g.grid) grid += (grid.empty() ? "" : ",") + std::to_string(d);
  m.set("fiber", "n", std::to_string(g.n));
  m.set("fiber", "grid", grid);
  for (int k = 0; k < g.n; ++k) {
    m.set("fiber", "omega_" + std::to_string(k + 1), g.omega0(k, k).real());
    m.set("fiber", "alpha_" + std::to_string(k + 1), g.alpha0(k, k).real());
  }
}

}  // namespace dhym::lab
