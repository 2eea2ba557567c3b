#pragma once

// dhym-lab verify: artifact hashes, a byte-for-byte rerun from the stored config,
// and invariants recomputed from the stored solution.

#include <cstdlib>
#include <set>
#include <unistd.h>

#include "dhym/dhym_solver.hpp"
#include "dhym/lab/common.hpp"
#include "dhym/lab/fiber_cmds.hpp"
#include "dhym/lab/mirror_cmd.hpp"
#include "dhym/lab/stability_cmd.hpp"

namespace dhym::lab {

using Runner = RunResult (*)(const RunOptions&);

inline Runner runner_for(const std::string& command) {
  if (command == "stability") return run_stability;
  if (command == "geodesic") return run_geodesic;
  if (command == "dhym") return run_dhym;
  if (command == "mirror") return run_mirror;
  if (command == "model-curve") return run_model_curve;
  return nullptr;
}

// The exit code is appended after the run so that verify can compare it.
inline void record_outcome(const fs::path& out, const RunResult& r) {
  if (!fs::exists(out / "manifest")) return;
  std::string msg = r.message;
  for (char& ch : msg)
    if (ch == '\n' || ch == '\r') ch = ' ';
  std::ofstream f(out / "manifest", std::ios::app);
  f << "[outcome]\nexit = " << r.code << "\nmessage = " << msg << "\n";
}

struct Check {
  std::string name;
  bool ok = false;
  std::string detail;
};

inline double cell(const OutputTable& t, size_t row, const std::string& col) {
  const std::string& s = t.rows().at(row).at(t.column(col));
  if (s.empty()) return std::nan("");
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "non-numeric cell '" + s + "' in column " + col);
  }
}

inline void check_hashes(const fs::path& dir, const std::string& prefix, std::vector<Check>& out) {
  const Config m = Config::load((dir / "manifest").string());
  if (!m.has_section("artifacts")) {
    out.push_back({"hashes " + prefix + "manifest", false, "no [artifacts] section"});
    return;
  }
  size_t good = 0, total = 0;
  std::string bad;
  for (const auto& [name, hash] : m.data().at("artifacts")) {
    ++total;
    const fs::path p = dir / name;
    if (!fs::exists(p)) {
      bad += (bad.empty() ? "" : ", ") + prefix + name + " missing";
      continue;
    }
    if (file_hash(p) != hash.text) {
      bad += (bad.empty() ? "" : ", ") + prefix + name + " changed";
      continue;
    }
    ++good;
    if (p.filename() == "manifest") check_hashes(p.parent_path(), prefix + p.parent_path().filename().string() + "/", out);
  }
  out.push_back({"hashes " + (prefix.empty() ? std::string(".") : prefix), bad.empty(),
                 bad.empty() ? std::to_string(good) + "/" + std::to_string(total) + " artifacts match" : bad});
}

inline std::set<std::string> csv_files(const fs::path& dir) {
  std::set<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") out.insert(fs::relative(e.path(), dir).generic_string());
  return out;
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "dhym-verify-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw Error(ErrorCode::IoError, "cannot create a temporary directory");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline void check_rerun(const fs::path& dir, const Config& man, int jobs, std::vector<Check>& out) {
  const std::string command = man.str("run", "command");
  Runner run = runner_for(command);
  TempDir tmp;
  RunOptions r;
  r.config = dir / "config";
  r.out = tmp.path() / "run";
  r.jobs = jobs;
  bool svg = false;
  if (man.has_section("artifacts"))
    for (const auto& kv : man.data().at("artifacts")) svg = svg || fs::path(kv.first).extension() == ".svg";
  r.svg = svg;
  if (fs::exists(dir / "ring")) r.ring_override = dir / "ring";
  std::ostringstream sink;
  r.log = &sink;
  RunResult res;
  try {
    res = run(r);
  } catch (const Error& e) {
    res = {kInputError, e.what()};
  }
  if (man.has("outcome", "exit")) {
    const int want = man.integer("outcome", "exit", -1);
    out.push_back({"rerun exit code", res.code == want, "recorded " + std::to_string(want) + ", rerun " + std::to_string(res.code)});
  }
  if (!fs::exists(r.out)) {
    out.push_back({"rerun csv bytes", false, "rerun wrote nothing: " + res.message});
    return;
  }
  const auto a = csv_files(dir), b = csv_files(r.out);
  std::string bad;
  size_t same = 0;
  for (const auto& f : a) {
    if (!b.count(f)) {
      bad += (bad.empty() ? "" : ", ") + f + " not reproduced";
      continue;
    }
    if (read_file(dir / f) != read_file(r.out / f)) bad += (bad.empty() ? "" : ", ") + f + " differs";
    else ++same;
  }
  for (const auto& f : b)
    if (!a.count(f)) bad += (bad.empty() ? "" : ", ") + f + " is new";
  out.push_back({"rerun csv bytes", bad.empty(), bad.empty() ? std::to_string(same) + " tables identical" : bad});
}

// ---- invariants recomputed from the stored solution ----

inline void invariants_stability(const fs::path& dir, const Config& man, std::vector<Check>& out) {
  const OutputTable v = OutputTable::read(dir / "verdict.csv");
  static const std::set<std::string> known{"Candidate", "ChernObstructed", "AngleUndefined", "HEmptyByCharge", "PhaseObstructed"};
  int code = kOk;
  bool statuses = true, margins = true, invalid = false;
  std::string detail;
  for (size_t r = 0; r < v.rows().size(); ++r) {
    const std::string st = v.rows()[r][v.column("status")];
    if (!known.count(st)) {
      invalid = true;
      continue;
    }
    if (st == "AngleUndefined") code = kAngleUndefined;
    else if (st != "Candidate" && code != kAngleUndefined) code = kObstructed;
    if (st == "Candidate")
      for (const char* col : {"margin_chern", "margin_zx", "margin_zv", "margin_phase"}) {
        double m = cell(v, r, col);
        if (std::isfinite(m) && !(m > 0)) {
          margins = false;
          detail = "row " + std::to_string(r + 1) + " is Candidate with " + col + " = " + fmt(m);
        }
      }
  }
  if (invalid) code = kInputError;
  statuses = !invalid;
  out.push_back({"verdict statuses", statuses, std::to_string(v.rows().size()) + " rows"});
  out.push_back({"candidate margins positive", margins, margins ? "all candidate margins > 0" : detail});
  if (man.has("outcome", "exit")) {
    const int want = man.integer("outcome", "exit", -1);
    out.push_back({"exit code matches verdicts", code == want, "verdicts give " + std::to_string(code) + ", recorded " + std::to_string(want)});
  }
}

inline PotentialField read_field(const fs::path& p, const std::string& col, size_t nodes) {
  const OutputTable t = OutputTable::read(p);
  if (t.rows().size() != nodes) throw Error(ErrorCode::DimensionMismatch, p.string() + " has the wrong number of nodes");
  PotentialField f(static_cast<Eigen::Index>(nodes));
  for (size_t r = 0; r < nodes; ++r) f(static_cast<Eigen::Index>(r)) = cell(t, r, col);
  return f;
}

inline void invariants_dhym(const fs::path& dir, std::vector<Check>& out) {
  const Config c = Config::load((dir / "config").string());
  const FiberGeometry g = parse_fiber(c);
  FiberCalculus fc(g);
  const OutputTable sum = OutputTable::read(dir / "summary.csv");
  const double theta = cell(sum, 0, "theta_hat");
  const PotentialField phi = read_field(dir / "phi.csv", "phi", fc.nodes());
  // the stored potential carries 12 digits; the phase operator amplifies that by about the squared grid size
  double res = phase_residual(fc, phi, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(fc.nodes()), theta));
  out.push_back({"dhym phase residual of stored phi", res < 1e-6, "sup |Theta(phi) - theta_hat| = " + fmt(res)});
  const double mean = phi.mean();
  out.push_back({"zero-mean gauge", std::abs(mean) < 1e-10, "mean = " + fmt(mean)});
  const double v = volume_functional(fc, phi), bound = std::abs(fc.class_integral());
  out.push_back({"volume at least class modulus", v >= bound * (1 - 1e-9), "V = " + fmt(v) + ", |int Omega| = " + fmt(bound)});
  if (c.has("dhym", "theta_hat")) return;
  auto h = hat_theta(fc, &phi);
  const bool lift_ok = h.lift && std::abs(*h.lift - theta) < 1e-6;
  out.push_back({"theta_hat is the class lift", lift_ok, h.lift ? "lift " + fmt(*h.lift) + ", stored " + fmt(theta) : "no lift"});
}

inline void invariants_geodesic(const fs::path& dir, const Config& man, std::vector<Check>& out) {
  const OutputTable sum = OutputTable::read(dir / "summary.csv");
  const double tol = man.has("geodesic", "tol") ? man.num("geodesic", "tol") : 1e-8;
  bool conv = true;
  std::string detail;
  for (size_t r = 0; r < sum.rows().size(); ++r) {
    const bool ok = sum.rows()[r][sum.column("converged")] == "true" && cell(sum, r, "residual") <= 10 * tol;
    if (!ok) {
      conv = false;
      detail += (detail.empty() ? "" : ", ") + std::string("eps = ") + sum.rows()[r][0];
    }
  }
  out.push_back({"geodesic residuals", conv, conv ? "all eps within 10 tol" : "failed at " + detail});
  // J and C along each path: J convex, C affine up to the probe scale
  for (size_t r = 0; r < sum.rows().size(); ++r) {
    const fs::path conv_file = dir / eps_dir(cell(sum, r, "epsilon")) / "convexity.csv";
    if (!fs::exists(conv_file)) continue;
    const OutputTable cv = OutputTable::read(conv_file);
    for (size_t k = 0; k < cv.rows().size(); ++k) {
      const std::string& name = cv.rows()[k][0];
      const double lo = cell(cv, k, "min_d2"), scale = cell(cv, k, "scale");
      if (name == "j")
        out.push_back({"J convex at eps = " + sum.rows()[r][0], lo >= -1e-6 * std::max(scale, 1.0), "min second difference " + fmt(lo)});
    }
  }
}

inline void invariants_model_curve(const fs::path& dir, const Config& man, std::vector<Check>& out) {
  const OutputTable br = OutputTable::read(dir / "branch.csv");
  const bool in_branch_run = !man.has("model", "branch");
  double lo = 1e300;
  for (size_t r = 0; r < br.rows().size(); ++r) lo = std::min(lo, cell(br, r, "margin"));
  if (in_branch_run) out.push_back({"ray stays in the branch", br.rows().empty() || lo > 0, "min margin " + fmt(lo)});
  const OutputTable sl = OutputTable::read(dir / "slope.csv");
  bool finite = true;
  for (size_t r = 0; r < sl.rows().size(); ++r)
    finite = finite && std::isfinite(cell(sl, r, "re_numeric")) && std::isfinite(cell(sl, r, "im_numeric"));
  out.push_back({"slope samples finite", finite, std::to_string(sl.rows().size()) + " samples"});
}

inline void invariants_mirror(const fs::path& dir, const Config& man, std::vector<Check>& out) {
  if (man.str("mirror", "family", "p1") != "p1") {
    const OutputTable s = OutputTable::read(dir / "section.csv");
    bool finite = true;
    for (const auto& row : s.rows())
      for (const auto& v : row) finite = finite && std::isfinite(std::stod(v));
    out.push_back({"section finite", finite, std::to_string(s.rows().size()) + " nodes"});
    return;
  }
  const Config c = Config::load((dir / "config").string());
  const int k = c.integer("mirror", "k", 3);
  const double delta = cnum(c, "mirror", "delta", 1.0);
  std::vector<double> s = c.has("mirror", "s") ? cnums(c, "mirror", "s") : std::vector<double>{0, 1, 3, 20};
  for (double sv : s) {
    const OutputTable t = OutputTable::read(dir / s_file(sv));
    double gap = 0;
    for (size_t r = 0; r < t.rows().size(); ++r)
      gap = std::max(gap, std::abs(cell(t, r, "theta_tilde") - p1_model_family(k, delta, sv, cell(t, r, "y"))));
    out.push_back({"section s = " + fmt(sv) + " matches the family", gap < 1e-6, "sup gap " + fmt(gap)});
  }
  const OutputTable g = OutputTable::read(dir / "gaps.csv");
  const double left = cell(g, 0, "gap"), right = cell(g, 1, "gap");
  out.push_back({"limit gaps 4 delta and 2 delta", std::abs(left - 4 * delta) < 1e-12 && std::abs(right - 2 * delta) < 1e-12,
                 "left " + fmt(left) + ", right " + fmt(right)});
}

// o.out is the run directory; o.config, if given, must be the config the run used
inline RunResult run_verify(const RunOptions& o) {
  std::ostream& log = *o.log;
  const fs::path dir = o.out;
  if (!fs::exists(dir / "manifest")) return {kInputError, "no manifest in " + dir.string()};
  const Config man = Config::load((dir / "manifest").string());
  const std::string command = man.str("run", "command", "");
  if (!runner_for(command)) return {kInputError, "manifest names no known command"};
  if (!fs::exists(dir / "config")) return {kInputError, "run directory has no config copy"};

  std::vector<Check> checks;
  if (!o.config.empty()) {
    const std::string want = man.str("inputs", "config_hash", "");
    const std::string got = file_hash(o.config);
    checks.push_back({"config matches the run", got == want, "hash " + got + ", recorded " + want});
  }
  check_hashes(dir, "", checks);
  check_rerun(dir, man, o.jobs, checks);
  try {
    if (command == "stability") invariants_stability(dir, man, checks);
    else if (command == "dhym") invariants_dhym(dir, checks);
    else if (command == "geodesic") invariants_geodesic(dir, man, checks);
    else if (command == "model-curve") invariants_model_curve(dir, man, checks);
    else if (command == "mirror") invariants_mirror(dir, man, checks);
  } catch (const Error& e) {
    checks.push_back({"invariants readable", false, e.what()});
  }
  size_t passed = 0;
  for (const auto& c : checks) {
    log << (c.ok ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    passed += c.ok ? 1 : 0;
  }
  const std::string summary = command + " run, " + std::to_string(passed) + "/" + std::to_string(checks.size()) + " checks pass";
  return {passed == checks.size() ? kOk : kVerifyFailed, summary};
}

}  // namespace dhym::lab
