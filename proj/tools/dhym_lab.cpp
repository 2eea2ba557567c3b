// dhym-lab: batch driver for the stability, fiber, mirror and model-curve experiments.

#include <iostream>

#include <CLI11.hpp>

#include "dhym/lab/verify.hpp"

namespace {

using dhym::lab::RunOptions;
using dhym::lab::RunResult;

int finish(const std::string& command, const RunResult& r) {
  std::ostream& os = r.code == dhym::lab::kOk ? std::cout : std::cerr;
  os << "dhym-lab " << command << ": " << (r.message.empty() ? "done" : r.message) << " (exit " << r.code << ")\n";
  return r.code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dhym-lab: deformed Hermitian-Yang-Mills experiments"};
  app.require_subcommand(0, 1);
  std::string verify_dir;
  app.add_option("--verify", verify_dir, "Verify a run directory (same as the verify subcommand)");

  RunOptions opt;
  std::string config, out, verify_pos;
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {{"stability", "Classify classes on a blow-up or builtin ring"},
                      {"geodesic", "Solve epsilon-geodesics between two fiber potentials"},
                      {"dhym", "Solve the fiber dHYM equation"},
                      {"mirror", "Legendre transform and SYZ sections"},
                      {"model-curve", "Model test curve and algebraic slope"},
                      {"verify", "Check hashes, rerun and invariants of a run directory"}};
  std::vector<CLI::App*> cmds;
  for (const auto& s : subs) {
    CLI::App* c = app.add_subcommand(s.name, s.help);
    bool verify = std::string(s.name) == "verify";
    auto* cfg = c->add_option("--config", config, verify ? "Config the run should have used" : "Config file");
    auto* o = c->add_option("--out", out, verify ? "Run directory to verify" : "Output directory");
    if (!verify) {
      cfg->required()->check(CLI::ExistingFile);
      o->required();
    } else {
      c->add_option("dir", verify_pos, "Run directory to verify");
    }
    c->add_option("--jobs", opt.jobs, "Parallel tasks")->check(CLI::PositiveNumber);
    c->add_flag("--svg", opt.svg, "Write static SVG figures");
    cmds.push_back(c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : dhym::lab::kInputError;
  }

  std::string command;
  for (auto* c : cmds)
    if (c->parsed()) command = c->get_name();
  if (command.empty() && !verify_dir.empty()) command = "verify";
  if (command.empty()) {
    std::cerr << app.help();
    return dhym::lab::kInputError;
  }
  opt.config = config;
  opt.out = out;
  if (command == "verify") {
    if (!verify_dir.empty()) opt.out = verify_dir;
    else if (!verify_pos.empty()) opt.out = verify_pos;
    if (opt.out.empty()) {
      std::cerr << "dhym-lab verify: give the run directory with --out\n";
      return dhym::lab::kInputError;
    }
  }

  try {
    if (command == "verify") return finish(command, dhym::lab::run_verify(opt));
    RunResult r = dhym::lab::runner_for(command)(opt);
    dhym::lab::record_outcome(opt.out, r);
    return finish(command, r);
  } catch (const dhym::Error& e) {
    std::cerr << "dhym-lab " << command << ": " << e.what() << " (exit 2)\n";
    return dhym::lab::kInputError;
  } catch (const std::exception& e) {
    std::cerr << "dhym-lab " << command << ": " << e.what() << " (exit 2)\n";
    return dhym::lab::kInputError;
  }
}
