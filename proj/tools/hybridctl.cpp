// hybridctl: simulate and verify hybrid systems described in scenario files.
//
//   hybridctl simulate FILE          trajectories and jumps as CSV
//   hybridctl verify KIND FILE       KIND: control morphism submersion network theorem
//   hybridctl stability FILE         delta-epsilon tables
//   hybridctl finite                 exhaustive checks on finite sets
//   hybridctl demo NAME              bundled examples
//
// The JSON report goes to stdout, or to stderr on input errors (exit 2).
// Artifacts land in --out DIR.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hybrid/commands.hpp"

namespace fs = std::filesystem;
using hybrid::cli::Flags;
using hybrid::cli::Outcome;

namespace {

struct Options {
  Flags flags;
  std::string out = ".";
  std::vector<std::string> params;
  std::optional<double> r;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--tol", o.flags.tol, "Residual tolerance");
  cmd->add_option("--samples", o.flags.samples, "Sample count for checks");
  cmd->add_option("--seed", o.flags.seed, "Sampling seed");
  cmd->add_option("--step", o.flags.step, "Integrator step");
  cmd->add_option("--horizon", o.flags.horizon, "Integration horizon");
  cmd->add_option("--max-jumps", o.flags.max_jumps, "Jump limit per execution");
  cmd->add_option("--min-dwell", o.flags.min_dwell, "Dwell time below which jumps count toward Zeno");
  cmd->add_option("--analysis", o.flags.analysis, "Run only the named analysis");
  cmd->add_option("--param", o.params, "Override a scenario parameter, NAME=VALUE")->take_all();
  cmd->add_option("--out", o.out, "Directory for CSV artifacts")->capture_default_str();
}

std::string error_json(const std::string& message) {
  std::string escaped;
  for (char c : message) {
    if (c == '"' || c == '\\') escaped += '\\';
    escaped += c;
  }
  return "{\n  \"status\": \"input_error\",\n  \"diagnostics\": [\n    {\n      \"message\": \"" + escaped +
         "\"\n    }\n  ]\n}\n";
}

int fail_input(const std::string& message) {
  std::cerr << error_json(message);
  return hybrid::cli::exit_input_error;
}

bool parse_params(Options& o, std::string& error) {
  for (const auto& p : o.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) {
      error = "--param expects NAME=VALUE, got '" + p + "'";
      return false;
    }
    try {
      std::size_t used = 0;
      const std::string value = p.substr(eq + 1);
      o.flags.params[p.substr(0, eq)] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      error = "--param " + p + ": value is not a number";
      return false;
    }
  }
  if (o.r) o.flags.params["r"] = *o.r;
  return true;
}

bool read_file(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream os;
  os << in.rdbuf();
  text = os.str();
  return true;
}

int emit(const Outcome& outcome, const std::string& out_dir) {
  if (outcome.exit_code == hybrid::cli::exit_input_error) {
    std::cerr << outcome.report;
    return outcome.exit_code;
  }
  if (!outcome.artifacts.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    for (const auto& a : outcome.artifacts) {
      std::ofstream f(fs::path(out_dir) / a.name, std::ios::binary);
      f << a.content;
      if (!f) return fail_input("cannot write " + (fs::path(out_dir) / a.name).string());
    }
  }
  std::cout << outcome.report;
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and verify networks of hybrid open systems"};
  app.require_subcommand(1);

  Options o;
  std::string file;
  std::string kind;
  std::string demo;

  auto* simulate = app.add_subcommand("simulate", "Run simulate analyses, write trajectory and jump CSVs");
  simulate->add_option("scenario", file, "Scenario file")->required();
  add_common(simulate, o);

  auto* verify = app.add_subcommand("verify", "Check controls, morphisms, submersions, networks or the theorem");
  verify->add_option("kind", kind, "control | morphism | submersion | network | theorem")
      ->required()
      ->check(CLI::IsMember({"control", "morphism", "submersion", "network", "theorem"}));
  verify->add_option("scenario", file, "Scenario file")->required();
  add_common(verify, o);

  auto* stability = app.add_subcommand("stability", "Run stability and transport analyses");
  stability->add_option("scenario", file, "Scenario file")->required();
  add_common(stability, o);

  auto* finite = app.add_subcommand("finite", "Exhaustive checks on the finite-set backend");
  add_common(finite, o);

  auto* demos = app.add_subcommand("demo", "Run a bundled example");
  demos->add_option("name", demo, "Demo name")->required()->check(CLI::IsMember(hybrid::cli::demo_names()));
  demos->add_option("--r", o.r, "Restitution coefficient (bouncing-ball)");
  add_common(demos, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail_input(e.what());
  }

  std::string error;
  if (!parse_params(o, error)) return fail_input(error);

  std::string text;
  if (!file.empty() && !read_file(file, text)) return fail_input("cannot read scenario file '" + file + "'");

  Outcome outcome;
  if (*simulate) {
    outcome = hybrid::cli::run("simulate", "", text, o.flags);
  } else if (*verify) {
    outcome = hybrid::cli::run("verify", kind, text, o.flags);
  } else if (*stability) {
    outcome = hybrid::cli::run("stability", "", text, o.flags);
  } else if (*finite) {
    outcome = hybrid::cli::run("finite", "", "", o.flags);
  } else {
    outcome = hybrid::cli::run("demo", demo, "", o.flags);
  }
  return emit(outcome, o.out);
}
