#include "dce/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::string> format;
  std::string out;
  std::optional<std::string> scheme;
  std::vector<unsigned> k;
  std::vector<double> rho;
  std::vector<std::uint64_t> n;
  std::optional<unsigned> threads;
  std::optional<std::size_t> draws;
  std::optional<std::string> suite;
  std::string replay_path;
  bool inject_violation = false;
  std::optional<double> rho_nominal, c_threshold, c_bits, rho_tilde;
  std::optional<std::size_t> n_block;
  std::optional<unsigned> k1;
};

dce::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dce::ConfigError("cannot open '" + path + "'");
  try {
    return dce::json::parse(in);
  } catch (const dce::json::exception& e) {
    throw dce::ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

template <class T>
void set_if(dce::json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

dce::json build_config(const Options& o) {
  dce::json cfg = o.config_path.empty() ? dce::json::object() : load_json(o.config_path);
  set_if(cfg, "seed", o.seed);
  set_if(cfg, "trials", o.trials);
  set_if(cfg, "format", o.format);
  set_if(cfg, "scheme", o.scheme);
  set_if(cfg, "threads", o.threads);
  set_if(cfg, "draws", o.draws);
  set_if(cfg, "suite", o.suite);
  if (!o.k.empty()) cfg["k"] = o.k;
  if (!o.rho.empty()) cfg["rho"] = o.rho;
  if (!o.n.empty()) cfg["n"] = o.n;
  if (!o.replay_path.empty()) cfg["replay"] = load_json(o.replay_path);
  if (o.inject_violation) cfg["inject_violation"] = true;
  dce::json params = cfg.value("params", dce::json::object());
  set_if(params, "rho_nominal", o.rho_nominal);
  set_if(params, "c_threshold", o.c_threshold);
  set_if(params, "c_bits", o.c_bits);
  set_if(params, "rho_tilde", o.rho_tilde);
  set_if(params, "n_block", o.n_block);
  set_if(params, "k1", o.k1);
  if (!params.empty()) cfg["params"] = params;
  if (!o.out.empty()) cfg["out"] = o.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed correlation estimation: protocol simulation and information-inequality checks"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", o.out, "Output path (default: stdout)");
  };

  auto* sim = app.add_subcommand("simulate", "Monte Carlo risk over a (k, rho) grid");
  common(sim);
  sim->add_option("--scheme", o.scheme, "naive | max | local | binary_block | two_way");
  sim->add_option("--k", o.k, "Bit budgets");
  sim->add_option("--rho", o.rho, "True correlations");
  sim->add_option("--trials", o.trials, "Trials per grid cell");
  sim->add_option("--threads", o.threads, "Worker threads");
  sim->add_option("--rho-nominal", o.rho_nominal, "Nominal correlation (local, binary_block)");
  sim->add_option("--c-threshold", o.c_threshold, "Local scheme threshold slack");
  sim->add_option("--c-bits", o.c_bits, "Local scheme bit slack");
  sim->add_option("--rho-tilde", o.rho_tilde, "Binary block target correlation");
  sim->add_option("--n-block", o.n_block, "Binary block length");
  sim->add_option("--k1", o.k1, "Two-way first-round bits");

  auto* bounds = app.add_subcommand("bounds", "Leading-order risk formulas over a (k, rho) grid");
  common(bounds);
  bounds->add_option("--k", o.k, "Bit budgets");
  bounds->add_option("--rho", o.rho, "Correlations");

  auto* verify = app.add_subcommand("verify", "Randomized checks of the information inequalities");
  common(verify);
  verify->add_option("--suite", o.suite, "sdpi | tilted | contraction | tensor | chain | shift | gaphamming | all");
  verify->add_option("--draws", o.draws, "Random instances per suite");
  verify->add_option("--replay", o.replay_path, "Re-check one serialized violation instance");
  verify->add_flag("--inject-violation", o.inject_violation, "Add a corrupted fixture (must exit 1)");

  auto* maxn = app.add_subcommand("maxnormal", "Moments of the maximum of N standard normals");
  common(maxn);
  maxn->add_option("--n", o.n, "Sample counts N");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << dce::error_json("usage", e.what());
    return dce::kExitUsage;
  }

  dce::json cfg;
  try {
    cfg = build_config(o);
  } catch (const dce::ConfigError& e) {
    std::cerr << dce::error_json("config", e.what());
    return dce::kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const dce::CommandResult result = dce::run_command(command, cfg, std::cerr);
  if (result.exit_code == dce::kExitUsage) return result.exit_code;

  const std::string out = cfg.value("out", std::string());
  if (out.empty()) {
    std::cout << result.output;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) {
      std::cerr << dce::error_json("io", "cannot write '" + out + "'");
      return dce::kExitUsage;
    }
    f << result.output;
  }
  return result.exit_code;
}
