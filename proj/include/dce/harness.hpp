#pragma once

// Command implementations behind the dce CLI. Each command takes a JSON
// configuration and returns the rendered report plus an exit code, so the
// CLI front end stays a thin argument parser.

#include "dce/error.hpp"
#include "dce/info_theory.hpp"
#include "dce/max_normal.hpp"
#include "dce/protocols.hpp"
#include "dce/risk.hpp"
#include "dce/sdpi_lab.hpp"
#include "dce/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

namespace dce {

enum ExitCode : int { kExitOk = 0, kExitViolation = 1, kExitUsage = 2 };

/// Configuration problem detected before any work runs (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::string output;
};

namespace detail {

inline std::string format_of(const json& cfg) {
  const std::string f = cfg.value("format", std::string("csv"));
  if (f != "csv" && f != "json") throw ConfigError("format must be csv or json, got '" + f + "'");
  return f;
}

inline std::uint64_t seed_of(const json& cfg) { return cfg.value("seed", std::uint64_t{1}); }

template <class T>
std::vector<T> grid(const json& cfg, const char* key) {
  if (!cfg.contains(key)) throw ConfigError(std::string("missing grid '") + key + "'");
  const json& g = cfg.at(key);
  std::vector<T> out = g.is_array() ? g.get<std::vector<T>>() : std::vector<T>{g.get<T>()};
  if (out.empty()) throw ConfigError(std::string("empty grid '") + key + "'");
  return out;
}

inline std::string render(const Table& t, const json& cfg, const std::string& command,
                          const json& extra = json::object()) {
  return format_of(cfg) == "csv" ? to_csv(t) : to_json_report(t, seed_of(cfg), command, extra);
}

}  // namespace detail

// ---------------------------------------------------------------- simulate

/// Builds the scheme for one grid cell from the config's scheme id and params.
inline SchemeConfig scheme_from_config(const json& cfg, unsigned k, double rho) {
  const std::string id = cfg.value("scheme", std::string("naive"));
  const json params = cfg.value("params", json::object());
  LocalParams lp{params.value("c_threshold", 0.1), params.value("c_bits", 0.15)};
  if (id == "naive") return NaiveConfig{k};
  if (id == "max") return MaxConfig{k};
  if (id == "local") {
    LocalConfig c{k, std::nullopt, lp};
    if (params.contains("rho_nominal")) c.rho_nominal = params.at("rho_nominal").get<double>();
    return c;
  }
  if (id == "binary_block") {
    BinaryBlockConfig c;
    c.k = k;
    c.params.rho_tilde = params.value("rho_tilde", 0.25);
    c.params.window = params.value("window", 0.0);
    c.params.find_margin = params.value("find_margin", 4.0);
    c.nominal_from_truth = !params.contains("rho_nominal");
    c.params.rho_nominal = params.value("rho_nominal", rho);
    const json nb = params.value("n_block", json("auto"));
    c.params.n_block = nb.is_string()
                           ? largest_block_for_budget(k, c.params.rho_tilde, c.params.rho_nominal, 100000,
                                                      c.params.find_margin)
                           : nb.get<std::size_t>();
    return c;
  }
  if (id == "two_way") {
    TwoWayConfig c{k, std::nullopt, lp};
    if (params.contains("k1")) c.k1 = params.at("k1").get<unsigned>();
    return c;
  }
  throw ConfigError("unknown scheme '" + id + "'");
}

inline CommandResult cmd_simulate(const json& cfg, std::ostream* progress = nullptr) {
  const auto ks = detail::grid<unsigned>(cfg, "k");
  const auto rhos = detail::grid<double>(cfg, "rho");
  const std::size_t trials = cfg.value("trials", std::size_t{10000});
  if (trials < kMinTrials) throw ConfigError("trials must be at least " + std::to_string(kMinTrials));
  const std::uint64_t seed = detail::seed_of(cfg);
  const unsigned threads = cfg.value("threads", 1U);
  detail::format_of(cfg);

  // Sorted, de-duplicated cells; every cell is validated before any trial runs.
  std::vector<std::pair<unsigned, double>> cells;
  for (unsigned k : ks)
    for (double r : rhos) cells.emplace_back(k, r);
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  std::vector<SchemeConfig> schemes;
  for (const auto& [k, r] : cells) {
    schemes.push_back(scheme_from_config(cfg, k, r));
    validate_scheme(schemes.back(), r);
  }

  Table t{sweep_columns(), {}};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& [k, r] = cells[i];
    if (progress) *progress << "simulate " << scheme_name(schemes[i]) << " k=" << k << " rho=" << r << "\n";
    // Each cell gets its own substream family so cells are independent.
    const std::uint64_t cell_seed = derive_key(seed, tag_of("cell"), i);
    RiskReport rep = estimate_risk(schemes[i], r, trials, cell_seed, threads);
    rep.seed = seed;
    t.add(sweep_row(rep));
  }
  return {kExitOk, detail::render(t, cfg, "simulate")};
}

// ---------------------------------------------------------------- bounds

inline CommandResult cmd_bounds(const json& cfg) {
  const auto ks = detail::grid<double>(cfg, "k");
  const auto rhos = detail::grid<double>(cfg, "rho");
  Table t{{"k", "rho", "global_upper", "local_upper", "local_lower", "naive_risk", "max_scheme_risk"}, {}};
  for (double k : ks)
    for (double r : rhos) {
      const BoundSet b = risk_bounds(k, r);
      t.add({k, r, b.global_upper, b.local_upper, b.local_lower, b.naive_risk, b.max_scheme_risk});
    }
  return {kExitOk, detail::render(t, cfg, "bounds")};
}

// ---------------------------------------------------------------- maxnormal

inline CommandResult cmd_maxnormal(const json& cfg) {
  std::vector<std::uint64_t> ns;
  if (cfg.contains("n")) {
    ns = detail::grid<std::uint64_t>(cfg, "n");
  } else {
    ns = {1, 2, 1ULL << 4, 1ULL << 8, 1ULL << 12, 1ULL << 16, 1ULL << 20};
  }
  Table t{{"n", "mean", "variance", "asymptote", "ratio"}, {}};
  for (std::uint64_t n : ns) {
    if (n == 0) throw ConfigError("maxnormal needs N >= 1");
    const double a = std::sqrt(2.0 * std::log(static_cast<double>(n)));
    const double e = expected_max_normal(n);
    // The asymptote is 0 at N = 1; the ratio column reports 0 there.
    t.add({double(n), e, var_max_normal(n), a, a > 0.0 ? e / a : 0.0});
  }
  return {kExitOk, detail::render(t, cfg, "maxnormal")};
}

// ---------------------------------------------------------------- verify

/// Outcome of one randomized verification instance.
struct InstanceOutcome {
  bool pass = true;
  double margin = 0.0;
  double statistic = 0.0;  // suite-specific figure of merit
  json instance;           // everything needed to replay it
};

struct SuiteSummary {
  std::string suite;
  std::size_t draws = 0;
  std::size_t passed = 0;
  double worst_margin = 0.0;
  double statistic = 0.0;
  std::vector<json> violations{};
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"sdpi",  "tilted", "contraction", "tensor",
                                                 "chain", "shift",  "gaphamming"};
  return names;
}

namespace detail {

inline std::vector<std::vector<double>> random_channel(std::size_t inputs, std::size_t outputs, SplitMix64& g) {
  std::vector<std::vector<double>> ch;
  for (std::size_t i = 0; i < inputs; ++i) ch.push_back(random_row(outputs, g, 0.1));
  return ch;
}

inline double log_normal_weight(SplitMix64& g) { return std::exp(2.0 * g.normal()); }

inline InstanceOutcome replay_instance(const json& inst);

inline InstanceOutcome chain_instance(const FiniteJoint& source, const InteractiveSpec& spec, double rho,
                                      unsigned n) {
  const ChainReport c = verify_interactive_chain(source, spec, rho);
  return {c.pass(), c.margin(), c.interchanged,
          json{{"suite", "chain"}, {"rho", rho}, {"n", n}, {"source", to_json(source)}, {"spec", to_json(spec)}}};
}

inline InstanceOutcome run_instance(const std::string& suite, std::size_t i, std::uint64_t seed,
                                    const std::map<double, double>& ceilings) {
  SplitMix64 g(derive_key(seed, tag_of(suite), i));
  if (suite == "tilted") {
    const double rho = 0.7;
    const std::vector<double> f{log_normal_weight(g), log_normal_weight(g)};
    const std::vector<double> w{log_normal_weight(g), log_normal_weight(g)};
    const std::size_t nu = static_cast<std::size_t>(g.between(2, 4));
    const auto cu = random_channel(2, nu, g), cv = random_channel(2, nu, g);
    const TiltedReport r = verify_tilted_sdpi(rho, f, w, cu, cv);
    return {r.pass, r.margin, r.i_uy,
            json{{"suite", suite}, {"rho", rho}, {"f", f}, {"g", w}, {"channel_u", cu}, {"channel_v", cv}}};
  }
  if (suite == "contraction") {
    const std::size_t nb = static_cast<std::size_t>(g.between(2, 4));
    const Pmf p = random_dirichlet(nb, g), q = random_dirichlet(nb, g), pa = random_dirichlet(2, g);
    const auto ch = random_channel(2, static_cast<std::size_t>(g.between(2, 4)), g);
    const ContractionReport r = binary_input_contraction(p, q, ch, pa);
    return {r.pass, r.margin, r.factor, json{{"suite", suite}, {"p", p}, {"q", q}, {"pa", pa}, {"channel", ch}}};
  }
  if (suite == "tensor") {
    static constexpr double rhos[] = {0.3, 0.5, 0.8};
    const double r1 = rhos[g.below(3)], r2 = rhos[g.below(3)];
    const InteractiveSpec spec = random_spec(4, 4, {3, 2, 3, 0.1, g.uniform() < 0.5}, g);
    const TensorReport r = verify_tensorization(binary_symmetric_joint(r1), binary_symmetric_joint(r2), spec,
                                                ceilings.at(r1), ceilings.at(r2));
    return {r.pass, r.margin, r.ratio,
            json{{"suite", suite}, {"rho1", r1}, {"rho2", r2}, {"ceiling1", r.ceiling1}, {"ceiling2", r.ceiling2},
                 {"spec", to_json(spec)}}};
  }
  if (suite == "chain") {
    static constexpr double rhos[] = {0.3, 0.6, 0.9};
    const double rho = rhos[i % 3];
    const unsigned n = 1 + static_cast<unsigned>(g.below(2));
    const std::size_t m = std::size_t{1} << n;
    const InteractiveSpec spec = random_spec(m, m, {3, 2, 3, 0.1, g.uniform() < 0.3}, g);
    return chain_instance(binary_product_source(rho, n), spec, rho, n);
  }
  if (suite == "shift") {
    const InteractiveSpec spec = random_spec(2, 2, {3, 2, 3, 0.1, false}, g);
    const ShiftReport r = verify_shift_reduction(0.25, 0.5, spec);
    const double margin = r.bits_bound - std::max(r.d_x, r.d_y);
    return {r.pass, margin, std::max(r.d_x, r.d_y),
            json{{"suite", suite}, {"rho0", 0.25}, {"rho1", 0.5}, {"spec", to_json(spec)}}};
  }
  if (suite == "gaphamming") {
    const unsigned n = 8;
    const InteractiveSpec spec = random_spec(256, 256, {3, 2, 3, 0.1, false}, g);
    const GapHammingReport r = gap_hamming_demo(n, spec, 1.0);
    return {r.pass, r.info_bound - r.i_u_pi, r.implied_k_lower,
            json{{"suite", suite}, {"n", n}, {"c", 1.0}, {"spec", to_json(spec)}}};
  }
  throw ConfigError("unknown suite '" + suite + "'");
}

inline InstanceOutcome replay_instance(const json& inst) {
  const std::string suite = inst.at("suite").get<std::string>();
  if (suite == "chain") {
    return chain_instance(joint_from_json(inst.at("source")), spec_from_json(inst.at("spec")),
                          inst.at("rho").get<double>(), inst.value("n", 1U));
  }
  if (suite == "tilted") {
    const auto r = verify_tilted_sdpi(inst.at("rho").get<double>(), inst.at("f").get<std::vector<double>>(),
                                      inst.at("g").get<std::vector<double>>(),
                                      inst.at("channel_u").get<std::vector<std::vector<double>>>(),
                                      inst.at("channel_v").get<std::vector<std::vector<double>>>());
    return {r.pass, r.margin, r.i_uy, inst};
  }
  if (suite == "contraction") {
    const auto r = binary_input_contraction(inst.at("p").get<Pmf>(), inst.at("q").get<Pmf>(),
                                            inst.at("channel").get<std::vector<std::vector<double>>>(),
                                            inst.at("pa").get<Pmf>());
    return {r.pass, r.margin, r.factor, inst};
  }
  if (suite == "tensor") {
    const auto r = verify_tensorization(
        binary_symmetric_joint(inst.at("rho1").get<double>()), binary_symmetric_joint(inst.at("rho2").get<double>()),
        spec_from_json(inst.at("spec")), inst.at("ceiling1").get<double>(), inst.at("ceiling2").get<double>());
    return {r.pass, r.margin, r.ratio, inst};
  }
  if (suite == "shift") {
    const auto r = verify_shift_reduction(inst.at("rho0").get<double>(), inst.at("rho1").get<double>(),
                                          spec_from_json(inst.at("spec")));
    return {r.pass, r.bits_bound - std::max(r.d_x, r.d_y), std::max(r.d_x, r.d_y), inst};
  }
  if (suite == "gaphamming") {
    const auto r = gap_hamming_demo(inst.at("n").get<unsigned>(), spec_from_json(inst.at("spec")),
                                    inst.at("c").get<double>());
    return {r.pass, r.info_bound - r.i_u_pi, r.implied_k_lower, inst};
  }
  if (suite == "sdpi") {
    const double rho = inst.at("rho").get<double>();
    const RSValue v = compute_R_S(spec_from_json(inst.at("spec")), binary_symmetric_joint(rho));
    return {v.ratio <= rho * rho + kIdentityTol, rho * rho - v.ratio, v.ratio, inst};
  }
  throw ConfigError("cannot replay suite '" + suite + "'");
}

inline void absorb(SuiteSummary& s, const InstanceOutcome& o, std::size_t index) {
  if (s.draws == 0 || o.margin < s.worst_margin) s.worst_margin = o.margin;
  s.statistic = s.draws == 0 ? o.statistic : std::max(s.statistic, o.statistic);
  ++s.draws;
  if (o.pass) {
    ++s.passed;
  } else {
    json v = o.instance;
    v["index"] = index;
    v["margin"] = o.margin;
    s.violations.push_back(std::move(v));
  }
}

}  // namespace detail

/// Runs `draws` random instances of one suite. For "sdpi" the draws are the
/// search restarts and the statistic is the best ratio found.
inline SuiteSummary run_suite(const std::string& suite, std::size_t draws, std::uint64_t seed,
                              std::ostream* progress = nullptr) {
  SuiteSummary s{suite};
  if (progress) *progress << "verify " << suite << " draws=" << draws << "\n";
  if (draws == 0) return s;
  if (suite == "sdpi") {
    const double rho = 0.6;
    const SearchResult r =
        search_max_ratio(binary_symmetric_joint(rho), {3, 3, draws, 12}, derive_key(seed, tag_of(suite)));
    const RSValue& b = r.best;
    const bool identities = std::abs(b.R - b.r_identity) <= kIdentityTol && std::abs(b.S - b.s_identity) <= kIdentityTol;
    s.draws = draws;
    s.passed = draws;
    s.worst_margin = rho * rho - b.ratio;
    s.statistic = b.ratio;
    if (b.ratio > rho * rho + kIdentityTol || !identities) {
      s.passed = draws - 1;
      s.violations.push_back(json{{"suite", suite}, {"rho", rho}, {"spec", to_json(r.best_spec)},
                                  {"margin", s.worst_margin}});
    }
    return s;
  }
  std::map<double, double> ceilings;
  if (suite == "tensor") {
    for (double r : {0.3, 0.5, 0.8}) {
      ceilings[r] = search_max_ratio(binary_symmetric_joint(r), {3, 3, 400, 12}, derive_key(seed, tag_of("ceiling"))).best.ratio;
    }
  }
  for (std::size_t i = 0; i < draws; ++i) detail::absorb(s, detail::run_instance(suite, i, seed, ceilings), i);
  return s;
}

/// A deliberately corrupted instance: the chain check is fed a rho = 0.9
/// source while told rho = 0.3, so the SDPI leg must fail.
inline SuiteSummary injected_violation_suite() {
  SuiteSummary s{"self_test"};
  detail::absorb(s, detail::chain_instance(binary_symmetric_joint(0.9), reveal_x_spec(2, 2), 0.3, 1), 0);
  return s;
}

inline CommandResult summarize(const std::vector<SuiteSummary>& sums, const json& cfg) {
  Table t{{"suite", "draws", "passed", "violations", "worst_margin", "statistic"}, {}};
  json violations = json::array();
  bool ok = true;
  for (const auto& s : sums) {
    t.add({s.suite, double(s.draws), double(s.passed), double(s.violations.size()), s.worst_margin, s.statistic});
    for (const auto& v : s.violations) violations.push_back(v);
    ok = ok && s.violations.empty();
  }
  return {ok ? kExitOk : kExitViolation, detail::render(t, cfg, "verify", json{{"violations", violations}})};
}

inline CommandResult cmd_verify(const json& cfg, std::ostream* progress = nullptr) {
  detail::format_of(cfg);
  const std::uint64_t seed = detail::seed_of(cfg);
  std::vector<SuiteSummary> sums;
  if (cfg.contains("replay")) {
    const json& inst = cfg.at("replay");
    SuiteSummary s{inst.at("suite").get<std::string>() + ":replay"};
    detail::absorb(s, detail::replay_instance(inst), inst.value("index", std::size_t{0}));
    sums.push_back(std::move(s));
    return summarize(sums, cfg);
  }
  const std::string suite = cfg.value("suite", std::string("all"));
  const std::size_t draws = cfg.value("draws", std::size_t{100});
  if (draws == 0 && progress) *progress << "warning: draws = 0, verification is vacuous\n";
  std::vector<std::string> which;
  if (suite == "all") {
    which = suite_names();
  } else if (std::find(suite_names().begin(), suite_names().end(), suite) != suite_names().end()) {
    which = {suite};
  } else {
    throw ConfigError("unknown suite '" + suite + "'");
  }
  for (const auto& name : which) sums.push_back(run_suite(name, draws, seed, progress));
  if (cfg.value("inject_violation", false)) sums.push_back(injected_violation_suite());
  return summarize(sums, cfg);
}

/// Machine-readable error document for stderr.
inline std::string error_json(const std::string& kind, const std::string& message) {
  return json{{"error", {{"type", kind}, {"message", message}}}}.dump() + "\n";
}

/// Runs a command, mapping configuration and parameter errors to exit code 2.
inline CommandResult run_command(const std::string& command, const json& cfg, std::ostream& err) {
  try {
    if (command == "simulate") return cmd_simulate(cfg, &err);
    if (command == "bounds") return cmd_bounds(cfg);
    if (command == "verify") return cmd_verify(cfg, &err);
    if (command == "maxnormal") return cmd_maxnormal(cfg);
    throw ConfigError("unknown command '" + command + "'");
  } catch (const ConfigError& e) {
    err << error_json("config", e.what());
  } catch (const json::exception& e) {
    err << error_json("config", e.what());
  } catch (const ParameterError& e) {
    err << error_json("parameter", e.what());
  } catch (const GuardError& e) {
    err << error_json("guard", e.what());
  } catch (const TrialError& e) {
    err << error_json("trial", e.what());
  }
  return {kExitUsage, ""};
}

}  // namespace dce
