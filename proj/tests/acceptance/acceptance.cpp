// Acceptance runner: one criterion per invocation (or all with --criterion 0).
// Prints detail lines, then exactly one "[PASS] Cn ..." or "[FAIL] Cn ..." line.

#include "dce/dce.hpp"

#include <CLI11.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace dce;

struct Check {
  std::string title;
  bool pass = true;
  std::vector<std::string> lines{};

  void note(const std::string& line, bool ok = true) {
    lines.push_back(std::string(ok ? "  ok   " : "  BAD  ") + line);
    pass = pass && ok;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr std::size_t kTrials = 100000;

std::string cli_path;

// ---------------------------------------------------------------- risk criteria

Check c1() {
  Check c{"naive scheme risk within 5% of (1 - rho^2) / k"};
  for (unsigned k : {64u, 128u})
    for (double rho : {0.0, 0.5, 0.9}) {
      const RiskReport r = estimate_risk(NaiveConfig{k}, rho, kTrials, derive_key(1, k, std::uint64_t(rho * 10)));
      const double exact = (1 - rho * rho) / k;
      const double rel = std::abs(r.mse / exact - 1);
      c.note(fmt("k=%u rho=%.1f mse=%.6g exact=%.6g rel=%.4f", k, rho, r.mse, exact, rel), rel <= 0.05);
    }
  return c;
}

Check c2() {
  Check c{"max scheme unbiased at k=14 (|mean - rho| <= 3 SE)"};
  for (double rho : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    const RiskReport r = estimate_risk(MaxConfig{14}, rho, kTrials, derive_key(2, std::uint64_t(10 + rho * 10)));
    const double dev = std::abs(r.mean_unclamped - rho);
    c.note(fmt("rho=%+.1f mean=%.6f se=%.2e dev/se=%.2f (clamped mean %.6f)", rho, r.mean_unclamped,
               r.se_mean_unclamped, dev / r.se_mean_unclamped, r.mean_estimate),
           dev <= 3 * r.se_mean_unclamped);
  }
  return c;
}

Check c3() {
  Check c{"max scheme MSE matches the exact finite-k formula; k*MSE trend and bracket"};
  const double unit = 1 / (2 * std::numbers::ln2);
  for (double rho : {0.0, 0.5}) {
    double prev = 1e9;
    for (unsigned k : {10u, 14u, 18u}) {
      const RiskReport r = estimate_risk(MaxConfig{k}, rho, kTrials, derive_key(3, k, std::uint64_t(rho * 10)));
      const double exact = max_scheme_exact_mse(std::uint64_t{1} << k, rho);
      const double z = (r.mse_unclamped - exact) / r.se_mse_unclamped;
      c.note(fmt("k=%u rho=%.1f mse=%.6g exact=%.6g z=%+.2f k*mse=%.4f", k, rho, r.mse_unclamped, exact, z,
                 k * r.mse_unclamped),
             std::abs(z) <= 3);
      c.note(fmt("  k*mse nonincreasing: %.4f <= %.4f", k * r.mse_unclamped, prev), k * r.mse_unclamped <= prev);
      prev = k * r.mse_unclamped;
      if (k == 18 && rho == 0.0) {
        const double b = k * r.mse_unclamped / unit;
        c.note(fmt("  k*mse / (1/(2 ln 2)) = %.4f in [1.0, 1.35]", b), b >= 1.0 && b <= 1.35);
      }
    }
  }
  return c;
}

Check c4() {
  Check c{"local scheme at k=18, rho=0.6: MSE <= 0.8 x max-scheme MSE, decode failures < 5%"};
  const RiskReport local = estimate_risk(LocalConfig{18, 0.6, {}}, 0.6, kTrials, derive_key(4, 1));
  const RiskReport max = estimate_risk(MaxConfig{18}, 0.6, kTrials, derive_key(4, 2));
  c.note(fmt("local mse=%.6g  max mse=%.6g  ratio=%.3f", local.mse, max.mse, local.mse / max.mse),
         local.mse <= 0.8 * max.mse);
  c.note(fmt("decode-failure rate=%.4f", local.failure_rate), local.failure_rate < 0.05);
  return c;
}

Check c5() {
  Check c{"binary block at k=10, rho=0.5: MSE nonincreasing as rho_tilde falls over {0.5, 0.25, 0.1}"};
  const unsigned k = 10;
  const double rho = 0.5;
  const std::vector<double> tildes{0.5, 0.25, 0.1};
  std::vector<RiskReport> reps;
  for (std::size_t i = 0; i < tildes.size(); ++i) {
    BlockParams p;
    p.rho_tilde = tildes[i];
    p.n_block = largest_block_for_budget(k, tildes[i], rho);
    reps.push_back(estimate_risk(BinaryBlockConfig{k, p, true}, rho, 20000, derive_key(5, i)));
    const RiskReport& r = reps.back();
    c.lines.push_back(fmt("  rho_tilde=%.2f n_block=%zu mse=%.6g ci95=%.2e fail=%.3f alice_fallback=%.3f",
                          tildes[i], p.n_block, r.mse, r.ci95_halfwidth, r.failure_rate, r.alice_fallback_rate));
  }
  for (std::size_t i = 0; i + 1 < reps.size(); ++i) {
    const RiskReport &a = reps[i], &b = reps[i + 1];
    const bool overlap = b.mse - b.ci95_halfwidth <= a.mse + a.ci95_halfwidth;
    c.note(fmt("adjacent %.2f -> %.2f: %.6g -> %.6g (%s)", tildes[i], tildes[i + 1], a.mse, b.mse,
               b.mse <= a.mse ? "decrease" : overlap ? "increase within CIs" : "increase"),
           b.mse <= a.mse || overlap);
  }
  c.note(fmt("endpoints 0.50 -> 0.10: %.6g -> %.6g", reps.front().mse, reps.back().mse),
         reps.back().mse <= reps.front().mse);
  return c;
}

// ---------------------------------------------------------------- verification suites

Check suite_check(const std::string& title, const std::string& suite, std::size_t draws, std::uint64_t seed) {
  Check c{title};
  const SuiteSummary s = run_suite(suite, draws, seed);
  c.note(fmt("%s: draws=%zu passed=%zu violations=%zu worst_margin=%.3e statistic=%.9f", suite.c_str(), s.draws,
             s.passed, s.violations.size(), s.worst_margin, s.statistic),
         s.violations.empty() && s.draws == draws);
  for (const auto& v : s.violations) c.lines.push_back("    violation: " + v.dump());
  return c;
}

Check c6() {
  Check c = suite_check("symmetric SDPI at rho=0.6: no ratio above 0.36 + 1e-9, best >= 0.34", "sdpi", 10000, 6);
  const SearchResult r = search_max_ratio(binary_symmetric_joint(0.6), {3, 3, 10000, 12}, derive_key(6, tag_of("sdpi")));
  c.note(fmt("best ratio %.12f over %zu evaluations", r.best.ratio, r.evaluations),
         r.best.ratio <= 0.36 + 1e-9 && r.best.ratio >= 0.34);
  return c;
}

Check c7() { return suite_check("tilted SDPI at rho=0.7, 1e4 random instances", "tilted", 10000, 7); }
Check c8() { return suite_check("binary-input contraction, 1e4 random instances", "contraction", 10000, 8); }
Check c9() { return suite_check("interactive divergence chain, 200 random specs", "chain", 200, 9); }
Check c10() { return suite_check("tensorization with 0.02 search slack, 500 specs", "tensor", 500, 10); }

Check c11() {
  Check c = suite_check("correlation shift: exact check on 100 specs and 1e6-sample MC", "shift", 100, 11);
  const double rho0 = 0.25, rho1 = 0.5;
  const std::size_t n = 1000000;
  for (Family f : {Family::binary, Family::gaussian}) {
    const ShiftParams params = ShiftParams::for_targets(f, rho0, rho1);
    for (const auto& [in_rho, target] : {std::pair{params.input_rho(), rho1}, std::pair{0.0, rho0}}) {
      const PairBatch in = gen_pairs(CorrelationModel(f, in_rho), n, derive_key(11, int(f), target * 100));
      const PairBatch out = shift_correlation(in, params, derive_key(11, 7, target * 100));
      double sx = 0, sy = 0, sxx = 0, syy = 0, sp = 0, spp = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double x = out.x(i), y = out.y(i), p = x * y;
        sx += x, sy += y, sxx += x * x, syy += y * y, sp += p, spp += p * p;
      }
      const double mp = sp / n, se_p = std::sqrt((spp / n - mp * mp) / n);
      const double se_m = 1 / std::sqrt(double(n));
      // Fourth moment of a standard normal is 3, so Var(X^2) = 2.
      const double se_v = std::sqrt(2.0 / n);
      const std::string name(to_string(f));
      c.note(fmt("%s target %.2f: E[XY]=%.5f (z=%+.2f)", name.c_str(), target, mp, (mp - target) / se_p),
             std::abs(mp - target) <= 3 * se_p);
      c.note(fmt("%s target %.2f: E[X]=%+.5f E[Y]=%+.5f (3 se = %.5f)", name.c_str(), target, sx / n, sy / n,
                 3 * se_m),
             std::abs(sx / n) <= 3 * se_m && std::abs(sy / n) <= 3 * se_m);
      if (f == Family::gaussian) {
        c.note(fmt("%s target %.2f: E[X^2]=%.5f E[Y^2]=%.5f (3 se = %.5f)", name.c_str(), target, sxx / n,
                   syy / n, 3 * se_v),
               std::abs(sxx / n - 1) <= 3 * se_v && std::abs(syy / n - 1) <= 3 * se_v);
      }
    }
  }
  return c;
}

Check c12() { return suite_check("Gap-Hamming chain at n=8, c=1, 100 specs", "gaphamming", 100, 12); }

// ---------------------------------------------------------------- oracles

Check c13() {
  Check c{"Fisher oracle within 1e-4 of 1/(1 - rho^2) at eps=1e-3; exact prior information"};
  const ParamFamily fam = binary_pair_family();
  for (double rho : {0.0, 0.5, 0.9}) {
    const double fd = fisher_fd(fam, rho, 1e-3), exact = 1 / (1 - rho * rho);
    c.note(fmt("rho=%.1f fd=%.9f exact=%.9f abs=%.2e rel=%.2e", rho, fd, exact, std::abs(fd - exact),
               std::abs(fd / exact - 1)),
           std::abs(fd - exact) <= 1e-4);
  }
  for (double delta : {0.05, 0.1, 0.3}) {
    const CosinePrior prior(0.4, delta);
    const double target = (std::numbers::pi / delta) * (std::numbers::pi / delta);
    const BayesCrResult r = bayes_cr(prior, [](double t) { return 1 / (1 - t * t); });
    // Independent check: integral of (lambda')^2 / lambda with the derivative written out.
    const double num = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double t) {
          const double a = std::numbers::pi * (t - 0.4) / (2 * delta);
          const double d = -std::numbers::pi / (delta * delta) * std::sin(a) * std::cos(a);
          const double l = std::cos(a) * std::cos(a) / delta;
          return l > 0 ? d * d / l : 0.0;
        },
        0.4 - delta, 0.4 + delta, 10, 1e-13);
    c.note(fmt("delta=%.2f I_lambda=%.12g (pi/delta)^2=%.12g quadrature=%.12g", delta, r.i_lambda, target, num),
           r.i_lambda == target && std::abs(num / target - 1) <= 1e-8);
  }
  return c;
}

Check c14() {
  Check c{"expected max of N normals: N=2 closed form, N=1024 vs 1e7-trial MC"};
  const double e2 = expected_max_normal(2);
  c.note(fmt("N=2: %.10f vs 1/sqrt(pi)=%.10f", e2, 1 / std::sqrt(std::numbers::pi)),
         std::abs(e2 - 1 / std::sqrt(std::numbers::pi)) <= 1e-6);
  // MC oracle on an independent generator. The quantile map is monotone, so
  // the max of N normals is the quantile of the max of N uniforms.
  std::mt19937_64 gen(14);
  const boost::math::normal_distribution<double> normal;
  const std::size_t trials = 10000000;
  double s = 0, s2 = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::uint64_t best = 0;
    for (int i = 0; i < 1024; ++i) best = std::max(best, gen() >> 11);
    const double u = (static_cast<double>(best) + 0.5) * 0x1.0p-53;
    const double m = boost::math::quantile(normal, u);
    s += m;
    s2 += m * m;
  }
  const double mc = s / trials, se = std::sqrt((s2 / trials - mc * mc) / trials);
  const double q = expected_max_normal(1024);
  c.note(fmt("N=1024: quadrature=%.6f MC=%.6f (se %.1e) diff=%.2e", q, mc, se, std::abs(q - mc)),
         std::abs(q - mc) <= 1e-3);
  return c;
}

// ---------------------------------------------------------------- CLI reproducibility

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Check c15() {
  Check c{"every CLI command is byte-reproducible for a fixed (config, seed)"};
  if (cli_path.empty()) {
    c.note("no --cli path given", false);
    return c;
  }
  const auto dir = std::filesystem::temp_directory_path() / ("dce_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate_max", "simulate --scheme max --k 8 10 --rho 0 0.5 --trials 2000 --seed 5"},
      {"simulate_local", "simulate --scheme local --k 12 --rho 0.6 --trials 1000 --seed 5 --threads 2"},
      {"simulate_block", "simulate --scheme binary_block --k 10 --rho 0.5 --rho-tilde 0.25 --trials 500 --seed 5"},
      {"simulate_two_way", "simulate --scheme two_way --k 16 --rho 0.6 --trials 500 --seed 5"},
      {"bounds", "bounds --k 16 64 --rho -0.5 0 0.9 --seed 5"},
      {"verify", "verify --suite all --draws 20 --seed 5"},
      {"maxnormal", "maxnormal --seed 5"},
  };
  for (const auto& [name, args] : commands)
    for (const char* format : {"csv", "json"}) {
      std::string outs[2];
      int codes[2];
      for (int run = 0; run < 2; ++run) {
        const auto out = dir / (name + "." + format + "." + std::to_string(run));
        const std::string cmd = "'" + cli_path + "' " + args + " --format " + format + " --out '" + out.string() +
                                "' 2>/dev/null";
        codes[run] = std::system(cmd.c_str());
        outs[run] = slurp(out);
      }
      c.note(fmt("%-16s %-4s exit=%d bytes=%zu identical=%s", name.c_str(), format, codes[0], outs[0].size(),
                 outs[0] == outs[1] ? "yes" : "no"),
             codes[0] == 0 && codes[1] == 0 && !outs[0].empty() && outs[0] == outs[1]);
    }
  std::filesystem::remove_all(dir);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria runner"};
  int which = 0;
  app.add_option("--criterion", which, "Criterion number 1-15, or 0 for all")->check(CLI::Range(0, 15));
  app.add_option("--cli", cli_path, "Path to the dce executable (criterion 15)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Check()>> criteria = {c1, c2,  c3,  c4,  c5,  c6,  c7, c8,
                                                        c9, c10, c11, c12, c13, c14, c15};
  bool all_pass = true;
  for (int i = 1; i <= 15; ++i) {
    if (which != 0 && which != i) continue;
    Check c;
    try {
      c = criteria[i - 1]();
    } catch (const std::exception& e) {
      c.title = "threw";
      c.note(e.what(), false);
    }
    for (const auto& line : c.lines) std::cout << line << "\n";
    std::cout << (c.pass ? "[PASS] C" : "[FAIL] C") << i << " " << c.title << std::endl;
    all_pass = all_pass && c.pass;
  }
  return all_pass ? 0 : 1;
}
