#pragma once

// Monte Carlo risk estimation. Trial t draws its source from the key
// derive_key(seed, "trial", t), so a run is the same on any thread count.

#include "dce/core_model.hpp"
#include "dce/error.hpp"
#include "dce/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

namespace dce {

struct NaiveConfig {
  unsigned k = 64;
};

struct MaxConfig {
  unsigned k = 14;
};

struct LocalConfig {
  unsigned k = 18;
  std::optional<double> rho_nominal;  // defaults to the true correlation
  LocalParams params{};
};

struct BinaryBlockConfig {
  unsigned k = 10;
  BlockParams params{};
  bool nominal_from_truth = true;  // overwrite params.rho_nominal with the true correlation
};

struct TwoWayConfig {
  unsigned k = 24;
  std::optional<unsigned> k1;  // defaults to ceil(sqrt(k))
  LocalParams params{};
};

using SchemeConfig = std::variant<NaiveConfig, MaxConfig, LocalConfig, BinaryBlockConfig, TwoWayConfig>;

inline std::string scheme_name(const SchemeConfig& c) {
  static constexpr const char* names[] = {"naive", "max", "local", "binary_block", "two_way"};
  return names[c.index()];
}

inline unsigned scheme_bits(const SchemeConfig& c) {
  return std::visit([](const auto& s) { return s.k; }, c);
}

/// Checks every precondition a trial would check, without running one.
inline void validate_scheme(const SchemeConfig& config, double rho_true) {
  check_rho(rho_true);
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, NaiveConfig>) {
          require(c.k >= 1, "naive scheme needs k >= 1");
        } else if constexpr (std::is_same_v<T, MaxConfig>) {
          detail::check_index_bits(c.k, "max scheme");
        } else if constexpr (std::is_same_v<T, LocalConfig>) {
          detail::check_index_bits(c.k, "local scheme");
          local_prefix_bits(c.k, c.rho_nominal.value_or(rho_true), c.params);
        } else if constexpr (std::is_same_v<T, BinaryBlockConfig>) {
          BlockParams p = c.params;
          if (c.nominal_from_truth) p.rho_nominal = rho_true;
          plan_binary_block(c.k, p);
        } else {
          validate(c.params);
          plan_two_way(c.k, c.k1.value_or(default_first_round_bits(c.k)));
        }
      },
      config);
}

/// Runs one trial of `config` on a fresh lazily evaluated source keyed by `key`.
inline EstimateResult run_scheme(const SchemeConfig& config, double rho_true, std::uint64_t key) {
  return std::visit(
      [&](const auto& c) -> EstimateResult {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, NaiveConfig>) {
          return run_naive(c.k, BinarySource(rho_true, c.k, key));
        } else if constexpr (std::is_same_v<T, MaxConfig>) {
          return run_max_scheme(c.k, GaussianSource(rho_true, std::size_t{1} << c.k, key));
        } else if constexpr (std::is_same_v<T, LocalConfig>) {
          return run_local_scheme(c.k, c.rho_nominal.value_or(rho_true),
                                  GaussianSource(rho_true, std::size_t{1} << c.k, key), c.params);
        } else if constexpr (std::is_same_v<T, BinaryBlockConfig>) {
          BlockParams p = c.params;
          if (c.nominal_from_truth) p.rho_nominal = rho_true;
          const BlockPlan plan = plan_binary_block(c.k, p);
          return run_binary_block(c.k, p, BinarySource(rho_true, plan.samples, key));
        } else {
          const unsigned k1 = c.k1.value_or(default_first_round_bits(c.k));
          const TwoWayPlan plan = plan_two_way(c.k, k1);
          return run_two_way(c.k, GaussianSource(rho_true, two_way_samples(plan), key), k1, c.params);
        }
      },
      config);
}

struct RiskReport {
  std::string scheme;
  double rho_true = 0.0;
  unsigned k = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double mean_estimate = 0.0;
  double mse = 0.0;
  double bias = 0.0;
  double variance = 0.0;        // population variance of the estimates
  double ci95_halfwidth = 0.0;  // 1.96 sd(squared error) / sqrt(trials)
  double se_mean = 0.0;         // sd(estimate) / sqrt(trials)
  double se_mse = 0.0;          // sd(squared error) / sqrt(trials)
  double failure_rate = 0.0;
  double alice_fallback_rate = 0.0;
  double mean_bits = 0.0;
  // Moments of the estimator before clamping to [-1, 1].
  double mean_unclamped = 0.0;
  double mse_unclamped = 0.0;
  double se_mean_unclamped = 0.0;
  double se_mse_unclamped = 0.0;
};

struct TrialOutcome {
  double rho_hat;
  bool failed;
  bool alice_fallback;
  double bits;
  double rho_raw;
};

namespace detail {

struct Moments {
  double mean, mse, variance, se_mean, se_mse;
};

inline Moments moments(const std::vector<TrialOutcome>& out, double rho_true, double TrialOutcome::*field) {
  const double n = static_cast<double>(out.size());
  double sum = 0, sum_sq_err = 0;
  for (const auto& o : out) {
    sum += o.*field;
    const double e = o.*field - rho_true;
    sum_sq_err += e * e;
  }
  Moments m{};
  m.mean = sum / n;
  m.mse = sum_sq_err / n;
  double var = 0, var_sq = 0;
  for (const auto& o : out) {
    const double d = o.*field - m.mean;
    var += d * d;
    const double e = o.*field - rho_true;
    const double q = e * e - m.mse;
    var_sq += q * q;
  }
  m.variance = var / n;
  m.se_mean = std::sqrt(var / (n - 1.0)) / std::sqrt(n);
  m.se_mse = std::sqrt(var_sq / (n - 1.0)) / std::sqrt(n);
  return m;
}

}  // namespace detail

inline constexpr std::size_t kMinTrials = 100;

inline std::uint64_t trial_key(std::uint64_t seed, std::size_t t) { return derive_key(seed, tag_of("trial"), t); }

/// Drives `trial(key)` for t = 0..trials-1 and aggregates in trial order.
inline RiskReport estimate_risk_with(const std::function<TrialOutcome(std::uint64_t)>& trial, double rho_true,
                                     std::size_t trials, std::uint64_t seed, unsigned threads = 1) {
  require(trials >= kMinTrials, "estimate_risk needs at least " + std::to_string(kMinTrials) + " trials");
  check_rho(rho_true);
  std::vector<TrialOutcome> out(trials);
  std::vector<std::exception_ptr> errors(std::max(1U, threads));
  std::vector<std::size_t> error_trial(errors.size(), trials);

  auto worker = [&](unsigned w, std::size_t begin, std::size_t end) {
    std::size_t t = begin;
    try {
      for (; t < end; ++t) out[t] = trial(trial_key(seed, t));
    } catch (...) {
      errors[w] = std::current_exception();
      error_trial[w] = t;
    }
  };
  const unsigned nthreads = static_cast<unsigned>(std::min<std::size_t>(std::max(1U, threads), trials));
  if (nthreads == 1) {
    worker(0, 0, trials);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < nthreads; ++w) {
      pool.emplace_back(worker, w, trials * w / nthreads, trials * (w + 1) / nthreads);
    }
    for (auto& th : pool) th.join();
  }
  // Report the lowest failing trial so the error does not depend on scheduling.
  std::size_t worst = 0;
  for (std::size_t w = 1; w < errors.size(); ++w) {
    if (error_trial[w] < error_trial[worst]) worst = w;
  }
  if (errors[worst]) {
    try {
      std::rethrow_exception(errors[worst]);
    } catch (const std::exception& e) {
      throw TrialError(error_trial[worst], e.what());
    }
  }

  const double n = static_cast<double>(trials);
  double failures = 0, fallbacks = 0, bits = 0;
  for (const auto& o : out) {
    failures += o.failed;
    fallbacks += o.alice_fallback;
    bits += o.bits;
  }
  RiskReport r;
  r.rho_true = rho_true;
  r.trials = trials;
  r.seed = seed;
  const detail::Moments m = detail::moments(out, rho_true, &TrialOutcome::rho_hat);
  r.mean_estimate = m.mean;
  r.mse = m.mse;
  r.bias = m.mean - rho_true;
  r.variance = m.variance;
  r.se_mean = m.se_mean;
  r.se_mse = m.se_mse;
  r.ci95_halfwidth = 1.96 * r.se_mse;
  const detail::Moments raw = detail::moments(out, rho_true, &TrialOutcome::rho_raw);
  r.mean_unclamped = raw.mean;
  r.mse_unclamped = raw.mse;
  r.se_mean_unclamped = raw.se_mean;
  r.se_mse_unclamped = raw.se_mse;
  r.failure_rate = failures / n;
  r.alice_fallback_rate = fallbacks / n;
  r.mean_bits = bits / n;
  return r;
}

inline RiskReport estimate_risk(const SchemeConfig& config, double rho_true, std::size_t trials, std::uint64_t seed,
                                unsigned threads = 1) {
  validate_scheme(config, rho_true);
  RiskReport r = estimate_risk_with(
      [&](std::uint64_t key) {
        const EstimateResult e = run_scheme(config, rho_true, key);
        return TrialOutcome{e.rho_hat, e.decode_failed, e.alice_fallback, static_cast<double>(e.bits_used),
                            e.rho_raw};
      },
      rho_true, trials, seed, threads);
  r.scheme = scheme_name(config);
  r.k = scheme_bits(config);
  return r;
}

}  // namespace dce
