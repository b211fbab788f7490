#pragma once

// Two-party estimation protocols with explicit bit accounting. Every scheme
// writes its messages into a Transcript, and Bob decodes only from the
// transcript plus his own samples.

#include "dce/core_model.hpp"
#include "dce/error.hpp"
#include "dce/info_theory.hpp"
#include "dce/max_normal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dce {

enum class Speaker { alice, bob };

inline std::string_view to_string(Speaker s) { return s == Speaker::alice ? "alice" : "bob"; }

/// One board message; payload bits are packed MSB-first into 64-bit words.
struct Message {
  Speaker speaker;
  std::size_t bit_count = 0;
  std::vector<std::uint64_t> words;

  bool bit(std::size_t i) const { return (words.at(i >> 6) >> (63 - (i & 63))) & 1U; }

  /// Reads `n` <= 64 bits starting at `offset` as an unsigned integer.
  std::uint64_t read(std::size_t offset, unsigned n) const {
    std::uint64_t v = 0;
    for (unsigned i = 0; i < n; ++i) v = (v << 1) | (bit(offset + i) ? 1U : 0U);
    return v;
  }

  void push_bit(bool b) {
    if ((bit_count & 63) == 0) words.push_back(0);
    if (b) words.back() |= std::uint64_t{1} << (63 - (bit_count & 63));
    ++bit_count;
  }

  void push_value(std::uint64_t v, unsigned n) {
    for (unsigned i = n; i-- > 0;) push_bit((v >> i) & 1U);
  }
};

/// The public board of a k-bit protocol. Messages are fixed length, so the
/// accounted total upper-bounds the transcript entropy.
class Transcript {
 public:
  explicit Transcript(std::size_t budget) : budget_(budget) {}

  void post(Message m) {
    if (total_ + m.bit_count > budget_) {
      throw std::logic_error("transcript exceeds its " + std::to_string(budget_) + "-bit budget");
    }
    total_ += m.bit_count;
    messages_.push_back(std::move(m));
  }

  const Message& send_value(Speaker who, std::uint64_t value, unsigned bits) {
    Message m{who, 0, {}};
    m.push_value(value, bits);
    post(std::move(m));
    return messages_.back();
  }

  std::size_t budget() const noexcept { return budget_; }
  std::size_t total_bits() const noexcept { return total_; }
  const std::vector<Message>& messages() const noexcept { return messages_; }
  std::optional<std::uint64_t> common_randomness_tag;

 private:
  std::size_t budget_;
  std::size_t total_ = 0;
  std::vector<Message> messages_;
};

struct EstimateResult {
  double rho_hat = 0.0;  // clamped to [-1, 1]
  double rho_raw = 0.0;  // the scheme's estimator before clamping
  std::size_t bits_used = 0;
  Transcript transcript{0};
  bool decode_failed = false;   // Bob could not resolve Alice's index
  bool alice_fallback = false;  // Alice's search failed (binary block scheme)
  bool decoded_wrong = false;   // Bob resolved an index other than Alice's
};

inline double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

inline constexpr unsigned kMaxIndexBits = 26;

namespace detail {

inline void require_size(std::size_t have, std::size_t need, const char* scheme) {
  if (have < need) {
    throw ParameterError(std::string(scheme) + ": batch holds " + std::to_string(have) + " pairs, needs " +
                         std::to_string(need));
  }
}

inline void check_index_bits(unsigned k, const char* scheme) {
  require(k >= 1, std::string(scheme) + " needs k >= 1");
  if (k > kMaxIndexBits) {
    throw GuardError(std::string(scheme) + ": k = " + std::to_string(k) + " exceeds the 2^" +
                     std::to_string(kMaxIndexBits) + "-sample guard");
  }
}

inline EstimateResult finish(EstimateResult r) {
  r.rho_raw = r.rho_hat;
  r.rho_hat = clamp_unit(r.rho_hat);
  r.bits_used = r.transcript.total_bits();
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------- naive

/// Alice posts her first k signs; Bob averages X_j Y_j.
template <PairSource S>
EstimateResult run_naive(unsigned k, const S& src) {
  require(k >= 1, "naive scheme needs k >= 1");
  require(src.family() == Family::binary, "naive scheme needs a binary source");
  detail::require_size(src.size(), k, "naive scheme");
  EstimateResult r;
  r.transcript = Transcript(k);
  Message m{Speaker::alice, 0, {}};
  for (unsigned j = 0; j < k; ++j) m.push_bit(src.x(j) > 0);
  r.transcript.post(std::move(m));

  const Message& board = r.transcript.messages().front();
  double acc = 0.0;
  for (unsigned j = 0; j < k; ++j) acc += (board.bit(j) ? 1.0 : -1.0) * src.y(j);
  r.rho_hat = acc / k;
  return detail::finish(std::move(r));
}

// ---------------------------------------------------------------- max

/// Alice posts the k-bit index of her largest sample among 2^k; Bob scales his
/// sample at that index by the exact mean of the maximum.
template <PairSource S>
EstimateResult run_max_scheme(unsigned k, const S& src) {
  detail::check_index_bits(k, "max scheme");
  require(src.family() == Family::gaussian, "max scheme needs a gaussian source");
  const std::size_t n = std::size_t{1} << k;
  detail::require_size(src.size(), n, "max scheme");

  EstimateResult r;
  r.transcript = Transcript(k);
  r.transcript.send_value(Speaker::alice, argmax_x(src, 0, n), k);
  const std::uint64_t w = r.transcript.messages().front().read(0, k);
  r.rho_hat = src.y(w) / expected_max_normal(n);
  return detail::finish(std::move(r));
}

// ---------------------------------------------------------------- local

struct LocalParams {
  double c_threshold = 0.1;
  double c_bits = 0.15;
};

inline void validate(const LocalParams& p) {
  require(p.c_threshold >= 0.0 && p.c_threshold < 1.0, "local scheme needs c_threshold in [0, 1)");
  require(p.c_bits >= 0.0 && std::isfinite(p.c_bits), "local scheme needs c_bits >= 0");
}

/// Number of index MSBs Alice sends: ceil(k (1 - rho^2)(1 + c_bits)), capped at k.
inline unsigned local_prefix_bits(unsigned k, double rho_nominal, const LocalParams& p) {
  validate(p);
  require(std::abs(rho_nominal) < 1.0, "local scheme needs |rho_nominal| < 1");
  const double raw = std::ceil(k * (1.0 - rho_nominal * rho_nominal) * (1.0 + p.c_bits) - 1e-9);
  return static_cast<unsigned>(std::clamp(raw, 1.0, static_cast<double>(k)));
}

/// Bob's marking threshold on sign(rho_nominal) * Y.
inline double local_threshold(unsigned k, double rho_nominal, const LocalParams& p) {
  return std::abs(rho_nominal) * std::sqrt(2.0 * k * std::numbers::ln2) * (1.0 - p.c_threshold);
}

namespace detail {

// Local scheme on the sample range [base, base + 2^k). Alice's prefix goes on
// the board as one message; Bob decodes inside the announced bucket only,
// which is where any matching marked index must live.
template <PairSource S>
void local_exchange(EstimateResult& r, unsigned k, unsigned m, double rho_nominal, const LocalParams& p,
                    const S& src, std::size_t base) {
  const std::size_t n = std::size_t{1} << k;
  const std::size_t w = argmax_x(src, base, base + n) - base;
  const unsigned drop = k - m;
  r.transcript.send_value(Speaker::alice, w >> drop, m);

  const std::uint64_t prefix = r.transcript.messages().back().read(0, m);
  const double mean_max = expected_max_normal(n);
  const std::size_t first = static_cast<std::size_t>(prefix) << drop;
  const std::size_t bucket = std::size_t{1} << drop;
  if (bucket == 1) {
    r.rho_hat = src.y(base + first) / mean_max;
    return;
  }
  const double sign = rho_nominal < 0.0 ? -1.0 : 1.0;
  const double threshold = local_threshold(k, rho_nominal, p);
  std::size_t hits = 0;
  std::size_t chosen = 0;
  double chosen_y = 0.0;
  for (std::size_t i = first; i < first + bucket; ++i) {
    const double y = src.y(base + i);
    if (sign * y > threshold) {
      if (++hits > 1) break;
      chosen = i;
      chosen_y = y;
    }
  }
  if (hits == 1) {
    r.rho_hat = chosen_y / mean_max;
    r.decoded_wrong = chosen != w;
  } else {
    r.rho_hat = rho_nominal;
    r.decode_failed = true;
  }
}

}  // namespace detail

/// Alice sends only the leading bits of her argmax index; Bob resolves the
/// rest from the samples his side information marks as likely.
template <PairSource S>
EstimateResult run_local_scheme(unsigned k, double rho_nominal, const S& src, const LocalParams& p = {}) {
  detail::check_index_bits(k, "local scheme");
  require(src.family() == Family::gaussian, "local scheme needs a gaussian source");
  const unsigned m = local_prefix_bits(k, rho_nominal, p);
  detail::require_size(src.size(), std::size_t{1} << k, "local scheme");
  EstimateResult r;
  r.transcript = Transcript(k);
  detail::local_exchange(r, k, m, rho_nominal, p, src, 0);
  return detail::finish(std::move(r));
}

template <PairSource S>
EstimateResult run_local_scheme(unsigned k, double rho_nominal, const S& src, double c_threshold, double c_bits) {
  return run_local_scheme(k, rho_nominal, src, LocalParams{c_threshold, c_bits});
}

// ---------------------------------------------------------------- binary block

struct BlockParams {
  double rho_tilde = 0.25;
  std::size_t n_block = 64;
  double rho_nominal = 0.0;
  /// Bob's marking half-width around n rho_nominal rho_tilde; <= 0 means sqrt(n).
  double window = 0.0;
  /// Alice's blocks number 2^ceil(log2(find_margin / P[sum = n rho_tilde])).
  double find_margin = 4.0;
};

struct BlockPlan {
  long target_sum;        // n rho_tilde
  double p_hit;           // P[a block of n fair signs sums to target]
  unsigned index_bits;    // L, with 2^L blocks
  unsigned sent_bits;     // leading index bits on the board
  double window;
  std::size_t samples;    // n 2^L
};

/// log P[sum of n fair signs = s].
inline double log_prob_block_sum(std::size_t n, long s) {
  const double ones = (static_cast<double>(n) + s) / 2.0;
  return std::lgamma(n + 1.0) - std::lgamma(ones + 1.0) - std::lgamma(n - ones + 1.0) - n * std::numbers::ln2;
}

namespace detail {

inline BlockPlan plan_block_unbudgeted(const BlockParams& p) {
  require(p.n_block >= 1, "block scheme needs n_block >= 1");
  require(p.rho_tilde > 0.0 && p.rho_tilde <= 1.0, "block scheme needs rho_tilde in (0, 1]");
  require(std::abs(p.rho_nominal) < 1.0, "block scheme needs |rho_nominal| < 1");
  require(p.find_margin > 0.0, "block scheme needs find_margin > 0");
  const double n = static_cast<double>(p.n_block);
  const double target = n * p.rho_tilde;
  const long s = std::lround(target);
  require(std::abs(target - s) <= 1e-9, "block scheme needs n_block * rho_tilde to be an integer");
  require(((static_cast<long>(p.n_block) - s) % 2) == 0,
          "block scheme: n_block * rho_tilde must share the parity of n_block");

  BlockPlan plan{};
  plan.target_sum = s;
  plan.p_hit = std::exp(log_prob_block_sum(p.n_block, s));
  const double bits = std::ceil(std::log2(p.find_margin / plan.p_hit) - 1e-12);
  plan.index_bits = static_cast<unsigned>(std::max(0.0, bits));
  if (plan.index_bits > 40) throw GuardError("block scheme needs more than 2^40 blocks");
  // Bits Bob can resolve from his own blocks: n (1 - h((1 - rho rho_tilde) / 2)).
  const double resolvable = std::floor(n * (1.0 - binary_entropy((1.0 - p.rho_nominal * p.rho_tilde) / 2.0)));
  plan.sent_bits = static_cast<unsigned>(std::clamp(plan.index_bits - resolvable, 0.0, double(plan.index_bits)));
  plan.window = p.window > 0.0 ? p.window : std::sqrt(n);
  plan.samples = p.n_block << plan.index_bits;
  return plan;
}

}  // namespace detail

inline BlockPlan plan_binary_block(unsigned k, const BlockParams& p) {
  const BlockPlan plan = detail::plan_block_unbudgeted(p);
  if (plan.sent_bits > k) {
    throw ParameterError("block scheme needs " + std::to_string(plan.sent_bits) + " bits, budget is " +
                         std::to_string(k));
  }
  return plan;
}

/// Alice picks the first of her blocks whose sum equals n rho_tilde and sends
/// the leading bits of its index; Bob resolves the rest among blocks whose sums
/// sit near n rho_nominal rho_tilde and reports his block sum / (n rho_tilde).
template <PairSource S>
EstimateResult run_binary_block(unsigned k, const BlockParams& p, const S& src) {
  require(src.family() == Family::binary, "block scheme needs a binary source");
  const BlockPlan plan = plan_binary_block(k, p);
  detail::require_size(src.size(), plan.samples, "block scheme");
  const std::size_t n = p.n_block;
  const std::size_t blocks = std::size_t{1} << plan.index_bits;

  EstimateResult r;
  r.transcript = Transcript(k);
  std::size_t w = 0;
  bool found = false;
  for (std::size_t b = 0; b < blocks; ++b) {
    if (sum_x(src, b * n, n) == static_cast<double>(plan.target_sum)) {
      w = b;
      found = true;
      break;
    }
  }
  const unsigned drop = plan.index_bits - plan.sent_bits;
  r.transcript.send_value(Speaker::alice, w >> drop, plan.sent_bits);

  const double scale = n * p.rho_tilde;
  if (!found) {
    // No block hit the target: report the first block's empirical correlation.
    r.alice_fallback = true;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += src.x(i) * src.y(i);
    r.rho_hat = acc / n;
    return detail::finish(std::move(r));
  }

  const std::uint64_t prefix = r.transcript.messages().back().read(0, plan.sent_bits);
  const std::size_t first = static_cast<std::size_t>(prefix) << drop;
  const std::size_t bucket = std::size_t{1} << drop;
  if (bucket == 1) {
    r.rho_hat = sum_y(src, first * n, n) / scale;
    return detail::finish(std::move(r));
  }
  const double centre = n * p.rho_nominal * p.rho_tilde;
  std::size_t hits = 0;
  std::size_t chosen = 0;
  double chosen_sum = 0.0;
  for (std::size_t b = first; b < first + bucket; ++b) {
    const double sy = sum_y(src, b * n, n);
    if (std::abs(sy - centre) <= plan.window) {
      if (++hits > 1) break;
      chosen = b;
      chosen_sum = sy;
    }
  }
  if (hits == 1) {
    r.rho_hat = chosen_sum / scale;
    r.decoded_wrong = chosen != w;
  } else {
    r.rho_hat = p.rho_nominal;
    r.decode_failed = true;
  }
  return detail::finish(std::move(r));
}

/// Largest admissible block length whose plan fits in k bits. The bit count
/// grows roughly linearly in n with floor jitter, so the search stops once it
/// is a few bits past the budget.
inline std::size_t largest_block_for_budget(unsigned k, double rho_tilde, double rho_nominal,
                                            std::size_t max_n = 100000, double find_margin = 4.0) {
  std::size_t best = 0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const double target = n * rho_tilde;
    const long s = std::lround(target);
    if (std::abs(target - s) > 1e-9 || ((static_cast<long>(n) - s) % 2) != 0) continue;
    BlockPlan plan;
    try {
      plan = detail::plan_block_unbudgeted({rho_tilde, n, rho_nominal, 0.0, find_margin});
    } catch (const GuardError&) {
      break;
    }
    if (plan.sent_bits <= k) best = n;
    else if (best != 0 && plan.sent_bits > k + 3) break;
  }
  require(best != 0, "no block length fits the bit budget");
  return best;
}

// ---------------------------------------------------------------- two-way

struct TwoWayPlan {
  unsigned k1;          // round 1: Alice's coarse signs
  unsigned count_bits;  // round 2: Bob announces the prefix length
  unsigned k2;          // round 3: local scheme index bits
};

inline unsigned bits_for(std::uint64_t max_value) {
  unsigned b = 0;
  while ((std::uint64_t{1} << b) <= max_value) ++b;
  return std::max(b, 1U);
}

inline unsigned default_first_round_bits(unsigned k) {
  return static_cast<unsigned>(std::ceil(std::sqrt(static_cast<double>(k))));
}

inline TwoWayPlan plan_two_way(unsigned k, unsigned k1) {
  require(k1 >= 1, "two-way scheme needs k1 >= 1");
  require(k1 < k, "two-way scheme needs k1 < k");
  const unsigned count_bits = bits_for(k - k1);
  require(k > k1 + count_bits, "two-way scheme: no bits left for the final round");
  TwoWayPlan plan{k1, count_bits, k - k1 - count_bits};
  detail::check_index_bits(plan.k2, "two-way scheme");
  return plan;
}

inline std::size_t two_way_samples(const TwoWayPlan& plan) { return (std::size_t{1} << plan.k2) + plan.k1; }

/// Round 1: Alice posts k1 signs of fresh samples and Bob forms a coarse
/// estimate via the arcsine law. Round 2: Bob posts the prefix length the
/// local scheme needs at that estimate. Round 3: the local scheme itself.
template <PairSource S>
EstimateResult run_two_way(unsigned k, const S& src, unsigned k1, const LocalParams& p = {}) {
  require(src.family() == Family::gaussian, "two-way scheme needs a gaussian source");
  const TwoWayPlan plan = plan_two_way(k, k1);
  detail::require_size(src.size(), two_way_samples(plan), "two-way scheme");
  const std::size_t coarse_base = std::size_t{1} << plan.k2;

  EstimateResult r;
  r.transcript = Transcript(k);
  Message signs{Speaker::alice, 0, {}};
  for (unsigned j = 0; j < k1; ++j) signs.push_bit(src.x(coarse_base + j) > 0.0);
  r.transcript.post(std::move(signs));

  const Message& w1 = r.transcript.messages().back();
  double agree = 0.0;
  for (unsigned j = 0; j < k1; ++j) agree += (w1.bit(j) == (src.y(coarse_base + j) > 0.0)) ? 1.0 : -1.0;
  const double rho0 = std::clamp(std::sin(std::numbers::pi / 2.0 * agree / k1), -0.999, 0.999);

  const unsigned m = local_prefix_bits(plan.k2, rho0, p);
  r.transcript.send_value(Speaker::bob, m, plan.count_bits);
  require(r.transcript.messages().back().read(0, plan.count_bits) == m, "two-way round 2 garbled");

  detail::local_exchange(r, plan.k2, m, rho0, p, src, 0);
  return detail::finish(std::move(r));
}

}  // namespace dce
