#pragma once

// Correlated source families, the common-randomness correlation shift, and the
// block-sum preprocessor that turns binary pairs into approximately Gaussian ones.

#include "dce/error.hpp"
#include "dce/rng.hpp"

#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dce {

enum class Family { binary, gaussian };

inline std::string_view to_string(Family f) { return f == Family::binary ? "binary" : "gaussian"; }

inline Family family_from_string(std::string_view s) {
  if (s == "binary") return Family::binary;
  if (s == "gaussian") return Family::gaussian;
  throw ParameterError("unknown source family '" + std::string(s) + "'");
}

inline void check_rho(double rho) {
  if (!(std::abs(rho) <= 1.0)) throw ParameterError("correlation must lie in [-1, 1], got " + std::to_string(rho));
}

struct CorrelationModel {
  Family family;
  double rho;

  CorrelationModel(Family f, double r) : family(f), rho(r) { check_rho(r); }
};

/// Anything that exposes aligned sample pairs (x_i, y_i) by index.
template <class S>
concept PairSource = requires(const S& s, std::size_t i) {
  { s.size() } -> std::convertible_to<std::size_t>;
  { s.x(i) } -> std::convertible_to<double>;
  { s.y(i) } -> std::convertible_to<double>;
  { s.family() } -> std::same_as<Family>;
};

/// n aligned sample pairs held in memory. Binary samples are stored as reals
/// and must be exactly +1 or -1.
class PairBatch {
 public:
  PairBatch(Family family, std::vector<double> x, std::vector<double> y,
            std::optional<double> nominal_rho = std::nullopt)
      : family_(family), x_(std::move(x)), y_(std::move(y)), nominal_rho_(nominal_rho) {
    require(!x_.empty(), "pair batch must hold at least one pair");
    require(x_.size() == y_.size(), "pair batch columns differ in length");
    if (family_ == Family::binary) {
      for (std::size_t i = 0; i < x_.size(); ++i) {
        require((x_[i] == 1.0 || x_[i] == -1.0) && (y_[i] == 1.0 || y_[i] == -1.0),
                "binary pair batch entry " + std::to_string(i) + " is not +/-1");
      }
    }
    if (nominal_rho_) check_rho(*nominal_rho_);
  }

  std::size_t size() const noexcept { return x_.size(); }
  Family family() const noexcept { return family_; }
  double x(std::size_t i) const { return x_[i]; }
  double y(std::size_t i) const { return y_[i]; }
  std::span<const double> xs() const noexcept { return x_; }
  std::span<const double> ys() const noexcept { return y_; }

  /// Correlation of the model the batch was drawn from, when known.
  std::optional<double> nominal_rho() const noexcept { return nominal_rho_; }

  friend bool operator==(const PairBatch&, const PairBatch&) = default;

 private:
  Family family_;
  std::vector<double> x_;
  std::vector<double> y_;
  std::optional<double> nominal_rho_;
};

/// Lazily evaluated Gaussian pairs: X = Phi^-1(U), Y = rho X + sqrt(1 - rho^2) Z.
class GaussianSource {
 public:
  GaussianSource(double rho, std::size_t n, std::uint64_t key)
      : rho_(rho), tail_(std::sqrt(1.0 - rho * rho)), n_(n),
        xs_(derive_key(key, tag_of("gauss.x"))), zs_(derive_key(key, tag_of("gauss.z"))) {
    check_rho(rho);
  }

  std::size_t size() const noexcept { return n_; }
  Family family() const noexcept { return Family::gaussian; }
  double rho() const noexcept { return rho_; }
  double x(std::size_t i) const { return xs_.normal(i); }
  double y(std::size_t i) const { return rho_ * x(i) + tail_ * zs_.normal(i); }

  /// Index of the largest x in [begin, end); smallest index on ties. The
  /// quantile map is monotone, so comparing the raw 53-bit draws is exact.
  std::size_t argmax_x(std::size_t begin, std::size_t end) const noexcept {
    std::size_t best = begin;
    std::uint64_t best_bits = xs_.bits(begin) >> 11;
    for (std::size_t i = begin + 1; i < end; ++i) {
      const std::uint64_t b = xs_.bits(i) >> 11;
      if (b > best_bits) {
        best_bits = b;
        best = i;
      }
    }
    return best;
  }

 private:
  double rho_;
  double tail_;
  std::size_t n_;
  CounterStream xs_;
  CounterStream zs_;
};

/// Lazily evaluated binary symmetric pairs. Alice's signs are packed 64 per
/// stream word so block sums reduce to popcounts; Bob's sample flips Alice's
/// with probability (1 - rho) / 2.
class BinarySource {
 public:
  BinarySource(double rho, std::size_t n, std::uint64_t key)
      : flip_prob_((1.0 - rho) / 2.0), rho_(rho), n_(n),
        words_(derive_key(key, tag_of("binary.x"))), flips_(derive_key(key, tag_of("binary.flip"))) {
    check_rho(rho);
  }

  std::size_t size() const noexcept { return n_; }
  Family family() const noexcept { return Family::binary; }
  double rho() const noexcept { return rho_; }
  double x(std::size_t i) const noexcept {
    return ((words_.bits(i >> 6) >> (i & 63)) & 1U) ? 1.0 : -1.0;
  }
  double y(std::size_t i) const noexcept {
    return flips_.uniform(i) < flip_prob_ ? -x(i) : x(i);
  }

  /// Sum of x over [begin, begin + len).
  long sum_x(std::size_t begin, std::size_t len) const noexcept {
    long ones = 0;
    std::size_t i = begin;
    const std::size_t end = begin + len;
    while (i < end) {
      const std::size_t word = i >> 6;
      const unsigned offset = static_cast<unsigned>(i & 63);
      const std::size_t take = std::min<std::size_t>(64 - offset, end - i);
      std::uint64_t bits = words_.bits(word) >> offset;
      if (take < 64) bits &= (std::uint64_t{1} << take) - 1;
      ones += std::popcount(bits);
      i += take;
    }
    return 2 * ones - static_cast<long>(len);
  }

 private:
  double flip_prob_;
  double rho_;
  std::size_t n_;
  CounterStream words_;
  CounterStream flips_;
};

// Optional fast paths; every source answers through the generic scan otherwise.

template <PairSource S>
std::size_t argmax_x(const S& s, std::size_t begin, std::size_t end) {
  if constexpr (requires { s.argmax_x(begin, end); }) {
    return s.argmax_x(begin, end);
  } else {
    std::size_t best = begin;
    double best_x = s.x(begin);
    for (std::size_t i = begin + 1; i < end; ++i) {
      const double v = s.x(i);
      if (v > best_x) {
        best_x = v;
        best = i;
      }
    }
    return best;
  }
}

template <PairSource S>
double sum_x(const S& s, std::size_t begin, std::size_t len) {
  if constexpr (requires { s.sum_x(begin, len); }) {
    return static_cast<double>(s.sum_x(begin, len));
  } else {
    double total = 0.0;
    for (std::size_t i = begin; i < begin + len; ++i) total += s.x(i);
    return total;
  }
}

template <PairSource S>
double sum_y(const S& s, std::size_t begin, std::size_t len) {
  double total = 0.0;
  for (std::size_t i = begin; i < begin + len; ++i) total += s.y(i);
  return total;
}

template <PairSource S>
PairBatch materialize(const S& s, std::optional<double> nominal_rho = std::nullopt) {
  std::vector<double> x(s.size());
  std::vector<double> y(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    x[i] = s.x(i);
    y[i] = s.y(i);
  }
  return PairBatch(s.family(), std::move(x), std::move(y), nominal_rho);
}

/// Stream key used by gen_pairs for a given seed.
inline std::uint64_t pairs_key(std::uint64_t seed) { return derive_key(seed, tag_of("gen_pairs")); }

/// n iid pairs from `model`; a pure function of (model, n, seed).
inline PairBatch gen_pairs(const CorrelationModel& model, std::size_t n, std::uint64_t seed) {
  check_rho(model.rho);
  require(n >= 1, "gen_pairs needs n >= 1");
  const std::uint64_t key = pairs_key(seed);
  if (model.family == Family::binary) return materialize(BinarySource(model.rho, n, key), model.rho);
  return materialize(GaussianSource(model.rho, n, key), model.rho);
}

/// Parameters of the correlation-shift device mapping the testing pair (0, rho)
/// onto (rho0, rho1).
struct ShiftParams {
  Family family;
  double alpha;
  int sign;
  double rho0;
  double rho1;

  /// Correlation the device expects on its input under the alternative.
  double input_rho() const {
    const double denom = 1.0 - std::abs(rho0);
    return denom > 0.0 ? (rho1 - rho0) / denom : 0.0;
  }

  void validate() const {
    check_rho(rho0);
    check_rho(rho1);
    constexpr double tol = 1e-12;
    require(rho0 >= (rho1 - 1.0) / 2.0 - tol && rho0 <= (rho1 + 1.0) / 2.0 + tol,
            "shift needs rho0 in [(rho1-1)/2, (rho1+1)/2]");
    require(sign == 1 || sign == -1, "shift sign must be +1 or -1");
    require(alpha >= 0.0 && alpha <= 1.0, "shift alpha must lie in [0, 1]");
    const double expected_alpha = family == Family::binary ? std::abs(rho0) : std::sqrt(std::abs(rho0));
    require(std::abs(alpha - expected_alpha) <= tol, "shift alpha inconsistent with rho0");
    require(sign == (rho0 < 0.0 ? -1 : 1), "shift sign inconsistent with rho0");
  }

  static ShiftParams for_targets(Family family, double rho0, double rho1) {
    ShiftParams p{family, family == Family::binary ? std::abs(rho0) : std::sqrt(std::abs(rho0)),
                  rho0 < 0.0 ? -1 : 1, rho0, rho1};
    p.validate();
    return p;
  }
};

/// Applies X' = mix(Z, X), Y' = mix(sZ, Y) with fresh shared randomness Z
/// (and, for binary sources, a shared Bernoulli(alpha) selector).
inline PairBatch shift_correlation(const PairBatch& batch, const ShiftParams& params, std::uint64_t seed) {
  params.validate();
  require(batch.family() == params.family, "shift_correlation: family mismatch");
  const double rho_in = params.input_rho();
  std::optional<double> out_rho;
  if (auto nominal = batch.nominal_rho()) {
    constexpr double tol = 1e-12;
    if (std::abs(*nominal - rho_in) <= tol) {
      out_rho = params.rho1;
    } else if (std::abs(*nominal) <= tol) {
      out_rho = params.rho0;
    } else {
      throw ParameterError("shift_correlation: batch correlation " + std::to_string(*nominal) +
                           " is neither 0 nor the device input " + std::to_string(rho_in));
    }
  }

  const std::size_t n = batch.size();
  std::vector<double> x(n);
  std::vector<double> y(n);
  const CounterStream shared(derive_key(seed, tag_of("shift.z")));
  const CounterStream selector(derive_key(seed, tag_of("shift.b")));
  const double s = params.sign;
  if (params.family == Family::gaussian) {
    const double keep = std::sqrt(1.0 - params.alpha * params.alpha);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = shared.normal(i);
      x[i] = params.alpha * z + keep * batch.x(i);
      y[i] = s * params.alpha * z + keep * batch.y(i);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (selector.uniform(i) < params.alpha) {
        const double z = (shared.bits(i) & 1U) ? 1.0 : -1.0;
        x[i] = z;
        y[i] = s * z;
      } else {
        x[i] = batch.x(i);
        y[i] = batch.y(i);
      }
    }
  }
  return PairBatch(params.family, std::move(x), std::move(y), out_rho);
}

inline double default_smoothing(std::size_t t) { return std::pow(static_cast<double>(t), -0.25); }

/// Block sums of t binary pairs scaled by 1/sqrt(t), plus independent
/// N(0, a_t^2) smoothing on each coordinate.
inline PairBatch binary_to_gaussian(const PairBatch& binary_batch, std::size_t t, double a_t, std::uint64_t seed) {
  require(binary_batch.family() == Family::binary, "binary_to_gaussian needs a binary batch");
  require(t >= 1, "binary_to_gaussian needs t >= 1");
  require(binary_batch.size() % t == 0, "binary_to_gaussian: batch length not divisible by t");
  require(a_t >= 0.0 && std::isfinite(a_t), "binary_to_gaussian needs a_t >= 0");

  const std::size_t n = binary_batch.size() / t;
  const double scale = 1.0 / std::sqrt(static_cast<double>(t));
  const CounterStream noise_x(derive_key(seed, tag_of("b2g.nx")));
  const CounterStream noise_y(derive_key(seed, tag_of("b2g.ny")));
  std::vector<double> x(n);
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) {
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t l = j * t; l < (j + 1) * t; ++l) {
      sx += binary_batch.x(l);
      sy += binary_batch.y(l);
    }
    x[j] = sx * scale;
    y[j] = sy * scale;
    if (a_t > 0.0) {
      x[j] += a_t * noise_x.normal(j);
      y[j] += a_t * noise_y.normal(j);
    }
  }
  std::optional<double> out_rho;
  if (auto r = binary_batch.nominal_rho()) out_rho = *r / (1.0 + a_t * a_t);
  return PairBatch(Family::gaussian, std::move(x), std::move(y), out_rho);
}

inline PairBatch binary_to_gaussian(const PairBatch& binary_batch, std::size_t t, std::uint64_t seed) {
  return binary_to_gaussian(binary_batch, t, default_smoothing(t), seed);
}

/// Pearson correlation of a batch (diagnostic helper).
template <PairSource S>
double empirical_correlation(const S& s) {
  const std::size_t n = s.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += s.x(i);
    my += s.y(i);
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = s.x(i) - mx, dy = s.y(i) - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace dce
