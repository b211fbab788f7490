#pragma once

// Finite-alphabet information measures (all in bits), Fisher information from
// divergence curvature, Bayesian Cramer-Rao machinery, and the closed-form
// leading-order risk oracles.

#include "dce/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dce {

using Pmf = std::vector<double>;

/// Divergences that fail absolute continuity are reported as this value.
inline constexpr double kInfiniteBits = std::numeric_limits<double>::infinity();

inline constexpr double kPmfTolerance = 1e-12;

inline void validate_pmf(std::span<const double> p, double tol = kPmfTolerance) {
  require(!p.empty(), "pmf must be nonempty");
  double total = 0.0;
  for (double v : p) {
    require(std::isfinite(v) && v >= 0.0, "pmf entries must be finite and nonnegative");
    total += v;
  }
  require(std::abs(total - 1.0) <= tol, "pmf sums to " + std::to_string(total) + ", not 1");
}

inline double xlog2x_neg(double v) { return v > 0.0 ? -v * std::log2(v) : 0.0; }

/// Shannon entropy in bits.
inline double entropy(std::span<const double> p) {
  validate_pmf(p);
  double h = 0.0;
  for (double v : p) h += xlog2x_neg(v);
  return h;
}

/// h(p) = -p log p - (1-p) log(1-p).
inline double binary_entropy(double p) {
  require(p >= 0.0 && p <= 1.0, "binary_entropy needs p in [0, 1]");
  return xlog2x_neg(p) + xlog2x_neg(1.0 - p);
}

// p log2(p/q) for p, q > 0, accurate when p and q are close.
inline double kl_term(double p, double q) { return -p * std::log1p((q - p) / p) / std::numbers::ln2; }

/// D(p || q) in bits; +infinity when p charges a q-null point.
inline double kl(std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size(), "kl: alphabet sizes differ");
  validate_pmf(p);
  validate_pmf(q);
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInfiniteBits;
    d += kl_term(p[i], q[i]);
  }
  return std::max(d, 0.0);
}

/// Joint pmf over a product of finite alphabets, stored row-major (last axis fastest).
class JointTable {
 public:
  JointTable() = default;
  JointTable(std::vector<std::size_t> dims, std::vector<double> probs, double tol = 1e-10)
      : dims_(std::move(dims)), probs_(std::move(probs)) {
    require(!dims_.empty(), "joint table needs at least one axis");
    std::size_t n = 1;
    for (std::size_t d : dims_) {
      require(d >= 1, "joint table axis of size 0");
      n *= d;
    }
    require(n == probs_.size(), "joint table size does not match its dimensions");
    validate_pmf(probs_, tol);
  }

  std::size_t rank() const noexcept { return dims_.size(); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t flat) const { return probs_[flat]; }

  /// Marginal over `axes`, with the result's axes in the order given.
  JointTable marginal(const std::vector<std::size_t>& axes) const {
    require(!axes.empty(), "marginal needs at least one axis");
    std::vector<std::size_t> out_dims;
    for (std::size_t a : axes) out_dims.push_back(dims_.at(a));
    std::vector<double> out(product(out_dims), 0.0);
    for_each_index([&](std::size_t flat, const std::vector<std::size_t>& idx) {
      out[flat_of(idx, axes)] += probs_[flat];
    });
    return JointTable(std::move(out_dims), std::move(out));
  }

  /// Calls f(flat, multi_index) for every cell, in storage order.
  template <class F>
  void for_each_index(F&& f) const {
    std::vector<std::size_t> idx(dims_.size(), 0);
    for (std::size_t flat = 0; flat < probs_.size(); ++flat) {
      f(flat, idx);
      for (std::size_t a = dims_.size(); a-- > 0;) {
        if (++idx[a] < dims_[a]) break;
        idx[a] = 0;
      }
    }
  }

  /// Mixed-radix index of the sub-tuple idx[axes].
  std::size_t flat_of(const std::vector<std::size_t>& idx, const std::vector<std::size_t>& axes) const {
    std::size_t f = 0;
    for (std::size_t a : axes) f = f * dims_[a] + idx[a];
    return f;
  }

  static std::size_t product(const std::vector<std::size_t>& d) {
    return std::accumulate(d.begin(), d.end(), std::size_t{1}, std::multiplies<>());
  }

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> probs_;
};

/// Explicit 2-D pmf p[x][y].
class FiniteJoint {
 public:
  FiniteJoint(std::size_t nx, std::size_t ny, std::vector<double> probs)
      : table_({nx, ny}, std::move(probs), kPmfTolerance) {}
  explicit FiniteJoint(const std::vector<std::vector<double>>& rows) : FiniteJoint(from_rows(rows)) {}

  std::size_t nx() const { return table_.dim(0); }
  std::size_t ny() const { return table_.dim(1); }
  double p(std::size_t x, std::size_t y) const { return table_[x * ny() + y]; }
  const JointTable& table() const noexcept { return table_; }
  Pmf marginal_x() const { return table_.marginal({0}).probs(); }
  Pmf marginal_y() const { return table_.marginal({1}).probs(); }

 private:
  static FiniteJoint from_rows(const std::vector<std::vector<double>>& rows) {
    require(!rows.empty() && !rows[0].empty(), "finite joint needs a nonempty table");
    std::vector<double> flat;
    for (const auto& r : rows) {
      require(r.size() == rows[0].size(), "finite joint rows differ in length");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return FiniteJoint(rows.size(), rows[0].size(), std::move(flat));
  }

  JointTable table_;
};

/// Doubly symmetric binary source on {-1, +1}^2, index 0 <-> -1.
inline FiniteJoint binary_symmetric_joint(double rho) {
  require(std::abs(rho) <= 1.0, "correlation must lie in [-1, 1]");
  const double same = (1.0 + rho) / 4.0;
  const double diff = (1.0 - rho) / 4.0;
  return FiniteJoint(2, 2, {same, diff, diff, same});
}

/// I(A; B | C) where A, B, C are disjoint axis groups of `table`. C may be empty.
inline double cond_mutual_info(const JointTable& table, const std::vector<std::size_t>& a_axes,
                               const std::vector<std::size_t>& b_axes, const std::vector<std::size_t>& c_axes) {
  require(!a_axes.empty() && !b_axes.empty(), "cond_mutual_info needs nonempty A and B");
  std::vector<bool> seen(table.rank(), false);
  for (const auto* group : {&a_axes, &b_axes, &c_axes}) {
    for (std::size_t ax : *group) {
      require(ax < table.rank(), "cond_mutual_info: axis out of range");
      require(!seen[ax], "cond_mutual_info: axis groups overlap");
      seen[ax] = true;
    }
  }
  auto size_of = [&](const std::vector<std::size_t>& axes) {
    std::size_t s = 1;
    for (std::size_t ax : axes) s *= table.dim(ax);
    return s;
  };
  const std::size_t na = size_of(a_axes), nb = size_of(b_axes), nc = size_of(c_axes);
  std::vector<double> pabc(na * nb * nc, 0.0);
  table.for_each_index([&](std::size_t flat, const std::vector<std::size_t>& idx) {
    const double v = table[flat];
    if (v == 0.0) return;
    const std::size_t ia = table.flat_of(idx, a_axes);
    const std::size_t ib = table.flat_of(idx, b_axes);
    const std::size_t ic = table.flat_of(idx, c_axes);
    pabc[(ia * nb + ib) * nc + ic] += v;
  });
  std::vector<double> pac(na * nc, 0.0), pbc(nb * nc, 0.0), pc(nc, 0.0);
  for (std::size_t ia = 0; ia < na; ++ia)
    for (std::size_t ib = 0; ib < nb; ++ib)
      for (std::size_t ic = 0; ic < nc; ++ic) {
        const double v = pabc[(ia * nb + ib) * nc + ic];
        pac[ia * nc + ic] += v;
        pbc[ib * nc + ic] += v;
        pc[ic] += v;
      }
  double info = 0.0;
  for (std::size_t ia = 0; ia < na; ++ia)
    for (std::size_t ib = 0; ib < nb; ++ib)
      for (std::size_t ic = 0; ic < nc; ++ic) {
        const double v = pabc[(ia * nb + ib) * nc + ic];
        if (v <= 0.0) continue;
        info += v * std::log2(v * pc[ic] / (pac[ia * nc + ic] * pbc[ib * nc + ic]));
      }
  return std::max(info, 0.0);
}

inline double mutual_info(const JointTable& table, const std::vector<std::size_t>& a_axes,
                          const std::vector<std::size_t>& b_axes) {
  return cond_mutual_info(table, a_axes, b_axes, {});
}

/// I(X; Y) = D(P_XY || P_X x P_Y).
inline double mutual_info(const FiniteJoint& j) { return mutual_info(j.table(), {0}, {1}); }

/// I(X; Y | Z) for a rank-3 table over (X, Y, Z).
inline double cond_mutual_info(const JointTable& j3) {
  require(j3.rank() == 3, "cond_mutual_info expects a 3-way table");
  return cond_mutual_info(j3, {0}, {1}, {2});
}

/// D(P_{Y|X} || qy | P_X) - I(X; Y). Nonnegative, zero exactly at qy = P_Y.
inline double mi_radius_gap(const FiniteJoint& j, std::span<const double> qy) {
  require(qy.size() == j.ny(), "mi_radius_gap: qy alphabet does not match Y");
  validate_pmf(qy);
  const Pmf px = j.marginal_x();
  double cond_div = 0.0;
  for (std::size_t x = 0; x < j.nx(); ++x) {
    for (std::size_t y = 0; y < j.ny(); ++y) {
      const double v = j.p(x, y);
      if (v <= 0.0) continue;
      if (qy[y] <= 0.0) return kInfiniteBits;
      cond_div += v * std::log2(v / (px[x] * qy[y]));
    }
  }
  return cond_div - mutual_info(j);
}

/// A one-parameter family of pmfs over a fixed finite alphabet.
struct ParamFamily {
  std::function<Pmf(double)> eval;
  double lo;
  double hi;

  Pmf operator()(double theta) const {
    require(theta >= lo && theta <= hi, "parameter " + std::to_string(theta) + " outside family domain");
    Pmf p = eval(theta);
    validate_pmf(p);
    return p;
  }
};

/// The four-point pmf of a doubly symmetric binary pair as a function of rho.
inline ParamFamily binary_pair_family() {
  return {[](double rho) { return binary_symmetric_joint(rho).table().probs(); }, -1.0, 1.0};
}

/// Fisher information (nats) from the two-sided curvature of KL at theta.
inline double fisher_fd(const ParamFamily& fam, double theta, double eps = 1e-3) {
  require(eps > 0.0, "fisher_fd needs eps > 0");
  require(theta - eps >= fam.lo && theta + eps <= fam.hi, "fisher_fd: theta +/- eps leaves the family domain");
  const Pmf p = fam(theta);
  const double up = kl(p, fam(theta + eps));
  const double down = kl(p, fam(theta - eps));
  return 2.0 * std::numbers::ln2 * (up + down) / (2.0 * eps * eps);
}

/// Raised-cosine prior on [center - half_width, center + half_width]; vanishes at both ends.
class CosinePrior {
 public:
  CosinePrior(double center, double half_width) : center_(center), hw_(half_width) {
    require(half_width > 0.0 && std::isfinite(half_width), "cosine prior needs half_width > 0");
  }

  double center() const noexcept { return center_; }
  double half_width() const noexcept { return hw_; }
  double lower() const noexcept { return center_ - hw_; }
  double upper() const noexcept { return center_ + hw_; }

  double density(double theta) const {
    const double t = theta - center_;
    if (std::abs(t) > hw_) return 0.0;
    const double c = std::cos(std::numbers::pi * t / (2.0 * hw_));
    return c * c / hw_;
  }

  double cdf(double theta) const {
    const double t = std::clamp(theta - center_, -hw_, hw_);
    return (t + hw_) / (2.0 * hw_) + std::sin(std::numbers::pi * t / hw_) / (2.0 * std::numbers::pi);
  }

  /// Inverse CDF by bisection; the CDF is strictly increasing on the support.
  double quantile(double u) const {
    require(u >= 0.0 && u <= 1.0, "quantile needs u in [0, 1]");
    double lo = lower(), hi = upper();
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hw_; ++i) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  template <class URBG>
  double sample(URBG& g) const {
    return quantile(std::generate_canonical<double, 53>(g));
  }

  /// Fisher information of the location family, int (lambda')^2 / lambda.
  double fisher_information() const {
    const double r = std::numbers::pi / hw_;
    return r * r;
  }

 private:
  double center_;
  double hw_;
};

/// van Trees bound on the prior-averaged squared error.
inline double bayes_cr_bound(double i_lambda, double avg_fisher) {
  require(i_lambda >= 0.0 && avg_fisher >= 0.0, "bayes_cr_bound needs nonnegative inputs");
  require(i_lambda + avg_fisher > 0.0, "bayes_cr_bound is undefined when both informations vanish");
  return 1.0 / (i_lambda + avg_fisher);
}

struct BayesCrResult {
  double i_lambda;
  double avg_fisher;
  double bound;
};

/// Averages a Fisher information curve over the prior and forms the bound.
inline BayesCrResult bayes_cr(const CosinePrior& prior, const std::function<double(double)>& fisher) {
  const double avg = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double t) { return prior.density(t) * fisher(t); }, prior.lower(), prior.upper(), 12, 1e-12);
  const double il = prior.fisher_information();
  return {il, avg, bayes_cr_bound(il, avg)};
}

/// Leading-order risk formulas (o(1) terms dropped); asymptotic references only.
struct BoundSet {
  double k;
  double rho;
  double global_upper;
  double local_upper;
  double local_lower;
  double naive_risk;
  double max_scheme_risk;
};

inline BoundSet risk_bounds(double k, double rho) {
  require(k >= 1.0, "risk_bounds needs k >= 1");
  require(std::abs(rho) <= 1.0, "correlation must lie in [-1, 1]");
  const double unit = 1.0 / (2.0 * k * std::numbers::ln2);
  const double v = 1.0 - rho * rho;
  const double w = 1.0 - std::abs(rho);
  return {k, rho, unit, v * v * unit, w * w * unit, v / k, v * unit};
}

}  // namespace dce
