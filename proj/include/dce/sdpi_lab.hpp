#pragma once

// Brute-force checks of the interactive information inequalities on small
// finite instances: the symmetric SDPI (R <= rho^2 S), its tilted one-shot
// form, binary-input contraction, tensorization, the interactive divergence
// chain, the correlation-shift reduction and the Gap-Hamming mixture bound.

#include "dce/error.hpp"
#include "dce/info_theory.hpp"
#include "dce/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dce {

inline constexpr std::size_t kJointGuard = 10'000'000;
inline constexpr double kIdentityTol = 1e-9;

/// An r-round protocol on finite alphabets. Round i (1-based) draws U_i from
/// tables[i-1], whose rows are indexed by (input, u_1..u_{i-1}) with the
/// history in mixed radix; odd rounds read X and even rounds read Y.
struct InteractiveSpec {
  std::size_t nx = 2;
  std::size_t ny = 2;
  std::vector<std::size_t> alphabets;
  std::vector<std::vector<double>> tables;

  std::size_t rounds() const noexcept { return alphabets.size(); }
  static bool reads_x(std::size_t round) { return round % 2 == 1; }

  std::size_t history(std::size_t round) const {
    std::size_t h = 1;
    for (std::size_t j = 0; j + 1 < round; ++j) h *= alphabets[j];
    return h;
  }

  std::size_t inputs(std::size_t round) const { return reads_x(round) ? nx : ny; }

  double channel(std::size_t round, std::size_t input, std::size_t hist, std::size_t u) const {
    return tables[round - 1][(input * history(round) + hist) * alphabets[round - 1] + u];
  }

  /// Sum of fixed-length message sizes, ceil(log2 |U_i|) per round.
  std::size_t message_bits() const {
    std::size_t b = 0;
    for (std::size_t a : alphabets) b += a > 1 ? std::bit_width(a - 1) : 0;
    return b;
  }

  void validate() const {
    require(nx >= 1 && ny >= 1, "spec needs nonempty input alphabets");
    require(alphabets.size() == tables.size(), "spec has mismatched round tables");
    for (std::size_t i = 1; i <= rounds(); ++i) {
      const std::size_t a = alphabets[i - 1];
      require(a >= 1, "round alphabet must be nonempty");
      const std::size_t rows = inputs(i) * history(i);
      require(tables[i - 1].size() == rows * a, "round " + std::to_string(i) + " table has the wrong size");
      for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t u = 0; u < a; ++u) {
          const double v = tables[i - 1][r * a + u];
          require(v >= 0.0 && std::isfinite(v), "channel entries must be nonnegative");
          s += v;
        }
        require(std::abs(s - 1.0) <= 1e-10, "round " + std::to_string(i) + " row does not sum to 1");
      }
    }
  }
};

/// n-fold product of the doubly symmetric binary source. Coordinate j of an
/// index is bit (n-1-j); bit 1 <-> +1.
inline FiniteJoint binary_product_source(double rho, unsigned n) {
  require(std::abs(rho) <= 1.0, "correlation must lie in [-1, 1]");
  require(n >= 1 && n <= 11, "product source needs 1 <= n <= 11");
  const std::size_t m = std::size_t{1} << n;
  const double same = (1.0 + rho) / 4.0, diff = (1.0 - rho) / 4.0;
  std::vector<double> p(m * m);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < m; ++y) {
      const int d = std::popcount(x ^ y);
      p[x * m + y] = std::pow(same, static_cast<int>(n) - d) * std::pow(diff, d);
    }
  return FiniteJoint(m, m, std::move(p));
}

/// Independent pair of sources on the product alphabets (x = x1 * nx2 + x2).
inline FiniteJoint product_source(const FiniteJoint& a, const FiniteJoint& b) {
  const std::size_t nx = a.nx() * b.nx(), ny = a.ny() * b.ny();
  std::vector<double> p(nx * ny);
  for (std::size_t x1 = 0; x1 < a.nx(); ++x1)
    for (std::size_t x2 = 0; x2 < b.nx(); ++x2)
      for (std::size_t y1 = 0; y1 < a.ny(); ++y1)
        for (std::size_t y2 = 0; y2 < b.ny(); ++y2)
          p[(x1 * b.nx() + x2) * ny + y1 * b.ny() + y2] = a.p(x1, y1) * b.p(x2, y2);
  return FiniteJoint(nx, ny, std::move(p));
}

/// Source with the same marginals and independent coordinates.
inline FiniteJoint independent_version(const FiniteJoint& s) {
  const Pmf px = s.marginal_x(), py = s.marginal_y();
  std::vector<double> p(s.nx() * s.ny());
  for (std::size_t x = 0; x < s.nx(); ++x)
    for (std::size_t y = 0; y < s.ny(); ++y) p[x * s.ny() + y] = px[x] * py[y];
  return FiniteJoint(s.nx(), s.ny(), std::move(p));
}

/// Runs the spec on top of an arbitrary base table whose cells map to channel
/// inputs via x_of / y_of. Result axes: base axes, then U_1..U_r.
inline JointTable build_joint_over(const InteractiveSpec& spec, const JointTable& base,
                                   const std::vector<std::size_t>& x_of, const std::vector<std::size_t>& y_of) {
  spec.validate();
  require(x_of.size() == base.size() && y_of.size() == base.size(), "input maps must cover the base table");
  std::size_t total = base.size();
  for (std::size_t a : spec.alphabets) {
    if (total > kJointGuard / a) throw GuardError("joint table would exceed 1e7 entries");
    total *= a;
  }
  std::vector<double> cur = base.probs();
  std::size_t hist = 1;
  for (std::size_t i = 1; i <= spec.rounds(); ++i) {
    const std::size_t a = spec.alphabets[i - 1];
    const auto& input = InteractiveSpec::reads_x(i) ? x_of : y_of;
    std::vector<double> next(cur.size() * a);
    for (std::size_t c = 0; c < base.size(); ++c) {
      const std::size_t in = input[c];
      require(in < spec.inputs(i), "channel input out of range");
      for (std::size_t h = 0; h < hist; ++h) {
        const double v = cur[c * hist + h];
        const double* row = &spec.tables[i - 1][(in * hist + h) * a];
        for (std::size_t u = 0; u < a; ++u) next[(c * hist + h) * a + u] = v * row[u];
      }
    }
    cur = std::move(next);
    hist *= a;
  }
  std::vector<std::size_t> dims = base.dims();
  dims.insert(dims.end(), spec.alphabets.begin(), spec.alphabets.end());
  return JointTable(std::move(dims), std::move(cur), 1e-10);
}

/// Exact joint over (X, Y, U_1, ..., U_r).
inline JointTable build_joint(const InteractiveSpec& spec, const FiniteJoint& source) {
  require(spec.nx == source.nx() && spec.ny == source.ny(), "spec alphabets do not match the source");
  std::vector<std::size_t> xs(source.table().size()), ys(source.table().size());
  for (std::size_t x = 0; x < source.nx(); ++x)
    for (std::size_t y = 0; y < source.ny(); ++y) {
      xs[x * source.ny() + y] = x;
      ys[x * source.ny() + y] = y;
    }
  return build_joint_over(spec, source.table(), xs, ys);
}

inline std::vector<std::size_t> axis_range(std::size_t first, std::size_t count) {
  std::vector<std::size_t> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = first + i;
  return v;
}

inline std::vector<std::size_t> concat(std::vector<std::size_t> a, const std::vector<std::size_t>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

/// D(P_A || Q_A) for the marginals of two tables of identical shape on `axes`.
inline double marginal_kl(const JointTable& p, const JointTable& q, const std::vector<std::size_t>& axes) {
  return kl(p.marginal(axes).probs(), q.marginal(axes).probs());
}

struct RSValue {
  double R = 0.0;  // information interchanged, round by round
  double S = 0.0;  // information injected, round by round
  double ratio = 0.0;
  double r_identity = 0.0;  // I(X;Y) - I(X;Y|U^r)
  double s_identity = 0.0;  // I(U^r; X, Y)
};

/// Below this much injected information R/S is reported as 0; the float
/// error of R and S is ~1e-16, so smaller S makes the quotient noise.
inline constexpr double kRatioFloor = 1e-6;

inline RSValue compute_R_S(const InteractiveSpec& spec, const FiniteJoint& source) {
  RSValue v;
  if (spec.rounds() == 0) return v;
  const JointTable j = build_joint(spec, source);
  for (std::size_t i = 1; i <= spec.rounds(); ++i) {
    const auto hist = axis_range(2, i - 1);
    const std::vector<std::size_t> ui{1 + i};
    const double to_x = cond_mutual_info(j, ui, {0}, hist);
    const double to_y = cond_mutual_info(j, ui, {1}, hist);
    if (InteractiveSpec::reads_x(i)) {
      v.R += to_y;
      v.S += to_x;
    } else {
      v.R += to_x;
      v.S += to_y;
    }
  }
  const auto msgs = axis_range(2, spec.rounds());
  v.r_identity = mutual_info(j, {0}, {1}) - cond_mutual_info(j, {0}, {1}, msgs);
  v.s_identity = mutual_info(j, msgs, {0, 1});
  v.ratio = v.S < kRatioFloor ? 0.0 : v.R / v.S;
  return v;
}

// ---------------------------------------------------------------- random instances

/// Uniform draw from the simplex (Dirichlet(1) via normalized exponentials).
inline Pmf random_dirichlet(std::size_t n, SplitMix64& g) {
  Pmf p(n);
  double s = 0.0;
  for (auto& v : p) s += (v = -std::log(g.uniform()));
  for (auto& v : p) v /= s;
  return p;
}

struct RandomSpecOptions {
  std::size_t max_rounds = 3;
  std::size_t min_alphabet = 2;
  std::size_t max_alphabet = 3;
  double one_hot_prob = 0.1;  // chance a row is deterministic
  bool weak = false;          // shrink rows toward uniform by a log-uniform factor
};

/// Random channel row: Dirichlet(1), occasionally one-hot.
inline Pmf random_row(std::size_t a, SplitMix64& g, double one_hot_prob) {
  if (g.uniform() < one_hot_prob) {
    Pmf p(a, 0.0);
    p[g.below(a)] = 1.0;
    return p;
  }
  return random_dirichlet(a, g);
}

inline InteractiveSpec random_spec(std::size_t nx, std::size_t ny, std::size_t rounds, const RandomSpecOptions& opt,
                                   SplitMix64& g) {
  InteractiveSpec s{nx, ny, {}, {}};
  const double shrink = opt.weak ? std::exp(std::log(1e-3) * g.uniform()) : 1.0;
  for (std::size_t i = 1; i <= rounds; ++i) {
    const std::size_t a = static_cast<std::size_t>(g.between(static_cast<std::int64_t>(opt.min_alphabet),
                                                             static_cast<std::int64_t>(opt.max_alphabet)));
    s.alphabets.push_back(a);
    const std::size_t rows = s.inputs(i) * s.history(i);
    std::vector<double> t;
    t.reserve(rows * a);
    for (std::size_t r = 0; r < rows; ++r) {
      Pmf row = random_row(a, g, opt.one_hot_prob);
      for (double& v : row) v = shrink * v + (1.0 - shrink) / a;
      t.insert(t.end(), row.begin(), row.end());
    }
    s.tables.push_back(std::move(t));
  }
  return s;
}

inline InteractiveSpec random_spec(std::size_t nx, std::size_t ny, const RandomSpecOptions& opt, SplitMix64& g) {
  const auto r = static_cast<std::size_t>(g.between(1, static_cast<std::int64_t>(opt.max_rounds)));
  return random_spec(nx, ny, r, opt, g);
}

/// One message per round, U_1 = X (identity on X).
inline InteractiveSpec reveal_x_spec(std::size_t nx, std::size_t ny) {
  InteractiveSpec s{nx, ny, {nx}, {std::vector<double>(nx * nx, 0.0)}};
  for (std::size_t x = 0; x < nx; ++x) s.tables[0][x * nx + x] = 1.0;
  return s;
}

/// r rounds of a single-symbol message.
inline InteractiveSpec constant_spec(std::size_t nx, std::size_t ny, std::size_t rounds = 1) {
  InteractiveSpec s{nx, ny, {}, {}};
  for (std::size_t i = 1; i <= rounds; ++i) {
    s.alphabets.push_back(1);
    s.tables.emplace_back(s.inputs(i) * s.history(i), 1.0);
  }
  return s;
}

/// U_1 = 1 iff more than half of Alice's n signs are +1 (ties go to 0).
inline InteractiveSpec majority_spec(unsigned n) {
  const std::size_t m = std::size_t{1} << n;
  InteractiveSpec s{m, m, {2}, {std::vector<double>(2 * m, 0.0)}};
  for (std::size_t x = 0; x < m; ++x) s.tables[0][x * 2 + (2 * std::popcount(x) > static_cast<int>(n) ? 1 : 0)] = 1.0;
  return s;
}

// ---------------------------------------------------------------- SDPI ceiling search

struct SearchResult {
  RSValue best;
  InteractiveSpec best_spec;
  std::size_t evaluations = 0;
};

struct SearchOptions {
  std::size_t r_max = 3;
  std::size_t u_alpha_max = 3;
  std::size_t restarts = 1000;
  std::size_t climb_steps = 12;
};

/// Random restarts followed by a short annealed hill climb on R/S. Best
/// effort: the returned ratio lower-bounds the supremum.
inline SearchResult search_max_ratio(const FiniteJoint& source, const SearchOptions& opt, std::uint64_t seed) {
  require(opt.r_max >= 1 && opt.u_alpha_max >= 2, "search needs r_max >= 1 and |U| >= 2");
  SplitMix64 g(derive_key(seed, tag_of("sdpi.search")));
  SearchResult out;
  auto consider = [&](const InteractiveSpec& s, const RSValue& v) {
    ++out.evaluations;
    if (out.evaluations == 1 || v.ratio > out.best.ratio) {
      out.best = v;
      out.best_spec = s;
    }
  };
  RandomSpecOptions ro{opt.r_max, 2, opt.u_alpha_max, 0.1, false};
  for (std::size_t restart = 0; restart < opt.restarts; ++restart) {
    ro.weak = restart % 2 == 1;
    InteractiveSpec cur = random_spec(source.nx(), source.ny(), ro, g);
    RSValue cur_v = compute_R_S(cur, source);
    consider(cur, cur_v);
    double step = 0.5;
    for (std::size_t it = 0; it < opt.climb_steps; ++it) {
      InteractiveSpec cand = cur;
      if (g.uniform() < 0.3) {
        // Pull every row toward uniform: weak channels approach the ceiling.
        const double keep = 1.0 - step * g.uniform();
        for (std::size_t i = 0; i < cand.rounds(); ++i)
          for (double& v : cand.tables[i]) v = keep * v + (1.0 - keep) / cand.alphabets[i];
      } else {
        const std::size_t i = g.below(cand.rounds());
        const std::size_t a = cand.alphabets[i];
        const std::size_t row = g.below(cand.tables[i].size() / a);
        const Pmf fresh = random_dirichlet(a, g);
        for (std::size_t u = 0; u < a; ++u) {
          double& v = cand.tables[i][row * a + u];
          v = (1.0 - step) * v + step * fresh[u];
        }
      }
      const RSValue v = compute_R_S(cand, source);
      consider(cand, v);
      if (v.ratio > cur_v.ratio) {
        cur = std::move(cand);
        cur_v = v;
      } else {
        step *= 0.7;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- tilted SDPI

struct TiltedReport {
  bool pass = true;
  double i_ux = 0, i_uy = 0;  // U-side: U - X - Y
  double i_vx = 0, i_vy = 0;  // V-side: X - Y - V
  double margin = 0;          // min of rho^2 I(U;X) - I(U;Y) and rho^2 I(Y;V) - I(X;V)
};

/// Checks both one-shot inequalities on P(x,y) ~ f(x) g(y) Q_rho(x,y), where
/// U reads X through channel_u and V reads Y through channel_v (rows per input).
inline TiltedReport verify_tilted_sdpi(double rho, const std::vector<double>& f, const std::vector<double>& g,
                                       const std::vector<std::vector<double>>& channel_u,
                                       const std::vector<std::vector<double>>& channel_v, double tol = 1e-10) {
  require(f.size() == 2 && g.size() == 2, "tilt weights must be given on {-1, +1}");
  require(channel_u.size() == 2 && channel_v.size() == 2, "channels must have one row per binary input");
  const FiniteJoint q = binary_symmetric_joint(rho);
  std::vector<double> p(4);
  double mass = 0.0;
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y) {
      require(f[x] >= 0.0 && g[y] >= 0.0, "tilt weights must be nonnegative");
      p[x * 2 + y] = f[x] * g[y] * q.p(x, y);
      mass += p[x * 2 + y];
    }
  require(mass > 0.0, "degenerate tilt: zero total mass");
  for (double& v : p) v /= mass;
  const FiniteJoint tilted(2, 2, std::move(p));

  auto one_side = [&](const std::vector<std::vector<double>>& ch, bool reads_x) {
    InteractiveSpec s{2, 2, {ch[0].size()}, {{}}};
    if (!reads_x) {
      // A lone even round reads Y; prepend an empty first message.
      s = constant_spec(2, 2, 1);
      s.alphabets.push_back(ch[0].size());
      s.tables.emplace_back();
    }
    for (const auto& row : ch) {
      require(row.size() == ch[0].size(), "channel rows differ in length");
      s.tables.back().insert(s.tables.back().end(), row.begin(), row.end());
    }
    const JointTable j = build_joint(s, tilted);
    const std::size_t u_axis = reads_x ? 2 : 3;
    return std::pair{mutual_info(j, {u_axis}, {0}), mutual_info(j, {u_axis}, {1})};
  };
  TiltedReport r;
  std::tie(r.i_ux, r.i_uy) = one_side(channel_u, true);
  std::tie(r.i_vx, r.i_vy) = one_side(channel_v, false);
  const double r2 = rho * rho;
  r.margin = std::min(r2 * r.i_ux - r.i_uy, r2 * r.i_vy - r.i_vx);
  r.pass = r.margin >= -tol;
  return r;
}

// ---------------------------------------------------------------- binary-input contraction

struct ContractionReport {
  bool pass = true;
  double i_ub = 0;
  double i_ua = 0;
  double factor = 0;  // 1 - (sum_v sqrt(p(v) q(v)))^2
  double margin = 0;
};

/// For U - A - B with binary A, B|A=0 ~ p and B|A=1 ~ q, checks
/// I(U;B) <= I(U;A) (1 - BC(p,q)^2).
inline ContractionReport binary_input_contraction(const Pmf& p, const Pmf& q,
                                                  const std::vector<std::vector<double>>& channel,
                                                  const Pmf& pa = {0.5, 0.5}, double tol = 1e-10) {
  require(p.size() == q.size(), "contraction: p and q alphabets differ");
  validate_pmf(p);
  validate_pmf(q);
  validate_pmf(pa);
  require(pa.size() == 2 && channel.size() == 2, "contraction needs a binary input A");
  const std::size_t nb = p.size(), nu = channel[0].size();
  require(channel[1].size() == nu, "contraction: channel rows differ in length");
  validate_pmf(channel[0]);
  validate_pmf(channel[1]);
  std::vector<double> t(2 * nb * nu);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t u = 0; u < nu; ++u) t[(a * nb + b) * nu + u] = pa[a] * (a ? q[b] : p[b]) * channel[a][u];
  const JointTable j({2, nb, nu}, std::move(t));
  double bc = 0.0;
  for (std::size_t v = 0; v < nb; ++v) bc += std::sqrt(p[v] * q[v]);
  ContractionReport r;
  r.i_ub = mutual_info(j, {2}, {1});
  r.i_ua = mutual_info(j, {2}, {0});
  r.factor = std::max(0.0, 1.0 - bc * bc);
  r.margin = r.i_ua * r.factor - r.i_ub;
  r.pass = r.margin >= -tol;
  return r;
}

// ---------------------------------------------------------------- tensorization

struct TensorReport {
  bool pass = true;
  double ratio = 0;
  double ceiling1 = 0;
  double ceiling2 = 0;
  double margin = 0;
};

inline constexpr double kSearchSlack = 0.02;

/// Checks R/S of `spec` on source1 x source2 against the per-coordinate ceilings.
inline TensorReport verify_tensorization(const FiniteJoint& source1, const FiniteJoint& source2,
                                         const InteractiveSpec& spec, double ceiling1, double ceiling2) {
  TensorReport r;
  r.ratio = compute_R_S(spec, product_source(source1, source2)).ratio;
  r.ceiling1 = ceiling1;
  r.ceiling2 = ceiling2;
  r.margin = std::max(ceiling1, ceiling2) + kSearchSlack - r.ratio;
  r.pass = r.margin >= 0.0;
  return r;
}

/// As above, estimating each coordinate's ceiling by search.
inline TensorReport verify_tensorization(const FiniteJoint& source1, const FiniteJoint& source2,
                                         const InteractiveSpec& spec, const SearchOptions& search, std::uint64_t seed) {
  const double c1 = search_max_ratio(source1, search, derive_key(seed, 1)).best.ratio;
  const double c2 = search_max_ratio(source2, search, derive_key(seed, 2)).best.ratio;
  return verify_tensorization(source1, source2, spec, c1, c2);
}

// ---------------------------------------------------------------- interactive chain

struct ChainReport {
  double d_pix = 0;
  double d_piy = 0;
  double interchanged = 0;
  double injected = 0;
  double rho_sq_injected = 0;
  bool one_way = false;
  bool divergence_ok = true;  // max(d_pix, d_piy) <= interchanged
  bool sdpi_ok = true;        // interchanged <= rho^2 injected
  bool equality_ok = true;    // one-way: d_piy = interchanged
  bool dpi_ok = true;         // d_pix, d_piy <= injected
  bool pass() const { return divergence_ok && sdpi_ok && equality_ok && dpi_ok; }
  double margin() const {
    return std::min({interchanged - std::max(d_pix, d_piy), rho_sq_injected - interchanged,
                     injected - std::max(d_pix, d_piy)});
  }
};

/// Exact evaluation of the divergence chain for `spec` on `source`, with the
/// reference law obtained by running the same channels on the independent
/// coupling of the source marginals.
inline ChainReport verify_interactive_chain(const FiniteJoint& source, const InteractiveSpec& spec, double rho,
                                            double tol = kIdentityTol) {
  ChainReport c;
  c.one_way = spec.rounds() <= 1;
  if (spec.rounds() == 0) return c;
  const JointTable p = build_joint(spec, source);
  const JointTable pbar = build_joint(spec, independent_version(source));
  const auto msgs = axis_range(2, spec.rounds());
  c.d_pix = marginal_kl(p, pbar, concat(msgs, {0}));
  c.d_piy = marginal_kl(p, pbar, concat(msgs, {1}));
  c.interchanged = mutual_info(p, {0}, {1}) - cond_mutual_info(p, {0}, {1}, msgs);
  c.injected = mutual_info(p, msgs, {0, 1});
  c.rho_sq_injected = rho * rho * c.injected;
  c.divergence_ok = std::max(c.d_pix, c.d_piy) <= c.interchanged + tol;
  c.sdpi_ok = c.interchanged <= c.rho_sq_injected + tol;
  c.equality_ok = !c.one_way || std::abs(c.d_piy - c.interchanged) <= tol;
  c.dpi_ok = std::max(c.d_pix, c.d_piy) <= c.injected + tol;
  return c;
}

inline ChainReport verify_interactive_chain(unsigned n, const InteractiveSpec& spec, double rho) {
  require(n == 1 || n == 2, "interactive chain check supports n in {1, 2}");
  return verify_interactive_chain(binary_product_source(rho, n), spec, rho);
}

// ---------------------------------------------------------------- correlation shift

struct ShiftReport {
  bool pass = true;
  double rho_in = 0;
  double d_x = 0, d_y = 0;          // D(P^{rho1}_{Pi X'} || P^{rho0}_{Pi X'}) and the Y' analogue
  double d_x_aug = 0, d_y_aug = 0;  // same with W0 and the raw input in place of X'
  double info_bound = 0;            // rho_in^2 I(W0, Pi; X, Y)
  double bits_bound = 0;            // rho_in^2 * message bits
  double output_rho1 = 0, output_rho0 = 0;
};

/// Runs `spec` on the shifted pair built from explicit common randomness
/// W0 = (B, Z), exactly, for input correlation rho_in (alternative) and 0 (null).
inline ShiftReport verify_shift_reduction(double rho0, double rho1, const InteractiveSpec& spec,
                                          double tol = kIdentityTol) {
  require(std::abs(rho0) <= 1.0 && std::abs(rho1) <= 1.0, "correlations must lie in [-1, 1]");
  require(rho0 >= (rho1 - 1.0) / 2.0 - 1e-12 && rho0 <= (rho1 + 1.0) / 2.0 + 1e-12,
          "shift needs rho0 in [(rho1-1)/2, (rho1+1)/2]");
  require(spec.nx == 2 && spec.ny == 2, "shift reduction runs on a single binary pair");
  const double alpha = std::abs(rho0);
  const bool flip = rho0 < 0.0;
  ShiftReport r;
  r.rho_in = std::abs(rho0) < 1.0 ? (rho1 - rho0) / (1.0 - std::abs(rho0)) : 0.0;

  // Base axes (B, Z, X, Y); X' = B ? Z : X, Y' = B ? sZ : Y.
  std::vector<std::size_t> xs(16), ys(16);
  for (std::size_t c = 0; c < 16; ++c) {
    const std::size_t b = c >> 3, z = (c >> 2) & 1, x = (c >> 1) & 1, y = c & 1;
    xs[c] = b ? z : x;
    ys[c] = b ? (flip ? 1 - z : z) : y;
  }
  auto base_for = [&](double rho) {
    const FiniteJoint q = binary_symmetric_joint(rho);
    std::vector<double> p(16);
    for (std::size_t c = 0; c < 16; ++c) {
      const std::size_t b = c >> 3, x = (c >> 1) & 1, y = c & 1;
      p[c] = (b ? alpha : 1.0 - alpha) * 0.5 * q.p(x, y);
    }
    return JointTable({2, 2, 2, 2}, std::move(p));
  };
  const JointTable base1 = base_for(r.rho_in), base0 = base_for(0.0);
  const JointTable j1 = build_joint_over(spec, base1, xs, ys);
  const JointTable j0 = build_joint_over(spec, base0, xs, ys);

  // Law of (X', Y') and of (X' or Y', Pi) via the input maps.
  auto mapped = [&](const JointTable& j, const std::vector<std::size_t>& map, std::size_t alphabet,
                    bool keep_msgs) {
    const std::size_t msgs = j.size() / 16;
    std::vector<double> out(alphabet * (keep_msgs ? msgs : 1), 0.0);
    for (std::size_t c = 0; c < 16; ++c)
      for (std::size_t m = 0; m < msgs; ++m) out[map[c] * (keep_msgs ? msgs : 1) + (keep_msgs ? m : 0)] += j[c * msgs + m];
    return out;
  };
  std::vector<std::size_t> xy(16);
  for (std::size_t c = 0; c < 16; ++c) xy[c] = xs[c] * 2 + ys[c];
  auto corr_of = [&](const JointTable& j) {
    const auto p = mapped(j, xy, 4, false);
    return p[0] + p[3] - p[1] - p[2];
  };
  r.output_rho1 = corr_of(j1);
  r.output_rho0 = corr_of(j0);

  const auto msgs = axis_range(4, spec.rounds());
  r.d_x = kl(mapped(j1, xs, 2, true), mapped(j0, xs, 2, true));
  r.d_y = kl(mapped(j1, ys, 2, true), mapped(j0, ys, 2, true));
  r.d_x_aug = marginal_kl(j1, j0, concat({0, 1, 2}, msgs));
  r.d_y_aug = marginal_kl(j1, j0, concat({0, 1, 3}, msgs));
  const double r2 = r.rho_in * r.rho_in;
  r.info_bound = r2 * mutual_info(j1, concat({0, 1}, msgs), {2, 3});
  r.bits_bound = r2 * static_cast<double>(spec.message_bits());

  r.pass = std::abs(r.output_rho1 - rho1) <= 1e-12 && std::abs(r.output_rho0 - rho0) <= 1e-12 &&
           r.d_x <= r.d_x_aug + tol && r.d_y <= r.d_y_aug + tol &&
           std::max(r.d_x_aug, r.d_y_aug) <= r.info_bound + tol && r.info_bound <= r.bits_bound + tol;
  return r;
}

// ---------------------------------------------------------------- Gap-Hamming

struct GapHammingReport {
  double rho0 = 0;
  double i_u_pi = 0;            // I(U; Pi) under the +/- rho0 mixture
  double mixture_kl_bound = 0;  // (D(P+_{X Pi} || P0) + D(P-_{X Pi} || P0)) / 2
  double info_bound = 0;        // rho0^2 (I+(Pi;XY) + I-(Pi;XY)) / 2
  double implied_k_lower = 0;   // i_u_pi / rho0^2
  bool pass = true;
};

inline GapHammingReport gap_hamming_demo(unsigned n, const InteractiveSpec& spec, double c,
                                         double tol = kIdentityTol) {
  require(n >= 1 && n <= 20, "gap_hamming_demo needs 1 <= n <= 20");
  GapHammingReport r;
  r.rho0 = c / std::sqrt(static_cast<double>(n));
  require(r.rho0 >= 0.0 && r.rho0 <= 1.0, "gap_hamming_demo needs 0 <= c / sqrt(n) <= 1");
  if (std::size_t{1} << (2 * n) > kJointGuard) throw GuardError("gap_hamming_demo: 4^n source exceeds the guard");
  const JointTable jp = build_joint(spec, binary_product_source(r.rho0, n));
  const JointTable jm = build_joint(spec, binary_product_source(-r.rho0, n));
  const JointTable j0 = build_joint(spec, binary_product_source(0.0, n));
  if (spec.rounds() == 0) return r;
  const auto msgs = axis_range(2, spec.rounds());

  const Pmf pp = jp.marginal(msgs).probs(), pm = jm.marginal(msgs).probs();
  Pmf mix(pp.size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 0.5 * (pp[i] + pm[i]);
  r.i_u_pi = 0.5 * kl(pp, mix) + 0.5 * kl(pm, mix);
  const auto xpi = concat({0}, msgs);
  r.mixture_kl_bound = 0.5 * marginal_kl(jp, j0, xpi) + 0.5 * marginal_kl(jm, j0, xpi);
  const double r2 = r.rho0 * r.rho0;
  r.info_bound = r2 * 0.5 * (mutual_info(jp, msgs, {0, 1}) + mutual_info(jm, msgs, {0, 1}));
  r.implied_k_lower = r2 > 0.0 ? r.i_u_pi / r2 : 0.0;
  r.pass = r.i_u_pi <= r.mixture_kl_bound + tol && r.mixture_kl_bound <= r.info_bound + tol;
  return r;
}

}  // namespace dce
