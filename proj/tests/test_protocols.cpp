#include "dce/protocols.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

using namespace dce;

namespace {

PairBatch gaussian_batch(std::vector<double> x, std::vector<double> y) {
  return PairBatch(Family::gaussian, std::move(x), std::move(y));
}

// 16 Gaussian pairs with Alice's maximum at index 5 and flat y elsewhere.
PairBatch bucket_batch(std::vector<std::pair<std::size_t, double>> y_overrides) {
  std::vector<double> x(16, 0.0), y(16, 0.0);
  for (std::size_t i = 0; i < 16; ++i) x[i] = 0.1 * static_cast<double>(i % 7);
  x[5] = 10.0;
  for (auto [i, v] : y_overrides) y[i] = v;
  return gaussian_batch(std::move(x), std::move(y));
}

}  // namespace

TEST(Message, BitsRoundTripMsbFirst) {
  Message m{Speaker::alice, 0, {}};
  m.push_value(0b1011, 4);
  m.push_value(0xDEADBEEFCAFEULL, 61);
  EXPECT_EQ(m.bit_count, 65u);
  EXPECT_EQ(m.words.size(), 2u);
  EXPECT_TRUE(m.bit(0));
  EXPECT_FALSE(m.bit(1));
  EXPECT_EQ(m.read(0, 4), 0b1011u);
  EXPECT_EQ(m.read(4, 61), 0xDEADBEEFCAFEULL);
}

TEST(Transcript, EnforcesBudget) {
  Transcript t(5);
  t.send_value(Speaker::alice, 3, 3);
  EXPECT_EQ(t.total_bits(), 3u);
  EXPECT_THROW(t.send_value(Speaker::bob, 1, 3), std::logic_error);
  t.send_value(Speaker::bob, 1, 2);
  EXPECT_EQ(t.total_bits(), 5u);
  EXPECT_EQ(t.messages().size(), 2u);
}

TEST(Naive, PerfectCorrelationIsRecoveredExactly) {
  for (double rho : {1.0, -1.0}) {
    const EstimateResult r = run_naive(64, BinarySource(rho, 64, 3));
    EXPECT_EQ(r.rho_hat, rho);
    EXPECT_EQ(r.bits_used, 64u);
    ASSERT_EQ(r.transcript.messages().size(), 1u);
    EXPECT_EQ(r.transcript.messages()[0].speaker, Speaker::alice);
  }
}

TEST(Naive, AveragesProducts) {
  const PairBatch b(Family::binary, {1, -1, 1, 1}, {1, 1, -1, 1});
  EXPECT_DOUBLE_EQ(run_naive(4, b).rho_hat, 0.0);
  EXPECT_DOUBLE_EQ(run_naive(2, b).rho_hat, 0.0);
  EXPECT_DOUBLE_EQ(run_naive(1, b).rho_hat, 1.0);
}

TEST(Naive, Errors) {
  EXPECT_THROW(run_naive(0, BinarySource(0.5, 8, 1)), ParameterError);
  EXPECT_THROW(run_naive(9, BinarySource(0.5, 8, 1)), ParameterError);
  EXPECT_THROW(run_naive(4, GaussianSource(0.5, 8, 1)), ParameterError);
}

TEST(MaxScheme, UsesAlicesArgmaxAndExactScale) {
  for (std::uint64_t key = 1; key <= 20; ++key) {
    const GaussianSource src(0.4, 1024, key);
    const EstimateResult r = run_max_scheme(10, src);
    EXPECT_EQ(r.bits_used, 10u);
    const std::size_t w = r.transcript.messages()[0].read(0, 10);
    std::size_t best = 0;
    for (std::size_t i = 1; i < 1024; ++i)
      if (src.x(i) > src.x(best)) best = i;
    EXPECT_EQ(w, best);
    EXPECT_DOUBLE_EQ(r.rho_hat, clamp_unit(src.y(w) / expected_max_normal(1024)));
  }
}

TEST(MaxScheme, TieGoesToSmallestIndex) {
  const PairBatch b = gaussian_batch({1.0, 3.0, 3.0, 0.0}, {0.0, 0.5, -0.5, 0.0});
  const EstimateResult r = run_max_scheme(2, b);
  EXPECT_EQ(r.transcript.messages()[0].read(0, 2), 1u);
  EXPECT_DOUBLE_EQ(r.rho_hat, 0.5 / expected_max_normal(4));
}

TEST(MaxScheme, Guards) {
  EXPECT_THROW(run_max_scheme(27, GaussianSource(0.5, 1, 1)), GuardError);
  EXPECT_THROW(run_max_scheme(0, GaussianSource(0.5, 1, 1)), ParameterError);
  EXPECT_THROW(run_max_scheme(4, GaussianSource(0.5, 15, 1)), ParameterError);
  EXPECT_THROW(run_max_scheme(2, BinarySource(0.5, 4, 1)), ParameterError);
}

TEST(LocalScheme, PrefixLengthAndThreshold) {
  const LocalParams p{};
  EXPECT_EQ(local_prefix_bits(18, 0.6, p), 14u);  // ceil(18 * 0.64 * 1.15) = ceil(13.248)
  EXPECT_EQ(local_prefix_bits(18, -0.6, p), 14u);
  EXPECT_EQ(local_prefix_bits(18, 0.0, p), 18u);   // capped at k
  EXPECT_EQ(local_prefix_bits(4, 0.999, p), 1u);   // at least one bit
  EXPECT_NEAR(local_threshold(18, 0.6, p), 0.6 * std::sqrt(36 * std::log(2.0)) * 0.9, 1e-12);
  EXPECT_THROW(local_prefix_bits(18, 1.0, p), ParameterError);
  EXPECT_THROW(local_prefix_bits(18, 0.5, LocalParams{1.0, 0.1}), ParameterError);
  EXPECT_THROW(local_prefix_bits(18, 0.5, LocalParams{0.1, -0.1}), ParameterError);
}

TEST(LocalScheme, FullPrefixReducesToMaxScheme) {
  for (std::uint64_t key = 1; key <= 10; ++key) {
    const GaussianSource src(0.3, 4096, key);
    const EstimateResult local = run_local_scheme(12, 0.0, src);
    const EstimateResult max = run_max_scheme(12, src);
    EXPECT_EQ(local.rho_hat, max.rho_hat);
    EXPECT_EQ(local.bits_used, 12u);
    EXPECT_FALSE(local.decode_failed);
  }
}

// k = 4, rho_nominal = 0.9: one prefix bit, so Bob searches the 8-index bucket
// holding Alice's index 5 with threshold 0.81 sqrt(8 ln 2) ~ 1.907.
TEST(LocalScheme, UniqueMarkedIndexDecodes) {
  const EstimateResult r = run_local_scheme(4, 0.9, bucket_batch({{5, 1.95}}));
  EXPECT_EQ(r.bits_used, 1u);
  EXPECT_FALSE(r.decode_failed);
  EXPECT_FALSE(r.decoded_wrong);
  EXPECT_DOUBLE_EQ(r.rho_hat, clamp_unit(1.95 / expected_max_normal(16)));
}

TEST(LocalScheme, WrongMarkedIndexIsFlagged) {
  const EstimateResult r = run_local_scheme(4, 0.9, bucket_batch({{2, 2.5}}));
  EXPECT_FALSE(r.decode_failed);
  EXPECT_TRUE(r.decoded_wrong);
}

TEST(LocalScheme, MarksOutsideTheBucketAreIgnored) {
  const EstimateResult r = run_local_scheme(4, 0.9, bucket_batch({{5, 2.5}, {12, 3.0}}));
  EXPECT_FALSE(r.decode_failed);
  EXPECT_FALSE(r.decoded_wrong);
}

TEST(LocalScheme, AmbiguityAndEmptinessFallBackToNominal) {
  const EstimateResult two = run_local_scheme(4, 0.9, bucket_batch({{2, 2.5}, {5, 2.5}}));
  EXPECT_TRUE(two.decode_failed);
  EXPECT_EQ(two.rho_hat, 0.9);
  const EstimateResult none = run_local_scheme(4, 0.9, bucket_batch({}));
  EXPECT_TRUE(none.decode_failed);
  EXPECT_EQ(none.rho_hat, 0.9);
}

TEST(LocalScheme, NegativeNominalMarksTheLowerTail) {
  const EstimateResult r = run_local_scheme(4, -0.9, bucket_batch({{5, -2.5}}));
  EXPECT_FALSE(r.decode_failed);
  EXPECT_EQ(r.rho_hat, -1.0);
  EXPECT_TRUE(run_local_scheme(4, -0.9, bucket_batch({{5, 2.5}})).decode_failed);
}

TEST(BinaryBlock, PlanArithmetic) {
  const BlockPlan plan = plan_binary_block(8, {0.5, 16, 0.0, 0.0, 4.0});
  EXPECT_EQ(plan.target_sum, 8);
  EXPECT_NEAR(plan.p_hit, 1820.0 / 65536.0, 1e-15);
  EXPECT_EQ(plan.index_bits, 8u);  // ceil(log2(4 / p_hit)) = ceil(7.17)
  EXPECT_EQ(plan.sent_bits, 8u);   // nothing resolvable at nominal 0
  EXPECT_EQ(plan.window, 4.0);
  EXPECT_EQ(plan.samples, 16u * 256u);
  EXPECT_NEAR(std::exp(log_prob_block_sum(4, 0)), 6.0 / 16.0, 1e-15);
}

TEST(BinaryBlock, NominalCorrelationBuysBits) {
  const BlockPlan zero = detail::plan_block_unbudgeted({0.5, 32, 0.0, 0.0, 4.0});
  const BlockPlan half = detail::plan_block_unbudgeted({0.5, 32, 0.5, 0.0, 4.0});
  EXPECT_EQ(zero.index_bits, half.index_bits);
  EXPECT_LT(half.sent_bits, zero.sent_bits);
}

TEST(BinaryBlock, PlanErrors) {
  EXPECT_THROW(plan_binary_block(20, {0.25, 10, 0.0, 0.0, 4.0}), ParameterError);  // 2.5 not an integer
  EXPECT_THROW(plan_binary_block(20, {0.1, 10, 0.0, 0.0, 4.0}), ParameterError);   // parity
  EXPECT_THROW(plan_binary_block(20, {0.0, 10, 0.0, 0.0, 4.0}), ParameterError);
  EXPECT_THROW(plan_binary_block(20, {0.5, 10, 1.0, 0.0, 4.0}), ParameterError);
  EXPECT_THROW(plan_binary_block(7, {0.5, 16, 0.0, 0.0, 4.0}), ParameterError);    // needs 8 bits
  EXPECT_THROW(run_binary_block(8, {0.5, 16, 0.0, 0.0, 4.0}, GaussianSource(0.5, 4096, 1)), ParameterError);
  EXPECT_THROW(run_binary_block(8, {0.5, 16, 0.0, 0.0, 4.0}, BinarySource(0.5, 4095, 1)), ParameterError);
}

TEST(BinaryBlock, PerfectCorrelationIsExactWhenAliceFinds) {
  const BlockParams p{0.5, 16, 0.0, 0.0, 4.0};
  int fallbacks = 0;
  for (std::uint64_t key = 1; key <= 40; ++key) {
    const EstimateResult r = run_binary_block(8, p, BinarySource(1.0, 4096, key));
    EXPECT_EQ(r.bits_used, 8u);
    if (r.alice_fallback) ++fallbacks;
    else EXPECT_EQ(r.rho_hat, 1.0);
  }
  EXPECT_LE(fallbacks, 2);
}

TEST(BinaryBlock, AliceFallbackUsesFirstBlock) {
  std::vector<double> x(4096, 1.0), y(4096, 1.0);
  for (std::size_t i = 0; i < 16; i += 2) y[i] = -1.0;
  const EstimateResult r = run_binary_block(8, {0.5, 16, 0.0, 0.0, 4.0}, PairBatch(Family::binary, x, y));
  EXPECT_TRUE(r.alice_fallback);
  EXPECT_EQ(r.rho_hat, 0.0);
}

TEST(BinaryBlock, DecodeFailuresReportNominal) {
  const BlockParams p{0.5, 32, 0.5, 0.0, 4.0};
  const BlockPlan plan = plan_binary_block(10, p);
  ASSERT_LT(plan.sent_bits, plan.index_bits);
  int failures = 0;
  for (std::uint64_t key = 1; key <= 60; ++key) {
    const EstimateResult r = run_binary_block(10, p, BinarySource(0.5, plan.samples, key));
    EXPECT_LE(r.bits_used, 10u);
    if (r.decode_failed) {
      ++failures;
      EXPECT_EQ(r.rho_hat, 0.5);
    }
  }
  EXPECT_GT(failures, 0);
  EXPECT_LT(failures, 60);
}

TEST(BinaryBlock, BudgetSearchReturnsAFittingLength) {
  const std::size_t n = largest_block_for_budget(10, 0.25, 0.5);
  EXPECT_LE(plan_binary_block(10, {0.25, n, 0.5, 0.0, 4.0}).sent_bits, 10u);
  EXPECT_EQ(n % 4, 0u);
  EXPECT_THROW(largest_block_for_budget(0, 0.5, 0.0, 8), ParameterError);
}

TEST(TwoWay, PlanAccounting) {
  const TwoWayPlan plan = plan_two_way(24, 5);
  EXPECT_EQ(plan.count_bits, 5u);  // values 0..19
  EXPECT_EQ(plan.k2, 14u);
  EXPECT_EQ(two_way_samples(plan), (1u << 14) + 5u);
  EXPECT_EQ(default_first_round_bits(24), 5u);
  EXPECT_EQ(bits_for(0), 1u);
  EXPECT_EQ(bits_for(1), 1u);
  EXPECT_EQ(bits_for(2), 2u);
}

TEST(TwoWay, PlanErrors) {
  EXPECT_THROW(plan_two_way(24, 0), ParameterError);
  EXPECT_THROW(plan_two_way(24, 24), ParameterError);
  EXPECT_THROW(plan_two_way(3, 1), ParameterError);
  EXPECT_THROW(plan_two_way(40, 6), GuardError);
  EXPECT_THROW(run_two_way(24, BinarySource(0.5, 1 << 15, 1), 5), ParameterError);
}

TEST(TwoWay, ThreeRoundsWithinBudget) {
  for (std::uint64_t key = 1; key <= 10; ++key) {
    const TwoWayPlan plan = plan_two_way(20, 4);
    const EstimateResult r = run_two_way(20, GaussianSource(0.6, two_way_samples(plan), key), 4);
    const auto& msgs = r.transcript.messages();
    ASSERT_EQ(msgs.size(), 3u);
    EXPECT_EQ(msgs[0].speaker, Speaker::alice);
    EXPECT_EQ(msgs[1].speaker, Speaker::bob);
    EXPECT_EQ(msgs[2].speaker, Speaker::alice);
    EXPECT_EQ(msgs[0].bit_count, 4u);
    EXPECT_EQ(msgs[1].bit_count, plan.count_bits);
    EXPECT_EQ(msgs[2].bit_count, msgs[1].read(0, plan.count_bits));
    EXPECT_LE(r.bits_used, 20u);
    EXPECT_LE(std::abs(r.rho_hat), 1.0);
  }
}
