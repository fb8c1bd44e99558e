#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "cvqkd/protocol_sim.hpp"

namespace {

using namespace cvqkd;
using namespace cvqkd::sim;
using attacks::AttackModel;

constexpr std::uint64_t kMillion = 1000000;

keyrate::ProtocolConfig coherent(double base_ber, double loss = 0.0) {
  keyrate::ProtocolConfig c;
  c.snr_in = keyrate::calibrated_snr(base_ber);
  c.loss = loss;
  return c;
}

keyrate::ProtocolConfig squeezed(double vn, double base_ber) {
  auto c = coherent(base_ber);
  c.scheme = keyrate::Scheme::squeezed(vn);
  return c;
}

// Strings of `n` random bits, and copies with independent flips at the
// given rates.
struct Triple {
  BitString alice, bob, eve;
};

Triple noisy_copies(std::size_t n, double bob_rate, double eve_rate,
                    std::uint64_t seed) {
  SplitMix64 rng(seed);
  Triple t;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = random_bit(rng);
    t.alice.push_back(a);
    t.bob.push_back(a ^ (uniform01(rng) < bob_rate));
    t.eve.push_back(a ^ (uniform01(rng) < eve_rate));
  }
  return t;
}

void expect_within_3se(const Estimate& e, double expected,
                       const char* what) {
  EXPECT_LE(std::fabs(e.value - expected), 3.0 * e.se)
      << what << ": " << e.value << " vs " << expected << " (se " << e.se
      << ")";
}

TEST(Rng, SubstreamsArePureFunctions) {
  auto a = substream(7, kSlotStream, 12);
  auto b = substream(7, kSlotStream, 12);
  auto c = substream(7, kSlotStream, 13);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
}

TEST(Rng, UniformIndexInRange) {
  SplitMix64 rng(1);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) ++counts[uniform_index(rng, 5)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Estimate, BinomialStandardError) {
  const auto e = Estimate::of(25, 100);
  EXPECT_DOUBLE_EQ(e.value, 0.25);
  EXPECT_DOUBLE_EQ(e.se, std::sqrt(0.25 * 0.75 / 100));
  EXPECT_EQ(Estimate::of(0, 0).trials, 0u);
}

TEST(BitString, MismatchCounting) {
  const BitString a{1, 0, 1, 1};
  const BitString b{1, 1, 1, 0};
  EXPECT_EQ(count_mismatches(a, b), 2u);
  EXPECT_DOUBLE_EQ(error_rate(a, b), 0.5);
  EXPECT_THROW(count_mismatches(a, BitString{1}), DomainError);
}

TEST(RunProtocol, NoAttackMatchesAnalyticBer) {
  const auto r = run_protocol(coherent(0.01), std::nullopt, kMillion, 1,
                              {.threads = 0});
  expect_within_3se(r.stats.empirical_ber_bob, 0.01, "bob");
  EXPECT_NEAR(r.stats.predicted_ber_bob, 0.01, 1e-12);
  EXPECT_LT(r.stats.empirical_ber_bob.se, 2e-4);
  expect_within_3se(r.stats.empirical_ber_eve, 0.5, "eve coin flips");
}

TEST(RunProtocol, HalfSplitGivesBobAndEveTheSameRate) {
  const auto r = run_protocol(coherent(0.01),
                              AttackModel::optimal_symmetric(0.5), kMillion,
                              2, {.threads = 0});
  const auto& b = r.stats.empirical_ber_bob;
  const auto& e = r.stats.empirical_ber_eve;
  EXPECT_LE(std::fabs(b.value - e.value),
            3.0 * std::sqrt(b.se * b.se + e.se * e.se));
}

struct AttackCase {
  const char* name;
  std::optional<AttackModel> attack;
};

TEST(RunProtocol, EveryAttackMatchesAnalyticOverSnrGrid) {
  const std::vector<AttackCase> cases{
      {"none", std::nullopt},
      {"guess", AttackModel::guess()},
      {"mid", AttackModel::mid_quadrature()},
      {"beamsplit", AttackModel::beamsplit(0.16)},
      {"optimal", AttackModel::optimal_symmetric(0.08)},
      {"optimal_half", AttackModel::optimal_symmetric(0.5)},
      {"teleport", AttackModel::teleport(2.0, attacks::lambda_opt(2.0))},
  };
  std::uint64_t seed = 100;
  for (double base : {0.01, 0.05, 0.15}) {
    for (const auto& c : cases) {
      const auto r =
          run_protocol(coherent(base), c.attack, kMillion, ++seed,
                       {.threads = 0});
      SCOPED_TRACE(std::string(c.name) + " base=" + std::to_string(base));
      expect_within_3se(r.stats.empirical_ber_bob, r.stats.predicted_ber_bob,
                        "bob");
      expect_within_3se(r.stats.empirical_ber_eve, r.stats.predicted_ber_eve,
                        "eve");
    }
  }
}

TEST(RunProtocol, AnalyticPredictionsMatchAttackModule) {
  const double snr = keyrate::calibrated_snr(0.01);
  for (const auto& m :
       {AttackModel::guess(), AttackModel::mid_quadrature(),
        AttackModel::beamsplit(0.3), AttackModel::optimal_symmetric(0.2)}) {
    const auto o = attacks::coherent_attack(m, snr);
    const auto r = run_protocol(coherent(0.01), m, 1, 1);
    EXPECT_NEAR(r.stats.predicted_ber_bob, o.ber_bob().value(), 1e-15)
        << m.name();
    EXPECT_NEAR(r.stats.predicted_ber_eve, o.ber_eve().value(), 1e-15);
  }
}

TEST(RunProtocol, LossyLineMatchesAnalytic) {
  const auto c = coherent(0.05, 0.25);
  const auto r = run_protocol(c, std::nullopt, kMillion, 9, {.threads = 0});
  EXPECT_NEAR(r.stats.predicted_ber_bob, 0.0771531, 1e-7);
  expect_within_3se(r.stats.empirical_ber_bob, r.stats.predicted_ber_bob,
                    "bob with loss");
}

TEST(RunProtocol, SqueezedSchemeSiftsHalf) {
  const auto r = run_protocol(squeezed(0.1, 0.01),
                              AttackModel::optimal_symmetric(0.1), kMillion,
                              4, {.threads = 0});
  expect_within_3se(r.stats.sifted_fraction, 0.5, "sifted fraction");
  expect_within_3se(r.stats.empirical_ber_bob, r.stats.predicted_ber_bob,
                    "bob");
  expect_within_3se(r.stats.empirical_ber_eve, r.stats.predicted_ber_eve,
                    "eve");
}

TEST(RunProtocol, CoherentSchemeKeepsEverySlotOnOneQuadrature) {
  const auto r = run_protocol(coherent(0.01), std::nullopt, 100000, 5,
                              {.keep_records = true});
  EXPECT_EQ(r.stats.sifted, 100000u);
  EXPECT_EQ(r.stats.amplitude_slots + r.stats.phase_slots, r.stats.sifted);
  EXPECT_NEAR(static_cast<double>(r.stats.amplitude_slots), 50000.0,
              3.0 * std::sqrt(25000.0));
}

TEST(RunProtocol, RecordsThresholdAtZero) {
  const auto r = run_protocol(coherent(0.05), AttackModel::beamsplit(0.3),
                              20000, 6, {.keep_records = true});
  ASSERT_EQ(r.records.size(), 20000u);
  std::uint64_t disclosed = 0;
  for (const auto& s : r.records) {
    EXPECT_EQ(s.bob_bit, s.bob_soft > 0.0 ? 1 : 0);
    EXPECT_EQ(s.eve_bits[0], s.eve_soft[0] > 0.0 ? 1 : 0);
    disclosed += s.disclosed;
  }
  EXPECT_EQ(disclosed, r.stats.disclosed);
  EXPECT_EQ(r.stats.disclosed, 10000u);
  EXPECT_EQ(r.stats.key_length, 10000u);
}

TEST(RunProtocol, DeterministicAcrossRunsAndThreads) {
  const RunOptions one{.threads = 1, .recon_rounds = 10, .pa_block_n = 8};
  RunOptions many = one;
  many.threads = 7;
  const auto m = AttackModel::optimal_symmetric(0.08);
  const auto a = run_protocol(coherent(0.01), m, 200000, 42, one);
  const auto b = run_protocol(coherent(0.01), m, 200000, 42, one);
  const auto c = run_protocol(coherent(0.01), m, 200000, 42, many);
  for (const auto* r : {&b, &c}) {
    EXPECT_EQ(a.key.alice, r->key.alice);
    EXPECT_EQ(a.key.bob, r->key.bob);
    EXPECT_EQ(a.key.eve, r->key.eve);
    EXPECT_EQ(a.stats.empirical_ber_bob.value,
              r->stats.empirical_ber_bob.value);
    EXPECT_EQ(a.stats.post_recon_lengths, r->stats.post_recon_lengths);
    EXPECT_EQ(a.stats.post_pa_ber_eve.value, r->stats.post_pa_ber_eve.value);
  }
  const auto d = run_protocol(coherent(0.01), m, 200000, 43, one);
  EXPECT_NE(a.key.bob, d.key.bob);
}

TEST(RunProtocol, TeleportPenaltyProduct) {
  for (double g : {1.5, 2.0, 10.0}) {
    const auto r = run_protocol(
        coherent(0.01), AttackModel::teleport(g, attacks::lambda_opt(g)), 10,
        1);
    ASSERT_TRUE(r.stats.penalty_product.has_value());
    EXPECT_NEAR(*r.stats.penalty_product, 1.0, 1e-9);
  }
  const auto sq = run_protocol(
      squeezed(0.1, 0.01), AttackModel::teleport(2.0, attacks::lambda_opt(2.0)),
      10, 1);
  EXPECT_NEAR(*sq.stats.penalty_product, 1.0, 1e-9);
}

TEST(RunProtocol, Errors) {
  EXPECT_THROW(run_protocol(coherent(0.01), std::nullopt, 0, 1), DomainError);
  EXPECT_THROW(run_protocol(squeezed(0.1, 0.01), AttackModel::beamsplit(0.2),
                            10, 1),
               DomainError);
  EXPECT_THROW(run_protocol(squeezed(0.1, 0.01),
                            AttackModel::optimal_symmetric(0.4), 10, 1),
               DomainError);
  EXPECT_THROW(run_protocol(squeezed(0.1, 0.01), AttackModel::mid_quadrature(),
                            10, 1),
               DomainError);
}

TEST(RunProtocol, FullPipelineLeavesBobClean) {
  const auto r = run_protocol(coherent(0.05), AttackModel::beamsplit(0.2),
                              kMillion, 8,
                              {.threads = 0, .recon_rounds = 64,
                               .pa_block_n = 14});
  EXPECT_TRUE(r.stats.recon_audit_clean);
  EXPECT_LT(r.stats.post_recon_ber_bob.value, 1e-3);
  EXPECT_EQ(r.stats.post_pa_length, r.stats.post_recon_length / 14);
  EXPECT_LE(std::fabs(r.stats.eve_pa_independence_z), 4.0);
}

TEST(Reconcile, ErrorFreeStringsAreUntouched) {
  const auto t = noisy_copies(5000, 0.0, 0.2, 1);
  const auto r = reconcile(t.alice, t.bob, t.eve, 10, 3);
  EXPECT_EQ(r.alice, t.alice);
  EXPECT_EQ(r.eve, t.eve);
  EXPECT_EQ(r.stats.rounds_used, 1u);
  EXPECT_TRUE(r.stats.audit_clean);
}

TEST(Reconcile, LengthMismatch) {
  EXPECT_THROW(reconcile(BitString{1, 0}, BitString{1}, BitString{1, 0}, 1, 1),
               DomainError);
}

TEST(Reconcile, OneRoundKeptFractionAndResidual) {
  const double b = 0.077;
  const std::size_t n = kMillion;
  const auto t = noisy_copies(n, b, 0.2, 2);
  const auto r = reconcile(t.alice, t.bob, t.eve, 1, 4);
  const double keep = (1 - b) * (1 - b) + b * b;
  const double pairs = n / 2.0;
  const double kept = static_cast<double>(r.alice.size()) / n;
  EXPECT_NEAR(keep, 0.858, 1e-3);
  EXPECT_LE(std::fabs(kept - keep),
            3.0 * std::sqrt(keep * (1 - keep) / pairs));
  // Surviving errors come in pairs where both bits were wrong.
  const double residual = b * b / keep;
  EXPECT_NEAR(residual, 0.0069, 1e-4);
  const double kept_pairs = r.alice.size() / 2.0;
  EXPECT_LE(std::fabs(r.stats.bob_error_after - residual),
            3.0 * std::sqrt(residual * (1 - residual) / kept_pairs));
}

TEST(Reconcile, NeverIncreasesBobError) {
  for (double b : {0.01, 0.05, 0.1, 0.2}) {
    const auto t = noisy_copies(100000, b, 0.3, 11);
    const auto r = reconcile(t.alice, t.bob, t.eve, 30, 12);
    EXPECT_LE(r.stats.bob_error_after, r.stats.bob_error_before);
    std::size_t prev = r.stats.rounds.front().length_before;
    for (const auto& round : r.stats.rounds) {
      EXPECT_LE(round.length_after, prev);
      EXPECT_EQ(round.length_after % 2, round.length_before % 2);
      prev = round.length_after;
    }
  }
}

TEST(Reconcile, EveKeepsAtLeastTheWorstCaseResidual) {
  const auto t = noisy_copies(kMillion, 0.093, 0.163, 21);
  const auto r = reconcile(t.alice, t.bob, t.eve, 64, 22);
  EXPECT_TRUE(r.stats.audit_clean);
  EXPECT_GE(r.stats.eve_error_after, 0.163 - 0.093);
  EXPECT_GE(r.stats.eve_error_after, 0.07);
}

TEST(Reconcile, PairingRefersToSurvivors) {
  const auto t = noisy_copies(20000, 0.05, 0.2, 31);
  const auto r = reconcile(t.alice, t.bob, t.eve, 20, 32);
  ASSERT_FALSE(r.pairing.pairs.empty());
  for (const auto& [i, j] : r.pairing.pairs) {
    EXPECT_LT(i, r.alice.size());
    EXPECT_LT(j, r.alice.size());
    EXPECT_NE(i, j);
    // An announced pair that survives had matching parities.
    EXPECT_EQ(r.alice[i] ^ r.alice[j], r.bob[i] ^ r.bob[j]);
  }
}

TEST(PrivacyAmplify, BlockLengthOneIsIdentity) {
  const auto t = noisy_copies(1001, 0.1, 0.1, 41);
  EXPECT_EQ(privacy_amplify(t.alice, 1, 5, {}), t.alice);
}

TEST(PrivacyAmplify, ErrorFreeKeyStaysErrorFree) {
  const auto t = noisy_copies(10000, 0.0, 0.0, 42);
  for (std::size_t n : {2u, 7u, 46u}) {
    EXPECT_EQ(privacy_amplify(t.alice, n, 9, {}),
              privacy_amplify(t.bob, n, 9, {}));
  }
}

TEST(PrivacyAmplify, OutputLengthAndDisjointBlocks) {
  const auto t = noisy_copies(1003, 0.1, 0.1, 43);
  const auto plan = plan_pa_blocks(t.alice.size(), 10, 3, {});
  EXPECT_EQ(plan.blocks.size(), 100u);
  std::set<std::uint32_t> used;
  for (const auto& b : plan.blocks) {
    EXPECT_EQ(b.size(), 10u);
    for (auto i : b) EXPECT_TRUE(used.insert(i).second);
  }
  EXPECT_EQ(privacy_amplify(t.alice, 10, 3, {}).size(), 100u);
}

TEST(PrivacyAmplify, KeyShorterThanBlock) {
  EXPECT_THROW(privacy_amplify(BitString{1, 0, 1}, 4, 1, {}), DomainError);
}

TEST(PrivacyAmplify, BlocksAvoidReconciliationPairs) {
  const auto t = noisy_copies(200000, 0.05, 0.2, 44);
  const auto r = reconcile(t.alice, t.bob, t.eve, 20, 45);
  const auto plan = plan_pa_blocks(r.alice.size(), 46, 46, r.pairing);
  std::vector<std::int64_t> block_of(r.alice.size(), -1);
  for (std::size_t k = 0; k < plan.blocks.size(); ++k) {
    for (auto i : plan.blocks[k]) block_of[i] = static_cast<std::int64_t>(k);
  }
  for (const auto& [i, j] : r.pairing.pairs) {
    if (block_of[i] >= 0) {
      EXPECT_NE(block_of[i], block_of[j]);
    }
  }
}

TEST(PrivacyAmplify, ImpossibleAssignmentFails) {
  // Every pair among four bits is excluded, so no block of two exists.
  PairingRecord all;
  for (std::uint32_t i = 0; i < 4; ++i) {
    for (std::uint32_t j = i + 1; j < 4; ++j) all.pairs.emplace_back(i, j);
  }
  EXPECT_THROW(plan_pa_blocks(4, 2, 1, all), DomainError);
}

TEST(PrivacyAmplify, EveBlockErrorMatchesClosedForm) {
  const auto t = noisy_copies(kMillion, 0.0, 0.07, 51);
  for (std::size_t n : {2u, 4u, 8u, 14u, 46u}) {
    const auto a = privacy_amplify(t.alice, n, 52, {});
    const auto e = privacy_amplify(t.eve, n, 52, {});
    const auto est = Estimate::of(count_mismatches(a, e), a.size());
    const double expected =
        info::pa_error(info::ErrorProbability(0.07), n).value();
    expect_within_3se(est, expected, "pa error");
  }
}

TEST(PrivacyAmplify, EveInformationAtBlock46) {
  const auto t = noisy_copies(kMillion, 0.0, 0.07, 61);
  const auto a = privacy_amplify(t.alice, 46, 62, {});
  const auto e = privacy_amplify(t.eve, 46, 62, {});
  const auto est = Estimate::of(count_mismatches(a, e), a.size());
  const double mi = 1.0 - 2.0 * est.value;
  EXPECT_LE(std::fabs(mi - 0.001), 3.0 * 2.0 * est.se);
}

}  // namespace
