#pragma once

// Bit-level Monte-Carlo run of the protocol.
//
// Soft values are in QNL units. Alice maps bit b to a quadrature mean of
// (2b - 1) sqrt(V_s) / 2 with V_s = snr_in * vn, and a receiver with transfer
// T sees additive Gaussian noise of variance vn / T. A threshold at zero then
// errs with probability 1/2 erfc(1/2 sqrt(T snr_in / 2)), the analytic BER.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "cvqkd/attacks.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/gaussian_optics.hpp"
#include "cvqkd/infotheory.hpp"
#include "cvqkd/keyrate.hpp"
#include "cvqkd/sim/bitstring.hpp"
#include "cvqkd/sim/privacy_amplification.hpp"
#include "cvqkd/sim/reconcile.hpp"
#include "cvqkd/sim/rng.hpp"

namespace cvqkd::sim {

using optics::Quadrature;

struct SlotRecord {
  std::uint64_t slot = 0;
  std::uint8_t alice_bits[2] = {0, 0};  // amplitude, phase
  Quadrature alice_choice = Quadrature::amplitude;  // squeezed scheme only
  Quadrature bob_choice = Quadrature::amplitude;
  double bob_soft = 0.0;
  std::uint8_t bob_bit = 0;
  // NaN where Eve holds no analog value for that quadrature.
  double eve_soft[2] = {std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN()};
  std::uint8_t eve_bits[2] = {0, 0};
  bool sifted = false;
  bool disclosed = false;
};

// An empirical rate k / N with its binomial standard error.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
  std::uint64_t trials = 0;

  static Estimate of(std::uint64_t hits, std::uint64_t trials) {
    if (trials == 0) return {0.0, 0.0, 0};
    const double p = static_cast<double>(hits) / static_cast<double>(trials);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials)),
            trials};
  }
  // Distance from `expected` in standard errors (0 if the SE vanishes and
  // the values agree).
  double z(double expected) const {
    const double d = value - expected;
    if (se > 0.0) return d / se;
    return d == 0.0 ? 0.0 : std::copysign(
                                std::numeric_limits<double>::infinity(), d);
  }
};

struct RunOptions {
  unsigned threads = 1;            // 0: hardware concurrency
  std::size_t recon_rounds = 0;    // 0 skips reconciliation
  std::size_t pa_block_n = 1;      // 1 leaves the key as is
  bool keep_records = false;
};

struct RunStats {
  std::uint64_t n_slots = 0;
  std::uint64_t sifted = 0;
  Estimate sifted_fraction;
  std::uint64_t amplitude_slots = 0;  // sifted slots per Bob quadrature
  std::uint64_t phase_slots = 0;

  Estimate empirical_ber_bob;
  Estimate empirical_ber_eve;
  double predicted_ber_bob = 0.0;
  double predicted_ber_eve = 0.0;

  std::uint64_t disclosed = 0;
  Estimate disclosed_ber_bob;

  std::uint64_t key_length = 0;  // sifted minus disclosed
  std::vector<std::uint64_t> post_recon_lengths;  // one entry per round
  std::uint64_t post_recon_length = 0;
  std::size_t recon_rounds_used = 0;
  bool recon_audit_clean = false;
  Estimate post_recon_ber_bob;
  Estimate post_recon_ber_eve;

  std::size_t pa_block_n = 1;
  std::uint64_t post_pa_length = 0;
  Estimate post_pa_ber_bob;
  Estimate post_pa_ber_eve;
  double predicted_pa_ber_eve = 0.0;  // pa_error at the post-recon Eve rate
  // Eve's block errors against the independent-error prediction; large |z|
  // means her residual errors are not independent.
  double eve_pa_independence_z = 0.0;
  double empirical_eve_mi = 0.0;  // 1 - 2 * post-PA Eve error

  // V_E * V_B implied by the simulated transfers (teleport attack only).
  std::optional<double> penalty_product;
};

struct KeyMaterial {
  BitString alice;
  BitString bob;
  BitString eve;
};

struct RunResult {
  RunStats stats;
  KeyMaterial key;  // after reconciliation and amplification
  std::vector<SlotRecord> records;
};

namespace detail_sim {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline std::size_t index(Quadrature q) {
  return q == Quadrature::amplitude ? 0 : 1;
}

inline std::uint8_t threshold(double soft) { return soft > 0.0 ? 1 : 0; }

// Channel seen by a slot, resolved once per run.
struct Channel {
  bool squeezed = false;
  double vn = 1.0;
  double amplitude = 0.0;  // sqrt(V_s) / 2
  double line = 1.0;       // loss transfer between Eve and Bob
  enum class Kind { none, transfer, guess, mid } kind = Kind::none;
  attacks::TransferPair t_eve{0.0, 0.0};
  attacks::TransferPair t_bob{1.0, 1.0};
};

inline Channel resolve(const keyrate::ProtocolConfig& config,
                       const std::optional<attacks::AttackModel>& attack) {
  detail::require(config.snr_in > 0.0 && std::isfinite(config.snr_in),
                  "run_protocol: snr_in must be positive and finite");
  Channel ch;
  ch.squeezed = config.scheme.is_squeezed();
  ch.vn = config.scheme.vn;
  ch.amplitude = 0.5 * std::sqrt(config.snr_in * ch.vn);
  ch.line = keyrate::line_transfer(config.scheme, config.loss,
                                   config.squeezed_loss);
  if (!attack) return ch;

  const auto& kind = attack->kind();
  if (std::holds_alternative<attacks::Guess>(kind)) {
    ch.kind = Channel::Kind::guess;
    return ch;
  }
  if (std::holds_alternative<attacks::MidQuadrature>(kind)) {
    detail::require(!ch.squeezed,
                    "run_protocol: mid_quadrature is not modelled for the "
                    "squeezed scheme");
    ch.kind = Channel::Kind::mid;
    return ch;
  }
  const auto outcome =
      ch.squeezed ? attacks::squeezed_attack(*attack, ch.vn, config.snr_in)
                  : attacks::coherent_attack(*attack, config.snr_in);
  ch.kind = Channel::Kind::transfer;
  ch.t_eve = outcome.t_eve;
  ch.t_bob = outcome.t_bob;
  for (double t : {ch.t_eve.plus, ch.t_eve.minus, ch.t_bob.plus,
                   ch.t_bob.minus}) {
    if (!(t >= 0.0 && t <= 1.0 + optics::kPhysicalityTolerance)) {
      throw DomainError(
          "run_protocol: attack composes to an unphysical noise variance");
    }
  }
  return ch;
}

// Analytic BERs averaged over Bob's uniformly random quadrature.
inline std::pair<double, double> predict(const Channel& ch, double snr_in) {
  using info::ber_from_snr;
  const double b_line = ber_from_snr(ch.line * snr_in).value();
  switch (ch.kind) {
    case Channel::Kind::none:
      return {b_line, 0.5};
    case Channel::Kind::guess: {
      const double b0 = ber_from_snr(snr_in).value();
      return {0.5 * (attacks::compose_errors(b0, b_line) + 0.5),
              0.5 * (b0 + 0.5)};
    }
    case Channel::Kind::mid: {
      const double q = ber_from_snr(snr_in / 2.0).value();
      const double q3 = ber_from_snr(4.5 * snr_in).value();
      const double e = 0.25 + 0.25 * (q + q3);
      return {attacks::compose_errors(e, b_line), e};
    }
    case Channel::Kind::transfer:
      break;
  }
  auto mean_ber = [&](const attacks::TransferPair& t, double scale) {
    return 0.5 * (ber_from_snr(t.plus * scale * snr_in).value() +
                  ber_from_snr(t.minus * scale * snr_in).value());
  };
  return {mean_ber(ch.t_bob, ch.line), mean_ber(ch.t_eve, 1.0)};
}

// Soft value of a receiver with transfer t on a bit; t = 0 carries nothing.
template <class Normal, class Rng>
double receive(std::uint8_t bit, double amplitude, double vn, double t,
               Normal& normal, Rng& rng) {
  const double mean = bit ? amplitude : -amplitude;
  if (t <= 0.0) return kNaN;
  return mean + std::sqrt(vn / t) * normal(rng);
}

inline SlotRecord run_slot(const Channel& ch, std::uint64_t seed,
                           std::uint64_t slot) {
  auto rng = substream(seed, kSlotStream, slot);
  std::normal_distribution<double> normal(0.0, 1.0);
  SlotRecord r;
  r.slot = slot;
  r.alice_bits[0] = random_bit(rng);
  r.alice_bits[1] = random_bit(rng);
  r.alice_choice = random_bit(rng) ? Quadrature::phase : Quadrature::amplitude;
  r.bob_choice = random_bit(rng) ? Quadrature::phase : Quadrature::amplitude;
  const auto qb = index(r.bob_choice);

  // Bits on the beam that reaches Bob; an intercept-resend attack replaces
  // them with Eve's decisions.
  std::uint8_t sent[2] = {r.alice_bits[0], r.alice_bits[1]};
  double t_bob = ch.line;

  switch (ch.kind) {
    case Channel::Kind::none:
      r.eve_bits[0] = random_bit(rng);
      r.eve_bits[1] = random_bit(rng);
      break;
    case Channel::Kind::transfer:
      for (std::size_t k = 0; k < 2; ++k) {
        const double t_e = k == 0 ? ch.t_eve.plus : ch.t_eve.minus;
        r.eve_soft[k] =
            receive(r.alice_bits[k], ch.amplitude, ch.vn, t_e, normal, rng);
        r.eve_bits[k] = std::isnan(r.eve_soft[k]) ? random_bit(rng)
                                                  : threshold(r.eve_soft[k]);
      }
      t_bob *= qb == 0 ? ch.t_bob.plus : ch.t_bob.minus;
      break;
    case Channel::Kind::guess: {
      const std::size_t g = random_bit(rng);
      r.eve_soft[g] =
          receive(r.alice_bits[g], ch.amplitude, ch.vn, 1.0, normal, rng);
      r.eve_bits[g] = threshold(r.eve_soft[g]);
      r.eve_bits[1 - g] = random_bit(rng);
      sent[0] = r.eve_bits[0];
      sent[1] = r.eve_bits[1];
      break;
    }
    case Channel::Kind::mid: {
      // Homodyne at 45 degrees: levels +-sqrt(2) a and 0, unit noise.
      const double a = ch.amplitude;
      const double mean = ((r.alice_bits[0] ? a : -a) +
                           (r.alice_bits[1] ? a : -a)) / std::sqrt(2.0);
      const double x = mean + std::sqrt(ch.vn) * normal(rng);
      const double edge = a / std::sqrt(2.0);
      r.eve_soft[0] = x;
      if (x > edge) {
        r.eve_bits[0] = r.eve_bits[1] = 1;
      } else if (x < -edge) {
        r.eve_bits[0] = r.eve_bits[1] = 0;
      } else {
        r.eve_bits[0] = random_bit(rng);
        r.eve_bits[1] = 1 - r.eve_bits[0];
      }
      sent[0] = r.eve_bits[0];
      sent[1] = r.eve_bits[1];
      break;
    }
  }

  r.bob_soft = receive(sent[qb], ch.amplitude, ch.vn, t_bob, normal, rng);
  r.bob_bit = std::isnan(r.bob_soft) ? random_bit(rng) : threshold(r.bob_soft);
  r.sifted = !ch.squeezed || r.alice_choice == r.bob_choice;
  return r;
}

inline unsigned thread_count(unsigned requested, std::uint64_t n_slots) {
  unsigned n = requested == 0 ? std::thread::hardware_concurrency() : requested;
  if (n == 0) n = 1;
  const std::uint64_t max_useful = (n_slots + 4095) / 4096;
  return static_cast<unsigned>(std::max<std::uint64_t>(
      1, std::min<std::uint64_t>(n, max_useful)));
}

}  // namespace detail_sim

// `attack` empty means an undisturbed line (Eve's bits are coin flips).
inline RunResult run_protocol(const keyrate::ProtocolConfig& config,
                              const std::optional<attacks::AttackModel>& attack,
                              std::uint64_t n_slots, std::uint64_t seed,
                              const RunOptions& options = {}) {
  detail::require(n_slots >= 1, "run_protocol: n_slots must be >= 1");
  detail::require(options.pa_block_n >= 1,
                  "run_protocol: pa_block_n must be >= 1");
  const auto ch = detail_sim::resolve(config, attack);

  std::vector<SlotRecord> slots(n_slots);
  const unsigned workers = detail_sim::thread_count(options.threads, n_slots);
  if (workers == 1) {
    for (std::uint64_t i = 0; i < n_slots; ++i) {
      slots[i] = detail_sim::run_slot(ch, seed, i);
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t lo = n_slots * w / workers;
      const std::uint64_t hi = n_slots * (w + 1) / workers;
      pool.emplace_back([&, lo, hi] {
        for (std::uint64_t i = lo; i < hi; ++i) {
          slots[i] = detail_sim::run_slot(ch, seed, i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  RunResult out;
  RunStats& s = out.stats;
  s.n_slots = n_slots;
  const auto [pred_bob, pred_eve] = detail_sim::predict(ch, config.snr_in);
  s.predicted_ber_bob = pred_bob;
  s.predicted_ber_eve = pred_eve;

  std::vector<std::uint64_t> sifted_idx;
  sifted_idx.reserve(n_slots);
  std::uint64_t bob_err = 0, eve_err = 0;
  for (std::uint64_t i = 0; i < n_slots; ++i) {
    const auto& r = slots[i];
    if (!r.sifted) continue;
    sifted_idx.push_back(i);
    const auto q = detail_sim::index(r.bob_choice);
    (q == 0 ? s.amplitude_slots : s.phase_slots) += 1;
    bob_err += r.bob_bit != r.alice_bits[q];
    eve_err += r.eve_bits[q] != r.alice_bits[q];
  }
  s.sifted = sifted_idx.size();
  s.sifted_fraction = Estimate::of(s.sifted, n_slots);
  s.empirical_ber_bob = Estimate::of(bob_err, s.sifted);
  s.empirical_ber_eve = Estimate::of(eve_err, s.sifted);

  // Half of the sifted slots are compared in public and dropped.
  {
    auto rng = substream(seed, kDisclosureStream, 0);
    std::vector<std::uint64_t> order = sifted_idx;
    shuffle(rng, order);
    s.disclosed = order.size() / 2;
    std::uint64_t disclosed_err = 0;
    for (std::uint64_t k = 0; k < s.disclosed; ++k) {
      auto& r = slots[order[k]];
      r.disclosed = true;
      const auto q = detail_sim::index(r.bob_choice);
      disclosed_err += r.bob_bit != r.alice_bits[q];
    }
    s.disclosed_ber_bob = Estimate::of(disclosed_err, s.disclosed);
  }

  KeyMaterial key;
  for (auto i : sifted_idx) {
    const auto& r = slots[i];
    if (r.disclosed) continue;
    const auto q = detail_sim::index(r.bob_choice);
    key.alice.push_back(r.alice_bits[q]);
    key.bob.push_back(r.bob_bit);
    key.eve.push_back(r.eve_bits[q]);
  }
  s.key_length = key.alice.size();

  PairingRecord pairing;
  if (options.recon_rounds > 0) {
    auto rec = reconcile(key.alice, key.bob, key.eve, options.recon_rounds,
                         seed);
    for (const auto& round : rec.stats.rounds) {
      s.post_recon_lengths.push_back(round.length_after);
    }
    s.recon_rounds_used = rec.stats.rounds_used;
    s.recon_audit_clean = rec.stats.audit_clean;
    key = {std::move(rec.alice), std::move(rec.bob), std::move(rec.eve)};
    pairing = std::move(rec.pairing);
  }
  s.post_recon_length = key.alice.size();
  s.post_recon_ber_bob = Estimate::of(count_mismatches(key.alice, key.bob),
                                      key.alice.size());
  s.post_recon_ber_eve = Estimate::of(count_mismatches(key.alice, key.eve),
                                      key.alice.size());

  s.pa_block_n = options.pa_block_n;
  if (options.pa_block_n > 1) {
    const auto plan =
        plan_pa_blocks(key.alice.size(), options.pa_block_n, seed, pairing);
    key = {apply_pa_blocks(key.alice, plan), apply_pa_blocks(key.bob, plan),
           apply_pa_blocks(key.eve, plan)};
  }
  s.post_pa_length = key.alice.size();
  s.post_pa_ber_bob =
      Estimate::of(count_mismatches(key.alice, key.bob), key.alice.size());
  s.post_pa_ber_eve =
      Estimate::of(count_mismatches(key.alice, key.eve), key.alice.size());
  s.predicted_pa_ber_eve =
      info::pa_error(
          info::ErrorProbability(std::min(0.5, s.post_recon_ber_eve.value)),
          static_cast<std::int64_t>(options.pa_block_n))
          .value();
  s.eve_pa_independence_z = s.post_pa_ber_eve.z(s.predicted_pa_ber_eve);
  s.empirical_eve_mi = 1.0 - 2.0 * s.post_pa_ber_eve.value;

  if (attack && std::holds_alternative<attacks::Teleport>(attack->kind())) {
    // Back out each party's penalty from the transfer used for its noise.
    // The squeezed receiver sees half the penalty (large-excess limit).
    const double scale = ch.squeezed ? 2.0 : 1.0;
    const double v_e =
        scale * optics::penalty_from_transfer(ch.vn, ch.t_eve.plus);
    const double v_b =
        scale * optics::penalty_from_transfer(ch.vn, ch.t_bob.plus);
    s.penalty_product = v_e * v_b;
  }

  out.key = std::move(key);
  if (options.keep_records) out.records = std::move(slots);
  return out;
}

}  // namespace cvqkd::sim
