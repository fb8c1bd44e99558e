#pragma once

// Pair-parity reconciliation: each round pairs up the surviving positions at
// random, announces both parities and drops every pair on which Alice and
// Bob disagree. Eve drops the same positions from her copy.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "cvqkd/errors.hpp"
#include "cvqkd/sim/bitstring.hpp"
#include "cvqkd/sim/rng.hpp"

namespace cvqkd::sim {

// Positions (in the reconciled strings) whose parity was announced together.
// Privacy amplification must not put both members into one block.
struct PairingRecord {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
};

struct ReconcileRound {
  std::size_t length_before = 0;
  std::size_t length_after = 0;
  std::size_t bob_errors_after = 0;
  std::size_t eve_errors_after = 0;
};

struct ReconcileStats {
  std::size_t rounds_used = 0;
  bool audit_clean = false;  // the stop rule fired before max rounds ran out
  std::vector<ReconcileRound> rounds;
  double bob_error_before = 0.0;
  double eve_error_before = 0.0;
  double bob_error_after = 0.0;
  double eve_error_after = 0.0;
};

struct ReconcileResult {
  BitString alice;
  BitString bob;
  BitString eve;
  PairingRecord pairing;
  ReconcileStats stats;
};

inline constexpr std::size_t kAuditSize = 1000;

// `max_rounds` caps the number of rounds; reconciliation stops earlier once a
// random audit of kAuditSize positions finds no Alice/Bob mismatch. The
// audit is a simulator-side check and does not consume key bits.
inline ReconcileResult reconcile(const BitString& alice, const BitString& bob,
                                 const BitString& eve, std::size_t max_rounds,
                                 std::uint64_t seed) {
  detail::require(alice.size() == bob.size() && alice.size() == eve.size(),
                  "reconcile: bit strings must have equal length");
  detail::require(alice.size() <= UINT32_MAX,
                  "reconcile: strings longer than 2^32 bits unsupported");

  ReconcileResult out{alice, bob, eve, {}, {}};
  out.stats.bob_error_before = error_rate(alice, bob);
  out.stats.eve_error_before = error_rate(alice, eve);

  // origin[i]: index in the input strings of current position i.
  std::vector<std::uint32_t> origin(alice.size());
  std::iota(origin.begin(), origin.end(), 0u);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> announced;

  for (std::size_t round = 0; round < max_rounds; ++round) {
    auto rng = substream(seed, kReconcileStream, round);
    const std::size_t m = out.alice.size();

    std::vector<std::uint32_t> order(m);
    std::iota(order.begin(), order.end(), 0u);
    shuffle(rng, order);

    std::vector<std::uint8_t> keep(m, 1);
    for (std::size_t k = 0; k + 1 < m; k += 2) {
      const auto i = order[k];
      const auto j = order[k + 1];
      const bool alice_parity = out.alice[i] ^ out.alice[j];
      const bool bob_parity = out.bob[i] ^ out.bob[j];
      if (alice_parity != bob_parity) {
        keep[i] = keep[j] = 0;
      } else {
        announced.emplace_back(origin[i], origin[j]);
      }
    }

    BitString a, b, e;
    std::vector<std::uint32_t> next_origin;
    a.reserve(m);
    b.reserve(m);
    e.reserve(m);
    next_origin.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      if (!keep[i]) continue;
      a.push_back(out.alice[i]);
      b.push_back(out.bob[i]);
      e.push_back(out.eve[i]);
      next_origin.push_back(origin[i]);
    }
    out.alice = std::move(a);
    out.bob = std::move(b);
    out.eve = std::move(e);
    origin = std::move(next_origin);

    out.stats.rounds.push_back({m, out.alice.size(),
                                count_mismatches(out.alice, out.bob),
                                count_mismatches(out.alice, out.eve)});
    out.stats.rounds_used = round + 1;

    if (out.alice.empty()) break;
    std::size_t audit_mismatches = 0;
    for (std::size_t s = 0; s < kAuditSize; ++s) {
      const auto i = uniform_index(rng, out.alice.size());
      audit_mismatches += (out.alice[i] != out.bob[i]);
    }
    if (audit_mismatches == 0) {
      out.stats.audit_clean = true;
      break;
    }
  }

  // Re-express announced pairs in final positions, dropping pairs that lost a
  // member in a later round.
  std::vector<std::int64_t> final_pos(alice.size(), -1);
  for (std::size_t i = 0; i < origin.size(); ++i) {
    final_pos[origin[i]] = static_cast<std::int64_t>(i);
  }
  for (const auto& [i, j] : announced) {
    if (final_pos[i] >= 0 && final_pos[j] >= 0) {
      out.pairing.pairs.emplace_back(static_cast<std::uint32_t>(final_pos[i]),
                                     static_cast<std::uint32_t>(final_pos[j]));
    }
  }

  out.stats.bob_error_after = error_rate(out.alice, out.bob);
  out.stats.eve_error_after = error_rate(out.alice, out.eve);
  return out;
}

}  // namespace cvqkd::sim
