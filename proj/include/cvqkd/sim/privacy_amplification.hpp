#pragma once

// Block-XOR privacy amplification: the reconciled key is cut into disjoint
// random blocks of n bits and each block is replaced by its parity. No block
// may hold both members of a pair whose parity was announced during
// reconciliation.

#include <cstdint>
#include <deque>
#include <numeric>
#include <sstream>
#include <vector>

#include "cvqkd/errors.hpp"
#include "cvqkd/sim/bitstring.hpp"
#include "cvqkd/sim/reconcile.hpp"
#include "cvqkd/sim/rng.hpp"

namespace cvqkd::sim {

inline constexpr int kMaxBlockPlanAttempts = 16;

// blocks[k] lists the key positions XORed into output bit k.
struct BlockPlan {
  std::size_t block_length = 1;
  std::vector<std::vector<std::uint32_t>> blocks;
};

namespace detail_pa {

// Partner lists in compressed-row form.
struct Adjacency {
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> partners;

  Adjacency(std::size_t n, const PairingRecord& record) : offsets(n + 1, 0) {
    for (const auto& [i, j] : record.pairs) {
      detail::require(i < n && j < n,
                      "privacy_amplify: pairing record refers past the key");
      ++offsets[i + 1];
      ++offsets[j + 1];
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    partners.resize(offsets.back());
    std::vector<std::uint32_t> fill(offsets.begin(), offsets.end() - 1);
    for (const auto& [i, j] : record.pairs) {
      partners[fill[i]++] = j;
      partners[fill[j]++] = i;
    }
  }
};

inline bool try_plan(std::size_t length, std::size_t n, SplitMix64& rng,
                     const Adjacency& adj, BlockPlan& plan) {
  const std::size_t wanted = length / n;
  std::vector<std::uint32_t> order(length);
  std::iota(order.begin(), order.end(), 0u);
  shuffle(rng, order);

  constexpr std::int64_t kUnassigned = -1;
  std::vector<std::int64_t> block_of(length, kUnassigned);
  plan.blocks.assign(wanted, {});
  for (auto& b : plan.blocks) b.reserve(n);

  std::size_t current = 0;
  std::deque<std::uint32_t> deferred;
  std::size_t next = 0;

  auto fits = [&](std::uint32_t x) {
    for (auto k = adj.offsets[x]; k < adj.offsets[x + 1]; ++k) {
      if (block_of[adj.partners[k]] == static_cast<std::int64_t>(current)) {
        return false;
      }
    }
    return true;
  };
  auto place = [&](std::uint32_t x) {
    block_of[x] = static_cast<std::int64_t>(current);
    plan.blocks[current].push_back(x);
    if (plan.blocks[current].size() == n) ++current;
  };

  while (current < wanted) {
    // A fresh block first drains whatever earlier blocks could not take.
    bool placed_deferred = false;
    for (std::size_t d = deferred.size(); d > 0 && current < wanted; --d) {
      const auto x = deferred.front();
      deferred.pop_front();
      if (fits(x)) {
        const auto before = current;
        place(x);
        placed_deferred = true;
        if (current != before) break;
      } else {
        deferred.push_back(x);
      }
    }
    if (current >= wanted) break;
    if (next >= length) {
      if (!placed_deferred) return false;
      continue;
    }
    const auto x = order[next++];
    if (fits(x)) {
      place(x);
    } else {
      deferred.push_back(x);
    }
  }
  return true;
}

}  // namespace detail_pa

inline BlockPlan plan_pa_blocks(std::size_t length, std::size_t n,
                                std::uint64_t seed,
                                const PairingRecord& exclusions) {
  detail::require(n >= 1, "privacy_amplify: block length must be >= 1");
  if (length < n) {
    std::ostringstream os;
    os << "privacy_amplify: key of " << length
       << " bits is shorter than the block length " << n;
    throw DomainError(os.str());
  }
  BlockPlan plan;
  plan.block_length = n;
  if (n == 1) {
    plan.blocks.resize(length);
    for (std::uint32_t i = 0; i < length; ++i) plan.blocks[i] = {i};
    return plan;
  }
  const detail_pa::Adjacency adj(length, exclusions);
  for (int attempt = 0; attempt < kMaxBlockPlanAttempts; ++attempt) {
    auto rng = substream(seed, kAmplifyStream,
                         static_cast<std::uint64_t>(attempt));
    if (detail_pa::try_plan(length, n, rng, adj, plan)) return plan;
  }
  throw DomainError(
      "privacy_amplify: could not assign blocks that avoid every "
      "reconciliation pair");
}

inline BitString apply_pa_blocks(const BitString& key, const BlockPlan& plan) {
  BitString out(plan.blocks.size());
  for (std::size_t k = 0; k < plan.blocks.size(); ++k) {
    std::uint8_t parity = 0;
    for (auto i : plan.blocks[k]) {
      detail::require(i < key.size(),
                      "privacy_amplify: block plan refers past the key");
      parity ^= key[i];
    }
    out[k] = parity;
  }
  return out;
}

// Same seed and exclusions give the same blocks, so Bob and Eve can apply
// the identical transformation to their copies.
inline BitString privacy_amplify(const BitString& key, std::size_t n,
                                 std::uint64_t seed,
                                 const PairingRecord& exclusions) {
  return apply_pa_blocks(key, plan_pa_blocks(key.size(), n, seed, exclusions));
}

}  // namespace cvqkd::sim
