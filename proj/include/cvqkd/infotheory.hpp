#pragma once

// Classical-information layer: bit error rate of binary pulse-code
// modulation under additive Gaussian noise, binary entropies, mutual
// information, and the algebra of block-XOR privacy amplification.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>

#include "cvqkd/errors.hpp"

namespace cvqkd::info {

class ErrorProbability {
 public:
  explicit ErrorProbability(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 0.5)) {
      std::ostringstream os;
      os << "error probability must lie in [0, 0.5], got " << value;
      throw DomainError(os.str());
    }
  }
  double value() const { return value_; }
  friend auto operator<=>(const ErrorProbability&,
                          const ErrorProbability&) = default;

 private:
  double value_;
};

class MutualInformation {
 public:
  explicit MutualInformation(double bits) : bits_(bits) {
    if (!(bits >= 0.0 && bits <= 1.0)) {
      std::ostringstream os;
      os << "binary mutual information must lie in [0, 1], got " << bits;
      throw DomainError(os.str());
    }
  }
  double bits() const { return bits_; }
  friend auto operator<=>(const MutualInformation&,
                          const MutualInformation&) = default;

 private:
  double bits_;
};

// B = 1/2 erfc( 1/2 sqrt(SNR / 2) ), SNR linear.
inline ErrorProbability ber_from_snr(double snr) {
  detail::require(snr >= 0.0, "ber_from_snr: snr must be non-negative");
  return ErrorProbability(0.5 * std::erfc(0.5 * std::sqrt(0.5 * snr)));
}

// Bisection on the monotone BER curve.
inline double snr_for_ber(ErrorProbability target) {
  const double b = target.value();
  detail::require(b > 0.0 && b < 0.5,
                  "snr_for_ber: target must lie in (0, 0.5)");
  double lo = 0.0;
  double hi = 1.0;
  while (ber_from_snr(hi).value() > b) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (ber_from_snr(mid).value() > b) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

inline double binary_entropy(double p) {
  detail::require(p >= 0.0 && p <= 1.0,
                  "binary_entropy: p must lie in [0, 1]");
  return -xlog2x(p) - xlog2x(1.0 - p);
}

// Shannon entropy of an arbitrary distribution, in bits.
inline double entropy(std::span<const double> probabilities) {
  double h = 0.0;
  for (double p : probabilities) h -= xlog2x(p);
  return h;
}

// H(x:y) = H(x) + H(y) - H(x,y) for two uniformly random bit strings that
// disagree with probability b.
inline MutualInformation mutual_info_from_ber(ErrorProbability b) {
  const double e = b.value();
  const std::array<double, 4> joint{0.5 * (1.0 - e), 0.5 * e, 0.5 * e,
                                    0.5 * (1.0 - e)};
  const double mi = 1.0 + 1.0 - entropy(joint);
  return MutualInformation(std::clamp(mi, 0.0, 1.0));
}

// Probability that the modulo-2 sum of an n-bit block is wrong when each
// bit is independently wrong with probability b: (1 - (1 - 2b)^n) / 2.
inline ErrorProbability pa_error(ErrorProbability b, std::int64_t n) {
  detail::require(n >= 1, "pa_error: block length must be >= 1");
  const double bias = std::pow(1.0 - 2.0 * b.value(), static_cast<double>(n));
  return ErrorProbability(0.5 * (1.0 - bias));
}

// H(A:E) = p_r = 1 - 2 B_pae = (1 - 2b)^n.
inline MutualInformation eve_mi_after_pa(ErrorProbability b_eve,
                                         std::int64_t n) {
  detail::require(n >= 1, "eve_mi_after_pa: block length must be >= 1");
  return MutualInformation(
      std::pow(1.0 - 2.0 * b_eve.value(), static_cast<double>(n)));
}

// Smallest n with eve_mi_after_pa(b_eve, n) <= target_mi.
inline std::int64_t min_block_length(ErrorProbability b_eve,
                                     double target_mi) {
  detail::require(target_mi > 0.0 && target_mi < 1.0,
                  "min_block_length: target must lie in (0, 1)");
  const double b = b_eve.value();
  if (b == 0.0) {
    throw UnreachableError(
        "min_block_length: Eve error rate 0, no finite block length "
        "reduces her information");
  }
  if (b == 0.5) return 1;
  const double ratio = 1.0 - 2.0 * b;
  auto n = static_cast<std::int64_t>(
      std::ceil(std::log(target_mi) / std::log(ratio)));
  n = std::max<std::int64_t>(n, 1);
  // Guard the boundary against rounding in the logarithms.
  while (n > 1 && eve_mi_after_pa(b_eve, n - 1).bits() <= target_mi) --n;
  while (eve_mi_after_pa(b_eve, n).bits() > target_mi) ++n;
  return n;
}

}  // namespace cvqkd::info
