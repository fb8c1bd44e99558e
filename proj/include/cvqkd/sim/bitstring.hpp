#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "cvqkd/errors.hpp"

namespace cvqkd::sim {

class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t n) : bits_(n, 0) {}
  BitString(std::initializer_list<int> bits) {
    bits_.reserve(bits.size());
    for (int b : bits) bits_.push_back(static_cast<std::uint8_t>(b & 1));
  }
  explicit BitString(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  std::uint8_t& operator[](std::size_t i) { return bits_[i]; }
  void push_back(std::uint8_t b) { bits_.push_back(b & 1u); }
  void reserve(std::size_t n) { bits_.reserve(n); }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

inline std::size_t count_mismatches(const BitString& a, const BitString& b) {
  detail::require(a.size() == b.size(),
                  "count_mismatches: bit strings differ in length");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] != b[i]);
  return n;
}

inline double error_rate(const BitString& a, const BitString& b) {
  if (a.empty()) return 0.0;
  return static_cast<double>(count_mismatches(a, b)) /
         static_cast<double>(a.size());
}

}  // namespace cvqkd::sim
