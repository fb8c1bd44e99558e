#pragma once

#include <stdexcept>
#include <string>

namespace cvqkd {

// Argument outside the physical or mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// The legitimate parties cannot distil a secret key: after worst-case
// reconciliation Eve's error rate does not exceed Bob's.
class InsecureError : public std::runtime_error {
 public:
  explicit InsecureError(const std::string& what)
      : std::runtime_error(what) {}
};

// An inversion has no finite solution (e.g. Eve error rate zero).
class UnreachableError : public std::domain_error {
 public:
  explicit UnreachableError(const std::string& what)
      : std::domain_error(what) {}
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace cvqkd
