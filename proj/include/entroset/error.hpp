#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace entroset {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live in different groups (or have mismatched dimensions).
class GroupMismatchError : public Error {
 public:
  using Error::Error;
};

/// A torsion-free-only operation received a group with a finite coordinate.
class TorsionError : public Error {
 public:
  using Error::Error;
};

/// An enumeration or construction would exceed its configured size cap.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

/// Malformed input: empty sets, bad probabilities, arity mismatches, ...
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// Two consecutive chain links push their marginals to different laws.
class InconsistentLinkError : public Error {
 public:
  InconsistentLinkError(std::size_t link, const std::string& what)
      : Error("link " + std::to_string(link) + ": " + what), link_(link) {}
  [[nodiscard]] std::size_t link() const noexcept { return link_; }

 private:
  std::size_t link_;
};

}  // namespace entroset
