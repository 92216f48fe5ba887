#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rsbl {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  NonFinite,
  RankDeficient,
  NotSymmetric,
  SingularMatrix,
  SingularVandermonde,
  ChainBreakdown,
  DegenerateEndpoint,
  Breakdown,
  NoConvergence,
  SingularK,
  SingularBlock,
  SingularDifference,
  ZeroGap,
  Config,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library. `index()` carries the offending
/// step / chain position for Breakdown and ChainBreakdown.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<std::size_t> index = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> index_;
};

}  // namespace rsbl
