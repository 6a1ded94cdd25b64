// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tracesim {

enum class ErrorKind {
  SyntaxError,
  VersionError,
  UnknownTask,
  UnknownConstruct,
  UnsortedSamples,
  ThreadsOutOfRange,
  InvalidParams,
  DuplicateTarget,
  InvalidPolicy,
  TargetNotFound,
  AmbiguousTarget,
  NotALoop,
  NestedParallelism,
  EmptyLoop,
  CoreCountOutOfRange,
  NonTiledResult,
  ZeroMakespan,
  LengthMismatch,
  ZeroReference,
  UnsupportedFormat,
  InstanceTooLarge,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (and the
/// CLI's one-line error contract) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace tracesim
