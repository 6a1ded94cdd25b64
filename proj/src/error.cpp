// SPDX-License-Identifier: Apache-2.0
#include "tracesim/error.hpp"

namespace tracesim {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::VersionError: return "VersionError";
    case ErrorKind::UnknownTask: return "UnknownTask";
    case ErrorKind::UnknownConstruct: return "UnknownConstruct";
    case ErrorKind::UnsortedSamples: return "UnsortedSamples";
    case ErrorKind::ThreadsOutOfRange: return "ThreadsOutOfRange";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::DuplicateTarget: return "DuplicateTarget";
    case ErrorKind::InvalidPolicy: return "InvalidPolicy";
    case ErrorKind::TargetNotFound: return "TargetNotFound";
    case ErrorKind::AmbiguousTarget: return "AmbiguousTarget";
    case ErrorKind::NotALoop: return "NotALoop";
    case ErrorKind::NestedParallelism: return "NestedParallelism";
    case ErrorKind::EmptyLoop: return "EmptyLoop";
    case ErrorKind::CoreCountOutOfRange: return "CoreCountOutOfRange";
    case ErrorKind::NonTiledResult: return "NonTiledResult";
    case ErrorKind::ZeroMakespan: return "ZeroMakespan";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ZeroReference: return "ZeroReference";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace tracesim
