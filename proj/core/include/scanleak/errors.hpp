#pragma once

#include <stdexcept>
#include <string>

namespace scanleak {

// Base type for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violated precondition: bad argument value, shape mismatch, out-of-range index.
struct DomainError : Error {
  using Error::Error;
};

// Signal interception scanned the whole trace without finding a trigger.
struct NoTriggerError : Error {
  using Error::Error;
};

// A trigger was found but the signal never stabilized afterwards.
struct NoTerminationError : Error {
  using Error::Error;
};

// Constant (or near-constant) signal cannot be z-scored.
struct DegenerateSignalError : Error {
  using Error::Error;
};

// File-level problems, with the failure class callers branch on.
struct FileError : Error {
  enum class Kind { io, bad_magic, truncated, version_mismatch, parse };
  Kind kind;
  FileError(Kind k, const std::string& msg) : Error(msg), kind(k) {}
};

}  // namespace scanleak
