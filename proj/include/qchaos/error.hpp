// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace qchaos {

// Numeric codes are mirrored by the C API (qchaos_status).
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kStepSize = 2,         // integrator drift bound violated, shrink dt
  kTruncation = 3,       // Fock cutoff too small for the requested state
  kConvergence = 4,      // eigensolver / unfolding / plateau detection
  kPropagation = 5,      // Krylov breakdown
  kIo = 6,
  kConfig = 7,
  kInternal = 99,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::kInvalidArgument, what) {}
};

class StepSizeError : public Error {
 public:
  explicit StepSizeError(const std::string& what) : Error(ErrorCode::kStepSize, what) {}
};

class TruncationError : public Error {
 public:
  explicit TruncationError(const std::string& what) : Error(ErrorCode::kTruncation, what) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(ErrorCode::kConvergence, what) {}
};

class PropagationError : public Error {
 public:
  explicit PropagationError(const std::string& what) : Error(ErrorCode::kPropagation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::kConfig, what) {}
};

// Warnings are routed through a process-wide sink so the C API can
// forward them to a host callback. Default sink writes to stderr.
using WarningSink = void (*)(const char* message, void* user);
void set_warning_sink(WarningSink sink, void* user);
void warn(const std::string& message);

}  // namespace qchaos
