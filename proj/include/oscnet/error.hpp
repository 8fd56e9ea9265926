// Copyright 2026 The oscnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oscnet {

enum class ErrorCode {
  // network
  NonSymmetricCoupling,
  NonPositiveDefinite,
  NonPositiveFrequency,
  ExhaustedRetries,
  DirectLinkForbidden,
  InvalidArgument,
  // spectral
  EigensolverFailure,
  NonPositiveEigenvalue,
  LocalBathNodeOutOfRange,
  CutoffTooLow,
  // dynamics
  UnphysicalSpec,
  DimensionMismatch,
  IntegratorStepFailure,
  PhysicalityViolation,
  // measures
  DegenerateWindow,
  UnphysicalCovariance,
  OptimizationNotConverged,
  // tuning
  UnstableAtGridPoint,
  NoZeroInBracket,
  ModeTrackingLost,
  NoDominantMode,
  NodeDecoupled,
  PoleAtOmega,
  FrequencyMismatch,
  // cli
  ConfigError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSymmetricCoupling: return "NonSymmetricCoupling";
    case ErrorCode::NonPositiveDefinite: return "NonPositiveDefinite";
    case ErrorCode::NonPositiveFrequency: return "NonPositiveFrequency";
    case ErrorCode::ExhaustedRetries: return "ExhaustedRetries";
    case ErrorCode::DirectLinkForbidden: return "DirectLinkForbidden";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EigensolverFailure: return "EigensolverFailure";
    case ErrorCode::NonPositiveEigenvalue: return "NonPositiveEigenvalue";
    case ErrorCode::LocalBathNodeOutOfRange: return "LocalBathNodeOutOfRange";
    case ErrorCode::CutoffTooLow: return "CutoffTooLow";
    case ErrorCode::UnphysicalSpec: return "UnphysicalSpec";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IntegratorStepFailure: return "IntegratorStepFailure";
    case ErrorCode::PhysicalityViolation: return "PhysicalityViolation";
    case ErrorCode::DegenerateWindow: return "DegenerateWindow";
    case ErrorCode::UnphysicalCovariance: return "UnphysicalCovariance";
    case ErrorCode::OptimizationNotConverged: return "OptimizationNotConverged";
    case ErrorCode::UnstableAtGridPoint: return "UnstableAtGridPoint";
    case ErrorCode::NoZeroInBracket: return "NoZeroInBracket";
    case ErrorCode::ModeTrackingLost: return "ModeTrackingLost";
    case ErrorCode::NoDominantMode: return "NoDominantMode";
    case ErrorCode::NodeDecoupled: return "NodeDecoupled";
    case ErrorCode::PoleAtOmega: return "PoleAtOmega";
    case ErrorCode::FrequencyMismatch: return "FrequencyMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure in the library is reported through this exception; `code()`
/// identifies the condition so callers (and the CLI exit status) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace oscnet
