// Copyright 2026 The bqt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace bqt {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree (site counts, label dimensions, vector lengths).
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// A dense method was asked to handle a system beyond its size limit.
class SizeLimitExceeded : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bilayer Hamiltonian cannot be compiled into monolayer dynamics.
class ModelError : public Error {
 public:
  using Error::Error;
};

class SymmetryViolation : public ModelError {
 public:
  using ModelError::ModelError;
};

class SignViolation : public ModelError {
 public:
  using ModelError::ModelError;
};

class NonFactorizable : public ModelError {
 public:
  using ModelError::ModelError;
};

class PositivityFailure : public ModelError {
 public:
  using ModelError::ModelError;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// More than half of the retained Monte Carlo samples had a vanishing overlap.
class DegenerateChain : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class KrylovNonConvergence : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

}  // namespace bqt
