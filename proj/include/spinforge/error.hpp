/* Copyright 2026 The SpinForge Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace spinforge {

// Base of every error the library throws. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a model precondition (non-Hermitian generator, non-unitary
// target, malformed system parameters, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

// Operation is defined only for a subset of systems (e.g. two spins).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Spins are indistinguishable; no finite geodesic estimate exists.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// A control sample exceeds the amplitude bound.
class BoundViolation : public Error {
 public:
  using Error::Error;
};

// Malformed file or configuration.
class FormatError : public Error {
 public:
  using Error::Error;
};

// The minimum-time search could not bracket a feasible duration.
class SearchFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace spinforge
