// Copyright 2026 The privmkt Authors
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

namespace privmkt {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model parameter violates its domain (c <= 0, fewer than two providers, ...).
class InvalidParameter : public SolverError {
 public:
  using SolverError::SolverError;
};

// Two privacy risks closer than the minimum separation; the indifference
// threshold denominator would be ~0.
class DegenerateDifferentiation : public SolverError {
 public:
  using SolverError::SolverError;
};

// The stage-2 linear system could not be solved. Should not occur for a
// separated risk profile; reported rather than silently producing garbage.
class SingularSystem : public SolverError {
 public:
  using SolverError::SolverError;
};

// The 1-D best-response search domain is empty after separation exclusions.
class EmptyDomain : public SolverError {
 public:
  using SolverError::SolverError;
};

// An iterative oracle procedure hit its round cap without reaching a fixed
// point (usually: grid too coarse).
class NonConvergence : public SolverError {
 public:
  using SolverError::SolverError;
};

// A profile failed an explicitly requested equilibrium certification.
class NotAnEquilibrium : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace privmkt
