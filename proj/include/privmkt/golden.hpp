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

#include <cmath>
#include <utility>

namespace privmkt {

// Golden-section maximization of f on [a, b] to the given interval tolerance.
// Returns (argmax, value). The endpoints are evaluated as candidates, so a
// maximum attained at the boundary is returned exactly.
template <typename F>
std::pair<double, double> golden_section_max(F&& f, double a, double b,
                                             double tol) {
  static const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;
  double best_x = a, best_f = f(a);
  const double fb = f(b);
  if (fb > best_f) {
    best_f = fb;
    best_x = b;
  }
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  if (f1 > best_f) {
    best_f = f1;
    best_x = x1;
  }
  if (f2 > best_f) {
    best_f = f2;
    best_x = x2;
  }
  return {best_x, best_f};
}

}  // namespace privmkt
