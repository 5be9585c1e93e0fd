/*
 Copyright 2026 The parshoot Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef PARSHOOT_INTEGRATE_HPP
#define PARSHOOT_INTEGRATE_HPP

#include <string>
#include <string_view>

#include "parshoot/eliminate.hpp"

namespace parshoot
{

  enum class Scheme
  {
    implicit_euler,
    rk4,
  };

  Scheme parse_scheme(std::string_view name);
  std::string to_string(Scheme scheme);

  struct ReducedRhs
  {
    Vec xdot;
    Vec pdot;
    Vec u;
    Vec v;
  };

  /// State-costate right-hand side with the controls eliminated at (x, p).
  ReducedRhs rhs_reduced(const ProblemDef &def, const Vec &x, const Vec &p, const ControlGuess &warm);

  struct PropagationOptions
  {
    double newton_tol = 1e-12;
    int newton_max_iter = 25;
  };

  /**
   * Integrates the reduced optimality system from (x0, p0) on a uniform grid
   * of N intervals. Implicit Euler solves each step for the stacked (x, p)
   * with a finite-difference Newton iteration started at the previous node.
   * Eliminated controls are warm-started from the previous node.
   *
   * Throws PropagationError carrying the failing step index.
   */
  TrajectoryGrid propagate(const ProblemDef &def, const Vec &x0, const Vec &p0, int intervals, Scheme scheme,
                           const PropagationOptions &opts = {});

} // namespace parshoot

#endif
