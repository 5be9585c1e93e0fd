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

#ifndef PARSHOOT_ELIMINATE_HPP
#define PARSHOOT_ELIMINATE_HPP

#include "parshoot/hamiltonian.hpp"

namespace parshoot
{

  struct ControlGuess
  {
    Vec u;
    Vec v;
  };

  /// Zero controls of the right sizes.
  ControlGuess cold_start(const ProblemDef &def);

  struct EliminationOptions
  {
    double tol = 1e-12;
    int max_iter = 50;
    double max_condition = 1e12;
  };

  struct EliminationResult
  {
    Vec u;
    Vec v;
    int iterations = 0;
    double residual = 0.0;
  };

  /// Stacked stationarity residual (H_u, -hv_ddot) at a point.
  Vec stationarity_residual(const HamiltonianPoint &pt);

  /**
   * Solves H_u = 0, hv_ddot = 0 for (u, v) = (U(x, p), V(x, p)) by Newton's
   * method on the elimination Jacobian. After every Newton update v is
   * re-solved exactly, since hv_ddot is affine in v.
   *
   * Throws EliminationNoConvergence after max_iter updates and
   * LegendreViolation when the Jacobian condition number exceeds max_condition.
   */
  EliminationResult eliminate_controls(const ProblemDef &def, const Vec &x, const Vec &p, const ControlGuess &warm,
                                       const EliminationOptions &opts = {});

  struct LCReport
  {
    double huu_margin = 0.0;         // min over nodes of lambda_min(H_uu); +inf when l = 0
    double generalized_margin = 0.0; // min over nodes of lambda_min(sym(-d hv_ddot / dv)); +inf when m = 0
    int huu_node = 0;
    int generalized_node = 0;
    bool satisfied = false;
  };

  /// Strengthened (generalized) Legendre-Clebsch margins along traj.
  LCReport check_legendre(const ProblemDef &def, const TrajectoryGrid &traj);

} // namespace parshoot

#endif
