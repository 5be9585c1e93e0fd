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

#ifndef PARSHOOT_SHOOTING_HPP
#define PARSHOOT_SHOOTING_HPP

#include <functional>
#include <optional>

#include "parshoot/integrate.hpp"

namespace parshoot
{

  /// Shooting unknowns nu = (x0, p0, beta), packed in that order.
  struct ShootingPoint
  {
    Vec x0;
    Vec p0;
    Vec beta;
  };

  Vec pack(const ShootingPoint &pt);
  ShootingPoint unpack(const ProblemDef &def, const Vec &full_nu);

  /// Maps the problem's unknown vector (reduced when the problem has a reduction) to the full nu.
  Vec expand(const ProblemDef &def, const Vec &nu);

  struct EndpointLagrangian
  {
    double value = 0.0;
    Vec grad_x0;
    Vec grad_xT;
    Mat hess; // 2n x 2n in (x0, xT)
  };

  /// l = phi_0 + sum_j beta_j eta_j and its derivatives.
  EndpointLagrangian endpoint_lagrangian(const ProblemDef &def, const Vec &beta, const Vec &x0, const Vec &xT);

  /**
   * Full shooting residual, d_eta + 2n + 2m rows:
   *   eta(x0, xT); p0 + D_x0 l; pT - D_xT l; H_v(T); hv_dot(0).
   * The propagated trajectory is written to traj when non-null.
   */
  Vec full_shooting_residual(const ProblemDef &def, const ShootingPoint &pt, int intervals, Scheme scheme,
                             TrajectoryGrid *traj = nullptr);

  /// Residual in the problem's own unknowns (rows restricted when a reduction is present).
  Vec shooting_residual(const ProblemDef &def, const Vec &nu, int intervals, Scheme scheme);

  using ResidualFn = std::function<Vec(const Vec &)>;

  /// Central differences, step rel_step * max(1, |nu_j|) per column.
  Mat fd_jacobian(const ResidualFn &fn, const Vec &nu, double rel_step = 1e-6);

  Mat shooting_jacobian(const ProblemDef &def, const Vec &nu, int intervals, Scheme scheme, double rel_step = 1e-6);

  struct GNOptions
  {
    double tol = 1e-10;
    int max_iter = 30;
    double min_sigma_ratio_sq = 1e-14;
    double fd_step = 1e-6;
  };

  struct GNReport
  {
    std::vector<Vec> iterates;
    std::vector<double> residual_norms; // sup-norm of S at each iterate
    std::vector<double> step_norms;     // |Delta^k|_2
    Vec final_residual;
    std::vector<double> singular_values; // of the last Jacobian, descending
    int iterations = 0;
    bool converged = false;

    const Vec &solution() const { return iterates.back(); }
    const Vec &best_iterate() const;
  };

  class NoConvergence : public Error
  {
  public:
    NoConvergence(const std::string &what, GNReport report) : Error(what), report_(std::move(report)) {}
    const GNReport &report() const { return report_; }

  private:
    GNReport report_;
  };

  /// S' is not one-to-one at an iterate: sigma_min^2 / sigma_max^2 below the threshold.
  class SingularNormalMatrix : public Error
  {
  public:
    SingularNormalMatrix(const std::string &what, GNReport report) : Error(what), report_(std::move(report)) {}
    const GNReport &report() const { return report_; }

  private:
    GNReport report_;
  };

  /**
   * Gauss-Newton on an arbitrary residual: nu <- nu + Delta with Delta the
   * solution of the normal equations S'^T S' Delta = -S'^T S, computed
   * through the SVD of S'. Stops once |S|_inf <= tol.
   */
  GNReport gauss_newton(const ResidualFn &residual, const Vec &nu0, const GNOptions &opts = {});

  GNReport gauss_newton(const ProblemDef &def, const Vec &nu0, int intervals, Scheme scheme,
                        const GNOptions &opts = {});

  struct OrderBand
  {
    double lo = 1e-8;
    double hi = 1e-2;
    int min_pairs = 3;
  };

  /// Least-squares slope of log e_{k+1} against log e_k over pairs with both errors inside the band.
  double convergence_order(const std::vector<double> &errors, const OrderBand &band = {});
  double convergence_order(const GNReport &report, const Vec &nu_star, const OrderBand &band = {});

  struct SweepRow
  {
    int index = 0;
    Vec nu0;
    bool converged = false;
    int iterations = 0;
    std::optional<double> order;
    Vec solution;
    double residual = 0.0;
    std::string failure;
  };

  /// Independent Gauss-Newton runs, one per start. Rows come back in start order.
  std::vector<SweepRow> multistart(const ProblemDef &def, const std::vector<Vec> &starts, int intervals, Scheme scheme,
                                   const GNOptions &opts, int threads = 1);

  /// Uniform starts in [lo, hi]^dim from a seeded generator.
  std::vector<Vec> uniform_starts(int count, int dim, double lo, double hi, std::uint64_t seed);

} // namespace parshoot

#endif
