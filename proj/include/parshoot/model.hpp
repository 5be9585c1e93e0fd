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

#ifndef PARSHOOT_MODEL_HPP
#define PARSHOOT_MODEL_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "parshoot/errors.hpp"

namespace parshoot
{

  using Vec = Eigen::VectorXd;
  using Mat = Eigen::MatrixXd;

  /**
   * Value and derivatives of one vector field f_i(x, u) : R^n x R^l -> R^n.
   *
   * Second derivatives are stored per output component k: dxx[k] is the n x n
   * Hessian of f_{i,k} in x, dxu[k] the n x l mixed block, duu[k] the l x l
   * Hessian in u.
   */
  struct FieldJet
  {
    Vec value;
    Mat dx;
    Mat du;
    std::vector<Mat> dxx;
    std::vector<Mat> dxu;
    std::vector<Mat> duu;
  };

  using FieldFn = std::function<FieldJet(const Vec &x, const Vec &u)>;

  /// Scalar endpoint function of (x0, xT): gradient is (d/dx0, d/dxT), Hessian 2n x 2n.
  struct ScalarJet
  {
    double value = 0.0;
    Vec grad;
    Mat hess;
  };

  using EndpointFn = std::function<ScalarJet(const Vec &x0, const Vec &xT)>;

  struct Dimensions
  {
    int n = 0;         // state
    int l = 0;         // nonlinear control
    int m = 0;         // affine control
    int d_eta = 0;     // endpoint equality constraints
    double horizon = 1.0;
  };

  /**
   * Affine restriction of the shooting unknowns: the full vector
   * nu = (x0, p0, beta) is offset + embed * nu_reduced, and only the listed
   * residual rows are kept.
   */
  struct ShootingReduction
  {
    Vec offset;
    Mat embed;
    std::vector<int> rows;
  };

  /// Immutable description of a partially affine optimal control problem.
  class ProblemDef
  {
  public:
    /// fields[0] is the drift f_0, fields[i] multiplies v_i. Throws ConstructionError on shape mismatch.
    ProblemDef(std::string name, Dimensions dims, std::vector<FieldFn> fields, EndpointFn cost,
               std::vector<EndpointFn> constraints, std::optional<ShootingReduction> reduction = std::nullopt);

    /// Same as the constructor, but fields only need value/dx/du; second derivatives are
    /// synthesized by central differences of the first derivatives with step 1e-5.
    static ProblemDef with_fd_second_derivatives(std::string name, Dimensions dims, std::vector<FieldFn> fields,
                                                 EndpointFn cost, std::vector<EndpointFn> constraints,
                                                 std::optional<ShootingReduction> reduction = std::nullopt);

    const std::string &name() const { return name_; }
    const Dimensions &dims() const { return dims_; }
    int n() const { return dims_.n; }
    int l() const { return dims_.l; }
    int m() const { return dims_.m; }
    int d_eta() const { return dims_.d_eta; }
    double horizon() const { return dims_.horizon; }

    FieldJet field(int i, const Vec &x, const Vec &u) const { return fields_[static_cast<size_t>(i)](x, u); }
    ScalarJet cost(const Vec &x0, const Vec &xT) const { return cost_(x0, xT); }
    ScalarJet constraint(int j, const Vec &x0, const Vec &xT) const
    {
      return constraints_[static_cast<size_t>(j)](x0, xT);
    }

    /// F(x, u, v) = f_0 + sum_i v_i f_i.
    Vec dynamics(const Vec &x, const Vec &u, const Vec &v) const;

    const std::optional<ShootingReduction> &reduction() const { return reduction_; }
    int shooting_unknowns() const;

    ProblemDef with_reduction(std::optional<ShootingReduction> reduction, std::string name) const;
    /// phi_0 -> -phi_0; multiplier components pinned by a reduction flip sign with it.
    ProblemDef negated_cost(std::string name) const;

    const std::vector<FieldFn> &fields() const { return fields_; }
    const EndpointFn &cost_fn() const { return cost_; }
    const std::vector<EndpointFn> &constraint_fns() const { return constraints_; }

  private:
    void check_shapes() const;

    std::string name_;
    Dimensions dims_;
    std::vector<FieldFn> fields_;
    EndpointFn cost_;
    std::vector<EndpointFn> constraints_;
    std::optional<ShootingReduction> reduction_;
  };

  /// Discrete record of (x, p, u, v) on a uniform grid t_k = k T / N.
  struct TrajectoryGrid
  {
    std::vector<double> t;
    std::vector<Vec> x;
    std::vector<Vec> p;
    std::vector<Vec> u;
    std::vector<Vec> v;

    int intervals() const { return static_cast<int>(t.size()) - 1; }
    double step() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
  };

  TrajectoryGrid make_grid(int intervals, double horizon);

  /// lambda = (beta, p).
  struct Multiplier
  {
    Vec beta;
    std::vector<Vec> p;
  };

  Multiplier multiplier_from(const TrajectoryGrid &traj, const Vec &beta);

  struct ValidationEntry
  {
    std::string evaluator;
    double worst_relative_error = 0.0;
  };

  struct ValidationReport
  {
    std::vector<ValidationEntry> entries;
    double tolerance = 1e-5;
    bool passed = true;
    /// Name of the worst evaluator, empty when nothing was checked.
    std::string worst() const;
  };

  /// Compares every analytic derivative against central finite differences at random points.
  ValidationReport validate_problem(const ProblemDef &def, int samples, std::uint64_t seed);

  struct QualificationReport
  {
    std::vector<double> singular_values; // descending
    bool qualified = false;
  };

  /// Singular values of the discretized derivative of (x0, u, v) -> eta(x0, x_T) along traj.
  QualificationReport check_qualification(const ProblemDef &def, const TrajectoryGrid &traj);

  // Problem registry.
  using ProblemFactory = std::function<ProblemDef()>;
  void register_problem(const std::string &name, ProblemFactory factory);
  std::vector<std::string> available_problems();
  ProblemDef builtin_problem(const std::string &name);

} // namespace parshoot

#endif
