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

#ifndef PARSHOOT_SSC_HPP
#define PARSHOOT_SSC_HPP

#include <string>

#include "parshoot/eliminate.hpp"

namespace parshoot
{

  /// Direction (xbar, ubar, vbar) on the nodes of a nominal grid.
  struct LinearizedDirection
  {
    std::vector<Vec> xbar;
    std::vector<Vec> ubar;
    std::vector<Vec> vbar;
  };

  /// Goh variables: ybar = int vbar, xibar = xbar - F_v ybar, hbar = ybar(T).
  struct GohDirection
  {
    std::vector<Vec> xibar;
    std::vector<Vec> ubar;
    std::vector<Vec> ybar;
    Vec hbar;
  };

  enum class LinearScheme
  {
    implicit_euler,
    trapezoidal,
  };

  /// Integrates xbar' = F_x xbar + F_u ubar + F_v vbar along sol.
  LinearizedDirection propagate_linearized(const ProblemDef &def, const TrajectoryGrid &sol, const Vec &x0bar,
                                           const std::vector<Vec> &ubar, const std::vector<Vec> &vbar,
                                           LinearScheme scheme = LinearScheme::implicit_euler);

  GohDirection goh_transform(const ProblemDef &def, const TrajectoryGrid &sol, const LinearizedDirection &dir);

  /// Inverse of goh_transform on the state: xbar = xibar + F_v ybar.
  std::vector<Vec> goh_inverse_state(const ProblemDef &def, const TrajectoryGrid &sol, const GohDirection &gdir);

  /// Second variation of the Lagrangian along dir, trapezoidal in time.
  double second_variation_omega(const ProblemDef &def, const TrajectoryGrid &sol, const Multiplier &lambda,
                                const LinearizedDirection &dir);

  struct OmegaBarCoeffs
  {
    Mat M;  // m x n
    Mat J;  // m x l
    Mat S;  // m x m, symmetric part of H_vx F_v
    Mat V;  // m x m, antisymmetric part
    Mat R;  // m x m
    Mat B;  // n x m
    Mat Fv; // n x m
  };

  /**
   * Precomputed nominal data along (sol, lambda): first and second
   * derivatives at every node and the time derivatives of F_v, H_vx and S
   * (central differences, second-order one-sided at the ends).
   */
  class NominalData
  {
  public:
    struct Node
    {
      Mat Fx, Fu, Fv;
      Mat Hxx, Hux, Huu, Hvx, Hvu;
    };

    NominalData(const ProblemDef &def, const TrajectoryGrid &sol, const Multiplier &lambda);

    int intervals() const { return static_cast<int>(nodes_.size()) - 1; }
    double step() const { return h_; }
    const Node &node(int k) const { return nodes_[static_cast<size_t>(k)]; }
    const OmegaBarCoeffs &coeffs(int k) const { return coeffs_[static_cast<size_t>(k)]; }

    /// Endpoint Lagrangian Hessian and gradient rows at (x0, xT).
    const Mat &endpoint_hessian() const { return lpp_; }
    const Mat &constraint_rows() const { return deta_; } // d x 2n
    const Vec &cost_row() const { return dphi_; }         // 2n

  private:
    double h_ = 0.0;
    std::vector<Node> nodes_;
    std::vector<OmegaBarCoeffs> coeffs_;
    Mat lpp_, deta_;
    Vec dphi_;
  };

  OmegaBarCoeffs omega_bar_coeffs(const ProblemDef &def, const TrajectoryGrid &sol, const Multiplier &lambda, int k);

  double omega_bar(const ProblemDef &def, const TrajectoryGrid &sol, const Multiplier &lambda,
                   const GohDirection &gdir);
  double omega_bar(const NominalData &nom, const GohDirection &gdir);

  /// |zeta0|^2 + |hbar|^2 + int(|ubar|^2 + |ybar|^2), trapezoidal with grid step h.
  double gamma_order_bar(const Vec &zeta0, const std::vector<Vec> &ubar, const std::vector<Vec> &ybar,
                         const Vec &hbar, double h);

  /// gamma_order_bar with ybar the trapezoidal primitive of vbar and hbar = ybar(T).
  double gamma_order(const Vec &zeta0, const std::vector<Vec> &ubar, const std::vector<Vec> &vbar, double h);

  struct Lemma1Report
  {
    double huv = 0.0;        // sup |H_uv|
    double brackets = 0.0;   // sup |p [f_i, f_j]^x|, i < j
    double v_antisym = 0.0;  // sup |V|
    double hu = 0.0;         // sup |H_u|
    double hv_ddot = 0.0;    // sup |hv_ddot|
    double threshold = 1e-8;
    bool passed = false;

    double worst() const;
  };

  Lemma1Report check_necessary(const ProblemDef &def, const TrajectoryGrid &sol, const Multiplier &lambda);

  struct SSCReport
  {
    double rho_hat = 0.0;
    LCReport legendre;
    Lemma1Report lemma1;
    int grid = 0;
    int free_dimension = 0; // coordinates (xi0, u nodes, y nodes, h)
    int cone_dimension = 0; // after the linearized endpoint rows
    double extremal_residual = 0.0;
    std::string cone = "equality-surrogate";
    bool coercive = false;
  };

  /// Quadratic forms on the free coordinates z: Omega-bar = z^T A z, gamma-bar = z^T diag(g) z.
  struct CoercivityPencil
  {
    Mat A;
    Vec g;
    Mat C; // linearized endpoint rows, then the cost row
  };

  CoercivityPencil assemble_pencil(const NominalData &nom);

  struct PencilSolution
  {
    double rho = 0.0;
    int cone_dimension = 0;
  };

  /// Smallest eigenvalue of (A, diag(g)) on the null space of C.
  PencilSolution solve_pencil(const CoercivityPencil &pencil);

  /**
   * Smallest generalized eigenvalue of (Omega-bar, gamma-bar) over directions
   * satisfying the linearized endpoint constraints and D phi_0 = 0.
   *
   * The free coordinates are xi0, u and y at every node and h; xi follows
   * from the trapezoidal discretization of xi' = F_x xi + F_u u + B y.
   * Throws Error when sol is not an extremal for lambda to 1e-8, and
   * InternalError when the gamma-bar Gram matrix is not positive definite.
   */
  SSCReport coercivity_check(const ProblemDef &def, const TrajectoryGrid &sol, const Multiplier &lambda);

} // namespace parshoot

#endif
