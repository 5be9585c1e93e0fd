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

#ifndef PARSHOOT_HAMILTONIAN_HPP
#define PARSHOOT_HAMILTONIAN_HPP

#include "parshoot/model.hpp"

namespace parshoot
{

  /**
   * Evaluation point (x, u, v, p) of the pre-Hamiltonian H = p F(x, u, v),
   * with the jets of every f_i cached at (x, u).
   *
   * Row vectors (p, H_x, H_u, H_v, ...) are stored as column Vec. Matrix
   * conventions: Hux is l x n, Hvx is m x n, Hvu is m x l, Fv is n x m.
   * The referenced ProblemDef must outlive the point.
   */
  class HamiltonianPoint
  {
  public:
    HamiltonianPoint(const ProblemDef &def, Vec x, Vec u, Vec v, Vec p);

    /// Jets depend on (x, u) only, so changing v is free.
    void set_affine_control(const Vec &v) { v_ = v; }

    const ProblemDef &def() const { return *def_; }
    const Vec &x() const { return x_; }
    const Vec &u() const { return u_; }
    const Vec &v() const { return v_; }
    const Vec &p() const { return p_; }
    const FieldJet &jet(int i) const { return jets_[static_cast<size_t>(i)]; }

    Vec F() const;
    Mat Fx() const;
    Mat Fu() const;
    Mat Fv() const;

    Mat Hxx() const;
    Mat Hux() const;
    Mat Huu() const;
    Mat Hvx() const;
    Mat Hvu() const;

    /// [f_i, f_j]^x = (D_x f_j) f_i - (D_x f_i) f_j at (x, u).
    Vec bracket(int i, int j) const;

  private:
    const ProblemDef *def_;
    Vec x_, u_, v_, p_;
    std::vector<FieldJet> jets_;
  };

  struct HGradients
  {
    Vec Hx;
    Vec Hu;
    Vec Hv;
  };

  double h_value(const HamiltonianPoint &pt);
  HGradients h_gradients(const HamiltonianPoint &pt);

  Vec lie_bracket(const ProblemDef &def, int i, int j, const Vec &x, const Vec &u);

  /// Reduced time derivative of H_v: component i is p [f_0, f_i]^x. Independent of v.
  Vec hv_dot(const HamiltonianPoint &pt);
  Vec hv_dot(const ProblemDef &def, const Vec &x, const Vec &u, const Vec &p);

  /// The u' that makes dH_u/dt vanish (v' coefficient dropped). Throws LegendreViolation on singular H_uu.
  Vec gamma_udot(const HamiltonianPoint &pt);
  Vec gamma_udot(const ProblemDef &def, const Vec &x, const Vec &u, const Vec &v, const Vec &p);

  /// Total time derivative of hv_dot along x' = F, p' = -H_x, u' = Gamma. Affine in v.
  Vec hv_ddot(const HamiltonianPoint &pt);
  Vec hv_ddot(const ProblemDef &def, const Vec &x, const Vec &u, const Vec &v, const Vec &p);

  /**
   * (l+m) x (l+m) derivative of (H_u, -hv_ddot) with respect to (u, v).
   * Upper blocks are analytic; lower blocks come from central differences of
   * hv_ddot with step 1e-6 * max(1, |coordinate|).
   */
  Mat elimination_jacobian(const HamiltonianPoint &pt);
  Mat elimination_jacobian(const ProblemDef &def, const Vec &x, const Vec &u, const Vec &v, const Vec &p);

} // namespace parshoot

#endif
