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

#include "parshoot/eliminate.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace parshoot
{

  ControlGuess cold_start(const ProblemDef &def) { return {Vec::Zero(def.l()), Vec::Zero(def.m())}; }

  Vec stationarity_residual(const HamiltonianPoint &pt)
  {
    const int l = pt.def().l(), m = pt.def().m();
    Vec r(l + m);
    r.head(l) = pt.Fu().transpose() * pt.p();
    if (m > 0)
      r.tail(m) = -hv_ddot(pt);
    return r;
  }

  namespace
  {

    // d hv_ddot / dv; exact up to rounding since hv_ddot is affine in v.
    Mat hv_ddot_dv(HamiltonianPoint pt)
    {
      const int m = pt.def().m();
      const Vec v0 = pt.v();
      Mat A(m, m);
      for (int j = 0; j < m; ++j)
      {
        const double h = 1e-6 * std::max(1.0, std::abs(v0(j)));
        Vec vp = v0, vm = v0;
        vp(j) += h;
        vm(j) -= h;
        pt.set_affine_control(vp);
        const Vec dp = hv_ddot(pt);
        pt.set_affine_control(vm);
        const Vec dm = hv_ddot(pt);
        A.col(j) = (dp - dm) / (2 * h);
      }
      return A;
    }

    double smallest_sym_eigenvalue(const Mat &a)
    {
      if (a.size() == 0)
        return std::numeric_limits<double>::infinity();
      Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
      return eig.eigenvalues()(0);
    }

  } // namespace

  EliminationResult eliminate_controls(const ProblemDef &def, const Vec &x, const Vec &p, const ControlGuess &warm,
                                       const EliminationOptions &opts)
  {
    const int l = def.l(), m = def.m();
    Vec u = warm.u.size() == l ? warm.u : Vec::Zero(l);
    Vec v = warm.v.size() == m ? warm.v : Vec::Zero(m);

    HamiltonianPoint pt(def, x, u, v, p);
    for (int it = 0;; ++it)
    {
      const Vec r = stationarity_residual(pt);
      const double res = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
      if (res <= opts.tol)
        return {u, v, it, res};
      if (it == opts.max_iter)
      {
        Vec iterate(l + m);
        iterate << u, v;
        throw EliminationNoConvergence(res, iterate);
      }

      const Mat J = elimination_jacobian(pt);
      Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vec &sigma = svd.singularValues();
      if (sigma(sigma.size() - 1) * opts.max_condition <= sigma(0))
        throw LegendreViolation("elimination Jacobian is singular", smallest_sym_eigenvalue(J));
      const Vec step = svd.solve(-r);
      u += step.head(l);
      v += step.tail(m);

      pt = HamiltonianPoint(def, x, u, v, p);
      if (m > 0)
      {
        const Mat A = hv_ddot_dv(pt);
        v -= A.partialPivLu().solve(hv_ddot(pt));
        pt.set_affine_control(v);
      }
    }
  }

  LCReport check_legendre(const ProblemDef &def, const TrajectoryGrid &traj)
  {
    const int l = def.l(), m = def.m();
    LCReport rep;
    rep.huu_margin = std::numeric_limits<double>::infinity();
    rep.generalized_margin = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < traj.t.size(); ++k)
    {
      const HamiltonianPoint pt(def, traj.x[k], traj.u[k], traj.v[k], traj.p[k]);
      if (l > 0)
      {
        const double lam = smallest_sym_eigenvalue(pt.Huu());
        if (lam < rep.huu_margin)
        {
          rep.huu_margin = lam;
          rep.huu_node = static_cast<int>(k);
        }
      }
      if (m > 0)
      {
        double lam;
        try
        {
          lam = smallest_sym_eigenvalue(-hv_ddot_dv(pt));
        }
        catch (const LegendreViolation &)
        {
          // hv_ddot needs Gamma, which is undefined where H_uu is singular.
          lam = -std::numeric_limits<double>::infinity();
        }
        if (lam < rep.generalized_margin)
        {
          rep.generalized_margin = lam;
          rep.generalized_node = static_cast<int>(k);
        }
      }
    }
    rep.satisfied = rep.huu_margin > 0 && rep.generalized_margin > 0;
    return rep;
  }

} // namespace parshoot
