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

#include "parshoot/hamiltonian.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace parshoot
{

  HamiltonianPoint::HamiltonianPoint(const ProblemDef &def, Vec x, Vec u, Vec v, Vec p)
      : def_(&def), x_(std::move(x)), u_(std::move(u)), v_(std::move(v)), p_(std::move(p))
  {
    if (x_.size() != def.n() || u_.size() != def.l() || v_.size() != def.m() || p_.size() != def.n())
      throw Error("HamiltonianPoint: dimension mismatch");
    jets_.reserve(static_cast<size_t>(def.m()) + 1);
    for (int i = 0; i <= def.m(); ++i)
      jets_.push_back(def.field(i, x_, u_));
  }

  Vec HamiltonianPoint::F() const
  {
    Vec out = jets_[0].value;
    for (int i = 1; i <= def_->m(); ++i)
      out += v_(i - 1) * jets_[static_cast<size_t>(i)].value;
    return out;
  }

  Mat HamiltonianPoint::Fx() const
  {
    Mat out = jets_[0].dx;
    for (int i = 1; i <= def_->m(); ++i)
      out += v_(i - 1) * jets_[static_cast<size_t>(i)].dx;
    return out;
  }

  Mat HamiltonianPoint::Fu() const
  {
    Mat out = jets_[0].du;
    for (int i = 1; i <= def_->m(); ++i)
      out += v_(i - 1) * jets_[static_cast<size_t>(i)].du;
    return out;
  }

  Mat HamiltonianPoint::Fv() const
  {
    Mat out(def_->n(), def_->m());
    for (int i = 1; i <= def_->m(); ++i)
      out.col(i - 1) = jets_[static_cast<size_t>(i)].value;
    return out;
  }

  namespace
  {
    // sum_k w_k * slices[k], over the affine combination F = f_0 + sum v_i f_i.
    template <class Slices>
    Mat contract(const std::vector<FieldJet> &jets, const Vec &v, const Vec &p, Slices slices, long rows, long cols)
    {
      Mat out = Mat::Zero(rows, cols);
      for (size_t i = 0; i < jets.size(); ++i)
      {
        const double vi = i == 0 ? 1.0 : v(static_cast<Eigen::Index>(i) - 1);
        if (vi == 0.0)
          continue;
        const auto &t = slices(jets[i]);
        for (Eigen::Index k = 0; k < p.size(); ++k)
          if (p(k) != 0.0)
            out += (vi * p(k)) * t[static_cast<size_t>(k)];
      }
      return out;
    }
  } // namespace

  Mat HamiltonianPoint::Hxx() const
  {
    const int n = def_->n();
    return contract(jets_, v_, p_, [](const FieldJet &j) -> const std::vector<Mat> & { return j.dxx; }, n, n);
  }

  Mat HamiltonianPoint::Hux() const
  {
    const int n = def_->n(), l = def_->l();
    return contract(jets_, v_, p_, [](const FieldJet &j) -> const std::vector<Mat> & { return j.dxu; }, n, l)
        .transpose();
  }

  Mat HamiltonianPoint::Huu() const
  {
    const int l = def_->l();
    return contract(jets_, v_, p_, [](const FieldJet &j) -> const std::vector<Mat> & { return j.duu; }, l, l);
  }

  Mat HamiltonianPoint::Hvx() const
  {
    Mat out(def_->m(), def_->n());
    for (int i = 1; i <= def_->m(); ++i)
      out.row(i - 1) = p_.transpose() * jets_[static_cast<size_t>(i)].dx;
    return out;
  }

  Mat HamiltonianPoint::Hvu() const
  {
    Mat out(def_->m(), def_->l());
    for (int i = 1; i <= def_->m(); ++i)
      out.row(i - 1) = p_.transpose() * jets_[static_cast<size_t>(i)].du;
    return out;
  }

  Vec HamiltonianPoint::bracket(int i, int j) const
  {
    if (i < 0 || j < 0 || i > def_->m() || j > def_->m())
      throw Error("lie_bracket: index out of range");
    const FieldJet &fi = jets_[static_cast<size_t>(i)], &fj = jets_[static_cast<size_t>(j)];
    return fj.dx * fi.value - fi.dx * fj.value;
  }

  double h_value(const HamiltonianPoint &pt) { return pt.p().dot(pt.F()); }

  HGradients h_gradients(const HamiltonianPoint &pt)
  {
    HGradients g;
    g.Hx = pt.Fx().transpose() * pt.p();
    g.Hu = pt.Fu().transpose() * pt.p();
    g.Hv = pt.Fv().transpose() * pt.p();
    return g;
  }

  Vec lie_bracket(const ProblemDef &def, int i, int j, const Vec &x, const Vec &u)
  {
    if (i < 0 || j < 0 || i > def.m() || j > def.m())
      throw Error("lie_bracket: index out of range");
    const FieldJet fi = def.field(i, x, u), fj = def.field(j, x, u);
    return fj.dx * fi.value - fi.dx * fj.value;
  }

  Vec hv_dot(const HamiltonianPoint &pt)
  {
    const int m = pt.def().m();
    Vec out(m);
    for (int i = 1; i <= m; ++i)
      out(i - 1) = pt.p().dot(pt.bracket(0, i));
    return out;
  }

  Vec hv_dot(const ProblemDef &def, const Vec &x, const Vec &u, const Vec &p)
  {
    return hv_dot(HamiltonianPoint(def, x, u, Vec::Zero(def.m()), p));
  }

  Vec gamma_udot(const HamiltonianPoint &pt)
  {
    const int l = pt.def().l();
    if (l == 0)
      return Vec(0);
    const Mat huu = pt.Huu();
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (huu + huu.transpose()));
    const Vec &lam = eig.eigenvalues();
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    if (lam.cwiseAbs().minCoeff() <= 1e-12 * scale)
      throw LegendreViolation("H_uu is singular", lam(0));

    const Vec Hx = pt.Fx().transpose() * pt.p();
    const Vec rhs = -pt.Fu().transpose() * Hx + pt.Hux() * pt.F();
    const Mat &Q = eig.eigenvectors();
    return -(Q * (Q.transpose() * rhs).cwiseQuotient(lam));
  }

  Vec gamma_udot(const ProblemDef &def, const Vec &x, const Vec &u, const Vec &v, const Vec &p)
  {
    return gamma_udot(HamiltonianPoint(def, x, u, v, p));
  }

  Vec hv_ddot(const HamiltonianPoint &pt)
  {
    const ProblemDef &def = pt.def();
    const int m = def.m();
    const Vec &p = pt.p();
    const Vec F = pt.F();
    const Vec Hx = pt.Fx().transpose() * p;
    const Vec gamma = gamma_udot(pt);
    const FieldJet &f0 = pt.jet(0);

    Vec out(m);
    for (int i = 1; i <= m; ++i)
    {
      const FieldJet &fi = pt.jet(i);
      const Vec b = fi.dx * f0.value - f0.dx * fi.value;

      // p D_x b and p D_u b as column vectors.
      Vec px = (fi.dx * f0.dx - f0.dx * fi.dx).transpose() * p;
      Vec pu = (fi.dx * f0.du - f0.dx * fi.du).transpose() * p;
      for (int k = 0; k < def.n(); ++k)
      {
        if (p(k) == 0.0)
          continue;
        const auto sk = static_cast<size_t>(k);
        px += p(k) * (fi.dxx[sk].transpose() * f0.value - f0.dxx[sk].transpose() * fi.value);
        if (def.l() > 0)
          pu += p(k) * (fi.dxu[sk].transpose() * f0.value - f0.dxu[sk].transpose() * fi.value);
      }
      out(i - 1) = -Hx.dot(b) + px.dot(F) + (def.l() > 0 ? pu.dot(gamma) : 0.0);
    }
    return out;
  }

  Vec hv_ddot(const ProblemDef &def, const Vec &x, const Vec &u, const Vec &v, const Vec &p)
  {
    return hv_ddot(HamiltonianPoint(def, x, u, v, p));
  }

  Mat elimination_jacobian(const HamiltonianPoint &pt)
  {
    const ProblemDef &def = pt.def();
    const int l = def.l(), m = def.m();
    Mat J = Mat::Zero(l + m, l + m);
    J.topLeftCorner(l, l) = pt.Huu();
    J.topRightCorner(l, m) = pt.Hvu().transpose();

    for (int j = 0; j < l; ++j)
    {
      const double h = 1e-6 * std::max(1.0, std::abs(pt.u()(j)));
      Vec up = pt.u(), um = pt.u();
      up(j) += h;
      um(j) -= h;
      const Vec dp = hv_ddot(HamiltonianPoint(def, pt.x(), up, pt.v(), pt.p()));
      const Vec dm = hv_ddot(HamiltonianPoint(def, pt.x(), um, pt.v(), pt.p()));
      J.block(l, j, m, 1) = -(dp - dm) / (2 * h);
    }
    HamiltonianPoint shifted = pt;
    for (int j = 0; j < m; ++j)
    {
      const double h = 1e-6 * std::max(1.0, std::abs(pt.v()(j)));
      Vec vp = pt.v(), vm = pt.v();
      vp(j) += h;
      vm(j) -= h;
      shifted.set_affine_control(vp);
      const Vec dp = hv_ddot(shifted);
      shifted.set_affine_control(vm);
      const Vec dm = hv_ddot(shifted);
      J.block(l, l + j, m, 1) = -(dp - dm) / (2 * h);
    }
    return J;
  }

  Mat elimination_jacobian(const ProblemDef &def, const Vec &x, const Vec &u, const Vec &v, const Vec &p)
  {
    return elimination_jacobian(HamiltonianPoint(def, x, u, v, p));
  }

} // namespace parshoot
