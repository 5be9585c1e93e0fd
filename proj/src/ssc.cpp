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

#include "parshoot/ssc.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

#include "parshoot/shooting.hpp"

namespace parshoot
{

  namespace
  {

    size_t nodes_of(const TrajectoryGrid &sol)
    {
      const size_t nn = sol.t.size();
      if (nn < 2 || sol.x.size() != nn || sol.u.size() != nn || sol.v.size() != nn)
        throw Error("second-order check: nominal grid is inconsistent");
      return nn;
    }

    void check_direction(const ProblemDef &def, size_t nn, const std::vector<Vec> &w, int dim, const char *what)
    {
      if (w.size() != nn)
        throw Error(std::string(what) + " must have one entry per grid node");
      for (const Vec &e : w)
        if (e.size() != dim)
          throw Error(std::string(what) + " has entries of the wrong dimension");
      (void)def;
    }

    double trapezoid_weight(size_t k, size_t nn, double h)
    {
      return (k == 0 || k + 1 == nn) ? 0.5 * h : h;
    }

    struct LinearBlocks
    {
      Mat Fx, Fu, Fv;
    };

    LinearBlocks linear_blocks(const ProblemDef &def, const Vec &x, const Vec &u, const Vec &v)
    {
      const int n = def.n(), m = def.m();
      const FieldJet f0 = def.field(0, x, u);
      LinearBlocks b{f0.dx, f0.du, Mat(n, m)};
      for (int i = 1; i <= m; ++i)
      {
        const FieldJet fi = def.field(i, x, u);
        b.Fx += v(i - 1) * fi.dx;
        b.Fu += v(i - 1) * fi.du;
        b.Fv.col(i - 1) = fi.value;
      }
      return b;
    }

    Mat fv_at(const ProblemDef &def, const Vec &x, const Vec &u)
    {
      Mat fv(def.n(), def.m());
      for (int i = 1; i <= def.m(); ++i)
        fv.col(i - 1) = def.field(i, x, u).value;
      return fv;
    }

    // Central differences inside, second-order one-sided at the ends.
    Mat time_derivative(const std::vector<Mat> &X, size_t k, double h)
    {
      const size_t N = X.size() - 1;
      if (N == 1)
        return (X[1] - X[0]) / h;
      if (k == 0)
        return (-3.0 * X[0] + 4.0 * X[1] - X[2]) / (2.0 * h);
      if (k == N)
        return (3.0 * X[N] - 4.0 * X[N - 1] + X[N - 2]) / (2.0 * h);
      return (X[k + 1] - X[k - 1]) / (2.0 * h);
    }

    double sup(const Mat &a)
    {
      return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
    }

  } // namespace

  LinearizedDirection propagate_linearized(const ProblemDef &def, const TrajectoryGrid &sol, const Vec &x0bar,
                                           const std::vector<Vec> &ubar, const std::vector<Vec> &vbar,
                                           LinearScheme scheme)
  {
    const size_t nn = nodes_of(sol);
    const int n = def.n();
    if (x0bar.size() != n)
      throw Error("propagate_linearized: x0bar has the wrong dimension");
    check_direction(def, nn, ubar, def.l(), "ubar");
    check_direction(def, nn, vbar, def.m(), "vbar");

    const double h = sol.step();
    const Mat I = Mat::Identity(n, n);
    LinearizedDirection dir{std::vector<Vec>(nn), ubar, vbar};
    dir.xbar[0] = x0bar;
    LinearBlocks cur = linear_blocks(def, sol.x[0], sol.u[0], sol.v[0]);
    for (size_t k = 0; k + 1 < nn; ++k)
    {
      LinearBlocks next = linear_blocks(def, sol.x[k + 1], sol.u[k + 1], sol.v[k + 1]);
      const Vec g1 = next.Fu * ubar[k + 1] + next.Fv * vbar[k + 1];
      if (scheme == LinearScheme::implicit_euler)
      {
        dir.xbar[k + 1] = (I - h * next.Fx).partialPivLu().solve(dir.xbar[k] + h * g1);
      }
      else
      {
        const Vec g0 = cur.Fu * ubar[k] + cur.Fv * vbar[k];
        const Vec rhs = dir.xbar[k] + 0.5 * h * (cur.Fx * dir.xbar[k] + g0 + g1);
        dir.xbar[k + 1] = (I - 0.5 * h * next.Fx).partialPivLu().solve(rhs);
      }
      cur = std::move(next);
    }
    return dir;
  }

  GohDirection goh_transform(const ProblemDef &def, const TrajectoryGrid &sol, const LinearizedDirection &dir)
  {
    const size_t nn = nodes_of(sol);
    check_direction(def, nn, dir.xbar, def.n(), "xbar");
    check_direction(def, nn, dir.ubar, def.l(), "ubar");
    check_direction(def, nn, dir.vbar, def.m(), "vbar");

    const double h = sol.step();
    GohDirection g{std::vector<Vec>(nn), dir.ubar, std::vector<Vec>(nn), Vec()};
    g.ybar[0] = Vec::Zero(def.m());
    for (size_t k = 0; k + 1 < nn; ++k)
      g.ybar[k + 1] = g.ybar[k] + 0.5 * h * (dir.vbar[k] + dir.vbar[k + 1]);
    for (size_t k = 0; k < nn; ++k)
      g.xibar[k] = dir.xbar[k] - fv_at(def, sol.x[k], sol.u[k]) * g.ybar[k];
    g.hbar = g.ybar.back();
    return g;
  }

  std::vector<Vec> goh_inverse_state(const ProblemDef &def, const TrajectoryGrid &sol, const GohDirection &gdir)
  {
    const size_t nn = nodes_of(sol);
    check_direction(def, nn, gdir.xibar, def.n(), "xibar");
    check_direction(def, nn, gdir.ybar, def.m(), "ybar");
    std::vector<Vec> x(nn);
    for (size_t k = 0; k < nn; ++k)
      x[k] = gdir.xibar[k] + fv_at(def, sol.x[k], sol.u[k]) * gdir.ybar[k];
    return x;
  }

  NominalData::NominalData(const ProblemDef &def, const TrajectoryGrid &sol, const Multiplier &lambda)
  {
    const size_t nn = nodes_of(sol);
    if (lambda.p.size() != nn)
      throw Error("second-order check: multiplier grid does not match the trajectory");
    if (lambda.beta.size() != def.d_eta())
      throw Error("second-order check: beta has the wrong dimension");
    h_ = sol.step();

    nodes_.resize(nn);
    for (size_t k = 0; k < nn; ++k)
    {
      const HamiltonianPoint pt(def, sol.x[k], sol.u[k], sol.v[k], lambda.p[k]);
      nodes_[k] = {pt.Fx(), pt.Fu(), pt.Fv(), pt.Hxx(), pt.Hux(), pt.Huu(), pt.Hvx(), pt.Hvu()};
    }

    std::vector<Mat> fv(nn), hvx(nn), s(nn);
    for (size_t k = 0; k < nn; ++k)
    {
      fv[k] = nodes_[k].Fv;
      hvx[k] = nodes_[k].Hvx;
      const Mat hf = nodes_[k].Hvx * nodes_[k].Fv;
      s[k] = 0.5 * (hf + hf.transpose());
    }

    coeffs_.resize(nn);
    for (size_t k = 0; k < nn; ++k)
    {
      const Node &d = nodes_[k];
      OmegaBarCoeffs &c = coeffs_[k];
      const Mat hf = d.Hvx * d.Fv;
      c.Fv = d.Fv;
      c.B = d.Fx * d.Fv - time_derivative(fv, k, h_);
      c.M = d.Fv.transpose() * d.Hxx - time_derivative(hvx, k, h_) - d.Hvx * d.Fx;
      c.J = d.Fv.transpose() * d.Hux.transpose() - d.Hvx * d.Fu;
      c.S = s[k];
      c.V = 0.5 * (hf - hf.transpose());
      const Mat hb = d.Hvx * c.B;
      c.R = d.Fv.transpose() * d.Hxx * d.Fv - (hb + hb.transpose()) - time_derivative(s, k, h_);
    }

    const Vec &x0 = sol.x.front(), &xT = sol.x.back();
    lpp_ = endpoint_lagrangian(def, lambda.beta, x0, xT).hess;
    dphi_ = def.cost(x0, xT).grad;
    deta_.resize(def.d_eta(), 2 * def.n());
    for (int j = 0; j < def.d_eta(); ++j)
      deta_.row(j) = def.constraint(j, x0, xT).grad.transpose();
  }

  double second_variation_omega(const ProblemDef &def, const TrajectoryGrid &sol, const Multiplier &lambda,
                                const LinearizedDirection &dir)
  {
    const size_t nn = nodes_of(sol);
    check_direction(def, nn, dir.xbar, def.n(), "xbar");
    check_direction(def, nn, dir.ubar, def.l(), "ubar");
    check_direction(def, nn, dir.vbar, def.m(), "vbar");
    const NominalData nom(def, sol, lambda);

    double integral = 0.0;
    for (size_t k = 0; k < nn; ++k)
    {
      const auto &d = nom.node(static_cast<int>(k));
      const Vec &x = dir.xbar[k], &u = dir.ubar[k], &v = dir.vbar[k];
      const double f = 0.5 * x.dot(d.Hxx * x) + u.dot(d.Hux * x) + v.dot(d.Hvx * x) + 0.5 * u.dot(d.Huu * u) +
                       v.dot(d.Hvu * u);
      integral += trapezoid_weight(k, nn, nom.step()) * f;
    }
    Vec ends(2 * def.n());
    ends << dir.xbar.front(), dir.xbar.back();
    return 0.5 * ends.dot(nom.endpoint_hessian() * ends) + integral;
  }

  OmegaBarCoeffs omega_bar_coeffs(const ProblemDef &def, const TrajectoryGrid &sol, const Multiplier &lambda, int k)
  {
    if (k < 0 || k > sol.intervals())
      throw Error("omega_bar_coeffs: node index out of range");
    return NominalData(def, sol, lambda).coeffs(k);
  }

  double omega_bar(const NominalData &nom, const GohDirection &gdir)
  {
    const size_t nn = static_cast<size_t>(nom.intervals()) + 1;
    if (gdir.xibar.size() != nn || gdir.ubar.size() != nn || gdir.ybar.size() != nn)
      throw Error("omega_bar: direction grid does not match the nominal grid");

    double integral = 0.0;
    for (size_t k = 0; k < nn; ++k)
    {
      const auto &d = nom.node(static_cast<int>(k));
      const OmegaBarCoeffs &c = nom.coeffs(static_cast<int>(k));
      const Vec &xi = gdir.xibar[k], &u = gdir.ubar[k], &y = gdir.ybar[k];
      const double f = 0.5 * xi.dot(d.Hxx * xi) + u.dot(d.Hux * xi) + y.dot(c.M * xi) + 0.5 * u.dot(d.Huu * u) +
                       y.dot(c.J * u) + 0.5 * y.dot(c.R * y);
      integral += trapezoid_weight(k, nn, nom.step()) * f;
    }

    const auto &end = nom.node(nom.intervals());
    const OmegaBarCoeffs &cend = nom.coeffs(nom.intervals());
    const Vec &hb = gdir.hbar;
    Vec zeta(2 * gdir.xibar.front().size());
    zeta << gdir.xibar.front(), gdir.xibar.back() + end.Fv * hb;
    const double g = 0.5 * zeta.dot(nom.endpoint_hessian() * zeta) +
                     hb.dot(end.Hvx * gdir.xibar.back() + 0.5 * cend.S * hb);
    return integral + g;
  }

  double omega_bar(const ProblemDef &def, const TrajectoryGrid &sol, const Multiplier &lambda,
                   const GohDirection &gdir)
  {
    const size_t nn = nodes_of(sol);
    check_direction(def, nn, gdir.xibar, def.n(), "xibar");
    check_direction(def, nn, gdir.ubar, def.l(), "ubar");
    check_direction(def, nn, gdir.ybar, def.m(), "ybar");
    if (gdir.hbar.size() != def.m())
      throw Error("omega_bar: hbar has the wrong dimension");
    return omega_bar(NominalData(def, sol, lambda), gdir);
  }

  double gamma_order_bar(const Vec &zeta0, const std::vector<Vec> &ubar, const std::vector<Vec> &ybar,
                         const Vec &hbar, double h)
  {
    if (!ubar.empty() && !ybar.empty() && ubar.size() != ybar.size())
      throw Error("gamma_order_bar: ubar and ybar grids differ");
    double integral = 0.0;
    for (size_t k = 0; k < ubar.size(); ++k)
      integral += trapezoid_weight(k, ubar.size(), h) * ubar[k].squaredNorm();
    for (size_t k = 0; k < ybar.size(); ++k)
      integral += trapezoid_weight(k, ybar.size(), h) * ybar[k].squaredNorm();
    return zeta0.squaredNorm() + hbar.squaredNorm() + integral;
  }

  double gamma_order(const Vec &zeta0, const std::vector<Vec> &ubar, const std::vector<Vec> &vbar, double h)
  {
    if (vbar.empty())
      return gamma_order_bar(zeta0, ubar, {}, Vec(), h);
    std::vector<Vec> y(vbar.size());
    y[0] = Vec::Zero(vbar[0].size());
    for (size_t k = 0; k + 1 < vbar.size(); ++k)
      y[k + 1] = y[k] + 0.5 * h * (vbar[k] + vbar[k + 1]);
    return gamma_order_bar(zeta0, ubar, y, y.back(), h);
  }

  double Lemma1Report::worst() const
  {
    return std::max({huv, brackets, v_antisym, hu, hv_ddot});
  }

  Lemma1Report check_necessary(const ProblemDef &def, const TrajectoryGrid &sol, const Multiplier &lambda)
  {
    const NominalData nom(def, sol, lambda);
    const size_t nn = sol.t.size();
    const int m = def.m();
    Lemma1Report r;
    for (size_t k = 0; k < nn; ++k)
    {
      const HamiltonianPoint pt(def, sol.x[k], sol.u[k], sol.v[k], lambda.p[k]);
      r.huv = std::max(r.huv, sup(nom.node(static_cast<int>(k)).Hvu));
      r.v_antisym = std::max(r.v_antisym, sup(nom.coeffs(static_cast<int>(k)).V));
      for (int i = 1; i <= m; ++i)
        for (int j = i + 1; j <= m; ++j)
          r.brackets = std::max(r.brackets, std::abs(lambda.p[k].dot(pt.bracket(i, j))));
      r.hu = std::max(r.hu, sup(h_gradients(pt).Hu));
      if (m > 0)
      {
        try
        {
          r.hv_ddot = std::max(r.hv_ddot, sup(hv_ddot(pt)));
        }
        catch (const LegendreViolation &)
        {
          r.hv_ddot = std::numeric_limits<double>::infinity();
        }
      }
    }
    r.passed = r.worst() <= r.threshold;
    return r;
  }

  CoercivityPencil assemble_pencil(const NominalData &nom)
  {
    const int N = nom.intervals();
    const auto &n0 = nom.node(0);
    const int n = static_cast<int>(n0.Fx.rows()), l = static_cast<int>(n0.Fu.cols()),
              m = static_cast<int>(n0.Fv.cols());
    const int d = static_cast<int>(nom.constraint_rows().rows());
    const int dim = n + (N + 1) * (l + m) + m;
    const double h = nom.step();
    const auto iu = [&](int k) { return n + k * l; };
    const auto iy = [&](int k) { return n + (N + 1) * l + k * m; };
    const int ih = n + (N + 1) * (l + m);
    const auto weight = [&](int k) { return trapezoid_weight(static_cast<size_t>(k), static_cast<size_t>(N) + 1, h); };

    // Stacked state maps xi_k = P.block(k n, 0, n, dim) z.
    Mat P = Mat::Zero((N + 1) * n, dim);
    P.block(0, 0, n, n).setIdentity();
    const Mat I = Mat::Identity(n, n);
    for (int k = 0; k < N; ++k)
    {
      const auto &a = nom.node(k), &b = nom.node(k + 1);
      Mat T = (I + 0.5 * h * a.Fx) * P.middleRows(k * n, n);
      T.middleCols(iu(k), l) += 0.5 * h * a.Fu;
      T.middleCols(iu(k + 1), l) += 0.5 * h * b.Fu;
      T.middleCols(iy(k), m) += 0.5 * h * nom.coeffs(k).B;
      T.middleCols(iy(k + 1), m) += 0.5 * h * nom.coeffs(k + 1).B;
      P.middleRows((k + 1) * n, n) = (I - 0.5 * h * b.Fx).partialPivLu().solve(T);
    }

    // Omega-bar = 1/2 z^T Q z.
    Mat WP(P.rows(), dim);
    for (int k = 0; k <= N; ++k)
      WP.middleRows(k * n, n) = weight(k) * nom.node(k).Hxx * P.middleRows(k * n, n);
    Mat Q = P.transpose() * WP;
    for (int k = 0; k <= N; ++k)
    {
      const double w = weight(k);
      const auto &nd = nom.node(k);
      const OmegaBarCoeffs &c = nom.coeffs(k);
      const auto Pk = P.middleRows(k * n, n);
      const Mat ux = w * nd.Hux * Pk;
      const Mat yx = w * c.M * Pk;
      Q.middleRows(iu(k), l) += ux;
      Q.middleCols(iu(k), l) += ux.transpose();
      Q.middleRows(iy(k), m) += yx;
      Q.middleCols(iy(k), m) += yx.transpose();
      Q.block(iu(k), iu(k), l, l) += w * nd.Huu;
      Q.block(iy(k), iu(k), m, l) += w * c.J;
      Q.block(iu(k), iy(k), l, m) += w * c.J.transpose();
      Q.block(iy(k), iy(k), m, m) += w * c.R;
    }

    const auto PN = P.middleRows(N * n, n);
    Mat E(2 * n, dim);
    E.topRows(n) = P.topRows(n);
    E.bottomRows(n) = PN;
    E.block(n, ih, n, m) += nom.node(N).Fv;
    Q += E.transpose() * nom.endpoint_hessian() * E;
    const Mat hx = nom.node(N).Hvx * PN;
    Q.middleRows(ih, m) += hx;
    Q.middleCols(ih, m) += hx.transpose();
    Q.block(ih, ih, m, m) += nom.coeffs(N).S;

    CoercivityPencil out;
    out.A = 0.25 * (Q + Q.transpose());
    out.g = Vec::Ones(dim);
    for (int k = 0; k <= N; ++k)
    {
      out.g.segment(iu(k), l).setConstant(weight(k));
      out.g.segment(iy(k), m).setConstant(weight(k));
    }
    out.C.resize(d + 1, dim);
    out.C.topRows(d) = nom.constraint_rows() * E;
    out.C.bottomRows(1) = nom.cost_row().transpose() * E;
    return out;
  }

  PencilSolution solve_pencil(const CoercivityPencil &pencil)
  {
    const Eigen::Index dim = pencil.A.rows();
    if (pencil.g.size() != dim || pencil.C.cols() != dim)
      throw InternalError("coercivity pencil blocks have inconsistent sizes");
    if (!(pencil.g.minCoeff() > 0.0))
      throw InternalError("gamma-bar Gram matrix is not positive definite on the free coordinates");

    // Whiten gamma-bar so the pencil becomes a standard symmetric problem.
    const Vec s = pencil.g.cwiseSqrt().cwiseInverse();
    const Mat A = s.asDiagonal() * pencil.A * s.asDiagonal();
    const Mat C = pencil.C * s.asDiagonal();

    Mat Z;
    if (C.rows() == 0 || C.cwiseAbs().maxCoeff() == 0.0)
    {
      Z = Mat::Identity(dim, dim);
    }
    else
    {
      Eigen::ColPivHouseholderQR<Mat> qr(C.transpose());
      qr.setThreshold(1e-10);
      const Eigen::Index r = qr.rank();
      const Mat H = qr.householderQ();
      Z = H.rightCols(dim - r);
    }
    PencilSolution out;
    out.cone_dimension = static_cast<int>(Z.cols());
    if (Z.cols() == 0)
    {
      out.rho = std::numeric_limits<double>::infinity();
      return out;
    }
    const Mat Ar = Z.transpose() * A * Z;
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (Ar + Ar.transpose()), Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
      throw InternalError("symmetric eigenvalue solver failed on the coercivity pencil");
    out.rho = eig.eigenvalues()(0);
    return out;
  }

  SSCReport coercivity_check(const ProblemDef &def, const TrajectoryGrid &sol, const Multiplier &lambda)
  {
    const size_t nn = nodes_of(sol);
    if (lambda.p.size() != nn)
      throw Error("coercivity_check: multiplier grid does not match the trajectory");

    const int n = def.n(), m = def.m(), d = def.d_eta();
    const Vec &x0 = sol.x.front(), &xT = sol.x.back();
    const EndpointLagrangian ell = endpoint_lagrangian(def, lambda.beta, x0, xT);
    Vec s(d + 2 * n + 2 * m);
    for (int j = 0; j < d; ++j)
      s(j) = def.constraint(j, x0, xT).value;
    s.segment(d, n) = lambda.p.front() + ell.grad_x0;
    s.segment(d + n, n) = lambda.p.back() - ell.grad_xT;
    if (m > 0)
    {
      s.segment(d + 2 * n, m) = fv_at(def, xT, sol.u.back()).transpose() * lambda.p.back();
      s.tail(m) = hv_dot(def, x0, sol.u.front(), lambda.p.front());
    }

    SSCReport rep;
    rep.grid = sol.intervals();
    rep.extremal_residual = sup(s);
    if (!(rep.extremal_residual <= 1e-8))
      throw Error("coercivity_check: trajectory is not an extremal for the multiplier (residual " +
                  std::to_string(rep.extremal_residual) + ")");

    const NominalData nom(def, sol, lambda);
    const CoercivityPencil pencil = assemble_pencil(nom);
    const PencilSolution ps = solve_pencil(pencil);
    rep.rho_hat = ps.rho;
    rep.free_dimension = static_cast<int>(pencil.A.rows());
    rep.cone_dimension = ps.cone_dimension;
    rep.legendre = check_legendre(def, sol);
    rep.lemma1 = check_necessary(def, sol, lambda);
    rep.coercive = rep.rho_hat > 0.0 && rep.lemma1.passed;
    return rep;
  }

} // namespace parshoot
