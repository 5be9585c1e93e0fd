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

// Extra problems and independent reference solutions shared by the tests.

#ifndef PARSHOOT_TESTS_TEST_PROBLEMS_HPP
#define PARSHOOT_TESTS_TEST_PROBLEMS_HPP

#include <cmath>
#include <random>

#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include "parshoot/shooting.hpp"
#include "parshoot/ssc.hpp"

namespace parshoot::testing
{

  inline Vec vec(std::initializer_list<double> xs)
  {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs)
      v(i++) = x;
    return v;
  }

  inline FieldJet first_order_jet(Vec value, Mat dx, Mat du)
  {
    FieldJet j;
    j.value = std::move(value);
    j.dx = std::move(dx);
    j.du = std::move(du);
    return j;
  }

  inline ScalarJet zero_endpoint(int n)
  {
    return {0.0, Vec::Zero(2 * n), Mat::Zero(2 * n, 2 * n)};
  }

  /// eta_j = x0_j for j < n.
  inline std::vector<EndpointFn> initial_state_constraints(int n)
  {
    std::vector<EndpointFn> out;
    for (int j = 0; j < n; ++j)
      out.push_back([n, j](const Vec &x0, const Vec &) {
        ScalarJet s = zero_endpoint(n);
        s.value = x0(j);
        s.grad(j) = 1.0;
        return s;
      });
    return out;
  }

  /// n = 2, l = 0, m = 1: x1' = v, x2' = x1^2, cost x2(T).
  inline ProblemDef no_nonlinear_control_problem()
  {
    Dimensions d{2, 0, 1, 2, 1.0};
    FieldFn f0 = [](const Vec &x, const Vec &) {
      Mat dx = Mat::Zero(2, 2);
      dx(1, 0) = 2.0 * x(0);
      FieldJet j = first_order_jet(vec({0.0, x(0) * x(0)}), dx, Mat(2, 0));
      j.dxx.assign(2, Mat::Zero(2, 2));
      j.dxx[1](0, 0) = 2.0;
      j.dxu.assign(2, Mat(2, 0));
      j.duu.assign(2, Mat(0, 0));
      return j;
    };
    FieldFn f1 = [](const Vec &, const Vec &) {
      FieldJet j = first_order_jet(vec({1.0, 0.0}), Mat::Zero(2, 2), Mat(2, 0));
      j.dxx.assign(2, Mat::Zero(2, 2));
      j.dxu.assign(2, Mat(2, 0));
      j.duu.assign(2, Mat(0, 0));
      return j;
    };
    EndpointFn cost = [](const Vec &, const Vec &xT) {
      ScalarJet s = zero_endpoint(2);
      s.value = xT(1);
      s.grad(3) = 1.0;
      return s;
    };
    return ProblemDef("no-u", d, {f0, f1}, cost, initial_state_constraints(2));
  }

  /// ds-example with the first initial constraint repeated.
  inline ProblemDef duplicated_constraint_problem()
  {
    const ProblemDef ds = builtin_problem("ds-example");
    std::vector<EndpointFn> eta = ds.constraint_fns();
    eta.push_back(eta.front());
    Dimensions d = ds.dims();
    d.d_eta = 4;
    return ProblemDef("ds-duplicated", d, ds.fields(), ds.cost_fn(), eta);
  }

  /// ds-example whose drift reports a sign-flipped x-derivative entry.
  inline ProblemDef wrong_derivative_problem()
  {
    const ProblemDef ds = builtin_problem("ds-example");
    std::vector<FieldFn> fields = ds.fields();
    const FieldFn good = fields[0];
    fields[0] = [good](const Vec &x, const Vec &u) {
      FieldJet j = good(x, u);
      j.dx(0, 1) = -j.dx(0, 1);
      return j;
    };
    return ProblemDef("ds-wrong", ds.dims(), fields, ds.cost_fn(), ds.constraint_fns());
  }

  /**
   * n = 3, l = 1, m = 2 with non-commuting affine fields:
   *   f0 = (x2 + u, x1 x3, x1^2 + u^2), f1 = (1, x3, 0), f2 = (x2, 0, 1 + x1 u).
   * Second derivatives are synthesized by finite differences. With
   * u_free_affine_fields the last entry of f2 becomes 1 + x1^2.
   */
  inline ProblemDef two_affine_controls_problem(bool u_free_affine_fields = false)
  {
    Dimensions d{3, 1, 2, 3, 1.0};
    FieldFn f0 = [](const Vec &x, const Vec &u) {
      Mat dx(3, 3), du(3, 1);
      dx << 0, 1, 0, x(2), 0, x(0), 2 * x(0), 0, 0;
      du << 1, 0, 2 * u(0);
      return first_order_jet(vec({x(1) + u(0), x(0) * x(2), x(0) * x(0) + u(0) * u(0)}), dx, du);
    };
    FieldFn f1 = [](const Vec &x, const Vec &) {
      Mat dx = Mat::Zero(3, 3);
      dx(1, 2) = 1.0;
      return first_order_jet(vec({1.0, x(2), 0.0}), dx, Mat::Zero(3, 1));
    };
    FieldFn f2 = [u_free_affine_fields](const Vec &x, const Vec &u) {
      const double w = u_free_affine_fields ? x(0) : u(0);
      Mat dx = Mat::Zero(3, 3), du = Mat::Zero(3, 1);
      dx(0, 1) = 1.0;
      dx(2, 0) = u_free_affine_fields ? 2 * x(0) : u(0);
      if (!u_free_affine_fields)
        du(2, 0) = x(0);
      return first_order_jet(vec({x(1), 0.0, 1.0 + x(0) * w}), dx, du);
    };
    EndpointFn cost = [](const Vec &, const Vec &xT) {
      ScalarJet s = zero_endpoint(3);
      s.value = xT(2);
      s.grad(5) = 1.0;
      return s;
    };
    return ProblemDef::with_fd_second_derivatives("two-affine", d, {f0, f1, f2}, cost,
                                                  initial_state_constraints(3));
  }

  /// ds-example plus a clock x4' = 1 that scales the u^2 cost by (1/2 - x4): H_uu vanishes at t = 1/2.
  inline ProblemDef degenerating_legendre_problem()
  {
    Dimensions d{4, 1, 1, 4, 1.0};
    FieldFn f0 = [](const Vec &x, const Vec &u) {
      const double c = 0.5 - x(3);
      Mat dx = Mat::Zero(4, 4), du(4, 1);
      dx(0, 1) = 1.0;
      dx(2, 0) = 2 * x(0);
      dx(2, 1) = 2 * x(1);
      dx(2, 3) = -u(0) * u(0);
      du << 1, 0, 2 * c * u(0), 0;
      return first_order_jet(vec({x(1) + u(0), 0.0, x(0) * x(0) + x(1) * x(1) + c * u(0) * u(0), 1.0}), dx, du);
    };
    FieldFn f1 = [](const Vec &x, const Vec &) {
      Mat dx = Mat::Zero(4, 4);
      dx(2, 1) = 10.0;
      return first_order_jet(vec({0.0, 1.0, 10.0 * x(1), 0.0}), dx, Mat::Zero(4, 1));
    };
    EndpointFn cost = [](const Vec &, const Vec &xT) {
      ScalarJet s = zero_endpoint(4);
      s.value = xT(2);
      s.grad(6) = 1.0;
      return s;
    };
    return ProblemDef::with_fd_second_derivatives("degenerating", d, {f0, f1}, cost, initial_state_constraints(4));
  }

  /**
   * Exact solution of the ds-example optimality system for constant p3 = c:
   * u = -p1 / (2c), v = x1 makes (x1, x2, p1, p2) linear, so it is advanced by
   * the matrix exponential; x3 follows by composite Simpson quadrature of
   * x1^2 + x2^2 + 10 x1 x2 + u^2.
   */
  struct DsReference
  {
    Vec x;
    Vec p;
  };

  inline Mat ds_linear_matrix(double c)
  {
    Mat A(4, 4);
    // z = (x1, x2, p1, p2)
    A << 0, 1, -0.5 / c, 0, //
        1, 0, 0, 0,          //
        -2 * c, 0, 0, 0,     //
        -10 * c, -2 * c, -1, 0;
    return A;
  }

  inline DsReference ds_reference(const Vec &x0, const Vec &p0, double t, int simpson_panels = 4000)
  {
    const double c = p0(2);
    const Mat A = ds_linear_matrix(c);
    Vec z0(4);
    z0 << x0(0), x0(1), p0(0), p0(1);
    auto rate = [&](double s) {
      const Vec z = (A * s).exp() * z0;
      return z(0) * z(0) + z(1) * z(1) + 10 * z(1) * z(0) + z(2) * z(2) / (4 * c * c);
    };
    const int P = simpson_panels;
    const double h = t / P;
    double integral = rate(0.0) + rate(t);
    for (int i = 1; i < P; ++i)
      integral += (i % 2 ? 4.0 : 2.0) * rate(i * h);
    integral *= h / 3.0;
    const Vec z = (A * t).exp() * z0;
    DsReference r{Vec(3), Vec(3)};
    r.x << z(0), z(1), x0(2) + integral;
    r.p << z(2), z(3), c;
    return r;
  }

  /**
   * ds-reduced residual under implicit Euler, computed from the 4 x 4 linear
   * recursion z_{k+1} = (I - hA)^{-1} z_k. Exact for the discrete scheme since
   * the reduced residual rows do not involve x3.
   */
  inline Vec ds_reduced_implicit_euler_residual(const Vec &nu, int N)
  {
    const double h = 1.0 / N;
    const Mat step = (Mat::Identity(4, 4) - h * ds_linear_matrix(1.0)).inverse();
    Vec z(4);
    z << 0, 0, nu(0), nu(1);
    for (int k = 0; k < N; ++k)
      z = step * z;
    return vec({z(2) + 2 * z(1), z(3) + 2 * z(0), z(3) + 10 * z(1)});
  }

  /// Trajectory and multiplier of the zero extremal of ds-example (p = (0, 0, 1), beta = (0, 0, -1)).
  struct Extremal
  {
    TrajectoryGrid traj;
    Multiplier lambda;
  };

  inline Extremal ds_zero_extremal(int N)
  {
    const ProblemDef ds = builtin_problem("ds-example");
    ShootingPoint pt{Vec::Zero(3), vec({0, 0, 1}), vec({0, 0, -1})};
    Extremal e;
    full_shooting_residual(ds, pt, N, Scheme::implicit_euler, &e.traj);
    e.lambda = multiplier_from(e.traj, pt.beta);
    return e;
  }

  /// Smooth random scalar signal on the grid: a + b t + c sin(pi t) + d cos(2 pi t).
  inline std::vector<Vec> smooth_signal(const std::vector<double> &t, int dim, std::mt19937_64 &rng)
  {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<Vec> out(t.size(), Vec(dim));
    for (int i = 0; i < dim; ++i)
    {
      const double a = U(rng), b = U(rng), c = U(rng), d = U(rng);
      for (size_t k = 0; k < t.size(); ++k)
        out[k](i) = a + b * t[k] + c * std::sin(M_PI * t[k]) + d * std::cos(2 * M_PI * t[k]);
    }
    return out;
  }

  inline std::vector<Vec> constant_signal(size_t nodes, const Vec &value)
  {
    return std::vector<Vec>(nodes, value);
  }

} // namespace parshoot::testing

#endif
