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

#include "parshoot/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace parshoot
{

  namespace
  {

    std::string shape(const Mat &a)
    {
      return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
    }

    void expect_shape(const std::string &evaluator, const std::string &part, const Mat &a, long rows, long cols)
    {
      if (a.rows() != rows || a.cols() != cols)
      {
        throw ConstructionError(evaluator, part + " has shape " + shape(a) + ", expected " + std::to_string(rows) +
                                               "x" + std::to_string(cols));
      }
    }

    void expect_tensor(const std::string &evaluator, const std::string &part, const std::vector<Mat> &t, long count,
                       long rows, long cols)
    {
      if (static_cast<long>(t.size()) != count)
      {
        throw ConstructionError(evaluator, part + " has " + std::to_string(t.size()) + " slices, expected " +
                                               std::to_string(count));
      }
      for (const auto &slice : t)
        expect_shape(evaluator, part + " slice", slice, rows, cols);
    }

    FieldFn synthesize_second_derivatives(FieldFn first_order, int n, int l)
    {
      return [fn = std::move(first_order), n, l](const Vec &x, const Vec &u) {
        constexpr double h = 1e-5;
        FieldJet jet = fn(x, u);
        jet.dxx.assign(static_cast<size_t>(n), Mat::Zero(n, n));
        jet.dxu.assign(static_cast<size_t>(n), Mat::Zero(n, l));
        jet.duu.assign(static_cast<size_t>(n), Mat::Zero(l, l));
        for (int b = 0; b < n; ++b)
        {
          Vec xp = x, xm = x;
          xp(b) += h;
          xm(b) -= h;
          const FieldJet jp = fn(xp, u), jm = fn(xm, u);
          const Mat ddx = (jp.dx - jm.dx) / (2 * h);
          for (int k = 0; k < n; ++k)
            jet.dxx[static_cast<size_t>(k)].col(b) = ddx.row(k).transpose();
        }
        for (int j = 0; j < l; ++j)
        {
          Vec up = u, um = u;
          up(j) += h;
          um(j) -= h;
          const FieldJet jp = fn(x, up), jm = fn(x, um);
          const Mat ddx = (jp.dx - jm.dx) / (2 * h);
          const Mat ddu = (jp.du - jm.du) / (2 * h);
          for (int k = 0; k < n; ++k)
          {
            jet.dxu[static_cast<size_t>(k)].col(j) = ddx.row(k).transpose();
            jet.duu[static_cast<size_t>(k)].col(j) = ddu.row(k).transpose();
          }
        }
        for (auto &hxx : jet.dxx)
          hxx = (0.5 * (hxx + hxx.transpose())).eval();
        for (auto &huu : jet.duu)
          huu = (0.5 * (huu + huu.transpose())).eval();
        return jet;
      };
    }

  } // namespace

  ProblemDef::ProblemDef(std::string name, Dimensions dims, std::vector<FieldFn> fields, EndpointFn cost,
                         std::vector<EndpointFn> constraints, std::optional<ShootingReduction> reduction)
      : name_(std::move(name)), dims_(dims), fields_(std::move(fields)), cost_(std::move(cost)),
        constraints_(std::move(constraints)), reduction_(std::move(reduction))
  {
    check_shapes();
  }

  ProblemDef ProblemDef::with_fd_second_derivatives(std::string name, Dimensions dims, std::vector<FieldFn> fields,
                                                    EndpointFn cost, std::vector<EndpointFn> constraints,
                                                    std::optional<ShootingReduction> reduction)
  {
    for (auto &f : fields)
      f = synthesize_second_derivatives(std::move(f), dims.n, dims.l);
    return ProblemDef(std::move(name), dims, std::move(fields), std::move(cost), std::move(constraints),
                      std::move(reduction));
  }

  void ProblemDef::check_shapes() const
  {
    const int n = dims_.n, l = dims_.l, m = dims_.m;
    if (n < 1 || l < 0 || m < 0 || dims_.d_eta < 0 || !(dims_.horizon > 0))
      throw ConstructionError("dimensions", "n >= 1, l, m, d_eta >= 0 and T > 0 required");
    if (static_cast<int>(fields_.size()) != m + 1)
      throw ConstructionError("fields", "expected m+1 = " + std::to_string(m + 1) + " vector fields, got " +
                                            std::to_string(fields_.size()));
    if (static_cast<int>(constraints_.size()) != dims_.d_eta)
      throw ConstructionError("eta", "expected " + std::to_string(dims_.d_eta) + " constraints, got " +
                                         std::to_string(constraints_.size()));
    const Vec x = Vec::Zero(n), u = Vec::Zero(l);
    for (int i = 0; i <= m; ++i)
    {
      const std::string who = "f_" + std::to_string(i);
      const FieldJet jet = fields_[static_cast<size_t>(i)](x, u);
      expect_shape(who, "value", jet.value, n, 1);
      expect_shape(who, "x-derivative", jet.dx, n, n);
      expect_shape(who, "u-derivative", jet.du, n, l);
      expect_tensor(who, "xx-derivative", jet.dxx, n, n, n);
      expect_tensor(who, "xu-derivative", jet.dxu, n, n, l);
      expect_tensor(who, "uu-derivative", jet.duu, n, l, l);
    }
    auto check_endpoint = [&](const std::string &who, const ScalarJet &jet) {
      expect_shape(who, "gradient", jet.grad, 2 * n, 1);
      expect_shape(who, "hessian", jet.hess, 2 * n, 2 * n);
    };
    check_endpoint("phi_0", cost_(x, x));
    for (int j = 0; j < dims_.d_eta; ++j)
      check_endpoint("eta_" + std::to_string(j + 1), constraints_[static_cast<size_t>(j)](x, x));

    if (reduction_)
    {
      const int full = 2 * n + dims_.d_eta;
      expect_shape("reduction", "offset", reduction_->offset, full, 1);
      if (reduction_->embed.rows() != full)
        throw ConstructionError("reduction", "embed must have " + std::to_string(full) + " rows");
      const int rows = dims_.d_eta + 2 * n + 2 * m;
      for (int r : reduction_->rows)
        if (r < 0 || r >= rows)
          throw ConstructionError("reduction", "residual row " + std::to_string(r) + " out of range");
    }
  }

  Vec ProblemDef::dynamics(const Vec &x, const Vec &u, const Vec &v) const
  {
    Vec out = fields_[0](x, u).value;
    for (int i = 1; i <= dims_.m; ++i)
      out += v(i - 1) * fields_[static_cast<size_t>(i)](x, u).value;
    return out;
  }

  int ProblemDef::shooting_unknowns() const
  {
    return reduction_ ? static_cast<int>(reduction_->embed.cols()) : 2 * dims_.n + dims_.d_eta;
  }

  ProblemDef ProblemDef::with_reduction(std::optional<ShootingReduction> reduction, std::string name) const
  {
    return ProblemDef(std::move(name), dims_, fields_, cost_, constraints_, std::move(reduction));
  }

  ProblemDef ProblemDef::negated_cost(std::string name) const
  {
    EndpointFn negated = [c = cost_](const Vec &x0, const Vec &xT) {
      ScalarJet jet = c(x0, xT);
      jet.value = -jet.value;
      jet.grad = -jet.grad;
      jet.hess = -jet.hess;
      return jet;
    };
    std::optional<ShootingReduction> red = reduction_;
    if (red)
      red->offset.tail(red->offset.size() - dims_.n) *= -1.0;
    return ProblemDef(std::move(name), dims_, fields_, std::move(negated), constraints_, std::move(red));
  }

  TrajectoryGrid make_grid(int intervals, double horizon)
  {
    TrajectoryGrid g;
    g.t.resize(static_cast<size_t>(intervals) + 1);
    for (int k = 0; k <= intervals; ++k)
      g.t[static_cast<size_t>(k)] = horizon * static_cast<double>(k) / static_cast<double>(intervals);
    g.x.resize(g.t.size());
    g.p.resize(g.t.size());
    g.u.resize(g.t.size());
    g.v.resize(g.t.size());
    return g;
  }

  Multiplier multiplier_from(const TrajectoryGrid &traj, const Vec &beta)
  {
    return Multiplier{beta, traj.p};
  }

  // ---------------------------------------------------------------------------
  // Validation

  std::string ValidationReport::worst() const
  {
    if (entries.empty())
      return {};
    auto it = std::max_element(entries.begin(), entries.end(), [](const auto &a, const auto &b) {
      return a.worst_relative_error < b.worst_relative_error;
    });
    return it->evaluator;
  }

  namespace
  {

    double fd_step(double coordinate) { return std::max(1e-6, 1e-6 * std::abs(coordinate)); }

    double rel_err(const Mat &analytic, const Mat &fd)
    {
      double worst = 0.0;
      for (Eigen::Index i = 0; i < analytic.size(); ++i)
      {
        const double a = analytic.data()[i], b = fd.data()[i];
        worst = std::max(worst, std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}));
      }
      return worst;
    }

    class Tally
    {
    public:
      void add(const std::string &name, double err)
      {
        for (auto &e : entries)
          if (e.evaluator == name)
          {
            e.worst_relative_error = std::max(e.worst_relative_error, err);
            return;
          }
        entries.push_back({name, err});
      }
      std::vector<ValidationEntry> entries;
    };

  } // namespace

  ValidationReport validate_problem(const ProblemDef &def, int samples, std::uint64_t seed)
  {
    if (samples < 1)
      throw Error("validate_problem: samples must be >= 1");
    const int n = def.n(), l = def.l();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    auto draw = [&](int size) {
      Vec r(size);
      for (int i = 0; i < size; ++i)
        r(i) = uni(rng);
      return r;
    };

    Tally tally;
    for (int s = 0; s < samples; ++s)
    {
      const Vec x = draw(n), u = draw(l);
      for (int i = 0; i <= def.m(); ++i)
      {
        const std::string f = "f_" + std::to_string(i);
        const FieldJet jet = def.field(i, x, u);

        Mat dx_fd(n, n);
        std::vector<Mat> dxx_fd(static_cast<size_t>(n), Mat(n, n));
        for (int b = 0; b < n; ++b)
        {
          const double h = fd_step(x(b));
          Vec xp = x, xm = x;
          xp(b) += h;
          xm(b) -= h;
          const FieldJet jp = def.field(i, xp, u), jm = def.field(i, xm, u);
          dx_fd.col(b) = (jp.value - jm.value) / (2 * h);
          const Mat ddx = (jp.dx - jm.dx) / (2 * h);
          for (int k = 0; k < n; ++k)
            dxx_fd[static_cast<size_t>(k)].col(b) = ddx.row(k).transpose();
        }
        tally.add(f + " x-derivative", rel_err(jet.dx, dx_fd));
        for (int k = 0; k < n; ++k)
          tally.add(f + " xx-derivative", rel_err(jet.dxx[static_cast<size_t>(k)], dxx_fd[static_cast<size_t>(k)]));

        if (l == 0)
          continue;
        Mat du_fd(n, l);
        std::vector<Mat> dxu_fd(static_cast<size_t>(n), Mat(n, l));
        std::vector<Mat> duu_fd(static_cast<size_t>(n), Mat(l, l));
        for (int j = 0; j < l; ++j)
        {
          const double h = fd_step(u(j));
          Vec up = u, um = u;
          up(j) += h;
          um(j) -= h;
          const FieldJet jp = def.field(i, x, up), jm = def.field(i, x, um);
          du_fd.col(j) = (jp.value - jm.value) / (2 * h);
          const Mat ddx = (jp.dx - jm.dx) / (2 * h);
          const Mat ddu = (jp.du - jm.du) / (2 * h);
          for (int k = 0; k < n; ++k)
          {
            dxu_fd[static_cast<size_t>(k)].col(j) = ddx.row(k).transpose();
            duu_fd[static_cast<size_t>(k)].col(j) = ddu.row(k).transpose();
          }
        }
        tally.add(f + " u-derivative", rel_err(jet.du, du_fd));
        for (int k = 0; k < n; ++k)
        {
          tally.add(f + " xu-derivative", rel_err(jet.dxu[static_cast<size_t>(k)], dxu_fd[static_cast<size_t>(k)]));
          tally.add(f + " uu-derivative", rel_err(jet.duu[static_cast<size_t>(k)], duu_fd[static_cast<size_t>(k)]));
        }
      }

      const Vec x0 = draw(n), xT = draw(n);
      auto check_endpoint = [&](const std::string &who, const std::function<ScalarJet(const Vec &, const Vec &)> &fn) {
        const ScalarJet jet = fn(x0, xT);
        Vec z(2 * n);
        z << x0, xT;
        Vec grad_fd(2 * n);
        Mat hess_fd(2 * n, 2 * n);
        for (int b = 0; b < 2 * n; ++b)
        {
          const double h = fd_step(z(b));
          Vec zp = z, zm = z;
          zp(b) += h;
          zm(b) -= h;
          const ScalarJet jp = fn(zp.head(n), zp.tail(n)), jm = fn(zm.head(n), zm.tail(n));
          grad_fd(b) = (jp.value - jm.value) / (2 * h);
          hess_fd.col(b) = (jp.grad - jm.grad) / (2 * h);
        }
        tally.add(who + " gradient", rel_err(jet.grad, grad_fd));
        tally.add(who + " hessian", rel_err(jet.hess, hess_fd));
      };
      check_endpoint("phi_0", [&](const Vec &a, const Vec &b) { return def.cost(a, b); });
      for (int j = 0; j < def.d_eta(); ++j)
        check_endpoint("eta_" + std::to_string(j + 1),
                       [&, j](const Vec &a, const Vec &b) { return def.constraint(j, a, b); });
    }

    ValidationReport report;
    report.entries = std::move(tally.entries);
    report.passed = std::all_of(report.entries.begin(), report.entries.end(),
                                [&](const auto &e) { return e.worst_relative_error <= report.tolerance; });
    return report;
  }

} // namespace parshoot
