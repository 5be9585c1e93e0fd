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

#include "parshoot/shooting.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

namespace parshoot
{

  Vec pack(const ShootingPoint &pt)
  {
    Vec nu(pt.x0.size() + pt.p0.size() + pt.beta.size());
    nu << pt.x0, pt.p0, pt.beta;
    return nu;
  }

  ShootingPoint unpack(const ProblemDef &def, const Vec &full_nu)
  {
    const int n = def.n(), d = def.d_eta();
    if (full_nu.size() != 2 * n + d)
      throw Error("unpack: expected " + std::to_string(2 * n + d) + " components, got " +
                  std::to_string(full_nu.size()));
    return {full_nu.head(n), full_nu.segment(n, n), full_nu.tail(d)};
  }

  Vec expand(const ProblemDef &def, const Vec &nu)
  {
    if (nu.size() != def.shooting_unknowns())
      throw Error("shooting point has " + std::to_string(nu.size()) + " components, problem '" + def.name() +
                  "' expects " + std::to_string(def.shooting_unknowns()));
    if (!def.reduction())
      return nu;
    return def.reduction()->offset + def.reduction()->embed * nu;
  }

  EndpointLagrangian endpoint_lagrangian(const ProblemDef &def, const Vec &beta, const Vec &x0, const Vec &xT)
  {
    const int n = def.n();
    const ScalarJet c = def.cost(x0, xT);
    EndpointLagrangian out;
    out.value = c.value;
    Vec grad = c.grad;
    out.hess = c.hess;
    for (int j = 0; j < def.d_eta(); ++j)
    {
      if (beta(j) == 0.0)
        continue;
      const ScalarJet e = def.constraint(j, x0, xT);
      out.value += beta(j) * e.value;
      grad += beta(j) * e.grad;
      out.hess += beta(j) * e.hess;
    }
    out.grad_x0 = grad.head(n);
    out.grad_xT = grad.tail(n);
    return out;
  }

  Vec full_shooting_residual(const ProblemDef &def, const ShootingPoint &pt, int intervals, Scheme scheme,
                             TrajectoryGrid *traj)
  {
    const int n = def.n(), m = def.m(), d = def.d_eta();
    TrajectoryGrid g = propagate(def, pt.x0, pt.p0, intervals, scheme);
    const Vec &xT = g.x.back(), &pT = g.p.back();
    const EndpointLagrangian ell = endpoint_lagrangian(def, pt.beta, pt.x0, xT);

    Vec s(d + 2 * n + 2 * m);
    for (int j = 0; j < d; ++j)
      s(j) = def.constraint(j, pt.x0, xT).value;
    s.segment(d, n) = pt.p0 + ell.grad_x0;
    s.segment(d + n, n) = pT - ell.grad_xT;
    if (m > 0)
    {
      const HamiltonianPoint end(def, xT, g.u.back(), g.v.back(), pT);
      s.segment(d + 2 * n, m) = end.Fv().transpose() * pT;
      s.tail(m) = hv_dot(def, pt.x0, g.u.front(), pt.p0);
    }
    if (traj)
      *traj = std::move(g);
    return s;
  }

  Vec shooting_residual(const ProblemDef &def, const Vec &nu, int intervals, Scheme scheme)
  {
    const Vec full = full_shooting_residual(def, unpack(def, expand(def, nu)), intervals, scheme);
    if (!def.reduction())
      return full;
    const auto &rows = def.reduction()->rows;
    Vec out(static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i)
      out(static_cast<Eigen::Index>(i)) = full(rows[i]);
    return out;
  }

  Mat fd_jacobian(const ResidualFn &fn, const Vec &nu, double rel_step)
  {
    Mat J;
    for (Eigen::Index j = 0; j < nu.size(); ++j)
    {
      const double h = rel_step * std::max(1.0, std::abs(nu(j)));
      Vec np = nu, nm = nu;
      np(j) += h;
      nm(j) -= h;
      Vec sp, sm;
      try
      {
        sp = fn(np);
        sm = fn(nm);
      }
      catch (const Error &e)
      {
        throw Error("Jacobian column " + std::to_string(j) + ": " + e.what());
      }
      if (J.size() == 0)
        J.resize(sp.size(), nu.size());
      J.col(j) = (sp - sm) / (2 * h);
    }
    return J;
  }

  Mat shooting_jacobian(const ProblemDef &def, const Vec &nu, int intervals, Scheme scheme, double rel_step)
  {
    return fd_jacobian([&](const Vec &z) { return shooting_residual(def, z, intervals, scheme); }, nu, rel_step);
  }

  const Vec &GNReport::best_iterate() const
  {
    const auto it = std::min_element(residual_norms.begin(), residual_norms.end());
    return iterates[static_cast<size_t>(it - residual_norms.begin())];
  }

  namespace
  {
    double sup_norm(const Vec &v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
  } // namespace

  GNReport gauss_newton(const ResidualFn &residual, const Vec &nu0, const GNOptions &opts)
  {
    if (!(opts.tol > 0) || opts.max_iter < 1)
      throw Error("gauss_newton: tol > 0 and max_iter >= 1 required");

    GNReport rep;
    Vec nu = nu0;
    Vec s = residual(nu);
    rep.iterates.push_back(nu);
    rep.residual_norms.push_back(sup_norm(s));

    while (rep.residual_norms.back() > opts.tol)
    {
      if (!std::isfinite(rep.residual_norms.back()))
      {
        rep.final_residual = s;
        throw NoConvergence("Gauss-Newton residual is not finite", std::move(rep));
      }
      if (rep.iterations == opts.max_iter)
      {
        rep.final_residual = s;
        throw NoConvergence("Gauss-Newton reached " + std::to_string(opts.max_iter) + " iterations", std::move(rep));
      }
      const Mat J = fd_jacobian(residual, nu, opts.fd_step);
      Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Vec &sigma = svd.singularValues();
      rep.singular_values.assign(sigma.data(), sigma.data() + sigma.size());
      const double smin = sigma.size() == nu.size() ? sigma(sigma.size() - 1) : 0.0;
      if (sigma.size() == 0 || smin * smin < opts.min_sigma_ratio_sq * sigma(0) * sigma(0))
      {
        rep.final_residual = s;
        throw SingularNormalMatrix("shooting Jacobian is not one-to-one (sigma_min/sigma_max = " +
                                       std::to_string(sigma.size() ? smin / sigma(0) : 0.0) + ")",
                                   std::move(rep));
      }
      // With S' injective this is the unique solution of the normal equations.
      const Vec delta = svd.solve(-s);
      nu += delta;
      ++rep.iterations;
      rep.step_norms.push_back(delta.norm());
      s = residual(nu);
      rep.iterates.push_back(nu);
      rep.residual_norms.push_back(sup_norm(s));
    }
    rep.final_residual = s;
    rep.converged = true;
    if (rep.singular_values.empty())
    {
      Eigen::JacobiSVD<Mat> svd(fd_jacobian(residual, nu, opts.fd_step));
      const Vec &sigma = svd.singularValues();
      rep.singular_values.assign(sigma.data(), sigma.data() + sigma.size());
    }
    return rep;
  }

  GNReport gauss_newton(const ProblemDef &def, const Vec &nu0, int intervals, Scheme scheme, const GNOptions &opts)
  {
    if (nu0.size() != def.shooting_unknowns())
      throw Error("gauss_newton: nu0 has " + std::to_string(nu0.size()) + " components, expected " +
                  std::to_string(def.shooting_unknowns()));
    return gauss_newton([&](const Vec &nu) { return shooting_residual(def, nu, intervals, scheme); }, nu0, opts);
  }

  double convergence_order(const std::vector<double> &errors, const OrderBand &band)
  {
    auto inside = [&](double e) { return e >= band.lo && e <= band.hi; };
    std::vector<double> a, b;
    for (size_t k = 0; k + 1 < errors.size(); ++k)
      if (inside(errors[k]) && inside(errors[k + 1]))
      {
        a.push_back(std::log(errors[k]));
        b.push_back(std::log(errors[k + 1]));
      }
    if (static_cast<int>(a.size()) < band.min_pairs)
    {
      char buf[160];
      std::snprintf(buf, sizeof buf, "convergence order needs %d consecutive error pairs inside [%g, %g], found %zu",
                    band.min_pairs, band.lo, band.hi, a.size());
      throw InsufficientData(buf);
    }
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (size_t i = 0; i < a.size(); ++i)
    {
      ma += a[i];
      mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0;
    for (size_t i = 0; i < a.size(); ++i)
    {
      sab += (a[i] - ma) * (b[i] - mb);
      saa += (a[i] - ma) * (a[i] - ma);
    }
    if (saa == 0.0)
      throw InsufficientData("convergence order: errors inside the band are all equal");
    return sab / saa;
  }

  double convergence_order(const GNReport &report, const Vec &nu_star, const OrderBand &band)
  {
    std::vector<double> errors;
    errors.reserve(report.iterates.size());
    for (const auto &nu : report.iterates)
      errors.push_back((nu - nu_star).norm());
    return convergence_order(errors, band);
  }

  std::vector<SweepRow> multistart(const ProblemDef &def, const std::vector<Vec> &starts, int intervals, Scheme scheme,
                                   const GNOptions &opts, int threads)
  {
    std::vector<SweepRow> rows(starts.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (size_t i = next++; i < starts.size(); i = next++)
      {
        SweepRow &row = rows[i];
        row.index = static_cast<int>(i);
        row.nu0 = starts[i];
        try
        {
          const GNReport rep = gauss_newton(def, starts[i], intervals, scheme, opts);
          row.converged = true;
          row.iterations = rep.iterations;
          row.solution = rep.solution();
          row.residual = rep.residual_norms.back();
          try
          {
            row.order = convergence_order(rep, rep.solution());
          }
          catch (const InsufficientData &)
          {
          }
        }
        catch (const NoConvergence &e)
        {
          row.iterations = e.report().iterations;
          row.solution = e.report().best_iterate();
          row.residual = e.report().residual_norms.back();
          row.failure = "no-convergence";
        }
        catch (const SingularNormalMatrix &e)
        {
          row.iterations = e.report().iterations;
          row.solution = e.report().iterates.back();
          row.residual = e.report().residual_norms.back();
          row.failure = "singular-normal-matrix";
        }
        catch (const Error &e)
        {
          row.failure = std::string("error: ") + e.what();
        }
      }
    };

    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(starts.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w)
      pool.emplace_back(worker);
    worker();
    for (auto &t : pool)
      t.join();
    return rows;
  }

  std::vector<Vec> uniform_starts(int count, int dim, double lo, double hi, std::uint64_t seed)
  {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(lo, hi);
    std::vector<Vec> starts;
    starts.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i)
    {
      Vec s(dim);
      for (int j = 0; j < dim; ++j)
        s(j) = uni(rng);
      starts.push_back(std::move(s));
    }
    return starts;
  }

} // namespace parshoot
