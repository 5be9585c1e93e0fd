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

#include "parshoot/integrate.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace parshoot
{

  Scheme parse_scheme(std::string_view name)
  {
    if (name == "implicit-euler")
      return Scheme::implicit_euler;
    if (name == "rk4")
      return Scheme::rk4;
    throw Error("unknown scheme '" + std::string(name) + "'; expected implicit-euler or rk4");
  }

  std::string to_string(Scheme scheme)
  {
    return scheme == Scheme::rk4 ? "rk4" : "implicit-euler";
  }

  ReducedRhs rhs_reduced(const ProblemDef &def, const Vec &x, const Vec &p, const ControlGuess &warm)
  {
    const EliminationResult e = eliminate_controls(def, x, p, warm);
    const HamiltonianPoint pt(def, x, e.u, e.v, p);
    return {pt.F(), -pt.Fx().transpose() * p, e.u, e.v};
  }

  namespace
  {

    struct Stacked
    {
      Vec zdot;
      ControlGuess controls;
    };

    class ReducedSystem
    {
    public:
      explicit ReducedSystem(const ProblemDef &def) : def_(def), n_(def.n()) {}

      Stacked operator()(const Vec &z, const ControlGuess &warm) const
      {
        const ReducedRhs r = rhs_reduced(def_, z.head(n_), z.tail(n_), warm);
        Vec zdot(2 * n_);
        zdot << r.xdot, r.pdot;
        return {std::move(zdot), {r.u, r.v}};
      }

    private:
      const ProblemDef &def_;
      int n_;
    };

    void store(TrajectoryGrid &g, size_t k, const Vec &z, const ControlGuess &c, int n)
    {
      g.x[k] = z.head(n);
      g.p[k] = z.tail(n);
      g.u[k] = c.u;
      g.v[k] = c.v;
    }

  } // namespace

  TrajectoryGrid propagate(const ProblemDef &def, const Vec &x0, const Vec &p0, int intervals, Scheme scheme,
                           const PropagationOptions &opts)
  {
    if (intervals < 1)
      throw Error("propagate: grid must have at least one interval");
    if (x0.size() != def.n() || p0.size() != def.n())
      throw Error("propagate: initial state/costate dimension mismatch");

    const int n = def.n();
    const ReducedSystem rhs(def);
    TrajectoryGrid g = make_grid(intervals, def.horizon());
    const double h = g.step();

    Vec z(2 * n);
    z << x0, p0;
    int k = 0;
    bool have_jac = false;
    Eigen::PartialPivLU<Mat> lu;
    auto factor_step_jacobian = [&](const Vec &w, const Stacked &gw) {
      Mat jac(2 * n, 2 * n);
      for (int j = 0; j < 2 * n; ++j)
      {
        const double d = 1.5e-8 * std::max(1.0, std::abs(w(j)));
        Vec wp = w;
        wp(j) += d;
        jac.col(j) = (rhs(wp, gw.controls).zdot - gw.zdot) / d;
      }
      lu.compute(Mat::Identity(2 * n, 2 * n) - h * jac);
      have_jac = true;
    };
    try
    {
      Stacked cur = rhs(z, cold_start(def));
      store(g, 0, z, cur.controls, n);

      for (k = 0; k < intervals; ++k)
      {
        if (scheme == Scheme::rk4)
        {
          const Stacked s2 = rhs(z + 0.5 * h * cur.zdot, cur.controls);
          const Stacked s3 = rhs(z + 0.5 * h * s2.zdot, s2.controls);
          const Stacked s4 = rhs(z + h * s3.zdot, s3.controls);
          z += (h / 6.0) * (cur.zdot + 2.0 * s2.zdot + 2.0 * s3.zdot + s4.zdot);
          cur = rhs(z, s4.controls);
        }
        else
        {
          // Solve R(w) = w - z - h g(w) = 0 by chord Newton from the predictor
          // w = z. The FD Jacobian of g is reused across steps and refreshed
          // when the contraction degrades. Once the tolerance is met one more
          // correction is applied so the step is solved to rounding level.
          const Vec zk = z;
          bool fresh = false;
          for (;;)
          {
            if (!have_jac)
            {
              factor_step_jacobian(zk, cur);
              fresh = true;
            }
            Vec w = zk;
            Stacked gw = cur;
            bool polished = false, ok = false;
            double prev = std::numeric_limits<double>::infinity();
            for (int it = 0; it <= opts.newton_max_iter; ++it)
            {
              const Vec res = w - zk - h * gw.zdot;
              const double norm = res.cwiseAbs().maxCoeff();
              if (!std::isfinite(norm) || (!fresh && it > 1 && norm > 0.25 * prev && norm > opts.newton_tol))
                break;
              if (norm <= opts.newton_tol)
              {
                if (polished || norm == 0.0)
                {
                  ok = true;
                  break;
                }
                polished = true;
              }
              prev = norm;
              w -= lu.solve(res);
              gw = rhs(w, gw.controls);
            }
            if (ok)
            {
              z = w;
              cur = std::move(gw);
              break;
            }
            if (fresh)
              throw Error("implicit Euler Newton did not converge within " + std::to_string(opts.newton_max_iter) +
                          " iterations");
            have_jac = false;
          }
        }
        store(g, static_cast<size_t>(k) + 1, z, cur.controls, n);
      }
    }
    catch (const PropagationError &)
    {
      throw;
    }
    catch (const Error &e)
    {
      throw PropagationError(k, g.t[static_cast<size_t>(std::min(k, intervals))], e.what());
    }
    return g;
  }

} // namespace parshoot
