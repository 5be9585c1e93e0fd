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

#include <map>
#include <mutex>

namespace parshoot
{

  namespace
  {

    FieldJet zero_jet(int n, int l)
    {
      FieldJet jet;
      jet.value = Vec::Zero(n);
      jet.dx = Mat::Zero(n, n);
      jet.du = Mat::Zero(n, l);
      jet.dxx.assign(static_cast<size_t>(n), Mat::Zero(n, n));
      jet.dxu.assign(static_cast<size_t>(n), Mat::Zero(n, l));
      jet.duu.assign(static_cast<size_t>(n), Mat::Zero(l, l));
      return jet;
    }

    // Dmitruk-Shishov example:
    //   min -2 x1(T) x2(T) + x3(T)
    //   x1' = x2 + u, x2' = v, x3' = x1^2 + x2^2 + 10 x2 v + u^2, x(0) = 0, T = 1.
    ProblemDef make_ds_example()
    {
      Dimensions dims{3, 1, 1, 3, 1.0};

      FieldFn f0 = [](const Vec &x, const Vec &u) {
        FieldJet j = zero_jet(3, 1);
        j.value << x(1) + u(0), 0.0, x(0) * x(0) + x(1) * x(1) + u(0) * u(0);
        j.dx(0, 1) = 1.0;
        j.dx(2, 0) = 2.0 * x(0);
        j.dx(2, 1) = 2.0 * x(1);
        j.du(0, 0) = 1.0;
        j.du(2, 0) = 2.0 * u(0);
        j.dxx[2](0, 0) = 2.0;
        j.dxx[2](1, 1) = 2.0;
        j.duu[2](0, 0) = 2.0;
        return j;
      };
      FieldFn f1 = [](const Vec &x, const Vec &) {
        FieldJet j = zero_jet(3, 1);
        j.value << 0.0, 1.0, 10.0 * x(1);
        j.dx(2, 1) = 10.0;
        return j;
      };

      EndpointFn phi0 = [](const Vec &, const Vec &xT) {
        ScalarJet s;
        s.value = -2.0 * xT(0) * xT(1) + xT(2);
        s.grad = Vec::Zero(6);
        s.grad(3) = -2.0 * xT(1);
        s.grad(4) = -2.0 * xT(0);
        s.grad(5) = 1.0;
        s.hess = Mat::Zero(6, 6);
        s.hess(3, 4) = s.hess(4, 3) = -2.0;
        return s;
      };
      std::vector<EndpointFn> eta;
      for (int j = 0; j < 3; ++j)
      {
        eta.push_back([j](const Vec &x0, const Vec &) {
          ScalarJet s;
          s.value = x0(j);
          s.grad = Vec::Zero(6);
          s.grad(j) = 1.0;
          s.hess = Mat::Zero(6, 6);
          return s;
        });
      }
      return ProblemDef("ds-example", dims, {f0, f1}, phi0, eta);
    }

    // x0 = 0 and p3 = 1 pinned; unknowns (p1(0), p2(0)); beta = -p0 so the
    // initial transversality rows vanish identically. Kept rows:
    // p1(T) + 2 x2(T), p2(T) + 2 x1(T), H_v(T) = p2(T) + 10 x2(T).
    ProblemDef make_ds_reduced()
    {
      ShootingReduction red;
      red.offset = Vec::Zero(9);
      red.offset(5) = 1.0;  // p3(0)
      red.offset(8) = -1.0; // beta_3
      red.embed = Mat::Zero(9, 2);
      red.embed(3, 0) = 1.0;
      red.embed(4, 1) = 1.0;
      red.embed(6, 0) = -1.0;
      red.embed(7, 1) = -1.0;
      red.rows = {6, 7, 9};
      return make_ds_example().with_reduction(red, "ds-reduced");
    }

    struct Registry
    {
      std::mutex mutex;
      std::map<std::string, ProblemFactory> factories{
          {"ds-example", make_ds_example},
          {"ds-reduced", make_ds_reduced},
      };
    };

    Registry &registry()
    {
      static Registry r;
      return r;
    }

  } // namespace

  void register_problem(const std::string &name, ProblemFactory factory)
  {
    auto &r = registry();
    std::lock_guard lock(r.mutex);
    r.factories[name] = std::move(factory);
  }

  std::vector<std::string> available_problems()
  {
    auto &r = registry();
    std::lock_guard lock(r.mutex);
    std::vector<std::string> names;
    for (const auto &[name, _] : r.factories)
      names.push_back(name);
    return names;
  }

  ProblemDef builtin_problem(const std::string &name)
  {
    ProblemFactory factory;
    {
      auto &r = registry();
      std::lock_guard lock(r.mutex);
      auto it = r.factories.find(name);
      if (it != r.factories.end())
        factory = it->second;
    }
    if (!factory)
    {
      std::string list;
      for (const auto &p : available_problems())
        list += (list.empty() ? "" : ", ") + p;
      throw UnknownProblem("unknown problem '" + name + "'; available: " + list);
    }
    return factory();
  }

} // namespace parshoot
