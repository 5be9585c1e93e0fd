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

#include "parshoot/report.hpp"

#include <cmath>

namespace parshoot
{

  std::string library_version()
  {
    return PARSHOOT_VERSION;
  }

  Json number(double x)
  {
    if (std::isnan(x))
      return "nan";
    if (std::isinf(x))
      return x > 0 ? "inf" : "-inf";
    return x;
  }

  Json to_json(const Vec &v)
  {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
      a.push_back(number(v(i)));
    return a;
  }

  namespace
  {
    Json numbers(const std::vector<double> &xs)
    {
      Json a = Json::array();
      for (double x : xs)
        a.push_back(number(x));
      return a;
    }
  } // namespace

  Json to_json(const RunInfo &info)
  {
    return Json{{"problem", info.problem}, {"grid", info.grid},  {"scheme", info.scheme},
                {"tol", number(info.tol)}, {"seed", info.seed}, {"version", library_version()}};
  }

  Json to_json(const GNReport &rep)
  {
    Json iterates = Json::array();
    for (const Vec &v : rep.iterates)
      iterates.push_back(to_json(v));
    return Json{{"converged", rep.converged},
                {"iterations", rep.iterations},
                {"solution", rep.iterates.empty() ? Json::array() : to_json(rep.solution())},
                {"final_residual", to_json(rep.final_residual)},
                {"residual_norms", numbers(rep.residual_norms)},
                {"step_norms", numbers(rep.step_norms)},
                {"singular_values", numbers(rep.singular_values)},
                {"iterates", iterates}};
  }

  Json to_json(const LCReport &rep)
  {
    return Json{{"huu_margin", number(rep.huu_margin)},
                {"huu_node", rep.huu_node},
                {"generalized_margin", number(rep.generalized_margin)},
                {"generalized_node", rep.generalized_node},
                {"satisfied", rep.satisfied}};
  }

  Json to_json(const Lemma1Report &rep)
  {
    return Json{{"huv", number(rep.huv)},         {"brackets", number(rep.brackets)},
                {"v", number(rep.v_antisym)},     {"hu", number(rep.hu)},
                {"hv_ddot", number(rep.hv_ddot)}, {"threshold", number(rep.threshold)},
                {"passed", rep.passed}};
  }

  Json to_json(const SSCReport &rep)
  {
    return Json{{"verdict", rep.coercive ? "coercive" : "not coercive"},
                {"rho_hat", number(rep.rho_hat)},
                {"cone", rep.cone},
                {"free_dimension", rep.free_dimension},
                {"cone_dimension", rep.cone_dimension},
                {"extremal_residual", number(rep.extremal_residual)},
                {"legendre", to_json(rep.legendre)},
                {"lemma1", to_json(rep.lemma1)}};
  }

  Json to_json(const ValidationReport &rep)
  {
    Json entries = Json::array();
    for (const auto &e : rep.entries)
      entries.push_back(Json{{"evaluator", e.evaluator}, {"worst_relative_error", number(e.worst_relative_error)}});
    return Json{{"passed", rep.passed}, {"tolerance", number(rep.tolerance)}, {"entries", entries}};
  }

  Json to_json(const QualificationReport &rep)
  {
    return Json{{"qualified", rep.qualified}, {"singular_values", numbers(rep.singular_values)}};
  }

  Json trajectory_json(const TrajectoryGrid &traj)
  {
    Json x = Json::array(), p = Json::array(), u = Json::array(), v = Json::array();
    for (size_t k = 0; k < traj.t.size(); ++k)
    {
      x.push_back(to_json(traj.x[k]));
      p.push_back(to_json(traj.p[k]));
      u.push_back(to_json(traj.u[k]));
      v.push_back(to_json(traj.v[k]));
    }
    return Json{{"t", numbers(traj.t)}, {"x", x}, {"p", p}, {"u", u}, {"v", v}};
  }

  Json envelope(const std::string &kind, const RunInfo &info, const Json &body)
  {
    Json out{{"schema", kReportSchemaVersion}, {"kind", kind}, {"run", to_json(info)}};
    for (auto it = body.begin(); it != body.end(); ++it)
      out[it.key()] = it.value();
    return out;
  }

} // namespace parshoot
