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

#ifndef PARSHOOT_REPORT_HPP
#define PARSHOOT_REPORT_HPP

#include <cstdint>
#include <string>

#include "json.hpp"

#include "parshoot/shooting.hpp"
#include "parshoot/ssc.hpp"

namespace parshoot
{

  using Json = nlohmann::ordered_json;

  inline constexpr int kReportSchemaVersion = 1;

  std::string library_version();

  /// Run metadata embedded in every report.
  struct RunInfo
  {
    std::string problem;
    int grid = 0;
    std::string scheme;
    double tol = 0.0;
    std::uint64_t seed = 0;
  };

  Json to_json(const RunInfo &info);
  Json to_json(const Vec &v);
  Json to_json(const GNReport &rep);
  Json to_json(const LCReport &rep);
  Json to_json(const Lemma1Report &rep);
  Json to_json(const SSCReport &rep);
  Json to_json(const ValidationReport &rep);
  Json to_json(const QualificationReport &rep);
  Json trajectory_json(const TrajectoryGrid &traj);

  /// {"schema", "kind", "run", <body keys>...}
  Json envelope(const std::string &kind, const RunInfo &info, const Json &body);

  /// Non-finite numbers serialize as the strings "inf", "-inf", "nan".
  Json number(double x);

} // namespace parshoot

#endif
