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

#ifndef PARSHOOT_ERRORS_HPP
#define PARSHOOT_ERRORS_HPP

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace parshoot
{

  /// Root of every exception thrown by the library.
  class Error : public std::runtime_error
  {
  public:
    using std::runtime_error::runtime_error;
  };

  /// A user-supplied evaluator returned data of the wrong shape.
  class ConstructionError : public Error
  {
  public:
    ConstructionError(std::string evaluator, const std::string &what)
        : Error("construction defect in " + evaluator + ": " + what), evaluator_(std::move(evaluator)) {}
    const std::string &evaluator() const { return evaluator_; }

  private:
    std::string evaluator_;
  };

  class UnknownProblem : public Error
  {
  public:
    using Error::Error;
  };

  /// Raised when H_uu (or the elimination Jacobian) is singular at an iterate.
  class LegendreViolation : public Error
  {
  public:
    LegendreViolation(const std::string &what, double smallest_eigenvalue)
        : Error(what), smallest_eigenvalue_(smallest_eigenvalue) {}
    double smallest_eigenvalue() const { return smallest_eigenvalue_; }

  private:
    double smallest_eigenvalue_;
  };

  /// The inner (u, v) Newton solve hit its iteration cap.
  class EliminationNoConvergence : public Error
  {
  public:
    EliminationNoConvergence(double residual, Eigen::VectorXd iterate)
        : Error("control elimination did not converge (residual " + std::to_string(residual) + ")"),
          residual_(residual), iterate_(std::move(iterate)) {}
    double residual() const { return residual_; }
    const Eigen::VectorXd &iterate() const { return iterate_; }

  private:
    double residual_;
    Eigen::VectorXd iterate_;
  };

  class PropagationError : public Error
  {
  public:
    PropagationError(int step, double time, const std::string &cause)
        : Error("propagation failed at step " + std::to_string(step) + " (t=" + std::to_string(time) + "): " + cause),
          step_(step), time_(time) {}
    int step() const { return step_; }
    double time() const { return time_; }

  private:
    int step_;
    double time_;
  };

  class InsufficientData : public Error
  {
  public:
    using Error::Error;
  };

  class InternalError : public Error
  {
  public:
    using Error::Error;
  };

} // namespace parshoot

#endif
