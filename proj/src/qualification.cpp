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

#include <Eigen/LU>
#include <Eigen/SVD>

namespace parshoot
{

  // Discretized derivative of G : (x0, u, v) -> eta(x0, x_T). Controls are
  // perturbed by constants on each interval; the state perturbation follows
  // the trapezoidal discretization of the linearized dynamics.
  QualificationReport check_qualification(const ProblemDef &def, const TrajectoryGrid &traj)
  {
    const int n = def.n(), l = def.l(), m = def.m(), d = def.d_eta();
    const int N = traj.intervals();
    if (N < 1 || static_cast<int>(traj.x.size()) != N + 1)
      throw Error("check_qualification: trajectory grid is inconsistent");

    QualificationReport rep;
    if (d == 0)
    {
      rep.qualified = true;
      return rep;
    }

    const double h = traj.step();
    std::vector<Mat> A(static_cast<size_t>(N) + 1), G(static_cast<size_t>(N) + 1);
    for (int k = 0; k <= N; ++k)
    {
      const auto sk = static_cast<size_t>(k);
      Mat a = Mat::Zero(n, n), g(n, l + m);
      const FieldJet f0 = def.field(0, traj.x[sk], traj.u[sk]);
      a += f0.dx;
      Mat fu = f0.du;
      for (int i = 1; i <= m; ++i)
      {
        const FieldJet fi = def.field(i, traj.x[sk], traj.u[sk]);
        const double vi = traj.v[sk](i - 1);
        a += vi * fi.dx;
        fu += vi * fi.du;
        g.col(l + i - 1) = fi.value;
      }
      g.leftCols(l) = fu;
      A[sk] = std::move(a);
      G[sk] = std::move(g);
    }

    const Mat I = Mat::Identity(n, n);
    Mat Deta0(d, n), DetaT(d, n);
    for (int j = 0; j < d; ++j)
    {
      const ScalarJet e = def.constraint(j, traj.x.front(), traj.x.back());
      Deta0.row(j) = e.grad.head(n).transpose();
      DetaT.row(j) = e.grad.tail(n).transpose();
    }

    Mat D(d, n + N * (l + m));
    Mat phi = I; // transition from node k+1 to N, built backwards
    for (int k = N - 1; k >= 0; --k)
    {
      const auto sk = static_cast<size_t>(k);
      const Eigen::PartialPivLU<Mat> lhs(I - 0.5 * h * A[sk + 1]);
      const Mat Q = lhs.solve(0.5 * h * (G[sk] + G[sk + 1]));
      D.block(0, n + k * (l + m), d, l + m) = DetaT * phi * Q;
      phi = phi * lhs.solve(I + 0.5 * h * A[sk]);
    }
    D.leftCols(n) = Deta0 + DetaT * phi;

    Eigen::JacobiSVD<Mat> svd(D);
    const Vec &s = svd.singularValues();
    rep.singular_values.assign(s.data(), s.data() + s.size());
    rep.qualified = s.size() == d && s(0) > 0 && s(d - 1) > 1e-8 * s(0);
    return rep;
  }

} // namespace parshoot
