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

#include <gtest/gtest.h>

#include "test_problems.hpp"

using namespace parshoot;
using namespace parshoot::testing;

namespace
{

  struct Sample
  {
    Vec x, u, v, p;
  };

  Sample random_point(const ProblemDef &def, std::mt19937_64 &rng, double p_last = NAN)
  {
    std::uniform_real_distribution<double> U(-1, 1);
    auto draw = [&](int k) {
      Vec out(k);
      for (int i = 0; i < k; ++i)
        out(i) = U(rng);
      return out;
    };
    Sample s{draw(def.n()), draw(def.l()), draw(def.m()), draw(def.n())};
    if (!std::isnan(p_last))
      s.p(def.n() - 1) = p_last;
    return s;
  }

  // Derivative of t -> g(x + tF, u + t Gamma, p - t Hx) at 0 by central differences.
  template <class G>
  Vec along_flow(const ProblemDef &def, const Sample &s, G g, double eps)
  {
    const HamiltonianPoint pt(def, s.x, s.u, s.v, s.p);
    const Vec F = pt.F(), Hx = h_gradients(pt).Hx, Gamma = gamma_udot(pt);
    const Vec plus = g(s.x + eps * F, s.u + eps * Gamma, s.v, s.p - eps * Hx);
    const Vec minus = g(s.x - eps * F, s.u - eps * Gamma, s.v, s.p + eps * Hx);
    return (plus - minus) / (2 * eps);
  }

} // namespace

TEST(HValue, HandEvaluation)
{
  const ProblemDef ds = builtin_problem("ds-example");
  EXPECT_DOUBLE_EQ(h_value(HamiltonianPoint(ds, Vec::Zero(3), Vec::Zero(1), Vec::Zero(1), vec({0, 0, 1}))), 0.0);
  EXPECT_DOUBLE_EQ(h_value(HamiltonianPoint(ds, vec({1, 2, 0}), vec({3}), vec({4}), vec({1, 1, 1}))), 103.0);
  EXPECT_DOUBLE_EQ(h_value(HamiltonianPoint(ds, vec({1, 2, 0}), vec({3}), vec({4}), Vec::Zero(3))), 0.0);
}

TEST(HGradients, ClosedForms)
{
  const ProblemDef ds = builtin_problem("ds-example");
  std::mt19937_64 rng(11);
  for (int s = 0; s < 20; ++s)
  {
    const Sample q = random_point(ds, rng, 1.0);
    const HGradients g = h_gradients(HamiltonianPoint(ds, q.x, q.u, q.v, q.p));
    EXPECT_NEAR(g.Hu(0), q.p(0) + 2 * q.u(0), 1e-14);
    EXPECT_NEAR(g.Hv(0), q.p(1) + 10 * q.x(1), 1e-14);
    EXPECT_NEAR(g.Hx(0), 2 * q.x(0), 1e-14);
    EXPECT_NEAR(g.Hx(1), q.p(0) + 2 * q.x(1) + 10 * q.v(0), 1e-14);
    EXPECT_NEAR(g.Hx(2), 0.0, 1e-14);
  }
  const HGradients z = h_gradients(HamiltonianPoint(ds, Vec::Zero(3), Vec::Zero(1), Vec::Zero(1), Vec::Zero(3)));
  EXPECT_TRUE(z.Hx.isZero(0) && z.Hu.isZero(0) && z.Hv.isZero(0));
}

TEST(LieBracket, DsClosedFormAndFdOracle)
{
  const ProblemDef ds = builtin_problem("ds-example");
  std::mt19937_64 rng(12);
  for (int s = 0; s < 20; ++s)
  {
    const Sample q = random_point(ds, rng);
    const Vec b = lie_bracket(ds, 0, 1, q.x, q.u);
    EXPECT_TRUE(b.isApprox(vec({-1, 0, -2 * q.x(1)}), 1e-14));
    // (D f1) f0 - (D f0) f1 as directional difference quotients of the values.
    const double e = 1e-6;
    auto val = [&](int i, const Vec &x) { return ds.field(i, x, q.u).value; };
    const Vec f0 = val(0, q.x), f1 = val(1, q.x);
    const Vec fd = (val(1, q.x + e * f0) - val(1, q.x - e * f0)) / (2 * e) -
                   (val(0, q.x + e * f1) - val(0, q.x - e * f1)) / (2 * e);
    EXPECT_LE((fd - b).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(LieBracket, Antisymmetry)
{
  const ProblemDef two = two_affine_controls_problem();
  std::mt19937_64 rng(13);
  for (int s = 0; s < 20; ++s)
  {
    const Sample q = random_point(two, rng);
    for (int i = 0; i <= 2; ++i)
    {
      EXPECT_TRUE(lie_bracket(two, i, i, q.x, q.u).isZero(0));
      for (int j = 0; j <= 2; ++j)
        EXPECT_LE((lie_bracket(two, i, j, q.x, q.u) + lie_bracket(two, j, i, q.x, q.u)).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
  EXPECT_THROW(lie_bracket(two, 0, 3, Vec::Zero(3), Vec::Zero(1)), Error);
}

TEST(HvDot, DsClosedFormAndVIndependence)
{
  const ProblemDef ds = builtin_problem("ds-example");
  std::mt19937_64 rng(14);
  for (int s = 0; s < 20; ++s)
  {
    const Sample q = random_point(ds, rng, 1.0);
    HamiltonianPoint pt(ds, q.x, q.u, q.v, q.p);
    const Vec a = hv_dot(pt);
    EXPECT_NEAR(a(0), -q.p(0) - 2 * q.x(1), 1e-14);
    pt.set_affine_control(q.v + vec({3.0}));
    EXPECT_EQ(hv_dot(pt), a);
  }
  EXPECT_TRUE(hv_dot(ds, vec({1, 2, 3}), vec({1}), Vec::Zero(3)).isZero(0));
}

TEST(HvDot, MatchesDifferenceQuotientOfHvAlongExtremal)
{
  const ProblemDef ds = builtin_problem("ds-example");
  const int N = 4000;
  const TrajectoryGrid g = propagate(ds, Vec::Zero(3), vec({1, 0, 1}), N, Scheme::rk4);
  double worst = 0.0;
  for (int k = 1; k < N; k += 97)
  {
    auto hv = [&](int j) {
      return h_gradients(HamiltonianPoint(ds, g.x[j], g.u[j], g.v[j], g.p[j])).Hv(0);
    };
    const double fd = (hv(k + 1) - hv(k - 1)) / (2 * g.step());
    worst = std::max(worst, std::abs(fd - hv_dot(ds, g.x[k], g.u[k], g.p[k])(0)));
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(Gamma, DsEqualsX1)
{
  const ProblemDef ds = builtin_problem("ds-example");
  std::mt19937_64 rng(15);
  for (int s = 0; s < 20; ++s)
  {
    Sample q = random_point(ds, rng, 1.0);
    q.u(0) = -q.p(0) / 2;
    q.v(0) = q.x(0);
    EXPECT_NEAR(gamma_udot(ds, q.x, q.u, q.v, q.p)(0), q.x(0), 1e-12);
  }
}

TEST(Gamma, MatchesDerivativeOfEliminatedControl)
{
  const ProblemDef ds = builtin_problem("ds-example");
  const int N = 4000;
  const TrajectoryGrid g = propagate(ds, vec({0.2, -0.1, 0}), vec({0.5, 0.3, 1}), N, Scheme::rk4);
  for (int k = 100; k < N; k += 500)
  {
    const double fd = (g.u[k + 1](0) - g.u[k - 1](0)) / (2 * g.step());
    EXPECT_NEAR(gamma_udot(ds, g.x[k], g.u[k], g.v[k], g.p[k])(0), fd, 1e-6);
  }
}

TEST(Gamma, KeepsHuStationaryAlongFlow)
{
  const ProblemDef two = two_affine_controls_problem();
  std::mt19937_64 rng(16);
  for (int s = 0; s < 20; ++s)
  {
    Sample q = random_point(two, rng, 1.0);
    const Vec dHu = along_flow(two, q, [&](const Vec &x, const Vec &u, const Vec &v, const Vec &p) {
      return h_gradients(HamiltonianPoint(two, x, u, v, p)).Hu;
    }, 1e-5);
    EXPECT_LE(dHu.cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Gamma, ZeroAtRestAndEmptyWithoutU)
{
  const ProblemDef ds = builtin_problem("ds-example");
  EXPECT_TRUE(gamma_udot(ds, Vec::Zero(3), Vec::Zero(1), Vec::Zero(1), vec({0, 0, 1})).isZero(0));
  const ProblemDef nou = no_nonlinear_control_problem();
  EXPECT_EQ(gamma_udot(nou, vec({0.1, 0.2}), Vec(0), vec({0.3}), vec({1, 1})).size(), 0);
}

TEST(Gamma, SingularHuuRaisesLegendreViolation)
{
  const ProblemDef ds = builtin_problem("ds-example");
  try
  {
    gamma_udot(ds, vec({0.1, 0.2, 0}), vec({0.1}), vec({0.1}), vec({0.3, 0.2, 0.0}));
    FAIL();
  }
  catch (const LegendreViolation &e)
  {
    EXPECT_NEAR(e.smallest_eigenvalue(), 0.0, 1e-15);
  }
}

TEST(HvDdot, DsClosedForm)
{
  const ProblemDef ds = builtin_problem("ds-example");
  EXPECT_NEAR(hv_ddot(ds, vec({0.3, 0, 0}), vec({0}), vec({0.1}), vec({0, 0, 1}))(0), 0.4, 1e-14);
  std::mt19937_64 rng(17);
  for (int s = 0; s < 100; ++s)
  {
    const Sample q = random_point(ds, rng, 1.0);
    EXPECT_NEAR(hv_ddot(ds, q.x, q.u, q.v, q.p)(0), -2 * q.v(0) + 2 * q.x(0), 1e-9);
  }
}

TEST(HvDdot, EqualsTotalDerivativeOfHvDotAlongFlow)
{
  const ProblemDef two = two_affine_controls_problem();
  std::mt19937_64 rng(18);
  for (int s = 0; s < 30; ++s)
  {
    const Sample q = random_point(two, rng, 1.0);
    const Vec fd = along_flow(two, q, [&](const Vec &x, const Vec &u, const Vec &, const Vec &p) {
      return hv_dot(two, x, u, p);
    }, 1e-5);
    EXPECT_LE((fd - hv_ddot(two, q.x, q.u, q.v, q.p)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(HvDdot, FlowDifferenceConvergesAtSecondOrder)
{
  const ProblemDef two = two_affine_controls_problem();
  std::mt19937_64 rng(22);
  const Sample q = random_point(two, rng, 1.0);
  const Vec exact = hv_ddot(two, q.x, q.u, q.v, q.p);
  std::vector<double> errs;
  for (double eps : {4e-2, 2e-2, 1e-2})
  {
    const Vec fd = along_flow(two, q, [&](const Vec &x, const Vec &u, const Vec &, const Vec &p) {
      return hv_dot(two, x, u, p);
    }, eps);
    errs.push_back((fd - exact).cwiseAbs().maxCoeff());
  }
  EXPECT_GE(std::log2(errs[0] / errs[1]), 1.5);
  EXPECT_GE(std::log2(errs[1] / errs[2]), 1.5);
}

TEST(HvDdot, AffineInVWhenAffineFieldsIgnoreU)
{
  const ProblemDef two = two_affine_controls_problem(true);
  std::mt19937_64 rng(19);
  for (int s = 0; s < 20; ++s)
  {
    const Sample q = random_point(two, rng, 1.0);
    auto at = [&](double t) { return hv_ddot(two, q.x, q.u, t * q.v, q.p); };
    const Vec second_difference = at(1.0) - 2 * at(0.5) + at(0.0);
    EXPECT_LE(second_difference.cwiseAbs().maxCoeff(), 1e-10 * (1 + at(1.0).cwiseAbs().maxCoeff()));
  }
}

TEST(HvDdot, QuadraticInVWhenAffineFieldsUseU)
{
  // u' then picks up v^2 terms through p' = -H_x and F_u.
  const ProblemDef two = two_affine_controls_problem();
  std::mt19937_64 rng(20);
  double worst = 0;
  for (int s = 0; s < 20; ++s)
  {
    const Sample q = random_point(two, rng, 1.0);
    auto at = [&](double t) { return hv_ddot(two, q.x, q.u, t * q.v, q.p); };
    worst = std::max(worst, (at(1.0) - 2 * at(0.5) + at(0.0)).cwiseAbs().maxCoeff());
  }
  EXPECT_GT(worst, 1e-6);
}

TEST(HvDdot, SecondDifferenceOfHvAlongExtremal)
{
  // Along an extremal the second time difference of H_v tracks hv_ddot (both vanish up to the scheme error).
  const ProblemDef ds = builtin_problem("ds-example");
  const Vec x0 = vec({0.2, -0.1, 0}), p0 = vec({0.5, 0.3, 1});
  for (int N : {100, 200, 400})
  {
    const TrajectoryGrid g = propagate(ds, x0, p0, N, Scheme::rk4);
    auto hv = [&](int j) { return h_gradients(HamiltonianPoint(ds, g.x[j], g.u[j], g.v[j], g.p[j])).Hv(0); };
    const double h = g.step();
    for (int k = 1; k < N; k += N / 10)
    {
      const double fd = (hv(k + 1) - 2 * hv(k) + hv(k - 1)) / (h * h);
      EXPECT_NEAR(fd, hv_ddot(ds, g.x[k], g.u[k], g.v[k], g.p[k])(0), 1e-6) << N << " " << k;
    }
  }
}

TEST(EliminationJacobian, DsIsDiagTwo)
{
  const ProblemDef ds = builtin_problem("ds-example");
  std::mt19937_64 rng(20);
  for (int s = 0; s < 20; ++s)
  {
    const Sample q = random_point(ds, rng, 1.0);
    const Mat J = elimination_jacobian(ds, q.x, q.u, q.v, q.p);
    EXPECT_LE((J - 2 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(EliminationJacobian, MatchesFdOfStackedMap)
{
  const ProblemDef two = two_affine_controls_problem();
  std::mt19937_64 rng(21);
  for (int s = 0; s < 10; ++s)
  {
    const Sample q = random_point(two, rng, 1.0);
    const Mat J = elimination_jacobian(two, q.x, q.u, q.v, q.p);
    auto stacked = [&](const Vec &w) {
      const Vec u = w.head(1), v = w.tail(2);
      const HamiltonianPoint pt(two, q.x, u, v, q.p);
      Vec r(3);
      r << h_gradients(pt).Hu, -hv_ddot(pt);
      return r;
    };
    Vec w(3);
    w << q.u, q.v;
    Mat fd(3, 3);
    for (int j = 0; j < 3; ++j)
    {
      Vec a = w, b = w;
      a(j) += 1e-5;
      b(j) -= 1e-5;
      fd.col(j) = (stacked(a) - stacked(b)) / 2e-5;
    }
    EXPECT_LE((J - fd).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, J.cwiseAbs().maxCoeff()));
  }
}

TEST(EliminationJacobian, NoUReducesToGeneralizedBlock)
{
  const ProblemDef nou = no_nonlinear_control_problem();
  const Mat J = elimination_jacobian(nou, vec({0.3, 0.1}), Vec(0), vec({0.2}), vec({0.5, 1.5}));
  ASSERT_EQ(J.rows(), 1);
  EXPECT_NEAR(J(0, 0), 2 * 1.5, 1e-8);
}
