#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lgsim/error.hpp"
#include "lgsim/three_level.hpp"

using namespace lgsim;
using namespace lgsim::threelevel;

namespace {

constexpr double kPi = std::numbers::pi;

// delta_A(A) at fixed (phi, theta) reduces to a single harmonic in 2 chi once the
// structural zeros are divided out; its root in [0, pi) has a closed form.
double closed_form_chi(double phi, double theta) {
  const double a = std::cos(theta) * std::cos(phi);
  const double b = std::sin(theta) * std::sin(phi) * (std::cos(theta) + std::cos(phi));
  double chi = std::fmod(std::atan2(-b, a), kPi);
  if (chi < 0) chi += kPi;
  return chi;
}

double circular_distance(double x, double y) {
  const double d = std::fmod(std::abs(x - y), kPi);
  return std::min(d, kPi - d);
}

ScanOptions small_scan(int n) {
  ScanOptions o;
  o.theta_points = n;
  o.phi_points = n;
  o.workers = 2;
  return o;
}

}  // namespace

TEST(ThreeLevel, UnitaryExamples) {
  EXPECT_LT(max_abs(CMatrix(build_unitary({0, 0, 0}).matrix() - CMatrix::Identity(3, 3))), 1e-15);
  EXPECT_NEAR(std::abs(build_unitary({0, kPi / 2, 0}).matrix()(kA, kC)), 1.0, 1e-15);
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const RMatrix r = rotation_matrix({u(rng), u(rng), u(rng)});
    EXPECT_LT(max_abs(RMatrix(r.transpose() * r - RMatrix::Identity(3, 3))), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
  }
}

TEST(ThreeLevel, RotationFactorsByHand) {
  const double phi = 0.3, chi = 1.1, theta = 2.2;
  const double cp = std::cos(phi), sp = std::sin(phi), cc = std::cos(chi), sc = std::sin(chi);
  const double ct = std::cos(theta), st = std::sin(theta);
  RMatrix r1(3, 3), r2(3, 3), r3(3, 3);
  r1 << 1, 0, 0, 0, cp, sp, 0, -sp, cp;
  r2 << cc, 0, sc, 0, 1, 0, -sc, 0, cc;
  r3 << ct, st, 0, -st, ct, 0, 0, 0, 1;
  EXPECT_LT(max_abs(RMatrix(rotation_matrix({phi, chi, theta}) - r1 * r2 * r3)), 1e-15);
}

TEST(ThreeLevel, ProtocolDefaults) {
  const auto proto = protocol_at({0, 0, 0});
  ASSERT_TRUE(proto.detector().has_value());
  EXPECT_LT(max_abs(RMatrix(proto.detector()->c() - make_inverted_detector(3).c())), 1e-15);
  EXPECT_EQ(proto.meas2().q_labels(), std::vector<int>({1, -1, 1}));
  const auto v = Evaluator().evaluate({0, 0, 0});
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(v.delta[static_cast<std::size_t>(k)], 0.0, 1e-15);
    EXPECT_NEAR(v.delta_a[static_cast<std::size_t>(k)], 0.0, 1e-15);
  }
  EXPECT_NEAR(v.K_A, 1.0, 1e-15);
  EXPECT_NEAR(v.weak_K, 1.0, 1e-15);
}

TEST(ThreeLevel, EvaluatorMatchesGeneralPipeline) {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(0.0, kPi);
  const Evaluator inverted;
  const Evaluator weak(make_weak_detector(3, 0.2));
  for (int i = 0; i < 300; ++i) {
    const Params p{u(rng), u(rng), u(rng)};
    for (const Evaluator* ev : {&inverted, &weak}) {
      const auto v = ev->evaluate(p);
      const auto proto = protocol_at(p, ev->detector());
      const auto t = run_protocol(proto);
      const auto rep = signalling_report(t);
      for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(v.delta[static_cast<std::size_t>(k)], rep.delta(k), 1e-12);
        EXPECT_NEAR(v.delta_a[static_cast<std::size_t>(k)], rep.delta_a(k), 1e-12);
        EXPECT_NEAR(ev->delta_a(p, k), rep.delta_a(k), 1e-12);
      }
      EXPECT_NEAR(v.K, correlator_K(proto, t).value, 1e-12);
      EXPECT_NEAR(v.K_A, correlator_K_ambiguous(proto, t).value, 1e-12);
      EXPECT_NEAR(v.Delta, rep.big_delta, 1e-12);
      EXPECT_NEAR(v.Delta_A, rep.big_delta_a, 1e-12);
      EXPECT_NEAR(v.weak_K, weak_limit_K(proto), 1e-12);
    }
  }
}

TEST(ThreeLevel, ChiSolverMatchesClosedForm) {
  const Evaluator ev;
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0.0, kPi);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const double phi = u(rng), theta = u(rng);
    const double expect = closed_form_chi(phi, theta);
    if (circular_distance(expect, 0.0) < 1e-5) continue;  // snapped region
    const auto sol = solve_chi(ev, phi, theta);
    ASSERT_TRUE(sol.has_value()) << phi << " " << theta;
    EXPECT_LT(circular_distance(sol->chi, expect), 1e-9) << phi << " " << theta;
    EXPECT_GE(sol->chi, 0.0);
    EXPECT_LT(sol->chi, kPi);
    EXPECT_LT(sol->residual, 1e-12);
    const auto v = ev.evaluate({phi, sol->chi, theta});
    EXPECT_LT(std::abs(v.delta_a[kA]), 1e-12);
    EXPECT_NEAR(v.delta_a[kB], -v.delta_a[kC], 1e-12);
    for (int k = 0; k < 3; ++k) {
      const auto s = static_cast<std::size_t>(k);
      EXPECT_NEAR(v.delta[s], 2.0 * v.delta_a[s], 1e-10);
    }
    ++checked;
  }
  EXPECT_GT(checked, 400);
}

TEST(ThreeLevel, ChiSolverExamples) {
  const Evaluator ev;
  const auto zero_phi = solve_chi(ev, 0.0, 1.234);
  ASSERT_TRUE(zero_phi.has_value());
  EXPECT_EQ(zero_phi->chi, 0.0);
  const auto half = solve_chi(ev, 0.5 * kPi, 0.831 * kPi);
  ASSERT_TRUE(half.has_value());
  EXPECT_NEAR(half->chi, 0.5 * kPi, 1e-12);
  EXPECT_LT(half->residual, 1e-12);
  // Both harmonics vanish: delta_A(A) is identically zero in chi.
  EXPECT_FALSE(solve_chi(ev, 0.5 * kPi, 0.5 * kPi).has_value());
}

TEST(ThreeLevel, MirrorSymmetry) {
  const Evaluator ev;
  std::mt19937_64 rng(54);
  std::uniform_real_distribution<double> u(0.0, kPi);
  for (int i = 0; i < 100; ++i) {
    const Params p{u(rng), u(rng), u(rng)};
    const auto a = ev.evaluate(p);
    const auto b = ev.evaluate({kPi - p.phi, kPi - p.chi, kPi - p.theta});
    EXPECT_NEAR(a.K_A, b.K_A, 1e-12);
    EXPECT_NEAR(a.weak_K, b.weak_K, 1e-12);
    EXPECT_NEAR(a.Delta_A, b.Delta_A, 1e-12);
  }
}

TEST(ThreeLevel, CoarseScanContainsOrigin) {
  const auto grid = scan(small_scan(2));
  ASSERT_EQ(grid.points.size(), 4u);
  const auto& origin = grid.at(0, 0);
  EXPECT_EQ(origin.theta, 0.0);
  EXPECT_EQ(origin.phi, 0.0);
  ASSERT_TRUE(origin.chi_found);
  EXPECT_NEAR(origin.values.K_A, 1.0, 1e-15);
  EXPECT_EQ(grid.theta_axis.back(), kPi);
}

TEST(ThreeLevel, ScanInvariants) {
  auto opts = small_scan(48);
  opts.weak_epsilon = 1e-3;
  const auto grid = scan(opts);
  ASSERT_EQ(grid.points.size(), 48u * 48u);
  bool violation = false;
  for (const auto& p : grid.points) {
    if (!p.chi_found) continue;
    const auto& v = p.values;
    EXPECT_LT(std::abs(v.delta_a[kA]), opts.chi.residual_tol);
    EXPECT_LE(v.K, 1.0 + v.Delta + 1e-10);
    EXPECT_FALSE(p.k_violated);
    EXPECT_LE(v.weak_K, 1.5 + 1e-10);
    for (int k = 0; k < 3; ++k) {
      const auto s = static_cast<std::size_t>(k);
      EXPECT_NEAR(v.delta[s], 2.0 * v.delta_a[s], 1e-10);
    }
    ASSERT_TRUE(p.weak_eps_K_A.has_value());
    EXPECT_NEAR(*p.weak_eps_K_A, v.weak_K, 1e-2);
    EXPECT_EQ(p.ka_violated, v.K_A > 1.0 + v.Delta_A + 1e-10);
    violation = violation || p.ka_violated;
  }
  EXPECT_TRUE(violation);
}

TEST(ThreeLevel, ScanIndependentOfWorkerCount) {
  auto a = small_scan(24);
  a.workers = 1;
  auto b = a;
  b.workers = 5;
  const auto ga = scan(a);
  const auto gb = scan(b);
  ASSERT_EQ(ga.points.size(), gb.points.size());
  for (std::size_t i = 0; i < ga.points.size(); ++i) {
    EXPECT_EQ(ga.points[i].chi, gb.points[i].chi);
    EXPECT_EQ(ga.points[i].values.K_A, gb.points[i].values.K_A);
  }
}

class ThreeLevelContours : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ScanOptions o;
    o.theta_points = o.phi_points = 128;
    grid_ = new ScanGrid(scan(o, ev_));
    contours_ = new ContourSet(no_signalling_contours(*grid_, ev_));
  }
  static void TearDownTestSuite() {
    delete grid_;
    delete contours_;
  }
  static inline const Evaluator ev_{};
  static inline ScanGrid* grid_ = nullptr;
  static inline ContourSet* contours_ = nullptr;
};

TEST_F(ThreeLevelContours, VerticesOnZeroSet) {
  ASSERT_FALSE(contours_->empty());
  const auto f = delta_a_b_function(ev_);
  for (const auto& pl : contours_->polylines) {
    for (const auto& pt : pl.points) {
      const auto v = f(pt.x, pt.y);
      ASSERT_TRUE(v.has_value());
      EXPECT_LT(std::abs(*v), 1e-8);
    }
  }
}

TEST_F(ThreeLevelContours, SomeContourCrossesViolationRegion) {
  bool crosses = false;
  for (const auto& pl : contours_->polylines) {
    for (const auto& pt : pl.points) {
      const auto chi = solve_chi(ev_, pt.y, pt.x);
      if (chi && ev_.evaluate({pt.y, chi->chi, pt.x}).K_A > 1.0 + 1e-6) crosses = true;
    }
  }
  EXPECT_TRUE(crosses);
}

TEST_F(ThreeLevelContours, ConstrainedMaximum) {
  const auto m = maximize_on_contour(*contours_, Objective::InvertedKA, ev_);
  EXPECT_NEAR(m.value, 1.464, 5e-3);
  for (double d : m.values.delta_a) EXPECT_LT(std::abs(d), 1e-8);
  const auto w = maximize_on_contour(*contours_, Objective::WeakK, ev_);
  EXPECT_NEAR(w.value, 1.147, 5e-3);
}

TEST_F(ThreeLevelContours, ConstraintAloneDoesNotForceViolation) {
  // Non-signalling vertices exist on both sides of the classical bound.
  int above = 0, below = 0;
  for (const auto& pl : contours_->polylines) {
    for (const auto& pt : pl.points) {
      const auto chi = solve_chi(ev_, pt.y, pt.x);
      if (!chi) continue;
      const auto v = ev_.evaluate({pt.y, chi->chi, pt.x});
      (v.K_A > 1.0 + v.Delta_A ? above : below) += 1;
    }
  }
  EXPECT_GT(above, 0);
  EXPECT_GT(below, 0);
}

TEST(ThreeLevel, EmptyContourSetRejected) {
  EXPECT_THROW(maximize_on_contour(ContourSet{}, Objective::InvertedKA, Evaluator()), InvalidParameter);
}

TEST(ThreeLevel, CutMaxima) {
  const Evaluator ev;
  const auto cut = maximize_on_cut(ev, 0.831 * kPi, Objective::InvertedKA);
  ASSERT_TRUE(cut.crossing.has_value());
  EXPECT_NEAR(cut.local.value, 1.482, 5e-3);
  EXPECT_GE(cut.local.value, cut.crossing->value - 1e-12);
  EXPECT_GE(cut.global.value, cut.local.value - 1e-12);
  const auto weak = maximize_on_cut(ev, 0.856 * kPi, Objective::WeakK);
  EXPECT_NEAR(weak.local.value, 1.173, 5e-3);
}
