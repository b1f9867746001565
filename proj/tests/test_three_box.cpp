#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "lgsim/three_box.hpp"

using namespace lgsim;

TEST(ThreeBox, MatricesAreValid) {
  EXPECT_NO_THROW(threebox::u21());
  EXPECT_NO_THROW(threebox::u32());
  const RMatrix c = threebox::conditional_matrix();
  EXPECT_EQ(c.rows(), 4);
  EXPECT_EQ(c.cols(), 3);
  EXPECT_LT((c.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-15);
  const auto det = threebox::detector();
  EXPECT_LT(max_abs(RMatrix(det.d() * det.c() - RMatrix::Identity(3, 3))), 1e-10);
  const auto m3 = threebox::t3_measurement();
  EXPECT_EQ(m3.size(), 2);
  EXPECT_EQ(m3.q_labels(), std::vector<int>({1, -1}));
}

TEST(ThreeBox, KprimeValue) {
  const auto r = threebox::run();
  EXPECT_NEAR(r.k_prime.value, -13.0 / 9.0, 1e-10);
  EXPECT_TRUE(r.k_prime.lower_bound);
  EXPECT_NEAR(r.k_prime.bound, -1.0, 1e-10);
  EXPECT_TRUE(r.k_prime.violated);
  EXPECT_NEAR(r.q2.t2_only, r.q2.joint_marginal, 1e-12);
}

TEST(ThreeBox, AmbiguousRunDoesNotSignal) {
  const auto r = threebox::run();
  ASSERT_EQ(r.report.delta_a.size(), 2);
  EXPECT_LT(r.report.delta_a.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(r.report.big_delta_a, 1e-10);
}

TEST(ThreeBox, UnambiguousRunSignals) {
  // With these unitaries the projective t2 measurement does disturb the t3 marginal.
  const auto r = threebox::run();
  EXPECT_NEAR(r.report.delta(0), 2.0 / 9.0, 1e-12);
  EXPECT_NEAR(r.report.delta(1), -2.0 / 9.0, 1e-12);
  const auto via_x = signalling_report_via_X(threebox::protocol(threebox::detector()));
  EXPECT_LT((via_x.delta - r.report.delta).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((via_x.delta_a - r.report.delta_a).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ThreeBox, UnambiguousDetectorRespectsBound) {
  const auto r = threebox::run();
  EXPECT_FALSE(r.k_prime_unambiguous.violated);
  EXPECT_GE(r.k_prime_unambiguous.value, -1.0 - r.report_unambiguous.big_delta - 1e-10);
}

TEST(ThreeBox, ResponseOrderIrrelevant) {
  const RMatrix c = threebox::conditional_matrix();
  std::vector<int> perm(4);
  std::iota(perm.begin(), perm.end(), 0);
  const double reference = threebox::run().k_prime.value;
  do {
    RMatrix pc(4, 3);
    for (int a = 0; a < 4; ++a) pc.row(a) = c.row(perm[static_cast<std::size_t>(a)]);
    const auto proto = threebox::protocol(make_custom_detector(pc));
    const auto t = run_protocol(proto);
    EXPECT_NEAR(correlator_Kprime(t, *proto.detector(), threebox::kQ2, proto.meas3().q_labels()).value, reference,
                1e-12);
  } while (std::next_permutation(perm.begin(), perm.end()));
}
