#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lgsim/error.hpp"
#include "lgsim/numerics.hpp"

using namespace lgsim;
using namespace lgsim::numerics;

TEST(Numerics, BisectFindsSqrtTwo) {
  const ScalarFn f = [](double x) { return x * x - 2.0; };
  const double r = bisect(f, {0.0, 2.0, f(0.0), f(2.0)});
  EXPECT_NEAR(r, std::sqrt(2.0), 4e-16);
}

TEST(Numerics, BisectRejectsSameSign) {
  const ScalarFn f = [](double x) { return x * x + 1.0; };
  EXPECT_THROW(bisect(f, {0.0, 1.0, f(0.0), f(1.0)}), InvalidParameter);
}

TEST(Numerics, BisectExactZeroAtEndpoint) {
  const ScalarFn f = [](double x) { return x - 1.0; };
  EXPECT_EQ(bisect(f, {1.0, 3.0, 0.0, 2.0}), 1.0);
}

TEST(Numerics, BrentMatchesBisection) {
  const ScalarFn f = [](double x) { return std::cos(x) - x; };
  const Bracket b{0.0, 1.0, f(0.0), f(1.0)};
  EXPECT_NEAR(brent_root(f, b), bisect(f, b), 1e-14);
}

TEST(Numerics, ScanBracketsFindsAllSignChanges) {
  const ScalarFn f = [](double x) { return std::sin(x); };
  const auto br = scan_brackets(f, 0.5, 10.0, 200);
  ASSERT_EQ(br.size(), 3u);
  const double pi = std::numbers::pi;
  for (std::size_t k = 0; k < br.size(); ++k) {
    EXPECT_LE(br[k].lo, (k + 1) * pi);
    EXPECT_GE(br[k].hi, (k + 1) * pi);
    EXPECT_LT(br[k].lo, br[k].hi);
  }
}

TEST(Numerics, GoldenSectionMax) {
  const auto e = golden_section_max([](double x) { return -(x - 0.3) * (x - 0.3) + 2.0; }, -1.0, 1.0);
  EXPECT_NEAR(e.x, 0.3, 1e-7);
  EXPECT_NEAR(e.value, 2.0, 1e-15);
}
