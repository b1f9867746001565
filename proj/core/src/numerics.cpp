#include "lgsim/numerics.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "lgsim/error.hpp"

namespace lgsim::numerics {

namespace {

bool opposite(double a, double b) { return (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0); }

void require_bracket(const Bracket& b) {
  if (!std::isfinite(b.f_lo) || !std::isfinite(b.f_hi)) {
    throw NumericalError("bracket endpoint evaluates to a non-finite value");
  }
  if (b.f_lo != 0.0 && b.f_hi != 0.0 && !opposite(b.f_lo, b.f_hi)) {
    throw InvalidParameter("bracket does not change sign");
  }
}

}  // namespace

double bisect(const ScalarFn& f, Bracket b, double xtol, int max_iter) {
  require_bracket(b);
  if (b.f_lo == 0.0) return b.lo;
  if (b.f_hi == 0.0) return b.hi;
  double lo = b.lo, hi = b.hi, flo = b.f_lo;
  for (int i = 0; i < max_iter && std::abs(hi - lo) > xtol; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (opposite(flo, fm)) {
      hi = mid;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

double brent_root(const ScalarFn& f, Bracket br, double xtol, int max_iter) {
  require_bracket(br);
  double a = br.lo, b = br.hi, fa = br.f_lo, fb = br.f_hi;
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (std::abs(fa) < std::abs(fb)) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  double c = a, fc = fa, d = b - a;
  bool bisected = true;
  for (int i = 0; i < max_iter; ++i) {
    if (fb == 0.0 || std::abs(b - a) <= xtol) return b;
    double s;
    if (fa != fc && fb != fc) {
      s = a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) +
          c * fa * fb / ((fc - fa) * (fc - fb));
    } else {
      s = b - fb * (b - a) / (fb - fa);
    }
    const double lo = (3.0 * a + b) / 4.0;
    const bool outside = (s - lo) * (s - b) >= 0.0;
    const bool slow = bisected ? std::abs(s - b) >= std::abs(b - c) / 2.0
                               : std::abs(s - b) >= std::abs(c - d) / 2.0;
    const bool tiny = bisected ? std::abs(b - c) < xtol : std::abs(c - d) < xtol;
    if (outside || slow || tiny) {
      s = 0.5 * (a + b);
      bisected = true;
    } else {
      bisected = false;
    }
    const double fs = f(s);
    d = c;
    c = b;
    fc = fb;
    if (opposite(fa, fs)) {
      b = s;
      fb = fs;
    } else {
      a = s;
      fa = fs;
    }
    if (std::abs(fa) < std::abs(fb)) {
      std::swap(a, b);
      std::swap(fa, fb);
    }
  }
  return b;
}

std::vector<Bracket> scan_brackets(const ScalarFn& f, double a, double b, int n) {
  if (n < 2) throw InvalidParameter("scan_brackets needs at least two samples");
  std::vector<Bracket> out;
  double x_prev = a;
  double f_prev = f(a);
  for (int i = 1; i < n; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    const double fx = f(x);
    if (opposite(f_prev, fx) || f_prev == 0.0) out.push_back({x_prev, x, f_prev, fx});
    x_prev = x;
    f_prev = fx;
  }
  if (f_prev == 0.0) out.push_back({x_prev, x_prev, 0.0, 0.0});
  return out;
}

Extremum golden_section_max(const ScalarFn& f, double a, double b, double xtol, int max_iter) {
  if (!(b > a)) throw InvalidParameter("golden-section interval is empty");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < max_iter && (b - a) > xtol; ++i) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 >= f2 ? Extremum{x1, f1} : Extremum{x2, f2};
}

}  // namespace lgsim::numerics
