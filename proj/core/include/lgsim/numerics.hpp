#pragma once

// One-dimensional root finding and maximisation used by the scenario drivers.

#include <functional>
#include <optional>
#include <vector>

namespace lgsim::numerics {

using ScalarFn = std::function<double(double)>;

struct Bracket {
  double lo;
  double hi;
  double f_lo;
  double f_hi;
};

/// Bisection on a sign-changing bracket. Stops when the bracket is narrower
/// than `xtol`, an exact zero is hit, or `max_iter` halvings are done.
/// Throws InvalidParameter if the bracket does not change sign.
double bisect(const ScalarFn& f, Bracket b, double xtol = 1e-15, int max_iter = 200);

/// Brent's method (inverse quadratic interpolation with bisection fallback).
double brent_root(const ScalarFn& f, Bracket b, double xtol = 1e-15, int max_iter = 200);

/// Sign-change brackets of f sampled at `n` evenly spaced points on [a, b]
/// (endpoints included), in increasing order.
std::vector<Bracket> scan_brackets(const ScalarFn& f, double a, double b, int n);

struct Extremum {
  double x;
  double value;
};

/// Golden-section search for a maximum of a unimodal f on [a, b].
Extremum golden_section_max(const ScalarFn& f, double a, double b, double xtol = 1e-10,
                            int max_iter = 200);

}  // namespace lgsim::numerics
