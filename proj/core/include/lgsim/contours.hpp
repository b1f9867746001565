#pragma once

// Zero-level contours of a sampled scalar field, marching-squares style.
//
// Every crossing found on a cell edge is refined by bisection along that edge
// against the underlying field, so vertices sit on the true zero set rather than
// on a linear interpolant. Crossings whose refined residual stays large are jump
// discontinuities in the field, not zeros, and are dropped.

#include <functional>
#include <optional>
#include <vector>

namespace lgsim {

/// Field sampled on a rectilinear grid; values indexed [ix * y.size() + iy].
/// NaN marks a point where the field is undefined.
struct ScalarGrid {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> values;

  double at(std::size_t ix, std::size_t iy) const { return values[ix * y.size() + iy]; }
};

struct ContourPoint {
  double x = 0.0;
  double y = 0.0;
};

struct Polyline {
  std::vector<ContourPoint> points;
  bool closed = false;
};

struct ContourSet {
  std::vector<Polyline> polylines;
  std::vector<ContourPoint> isolated_zeros;  ///< grid nodes at zero without a crossing (touching zeros)
  int rejected_crossings = 0;                ///< sign changes that turned out to be jumps

  bool empty() const { return polylines.empty(); }
};

/// Underlying field; nullopt where undefined.
using FieldFn = std::function<std::optional<double>(double x, double y)>;

struct ContourOptions {
  double residual_tol = 1e-8;  ///< accepted |f| at a refined vertex
  double edge_xtol = 1e-15;    ///< bisection stop width, relative to edge length
};

/// Traces the zero set of `grid`. With a null `field` vertices are placed by
/// linear interpolation and never rejected.
ContourSet extract_contours(const ScalarGrid& grid, const FieldFn& field = {},
                            const ContourOptions& opts = {});

/// Total polyline length, summed over all polylines.
double total_length(const ContourSet& set);

}  // namespace lgsim
