#pragma once

// Three-level scenario: rho1 = |C><C|, U21 = U32 = U(phi, chi, theta), basis
// measurements with q(A) = -q(B) = q(C) = +1 and an ambiguous t2 detector
// (inverted by default). chi is slaved to (phi, theta) by demanding
// delta_A(A) = 0, which leaves delta_A(B) = -delta_A(C) as the only signalling
// freedom; its zero lines are the no-signalling contours.

#include <array>
#include <optional>
#include <vector>

#include "lgsim/contours.hpp"
#include "lgsim/detectors.hpp"
#include "lgsim/metrics.hpp"

namespace lgsim::threelevel {

inline constexpr int kA = 0;
inline constexpr int kB = 1;
inline constexpr int kC = 2;
inline constexpr std::array<int, 3> kQ{1, -1, 1};

struct Params {
  double phi = 0.0;
  double chi = 0.0;
  double theta = 0.0;
};

/// Real rotation product: phi rotates the BC plane, chi the AC plane, theta
/// the AB plane, applied as R_phi * R_chi * R_theta.
RMatrix rotation_matrix(const Params& p);
UnitaryEvolution build_unitary(const Params& p);

/// Full protocol at `p` with the inverted detector attached.
ExperimentProtocol protocol_at(const Params& p);
ExperimentProtocol protocol_at(const Params& p, std::optional<AmbiguousDetector> det);

/// Everything reported for one parameter point.
struct PointValues {
  std::array<double, 3> delta{};
  std::array<double, 3> delta_a{};
  double K = 0.0;
  double K_A = 0.0;
  double Delta = 0.0;
  double Delta_A = 0.0;
  double weak_K = 0.0;  ///< Heisenberg-picture weak limit, detector independent
};

/// Real-arithmetic fast path for this scenario (the unitary is real and the
/// state pure, so every probability is a squared real amplitude). Tested
/// against the general complex pipeline.
class Evaluator {
 public:
  Evaluator();
  explicit Evaluator(const AmbiguousDetector& det);

  const AmbiguousDetector& detector() const { return det_; }

  PointValues evaluate(const Params& p) const;
  double delta_a(const Params& p, int n3) const;

 private:
  AmbiguousDetector det_;
};

enum class Objective { InvertedKA, WeakK };
double objective_value(const PointValues& v, Objective obj);

struct ChiOptions {
  int samples = 256;
  double xtol = 1e-15;
  double residual_tol = 1e-12;
  double snap = 1e-7;  ///< roots this close to 0 or pi are snapped to 0
};

struct ChiSolution {
  double chi = 0.0;
  double residual = 0.0;  ///< |delta_A(A)| at chi
};

/// chi in [0, pi) with delta_A(A) = 0. The structural factor sin(chi) cos^2(chi)
/// (common to every (phi, theta)) is divided out before bracketing; the
/// remaining factor has one sign change per period and the leftmost bracket is
/// refined by bisection. nullopt where no root passes `residual_tol`.
std::optional<ChiSolution> solve_chi(const Evaluator& ev, double phi, double theta,
                                     const ChiOptions& opts = {});

struct ScanOptions {
  double theta_min = 0.0;
  double theta_max = 3.14159265358979323846;
  double phi_min = 0.0;
  double phi_max = 3.14159265358979323846;
  int theta_points = 512;
  int phi_points = 512;
  int workers = 0;  ///< 0 = hardware concurrency
  ChiOptions chi;
  std::optional<double> weak_epsilon;  ///< also evaluate K_A for a finite-epsilon weak detector
};

struct GridPoint {
  double theta = 0.0;
  double phi = 0.0;
  bool chi_found = false;
  double chi = 0.0;
  double chi_residual = 0.0;
  PointValues values;
  std::optional<double> weak_eps_K_A;
  std::optional<double> weak_eps_Delta_A;
  bool k_violated = false;
  bool ka_violated = false;
};

struct ScanGrid {
  std::vector<double> theta_axis;
  std::vector<double> phi_axis;
  std::vector<GridPoint> points;  ///< row-major: theta index outer, phi index inner

  const GridPoint& at(std::size_t it, std::size_t ip) const { return points[it * phi_axis.size() + ip]; }
};

ScanGrid scan(const ScanOptions& opts);
ScanGrid scan(const ScanOptions& opts, const Evaluator& ev);

/// delta_A(B) over the grid (x = theta, y = phi); NaN where chi has no root.
ScalarGrid delta_a_b_field(const ScanGrid& grid);

/// delta_A(B)(theta, phi) at the solved chi, for contour refinement.
FieldFn delta_a_b_function(const Evaluator& ev, const ChiOptions& opts = {});

ContourSet no_signalling_contours(const ScanGrid& grid, const Evaluator& ev,
                                  const ChiOptions& opts = {});

struct Maximum {
  Params params;
  double value = 0.0;
  PointValues values;
};

/// Maximises the objective along the contours: best vertex, then golden-section
/// search over arclength between its neighbours, with every trial point pulled
/// back onto delta_A(B) = 0 along the local normal. Throws InvalidParameter on
/// an empty set.
Maximum maximize_on_contour(const ContourSet& contours, Objective obj, const Evaluator& ev,
                            const ChiOptions& opts = {});

struct CutResult {
  Maximum local;   ///< local maximum reached by ascent from the start point
  Maximum global;  ///< best sample on the whole cut
  std::optional<Maximum> crossing;  ///< best no-signalling point on the cut, if any
};

/// Objective along theta in [0, pi] at fixed phi (chi solved per point). The
/// local maximum is found by hill-climbing the sampled cut and refining with
/// golden-section search. The climb starts at `theta_start` when given, else at
/// the cut's own delta_A(B) = 0 crossing with the largest objective.
CutResult maximize_on_cut(const Evaluator& ev, double phi, Objective obj,
                          std::optional<double> theta_start = std::nullopt, int samples = 2001,
                          const ChiOptions& opts = {});

}  // namespace lgsim::threelevel
