#include "lgsim/three_level.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "lgsim/error.hpp"
#include "lgsim/numerics.hpp"

namespace lgsim::threelevel {

namespace {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Mat3 rotation3(const Params& p) {
  const double cp = std::cos(p.phi), sp = std::sin(p.phi);
  const double cx = std::cos(p.chi), sx = std::sin(p.chi);
  const double ct = std::cos(p.theta), st = std::sin(p.theta);
  Mat3 r1;
  r1 << 1, 0, 0, 0, cp, sp, 0, -sp, cp;
  Mat3 r2;
  r2 << cx, 0, sx, 0, 1, 0, -sx, 0, cx;
  Mat3 r3;
  r3 << ct, st, 0, -st, ct, 0, 0, 0, 1;
  return r1 * r2 * r3;
}

LabeledProjectorSet basis() {
  return LabeledProjectorSet::computational_basis({kQ[0], kQ[1], kQ[2]}, {"A", "B", "C"});
}

}  // namespace

RMatrix rotation_matrix(const Params& p) { return rotation3(p); }

UnitaryEvolution build_unitary(const Params& p) {
  return UnitaryEvolution(rotation3(p).cast<Complex>());
}

ExperimentProtocol protocol_at(const Params& p) { return protocol_at(p, make_inverted_detector(3)); }

ExperimentProtocol protocol_at(const Params& p, std::optional<AmbiguousDetector> det) {
  const UnitaryEvolution u = build_unitary(p);
  return ExperimentProtocol(DensityMatrix::basis_state(3, kC), u, u, basis(), std::move(det), basis());
}

Evaluator::Evaluator() : Evaluator(make_inverted_detector(3)) {}

Evaluator::Evaluator(const AmbiguousDetector& det) : det_(det) {
  if (det_.states() != 3) throw ConfigError("three-level evaluator needs a 3-state detector");
}

PointValues Evaluator::evaluate(const Params& p) const {
  const Mat3 u = rotation3(p);
  const Vec3 psi = u.col(kC);
  const Vec3 amp3 = u * psi;
  const RMatrix& s = det_.sqrt_c();
  const int ma = det_.responses();

  Vec3 p3 = amp3.cwiseAbs2();
  Mat3 p32;
  for (int n3 = 0; n3 < 3; ++n3) {
    for (int n2 = 0; n2 < 3; ++n2) p32(n3, n2) = std::pow(u(n3, n2) * psi(n2), 2);
  }
  RMatrix p3a(3, ma);
  for (int a = 0; a < ma; ++a) {
    const Vec3 branch = s.row(a).transpose().cwiseProduct(psi);
    p3a.col(a) = (u * branch).cwiseAbs2();
  }
  const RMatrix joint = p3a * det_.d().transpose();

  PointValues v;
  double k = 0.0, ka = 0.0;
  for (int n3 = 0; n3 < 3; ++n3) {
    v.delta[n3] = p3(n3) - p32.row(n3).sum();
    v.delta_a[n3] = p3(n3) - p3a.row(n3).sum();
    v.Delta += std::abs(v.delta[n3]);
    v.Delta_A += std::abs(v.delta_a[n3]);
    for (int n2 = 0; n2 < 3; ++n2) {
      const double w = kQ[n2] + kQ[n2] * kQ[n3] - kQ[n3];
      k += w * p32(n3, n2);
      ka += w * joint(n3, n2);
    }
    k -= kQ[n3] * v.delta[n3];
    ka -= kQ[n3] * v.delta_a[n3];
  }
  v.K = k;
  v.K_A = ka;

  const Mat3 q = Vec3(kQ[0], kQ[1], kQ[2]).asDiagonal();
  const Mat3 u2 = u * u;
  const Mat3 q2 = u.transpose() * q * u;
  const Mat3 q3 = u2.transpose() * q * u2;
  const Mat3 op = q2 + 0.5 * (q2 * q3 + q3 * q2) - q3;
  v.weak_K = op(kC, kC);
  return v;
}

double Evaluator::delta_a(const Params& p, int n3) const {
  const Mat3 u = rotation3(p);
  const Vec3 psi = u.col(kC);
  const Eigen::RowVector3d row = u.row(n3);
  const RMatrix& s = det_.sqrt_c();
  double acc = std::pow(row.dot(psi), 2);
  for (int a = 0; a < det_.responses(); ++a) {
    double amp = 0.0;
    for (int k = 0; k < 3; ++k) amp += row(k) * s(a, k) * psi(k);
    acc -= amp * amp;
  }
  return acc;
}

double objective_value(const PointValues& v, Objective obj) {
  return obj == Objective::InvertedKA ? v.K_A : v.weak_K;
}

std::optional<ChiSolution> solve_chi(const Evaluator& ev, double phi, double theta,
                                     const ChiOptions& opts) {
  if (opts.samples < 2) throw InvalidParameter("chi solve needs at least two samples");
  if (!(opts.residual_tol > 0.0)) throw InvalidParameter("chi tolerance must be positive");
  auto raw = [&](double chi) { return ev.delta_a(Params{phi, chi, theta}, kA); };
  auto divided = [&](double chi) {
    const double c = std::cos(chi);
    return raw(chi) / (std::sin(chi) * c * c);
  };
  // The quotient loses all precision right at the structural zeros, where a
  // symmetric bracket puts its midpoint. Inside a small window around each
  // zero it is replaced by the chord between the window edges (the double
  // zero at pi/2 needs a wider window than the simple ones at 0 and pi).
  auto deflated = [&](double chi) {
    struct Window {
      double at;
      double half;
    };
    static constexpr Window kWindows[] = {{0.0, 1e-5}, {0.5 * kPi, 1e-4}, {kPi, 1e-5}};
    for (const auto& w : kWindows) {
      if (std::abs(chi - w.at) < w.half) {
        const double lo = w.at - w.half, hi = w.at + w.half;
        const double t = (chi - lo) / (hi - lo);
        return (1.0 - t) * divided(lo) + t * divided(hi);
      }
    }
    return divided(chi);
  };

  const int n = opts.samples;
  const double step = kPi / n;
  std::vector<double> xs(static_cast<std::size_t>(n));
  std::vector<double> hs(static_cast<std::size_t>(n));
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    xs[static_cast<std::size_t>(i)] = (i + 0.5) * step;
    hs[static_cast<std::size_t>(i)] = deflated(xs[static_cast<std::size_t>(i)]);
    scale = std::max(scale, std::abs(hs[static_cast<std::size_t>(i)]));
  }
  if (!(scale > 1e-13)) return std::nullopt;  // degenerate: delta_A(A) vanishes for every chi

  std::vector<numerics::Bracket> brackets;
  for (int i = 0; i + 1 < n; ++i) {
    const double a = hs[static_cast<std::size_t>(i)], b = hs[static_cast<std::size_t>(i + 1)];
    if ((a < 0.0) != (b < 0.0)) {
      brackets.push_back({xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(i + 1)], a, b});
    }
  }
  // The deflated function is antiperiodic in pi, so the bracket across the
  // pi boundary is [x_last, x_0 + pi] with value -h(x_0) at its right end.
  {
    const double a = hs.back(), b = -hs.front();
    if ((a < 0.0) != (b < 0.0)) brackets.push_back({xs.back(), xs.front() + kPi, a, b});
  }
  if (brackets.empty()) return std::nullopt;

  std::optional<ChiSolution> best;
  for (const auto& br : brackets) {
    double root = numerics::bisect(deflated, br, opts.xtol);
    root -= kPi * std::floor(root / kPi);
    if (root < opts.snap || kPi - root < opts.snap) root = 0.0;
    const double residual = std::abs(raw(root));
    if (!(residual < opts.residual_tol)) continue;
    if (!best || root < best->chi) best = ChiSolution{root, residual};
  }
  return best;
}

// ---------------------------------------------------------------------------
// Grid scan

namespace {

std::vector<double> axis(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = hi;
  return out;
}

void validate(const ScanOptions& o) {
  if (o.theta_points < 2 || o.phi_points < 2) throw ConfigError("resolution must be at least 2 per axis");
  if (!(o.theta_max > o.theta_min) || !(o.phi_max > o.phi_min)) {
    throw ConfigError("scan ranges must be non-empty");
  }
  if (!std::isfinite(o.theta_min) || !std::isfinite(o.theta_max) || !std::isfinite(o.phi_min) ||
      !std::isfinite(o.phi_max)) {
    throw ConfigError("scan ranges must be finite");
  }
  if (o.workers < 0) throw ConfigError("worker count must be non-negative");
}

}  // namespace

ScanGrid scan(const ScanOptions& opts) { return scan(opts, Evaluator()); }

ScanGrid scan(const ScanOptions& opts, const Evaluator& ev) {
  validate(opts);
  std::optional<Evaluator> weak;
  if (opts.weak_epsilon) weak.emplace(make_weak_detector(3, *opts.weak_epsilon));

  ScanGrid grid;
  grid.theta_axis = axis(opts.theta_min, opts.theta_max, opts.theta_points);
  grid.phi_axis = axis(opts.phi_min, opts.phi_max, opts.phi_points);
  const std::size_t nt = grid.theta_axis.size(), np = grid.phi_axis.size();
  grid.points.resize(nt * np);

  auto fill_row = [&](std::size_t it) {
    for (std::size_t ip = 0; ip < np; ++ip) {
      GridPoint& g = grid.points[it * np + ip];
      g.theta = grid.theta_axis[it];
      g.phi = grid.phi_axis[ip];
      const auto sol = solve_chi(ev, g.phi, g.theta, opts.chi);
      if (!sol) {
        g.chi = kNaN;
        g.chi_residual = kNaN;
        continue;
      }
      g.chi_found = true;
      g.chi = sol->chi;
      g.chi_residual = sol->residual;
      const Params p{g.phi, g.chi, g.theta};
      g.values = ev.evaluate(p);
      g.k_violated = g.values.K > 1.0 + g.values.Delta + tol::kViolation;
      g.ka_violated = g.values.K_A > 1.0 + g.values.Delta_A + tol::kViolation;
      if (weak) {
        const PointValues wv = weak->evaluate(p);
        g.weak_eps_K_A = wv.K_A;
        g.weak_eps_Delta_A = wv.Delta_A;
      }
    }
  };

  unsigned workers = opts.workers > 0 ? static_cast<unsigned>(opts.workers)
                                      : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(nt));
  if (workers <= 1) {
    for (std::size_t it = 0; it < nt; ++it) fill_row(it);
    return grid;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr failure;
  std::mutex failure_mu;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::size_t it = next++; it < nt; it = next++) fill_row(it);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return grid;
}

ScalarGrid delta_a_b_field(const ScanGrid& grid) {
  ScalarGrid f;
  f.x = grid.theta_axis;
  f.y = grid.phi_axis;
  f.values.reserve(grid.points.size());
  for (const auto& g : grid.points) f.values.push_back(g.chi_found ? g.values.delta_a[kB] : kNaN);
  return f;
}

FieldFn delta_a_b_function(const Evaluator& ev, const ChiOptions& opts) {
  return [&ev, opts](double theta, double phi) -> std::optional<double> {
    const auto sol = solve_chi(ev, phi, theta, opts);
    if (!sol) return std::nullopt;
    return ev.delta_a(Params{phi, sol->chi, theta}, kB);
  };
}

ContourSet no_signalling_contours(const ScanGrid& grid, const Evaluator& ev, const ChiOptions& opts) {
  return extract_contours(delta_a_b_field(grid), delta_a_b_function(ev, opts));
}

// ---------------------------------------------------------------------------
// Constrained maxima

namespace {

std::optional<Maximum> evaluate_at(const Evaluator& ev, double theta, double phi, Objective obj,
                                   const ChiOptions& opts) {
  const auto sol = solve_chi(ev, phi, theta, opts);
  if (!sol) return std::nullopt;
  Maximum m;
  m.params = Params{phi, sol->chi, theta};
  m.values = ev.evaluate(m.params);
  m.value = objective_value(m.values, obj);
  return m;
}

}  // namespace

Maximum maximize_on_contour(const ContourSet& contours, Objective obj, const Evaluator& ev,
                            const ChiOptions& opts) {
  if (contours.empty()) throw InvalidParameter("no contours to maximise along");
  const FieldFn field = delta_a_b_function(ev, opts);

  std::optional<Maximum> best;
  std::size_t best_line = 0, best_idx = 0;
  for (std::size_t l = 0; l < contours.polylines.size(); ++l) {
    const auto& pts = contours.polylines[l].points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      auto m = evaluate_at(ev, pts[i].x, pts[i].y, obj, opts);
      if (m && (!best || m->value > best->value)) {
        best = m;
        best_line = l;
        best_idx = i;
      }
    }
  }
  if (!best) throw NumericalError("no contour vertex admits a chi solution");

  const auto& pts = contours.polylines[best_line].points;
  if (pts.size() < 2) return *best;
  const std::size_t lo = best_idx == 0 ? 0 : best_idx - 1;
  const std::size_t hi = std::min(best_idx + 1, pts.size() - 1);
  const double s1 = std::hypot(pts[best_idx].x - pts[lo].x, pts[best_idx].y - pts[lo].y);
  const double s2 = s1 + std::hypot(pts[hi].x - pts[best_idx].x, pts[hi].y - pts[best_idx].y);
  if (!(s2 > 0.0)) return *best;

  double tx = pts[hi].x - pts[lo].x, ty = pts[hi].y - pts[lo].y;
  const double tn = std::hypot(tx, ty);
  tx /= tn;
  ty /= tn;
  const double nx = -ty, ny = tx;
  const double reach = s2;

  auto along = [&](double s) {
    if (s <= s1 && s1 > 0.0) {
      const double t = s / s1;
      return ContourPoint{pts[lo].x + t * (pts[best_idx].x - pts[lo].x),
                          pts[lo].y + t * (pts[best_idx].y - pts[lo].y)};
    }
    const double seg = s2 - s1;
    const double t = seg > 0.0 ? (s - s1) / seg : 0.0;
    return ContourPoint{pts[best_idx].x + t * (pts[hi].x - pts[best_idx].x),
                        pts[best_idx].y + t * (pts[hi].y - pts[best_idx].y)};
  };

  // Pull a point back onto the zero set along the fixed normal.
  auto project = [&](ContourPoint p) -> std::optional<ContourPoint> {
    auto g = [&](double t) {
      const auto v = field(p.x + t * nx, p.y + t * ny);
      return v ? *v : kNaN;
    };
    const double g0 = g(0.0);
    if (!std::isfinite(g0)) return std::nullopt;
    if (std::abs(g0) <= 1e-14) return p;
    for (int k = 1; k <= 8; ++k) {
      const double t = reach * k / 8.0;
      for (double sgn : {1.0, -1.0}) {
        const double gt = g(sgn * t);
        if (std::isfinite(gt) && (gt < 0.0) != (g0 < 0.0)) {
          const double inner = sgn * reach * (k - 1) / 8.0;
          const double g_inner = k == 1 ? g0 : g(inner);
          if (!std::isfinite(g_inner) || (g_inner < 0.0) == (gt < 0.0)) continue;
          numerics::Bracket br = sgn > 0 ? numerics::Bracket{inner, sgn * t, g_inner, gt}
                                         : numerics::Bracket{sgn * t, inner, gt, g_inner};
          const double root = numerics::bisect(g, br, 1e-15);
          const double r = g(root);
          if (!(std::abs(r) <= 1e-9)) return std::nullopt;
          return ContourPoint{p.x + root * nx, p.y + root * ny};
        }
      }
    }
    return std::nullopt;
  };

  auto score = [&](double s) {
    const auto q = project(along(s));
    if (!q) return kNegInf;
    const auto m = evaluate_at(ev, q->x, q->y, obj, opts);
    return m ? m->value : kNegInf;
  };

  const auto ext = numerics::golden_section_max(score, 0.0, s2, 1e-12);
  if (ext.value > best->value) {
    const auto q = project(along(ext.x));
    if (q) {
      if (auto m = evaluate_at(ev, q->x, q->y, obj, opts); m && m->value > best->value) best = m;
    }
  }
  return *best;
}

CutResult maximize_on_cut(const Evaluator& ev, double phi, Objective obj,
                          std::optional<double> theta_start, int samples, const ChiOptions& opts) {
  if (samples < 3) throw InvalidParameter("cut needs at least three samples");
  const std::vector<double> th = axis(0.0, kPi, samples);
  std::vector<double> val(th.size(), kNegInf);
  std::vector<double> dab(th.size(), kNaN);
  std::optional<Maximum> global;
  for (std::size_t k = 0; k < th.size(); ++k) {
    if (auto m = evaluate_at(ev, th[k], phi, obj, opts)) {
      val[k] = m->value;
      dab[k] = m->values.delta_a[kB];
      if (!global || m->value > global->value) global = m;
    }
  }
  if (!global) throw NumericalError("chi has no root anywhere on the cut");

  CutResult r;
  const FieldFn field = delta_a_b_function(ev, opts);
  auto g = [&](double theta) {
    const auto v = field(theta, phi);
    return v ? *v : kNaN;
  };
  for (std::size_t k = 0; k + 1 < th.size(); ++k) {
    if (!std::isfinite(dab[k]) || !std::isfinite(dab[k + 1]) || (dab[k] < 0.0) == (dab[k + 1] < 0.0)) {
      continue;
    }
    const double root = numerics::bisect(g, {th[k], th[k + 1], dab[k], dab[k + 1]}, 1e-15);
    const double res = g(root);
    if (!(std::abs(res) <= 1e-9)) continue;  // chi branch jump, not a zero
    auto m = evaluate_at(ev, root, phi, obj, opts);
    if (m && (!r.crossing || m->value > r.crossing->value)) r.crossing = m;
  }

  double start;
  if (theta_start) {
    start = *theta_start;
  } else if (r.crossing) {
    start = r.crossing->params.theta;
  } else {
    throw NumericalError("cut has no no-signalling crossing to start from");
  }

  const double pos = std::clamp(start / kPi, 0.0, 1.0) * static_cast<double>(samples - 1);
  std::size_t k = static_cast<std::size_t>(std::lround(pos));
  while (true) {
    std::size_t next = k;
    if (k > 0 && val[k - 1] > val[next]) next = k - 1;
    if (k + 1 < val.size() && val[k + 1] > val[next]) next = k + 1;
    if (next == k) break;
    k = next;
  }
  if (!std::isfinite(val[k])) throw NumericalError("ascent started at a point without a chi root");

  const double a = th[k == 0 ? 0 : k - 1];
  const double b = th[std::min(k + 1, th.size() - 1)];
  auto f = [&](double theta) {
    const auto m = evaluate_at(ev, theta, phi, obj, opts);
    return m ? m->value : kNegInf;
  };
  const auto ext = numerics::golden_section_max(f, a, b, 1e-12);
  r.local = *evaluate_at(ev, th[k], phi, obj, opts);
  if (ext.value > r.local.value) {
    if (auto m = evaluate_at(ev, ext.x, phi, obj, opts)) r.local = *m;
  }
  r.global = r.local.value > global->value ? r.local : *global;
  return r;
}

}  // namespace lgsim::threelevel
