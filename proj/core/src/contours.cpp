#include "lgsim/contours.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "lgsim/error.hpp"

namespace lgsim {

namespace {

// Zero counts as positive so every corner has a definite side.
bool positive(double v) { return v >= 0.0; }

struct Crossing {
  bool present = false;
  ContourPoint point;
};

class Tracer {
 public:
  Tracer(const ScalarGrid& g, const FieldFn& f, const ContourOptions& o)
      : g_(g), f_(f), o_(o), nx_(g.x.size()), ny_(g.y.size()) {}

  ContourSet run() {
    compute_crossings();
    build_segments();
    link();
    collect_isolated();
    return std::move(out_);
  }

 private:
  // Horizontal edges join (ix, iy)-(ix+1, iy); vertical edges join (ix, iy)-(ix, iy+1).
  std::size_t h_id(std::size_t ix, std::size_t iy) const { return ix * ny_ + iy; }
  std::size_t v_id(std::size_t ix, std::size_t iy) const {
    return (nx_ - 1) * ny_ + ix * (ny_ - 1) + iy;
  }

  Crossing refine(double x0, double y0, double v0, double x1, double y1, double v1) {
    Crossing c;
    if (!std::isfinite(v0) || !std::isfinite(v1) || positive(v0) == positive(v1)) return c;
    if (!f_) {
      const double t = v0 / (v0 - v1);
      c.present = true;
      c.point = {x0 + t * (x1 - x0), y0 + t * (y1 - y0)};
      return c;
    }
    double lo = 0.0, hi = 1.0, flo = v0;
    for (int i = 0; i < 200 && hi - lo > o_.edge_xtol; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      const auto fm = f_(x0 + mid * (x1 - x0), y0 + mid * (y1 - y0));
      if (!fm || !std::isfinite(*fm)) {
        ++out_.rejected_crossings;
        return c;
      }
      if (positive(*fm) == positive(flo)) {
        lo = mid;
        flo = *fm;
      } else {
        hi = mid;
      }
    }
    // Pick the better endpoint of the final bracket.
    const ContourPoint plo{x0 + lo * (x1 - x0), y0 + lo * (y1 - y0)};
    const ContourPoint phi{x0 + hi * (x1 - x0), y0 + hi * (y1 - y0)};
    const auto rlo = f_(plo.x, plo.y);
    const auto rhi = f_(phi.x, phi.y);
    const double alo = rlo ? std::abs(*rlo) : std::numeric_limits<double>::infinity();
    const double ahi = rhi ? std::abs(*rhi) : std::numeric_limits<double>::infinity();
    if (std::min(alo, ahi) > o_.residual_tol) {
      ++out_.rejected_crossings;
      return c;
    }
    c.present = true;
    c.point = alo <= ahi ? plo : phi;
    return c;
  }

  void compute_crossings() {
    if (nx_ < 2 || ny_ < 2) return;
    crossings_.assign((nx_ - 1) * ny_ + nx_ * (ny_ - 1), Crossing{});
    for (std::size_t ix = 0; ix + 1 < nx_; ++ix) {
      for (std::size_t iy = 0; iy < ny_; ++iy) {
        crossings_[h_id(ix, iy)] =
            refine(g_.x[ix], g_.y[iy], g_.at(ix, iy), g_.x[ix + 1], g_.y[iy], g_.at(ix + 1, iy));
      }
    }
    for (std::size_t ix = 0; ix < nx_; ++ix) {
      for (std::size_t iy = 0; iy + 1 < ny_; ++iy) {
        crossings_[v_id(ix, iy)] =
            refine(g_.x[ix], g_.y[iy], g_.at(ix, iy), g_.x[ix], g_.y[iy + 1], g_.at(ix, iy + 1));
      }
    }
  }

  void add_segment(std::size_t a, std::size_t b) {
    const std::size_t s = segments_.size();
    segments_.push_back({a, b});
    incident_[a].push_back(s);
    incident_[b].push_back(s);
  }

  void build_segments() {
    if (crossings_.empty()) return;
    for (std::size_t ix = 0; ix + 1 < nx_; ++ix) {
      for (std::size_t iy = 0; iy + 1 < ny_; ++iy) {
        const double v00 = g_.at(ix, iy), v10 = g_.at(ix + 1, iy);
        const double v11 = g_.at(ix + 1, iy + 1), v01 = g_.at(ix, iy + 1);
        if (!std::isfinite(v00) || !std::isfinite(v10) || !std::isfinite(v11) || !std::isfinite(v01)) {
          continue;
        }
        const std::size_t bottom = h_id(ix, iy), top = h_id(ix, iy + 1);
        const std::size_t left = v_id(ix, iy), right = v_id(ix + 1, iy);
        std::array<std::size_t, 4> edges{bottom, right, top, left};
        std::vector<std::size_t> hit;
        for (auto e : edges) {
          if (crossings_[e].present) hit.push_back(e);
        }
        if (hit.size() == 2) {
          add_segment(hit[0], hit[1]);
        } else if (hit.size() == 4) {
          // Saddle: decide which diagonal pair is connected from the centre.
          double centre = 0.25 * (v00 + v10 + v11 + v01);
          if (f_) {
            if (auto fc = f_(0.5 * (g_.x[ix] + g_.x[ix + 1]), 0.5 * (g_.y[iy] + g_.y[iy + 1]))) {
              centre = *fc;
            }
          }
          if (positive(centre) == positive(v00)) {
            add_segment(bottom, right);
            add_segment(top, left);
          } else {
            add_segment(bottom, left);
            add_segment(top, right);
          }
        }
        // One or three accepted crossings: the zero line meets a rejected jump
        // inside this cell, so nothing is linked here.
      }
    }
  }

  std::size_t other_end(std::size_t seg, std::size_t edge) const {
    const auto& s = segments_[seg];
    return s[0] == edge ? s[1] : s[0];
  }

  Polyline walk(std::size_t start_edge, std::size_t first_seg) {
    Polyline line;
    line.points.push_back(crossings_[start_edge].point);
    std::size_t edge = start_edge;
    std::size_t seg = first_seg;
    while (true) {
      used_[seg] = true;
      edge = other_end(seg, edge);
      line.points.push_back(crossings_[edge].point);
      if (edge == start_edge) {
        line.closed = true;
        break;
      }
      std::size_t next = segments_.size();
      for (auto s : incident_[edge]) {
        if (!used_[s]) {
          next = s;
          break;
        }
      }
      if (next == segments_.size()) break;
      seg = next;
    }
    return line;
  }

  void link() {
    used_.assign(segments_.size(), false);
    // Open chains first, starting from an edge touched by a single segment, in
    // edge order so the output is deterministic.
    std::vector<std::size_t> edges;
    edges.reserve(incident_.size());
    for (const auto& [e, segs] : incident_) edges.push_back(e);
    std::sort(edges.begin(), edges.end());
    for (auto e : edges) {
      const auto& segs = incident_[e];
      if (segs.size() == 1 && !used_[segs[0]]) out_.polylines.push_back(walk(e, segs[0]));
    }
    for (auto e : edges) {
      for (auto s : incident_[e]) {
        if (!used_[s]) out_.polylines.push_back(walk(e, s));
      }
    }
  }

  void collect_isolated() {
    const double tol = o_.residual_tol;
    for (std::size_t ix = 0; ix < nx_; ++ix) {
      for (std::size_t iy = 0; iy < ny_; ++iy) {
        const double v = g_.at(ix, iy);
        if (!std::isfinite(v) || std::abs(v) > tol) continue;
        bool on_crossing = false;
        auto check = [&](bool valid, std::size_t id) {
          if (valid && crossings_[id].present) on_crossing = true;
        };
        if (!crossings_.empty()) {
          check(ix + 1 < nx_, ix + 1 < nx_ ? h_id(ix, iy) : 0);
          check(ix > 0, ix > 0 ? h_id(ix - 1, iy) : 0);
          check(iy + 1 < ny_, iy + 1 < ny_ ? v_id(ix, iy) : 0);
          check(iy > 0, iy > 0 ? v_id(ix, iy - 1) : 0);
        }
        if (!on_crossing) out_.isolated_zeros.push_back({g_.x[ix], g_.y[iy]});
      }
    }
  }

  const ScalarGrid& g_;
  const FieldFn& f_;
  const ContourOptions& o_;
  std::size_t nx_;
  std::size_t ny_;
  std::vector<Crossing> crossings_;
  std::vector<std::array<std::size_t, 2>> segments_;
  std::unordered_map<std::size_t, std::vector<std::size_t>> incident_;
  std::vector<bool> used_;
  ContourSet out_;
};

}  // namespace

ContourSet extract_contours(const ScalarGrid& grid, const FieldFn& field, const ContourOptions& opts) {
  if (grid.values.size() != grid.x.size() * grid.y.size()) {
    throw ConfigError("scalar grid value count does not match its axes");
  }
  return Tracer(grid, field, opts).run();
}

double total_length(const ContourSet& set) {
  double len = 0.0;
  for (const auto& line : set.polylines) {
    for (std::size_t i = 1; i < line.points.size(); ++i) {
      len += std::hypot(line.points[i].x - line.points[i - 1].x, line.points[i].y - line.points[i - 1].y);
    }
  }
  return len;
}

}  // namespace lgsim
