#include "lgsim_cli/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

#include <unistd.h>

#include "lgsim/error.hpp"

namespace lgsim::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::vector<std::string> scan_columns(bool with_weak_eps) {
  std::vector<std::string> cols{"theta",   "phi",     "chi",     "chi_found", "chi_residual",
                                "delta_A_A", "delta_A_B", "delta_A_C", "delta_A", "delta_B",
                                "delta_C", "K",       "K_A",     "Delta",     "Delta_A",
                                "weak_K",  "k_violated", "ka_violated"};
  if (with_weak_eps) {
    cols.emplace_back("weak_eps_K_A");
    cols.emplace_back("weak_eps_Delta_A");
  }
  return cols;
}

namespace {

std::vector<double> row_values(const threelevel::GridPoint& g, bool with_weak_eps) {
  const double nan = std::nan("");
  const bool ok = g.chi_found;
  const auto& v = g.values;
  auto val = [&](double x) { return ok ? x : nan; };
  std::vector<double> out{g.theta,
                          g.phi,
                          ok ? g.chi : nan,
                          ok ? 1.0 : 0.0,
                          ok ? g.chi_residual : nan,
                          val(v.delta_a[0]),
                          val(v.delta_a[1]),
                          val(v.delta_a[2]),
                          val(v.delta[0]),
                          val(v.delta[1]),
                          val(v.delta[2]),
                          val(v.K),
                          val(v.K_A),
                          val(v.Delta),
                          val(v.Delta_A),
                          val(v.weak_K),
                          g.k_violated ? 1.0 : 0.0,
                          g.ka_violated ? 1.0 : 0.0};
  if (with_weak_eps) {
    out.push_back(g.weak_eps_K_A.value_or(nan));
    out.push_back(g.weak_eps_Delta_A.value_or(nan));
  }
  return out;
}

// Columns that hold flags rather than measurements.
bool is_flag(std::size_t col) { return col == 3 || col == 16 || col == 17; }

}  // namespace

std::string scan_csv(const threelevel::ScanGrid& grid, bool with_weak_eps) {
  const auto cols = scan_columns(with_weak_eps);
  std::string out;
  out.reserve(grid.points.size() * 24 * cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (const auto& g : grid.points) {
    const auto row = row_values(g, with_weak_eps);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += is_flag(i) ? (row[i] != 0.0 ? "1" : "0") : format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string scan_jsonl(const threelevel::ScanGrid& grid, bool with_weak_eps) {
  const auto cols = scan_columns(with_weak_eps);
  std::string out;
  for (const auto& g : grid.points) {
    const auto row = row_values(g, with_weak_eps);
    nlohmann::ordered_json j;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (is_flag(i)) {
        j[cols[i]] = row[i] != 0.0;
      } else if (std::isfinite(row[i])) {
        j[cols[i]] = row[i];
      } else {
        j[cols[i]] = nullptr;
      }
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json contours_json(const ContourSet& set) {
  nlohmann::ordered_json j;
  j["x"] = "theta";
  j["y"] = "phi";
  j["polylines"] = nlohmann::ordered_json::array();
  for (const auto& line : set.polylines) {
    nlohmann::ordered_json l;
    l["closed"] = line.closed;
    l["points"] = nlohmann::ordered_json::array();
    for (const auto& p : line.points) l["points"].push_back({p.x, p.y});
    j["polylines"].push_back(std::move(l));
  }
  j["isolated_zeros"] = nlohmann::ordered_json::array();
  for (const auto& p : set.isolated_zeros) j["isolated_zeros"].push_back({p.x, p.y});
  j["rejected_crossings"] = set.rejected_crossings;
  return j;
}

void write_files_atomic(const std::vector<OutputFile>& files) {
  std::vector<std::filesystem::path> temps;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& t : temps) std::filesystem::remove(t, ec);
  };
  try {
    for (const auto& f : files) {
      if (f.path.has_parent_path()) std::filesystem::create_directories(f.path.parent_path());
      auto tmp = f.path;
      tmp += ".tmp." + std::to_string(::getpid());
      temps.push_back(tmp);
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      if (!os) throw Error("cannot write '" + tmp.string() + "'");
      os.write(f.content.data(), static_cast<std::streamsize>(f.content.size()));
      os.close();
      if (!os) throw Error("short write to '" + tmp.string() + "'");
    }
    for (std::size_t i = 0; i < files.size(); ++i) std::filesystem::rename(temps[i], files[i].path);
  } catch (const std::filesystem::filesystem_error& e) {
    cleanup();
    throw Error(std::string("output failed: ") + e.what());
  } catch (...) {
    cleanup();
    throw;
  }
}

}  // namespace lgsim::cli
