#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "lgsim/contours.hpp"
#include "lgsim/three_level.hpp"

namespace lgsim::cli {

/// 17 significant digits; "nan" / "inf" / "-inf" for non-finite values.
std::string format_double(double v);

/// Fixed CSV column order for scan output. The two weak_eps_* columns are
/// present only when the scan evaluated a finite-epsilon weak detector.
std::vector<std::string> scan_columns(bool with_weak_eps);

std::string scan_csv(const threelevel::ScanGrid& grid, bool with_weak_eps);
std::string scan_jsonl(const threelevel::ScanGrid& grid, bool with_weak_eps);
nlohmann::ordered_json contours_json(const ContourSet& set);

/// JSON number, or null when not finite.
nlohmann::ordered_json number(double v);

struct OutputFile {
  std::filesystem::path path;
  std::string content;
};

/// Writes every file to a temporary sibling and renames it into place only
/// after all temporaries were written, so a failure leaves no partial outputs.
void write_files_atomic(const std::vector<OutputFile>& files);

}  // namespace lgsim::cli
