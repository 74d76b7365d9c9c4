#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wplab/validation.hpp"

namespace wplab {

using Json = nlohmann::ordered_json;

Json to_json(const SolveReport& r);
Json to_json(const Metric& m);
Json to_json(const CheckResult& r);
/// Kind, parameters, grid shape, truncation and excluded area of a surface.
Json surface_json(const ModelSurface& s);

/// Table as CSV: one header line, then rows at 17 significant digits.
std::string csv_text(const Table& t);

/// Log-log scatter with a polyline, for scaling studies. Points with non-positive coordinates are skipped.
std::string loglog_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<double>& x, const std::vector<double>& y);

/// Writes `out/name` in binary mode, creating `out` if needed.
void write_artifact(const std::filesystem::path& out, const std::string& name, const std::string& content);
void write_artifact(const std::filesystem::path& out, const std::string& name, const Json& j);

}  // namespace wplab
