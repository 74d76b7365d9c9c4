#include "wplab/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace wplab {

namespace {

// JSON has no infinities or NaN; they are written as strings so the report stays parseable.
Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

Json to_json(const SolveReport& r) {
  Json j;
  j["stage"] = r.stage;
  j["residual_sup"] = number(r.residual_sup);
  j["residual_l2"] = number(r.residual_l2);
  j["iterations"] = r.iterations;
  j["linear_iterations"] = r.linear_iterations;
  j["grid"] = {r.n0, r.n1};
  j["truncation"] = r.truncation;
  j["excluded_area"] = number(r.excluded_area);
  Json h = Json::array();
  for (double v : r.history) h.push_back(number(v));
  j["history"] = h;
  for (const auto& [k, v] : r.extra) j["extra"][k] = number(v);
  return j;
}

Json to_json(const Metric& m) {
  Json j;
  j["name"] = m.name;
  j["value"] = number(m.value);
  if (m.asserted()) {
    j["relation"] = m.relation;
    j["limit"] = number(m.limit);
    if (m.relation == "in") j["upper"] = number(m.upper);
    j["pass"] = m.ok();
  }
  return j;
}

Json to_json(const CheckResult& r) {
  Json j;
  j["id"] = r.id;
  j["name"] = r.name;
  j["pass"] = r.passed();
  if (!r.error.empty()) j["error"] = r.error;
  Json ms = Json::array();
  for (const auto& m : r.metrics) ms.push_back(to_json(m));
  j["metrics"] = ms;
  Json ts = Json::array();
  for (const auto& t : r.tables) ts.push_back(t.name + ".csv");
  j["tables"] = ts;
  return j;
}

Json surface_json(const ModelSurface& s) {
  Json j;
  j["kind"] = to_string(s.kind());
  if (s.kind() == SurfaceKind::Collar) j["ell"] = s.params().ell;
  if (s.kind() == SurfaceKind::PuncturedTorus) j["tau"] = {s.params().tau.real(), s.params().tau.imag()};
  j["resolution"] = s.resolution();
  j["grid"] = {s.grid().n0(), s.grid().n1()};
  j["truncation"] = s.truncation_summary();
  j["excluded_area"] = number(s.excluded_area());
  return j;
}

std::string csv_text(const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n" << std::setprecision(17);
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

std::string loglog_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
    if (x[i] > 0 && y[i] > 0) pts.emplace_back(std::log10(x[i]), std::log10(y[i]));
  constexpr double w = 480, h = 360, m = 60;
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\" font-size=\"12\">log10 " << x_label
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << h / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << h / 2
     << ")\">log10 " << y_label << "</text>\n";
  os << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << w - 2 * m << "\" height=\"" << h - 2 * m
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (!pts.empty()) {
    auto [xl, xh] = std::minmax_element(pts.begin(), pts.end());
    double x0 = xl->first, x1 = xh->first;
    auto [yl, yh] = std::minmax_element(pts.begin(), pts.end(), [](auto a, auto b) { return a.second < b.second; });
    double y0 = yl->second, y1 = yh->second;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double v) { return m + (v - x0) / (x1 - x0) * (w - 2 * m); };
    auto py = [&](double v) { return h - m - (v - y0) / (y1 - y0) * (h - 2 * m); };
    std::sort(pts.begin(), pts.end());
    os << "<polyline fill=\"none\" stroke=\"steelblue\" points=\"";
    for (const auto& [a, b] : pts) os << px(a) << "," << py(b) << " ";
    os << "\"/>\n";
    for (const auto& [a, b] : pts) os << "<circle cx=\"" << px(a) << "\" cy=\"" << py(b) << "\" r=\"3\" fill=\"steelblue\"/>\n";
    os << "<text x=\"" << m << "\" y=\"" << h - m + 16 << "\" font-size=\"10\">" << x0 << "</text>\n";
    os << "<text x=\"" << w - m << "\" y=\"" << h - m + 16 << "\" font-size=\"10\" text-anchor=\"end\">" << x1
       << "</text>\n";
    os << "<text x=\"" << m - 4 << "\" y=\"" << h - m << "\" font-size=\"10\" text-anchor=\"end\">" << y0 << "</text>\n";
    os << "<text x=\"" << m - 4 << "\" y=\"" << m + 10 << "\" font-size=\"10\" text-anchor=\"end\">" << y1 << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_artifact(const std::filesystem::path& out, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(out);
  std::ofstream f(out / name, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + (out / name).string());
  f << content;
}

void write_artifact(const std::filesystem::path& out, const std::string& name, const Json& j) {
  write_artifact(out, name, j.dump(2) + "\n");
}

}  // namespace wplab
