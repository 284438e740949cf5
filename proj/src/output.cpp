#include "facilitrans/output.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace facilitrans {

std::string format_real(Real value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

std::string CsvWriter::escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) {
    throw Error(ErrorCode::DimensionMismatch, "CSV row width differs from header");
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_.push_back(',');
    out_ += escape(fields[i]);
  }
  out_ += "\r\n";
}

void CsvWriter::row(const std::vector<Real>& values) {
  std::vector<std::string> fields;
  fields.reserve(values.size());
  for (Real v : values) fields.push_back(format_real(v));
  row(fields);
}

void CsvWriter::save(const std::filesystem::path& path) const { write_text(path, out_); }

std::string trajectory_csv(const Trajectory& trajectory) {
  const auto n = trajectory.populations.front().size();
  std::vector<std::string> header{"time", "pulse_index"};
  for (Eigen::Index j = 1; j <= n; ++j) header.push_back("pop_site_" + std::to_string(j));
  CsvWriter csv(header);
  for (std::size_t s = 0; s < trajectory.times.size(); ++s) {
    std::vector<std::string> row{format_real(trajectory.times[s]),
                                 std::to_string(trajectory.pulse_of_sample[s])};
    for (Eigen::Index j = 0; j < n; ++j) row.push_back(format_real(trajectory.populations[s][j]));
    csv.row(row);
  }
  return csv.str();
}

namespace {

// Viridis at 0, .25, .5, .75, 1.
constexpr std::array<std::array<int, 3>, 5> kStops{{
    {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};

std::string colour(Real value) {
  const Real x = std::clamp(value, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(x));
  const Real f = x - i;
  char buf[8];
  int rgb[3];
  for (int k = 0; k < 3; ++k) {
    rgb[k] = static_cast<int>(std::lround(kStops[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] * (1 - f) +
                                          kStops[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(k)] * f));
  }
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

}  // namespace

std::string population_heatmap_svg(const std::vector<Real>& times,
                                   const std::vector<RVector>& populations,
                                   const std::vector<Real>& boundaries, std::uint64_t config_hash,
                                   const std::string& title) {
  const int n_sites = static_cast<int>(populations.front().size());
  const double left = 60, top = 30, width = 600, row_h = 24;
  const double height = row_h * n_sites;
  const double t_end = times.back() > 0.0 ? times.back() : 1.0;
  auto x_of = [&](Real t) { return left + width * t / t_end; };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + width + 90
      << "\" height=\"" << top + height + 40 << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
  svg << "<metadata>config-hash fnv1a64:" << hash << "</metadata>\n";
  svg << "<text x=\"" << left << "\" y=\"18\">" << title << "</text>\n";
  for (std::size_t s = 0; s < times.size(); ++s) {
    const Real t0 = s == 0 ? 0.0 : 0.5 * (times[s - 1] + times[s]);
    const Real t1 = s + 1 == times.size() ? times[s] : 0.5 * (times[s] + times[s + 1]);
    const double x0 = x_of(t0), x1 = x_of(t1);
    for (int j = 0; j < n_sites; ++j) {
      svg << "<rect x=\"" << x0 << "\" y=\"" << top + row_h * j << "\" width=\""
          << std::max(x1 - x0, 0.0) + 0.3 << "\" height=\"" << row_h << "\" fill=\""
          << colour(populations[s][j]) << "\"/>\n";
    }
  }
  for (int j = 0; j < n_sites; ++j) {
    svg << "<text x=\"" << left - 8 << "\" y=\"" << top + row_h * j + row_h * 0.65
        << "\" text-anchor=\"end\">site " << j + 1 << "</text>\n";
  }
  for (Real b : boundaries) {
    svg << "<line x1=\"" << x_of(b) << "\" x2=\"" << x_of(b) << "\" y1=\"" << top << "\" y2=\""
        << top + height << "\" stroke=\"white\" stroke-width=\"1\" stroke-dasharray=\"3,2\"/>\n";
  }
  svg << "<text x=\"" << left + width / 2 << "\" y=\"" << top + height + 28
      << "\" text-anchor=\"middle\">time (1/omega)</text>\n";
  for (int k = 0; k <= 10; ++k) {
    const Real v = 1.0 - k / 10.0;
    svg << "<rect x=\"" << left + width + 20 << "\" y=\"" << top + height * k / 11.0
        << "\" width=\"14\" height=\"" << height / 11.0 + 0.3 << "\" fill=\"" << colour(v) << "\"/>\n";
  }
  svg << "<text x=\"" << left + width + 38 << "\" y=\"" << top + 10 << "\">1</text>\n";
  svg << "<text x=\"" << left + width + 38 << "\" y=\"" << top + height << "\">0</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

nlohmann::json to_json(const HierarchyReport& r) {
  return {{"omega_over_v2", r.omega_over_v2},   {"omega_over_dv", r.omega_over_dv},
          {"nnn_ratio", r.nnn_ratio},           {"nnn_bound", r.nnn_bound},
          {"geometric_ratio", r.geometric_ratio}, {"warning", r.warning},
          {"message", r.message}};
}

nlohmann::json to_json(const TruthTable& t) {
  return {{"p0", t.p0}, {"p1", t.p1}, {"fidelity", t.fidelity()}};
}

nlohmann::json to_json(const OptimumReport& r) {
  nlohmann::json best = nlohmann::json::object();
  for (std::size_t k = 0; k < r.names.size(); ++k) best[r.names[k]] = r.best_point[k];
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& step : r.trace) trace.push_back({{"iteration", step.iteration}, {"best", step.best}, {"point", step.point}});
  return {{"parameters", best},
          {"best_objective", r.best_objective},
          {"start_objective", r.start_objective},
          {"iterations", r.iterations},
          {"evaluations", r.evaluations},
          {"converged", r.converged},
          {"max_iterations_reached", r.max_iterations_reached},
          {"at_bound", r.at_bound},
          {"trace", trace}};
}

nlohmann::json to_json(const RVector& v) {
  return std::vector<Real>(v.data(), v.data() + v.size());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Config, "cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

}  // namespace facilitrans
