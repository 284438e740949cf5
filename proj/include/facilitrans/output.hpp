// output.hpp
// Result persistence: RFC 4180 CSV with 17 significant digits, JSON reports,
// and a static SVG population heatmap.

#pragma once

#include "facilitrans/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace facilitrans {

/// "%.17g"
std::string format_real(Real value);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void row(const std::vector<std::string>& fields);
  void row(const std::vector<Real>& values);
  std::string str() const { return out_; }
  void save(const std::filesystem::path& path) const;

 private:
  static std::string escape(const std::string& field);
  std::size_t columns_;
  std::string out_;
};

std::string trajectory_csv(const Trajectory& trajectory);

/// Site x time raster with pulse-boundary rules; colormap is a fixed five-stop
/// viridis approximation over [0, 1].
std::string population_heatmap_svg(const std::vector<Real>& times,
                                   const std::vector<RVector>& populations,
                                   const std::vector<Real>& boundaries, std::uint64_t config_hash,
                                   const std::string& title);

nlohmann::json to_json(const HierarchyReport& report);
nlohmann::json to_json(const TruthTable& table);
nlohmann::json to_json(const OptimumReport& report);
nlohmann::json to_json(const RVector& v);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace facilitrans
