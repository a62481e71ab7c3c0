#ifndef GSRECON_IO_HPP
#define GSRECON_IO_HPP

#include "gsrecon/equil_out.hpp"
#include "gsrecon/inverse.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gsrecon {

/// Text file split into `[name]` sections; data lines keep their line number
/// for error messages. Blank lines and `#` comments are dropped.
struct SectionedText {
  struct Line {
    int number;
    std::string text;
  };
  struct Section {
    std::string name;
    std::vector<Line> lines;
  };
  std::string source;
  std::vector<Section> sections;

  const Section* find(const std::string& name) const;
};

SectionedText parse_sections(std::istream& in, const std::string& source);

// Measurement file: [globals] (Ip, f0, R0 as key = value), [boundary] (one
// flux value per boundary node), [probes] (r z nr nz g), one [chord] per line
// of sight (points "r z" followed by alpha = and beta =), [mse] (r z a1..a6 gamma).
MeasurementSet parse_measurements(std::istream& in, const std::string& source = "<stream>");
MeasurementSet load_measurements(const std::filesystem::path& path);
void write_measurements(std::ostream& out, const MeasurementSet& meas);
void save_measurements(const MeasurementSet& meas, const std::filesystem::path& path);

/// Sets one SolverConfig field from its textual key and value.
void apply_config_entry(SolverConfig& cfg, const std::string& key, const std::string& value);
/// Every SolverConfig field as ordered (key, value) pairs.
std::vector<std::pair<std::string, std::string>> config_entries(const SolverConfig& cfg);
SolverConfig parse_config(std::istream& in, const std::string& source = "<stream>", SolverConfig base = {});
SolverConfig load_config(const std::filesystem::path& path, SolverConfig base = {});
void write_config(std::ostream& out, const SolverConfig& cfg);

/// Contents of a result (or truth) file.
struct ResultFile {
  /// Ordered key/value pairs of the [scalars] section.
  std::vector<std::pair<std::string, std::string>> scalars;
  ProfileTable profiles;
  Eigen::VectorXd psi;
  Polyline boundary;
  /// Spline basis and coefficients; absent in files written without them.
  std::optional<ProfileSet> coefficients;
  std::vector<IterationRecord> trace;

  std::optional<double> scalar(const std::string& key) const;
};

/// Scalars, profile table, flux, boundary and coefficients of a state, plus
/// the iteration trace when given.
ResultFile make_result(const Mesh& mesh, const FluxState& flux, const ProfileSet& profiles,
                       const IterationTrace* trace = nullptr, int table_points = 21);

void write_result(std::ostream& out, const ResultFile& result);
void save_result(const ResultFile& result, const std::filesystem::path& path);
ResultFile parse_result(std::istream& in, const std::string& source = "<stream>");
ResultFile load_result(const std::filesystem::path& path);

struct ResultDifference {
  std::string field;
  double a = 0.0;
  double b = 0.0;
  double error = 0.0;
};

/// Fields of `b` that differ from `a` by more than abs_tol + rel_tol |a|:
/// numeric scalars, profile table columns (max over rows), nodal flux (max
/// norm) and the boundary (Hausdorff distance against abs_tol).
std::vector<ResultDifference> compare_results(const ResultFile& a, const ResultFile& b, double rel_tol,
                                              double abs_tol);

/// "r,z" header then one point per line.
void save_contour_csv(const Polyline& contour, const std::filesystem::path& path);

/// 64-bit FNV-1a of a file's bytes as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

/// Provenance record written once per output directory as manifest.json.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  std::map<std::string, std::string> inputs;  ///< path -> hash
  std::map<std::string, std::string> outputs;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
};

void save_manifest(const RunManifest& manifest, const std::filesystem::path& dir);

}  // namespace gsrecon

#endif  // GSRECON_IO_HPP
