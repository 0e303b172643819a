#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsd/ensemble.hpp"
#include "qsd/lagrangian.hpp"
#include "qsd/lindblad.hpp"
#include "qsd/noise.hpp"
#include "qsd/oscillator.hpp"
#include "qsd/propagator.hpp"

namespace qsd {

using Json = nlohmann::json;

/// Shortest round-trip-exact decimal rendering (printf %.17g).
std::string format_double(double value);

/// Column-oriented CSV writer with a fixed header; every numeric cell goes
/// through format_double so output bytes are a pure function of the values.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& columns);

  void row(const std::vector<double>& values);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t column_count_;
};

void write_json_file(const std::filesystem::path& path, const Json& value);

Json to_json(const MomentReport& report);
Json to_json(const ComparisonReport& report);
Json to_json(const MartingaleReport& report);
Json to_json(const LocalizationReport& report);
Json to_json(const EnsembleStats& stats);     // summary, not the series
Json to_json(const FlowCheckReport& report);  // summary, not the series
Json to_json(const VolumeSeries& series);     // summary, not the series
Json to_json(const ConjugacyReport& report);
Json to_json(const MomentumDriftSeries& series);

void write_trajectory_csv(const std::filesystem::path& path,
                          const TrajectoryRecord& record);
void write_ensemble_csv(const std::filesystem::path& path,
                        const EnsembleStats& stats);
void write_mean_rho_csv(const std::filesystem::path& path,
                        const EnsembleStats& stats);
void write_density_series_csv(const std::filesystem::path& path,
                              const DensitySeries& series);
void write_flow_check_csv(const std::filesystem::path& path,
                          const FlowCheckReport& report);
void write_volume_csv(const std::filesystem::path& path,
                      const VolumeSeries& series);
void write_toy_csv(const std::filesystem::path& path, const ToySeries& series);
void write_conjugacy_csv(const std::filesystem::path& path,
                         const ConjugacyReport& report);
void write_momentum_csv(const std::filesystem::path& path,
                        const MomentumDriftSeries& series,
                        const std::vector<double>& extended_divergences);

}  // namespace qsd
