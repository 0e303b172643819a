#include "qsd/io.hpp"

#include <cstdio>

namespace qsd {

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& columns)
    : path_(path), column_count_(columns.size()) {
  if (columns.empty()) {
    throw Error(ErrorKind::invalid_argument, "CSV needs at least one column");
  }
  out_.open(path, std::ios::out | std::ios::trunc);
  if (!out_) {
    throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out_ << (c == 0 ? "" : ",") << columns[c];
  }
  out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != column_count_) {
    throw Error(ErrorKind::invalid_argument,
                "CSV row has " + std::to_string(values.size()) +
                    " cells, expected " + std::to_string(column_count_));
  }
  for (std::size_t c = 0; c < values.size(); ++c) {
    out_ << (c == 0 ? "" : ",") << format_double(values[c]);
  }
  out_ << "\n";
}

void CsvWriter::close() {
  out_.flush();
  if (!out_) {
    throw Error(ErrorKind::io, "write to " + path_.string() + " failed");
  }
  out_.close();
}

void write_json_file(const std::filesystem::path& path, const Json& value) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  }
  out << value.dump(2) << "\n";
  out.flush();
  if (!out) {
    throw Error(ErrorKind::io, "write to " + path.string() + " failed");
  }
}

Json to_json(const MomentReport& report) {
  return Json{{"seed", report.seed},
              {"stream_count", report.stream_count},
              {"draws_per_stream", report.draws_per_stream},
              {"dt", report.dt},
              {"mean", {{"re", report.mean_re}, {"im", report.mean_im},
                        {"se", report.se_mean}}},
              {"mean_square", {{"re", report.mean_sq_re},
                               {"im", report.mean_sq_im},
                               {"se", report.se_sq}}},
              {"mean_abs_square",
               {{"value", report.mean_abs_sq},
                {"target", report.dt},
                {"se", report.se_abs_sq}}},
              {"cross_stream_correlation",
               {{"re", report.cross_corr_re},
                {"im", report.cross_corr_im},
                {"se", report.se_cross}}},
              {"max_sigma_deviation", report.max_sigma_deviation()}};
}

Json to_json(const ComparisonReport& report) {
  return Json{{"max_trace_distance", report.max_distance},
              {"threshold", report.threshold},
              {"pass", report.pass},
              {"points", report.times.size()}};
}

Json to_json(const MartingaleReport& report) {
  return Json{{"applicable", report.applicable},
              {"commutator_norm", report.commutator_norm},
              {"max_abs_z", report.max_abs_z},
              {"sigma_bound", report.sigma_bound},
              {"pass", report.pass}};
}

Json to_json(const LocalizationReport& report) {
  return Json{{"final_mean_variance", report.final_mean_variance},
              {"sharp_fraction", report.sharp_fraction},
              {"sharp_level", report.sharp_level}};
}

Json to_json(const EnsembleStats& stats) {
  Json eigenvalues = Json::array();
  for (long k = 0; k < stats.spectrum.distinct_values.size(); ++k) {
    eigenvalues.push_back(stats.spectrum.distinct_values(k));
  }
  return Json{{"trajectories", stats.trajectories},
              {"master_seed", stats.master_seed},
              {"dim", stats.dim},
              {"distinct_eigenvalues", eigenvalues},
              {"final_assignment_counts", stats.final_assignment_counts},
              {"final_fractions", stats.final_fractions},
              {"sharp_fraction", stats.sharp_fraction},
              {"sharp_level", stats.sharp_level},
              {"mean_final_max_population", stats.mean_final_max_population},
              {"final_mean_variance", stats.mean_variance.empty()
                                          ? 0.0
                                          : stats.mean_variance.back()}};
}

Json to_json(const FlowCheckReport& report) {
  return Json{{"max_canonical_deviation", report.max_canonical_deviation},
              {"max_amplitude_deviation", report.max_amplitude_deviation},
              {"max_cross_deviation", report.max_cross_deviation},
              {"max_energy_drift", report.max_energy_drift},
              {"tolerance", report.tolerance},
              {"pass", report.pass}};
}

Json to_json(const VolumeSeries& series) {
  return Json{{"initial_log_volume", series.initial_log_volume},
              {"final_log_volume", series.final_log_volume},
              {"log_volume_drop",
               series.initial_log_volume - series.final_log_volume},
              {"initial_rank", series.rank.empty() ? 0 : series.rank.front()},
              {"final_rank", series.rank.empty() ? 0 : series.rank.back()}};
}

Json to_json(const ConjugacyReport& report) {
  return Json{{"max_deviation", report.max_deviation},
              {"deviation_spread", report.deviation_spread},
              {"conjugate_preserved", report.conjugate_preserved}};
}

Json to_json(const MomentumDriftSeries& series) {
  return Json{{"max_deviation", series.max_deviation},
              {"final_deviation", series.final_deviation},
              {"points", series.times.size()}};
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const TrajectoryRecord& record) {
  const long dim = record.states.empty() ? 0 : record.states.front().size();
  std::vector<std::string> columns{"t"};
  for (long j = 0; j < dim; ++j) {
    columns.push_back("re_" + std::to_string(j));
    columns.push_back("im_" + std::to_string(j));
  }
  columns.insert(columns.end(), {"coupling_mean", "coupling_var", "norm"});

  CsvWriter csv(path, columns);
  std::vector<double> cells;
  for (std::size_t r = 0; r < record.times.size(); ++r) {
    cells.clear();
    cells.push_back(record.times[r]);
    for (long j = 0; j < dim; ++j) {
      cells.push_back(record.states[r](j).real());
      cells.push_back(record.states[r](j).imag());
    }
    cells.push_back(record.coupling_mean[r]);
    cells.push_back(record.coupling_var[r]);
    cells.push_back(record.norms[r]);
    csv.row(cells);
  }
  csv.close();
}

void write_ensemble_csv(const std::filesystem::path& path,
                        const EnsembleStats& stats) {
  std::vector<std::string> columns{"t",          "mean_coupling",
                                   "se_coupling", "mean_variance",
                                   "mean_shift",  "se_shift"};
  for (int k = 0; k < stats.spectrum.group_count(); ++k) {
    columns.push_back("pop_" + std::to_string(k));
  }
  CsvWriter csv(path, columns);
  std::vector<double> cells;
  for (std::size_t r = 0; r < stats.times.size(); ++r) {
    cells.clear();
    cells.insert(cells.end(),
                 {stats.times[r], stats.mean_coupling[r], stats.se_coupling[r],
                  stats.mean_variance[r], stats.mean_shift[r],
                  stats.se_shift[r]});
    for (double p : stats.mean_populations[r]) {
      cells.push_back(p);
    }
    csv.row(cells);
  }
  csv.close();
}

namespace {

void write_matrix_series(const std::filesystem::path& path,
                         const std::vector<double>& times,
                         const std::vector<Matrix>& states) {
  const long dim = states.empty() ? 0 : states.front().rows();
  std::vector<std::string> columns{"t"};
  for (long j = 0; j < dim; ++j) {
    for (long k = 0; k < dim; ++k) {
      const std::string cell = std::to_string(j) + "_" + std::to_string(k);
      columns.push_back("re_" + cell);
      columns.push_back("im_" + cell);
    }
  }
  CsvWriter csv(path, columns);
  std::vector<double> cells;
  for (std::size_t r = 0; r < times.size(); ++r) {
    cells.clear();
    cells.push_back(times[r]);
    for (long j = 0; j < dim; ++j) {
      for (long k = 0; k < dim; ++k) {
        cells.push_back(states[r](j, k).real());
        cells.push_back(states[r](j, k).imag());
      }
    }
    csv.row(cells);
  }
  csv.close();
}

}  // namespace

void write_mean_rho_csv(const std::filesystem::path& path,
                        const EnsembleStats& stats) {
  write_matrix_series(path, stats.times, stats.mean_rho);
}

void write_density_series_csv(const std::filesystem::path& path,
                              const DensitySeries& series) {
  write_matrix_series(path, series.times, series.states);
}

void write_flow_check_csv(const std::filesystem::path& path,
                          const FlowCheckReport& report) {
  const long modes = report.q.empty() ? 0 : report.q.front().size();
  std::vector<std::string> columns{"t"};
  for (long j = 0; j < modes; ++j) {
    columns.push_back("q_" + std::to_string(j));
    columns.push_back("p_" + std::to_string(j));
  }
  CsvWriter csv(path, columns);
  std::vector<double> cells;
  for (std::size_t r = 0; r < report.times.size(); ++r) {
    cells.clear();
    cells.push_back(report.times[r]);
    for (long j = 0; j < modes; ++j) {
      cells.push_back(report.q[r](j));
      cells.push_back(report.p[r](j));
    }
    csv.row(cells);
  }
  csv.close();
}

void write_volume_csv(const std::filesystem::path& path,
                      const VolumeSeries& series) {
  CsvWriter csv(path, {"t", "log_volume", "rank"});
  for (std::size_t r = 0; r < series.times.size(); ++r) {
    csv.row({series.times[r], series.log_volume[r],
             static_cast<double>(series.rank[r])});
  }
  csv.close();
}

void write_toy_csv(const std::filesystem::path& path, const ToySeries& series) {
  CsvWriter csv(path, {"t", "re_q", "im_q", "re_q_prime", "im_q_prime",
                       "re_product", "im_product"});
  for (std::size_t r = 0; r < series.times.size(); ++r) {
    csv.row({series.times[r], series.q[r].real(), series.q[r].imag(),
             series.q_prime[r].real(), series.q_prime[r].imag(),
             series.product[r].real(), series.product[r].imag()});
  }
  csv.close();
}

void write_conjugacy_csv(const std::filesystem::path& path,
                         const ConjugacyReport& report) {
  CsvWriter csv(path, {"t", "deviation"});
  for (std::size_t r = 0; r < report.times.size(); ++r) {
    csv.row({report.times[r], report.deviation[r]});
  }
  csv.close();
}

void write_momentum_csv(const std::filesystem::path& path,
                        const MomentumDriftSeries& series,
                        const std::vector<double>& extended_divergences) {
  const bool with_div = extended_divergences.size() == series.times.size();
  std::vector<std::string> columns{"t", "deviation", "state_norm"};
  if (with_div) {
    columns.push_back("extended_divergence");
  }
  CsvWriter csv(path, columns);
  for (std::size_t r = 0; r < series.times.size(); ++r) {
    std::vector<double> cells{series.times[r], series.deviation[r],
                              series.state_norm[r]};
    if (with_div) {
      cells.push_back(extended_divergences[r]);
    }
    csv.row(cells);
  }
  csv.close();
}

}  // namespace qsd
