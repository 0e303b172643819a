#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qsd/hilbert.hpp"
#include "qsd/lindblad.hpp"
#include "qsd/propagator.hpp"

namespace qsd {

/// Spectral structure of the coupling operator: eigenvalues grouped into
/// distinct values (tolerance kGroupTolerance) with the unitary that
/// diagonalizes G.  Populations of the eigenspaces are what trajectories
/// localize onto.
struct CouplingSpectrum {
  static constexpr double kGroupTolerance = 1e-9;

  RealVector distinct_values;          // ascending
  std::vector<int> group_of_column;    // eigenvector column -> group index
  Matrix basis;                        // columns are eigenvectors of G

  int group_count() const { return static_cast<int>(distinct_values.size()); }
};

CouplingSpectrum analyze_coupling(const HermitianOperator& g);

struct EnsembleSpec {
  long trajectories = 0;
  std::uint64_t master_seed = 0;
  StepScheme scheme;
  double t_final = 0.0;
  long record_every = 1;
  /// Fixed initial state, or nullopt for an isotropic random state drawn
  /// per trajectory from that trajectory's own stream.
  std::optional<StateVector> initial_state;

  EnsembleSpec(long trajectories, std::uint64_t master_seed, StepScheme scheme,
               double t_final, long record_every,
               std::optional<StateVector> initial_state);
};

/// Ensemble averages on the shared record grid.  Trajectory trajectory_id
/// always consumes NoiseStream(master_seed, trajectory_id), and sums are
/// accumulated in fixed-size chunks merged in chunk order, so results are
/// identical bit for bit no matter how many workers ran.
struct EnsembleStats {
  std::vector<double> times;
  int dim = 0;
  long trajectories = 0;
  std::uint64_t master_seed = 0;

  std::vector<Matrix> mean_rho;          // mean projector per record point
  std::vector<double> mean_coupling;     // mean <G>
  std::vector<double> se_coupling;
  std::vector<double> mean_variance;     // mean Var(G)
  std::vector<double> mean_shift;        // mean of <G>(t) - <G>(0), paired
  std::vector<double> se_shift;

  CouplingSpectrum spectrum;
  std::vector<std::vector<double>> mean_populations;  // [record][group]

  // Final-time localization bookkeeping.
  std::vector<long> final_assignment_counts;  // argmax eigenspace, per group
  std::vector<double> final_fractions;
  double sharp_fraction = 0.0;     // fraction with max population >= level
  double sharp_level = 0.99;
  double mean_final_max_population = 0.0;
};

/// Chunk width of the deterministic reduction.  Part of the output contract:
/// changing it changes floating-point addition order.
inline constexpr long kEnsembleChunk = 64;

/// OpenMP-parallel driver.  worker_count <= 0 uses the OpenMP default.
EnsembleStats run_ensemble(const QsdModel& model, const EnsembleSpec& spec,
                           int worker_count = 0);

/// Plain-loop reference with the identical chunked reduction; kept for
/// testing the parallel path against and as the fallback documentation of
/// the aggregation order.
EnsembleStats run_ensemble_serial(const QsdModel& model,
                                  const EnsembleSpec& spec);

/// Trace distance between the ensemble mean projector and a density-matrix
/// series on the same record grid.
struct ComparisonReport {
  std::vector<double> times;
  std::vector<double> distances;
  double max_distance = 0.0;
  double threshold = 0.0;  // 5/sqrt(M) + 0.01
  bool pass = false;
};

ComparisonReport compare_to_lindblad(const EnsembleStats& stats,
                                     const DensitySeries& reference);

/// When [H, G] = 0 the ensemble mean of <G> is conserved; the check works on
/// the paired per-trajectory shifts <G>(t) - <G>(0), whose standard error
/// stays meaningful even when the population spread is wide.
struct MartingaleReport {
  bool applicable = false;      // commutator below tolerance
  double commutator_norm = 0.0;
  std::vector<double> times;
  std::vector<double> z_scores;  // mean shift / se
  double max_abs_z = 0.0;
  double sigma_bound = 4.0;
  bool pass = true;              // vacuously true when not applicable
};

MartingaleReport martingale_check(const EnsembleStats& stats,
                                  const QsdModel& model);

/// Mean coupling variance over time: the curve that falls to ~0 as
/// individual trajectories sharpen onto eigenspaces.
struct LocalizationReport {
  std::vector<double> times;
  std::vector<double> mean_variance;
  double final_mean_variance = 0.0;
  double sharp_fraction = 0.0;
  double sharp_level = 0.99;
};

LocalizationReport localization_curve(const EnsembleStats& stats);

}  // namespace qsd
