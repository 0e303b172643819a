#include "qsd/ensemble.hpp"

#include <omp.h>

#include <cmath>

namespace qsd {

namespace {

struct ChunkAccumulator {
  std::vector<Matrix> rho_sum;
  std::vector<double> g_sum, g_sq_sum, var_sum, shift_sum, shift_sq_sum;
  std::vector<std::vector<double>> pop_sum;  // [record][group]
  std::vector<long> assignment_counts;       // final record, per group
  long sharp_count = 0;
  double max_pop_sum = 0.0;
  long count = 0;

  void init(std::size_t records, int dim, int groups) {
    rho_sum.assign(records, Matrix::Zero(dim, dim));
    g_sum.assign(records, 0.0);
    g_sq_sum.assign(records, 0.0);
    var_sum.assign(records, 0.0);
    shift_sum.assign(records, 0.0);
    shift_sq_sum.assign(records, 0.0);
    pop_sum.assign(records, std::vector<double>(groups, 0.0));
  }

  void merge(const ChunkAccumulator& other) {
    for (std::size_t r = 0; r < rho_sum.size(); ++r) {
      rho_sum[r] += other.rho_sum[r];
      g_sum[r] += other.g_sum[r];
      g_sq_sum[r] += other.g_sq_sum[r];
      var_sum[r] += other.var_sum[r];
      shift_sum[r] += other.shift_sum[r];
      shift_sq_sum[r] += other.shift_sq_sum[r];
      for (std::size_t k = 0; k < pop_sum[r].size(); ++k) {
        pop_sum[r][k] += other.pop_sum[r][k];
      }
    }
    for (std::size_t k = 0; k < assignment_counts.size(); ++k) {
      assignment_counts[k] += other.assignment_counts[k];
    }
    sharp_count += other.sharp_count;
    max_pop_sum += other.max_pop_sum;
    count += other.count;
  }
};

struct EnsembleContext {
  const QsdModel& model;
  const EnsembleSpec& spec;
  CouplingSpectrum spectrum;
  long n_steps = 0;
  std::size_t records = 0;
};

Vector draw_isotropic_state(NoiseStream& stream, int dim) {
  Vector psi(dim);
  while (true) {
    for (int j = 0; j < dim; ++j) {
      psi(j) = Complex(stream.next_normal(), stream.next_normal());
    }
    const double n = psi.norm();
    if (n >= StateVector::kNormFloor) {
      return psi / n;
    }
  }
}

/// Runs trajectories [begin, end) in index order into one accumulator.
/// Every floating-point addition below happens in the same order whether
/// the caller is the serial loop or an OpenMP worker; that is the whole
/// determinism story.
void process_chunk(const EnsembleContext& ctx, long begin, long end,
                   ChunkAccumulator& acc) {
  acc.init(ctx.records, ctx.model.dim(), ctx.spectrum.group_count());
  acc.assignment_counts.assign(
      static_cast<std::size_t>(ctx.spectrum.group_count()), 0);

  const int dim = ctx.model.dim();
  const int groups = ctx.spectrum.group_count();
  const Matrix basis_adjoint = ctx.spectrum.basis.adjoint();

  StepKernel kernel(ctx.model, ctx.spec.scheme);
  Vector unit(dim);
  Vector projected(dim);
  std::vector<double> pops(static_cast<std::size_t>(groups));

  for (long traj = begin; traj < end; ++traj) {
    NoiseStream stream(ctx.spec.master_seed,
                       static_cast<std::uint64_t>(traj), ctx.spec.scheme.dt);
    if (ctx.spec.initial_state.has_value()) {
      kernel.reset(*ctx.spec.initial_state);
    } else {
      kernel.reset(StateVector(draw_isotropic_state(stream, dim)));
    }

    double g_at_start = 0.0;
    drive_trajectory(
        kernel, stream, ctx.n_steps, ctx.spec.record_every,
        [&](long record, double, const StepKernel& k) {
          const double raw_norm = k.state().norm();
          unit = k.state() / raw_norm;
          const double g = k.coupling_mean();
          const double var = k.coupling_variance();
          if (record == 0) {
            g_at_start = g;
          }
          const std::size_t r = static_cast<std::size_t>(record);
          acc.rho_sum[r].noalias() += unit * unit.adjoint();
          acc.g_sum[r] += g;
          acc.g_sq_sum[r] += g * g;
          acc.var_sum[r] += var;
          const double shift = g - g_at_start;
          acc.shift_sum[r] += shift;
          acc.shift_sq_sum[r] += shift * shift;

          projected.noalias() = basis_adjoint * unit;
          std::fill(pops.begin(), pops.end(), 0.0);
          for (int c = 0; c < dim; ++c) {
            pops[static_cast<std::size_t>(
                ctx.spectrum.group_of_column[static_cast<std::size_t>(c)])] +=
                std::norm(projected(c));
          }
          for (int k2 = 0; k2 < groups; ++k2) {
            acc.pop_sum[r][static_cast<std::size_t>(k2)] +=
                pops[static_cast<std::size_t>(k2)];
          }

          if (r + 1 == ctx.records) {
            int arg_max = 0;
            for (int k2 = 1; k2 < groups; ++k2) {
              if (pops[static_cast<std::size_t>(k2)] >
                  pops[static_cast<std::size_t>(arg_max)]) {
                arg_max = k2;
              }
            }
            acc.assignment_counts[static_cast<std::size_t>(arg_max)] += 1;
            const double max_pop = pops[static_cast<std::size_t>(arg_max)];
            acc.max_pop_sum += max_pop;
            if (max_pop >= 0.99) {
              acc.sharp_count += 1;
            }
          }
        });
    acc.count += 1;
  }
}

EnsembleStats finalize(const EnsembleContext& ctx,
                       const std::vector<double>& grid,
                       const ChunkAccumulator& total) {
  EnsembleStats stats;
  stats.times = grid;
  stats.dim = ctx.model.dim();
  stats.trajectories = ctx.spec.trajectories;
  stats.master_seed = ctx.spec.master_seed;
  stats.spectrum = ctx.spectrum;

  const double m = static_cast<double>(total.count);
  const std::size_t records = ctx.records;
  stats.mean_rho.reserve(records);
  for (std::size_t r = 0; r < records; ++r) {
    stats.mean_rho.push_back(total.rho_sum[r] / m);
    stats.mean_coupling.push_back(total.g_sum[r] / m);
    const double g_var = std::max(
        0.0, total.g_sq_sum[r] / m - stats.mean_coupling[r] *
                                         stats.mean_coupling[r]);
    stats.se_coupling.push_back(std::sqrt(g_var / m));
    stats.mean_variance.push_back(total.var_sum[r] / m);
    stats.mean_shift.push_back(total.shift_sum[r] / m);
    const double shift_var = std::max(
        0.0, total.shift_sq_sum[r] / m - stats.mean_shift[r] *
                                             stats.mean_shift[r]);
    stats.se_shift.push_back(std::sqrt(shift_var / m));
    stats.mean_populations.push_back(total.pop_sum[r]);
    for (double& p : stats.mean_populations.back()) {
      p /= m;
    }
  }

  stats.final_assignment_counts = total.assignment_counts;
  stats.final_fractions.reserve(stats.final_assignment_counts.size());
  for (long c : stats.final_assignment_counts) {
    stats.final_fractions.push_back(static_cast<double>(c) / m);
  }
  stats.sharp_fraction = static_cast<double>(total.sharp_count) / m;
  stats.mean_final_max_population = total.max_pop_sum / m;
  return stats;
}

EnsembleStats run_chunked(const QsdModel& model, const EnsembleSpec& spec,
                          bool parallel, int worker_count) {
  EnsembleContext ctx{model, spec, analyze_coupling(model.coupling), 0, 0};
  if (spec.initial_state.has_value() &&
      spec.initial_state->dim() != model.dim()) {
    throw Error(ErrorKind::invalid_argument,
                "ensemble initial state dimension does not match the model");
  }
  ctx.n_steps = step_count(spec.t_final, spec.scheme.dt);
  const std::vector<double> grid =
      record_times(spec.scheme.dt, ctx.n_steps, spec.record_every);
  ctx.records = grid.size();

  const long chunk_total =
      (spec.trajectories + kEnsembleChunk - 1) / kEnsembleChunk;
  std::vector<ChunkAccumulator> partials(
      static_cast<std::size_t>(chunk_total));

  if (parallel) {
    const int workers =
        worker_count > 0 ? worker_count : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (long c = 0; c < chunk_total; ++c) {
      const long begin = c * kEnsembleChunk;
      const long end = std::min(begin + kEnsembleChunk, spec.trajectories);
      process_chunk(ctx, begin, end, partials[static_cast<std::size_t>(c)]);
    }
  } else {
    for (long c = 0; c < chunk_total; ++c) {
      const long begin = c * kEnsembleChunk;
      const long end = std::min(begin + kEnsembleChunk, spec.trajectories);
      process_chunk(ctx, begin, end, partials[static_cast<std::size_t>(c)]);
    }
  }

  ChunkAccumulator total;
  total.init(ctx.records, model.dim(), ctx.spectrum.group_count());
  total.assignment_counts.assign(
      static_cast<std::size_t>(ctx.spectrum.group_count()), 0);
  for (const ChunkAccumulator& part : partials) {
    total.merge(part);
  }
  return finalize(ctx, grid, total);
}

}  // namespace

CouplingSpectrum analyze_coupling(const HermitianOperator& g) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(g.entries());
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::contract_violation,
                "eigendecomposition of the coupling operator failed");
  }
  const RealVector values = solver.eigenvalues();  // ascending

  CouplingSpectrum spectrum;
  spectrum.basis = solver.eigenvectors();
  spectrum.group_of_column.resize(static_cast<std::size_t>(values.size()));

  std::vector<double> distinct;
  for (int c = 0; c < values.size(); ++c) {
    if (distinct.empty() ||
        values(c) - distinct.back() > CouplingSpectrum::kGroupTolerance) {
      distinct.push_back(values(c));
    }
    spectrum.group_of_column[static_cast<std::size_t>(c)] =
        static_cast<int>(distinct.size()) - 1;
  }
  spectrum.distinct_values =
      Eigen::Map<const RealVector>(distinct.data(),
                                   static_cast<long>(distinct.size()));
  return spectrum;
}

EnsembleSpec::EnsembleSpec(long trajectories_in, std::uint64_t master_seed_in,
                           StepScheme scheme_in, double t_final_in,
                           long record_every_in,
                           std::optional<StateVector> initial_state_in)
    : trajectories(trajectories_in),
      master_seed(master_seed_in),
      scheme(scheme_in),
      t_final(t_final_in),
      record_every(record_every_in),
      initial_state(std::move(initial_state_in)) {
  if (trajectories < 1) {
    throw Error(ErrorKind::invalid_argument,
                "ensemble needs at least one trajectory");
  }
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw Error(ErrorKind::invalid_argument,
                "t_final must be finite and > 0, got " +
                    std::to_string(t_final));
  }
  if (record_every < 1) {
    throw Error(ErrorKind::invalid_argument,
                "record_every must be >= 1, got " +
                    std::to_string(record_every));
  }
}

EnsembleStats run_ensemble(const QsdModel& model, const EnsembleSpec& spec,
                           int worker_count) {
  return run_chunked(model, spec, /*parallel=*/true, worker_count);
}

EnsembleStats run_ensemble_serial(const QsdModel& model,
                                  const EnsembleSpec& spec) {
  return run_chunked(model, spec, /*parallel=*/false, 0);
}

ComparisonReport compare_to_lindblad(const EnsembleStats& stats,
                                     const DensitySeries& reference) {
  if (stats.times.size() != reference.times.size()) {
    throw Error(ErrorKind::invalid_argument,
                "ensemble and reference record grids have different sizes");
  }
  ComparisonReport report;
  report.times = stats.times;
  report.distances.reserve(stats.times.size());
  for (std::size_t r = 0; r < stats.times.size(); ++r) {
    if (std::abs(stats.times[r] - reference.times[r]) > 1e-12) {
      throw Error(ErrorKind::invalid_argument,
                  "record grids disagree at index " + std::to_string(r));
    }
    const double d = trace_distance(stats.mean_rho[r], reference.states[r]);
    report.distances.push_back(d);
    report.max_distance = std::max(report.max_distance, d);
  }
  report.threshold =
      5.0 / std::sqrt(static_cast<double>(stats.trajectories)) + 0.01;
  report.pass = report.max_distance < report.threshold;
  return report;
}

MartingaleReport martingale_check(const EnsembleStats& stats,
                                  const QsdModel& model) {
  MartingaleReport report;
  const Matrix& h = model.hamiltonian.entries();
  const Matrix& g = model.coupling.entries();
  report.commutator_norm = (h * g - g * h).cwiseAbs().maxCoeff();
  report.applicable = report.commutator_norm < 1e-10;
  report.times = stats.times;
  if (!report.applicable) {
    return report;
  }
  for (std::size_t r = 0; r < stats.times.size(); ++r) {
    const double se = stats.se_shift[r];
    const double z = se > 0.0 ? stats.mean_shift[r] / se : 0.0;
    report.z_scores.push_back(z);
    report.max_abs_z = std::max(report.max_abs_z, std::abs(z));
  }
  report.pass = report.max_abs_z < report.sigma_bound;
  return report;
}

LocalizationReport localization_curve(const EnsembleStats& stats) {
  LocalizationReport report;
  report.times = stats.times;
  report.mean_variance = stats.mean_variance;
  report.final_mean_variance =
      stats.mean_variance.empty() ? 0.0 : stats.mean_variance.back();
  report.sharp_fraction = stats.sharp_fraction;
  report.sharp_level = stats.sharp_level;
  return report;
}

}  // namespace qsd
