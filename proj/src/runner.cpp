#include "qsd/runner.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <vector>

#include "qsd/ensemble.hpp"
#include "qsd/io.hpp"
#include "qsd/lagrangian.hpp"
#include "qsd/lindblad.hpp"
#include "qsd/noise.hpp"
#include "qsd/oscillator.hpp"
#include "qsd/propagator.hpp"

namespace qsd {

namespace {

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buffer;
}

struct RunContext {
  const RunConfig& config;
  std::uint64_t seed;
  int workers;
  std::filesystem::path dir;
  std::string stem;
  std::vector<std::string> artifacts;

  std::filesystem::path artifact(const std::string& suffix) {
    const std::string name = stem + suffix;
    artifacts.push_back(name);
    return dir / name;
  }
};

StateVector fixed_or_drawn_state(const RunConfig& config, NoiseStream& stream) {
  if (const auto fixed = config.initial_state()) {
    return *fixed;
  }
  Vector psi(config.dimension);
  while (true) {
    for (int j = 0; j < config.dimension; ++j) {
      psi(j) = Complex(stream.next_normal(), stream.next_normal());
    }
    if (psi.norm() >= StateVector::kNormFloor) {
      return StateVector(psi / psi.norm());
    }
  }
}

EnsembleStats run_configured_ensemble(const RunConfig& config,
                                      const RunContext& ctx,
                                      const QsdModel& model) {
  const EnsembleSpec spec(config.trajectories, ctx.seed,
                          StepScheme(config.scheme, config.dt),
                          config.t_final, config.record_every,
                          config.initial_state());
  return run_ensemble(model, spec, ctx.workers);
}

DensitySeries run_configured_oracle(const RunConfig& config,
                                    const QsdModel& model) {
  const DensityMatrix rho0 =
      config.uniform_random_start
          ? DensityMatrix::maximally_mixed(config.dimension)
          : DensityMatrix::pure(StateVector(config.initial_amplitudes));
  return evolve_rho(model, rho0, config.dt, config.t_final,
                    config.record_every);
}

void warn_if_unstable(const QsdModel& model, const StepScheme& scheme) {
  if (const auto warning = stability_warning(model, scheme)) {
    std::fprintf(stderr, "warning: %s\n", warning->c_str());
  }
}

void run_trajectory_experiment(const RunConfig& config, RunContext& ctx) {
  const QsdModel model = config.model();
  const StepScheme scheme(config.scheme, config.dt);
  warn_if_unstable(model, scheme);
  NoiseStream stream(ctx.seed, 0, config.dt);
  const StateVector psi0 = fixed_or_drawn_state(config, stream);
  const TrajectoryRecord record = evolve_trajectory(
      model, psi0, scheme, stream, config.t_final, config.record_every);
  write_trajectory_csv(ctx.artifact(".csv"), record);
}

void run_ensemble_experiment(const RunConfig& config, RunContext& ctx) {
  const QsdModel model = config.model();
  warn_if_unstable(model, StepScheme(config.scheme, config.dt));
  const EnsembleStats stats = run_configured_ensemble(config, ctx, model);
  write_ensemble_csv(ctx.artifact("_series.csv"), stats);
  write_mean_rho_csv(ctx.artifact("_rho.csv"), stats);
  Json summary = to_json(stats);
  summary["martingale"] = to_json(martingale_check(stats, model));
  summary["localization"] = to_json(localization_curve(stats));
  write_json_file(ctx.artifact("_summary.json"), summary);
}

void run_lindblad_experiment(const RunConfig& config, RunContext& ctx) {
  const QsdModel model = config.model();
  const DensitySeries series = run_configured_oracle(config, model);
  write_density_series_csv(ctx.artifact(".csv"), series);
}

void run_compare_experiment(const RunConfig& config, RunContext& ctx) {
  const QsdModel model = config.model();
  warn_if_unstable(model, StepScheme(config.scheme, config.dt));
  const EnsembleStats stats = run_configured_ensemble(config, ctx, model);
  const DensitySeries oracle = run_configured_oracle(config, model);
  const ComparisonReport report = compare_to_lindblad(stats, oracle);
  write_ensemble_csv(ctx.artifact("_ensemble.csv"), stats);
  write_mean_rho_csv(ctx.artifact("_ensemble_rho.csv"), stats);
  write_density_series_csv(ctx.artifact("_oracle.csv"), oracle);
  Json summary = to_json(report);
  summary["ensemble"] = to_json(stats);
  write_json_file(ctx.artifact("_report.json"), summary);
}

void run_oscillator_experiment(const RunConfig& config, RunContext& ctx) {
  // Mode frequencies are the diagonal of H; anything off-diagonal means the
  // model is not a set of uncoupled modes.
  const Matrix& h = config.hamiltonian;
  Matrix off = h;
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorKind::validation,
                "H: oscillator experiment needs a diagonal H (one frequency "
                "per mode)");
  }
  const RealVector omega = h.diagonal().real();
  const StateVector psi0(config.initial_amplitudes);
  const FlowCheckReport report = hamilton_flow_check(
      omega, psi0, config.dt, config.t_final, config.record_every);
  write_flow_check_csv(ctx.artifact(".csv"), report);
  write_json_file(ctx.artifact("_report.json"), to_json(report));
}

void run_liouville_experiment(const RunConfig& config, RunContext& ctx) {
  const QsdModel model = config.model();
  VolumeOptions options;
  options.cloud_size = config.cloud_size;
  options.spread = config.cloud_spread;
  options.dt = config.dt;
  options.t_final = config.t_final;
  options.record_every = config.record_every;
  options.seed = ctx.seed;
  options.with_noise = config.with_noise;
  const VolumeSeries series = volume_diagnostic(
      model, StateVector(config.initial_amplitudes), options);
  write_volume_csv(ctx.artifact(".csv"), series);
  write_json_file(ctx.artifact("_report.json"), to_json(series));
}

void run_lagrangian_toy_experiment(const RunConfig& config, RunContext& ctx) {
  const ToyForce force = config.toy.force == "cubic"
                             ? make_cubic_force(config.toy.a, config.toy.b)
                             : make_linear_force(config.toy.a);
  const Complex q0_prime =
      config.toy.q0_prime.value_or(std::conj(config.toy.q0));
  const ToySeries series = evolve_toy(force, config.toy.q0, q0_prime,
                                      config.dt, config.t_final,
                                      config.record_every);
  write_toy_csv(ctx.artifact(".csv"), series);

  const ToyDivergence div =
      toy_divergence(force, series.q.back(), series.q_prime.back());
  Json report{{"force", force.name},
              {"final_divergence",
               {{"q_part_re", div.q_part.real()},
                {"q_part_im", div.q_part.imag()},
                {"total_re", div.total().real()},
                {"total_im", div.total().imag()}}},
              {"product_drift",
               std::abs(series.product.back() - series.product.front())}};
  write_json_file(ctx.artifact("_report.json"), report);
}

void run_lagrangian_field_experiment(const RunConfig& config,
                                     RunContext& ctx) {
  const QsdModel model = config.model();
  NoiseStream stream(ctx.seed, 0, config.dt);
  const MomentumDriftSeries series = momentum_drift_experiment(
      model, StateVector(config.initial_amplitudes), stream, config.t_final,
      config.record_every);
  std::vector<double> divergences;
  divergences.reserve(series.states.size());
  for (std::size_t r = 0; r < series.states.size(); ++r) {
    divergences.push_back(
        extended_divergence(model, series.states[r], series.rates[r]));
  }
  write_momentum_csv(ctx.artifact(".csv"), series, divergences);

  double max_abs_div = 0.0;
  for (double d : divergences) {
    max_abs_div = std::max(max_abs_div, std::abs(d));
  }
  ExtendedFieldState start;
  start.psi = normalize(StateVector(config.initial_amplitudes)).amplitudes();
  start.psi_prime = start.psi.conjugate();
  Json report = to_json(series);
  report["max_abs_extended_divergence"] = max_abs_div;
  report["state_only_divergence_at_start"] =
      state_only_divergence(model, start, Complex(0.0, 0.0));
  write_json_file(ctx.artifact("_report.json"), report);
}

void run_noise_selftest_experiment(const RunConfig& config, RunContext& ctx) {
  const MomentReport report = moment_report(
      ctx.seed, config.noise_streams, config.noise_draws, config.dt);
  Json doc = to_json(report);
  doc["pass"] = report.within(4.0);
  write_json_file(ctx.artifact("_report.json"), doc);
}

}  // namespace

void run_experiment(const RunConfig& config, const RunOptions& options) {
  const auto start_wall = std::chrono::steady_clock::now();
  const std::string start_time = utc_timestamp();

  RunContext ctx{config,
                 options.seed_override.value_or(config.master_seed),
                 options.worker_count,
                 config.output_dir,
                 {},
                 {}};
  ctx.stem = std::string(to_string(config.experiment)) + "_" +
             hash_hex(config.config_hash).substr(0, 12) + "_s" +
             std::to_string(ctx.seed);

  std::error_code ec;
  std::filesystem::create_directories(ctx.dir, ec);
  if (ec || !std::filesystem::is_directory(ctx.dir)) {
    throw Error(ErrorKind::io,
                "cannot create output directory " + ctx.dir.string());
  }

  switch (config.experiment) {
    case ExperimentKind::trajectory:
      run_trajectory_experiment(config, ctx);
      break;
    case ExperimentKind::ensemble:
      run_ensemble_experiment(config, ctx);
      break;
    case ExperimentKind::lindblad:
      run_lindblad_experiment(config, ctx);
      break;
    case ExperimentKind::compare:
      run_compare_experiment(config, ctx);
      break;
    case ExperimentKind::oscillator:
      run_oscillator_experiment(config, ctx);
      break;
    case ExperimentKind::liouville:
      run_liouville_experiment(config, ctx);
      break;
    case ExperimentKind::lagrangian_toy:
      run_lagrangian_toy_experiment(config, ctx);
      break;
    case ExperimentKind::lagrangian_field:
      run_lagrangian_field_experiment(config, ctx);
      break;
    case ExperimentKind::noise_selftest:
      run_noise_selftest_experiment(config, ctx);
      break;
  }

  const double wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    start_wall)
          .count();
  const Json manifest{{"config_hash", hash_hex(config.config_hash)},
                      {"master_seed", ctx.seed},
                      {"experiment", to_string(config.experiment)},
                      {"start_time", start_time},
                      {"wall_seconds", wall_seconds},
                      {"artifact_list", ctx.artifacts},
                      {"versions",
                       {{"artifact", "1.0.0"},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                      std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." +
                                      std::to_string(EIGEN_MINOR_VERSION)}}}};
  write_json_file(ctx.dir / "manifest.json", manifest);
}

}  // namespace qsd
