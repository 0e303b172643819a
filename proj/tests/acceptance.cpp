// Acceptance harness: ten end-to-end checks at desk scale, one line of
// output per criterion.  argv[1] names the qsdlab binary, which the last
// criterion shells out to.  The exit code is the number of failed criteria.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "qsd/config.hpp"
#include "qsd/ensemble.hpp"
#include "qsd/lagrangian.hpp"
#include "qsd/lindblad.hpp"
#include "qsd/noise.hpp"
#include "qsd/oscillator.hpp"
#include "qsd/propagator.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace qsd;

namespace {

int g_failures = 0;

template <typename Body>
void criterion(int index, const char* label, Body&& body) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    std::pair<bool, std::string> result = body();
    pass = result.first;
    detail = std::move(result.second);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::printf("[%s] criterion %d: %s | %s [%.1f s]\n", pass ? "PASS" : "FAIL",
              index, label, detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) {
    ++g_failures;
  }
}

std::string format(const char* pattern, ...) {
  char buffer[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buffer, sizeof(buffer), pattern, args);
  va_end(args);
  return buffer;
}

QsdModel measurement_qubit() {
  return QsdModel(HermitianOperator::zero(2),
                  HermitianOperator::diagonal(Eigen::Vector2d(1, -1)));
}

StateVector qubit_state(double a, double b) {
  Vector v(2);
  v << Complex(a, 0), Complex(b, 0);
  return StateVector(v);
}

double born_fraction(const EnsembleStats& stats, double eigenvalue) {
  for (Eigen::Index j = 0; j < stats.spectrum.distinct_values.size(); ++j) {
    if (std::abs(stats.spectrum.distinct_values(j) - eigenvalue) < 1e-9) {
      return stats.final_fractions[static_cast<std::size_t>(j)];
    }
  }
  return -1.0;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::map<std::string, fs::path> regular_files(const fs::path& dir) {
  std::map<std::string, fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      files[entry.path().filename().string()] = entry.path();
    }
  }
  return files;
}

int run_command(const std::string& command) {
  const int status = std::system(command.c_str());
  if (status == -1 || !WIFEXITED(status)) {
    return -1;
  }
  return WEXITSTATUS(status);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string qsdlab = argc > 1 ? argv[1] : "";

  criterion(1, "complex increment moments", [] {
    const MomentReport report = moment_report(2026, 100, 10000, 0.01);
    const double worst = report.max_sigma_deviation();
    return std::make_pair(
        report.within(4.0),
        format("max deviation of (M dxi, M dxi^2, M |dxi|^2) = %.2f se "
               "(need < 4)",
               worst));
  });

  criterion(2, "unitary limit reproduces mode rotation", [] {
    RealVector omega(2);
    omega << 0.1, 0.2;
    const QsdModel model(mode_hamiltonian(omega), HermitianOperator::zero(2));
    const StateVector psi0 = qubit_state(std::sqrt(0.9), std::sqrt(0.1));
    const StepScheme scheme(SchemeKind::euler_renormalized, 1e-4);
    NoiseStream stream(202, 0, scheme.dt);
    const TrajectoryRecord record =
        evolve_trajectory(model, psi0, scheme, stream, 10.0, 10000);

    const double energy0 =
        oscillator_energy(to_oscillator(psi0), omega);
    double amplitude_error = 0.0;
    double energy_drift = 0.0;
    for (std::size_t r = 0; r < record.times.size(); ++r) {
      const double t = record.times[r];
      for (int j = 0; j < 2; ++j) {
        const Complex oracle =
            std::exp(Complex(0, -omega(j) * t)) * psi0.amplitudes()(j);
        amplitude_error =
            std::max(amplitude_error, std::abs(record.states[r](j) - oracle));
      }
      const double energy = oscillator_energy(
          to_oscillator(StateVector(record.states[r])), omega);
      energy_drift = std::max(energy_drift, std::abs(energy - energy0));
    }
    return std::make_pair(
        amplitude_error < 1e-4 && energy_drift < 1e-6,
        format("amplitude error = %.2e (need < 1e-4), energy drift = %.2e "
               "(need < 1e-6)",
               amplitude_error, energy_drift));
  });

  criterion(3, "one-step norm balance", [] {
    const QsdModel model = measurement_qubit();
    const StateVector psi0 = qubit_state(std::sqrt(0.3), std::sqrt(0.7));
    const long draws = 20000;
    std::string detail;
    bool pass = true;
    const double dts[2] = {1e-2, 1e-3};
    for (int i = 0; i < 2; ++i) {
      StepKernel kernel(model, StepScheme(SchemeKind::euler_maruyama, dts[i]));
      NoiseStream stream(303, static_cast<std::uint64_t>(i), dts[i]);
      double sum = 0.0;
      double sum_sq = 0.0;
      for (long k = 0; k < draws; ++k) {
        kernel.reset(psi0);
        kernel.advance(stream.next());
        const double change = kernel.state().squaredNorm() - 1.0;
        sum += change;
        sum_sq += change * change;
      }
      const double mean = sum / draws;
      const double variance =
          std::max(0.0, sum_sq / draws - mean * mean);
      const double se = std::sqrt(variance / draws);
      const double z = se > 0.0 ? std::abs(mean) / se : 0.0;
      pass = pass && z < 4.0;
      detail += format("%sz(dt=%g) = %.2f", i ? ", " : "", dts[i], z);
    }
    return std::make_pair(pass, detail + " (need < 4)");
  });

  const QsdModel qubit_model = measurement_qubit();
  const StepScheme scheme(SchemeKind::euler_renormalized, 1e-3);
  std::optional<EnsembleStats> tilted_stats;
  std::optional<EnsembleStats> haar_stats;
  auto tilted_ensemble = [&]() -> const EnsembleStats& {
    if (!tilted_stats) {
      const EnsembleSpec spec(10000, 401, scheme, 10.0, 1000,
                              qubit_state(std::sqrt(0.3), std::sqrt(0.7)));
      tilted_stats = run_ensemble(qubit_model, spec, 0);
    }
    return *tilted_stats;
  };
  auto haar_ensemble = [&]() -> const EnsembleStats& {
    if (!haar_stats) {
      const EnsembleSpec spec(10000, 402, scheme, 10.0, 1000, std::nullopt);
      haar_stats = run_ensemble(qubit_model, spec, 0);
    }
    return *haar_stats;
  };

  criterion(4, "measurement localizes trajectories", [&] {
    const EnsembleStats& stats = tilted_ensemble();
    const double final_variance = localization_curve(stats).final_mean_variance;
    return std::make_pair(
        stats.sharp_fraction >= 0.99 && final_variance < 0.01,
        format("sharp fraction = %.4f (need >= 0.99), final <Var G> = %.2e "
               "(need < 0.01)",
               stats.sharp_fraction, final_variance));
  });

  criterion(5, "eigenstate fractions follow Born weights", [&] {
    const EnsembleStats& tilted = tilted_ensemble();
    const double tilted_band = 4.0 * std::sqrt(0.3 * 0.7 / 10000.0);
    const double up = born_fraction(tilted, 1.0);
    const double down = born_fraction(tilted, -1.0);

    const EnsembleStats& haar = haar_ensemble();
    const double haar_band = 4.0 * 0.5 / std::sqrt(10000.0);
    const double haar_up = born_fraction(haar, 1.0);

    const bool pass = std::abs(up - 0.3) < tilted_band &&
                      std::abs(down - 0.7) < tilted_band &&
                      std::abs(haar_up - 0.5) < haar_band;
    return std::make_pair(
        pass,
        format("fractions %.4f/%.4f vs 0.3/0.7 (band %.4f); haar %.4f vs 0.5 "
               "(band %.3f)",
               up, down, tilted_band, haar_up, haar_band));
  });

  criterion(6, "ensemble mean matches density-matrix oracle", [&] {
    const StateVector plus =
        qubit_state(1 / std::sqrt(2.0), 1 / std::sqrt(2.0));
    const EnsembleSpec spec(10000, 403, scheme, 2.0, 100, plus);
    const EnsembleStats stats = run_ensemble(qubit_model, spec, 0);
    const DensitySeries oracle =
        evolve_rho(qubit_model, DensityMatrix::pure(plus), 1e-3, 2.0, 100);
    const ComparisonReport report = compare_to_lindblad(stats, oracle);

    double coherence_error = 0.0;
    for (std::size_t r = 0; r < oracle.times.size(); ++r) {
      const Complex expected(0.5 * std::exp(-2.0 * oracle.times[r]), 0.0);
      coherence_error = std::max(
          coherence_error, std::abs(oracle.states[r](0, 1) - expected));
    }
    return std::make_pair(
        report.max_distance < 0.06 && coherence_error < 1e-6,
        format("max trace distance = %.4f (need < 0.06), oracle rho01 error "
               "= %.2e (need < 1e-6)",
               report.max_distance, coherence_error));
  });

  criterion(7, "mean coupling is a martingale", [&] {
    const MartingaleReport tilted = martingale_check(tilted_ensemble(),
                                                     qubit_model);
    const MartingaleReport haar = martingale_check(haar_ensemble(),
                                                   qubit_model);
    const bool pass = tilted.applicable && tilted.pass && haar.applicable &&
                      haar.pass;
    return std::make_pair(
        pass, format("max |z| = %.2f (fixed start), %.2f (haar) at every "
                     "record (need < 4)",
                     tilted.max_abs_z, haar.max_abs_z));
  });

  criterion(8, "state-space volume: violated alone, restored doubled", [&] {
    // (a) Toy pair: exact endpoints, zero total divergence three ways.
    const ToyForce force = make_linear_force(Complex(-1, 0));
    const ToySeries series = evolve_toy(force, Complex(1, 0), Complex(1, 0),
                                        1e-3, 1.0, 1000);
    const double endpoint_error =
        std::max(std::abs(series.q.back() - std::exp(-1.0)),
                 std::abs(series.q_prime.back() - std::exp(1.0)));
    const ToyDivergence toy_div =
        toy_divergence(force, series.q.back(), series.q_prime.back());
    const bool q_only_exact = toy_div.q_part == Complex(-1.0, 0.0);

    const auto toy_flow = [&force](const std::array<double, 4>& x) {
      const Complex q(x[0], x[1]);
      const Complex q_prime(x[2], x[3]);
      const Complex vq = force.f(q);
      const Complex vp = -q_prime * force.df(q);
      return std::array<double, 4>{vq.real(), vq.imag(), vp.real(), vp.imag()};
    };
    const std::array<double, 4> at{0.7, -0.2, 1.3, 0.4};
    const double h = 1e-6;
    double toy_fd_divergence = 0.0;
    for (int c = 0; c < 4; ++c) {
      std::array<double, 4> fwd = at, bwd = at;
      fwd[static_cast<std::size_t>(c)] += h;
      bwd[static_cast<std::size_t>(c)] -= h;
      toy_fd_divergence += (toy_flow(fwd)[static_cast<std::size_t>(c)] -
                            toy_flow(bwd)[static_cast<std::size_t>(c)]) /
                           (2.0 * h);
    }
    const bool toy_ok = endpoint_error < 1e-8 &&
                        std::abs(toy_div.total()) < 1e-12 &&
                        std::abs(toy_fd_divergence) < 1e-6 && q_only_exact;

    // (b) Field pair: zero doubled divergence at random states, nonzero
    // contraction for the state flow alone.
    std::mt19937_64 rng(808);
    double max_doubled = 0.0;
    const double nu_re[5] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    const double nu_im[2] = {-0.7, 0.7};
    for (int s = 0; s < 1000; ++s) {
      const ExtendedFieldState state{testing::random_vector(rng, 2),
                                     testing::random_vector(rng, 2)};
      for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 2; ++b) {
          max_doubled = std::max(
              max_doubled,
              std::abs(extended_divergence(qubit_model, state,
                                           Complex(nu_re[a], nu_im[b]))));
        }
      }
    }
    double min_state_only = std::numeric_limits<double>::infinity();
    for (const double p : {0.3, 0.8}) {
      const Vector psi =
          qubit_state(std::sqrt(p), std::sqrt(1 - p)).amplitudes();
      const ExtendedFieldState state{psi, psi.conjugate()};
      min_state_only =
          std::min(min_state_only,
                   std::abs(state_only_divergence(qubit_model, state,
                                                  Complex(0, 0))));
    }
    const bool field_ok = max_doubled < 1e-6 && min_state_only > 1e-3;

    // (c) Cloud volume: flat under unitary flow, collapsing under
    // common-noise measurement drift.
    Matrix sigma_x(2, 2);
    sigma_x << Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0);
    const QsdModel unitary(HermitianOperator(sigma_x),
                           HermitianOperator::zero(2));
    const StateVector psi0 = qubit_state(std::sqrt(0.7), std::sqrt(0.3));
    VolumeOptions options;
    options.t_final = 10.0;
    options.record_every = 100;
    options.seed = 801;
    const VolumeSeries flat = volume_diagnostic(unitary, psi0, options);
    double flat_excursion = 0.0;
    for (const double v : flat.log_volume) {
      flat_excursion =
          std::max(flat_excursion, std::abs(v - flat.initial_log_volume));
    }
    options.with_noise = true;
    const VolumeSeries collapsing =
        volume_diagnostic(qubit_model, psi0, options);
    const double drop =
        collapsing.initial_log_volume - collapsing.final_log_volume;
    const bool volume_ok = flat_excursion < 1e-3 && drop > 5.0;

    return std::make_pair(
        toy_ok && field_ok && volume_ok,
        format("toy endpoint %.1e, toy div %.1e analytic / %.1e fd; doubled "
               "div %.1e vs state-only %.2f; log-volume flat to %.1e, drop "
               "%.1f",
               endpoint_error, std::abs(toy_div.total()), toy_fd_divergence,
               max_doubled, min_state_only, flat_excursion, drop));
  });

  criterion(9, "field equations satisfy the action variation", [&] {
    std::mt19937_64 rng(909);
    double max_residual = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const QsdModel model(testing::random_hermitian(rng, 2),
                           testing::random_hermitian(rng, 2));
      const ExtendedFieldState state{testing::random_vector(rng, 2),
                                     testing::random_vector(rng, 2)};
      const Complex nu(0.3 - 0.1 * trial, 0.2 + 0.05 * trial);
      max_residual = std::max(
          max_residual, testing::euler_lagrange_residual(model, state, nu));
    }
    for (int trial = 0; trial < 5; ++trial) {
      const QsdModel model(testing::random_hermitian(rng, 3),
                           testing::random_hermitian(rng, 3));
      const ExtendedFieldState state{testing::random_vector(rng, 3),
                                     testing::random_vector(rng, 3)};
      max_residual = std::max(
          max_residual,
          testing::euler_lagrange_residual(model, state, Complex(0.4, -0.6)));
    }

    Matrix sigma_x(2, 2);
    sigma_x << Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0);
    const QsdModel unitary(HermitianOperator(sigma_x),
                           HermitianOperator::zero(2));
    const StateVector psi0 = qubit_state(std::sqrt(0.3), std::sqrt(0.7));
    NoiseStream quiet(901, 0, 1e-3);
    const MomentumDriftSeries closed =
        momentum_drift_experiment(unitary, psi0, quiet, 2.0, 200);
    NoiseStream noisy(902, 0, 1e-3);
    const MomentumDriftSeries open =
        momentum_drift_experiment(qubit_model, psi0, noisy, 5.0, 500);

    const bool pass = max_residual < 1e-6 && closed.max_deviation < 1e-8 &&
                      open.max_deviation > 1e-3;
    return std::make_pair(
        pass,
        format("action residual = %.2e (need < 1e-6); momentum drift %.1e "
               "without coupling (need < 1e-8), %.2f with (need > 1e-3)",
               max_residual, closed.max_deviation, open.max_deviation));
  });

  criterion(10, "byte-identical reruns across worker counts", [&] {
    if (qsdlab.empty()) {
      return std::make_pair(false,
                            std::string("qsdlab path not given on argv[1]"));
    }
    const fs::path scratch =
        fs::temp_directory_path() / "qsd_acceptance_scratch";
    fs::remove_all(scratch);
    fs::create_directories(scratch);
    const fs::path out = scratch / "out";

    nlohmann::json config{
        {"experiment", "ensemble"},
        {"dimension", 2},
        {"G", nlohmann::json::array(
                  {nlohmann::json::array({0, 0, 1.0, 0.0}),
                   nlohmann::json::array({1, 1, -1.0, 0.0})})},
        {"psi0", nlohmann::json::array(
                     {nlohmann::json::array({0, 0.5477225575051661, 0.0}),
                      nlohmann::json::array({1, 0.8366600265340756, 0.0})})},
        {"dt", 1e-3},
        {"t_final", 0.5},
        {"trajectories", 130},
        {"master_seed", 77},
        {"record_every", 100},
        {"output_dir", out.string()},
    };
    const fs::path config_path = scratch / "ensemble.json";
    std::ofstream(config_path) << config.dump(2);

    const std::string quoted_exe = "\"" + qsdlab + "\"";
    const std::string quoted_cfg = " \"" + config_path.string() + "\"";
    const std::string logs = " > \"" + (scratch / "log.txt").string() +
                             "\" 2>&1";

    const int validate_rc =
        run_command(quoted_exe + " validate" + quoted_cfg + logs);
    const int first_rc = run_command(quoted_exe + " run" + quoted_cfg +
                                     " --threads 1" + logs);
    fs::rename(out, scratch / "out_a");
    const int second_rc = run_command(quoted_exe + " run" + quoted_cfg +
                                      " --threads 4" + logs);
    fs::rename(out, scratch / "out_b");

    const auto files_a = regular_files(scratch / "out_a");
    const auto files_b = regular_files(scratch / "out_b");
    bool identical = !files_a.empty() && files_a.size() == files_b.size() &&
                     files_a.count("manifest.json") == 1;
    long compared = 0;
    for (const auto& [name, path] : files_a) {
      if (!files_b.count(name)) {
        identical = false;
        break;
      }
      if (name == "manifest.json") {
        continue;  // carries wall-clock timing by design
      }
      ++compared;
      if (read_bytes(path) != read_bytes(files_b.at(name))) {
        identical = false;
      }
    }

    // Exit-code contract: 0 ran, 1 rejected config, 2 numerical failure.
    nlohmann::json broken = config;
    broken["dt"] = -1.0;
    const fs::path broken_path = scratch / "broken.json";
    std::ofstream(broken_path) << broken.dump(2);
    const int broken_rc = run_command(quoted_exe + " validate \"" +
                                      broken_path.string() + "\"" + logs);

    nlohmann::json unstable{
        {"experiment", "lindblad"},
        {"dimension", 2},
        {"G", nlohmann::json::array(
                  {nlohmann::json::array({0, 0, 40.0, 0.0}),
                   nlohmann::json::array({1, 1, -40.0, 0.0})})},
        {"psi0", nlohmann::json::array(
                     {nlohmann::json::array({0, 0.7071067811865476, 0.0}),
                      nlohmann::json::array({1, 0.7071067811865476, 0.0})})},
        {"dt", 0.1},
        {"t_final", 2.0},
        {"master_seed", 1},
        {"output_dir", (scratch / "unstable").string()},
    };
    const fs::path unstable_path = scratch / "unstable.json";
    std::ofstream(unstable_path) << unstable.dump(2);
    const int unstable_rc = run_command(quoted_exe + " run \"" +
                                        unstable_path.string() + "\"" + logs);

    const bool pass = validate_rc == 0 && first_rc == 0 && second_rc == 0 &&
                      identical && compared >= 3 && broken_rc == 1 &&
                      unstable_rc == 2;
    const std::string detail = format(
        "%ld artifacts byte-identical at --threads 1 vs 4 (manifest "
        "excluded); exit codes ok/broken/unstable = %d/%d/%d",
        compared, first_rc, broken_rc, unstable_rc);
    fs::remove_all(scratch);
    return std::make_pair(pass, detail);
  });

  std::printf("%d of 10 criteria passed\n", 10 - g_failures);
  return g_failures;
}
