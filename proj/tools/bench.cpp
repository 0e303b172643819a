#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>

#include <omp.h>

#include "qsd/ensemble.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

double max_difference(const qsd::EnsembleStats& a,
                      const qsd::EnsembleStats& b) {
  double worst = 0.0;
  for (std::size_t r = 0; r < a.times.size(); ++r) {
    worst = std::max(worst,
                     (a.mean_rho[r] - b.mean_rho[r]).cwiseAbs().maxCoeff());
    worst = std::max(worst,
                     std::abs(a.mean_coupling[r] - b.mean_coupling[r]));
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble kernel benchmark: parallel driver vs serial reference"};
  long trajectories = 2048;
  double dt = 1e-3;
  double t_final = 1.0;
  int threads = 0;
  app.add_option("--trajectories", trajectories, "Ensemble size");
  app.add_option("--dt", dt, "Step size");
  app.add_option("--t-final", t_final, "Integration horizon");
  app.add_option("--threads", threads, "Worker count (0 = OpenMP default)");
  CLI11_PARSE(app, argc, argv);

  Eigen::Vector2d levels(1.0, -1.0);
  const qsd::QsdModel model(qsd::HermitianOperator::zero(2),
                            qsd::HermitianOperator::diagonal(levels));
  qsd::Vector psi0(2);
  psi0 << qsd::Complex(std::sqrt(0.3), 0.0), qsd::Complex(std::sqrt(0.7), 0.0);

  const qsd::EnsembleSpec spec(
      trajectories, 20260814,
      qsd::StepScheme(qsd::SchemeKind::euler_renormalized, dt), t_final, 100,
      qsd::StateVector(psi0));

  const int workers = threads > 0 ? threads : omp_get_max_threads();
  std::printf("trajectories=%ld steps=%ld dim=2 workers=%d\n", trajectories,
              std::lround(t_final / dt), workers);

  auto start = std::chrono::steady_clock::now();
  const qsd::EnsembleStats serial = qsd::run_ensemble_serial(model, spec);
  const double serial_seconds = seconds_since(start);
  std::printf("serial reference : %8.3f s\n", serial_seconds);

  start = std::chrono::steady_clock::now();
  const qsd::EnsembleStats parallel = qsd::run_ensemble(model, spec, threads);
  const double parallel_seconds = seconds_since(start);
  std::printf("parallel kernel  : %8.3f s  (speedup %.2fx)\n",
              parallel_seconds, serial_seconds / parallel_seconds);

  const double diff = max_difference(serial, parallel);
  std::printf("max |serial - parallel| = %.3g  (%s)\n", diff,
              diff == 0.0 ? "bit-identical" : "MISMATCH");
  return diff == 0.0 ? 0 : 1;
}
