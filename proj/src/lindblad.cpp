#include "qsd/lindblad.hpp"

#include <cmath>

namespace qsd {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kHermitianDriftTolerance = 1e-9;
constexpr double kTraceDriftTolerance = 1e-9;
constexpr double kPositivityFloor = -1e-8;

void check_envelope(const Matrix& rho, double t, bool with_spectrum) {
  const double asym = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianDriftTolerance) {
    throw Error(ErrorKind::oracle_instability,
                "density matrix lost Hermiticity (asymmetry " +
                    std::to_string(asym) + " at t = " + std::to_string(t) +
                    ")");
  }
  const double trace_err = std::abs(rho.trace().real() - 1.0) +
                           std::abs(rho.trace().imag());
  if (trace_err > kTraceDriftTolerance) {
    throw Error(ErrorKind::oracle_instability,
                "density matrix trace drifted by " +
                    std::to_string(trace_err) + " at t = " +
                    std::to_string(t));
  }
  if (with_spectrum) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho, Eigen::EigenvaluesOnly);
    const double min_eig = solver.eigenvalues().minCoeff();
    if (min_eig < kPositivityFloor) {
      throw Error(ErrorKind::oracle_instability,
                  "density matrix developed eigenvalue " +
                      std::to_string(min_eig) + " at t = " +
                      std::to_string(t));
    }
  }
}

}  // namespace

Matrix lindblad_rhs(const QsdModel& model, const Matrix& rho) {
  if (rho.rows() != model.dim() || rho.cols() != model.dim()) {
    throw Error(ErrorKind::invalid_argument,
                "density matrix dimension does not match the model");
  }
  const Matrix& h = model.hamiltonian.entries();
  const Matrix& g = model.coupling.entries();
  const Matrix g_rho = g * rho;
  const Matrix g_sq_rho = g * g_rho;
  return -kI * (h * rho - rho * h) + g_rho * g -
         0.5 * (g_sq_rho + rho * g * g);
}

DensitySeries evolve_rho(const QsdModel& model, const DensityMatrix& rho0,
                         double dt, double t_final, long record_every) {
  const long n_steps = step_count(t_final, dt);
  const std::vector<double> grid = record_times(dt, n_steps, record_every);

  DensitySeries series;
  series.times.reserve(grid.size());
  series.states.reserve(grid.size());

  Matrix rho = rho0.entries();
  series.times.push_back(0.0);
  series.states.push_back(rho);

  Matrix k1, k2, k3, k4;
  for (long s = 1; s <= n_steps; ++s) {
    k1 = lindblad_rhs(model, rho);
    k2 = lindblad_rhs(model, rho + (0.5 * dt) * k1);
    k3 = lindblad_rhs(model, rho + (0.5 * dt) * k2);
    k4 = lindblad_rhs(model, rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const bool on_grid = (s % record_every == 0 || s == n_steps);
    const double t = static_cast<double>(s) * dt;
    check_envelope(rho, t, on_grid);
    if (on_grid) {
      series.times.push_back(t);
      series.states.push_back(rho);
    }
  }
  return series;
}

double trace_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw Error(ErrorKind::invalid_argument,
                "trace distance needs two square matrices of equal size");
  }
  const Matrix diff = a - b;
  const double asym = (diff - diff.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-9) {
    throw Error(ErrorKind::invalid_argument,
                "trace distance of a non-Hermitian difference (asymmetry " +
                    std::to_string(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (diff + diff.adjoint()),
                                               Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.entries(), b.entries());
}

}  // namespace qsd
