#pragma once

#include <vector>

#include "qsd/hilbert.hpp"
#include "qsd/propagator.hpp"

namespace qsd {

/// Deterministic density-matrix reference for the same (H, G) model the
/// stochastic propagator integrates; ensemble means are checked against it.
/// For a self-adjoint coupling the dissipator is G rho G - (1/2){G^2, rho}.
Matrix lindblad_rhs(const QsdModel& model, const Matrix& rho);

struct DensitySeries {
  std::vector<double> times;
  std::vector<Matrix> states;
};

/// Fixed-step 4th-order Runge-Kutta integration of the density matrix,
/// sampled on the same record grid the trajectory driver uses.  Hermiticity
/// and trace are monitored every step and the spectrum every record point;
/// leaving the physical envelope throws Error(oracle_instability).
DensitySeries evolve_rho(const QsdModel& model, const DensityMatrix& rho0,
                         double dt, double t_final, long record_every);

/// Half the sum of absolute eigenvalues of (a - b).
double trace_distance(const Matrix& a, const Matrix& b);
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace qsd
