#pragma once

#include <cstdint>
#include <vector>

#include "qsd/hilbert.hpp"
#include "qsd/propagator.hpp"

namespace qsd {

/// Canonical pair per mode: amplitudes map as psi_j = (q_j + i p_j) / sqrt(2),
/// which turns N uncoupled mode amplitudes into N classical oscillators.
struct OscillatorCoordinates {
  RealVector q;
  RealVector p;
};

OscillatorCoordinates to_oscillator(const StateVector& psi);
StateVector from_oscillator(const OscillatorCoordinates& coords);

/// Sum over modes of omega_j (q_j^2 + p_j^2) / 2.
double oscillator_energy(const OscillatorCoordinates& coords,
                         const RealVector& omega);

/// Mode-diagonal Hamiltonian diag(omega).
HermitianOperator mode_hamiltonian(const RealVector& omega);

/// Integrates the canonical equations q' = omega p, p' = -omega q and the
/// amplitude equation psi' = -i omega psi side by side with fixed-step RK4
/// and compares both against the closed-form rotation and against each
/// other through the coordinate map.
struct FlowCheckReport {
  std::vector<double> times;
  std::vector<RealVector> q, p;
  double max_canonical_deviation = 0.0;    // RK4 (q,p) vs closed form
  double max_amplitude_deviation = 0.0;    // RK4 psi vs closed form
  double max_cross_deviation = 0.0;        // map(q,p) vs psi
  double max_energy_drift = 0.0;
  double tolerance = 1e-6;
  bool pass = false;
};

FlowCheckReport hamilton_flow_check(const RealVector& omega,
                                    const StateVector& psi0, double dt,
                                    double t_final, long record_every);

/// Phase-space volume proxy for a cloud of nearby states: half the
/// log-determinant of the cloud covariance restricted to the 2N-2 real
/// directions orthogonal to the norm and global-phase directions at the
/// cloud mean.
struct VolumeOptions {
  int cloud_size = 16;       // must be >= 2*dim + 2
  double spread = 1e-2;      // initial Gaussian perturbation scale
  double dt = 1e-3;
  double t_final = 1.0;
  long record_every = 1;
  std::uint64_t seed = 0;
  /// false: exact unitary flow of H (volume must be conserved);
  /// true: diffusive evolution where every cloud member rides the same
  /// noise path (volume collapses as trajectories synchronize).
  bool with_noise = false;
};

struct VolumeSeries {
  std::vector<double> times;
  std::vector<double> log_volume;
  std::vector<int> rank;         // numerical rank of the tangent covariance
  double initial_log_volume = 0.0;
  double final_log_volume = 0.0;
};

VolumeSeries volume_diagnostic(const QsdModel& model, const StateVector& psi0,
                               const VolumeOptions& options);

}  // namespace qsd
