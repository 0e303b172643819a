#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qsd/hilbert.hpp"
#include "qsd/noise.hpp"

namespace qsd {

/// Open-system model: Hamiltonian drift under H plus a single self-adjoint
/// environment coupling G.  Coupling strength is carried inside G itself.
struct QsdModel {
  HermitianOperator hamiltonian;
  HermitianOperator coupling;

  QsdModel(HermitianOperator h, HermitianOperator g);

  int dim() const { return hamiltonian.dim(); }
};

enum class SchemeKind {
  euler_maruyama,      // raw update, norm follows its own random walk
  euler_renormalized,  // raw update followed by projection back to unit norm
};

const char* to_string(SchemeKind kind) noexcept;

struct StepScheme {
  SchemeKind kind = SchemeKind::euler_renormalized;
  double dt = 0.0;

  StepScheme(SchemeKind kind, double dt);
};

/// Non-fatal step-size advice: dt * ||G||^2 above 1/2 makes the quadratic
/// damping term marginally stable for an explicit Euler update.
std::optional<std::string> stability_warning(const QsdModel& model,
                                             const StepScheme& scheme);

/// Deterministic part of the state velocity, -iH psi - (1/2) Gd^2 psi, where
/// Gd = G - <G>.  The mean <G> is taken on the normalized direction of psi,
/// and the operators act on psi as given, so the field scales linearly with
/// the state.
Vector drift(const QsdModel& model, const StateVector& psi);

/// Stochastic mode, Gd psi, multiplying the complex increment.
Vector diffusion(const QsdModel& model, const StateVector& psi);

/// One explicit step psi + drift dt + diffusion d_xi, renormalized when the
/// scheme asks for it.
StateVector step(const QsdModel& model, const StateVector& psi,
                 const StepScheme& scheme, ComplexIncrement d_xi);

/// Reusable stepping workspace: all buffers are allocated once, so a million
/// advance() calls make no heap traffic.  The ensemble driver and the
/// single-trajectory API both run on this.
class StepKernel {
 public:
  StepKernel(const QsdModel& model, const StepScheme& scheme);

  void reset(const StateVector& psi0);

  /// Advance one step.  Throws Error(degenerate_state) if the updated norm
  /// falls below StateVector::kNormFloor.
  void advance(ComplexIncrement d_xi);

  const Vector& state() const { return psi_; }
  const StepScheme& scheme() const { return scheme_; }

  /// Norm of the raw update before any renormalization (after reset: the
  /// norm of the initial state).
  double pre_normalization_norm() const { return pre_norm_; }

  /// <G> and Var(G) on the normalized direction of the current state.
  double coupling_mean() const;
  double coupling_variance() const;

  /// Velocity fields evaluated at the current state (fresh vectors, not
  /// workspace views).
  Vector drift_field() const;
  Vector diffusion_field() const;

 private:
  const Matrix* h_;
  const Matrix* g_;
  StepScheme scheme_;
  Vector psi_;
  Vector g_psi_, deviation_, g_deviation_, h_psi_, next_;
  double pre_norm_ = 1.0;
};

/// One trajectory sampled on a fixed record grid.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<Vector> states;          // as evolved (unit norm when renormalized)
  std::vector<double> coupling_mean;   // <G>(t)
  std::vector<double> coupling_var;    // Var(G)(t)
  std::vector<double> norms;           // pre-renormalization step norm
};

/// Number of steps implied by (t_final, dt); t_final must sit on the step
/// grid to one part in 1e-9.
long step_count(double t_final, double dt);

/// Record-grid times: step 0, every record_every-th step, and the final
/// step.  Identical for every trajectory with the same (dt, t_final,
/// record_every), which is what makes ensemble records line up.
std::vector<double> record_times(double dt, long n_steps, long record_every);

TrajectoryRecord evolve_trajectory(const QsdModel& model,
                                   const StateVector& psi0,
                                   const StepScheme& scheme,
                                   NoiseStream& stream, double t_final,
                                   long record_every);

/// Core loop shared by the trajectory and ensemble drivers.  The observer is
/// called as observer(record_index, time, kernel) on the record grid.
template <typename Observer>
void drive_trajectory(StepKernel& kernel, NoiseStream& stream, long n_steps,
                      long record_every, Observer&& observer) {
  const double dt = kernel.scheme().dt;
  long record_index = 0;
  observer(record_index++, 0.0, kernel);
  for (long s = 1; s <= n_steps; ++s) {
    kernel.advance(stream.next());
    if (s % record_every == 0 || s == n_steps) {
      observer(record_index++, static_cast<double>(s) * dt, kernel);
    }
  }
}

}  // namespace qsd
