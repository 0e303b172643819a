#include "qsd/propagator.hpp"

#include <cmath>

namespace qsd {

namespace {

constexpr Complex kMinusI{0.0, -1.0};

double spectral_radius(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

QsdModel::QsdModel(HermitianOperator h, HermitianOperator g)
    : hamiltonian(std::move(h)), coupling(std::move(g)) {
  if (hamiltonian.dim() != coupling.dim()) {
    throw Error(ErrorKind::invalid_argument,
                "hamiltonian dimension " + std::to_string(hamiltonian.dim()) +
                    " does not match coupling dimension " +
                    std::to_string(coupling.dim()));
  }
}

const char* to_string(SchemeKind kind) noexcept {
  switch (kind) {
    case SchemeKind::euler_maruyama:
      return "euler-maruyama";
    case SchemeKind::euler_renormalized:
      return "euler-renormalized";
  }
  return "unknown";
}

StepScheme::StepScheme(SchemeKind kind_in, double dt_in)
    : kind(kind_in), dt(dt_in) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorKind::invalid_argument,
                "step scheme needs a finite dt > 0, got " + std::to_string(dt));
  }
}

std::optional<std::string> stability_warning(const QsdModel& model,
                                             const StepScheme& scheme) {
  const double radius = spectral_radius(model.coupling.entries());
  const double budget = scheme.dt * radius * radius;
  if (budget >= 0.5) {
    return "dt * ||G||^2 = " + std::to_string(budget) +
           " >= 0.5; the explicit damping update is marginally stable, "
           "reduce dt or rescale G";
  }
  return std::nullopt;
}

Vector drift(const QsdModel& model, const StateVector& psi) {
  StepKernel kernel(model, StepScheme(SchemeKind::euler_maruyama, 1.0));
  kernel.reset(psi);
  return kernel.drift_field();
}

Vector diffusion(const QsdModel& model, const StateVector& psi) {
  StepKernel kernel(model, StepScheme(SchemeKind::euler_maruyama, 1.0));
  kernel.reset(psi);
  return kernel.diffusion_field();
}

StateVector step(const QsdModel& model, const StateVector& psi,
                 const StepScheme& scheme, ComplexIncrement d_xi) {
  StepKernel kernel(model, scheme);
  kernel.reset(psi);
  kernel.advance(d_xi);
  return StateVector(kernel.state(), psi.basis_label());
}

StepKernel::StepKernel(const QsdModel& model, const StepScheme& scheme)
    : h_(&model.hamiltonian.entries()),
      g_(&model.coupling.entries()),
      scheme_(scheme) {
  const int n = model.dim();
  psi_.resize(n);
  g_psi_.resize(n);
  deviation_.resize(n);
  g_deviation_.resize(n);
  h_psi_.resize(n);
  next_.resize(n);
}

void StepKernel::reset(const StateVector& psi0) {
  if (psi0.dim() != psi_.size()) {
    throw Error(ErrorKind::invalid_argument,
                "initial state dimension " + std::to_string(psi0.dim()) +
                    " does not match model dimension " +
                    std::to_string(psi_.size()));
  }
  pre_norm_ = psi0.norm();
  if (pre_norm_ < StateVector::kNormFloor) {
    throw Error(ErrorKind::degenerate_state,
                "initial state norm " + std::to_string(pre_norm_) +
                    " is below the renormalization floor");
  }
  if (scheme_.kind == SchemeKind::euler_renormalized) {
    psi_ = psi0.amplitudes() / pre_norm_;
  } else {
    psi_ = psi0.amplitudes();
  }
}

void StepKernel::advance(ComplexIncrement d_xi) {
  const double norm_sq = psi_.squaredNorm();
  g_psi_.noalias() = (*g_) * psi_;
  // <G> on the normalized direction keeps the raw scheme scale covariant.
  const double mean = psi_.dot(g_psi_).real() / norm_sq;
  deviation_ = g_psi_ - mean * psi_;
  g_deviation_.noalias() = (*g_) * deviation_;
  g_deviation_ -= mean * deviation_;
  h_psi_.noalias() = (*h_) * psi_;
  next_ = psi_ + scheme_.dt * (kMinusI * h_psi_ - 0.5 * g_deviation_) +
          d_xi.value() * deviation_;
  pre_norm_ = next_.norm();
  if (pre_norm_ < StateVector::kNormFloor) {
    throw Error(ErrorKind::degenerate_state,
                "state norm collapsed to " + std::to_string(pre_norm_) +
                    " during a step");
  }
  if (scheme_.kind == SchemeKind::euler_renormalized) {
    psi_ = next_ / pre_norm_;
  } else {
    psi_.swap(next_);
  }
}

double StepKernel::coupling_mean() const {
  const double norm_sq = psi_.squaredNorm();
  return psi_.dot((*g_) * psi_).real() / norm_sq;
}

double StepKernel::coupling_variance() const {
  const double norm_sq = psi_.squaredNorm();
  const double mean = psi_.dot((*g_) * psi_).real() / norm_sq;
  return ((*g_) * psi_ - mean * psi_).squaredNorm() / norm_sq;
}

Vector StepKernel::drift_field() const {
  const double norm_sq = psi_.squaredNorm();
  const double mean = psi_.dot((*g_) * psi_).real() / norm_sq;
  const Vector deviation = (*g_) * psi_ - mean * psi_;
  return kMinusI * ((*h_) * psi_) -
         0.5 * ((*g_) * deviation - mean * deviation);
}

Vector StepKernel::diffusion_field() const {
  const double norm_sq = psi_.squaredNorm();
  const double mean = psi_.dot((*g_) * psi_).real() / norm_sq;
  return (*g_) * psi_ - mean * psi_;
}

long step_count(double t_final, double dt) {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw Error(ErrorKind::invalid_argument,
                "t_final must be finite and > 0, got " +
                    std::to_string(t_final));
  }
  const double exact = t_final / dt;
  const long n = std::llround(exact);
  if (n < 1 || std::abs(exact - static_cast<double>(n)) >
                   1e-9 * std::max(1.0, exact)) {
    throw Error(ErrorKind::invalid_argument,
                "t_final = " + std::to_string(t_final) +
                    " is not an integer multiple of dt = " +
                    std::to_string(dt));
  }
  return n;
}

std::vector<double> record_times(double dt, long n_steps, long record_every) {
  if (record_every < 1) {
    throw Error(ErrorKind::invalid_argument,
                "record_every must be >= 1, got " +
                    std::to_string(record_every));
  }
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(n_steps / record_every + 2));
  times.push_back(0.0);
  for (long s = 1; s <= n_steps; ++s) {
    if (s % record_every == 0 || s == n_steps) {
      times.push_back(static_cast<double>(s) * dt);
    }
  }
  return times;
}

TrajectoryRecord evolve_trajectory(const QsdModel& model,
                                   const StateVector& psi0,
                                   const StepScheme& scheme,
                                   NoiseStream& stream, double t_final,
                                   long record_every) {
  const long n_steps = step_count(t_final, scheme.dt);
  if (std::abs(stream.dt() - scheme.dt) > 1e-15 * std::max(1.0, scheme.dt)) {
    throw Error(ErrorKind::invalid_argument,
                "noise stream dt does not match the scheme dt");
  }

  TrajectoryRecord record;
  const std::size_t n_records =
      record_times(scheme.dt, n_steps, record_every).size();
  record.times.reserve(n_records);
  record.states.reserve(n_records);
  record.coupling_mean.reserve(n_records);
  record.coupling_var.reserve(n_records);
  record.norms.reserve(n_records);

  StepKernel kernel(model, scheme);
  kernel.reset(psi0);
  try {
    drive_trajectory(kernel, stream, n_steps, record_every,
                     [&](long, double t, const StepKernel& k) {
                       record.times.push_back(t);
                       record.states.push_back(k.state());
                       record.coupling_mean.push_back(k.coupling_mean());
                       record.coupling_var.push_back(k.coupling_variance());
                       record.norms.push_back(k.pre_normalization_norm());
                     });
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::degenerate_state) {
      const double t_fail = record.times.empty()
                                ? 0.0
                                : record.times.back();
      throw Error(ErrorKind::degenerate_state,
                  std::string(e.what()) + " (last recorded t = " +
                      std::to_string(t_fail) + ")");
    }
    throw;
  }
  return record;
}

}  // namespace qsd
