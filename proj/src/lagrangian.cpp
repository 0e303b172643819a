#include "qsd/lagrangian.hpp"

#include <cmath>

namespace qsd {

namespace {

constexpr Complex kI{0.0, 1.0};

/// Spot check the supplied derivative against a central difference at a few
/// generic points before accepting the force into use.
void validate_derivative(const ToyForce& force) {
  const Complex samples[] = {{0.3, 0.1}, {-0.7, 0.4}, {1.1, -0.9}};
  const double h = 1e-6;
  for (const Complex q : samples) {
    const Complex fd =
        (force.f(q + h) - force.f(q - h)) / (2.0 * h);
    const Complex claimed = force.df(q);
    if (std::abs(fd - claimed) > 1e-4 * std::max(1.0, std::abs(claimed))) {
      throw Error(ErrorKind::contract_violation,
                  "force '" + force.name +
                      "' supplied a derivative inconsistent with a finite "
                      "difference of f");
    }
  }
}

struct ToyState {
  Complex q;
  Complex q_prime;
};

ToyState toy_velocity(const ToyForce& force, const ToyState& s) {
  return {force.f(s.q), -s.q_prime * force.df(s.q)};
}

ToyState rk4_toy_step(const ToyForce& force, const ToyState& s, double dt) {
  const ToyState k1 = toy_velocity(force, s);
  const ToyState k2 = toy_velocity(
      force, {s.q + 0.5 * dt * k1.q, s.q_prime + 0.5 * dt * k1.q_prime});
  const ToyState k3 = toy_velocity(
      force, {s.q + 0.5 * dt * k2.q, s.q_prime + 0.5 * dt * k2.q_prime});
  const ToyState k4 =
      toy_velocity(force, {s.q + dt * k3.q, s.q_prime + dt * k3.q_prime});
  return {s.q + dt / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
          s.q_prime + dt / 6.0 * (k1.q_prime + 2.0 * k2.q_prime +
                                  2.0 * k3.q_prime + k4.q_prime)};
}

/// Raw bilinear coupling mean g = psi^dagger G psi (no normalization; the
/// action treats the field as unconstrained).
double raw_coupling_mean(const Matrix& g, const Vector& psi) {
  return psi.dot(g * psi).real();
}

}  // namespace

ToyForce make_linear_force(Complex a) {
  ToyForce force{"linear", [a](Complex q) { return a * q; },
                 [a](Complex) { return a; }};
  validate_derivative(force);
  return force;
}

ToyForce make_cubic_force(Complex a, Complex b) {
  ToyForce force{"cubic",
                 [a, b](Complex q) { return a * q - b * q * q * q; },
                 [a, b](Complex q) { return a - 3.0 * b * q * q; }};
  validate_derivative(force);
  return force;
}

ToyDivergence toy_divergence(const ToyForce& force, Complex q,
                             Complex /*q_prime*/) {
  const Complex slope = force.df(q);
  return {slope, -slope};
}

ToyMomenta toy_momenta(Complex q, Complex q_prime) {
  return {-q_prime, q};
}

ToySeries evolve_toy(const ToyForce& force, Complex q0, Complex q0_prime,
                     double dt, double t_final, long record_every) {
  const long n_steps = step_count(t_final, dt);
  if (record_every < 1) {
    throw Error(ErrorKind::invalid_argument,
                "record_every must be >= 1, got " +
                    std::to_string(record_every));
  }

  ToySeries series;
  ToyState s{q0, q0_prime};
  const auto record = [&](double t) {
    series.times.push_back(t);
    series.q.push_back(s.q);
    series.q_prime.push_back(s.q_prime);
    series.product.push_back(s.q * s.q_prime);
  };
  record(0.0);
  for (long k = 1; k <= n_steps; ++k) {
    s = rk4_toy_step(force, s, dt);
    if (!std::isfinite(std::abs(s.q)) || !std::isfinite(std::abs(s.q_prime))) {
      throw Error(ErrorKind::oracle_instability,
                  "toy trajectory diverged at t = " +
                      std::to_string(static_cast<double>(k) * dt));
    }
    if (k % record_every == 0 || k == n_steps) {
      record(static_cast<double>(k) * dt);
    }
  }
  return series;
}

ConjugacyReport linear_field_consistency(double omega, Complex q0,
                                         std::optional<Complex> q0_prime,
                                         double dt, double t_final,
                                         long record_every) {
  const ToyForce force = make_linear_force(Complex(0.0, omega));
  const Complex start_prime = q0_prime.value_or(std::conj(q0));
  const ToySeries series =
      evolve_toy(force, q0, start_prime, dt, t_final, record_every);

  ConjugacyReport report;
  report.times = series.times;
  report.deviation.reserve(series.times.size());
  double min_dev = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < series.times.size(); ++r) {
    const double dev = std::abs(series.q_prime[r] - std::conj(series.q[r]));
    report.deviation.push_back(dev);
    report.max_deviation = std::max(report.max_deviation, dev);
    min_dev = std::min(min_dev, dev);
  }
  report.deviation_spread = report.max_deviation - min_dev;
  report.conjugate_preserved = report.max_deviation < 1e-8;
  return report;
}

ExtendedFieldRhs qsd_field_rhs(const QsdModel& model,
                               const ExtendedFieldState& state, Complex nu) {
  const int dim = model.dim();
  if (state.psi.size() != dim || state.psi_prime.size() != dim) {
    throw Error(ErrorKind::invalid_argument,
                "extended field state dimension does not match the model");
  }
  const Matrix& h = model.hamiltonian.entries();
  const Matrix& g = model.coupling.entries();

  const double mean = raw_coupling_mean(g, state.psi);

  // Q psi = (-(1/2) Gd^2 + nu Gd) psi, built from Gd psi.
  const Vector deviation = g * state.psi - mean * state.psi;
  const Vector g_deviation = g * deviation - mean * deviation;
  const Vector q_psi = -0.5 * g_deviation + nu * deviation;

  ExtendedFieldRhs rhs;
  rhs.psi_dot = -kI * (h * state.psi) + q_psi;

  // Q^T psi' assembled the same way with transposed operators.
  const Matrix g_t = g.transpose();
  const Vector deviation_p = g_t * state.psi_prime - mean * state.psi_prime;
  const Vector g_deviation_p = g_t * deviation_p - mean * deviation_p;
  const Vector q_t_psi_prime = -0.5 * g_deviation_p + nu * deviation_p;

  // alpha = psi'^T (Gd - nu) psi, a plain bilinear pairing (no conjugation).
  const Complex alpha =
      state.psi_prime.transpose() * (deviation - nu * state.psi);

  rhs.psi_prime_dot = kI * (h.transpose() * state.psi_prime) - q_t_psi_prime -
                      Complex(0.0, 2.0 * alpha.imag()) *
                          (g_t * state.psi.conjugate());
  return rhs;
}

namespace {

/// Flattens the doubled state into 4N real coordinates and back; the
/// divergence probes below perturb these coordinates one at a time.
Eigen::VectorXd flatten(const ExtendedFieldState& state) {
  const long n = state.psi.size();
  Eigen::VectorXd x(4 * n);
  x.segment(0, n) = state.psi.real();
  x.segment(n, n) = state.psi.imag();
  x.segment(2 * n, n) = state.psi_prime.real();
  x.segment(3 * n, n) = state.psi_prime.imag();
  return x;
}

ExtendedFieldState unflatten(const Eigen::VectorXd& x) {
  const long n = x.size() / 4;
  ExtendedFieldState state;
  state.psi.resize(n);
  state.psi_prime.resize(n);
  state.psi.real() = x.segment(0, n);
  state.psi.imag() = x.segment(n, n);
  state.psi_prime.real() = x.segment(2 * n, n);
  state.psi_prime.imag() = x.segment(3 * n, n);
  return state;
}

Eigen::VectorXd flatten_rhs(const ExtendedFieldRhs& rhs) {
  const long n = rhs.psi_dot.size();
  Eigen::VectorXd v(4 * n);
  v.segment(0, n) = rhs.psi_dot.real();
  v.segment(n, n) = rhs.psi_dot.imag();
  v.segment(2 * n, n) = rhs.psi_prime_dot.real();
  v.segment(3 * n, n) = rhs.psi_prime_dot.imag();
  return v;
}

double fd_divergence(const QsdModel& model, const ExtendedFieldState& state,
                     Complex nu, double fd_step, long coord_begin,
                     long coord_end) {
  if (!(fd_step > 0.0)) {
    throw Error(ErrorKind::invalid_argument,
                "finite-difference step must be > 0");
  }
  const Eigen::VectorXd x0 = flatten(state);
  double divergence = 0.0;
  for (long c = coord_begin; c < coord_end; ++c) {
    Eigen::VectorXd x = x0;
    x(c) = x0(c) + fd_step;
    const Eigen::VectorXd forward =
        flatten_rhs(qsd_field_rhs(model, unflatten(x), nu));
    x(c) = x0(c) - fd_step;
    const Eigen::VectorXd backward =
        flatten_rhs(qsd_field_rhs(model, unflatten(x), nu));
    divergence += (forward(c) - backward(c)) / (2.0 * fd_step);
  }
  return divergence;
}

}  // namespace

double extended_divergence(const QsdModel& model,
                           const ExtendedFieldState& state, Complex nu,
                           double fd_step) {
  return fd_divergence(model, state, nu, fd_step, 0, 4 * model.dim());
}

double state_only_divergence(const QsdModel& model,
                             const ExtendedFieldState& state, Complex nu,
                             double fd_step) {
  return fd_divergence(model, state, nu, fd_step, 0, 2 * model.dim());
}

MomentumDriftSeries momentum_drift_experiment(const QsdModel& model,
                                              const StateVector& psi0,
                                              NoiseStream& stream,
                                              double t_final,
                                              long record_every) {
  const double dt = stream.dt();
  const long n_steps = step_count(t_final, dt);
  if (record_every < 1) {
    throw Error(ErrorKind::invalid_argument,
                "record_every must be >= 1, got " +
                    std::to_string(record_every));
  }

  ExtendedFieldState state;
  state.psi = normalize(psi0).amplitudes();
  state.psi_prime = state.psi.conjugate();

  MomentumDriftSeries series;
  const auto record = [&](double t, Complex nu) {
    const double dev = (state.psi_prime - state.psi.conjugate()).norm();
    series.times.push_back(t);
    series.deviation.push_back(dev);
    series.state_norm.push_back(state.psi.norm());
    series.states.push_back(state);
    series.rates.push_back(nu);
    series.max_deviation = std::max(series.max_deviation, dev);
  };
  record(0.0, Complex(0.0, 0.0));

  // Explicit Euler on the frozen-rate field: at unit norm the psi update
  // psi + dt (-iH psi + Q psi) with nu = d_xi/dt coincides with the raw
  // stochastic update psi + dt drift + d_xi diffusion.
  for (long k = 1; k <= n_steps; ++k) {
    const Complex nu = stream.next().value() / dt;
    const ExtendedFieldRhs rhs = qsd_field_rhs(model, state, nu);
    state.psi += dt * rhs.psi_dot;
    state.psi_prime += dt * rhs.psi_prime_dot;
    if (!state.psi.allFinite() || !state.psi_prime.allFinite()) {
      throw Error(ErrorKind::oracle_instability,
                  "extended field trajectory diverged at t = " +
                      std::to_string(static_cast<double>(k) * dt));
    }
    if (k % record_every == 0 || k == n_steps) {
      record(static_cast<double>(k) * dt, nu);
    }
  }
  series.final_deviation = series.deviation.back();
  return series;
}

}  // namespace qsd
