#include "qsd/oscillator.hpp"

#include <cmath>

namespace qsd {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

void require_matching_modes(long modes, long omegas) {
  if (modes != omegas) {
    throw Error(ErrorKind::invalid_argument,
                "mode count " + std::to_string(modes) +
                    " does not match frequency count " +
                    std::to_string(omegas));
  }
}

/// Real embedding x = [Re psi; Im psi].
Eigen::VectorXd embed(const Vector& psi) {
  const long n = psi.size();
  Eigen::VectorXd x(2 * n);
  x.head(n) = psi.real();
  x.tail(n) = psi.imag();
  return x;
}

double half_log_det_tangent_covariance(const std::vector<Vector>& cloud,
                                       int* rank_out) {
  const long k = static_cast<long>(cloud.size());
  const long n = cloud.front().size();
  const long d = 2 * n;

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  std::vector<Eigen::VectorXd> points;
  points.reserve(static_cast<std::size_t>(k));
  for (const Vector& psi : cloud) {
    points.push_back(embed(psi));
    mean += points.back();
  }
  mean /= static_cast<double>(k);

  // Directions dropped from the tangent space: the radial direction at the
  // mean and the global-phase direction (the embedding of i * mean).  They
  // are exactly orthogonal to each other.
  Eigen::MatrixXd dropped(d, 2);
  dropped.col(0) = mean.normalized();
  Eigen::VectorXd phase(d);
  phase.head(n) = -mean.tail(n);
  phase.tail(n) = mean.head(n);
  dropped.col(1) = phase.normalized();

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(dropped);
  const Eigen::MatrixXd full_q =
      qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd tangent_basis = full_q.rightCols(d - 2);

  Eigen::MatrixXd covariance = Eigen::MatrixXd::Zero(d, d);
  for (const Eigen::VectorXd& x : points) {
    const Eigen::VectorXd delta = x - mean;
    covariance.noalias() += delta * delta.transpose();
  }
  covariance /= static_cast<double>(k - 1);

  const Eigen::MatrixXd reduced =
      tangent_basis.transpose() * covariance * tangent_basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      reduced, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd eigs = solver.eigenvalues();

  const double top = eigs.maxCoeff();
  const double rank_floor = std::max(1e-300, top * 1e-12);
  int rank = 0;
  double half_log_det = 0.0;
  for (long j = 0; j < eigs.size(); ++j) {
    if (eigs(j) > rank_floor) {
      rank += 1;
    }
    half_log_det += 0.5 * std::log(std::max(eigs(j), 1e-60));
  }
  if (rank_out != nullptr) {
    *rank_out = rank;
  }
  return half_log_det;
}

}  // namespace

OscillatorCoordinates to_oscillator(const StateVector& psi) {
  OscillatorCoordinates coords;
  coords.q = kSqrt2 * psi.amplitudes().real();
  coords.p = kSqrt2 * psi.amplitudes().imag();
  return coords;
}

StateVector from_oscillator(const OscillatorCoordinates& coords) {
  if (coords.q.size() != coords.p.size()) {
    throw Error(ErrorKind::invalid_argument,
                "coordinate vectors q and p have different lengths");
  }
  Vector psi(coords.q.size());
  psi.real() = coords.q / kSqrt2;
  psi.imag() = coords.p / kSqrt2;
  return StateVector(std::move(psi));
}

double oscillator_energy(const OscillatorCoordinates& coords,
                         const RealVector& omega) {
  require_matching_modes(coords.q.size(), omega.size());
  double energy = 0.0;
  for (long j = 0; j < omega.size(); ++j) {
    energy += 0.5 * omega(j) *
              (coords.q(j) * coords.q(j) + coords.p(j) * coords.p(j));
  }
  return energy;
}

HermitianOperator mode_hamiltonian(const RealVector& omega) {
  return HermitianOperator::diagonal(omega);
}

FlowCheckReport hamilton_flow_check(const RealVector& omega,
                                    const StateVector& psi0, double dt,
                                    double t_final, long record_every) {
  require_matching_modes(psi0.dim(), omega.size());
  const long n_steps = step_count(t_final, dt);
  const long n = omega.size();

  FlowCheckReport report;

  OscillatorCoordinates coords = to_oscillator(psi0);
  Vector psi = psi0.amplitudes();
  const Vector psi_start = psi;
  const double energy_start = oscillator_energy(coords, omega);

  // Per-mode RK4 stage buffers; both systems are linear mode rotations, so
  // the stages are cheap scalars.
  const auto rk4_canonical = [&](double& q, double& p, double w) {
    const double k1q = w * p, k1p = -w * q;
    const double k2q = w * (p + 0.5 * dt * k1p), k2p = -w * (q + 0.5 * dt * k1q);
    const double k3q = w * (p + 0.5 * dt * k2p), k3p = -w * (q + 0.5 * dt * k2q);
    const double k4q = w * (p + dt * k3p), k4p = -w * (q + dt * k3q);
    q += dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
    p += dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
  };
  const auto rk4_amplitude = [&](Complex& a, double w) {
    const Complex iw{0.0, -w};
    const Complex k1 = iw * a;
    const Complex k2 = iw * (a + 0.5 * dt * k1);
    const Complex k3 = iw * (a + 0.5 * dt * k2);
    const Complex k4 = iw * (a + dt * k3);
    a += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  const auto record = [&](double t) {
    report.times.push_back(t);
    report.q.push_back(coords.q);
    report.p.push_back(coords.p);
    double canonical_dev = 0.0, amplitude_dev = 0.0, cross_dev = 0.0;
    for (long j = 0; j < n; ++j) {
      const Complex exact = psi_start(j) * std::exp(Complex(0.0, -omega(j) * t));
      const Complex exact_qp = kSqrt2 * exact;
      canonical_dev = std::max(
          canonical_dev, std::abs(Complex(coords.q(j), coords.p(j)) - exact_qp));
      amplitude_dev = std::max(amplitude_dev, std::abs(psi(j) - exact));
      cross_dev = std::max(
          cross_dev,
          std::abs(Complex(coords.q(j), coords.p(j)) / kSqrt2 - psi(j)));
    }
    report.max_canonical_deviation =
        std::max(report.max_canonical_deviation, canonical_dev);
    report.max_amplitude_deviation =
        std::max(report.max_amplitude_deviation, amplitude_dev);
    report.max_cross_deviation =
        std::max(report.max_cross_deviation, cross_dev);
    report.max_energy_drift =
        std::max(report.max_energy_drift,
                 std::abs(oscillator_energy(coords, omega) - energy_start));
  };

  record(0.0);
  for (long s = 1; s <= n_steps; ++s) {
    for (long j = 0; j < n; ++j) {
      rk4_canonical(coords.q(j), coords.p(j), omega(j));
      rk4_amplitude(psi(j), omega(j));
    }
    if (s % record_every == 0 || s == n_steps) {
      record(static_cast<double>(s) * dt);
    }
  }

  report.pass = report.max_canonical_deviation < report.tolerance &&
                report.max_amplitude_deviation < report.tolerance &&
                report.max_cross_deviation < report.tolerance &&
                report.max_energy_drift < report.tolerance;
  return report;
}

VolumeSeries volume_diagnostic(const QsdModel& model, const StateVector& psi0,
                               const VolumeOptions& options) {
  const int dim = model.dim();
  if (options.cloud_size < 2 * dim + 2) {
    throw Error(ErrorKind::invalid_argument,
                "cloud size " + std::to_string(options.cloud_size) +
                    " is below the covariance minimum " +
                    std::to_string(2 * dim + 2));
  }
  if (!(options.spread > 0.0)) {
    throw Error(ErrorKind::invalid_argument,
                "cloud spread must be > 0");
  }
  const long n_steps = step_count(options.t_final, options.dt);
  const std::vector<double> grid =
      record_times(options.dt, n_steps, options.record_every);

  // Cloud members: normalized Gaussian perturbations of psi0, each from its
  // own stream so the cloud shape is independent of the driving path.
  const Vector center = normalize(psi0).amplitudes();
  std::vector<Vector> cloud;
  cloud.reserve(static_cast<std::size_t>(options.cloud_size));
  for (int m = 0; m < options.cloud_size; ++m) {
    NoiseStream perturbation(options.seed, 1000 + static_cast<std::uint64_t>(m),
                             options.dt);
    Vector delta(dim);
    for (int j = 0; j < dim; ++j) {
      delta(j) = Complex(perturbation.next_normal(),
                         perturbation.next_normal());
    }
    Vector member = center + options.spread * delta;
    cloud.push_back(member / member.norm());
  }

  VolumeSeries series;
  series.times = grid;
  series.log_volume.reserve(grid.size());
  series.rank.reserve(grid.size());

  const auto record_volume = [&](const std::vector<Vector>& members) {
    int rank = 0;
    const double lv = half_log_det_tangent_covariance(members, &rank);
    series.log_volume.push_back(lv);
    series.rank.push_back(rank);
  };

  if (!options.with_noise) {
    // Exact unitary flow of the Hamiltonian; step error would otherwise
    // masquerade as volume change.
    Eigen::SelfAdjointEigenSolver<Matrix> solver(model.hamiltonian.entries());
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorKind::contract_violation,
                  "eigendecomposition of the Hamiltonian failed");
    }
    const Matrix basis = solver.eigenvectors();
    const RealVector levels = solver.eigenvalues();
    std::vector<Vector> rotated(cloud.size());
    std::vector<Vector> mode_coords(cloud.size());
    for (std::size_t m = 0; m < cloud.size(); ++m) {
      mode_coords[m] = basis.adjoint() * cloud[m];
    }
    for (double t : grid) {
      Vector phases(dim);
      for (int j = 0; j < dim; ++j) {
        phases(j) = std::exp(Complex(0.0, -levels(j) * t));
      }
      for (std::size_t m = 0; m < cloud.size(); ++m) {
        rotated[m] = basis * phases.cwiseProduct(mode_coords[m]);
      }
      record_volume(rotated);
    }
  } else {
    // Every member rides the same increment sequence; the spread between
    // members is all that the covariance sees.
    NoiseStream common(options.seed, 0, options.dt);
    const StepScheme scheme(SchemeKind::euler_renormalized, options.dt);
    std::vector<StepKernel> kernels;
    kernels.reserve(cloud.size());
    for (const Vector& member : cloud) {
      kernels.emplace_back(model, scheme);
      kernels.back().reset(StateVector(member));
    }
    std::vector<Vector> snapshot(cloud.size());
    const auto snap = [&]() {
      for (std::size_t m = 0; m < kernels.size(); ++m) {
        snapshot[m] = kernels[m].state();
      }
      record_volume(snapshot);
    };
    snap();
    for (long s = 1; s <= n_steps; ++s) {
      const ComplexIncrement d_xi = common.next();
      for (StepKernel& kernel : kernels) {
        kernel.advance(d_xi);
      }
      if (s % options.record_every == 0 || s == n_steps) {
        snap();
      }
    }
  }

  series.initial_log_volume = series.log_volume.front();
  series.final_log_volume = series.log_volume.back();
  return series;
}

}  // namespace qsd
