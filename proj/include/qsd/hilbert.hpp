#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>

#include "qsd/errors.hpp"

namespace qsd {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// A ket in a finite-dimensional Hilbert space.  Amplitudes are stored as
/// given; normalization is tracked, not enforced, so raw (unnormalized)
/// states remain representable.
class StateVector {
 public:
  static constexpr double kNormTolerance = 1e-12;
  static constexpr double kNormFloor = 1e-14;

  explicit StateVector(Vector amplitudes, std::string basis_label = {});

  int dim() const { return static_cast<int>(amplitudes_.size()); }
  const Vector& amplitudes() const { return amplitudes_; }
  const std::string& basis_label() const { return basis_label_; }

  double norm() const { return amplitudes_.norm(); }
  bool is_normalized(double tolerance = kNormTolerance) const;

 private:
  Vector amplitudes_;
  std::string basis_label_;
};

/// A Hermitian matrix.  Construction symmetrizes the input, (A + A†)/2, and
/// records how large a correction that took; corrections above
/// kWarnThreshold are reported on stderr so silently lopsided input does not
/// pass unnoticed.
class HermitianOperator {
 public:
  static constexpr double kHermitianTolerance = 1e-12;
  static constexpr double kWarnThreshold = 1e-10;

  explicit HermitianOperator(const Matrix& entries);

  static HermitianOperator zero(int dim);
  static HermitianOperator identity(int dim);
  static HermitianOperator diagonal(const RealVector& values);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }

  /// Largest entry-wise adjustment applied by symmetrization.
  double symmetrization_correction() const { return correction_; }

 private:
  HermitianOperator() = default;

  Matrix entries_;
  double correction_ = 0.0;
};

/// A density matrix: Hermitian, unit trace, eigenvalues >= -tolerance.
class DensityMatrix {
 public:
  static constexpr double kTraceTolerance = 1e-10;
  static constexpr double kPositivityTolerance = 1e-10;

  explicit DensityMatrix(const Matrix& entries);

  /// Pure-state projector |psi><psi| for a normalized state.
  static DensityMatrix pure(const StateVector& psi);
  static DensityMatrix maximally_mixed(int dim);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  Matrix entries_;
  double min_eigenvalue_ = 0.0;
};

/// <psi|G|psi> / <psi|psi>.  Defined for any nonzero state; the imaginary
/// residue of the quadratic form must stay below 1e-10 or the operator
/// storage is considered corrupted.
double expectation(const StateVector& psi, const HermitianOperator& g);

/// G - <G> I, the fluctuation operator around the state's mean.
HermitianOperator shifted_operator(const HermitianOperator& g,
                                   const StateVector& psi);

/// <G^2> - <G>^2, computed as || (G - <G>) psi ||^2 for a normalized state.
double variance(const StateVector& psi, const HermitianOperator& g);

/// psi / ||psi||.  Norms below StateVector::kNormFloor are degenerate.
StateVector normalize(const StateVector& psi);

}  // namespace qsd
